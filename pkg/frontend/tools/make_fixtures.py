"""Capture wire fixtures for the frontend replay test from the real service.

Runs the four-turn refinement scenario (insert cube, enlarge, enlarge, move,
then undo everything) against an in-process service and dumps every
request/response pair to tests/fixtures.json. Regenerate after wire-format
changes: python tools/make_fixtures.py
"""

import json
import pathlib
import sys

from fastapi.testclient import TestClient

from cadseq import edit
from cadseq.formats import ReprKind, print_model
from cadseq.model import canonicalize
from cadseq.service import ServiceConfig, create_app

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[2] / "tests"))
from conftest import unit_cube_model  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures.json"


def main():
    client = TestClient(create_app(ServiceConfig()))
    log = []

    def call(method, path, body=None):
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, json=body)
        log.append(
            {
                "method": method,
                "path": path,
                "request": body,
                "status": response.status_code,
                "response": response.json(),
            }
        )
        return response.json()

    cube = canonicalize(unit_cube_model())
    created = call("POST", "/session", {"backend": "manual", "kind": "dsl"})
    sid = created["id"]

    insert = edit.EditScript(
        actions=(edit.InsertOp(0, cube.ops[0]),), edited_ops_b=frozenset([0])
    )
    turns = [
        ("add a unit cube at the origin", insert),
        (
            "enlarge the cube",
            edit.EditScript(
                actions=(edit.ModifyParam("ops[0].scale", 1.0, 1.3),),
                edited_ops_a=frozenset([0]),
                edited_ops_b=frozenset([0]),
            ),
        ),
        (
            "enlarge it a bit more",
            edit.EditScript(
                actions=(edit.ModifyParam("ops[0].scale", 1.3, 1.6),),
                edited_ops_a=frozenset([0]),
                edited_ops_b=frozenset([0]),
            ),
        ),
        (
            "move it toward the base edge",
            edit.EditScript(
                actions=(edit.ModifyParam("ops[0].frame.origin[0]", 0.0, 0.5),),
                edited_ops_a=frozenset([0]),
                edited_ops_b=frozenset([0]),
            ),
        ),
    ]
    for instruction, script in turns:
        call(
            "POST",
            f"/session/{sid}/turn",
            {"instruction": instruction, "script": edit.script_to_record(script)},
        )
    for _ in range(3):
        call("POST", f"/session/{sid}/undo")
    call("GET", f"/session/{sid}")

    OUT.write_text(json.dumps({"session_id": sid, "calls": log}, indent=2) + "\n")
    print(f"wrote {OUT} with {len(log)} calls")


if __name__ == "__main__":
    main()
