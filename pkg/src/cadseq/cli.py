"""Batch command-line entry points mirroring the service.

Exit codes: 0 success, 1 domain error (diagnostics on stderr), 2 usage
error. Sampling commands require an explicit --seed so every reported
number is reproducible. Record output (--records / stdout) uses the same
JSON byte layout as the service responses.
"""

from __future__ import annotations

import json
import sys

import click

from . import datagen, edit, formats, geom, metrics, reward
from .errors import CadError, ParseError
from .model import CadModel, validate


def wire_json(obj) -> str:
    """Byte layout shared with the service's JSON responses."""
    return json.dumps(obj, ensure_ascii=False, allow_nan=False, separators=(",", ":"))


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        _fail(str(exc))


def _kind_for(path: str, explicit: str | None) -> formats.ReprKind:
    if explicit:
        return formats.ReprKind(explicit)
    try:
        return formats.kind_for_path(path)
    except ValueError as exc:
        _fail(str(exc))


def _load_model(path: str, kind: str | None) -> CadModel:
    k = _kind_for(path, kind)
    try:
        return formats.parse(_read_text(path), k)
    except ParseError as exc:
        _fail(f"{path}: {exc}")


_KIND_CHOICES = click.Choice([k.value for k in formats.ReprKind])


@click.group()
@click.version_option(package_name="cadseq")
def main():
    """Sketch-extrude CAD sequence toolkit."""


@main.command()
@click.argument("input_path")
@click.option("--to", "to_kind", type=_KIND_CHOICES, required=True, help="Target representation.")
@click.option("--from", "from_kind", type=_KIND_CHOICES, default=None,
              help="Source representation (default: inferred from the file extension).")
@click.option("-o", "--output", default=None, help="Output file (default: stdout).")
def convert(input_path, to_kind, from_kind, output):
    """Convert a model file between representations."""
    src_kind = _kind_for(input_path, from_kind)
    try:
        text = formats.convert(_read_text(input_path), src_kind, formats.ReprKind(to_kind))
    except ParseError as exc:
        _fail(f"{input_path}: {exc}")
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command("validate")
@click.argument("input_path")
@click.option("--kind", type=_KIND_CHOICES, default=None)
@click.option("--records", is_flag=True, help="Emit a machine-readable JSON report.")
def validate_cmd(input_path, kind, records):
    """Validate a model file; exit 1 when invalid."""
    k = _kind_for(input_path, kind)
    try:
        model = formats.parse(_read_text(input_path), k)
    except ParseError as exc:
        if records:
            click.echo(wire_json({"valid": False, "violations": [
                {"path": "", "message": str(exc)}]}))
        else:
            click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    report = validate(model)
    if records:
        click.echo(wire_json({
            "valid": report.ok,
            "violations": [{"path": v.path, "message": v.message} for v in report.violations],
        }))
    elif report.ok:
        click.echo("valid")
    else:
        for v in report.violations:
            click.echo(f"{v.path}: {v.message}", err=True)
    sys.exit(0 if report.ok else 1)


@main.command("eval")
@click.argument("manifest")
@click.option("--kind", type=_KIND_CHOICES, required=True,
              help="Representation of the generated texts.")
@click.option("--n", type=int, default=2048, show_default=True, help="Points per cloud.")
@click.option("--seed", type=int, required=True, help="Sampling seed.")
@click.option("--records", default=None, help="Write per-item JSONL records to this path.")
def eval_cmd(manifest, kind, n, seed, records):
    """Evaluate a manifest of (generated, target) file pairs.

    Each manifest line is 'generated_path<TAB>target_path'. Prints the
    summary record (IR, mean/median CD) to stdout.
    """
    summary = metrics.evaluate_manifest(
        manifest, formats.ReprKind(kind), n=n, seed=seed, records_path=records
    )
    click.echo(wire_json(summary.to_record()))


@main.command("reward")
@click.argument("manifest")
@click.option("--kind", type=_KIND_CHOICES, required=True)
@click.option("--alpha", type=float, default=5.0, show_default=True)
@click.option("--beta", type=float, default=0.01, show_default=True)
@click.option("--length-unit", type=click.Choice(["primitives", "characters"]),
              default="primitives", show_default=True)
@click.option("--n", type=int, default=2048, show_default=True)
@click.option("--seed", type=int, required=True, help="Sampling seed.")
@click.option("--records", default=None, help="Write breakdown JSONL here instead of stdout.")
def reward_cmd(manifest, kind, alpha, beta, length_unit, n, seed, records):
    """Score a manifest of generated outputs.

    Manifest lines: 'generated<TAB>target[<TAB>current[<TAB>script]]' file
    paths; one breakdown record is emitted per line.
    """
    cfg = reward.RewardConfig(
        alpha=alpha, beta=beta, length_unit=length_unit,
        kind=formats.ReprKind(kind), n_points=n, seed=seed,
    )
    out_lines = []
    with open(manifest, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                _fail(f"manifest line {line_no}: expected at least 2 paths")
            generated = _read_text(parts[0])
            target = _load_model(parts[1], None)
            current = _load_model(parts[2], None) if len(parts) > 2 and parts[2] else None
            script = None
            if len(parts) > 3 and parts[3]:
                try:
                    script = edit.script_from_text(_read_text(parts[3]))
                except ValueError as exc:
                    _fail(f"manifest line {line_no}: {exc}")
            try:
                breakdown = reward.score(
                    generated, target, current=current, script=script, cfg=cfg,
                    episode_id=str(line_no - 1),
                )
            except CadError as exc:
                _fail(f"manifest line {line_no}: {exc}")
            out_lines.append(wire_json(breakdown.to_record()))
    if records:
        with open(records, "w", encoding="utf-8") as fh:
            fh.write("\n".join(out_lines) + ("\n" if out_lines else ""))
    else:
        for line in out_lines:
            click.echo(line)


@main.group("edit")
def edit_group():
    """Apply, derive or invert edit scripts."""


@edit_group.command("apply")
@click.argument("model_path")
@click.argument("script_path")
@click.option("--kind", type=_KIND_CHOICES, default=None)
@click.option("-o", "--output", default=None)
def edit_apply(model_path, script_path, kind, output):
    """Apply a script file to a model file."""
    model = _load_model(model_path, kind)
    try:
        script = edit.script_from_text(_read_text(script_path))
        result = edit.apply(model, script)
    except (ValueError, CadError) as exc:
        _fail(str(exc))
    text = formats.print_model(result, _kind_for(model_path, kind))
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@edit_group.command("diff")
@click.argument("path_a")
@click.argument("path_b")
@click.option("--kind", type=_KIND_CHOICES, default=None)
def edit_diff(path_a, path_b, kind):
    """Print the minimal script transforming model A into model B."""
    model_a = _load_model(path_a, kind)
    model_b = _load_model(path_b, kind)
    click.echo(edit.script_to_text(edit.diff(model_a, model_b)), nl=False)


@edit_group.command("invert")
@click.argument("script_path")
@click.option("--base", "base_path", required=True, help="Model the script was applied to.")
@click.option("--kind", type=_KIND_CHOICES, default=None)
def edit_invert(script_path, base_path, kind):
    """Print the inverse of a script relative to its base model."""
    base = _load_model(base_path, kind)
    try:
        script = edit.script_from_text(_read_text(script_path))
        inverse = edit.invert(script, base)
    except (ValueError, CadError) as exc:
        _fail(str(exc))
    click.echo(edit.script_to_text(inverse), nl=False)


@main.group("datagen")
def datagen_group():
    """Interaction-data generation utilities."""


@datagen_group.command("pairs")
@click.argument("model_path")
@click.option("--kind", type=_KIND_CHOICES, default=None)
def datagen_pairs(model_path, kind):
    """Emit deletion/addition pairs for one model as JSONL."""
    model = _load_model(model_path, kind)
    k = _kind_for(model_path, kind)
    try:
        pairs = edit.make_pairs(model)
    except CadError as exc:
        _fail(str(exc))
    for reduced, script, _payload in pairs:
        click.echo(wire_json({
            "reduced": formats.print_model(reduced, k),
            "script": edit.script_to_record(script),
        }))


@datagen_group.command("corpus")
@click.argument("model_paths", nargs=-1, required=True)
@click.option("--kind", type=_KIND_CHOICES, default="dsl", show_default=True)
@click.option("--mix", default="0.4,0.3,0.3", show_default=True,
              help="add,delete,modify fractions.")
@click.option("--seed", type=int, required=True)
@click.option("-o", "--output", required=True, help="Corpus JSONL output path.")
def datagen_corpus(model_paths, kind, mix, seed, output):
    """Build an editing-instruction corpus from model files."""
    try:
        fractions = tuple(float(v) for v in mix.split(","))
        if len(fractions) != 3:
            raise ValueError("need three fractions")
    except ValueError as exc:
        raise click.UsageError(f"bad --mix: {exc}")
    models = [_load_model(p, None) for p in model_paths]
    records, stats = datagen.build_editing_corpus(
        models, mix=fractions, seed=seed, kind=formats.ReprKind(kind)
    )
    datagen.write_corpus(records, output, formats.ReprKind(kind))
    click.echo(wire_json({
        "records": len(records),
        "counts": stats.counts,
        "realized_mix": stats.realized_mix,
        "failed_models": stats.n_failed_models,
    }))


@datagen_group.command("scot-check")
@click.argument("trace_path")
@click.option("--current", "current_path", required=True, help="Current model file.")
@click.option("--kind", type=_KIND_CHOICES, default=None)
def datagen_scot_check(trace_path, current_path, kind):
    """Validate a structured reasoning trace; exit 1 on violations."""
    current = _load_model(current_path, kind)
    trace, violations = datagen.validate_scot(_read_text(trace_path), current)
    click.echo(wire_json({"valid": trace is not None, "violations": violations}))
    sys.exit(0 if trace is not None else 1)


@main.command("mesh")
@click.argument("model_path")
@click.option("--kind", type=_KIND_CHOICES, default=None)
@click.option("--tol", type=float, default=0.01, show_default=True, help="Chord tolerance.")
@click.option("--stl", "stl_path", default=None, help="Write binary STL here.")
@click.option("--json", "json_path", default=None, help="Write the JSON mesh payload here.")
def mesh_cmd(model_path, kind, tol, stl_path, json_path):
    """Tessellate a model to STL and/or a JSON mesh payload."""
    model = _load_model(model_path, kind)
    try:
        mesh = geom.tessellate(geom.compile_model(model), tol)
    except CadError as exc:
        _fail(str(exc))
    if stl_path:
        with open(stl_path, "wb") as fh:
            fh.write(mesh.to_stl_bytes())
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(wire_json(mesh.to_payload()) + "\n")
    if not stl_path and not json_path:
        click.echo(wire_json(mesh.to_payload()))


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
def serve(host, port):
    """Start the HTTP service (configuration via CADSEQ_* env vars)."""
    import uvicorn

    from .service import ServiceConfig, create_app

    uvicorn.run(create_app(ServiceConfig.from_env()), host=host, port=port)


if __name__ == "__main__":
    main()
