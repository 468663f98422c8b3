"""Chamfer Distance, batch evaluation (mean/median CD + invalidity ratio),
and edit-localized Chamfer.

Convention: CD is the symmetric sum of mean squared nearest-neighbor
distances, computed exactly (k-d tree queries, no approximation), on clouds
normalized to the [-1, 1] box; reported values are scaled by 1e3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from statistics import median

import numpy as np
from scipy.spatial import cKDTree

from . import formats, geom
from .errors import CadError, EmptyCloud, EmptyEditSet, ParseError
from .geom.sampling import SurfacePointCloud, normalization_transform
from .model import CadModel, canonicalize


@dataclass(frozen=True)
class CdResult:
    value: float  # sum of mean squared NN distances on normalized clouds

    @property
    def scaled(self) -> float:
        return self.value * 1e3


@dataclass
class EvalSummary:
    mean_cd: float | None
    median_cd: float | None
    invalidity_ratio: float
    n_total: int
    n_invalid: int
    items: list[dict] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_invalid": self.n_invalid,
            "invalidity_ratio": self.invalidity_ratio,
            "mean_cd": self.mean_cd,
            "median_cd": self.median_cd,
            "mean_cd_scaled": None if self.mean_cd is None else self.mean_cd * 1e3,
            "median_cd_scaled": None if self.median_cd is None else self.median_cd * 1e3,
        }


def chamfer_points(a: np.ndarray, b: np.ndarray) -> float:
    """Raw symmetric CD between two coordinate arrays (no normalization)."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("chamfer requires non-empty clouds")
    d_ab, _ = cKDTree(b).query(a, k=1)
    d_ba, _ = cKDTree(a).query(b, k=1)
    return float(np.mean(d_ab**2) + np.mean(d_ba**2))


def chamfer(a: SurfacePointCloud, b: SurfacePointCloud) -> CdResult:
    return CdResult(chamfer_points(a.points, b.points))


def chamfer_normalized(a: SurfacePointCloud, b: SurfacePointCloud) -> CdResult:
    """CD after normalizing each cloud independently (evaluation convention)."""
    return CdResult(
        chamfer_points(
            geom.normalize_for_eval(a).points,
            geom.normalize_for_eval(b).points,
        )
    )


def sample_model(model: CadModel, n: int, seed: int) -> SurfacePointCloud:
    return geom.sample_surface(geom.compile_model(model), n, seed)


def localized_chamfer(
    generated: CadModel,
    target: CadModel,
    script,
    n: int = 2048,
    seed: int = 0,
) -> CdResult:
    """CD restricted to boundary points contributed by the edited ops.

    Both models are result-side models; the script's result-side op set
    (inserted/modified ops) selects points on each, clipped to the model's
    own length. Clouds share one normalization computed from the union of
    the two full clouds. When a side retains no points, its edited ops are
    sampled in isolation; a script with no result-side ops (pure deletion)
    falls back to the full clouds.
    """
    if not script.actions:
        raise EmptyEditSet("script has no actions")
    gen_cloud = sample_model(generated, n, seed)
    tgt_cloud = sample_model(target, n, seed)
    center, scale = normalization_transform(
        np.vstack([gen_cloud.points, tgt_cloud.points])
    )

    def restrict(cloud: SurfacePointCloud, model: CadModel) -> np.ndarray:
        edited = {i for i in script.edited_ops_b if 0 <= i < len(model.ops)}
        if not edited:
            return cloud.points
        mask = np.isin(cloud.source_op, sorted(edited))
        if mask.any():
            return cloud.points[mask]
        sub_ops = [model.ops[i] for i in sorted(edited)]
        sub = canonicalize(CadModel(ops=tuple(sub_ops)))
        return sample_model(sub, n, seed).points

    gen_pts = (restrict(gen_cloud, generated) - center) * scale
    tgt_pts = (restrict(tgt_cloud, target) - center) * scale
    return CdResult(chamfer_points(gen_pts, tgt_pts))


def evaluate_pair(
    generated_text: str,
    target: CadModel,
    kind: formats.ReprKind,
    n: int = 2048,
    seed: int = 0,
) -> dict:
    """Score one generated text against a target model.

    An entry is invalid iff parsing fails, validation fails, or the executor
    reports empty geometry; CD is computed on independently normalized
    clouds otherwise.
    """
    record: dict = {"valid": False, "cd": None, "cd_scaled": None, "error": None}
    try:
        model = formats.parse(generated_text, kind)
    except ParseError as exc:
        record["error"] = f"parse: {exc}"
        return record
    try:
        gen_cloud = sample_model(model, n, seed)
        tgt_cloud = sample_model(target, n, seed)
    except CadError as exc:
        record["error"] = f"execute: {exc}"
        return record
    cd = chamfer_normalized(gen_cloud, tgt_cloud)
    record["valid"] = True
    record["cd"] = cd.value
    record["cd_scaled"] = cd.scaled
    return record


def evaluate_batch(
    pairs,
    kind: formats.ReprKind,
    n: int = 2048,
    seed: int = 0,
) -> EvalSummary:
    """pairs: iterable of (generated_text, target_model). Total: per-item
    failures become invalid entries, never exceptions."""
    items = []
    for generated_text, target in pairs:
        items.append(evaluate_pair(generated_text, target, kind, n=n, seed=seed))
    n_total = len(items)
    n_invalid = sum(1 for it in items if not it["valid"])
    cds = [it["cd"] for it in items if it["valid"]]
    return EvalSummary(
        mean_cd=(sum(cds) / len(cds)) if cds else None,
        median_cd=median(cds) if cds else None,
        invalidity_ratio=(n_invalid / n_total) if n_total else 0.0,
        n_total=n_total,
        n_invalid=n_invalid,
        items=items,
    )


def evaluate_manifest(
    manifest_path: str,
    kind: formats.ReprKind,
    n: int,
    seed: int,
    records_path: str | None = None,
) -> EvalSummary:
    """Manifest: one record per line, 'generated_path<TAB>target_path'.

    Target files parse in the kind their extension names; unreadable or
    unparsable targets count as invalid entries for that line.
    """
    pairs: list[tuple[str, CadModel | None]] = []
    errors: list[str | None] = []
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                pairs.append(("", None))
                errors.append(f"manifest: expected 2 tab-separated paths, got {len(parts)}")
                continue
            gen_path, tgt_path = parts
            try:
                with open(gen_path, "r", encoding="utf-8") as gf:
                    gen_text = gf.read()
                with open(tgt_path, "r", encoding="utf-8") as tf:
                    tgt_text = tf.read()
                target = formats.parse(tgt_text, formats.kind_for_path(tgt_path))
            except (OSError, ValueError, ParseError) as exc:
                pairs.append(("", None))
                errors.append(f"target: {exc}")
                continue
            pairs.append((gen_text, target))
            errors.append(None)

    items = []
    for (gen_text, target), err in zip(pairs, errors):
        if err is not None:
            items.append({"valid": False, "cd": None, "cd_scaled": None, "error": err})
        else:
            items.append(evaluate_pair(gen_text, target, kind, n=n, seed=seed))
    n_total = len(items)
    n_invalid = sum(1 for it in items if not it["valid"])
    cds = [it["cd"] for it in items if it["valid"]]
    summary = EvalSummary(
        mean_cd=(sum(cds) / len(cds)) if cds else None,
        median_cd=median(cds) if cds else None,
        invalidity_ratio=(n_invalid / n_total) if n_total else 0.0,
        n_total=n_total,
        n_invalid=n_invalid,
        items=items,
    )
    if records_path:
        with open(records_path, "w", encoding="utf-8") as fh:
            for item in items:
                fh.write(json.dumps(item, sort_keys=True) + "\n")
    return summary
