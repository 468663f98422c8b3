"""Composite reward for CAD-sequence reinforcement learning.

total = r_chamfer + r_format + r_exec + r_length, where

  r_chamfer = exp(-alpha * D_CD)   in (0, 1], 1 exactly on a perfect match
  r_format  = 0 or -0.2            unparsable / invalid output
  r_exec    = 0 or -0.1            parsed but failed to execute
  r_length  = -beta * L            length of the generated output

Penalties are staged, not stacked: an unparsable output takes only the
format penalty (r_exec stays 0, r_chamfer 0), a parsable-but-inexecutable
output takes only the exec penalty. With that staging every executable
output strictly outscores every unparsable one at equal length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import formats, metrics
from .edit import EditScript, diff
from .errors import CadError, InvalidTarget, ParseError
from .model import CadModel, canonicalize, primitive_count, validate

FORMAT_PENALTY = -0.2
EXEC_PENALTY = -0.1


class LengthUnit(str, Enum):
    PRIMITIVE_COUNT = "primitives"
    CHARACTER_COUNT = "characters"


@dataclass(frozen=True)
class RewardConfig:
    alpha: float = 5.0
    beta: float = 0.01
    length_unit: LengthUnit = LengthUnit.PRIMITIVE_COUNT
    kind: formats.ReprKind = formats.ReprKind.DSL
    n_points: int = 2048
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.beta < 0.0:
            raise ValueError("beta must be non-negative")
        object.__setattr__(self, "length_unit", LengthUnit(self.length_unit))
        object.__setattr__(self, "kind", formats.ReprKind(self.kind))


@dataclass(frozen=True)
class RewardBreakdown:
    r_chamfer: float
    r_format: float
    r_exec: float
    r_length: float
    total: float
    d_cd: float | None = None
    error: str | None = None

    def to_record(self) -> dict:
        return {
            "r_chamfer": self.r_chamfer,
            "r_format": self.r_format,
            "r_exec": self.r_exec,
            "r_length": self.r_length,
            "total": self.total,
            "d_cd": self.d_cd,
            "error": self.error,
        }


def compose_breakdown(
    d_cd: float | None,
    length: float,
    format_ok: bool,
    exec_ok: bool,
    cfg: RewardConfig,
    error: str | None = None,
) -> RewardBreakdown:
    """Pure composition of the four components; the only place the formula
    lives, shared by single and batch scoring."""
    r_format = 0.0 if format_ok else FORMAT_PENALTY
    r_exec = 0.0 if (not format_ok or exec_ok) else EXEC_PENALTY
    if format_ok and exec_ok and d_cd is not None:
        r_chamfer = math.exp(-cfg.alpha * d_cd)
    else:
        r_chamfer = 0.0
        d_cd = None
    r_length = -cfg.beta * length
    if r_length == 0.0:
        r_length = 0.0  # avoid -0.0 in stored components
    total = r_chamfer + r_format + r_exec + r_length
    return RewardBreakdown(
        r_chamfer=r_chamfer,
        r_format=r_format,
        r_exec=r_exec,
        r_length=r_length,
        total=total,
        d_cd=d_cd,
        error=error,
    )


def _item_seed(cfg: RewardConfig, episode_id) -> int:
    if episode_id is None:
        return cfg.seed
    entropy = [cfg.seed] + [b for b in str(episode_id).encode("utf-8")]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def _length(text: str, model: CadModel | None, cfg: RewardConfig) -> float:
    if cfg.length_unit is LengthUnit.CHARACTER_COUNT:
        return float(len(text))
    return float(primitive_count(model)) if model is not None else 0.0


def score(
    generated: str,
    target: CadModel,
    current: CadModel | None = None,
    script: EditScript | None = None,
    cfg: RewardConfig = RewardConfig(),
    episode_id=None,
) -> RewardBreakdown:
    """Score one generated text against a target model.

    Generation episodes (no current model, no script) use full CD on
    independently normalized clouds. Editing episodes use the localized CD
    over the script's edited ops; when only the pre-edit model is given the
    ground-truth script is derived as diff(current, target). The generated
    text never raises: parse/execute failures become penalties.
    """
    report = validate(target)
    if not report.ok:
        raise InvalidTarget(f"{report.violations[0].path}: {report.violations[0].message}")
    target = canonicalize(target)
    if script is None and current is not None:
        script = diff(current, target)
    seed = _item_seed(cfg, episode_id)

    try:
        model = formats.parse(generated, cfg.kind)
    except ParseError as exc:
        return compose_breakdown(
            None, _length(generated, None, cfg), format_ok=False, exec_ok=False, cfg=cfg,
            error=str(exc),
        )
    model = canonicalize(model)
    length = _length(generated, model, cfg)
    try:
        if script is not None and script.actions:
            cd = metrics.localized_chamfer(model, target, script, n=cfg.n_points, seed=seed)
        else:
            gen_cloud = metrics.sample_model(model, cfg.n_points, seed)
            tgt_cloud = metrics.sample_model(target, cfg.n_points, seed)
            cd = metrics.chamfer_normalized(gen_cloud, tgt_cloud)
    except CadError as exc:
        return compose_breakdown(
            None, length, format_ok=True, exec_ok=False, cfg=cfg, error=str(exc)
        )
    return compose_breakdown(cd.value, length, format_ok=True, exec_ok=True, cfg=cfg)


@dataclass(frozen=True)
class RewardItem:
    generated: str
    target: CadModel
    current: CadModel | None = None
    script: EditScript | None = None
    episode_id: str | None = None


def score_batch(items, cfg: RewardConfig = RewardConfig()) -> list[RewardBreakdown]:
    """Element-wise score with order preserved; per-item target failures are
    recorded inline instead of aborting the batch."""
    out = []
    for item in items:
        try:
            out.append(
                score(
                    item.generated,
                    item.target,
                    current=item.current,
                    script=item.script,
                    cfg=cfg,
                    episode_id=item.episode_id,
                )
            )
        except InvalidTarget as exc:
            out.append(
                compose_breakdown(
                    None, 0.0, format_ok=False, exec_ok=False, cfg=cfg,
                    error=f"invalid target: {exc}",
                )
            )
    return out
