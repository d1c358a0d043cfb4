"""Positivity test deciding whether a piecewise space is an EC-space.

The pipeline is: endpoint determinants (existence of a global Bernstein-like
basis), expansion of that basis in the section-local bases, then a pure
arithmetic recursion that eliminates one dimension per level.  Positivity of
every tensor up to level n-1, outside the structural zero pattern, is
equivalent to the space being an EC-space on its interval, provided every
section is an EC-space on its own subinterval (the caller's contract).

Verdicts are three-valued.  Entries whose scaled magnitude falls inside the
dead band around the zero tolerance are neither accepted nor rejected; the
report says Inconclusive and downstream bracketing treats it as the failing
side to keep certified brackets conservative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bernlike import (
    BernsteinLikeBasis,
    GammaTensor,
    NoBasisEvidence,
    global_bernstein_like,
    level0_expansions,
    local_bernstein_like,
)
from .config import RunConfig
from .errors import (
    NotPositiveError,
    RankDeficientError,
    SingularExpansionError,
    ZeroDenominatorError,
)
from .space import PiecewiseSpace

EC = "EC"
NOT_EC = "NotEC"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Failure:
    """Where the test stopped: stage "step0" with index (i, j) for a vanished
    endpoint determinant, or stage "level" with the level number and the
    first offending (i, k, r)."""

    stage: str
    level: int | None
    index: tuple
    detail: str = ""


@dataclass(frozen=True)
class Verdict:
    kind: str               # "pass" | "fail" | "deadband"
    index: tuple | None
    margin: float


@dataclass(frozen=True, eq=False)
class ECTestReport:
    verdict: str
    failure: Failure | None = None
    margins: tuple = ()
    levels: tuple | None = None
    global_basis: BernsteinLikeBasis | None = None
    local_bases: tuple | None = None
    space: PiecewiseSpace | None = field(default=None, repr=False)

    @property
    def is_ec(self) -> bool:
        return self.verdict == EC

    def to_dict(self, include_levels: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "margins": [float(m) for m in self.margins],
        }
        if self.failure is not None:
            out["failure"] = {
                "stage": self.failure.stage,
                "level": self.failure.level,
                "index": list(self.failure.index),
                "detail": self.failure.detail,
            }
        if include_levels and self.levels is not None:
            out["levels"] = [lv.data.tolist() for lv in self.levels]
        return out


def gamma_step(g: GammaTensor) -> GammaTensor:
    """One elimination level: tensor of size m+1 -> tensor of size m.

    Entry (i, k, r) of the output is the difference of two tail-sum ratios
    taken from columns r+1 and r of section k.  Requires the input to have
    passed positivity, which makes every column sum strictly positive.
    """
    data = g.data
    m = data.shape[0] - 1
    if m < 1:
        raise ValueError("cannot step a tensor of size 1")
    totals = data.sum(axis=0)                      # (q+1, m+1)
    scale = np.max(np.abs(data), axis=(0, 2))      # per-section magnitude
    if np.any(totals <= 1e-300) or np.any(totals <= 1e-14 * scale[:, None]):
        raise ZeroDenominatorError("vanishing column sum in level recursion")
    # ratios[j0, k, r] = sum_{j >= j0} gamma[j,k,r] / sum_j gamma[j,k,r]
    tails = np.flip(np.cumsum(np.flip(data, axis=0), axis=0), axis=0)
    ratios = tails / totals[None, :, :]
    upper = ratios[1:, :, :]                       # j0 = 1..m
    out = upper[:, :, 1:] - upper[:, :, :-1]
    return GammaTensor(data=out, level=g.level + 1, n=g.n, q=g.q)


def positivity_verdict(g: GammaTensor, tau: float, deadband: float = 10.0) -> Verdict:
    """Three-valued positivity check with structural zeros exempted.

    Each entry is scaled by its (i, k) row maximum.  Scaled values above
    deadband*tau pass; values below tau/deadband (including all negatives)
    fail; the band in between is undecidable.  The first failing entry in
    lexicographic (i, k, r) order is reported.
    """
    pattern = g.zero_pattern()
    scales = g.row_scales()[:, :, None]
    scaled = g.data / scales
    lo, hi = tau / deadband, tau * deadband

    fail_mask = (~pattern) & (scaled < lo)
    dead_mask = (~pattern) & (scaled >= lo) & (scaled <= hi)
    consider = np.where(pattern, np.inf, scaled)
    margin = float(consider.min()) if consider.size else np.inf

    if fail_mask.any():
        idx = tuple(int(t) for t in np.argwhere(fail_mask)[0])
        return Verdict(kind="fail", index=idx, margin=margin)
    if dead_mask.any():
        idx = tuple(int(t) for t in np.argwhere(dead_mask)[0])
        return Verdict(kind="deadband", index=idx, margin=margin)
    return Verdict(kind="pass", index=None, margin=margin)


def ec_test(sp: PiecewiseSpace, cfg: RunConfig | None = None) -> ECTestReport:
    """Full test on a piecewise space whose sections are EC on their own
    subintervals.  All failure modes fold into the three-valued verdict."""
    cfg = cfg or RunConfig()
    n = sp.dim - 1
    if n < 1:
        raise ValueError("the test needs dimension >= 2")

    try:
        gb = global_bernstein_like(sp, tau_det=cfg.tol_det)
    except RankDeficientError as exc:
        # Determinants passed but a column is pinned only up to noise; the
        # space sits too close to a degeneracy to climb either way.
        return ECTestReport(
            verdict=INCONCLUSIVE,
            failure=Failure("step0", None, (), str(exc)),
            space=sp,
        )
    if isinstance(gb, NoBasisEvidence):
        return ECTestReport(
            verdict=NOT_EC,
            failure=Failure("step0", None, (gb.i, gb.j),
                            f"endpoint matrix ({gb.i},{gb.j}) degenerate ~ {gb.det:.3e}"),
            space=sp,
        )

    locals_ = []
    for k, sec in enumerate(sp.sections):
        try:
            locals_.append(
                local_bernstein_like(sec.fam, sec.t0, sec.t1,
                                     check_positivity=cfg.check_sections,
                                     origin=sec.origin)
            )
        except (RankDeficientError, NotPositiveError) as exc:
            # A section failing on its own closed subinterval rules out the
            # whole interval as well.
            return ECTestReport(
                verdict=NOT_EC,
                failure=Failure("step0", None, (k,), f"section {k}: {exc}"),
                space=sp,
            )

    try:
        tensor = level0_expansions(gb, locals_)
    except SingularExpansionError as exc:
        return ECTestReport(
            verdict=INCONCLUSIVE,
            failure=Failure("level", 0, (), str(exc)),
            space=sp,
        )

    margins = []
    levels = [tensor]
    for p in range(n):
        v = positivity_verdict(tensor, cfg.tol_test, cfg.deadband)
        margins.append(v.margin)
        if v.kind == "fail":
            return ECTestReport(
                verdict=NOT_EC,
                failure=Failure("level", p, v.index),
                margins=tuple(margins),
                space=sp,
            )
        if v.kind == "deadband":
            return ECTestReport(
                verdict=INCONCLUSIVE,
                failure=Failure("level", p, v.index, "margin inside dead band"),
                margins=tuple(margins),
                space=sp,
            )
        if p < n - 1:
            try:
                tensor = gamma_step(tensor)
            except ZeroDenominatorError as exc:
                return ECTestReport(
                    verdict=INCONCLUSIVE,
                    failure=Failure("level", p + 1, (), str(exc)),
                    margins=tuple(margins),
                    space=sp,
                )
            levels.append(tensor)

    return ECTestReport(
        verdict=EC,
        margins=tuple(margins),
        levels=tuple(levels) if cfg.keep_levels else None,
        global_basis=gb,
        local_bases=tuple(locals_),
        space=sp,
    )
