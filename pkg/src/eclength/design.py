"""Design-side byproducts of a successful EC test.

A space containing constants and passing the test on [a, b] carries a
Bernstein basis (expand unity in the endpoint basis, keep the positive
coefficients), transition functions (tail sums), a Bernstein-like basis of
the differentiated space, and a whole ladder of weight functions, one per
elimination level, that regenerates the space by alternating multiplication
and integration.

Per-level functions are never stored in closed form.  They are evaluated on
demand by a tower of truncated derivative jets: level p+1 functions are
derivatives of tail-sum/weight quotients of level-p functions, so a value at
level p costs exact level-0 jets up to order p followed by p rounds of
series division and shifting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .bernlike import BernsteinLikeBasis, NoBasisEvidence, global_bernstein_like
from .ectest import EC, ECTestReport, gamma_step
from .errors import (
    ConstantsAbsentError,
    LevelsMissingError,
    NotGoodForDesignError,
    QuadratureFailure,
)
from .expfam import EXP, FamilyBasis
from .space import GlobalMember, PiecewiseSpace, eval_member

_MAX_FACT = 64
_FACT = np.array([math.factorial(m) for m in range(_MAX_FACT)], dtype=float)


def _jet_div(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Derivative jet of f/g from derivative jets of f and g (same order)."""
    length = len(f)
    fact = _FACT[:length]
    a = f / fact
    b = g / fact
    c = np.empty(length)
    c[0] = a[0] / b[0]
    for m in range(1, length):
        c[m] = (a[m] - np.dot(b[1:m + 1], c[m - 1::-1])) / b[0]
    return c * fact


def _constant_coeffs(fam: FamilyBasis) -> np.ndarray:
    for idx, (j, alpha, beta, kind) in enumerate(fam.terms):
        if j == 0 and kind == EXP and beta == 0.0 and abs(alpha) <= 1e-9:
            out = np.zeros(fam.dim)
            out[idx] = 1.0
            return out
    raise ConstantsAbsentError("no constant term in the kernel family")


def expand_unity(sp: PiecewiseSpace, blb: BernsteinLikeBasis,
                 tau_zero: float = 1e-9) -> np.ndarray:
    """Coefficients alpha solving 1 = sum alpha_i V_i.

    Requires the constant function to lie in the space (verified by direct
    evaluation across the interval).  Any coefficient at or below the zero
    tolerance signals that the space is not good for design on [a, b].
    """
    c_one = _constant_coeffs(sp.sections[0].fam)
    xs = np.linspace(sp.a, sp.b, 17)
    resid = max(abs(eval_member(sp, c_one, float(x)) - 1.0) for x in xs)
    if resid > 1e-9:
        raise ConstantsAbsentError(
            f"constant representation drifts by {resid:.3e} across sections"
        )
    alphas = np.linalg.solve(blb.columns, c_one)
    if not np.all(np.isfinite(alphas)):
        raise NotGoodForDesignError("unity expansion is numerically singular")
    scale = float(np.max(np.abs(alphas)))
    bad = np.where(alphas <= tau_zero * scale)[0]
    if bad.size:
        raise NotGoodForDesignError(
            f"unity-expansion coefficient {int(bad[0])} is not positive",
            index=int(bad[0]),
        )
    return alphas


@dataclass(frozen=True, eq=False)
class NormalizedBasis:
    """Bernstein basis B_i = alpha_i V_i: positive, endpoint-vanishing and
    summing to one."""

    alphas: np.ndarray
    base: BernsteinLikeBasis

    @property
    def space(self) -> PiecewiseSpace:
        return self.base.space

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def interval(self) -> tuple:
        return self.base.interval

    def member(self, i: int) -> GlobalMember:
        return GlobalMember(self.alphas[i] * self.base.columns[:, i])

    def eval(self, i: int, x: float, order: int = 0) -> float:
        return self.alphas[i] * self.base.eval(i, x, order)


def bernstein_basis(sp: PiecewiseSpace, a: float, b: float,
                    tau_zero: float = 1e-9, tau_det: float = 1e-16) -> NormalizedBasis:
    """Bernstein basis of a constants-containing space relative to (a, b).

    (a, b) must be the space's own endpoints.  Failure modes: no endpoint
    basis at all, constants absent, or a non-positive unity coefficient;
    the last two propagate from expand_unity.
    """
    span = sp.b - sp.a
    if abs(a - sp.a) > 1e-12 * span or abs(b - sp.b) > 1e-12 * span:
        raise ValueError("(a, b) must coincide with the space's interval")
    gb = global_bernstein_like(sp, tau_det=tau_det)
    if isinstance(gb, NoBasisEvidence):
        raise NotGoodForDesignError(
            f"no endpoint basis: determinant ({gb.i},{gb.j}) vanishes"
        )
    alphas = expand_unity(sp, gb, tau_zero=tau_zero)
    return NormalizedBasis(alphas=alphas, base=gb)


def transition_functions(nb: NormalizedBasis) -> list:
    """Tail sums of the Bernstein basis.  The first one is the constant 1;
    the i-th vanishes i times at a, and 1 minus it vanishes n-i+1 times at b."""
    cols = nb.base.columns * nb.alphas[None, :]
    return [GlobalMember(cols[:, i:].sum(axis=1)) for i in range(nb.dim)]


def derived_basis(nb: NormalizedBasis) -> BernsteinLikeBasis:
    """Bernstein-like basis of the differentiated space: derivatives of the
    transition functions, dropping the constant one.

    Columns keep the parent-space coefficients; evaluation differentiates
    after propagation so the piecewise representation stays exact.  No
    renormalisation is applied, preserving the tail-sum identities.
    """
    stars = transition_functions(nb)
    cols = np.column_stack([stars[i + 1].c0 for i in range(nb.dim - 1)])
    return BernsteinLikeBasis(
        interval=nb.interval,
        columns=cols,
        space=nb.space,
        deriv_order=1,
    )


class LevelTower:
    """On-demand evaluator for the per-level local and global bases.

    Level-0 data are exact coefficient vectors; each level up replaces the
    basis by derivatives of tail-sum quotients against the level's weight
    (the column sums of that level's expansion tensor restricted to the
    section).  All evaluations reduce to level-0 jets of the section family.
    """

    def __init__(self, space: PiecewiseSpace, local_bases, gammas):
        self.space = space
        self.local_bases = list(local_bases)
        self.gammas = [np.asarray(g.data, dtype=float) for g in gammas]
        self.n = space.dim - 1
        if len(self.gammas) != self.n + 1:
            raise ValueError("need expansion tensors for every level 0..n")
        self.csums = [g.sum(axis=0) for g in self.gammas]

    def local_jets(self, k: int, p: int, x: float, order: int) -> np.ndarray:
        """Rows r = 0..n-p of derivatives 0..order of the level-p local
        basis functions on section k, evaluated at x."""
        total = order + p
        rows = self.space.sections[k].derivative_rows(x, total)
        jets = (rows @ self.local_bases[k].columns).T
        for lev in range(p):
            weights = self.csums[lev][k][:, None] * jets
            tails = np.flip(np.cumsum(np.flip(weights, axis=0), axis=0), axis=0)
            w_jet = tails[0]
            nxt = np.empty((jets.shape[0] - 1, jets.shape[1] - 1))
            for r in range(nxt.shape[0]):
                nxt[r] = _jet_div(tails[r + 1], w_jet)[1:]
            jets = nxt
        return jets

    def global_value(self, p: int, i: int, x: float) -> float:
        k = self.space.locate(x)
        jets = self.local_jets(k, p, x, 0)
        return float(self.gammas[p][i, k, :] @ jets[:, 0])

    def weight_value(self, p: int, x: float) -> float:
        k = self.space.locate(x)
        jets = self.local_jets(k, p, x, 0)
        return float(self.csums[p][k] @ jets[:, 0])

    def bernstein_value(self, p: int, i: int, x: float) -> float:
        k = self.space.locate(x)
        jets = self.local_jets(k, p, x, 0)[:, 0]
        return float(self.gammas[p][i, k, :] @ jets / (self.csums[p][k] @ jets))

    def global_jets(self, p: int, i: int, x: float, order: int) -> np.ndarray:
        k = self.space.locate(x)
        return self.gammas[p][i, k, :] @ self.local_jets(k, p, x, order)


@dataclass(frozen=True, eq=False)
class WeightSystem:
    """One ladder of positive weight functions extracted from an EC report,
    each the sum of that level's global basis, rescaled to value 1 at a."""

    tower: LevelTower = field(repr=False)
    norms: np.ndarray

    @property
    def n(self) -> int:
        return self.tower.n

    def weight(self, p: int, x: float) -> float:
        return self.tower.weight_value(p, x) / self.norms[p]

    @property
    def weights(self) -> list:
        return [
            (lambda x, _p=p: self.weight(_p, x)) for p in range(self.n + 1)
        ]


def weight_system(report: ECTestReport) -> WeightSystem:
    """Weight ladder w_0..w_n from a successful test run with levels kept.

    The report retains tensors up to level n-1; the last one is stepped once
    more to reach the single remaining function, whose sum is w_n.
    """
    if report.verdict != EC:
        raise LevelsMissingError("weight extraction needs an EC verdict")
    if report.levels is None or report.global_basis is None:
        raise LevelsMissingError("run the test with keep_levels to retain tensors")
    gammas = list(report.levels)
    n = report.space.dim - 1
    while len(gammas) < n + 1:
        gammas.append(gamma_step(gammas[-1]))
    tower = LevelTower(report.space, report.local_bases, gammas)
    a = report.space.a
    norms = np.array([tower.weight_value(p, a) for p in range(n + 1)])
    if np.any(norms <= 0.0):
        raise LevelsMissingError("weight normalisation at the left endpoint failed")
    return WeightSystem(tower=tower, norms=norms)


def eval_curve(nb: NormalizedBasis, control, samples: int = 100) -> np.ndarray:
    """Polyline of the curve with the given control points.

    Endpoint interpolation comes with the basis: the curve starts at the
    first control point and ends at the last one.
    """
    control = np.atleast_2d(np.asarray(control, dtype=float))
    if control.shape[0] != nb.dim:
        raise ValueError(f"need {nb.dim} control points, got {control.shape[0]}")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    a, b = nb.interval
    ts = np.linspace(a, b, samples)
    bmat = np.empty((samples, nb.dim))
    for i in range(nb.dim):
        bmat[:, i] = [nb.eval(i, float(t)) for t in ts]
    return bmat @ control


def _segment_breaks(space: PiecewiseSpace, npts: int) -> np.ndarray:
    pts = np.unique(np.concatenate([np.linspace(space.a, space.b, npts),
                                    space.knots]))
    return pts


def irr_check(ws: WeightSystem, report: ECTestReport, quad_points: int = 60) -> float:
    """Consistency of the integral recurrence against direct evaluation.

    Going down one level, the next Bernstein basis is rebuilt from running
    integrals of the current level's basis functions (weighted by the
    level's weight, which cancels into the level's endpoint basis).  The
    reconstruction is compared pointwise with the basis evaluated directly
    through the tower; the worst deviation over all levels is returned.
    Starting point: the single top-level Bernstein function is the constant 1.
    """
    if report.verdict != EC:
        raise LevelsMissingError("integral recurrence check needs an EC verdict")
    tower = ws.tower
    n = tower.n
    space = tower.space
    grid = _segment_breaks(space, 33)
    worst = 0.0

    top = max(abs(tower.bernstein_value(n, 0, float(x)) - 1.0) for x in grid)
    worst = max(worst, top)

    for p in range(n, 0, -1):
        count = n - p + 1
        prefixes = np.zeros((count, len(grid)))
        for i in range(count):
            integrand = lambda t, _i=i: tower.global_value(p, _i, t)
            acc = 0.0
            err_acc = 0.0
            for s in range(1, len(grid)):
                val, err = quad(integrand, grid[s - 1], grid[s],
                                epsabs=1e-12, epsrel=1e-9, limit=quad_points)
                acc += val
                err_acc += err
                prefixes[i, s] = acc
            if err_acc > 1e-6 * (1.0 + abs(acc)):
                raise QuadratureFailure(
                    f"level {p} function {i}: quadrature error {err_acc:.3e}"
                )
        totals = prefixes[:, -1]
        ratios = prefixes / totals[:, None]

        rebuilt = np.empty((count + 1, len(grid)))
        rebuilt[0] = 1.0 - ratios[0]
        for i in range(1, count):
            rebuilt[i] = ratios[i - 1] - ratios[i]
        rebuilt[count] = ratios[count - 1]

        for i in range(count + 1):
            direct = np.array(
                [tower.bernstein_value(p - 1, i, float(x)) for x in grid]
            )
            worst = max(worst, float(np.max(np.abs(rebuilt[i] - direct))))
    return worst
