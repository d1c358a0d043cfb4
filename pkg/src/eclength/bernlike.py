"""Bernstein-like bases and expansion tensors.

A Bernstein-like basis relative to (c, d) in an (n+1)-dimensional space is
a basis V_0..V_n where V_i vanishes exactly i times at c and n-i times at
d.  Both section-local bases (built from one term family) and global bases
(built across a whole piecewise space) are produced here, along with the
level-0 tensor of coefficients expanding the global basis in the local
ones, which is the raw material of the positivity test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    NotPositiveError,
    RankDeficientError,
    SingularExpansionError,
    SingularTransferError,
)
from .expfam import FamilyBasis
from .space import PiecewiseSpace

_RANK_TOL = 1e-13
_SIGN_GUARD = 1e-13


@dataclass(frozen=True, eq=False)
class BernsteinLikeBasis:
    """Columns of endpoint-vanishing basis functions, unit coefficient norm,
    signed so the first non-vanishing derivative at the left endpoint is
    positive.

    Exactly one of ``fam`` (section-local basis) or ``space`` (global basis)
    is set.  ``deriv_order`` > 0 marks a basis whose functions are
    derivatives of the stored coefficient columns (used by derived bases of
    differentiated spaces, where per-section differentiation must happen
    after knot propagation).
    """

    interval: tuple
    columns: np.ndarray
    fam: FamilyBasis | None = None
    space: PiecewiseSpace | None = None
    deriv_order: int = 0
    origin: float = 0.0
    columns_hp: np.ndarray | None = None

    def __post_init__(self):
        if (self.fam is None) == (self.space is None):
            raise ValueError("exactly one of fam/space must be given")
        if self.columns_hp is None:
            object.__setattr__(self, "columns_hp", self.columns)

    @property
    def dim(self) -> int:
        """Number of basis functions."""
        return self.columns.shape[1]

    def eval(self, i: int, x: float, order: int = 0) -> float:
        coeffs = self.columns[:, i]
        if self.fam is not None:
            return self.fam.eval(coeffs, x - self.origin, order + self.deriv_order)
        jets = self.space.member_jets(coeffs, x, order + self.deriv_order)
        return float(jets[order + self.deriv_order])

    def values(self, i: int, xs) -> np.ndarray:
        return np.array([self.eval(i, float(x)) for x in np.atleast_1d(xs)])


@dataclass(frozen=True, eq=False)
class NoBasisEvidence:
    """Witness that no Bernstein-like basis exists: the (i, j) endpoint
    determinant vanished (relative to its column norms)."""

    i: int
    j: int
    det: float


@dataclass(frozen=True, eq=False)
class GammaTensor:
    """Expansion coefficients gamma[i][k][r] of global basis function i on
    section k in the k-th local basis, at one elimination level.

    Structural zeros: on the first section entries with r < i vanish, on the
    last section entries with r > i vanish (both on a single-section space,
    leaving a diagonal pattern).
    """

    data: np.ndarray
    level: int
    n: int
    q: int

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def zero_pattern(self) -> np.ndarray:
        """Boolean mask of the structurally-zero entries."""
        m, nk, _ = self.data.shape
        mask = np.zeros_like(self.data, dtype=bool)
        ii, rr = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        mask[:, 0, :] |= rr < ii
        mask[:, nk - 1, :] |= rr > ii
        return mask

    def row_scales(self) -> np.ndarray:
        """Per-(i, k) scale: max |gamma| over r, floored away from zero."""
        s = np.max(np.abs(self.data), axis=2)
        return np.maximum(s, 1e-300)


def _nullspace_column(rows: np.ndarray, rank_tol: float = _RANK_TOL) -> np.ndarray:
    """One-dimensional nullspace of an m x (m+1) condition matrix.

    Runs in extended precision with row/column equilibration: close to a
    critical length the conditions approach rank deficiency quadratically,
    and the accuracy of this direction bounds how tightly the bracketing
    search can resolve the length.
    """
    return linalg.nullspace_vector(rows, rank_tol=rank_tol)


def _fix_sign_and_check(v, row_lo, order_lo, row_hi, order_hi):
    """Sign the column so its first non-zero derivative at the left endpoint
    is positive, and verify neither endpoint vanishes to excess order.

    The guard threshold sits just above floating noise; looser positivity
    decisions belong to the expansion tensors, not to basis construction.
    """
    val_lo = float(row_lo @ v)
    scale_lo = float(np.sqrt(row_lo @ row_lo))
    if abs(val_lo) <= _SIGN_GUARD * max(scale_lo, 1e-300):
        raise RankDeficientError(
            f"derivative {order_lo} at the left endpoint vanishes as well"
        )
    if val_lo < 0:
        v = -v
    val_hi = float(row_hi @ v)
    scale_hi = float(np.sqrt(row_hi @ row_hi))
    if abs(val_hi) <= _SIGN_GUARD * max(scale_hi, 1e-300):
        raise RankDeficientError(
            f"derivative {order_hi} at the right endpoint vanishes as well"
        )
    return v


def local_bernstein_like(fam: FamilyBasis, c: float, d: float,
                         check_positivity: bool = False,
                         samples: int = 64,
                         origin: float = 0.0) -> BernsteinLikeBasis:
    """Bernstein-like basis of one section family relative to (c, d).

    Column i solves the n homogeneous endpoint conditions (orders 0..i-1
    vanish at c, orders 0..n-i-1 vanish at d).  The caller is responsible
    for the section being an EC-space on [c, d]; with ``check_positivity``
    each column is additionally sampled at 64 interior points.  ``origin``
    is the coordinate shift of the section's chart.
    """
    if not d > c:
        raise ValueError("need d > c")
    n = fam.dim - 1
    rows_c = fam.derivative_rows(c - origin, n, dtype=linalg.LD)
    rows_d = fam.derivative_rows(d - origin, n, dtype=linalg.LD)
    cols = np.empty((fam.dim, fam.dim), dtype=linalg.LD)
    for i in range(fam.dim):
        conditions = np.vstack([rows_c[:i], rows_d[: n - i]])
        v = _nullspace_column(conditions)
        v = _fix_sign_and_check(v, rows_c[i], i, rows_d[n - i], n - i)
        cols[:, i] = v
    basis = BernsteinLikeBasis(interval=(c, d),
                               columns=np.asarray(cols, dtype=float),
                               fam=fam, origin=origin, columns_hp=cols)
    if check_positivity:
        xs = np.linspace(c, d, samples + 2)[1:-1]
        vals = np.array([fam.term_values(x - origin) for x in xs]) @ cols
        if np.any(vals <= 0.0):
            i = int(np.argwhere(vals <= 0.0)[0][1])
            raise NotPositiveError(f"basis function {i} not positive on ({c}, {d})")
    return basis


def _member_degeneracy(sp: PiecewiseSpace, member, mat, i: int, j: int) -> float:
    """Largest endpoint functional value of the candidate member, relative
    to that member's own derivative magnitudes sampled inside the interval.

    The candidate comes from the smallest left singular direction of the
    endpoint matrix; the measure is gauge-free, so genuinely degenerate
    members read as zero while column collinearity of wide high-dimension
    charts does not."""
    orders = max(i, j)
    scales = np.zeros(orders, dtype=linalg.LD)
    for k, sec in enumerate(sp.sections):
        coeffs = sp.cumulative_hp[k] @ member
        for frac in (0.21, 0.53, 0.84):
            x = sec.t0 + frac * (sec.t1 - sec.t0)
            jets = sec.derivative_rows(x, orders - 1, dtype=linalg.LD) @ coeffs
            scales = np.maximum(scales, np.abs(jets))
    scales = np.maximum(scales, 1e-300)
    values = member @ mat
    worst = 0.0
    for col in range(i + j):
        order = col if col < i else col - i
        worst = max(worst, float(abs(values[col]) / scales[order]))
    return worst


def global_bernstein_like(sp: PiecewiseSpace, tau_det: float = 1e-15):
    """Bernstein-like basis of a whole piecewise space relative to its
    endpoints, or NoBasisEvidence naming the vanishing determinant.

    Existence is decided first: for every i, j >= 1 with i + j = n + 1 the
    matrix with i derivative columns at a and j at b must stay numerically
    non-singular.  Raw determinant magnitudes of these matrices underflow
    long before any true degeneracy once monomial-heavy kernels meet wide
    intervals, so singularity is measured by the smallest-to-largest
    singular-value ratio after row/column equilibration and compared with
    ``tau_det``.
    """
    n = sp.dim - 1
    a, b = sp.a, sp.b
    rows_a = sp.sections[0].derivative_rows(a, n, dtype=linalg.LD)
    last = sp.nsections - 1
    rows_b = (sp.sections[last].derivative_rows(b, n, dtype=linalg.LD)
              @ sp.cumulative_hp[last])

    for i in range(1, n + 1):
        j = n + 1 - i
        mat = np.column_stack([rows_a[o] for o in range(i)]
                              + [rows_b[o] for o in range(j)])
        rel = linalg.smallest_singular_ratio(mat)
        if rel <= tau_det:
            return NoBasisEvidence(i=i, j=j, det=rel)
        # Second detector, scale-free: a member all of whose endpoint
        # functional values are negligible against its own interior
        # derivative magnitudes has i + j endpoint zeros, which no
        # equilibration gauge is allowed to explain away.
        ratio_cn, candidate = linalg.smallest_left_direction(mat)
        if ratio_cn <= 1e-10:
            deg = _member_degeneracy(sp, candidate, mat, i, j)
            if deg <= tau_det:
                return NoBasisEvidence(i=i, j=j, det=deg)

    # Sign fixing uses interior samples in the leftmost section: for a true
    # Bernstein-like column the sign just inside a equals the sign of its
    # first non-vanishing derivative at a, and interior values are free of
    # the endpoint cancellation that makes that derivative unreadable near
    # a degeneracy.  Degeneracy detection itself stays with the singular
    # values above and with the downstream positivity tensors.
    sec0 = sp.sections[0]
    t_right = min(sec0.t1, a + 0.4 * (b - a))
    probes = [a + frac * (t_right - a) for frac in (0.05, 0.15, 0.3)]
    probe_rows = np.array([sec0.term_values(x, dtype=linalg.LD) for x in probes])

    cols = np.empty((sp.dim, sp.dim), dtype=linalg.LD)
    for i in range(sp.dim):
        conditions = np.vstack([rows_a[:i], rows_b[: n - i]])
        v = _nullspace_column(conditions, rank_tol=max(tau_det * 1e-2, 1e-18))
        vals = probe_rows @ v
        pick = int(np.argmax(np.abs(vals)))
        if vals[pick] == 0.0:
            raise RankDeficientError(f"basis column {i} vanishes near the left endpoint")
        if vals[pick] < 0.0:
            v = -v
        cols[:, i] = v
    return BernsteinLikeBasis(interval=(a, b),
                              columns=np.asarray(cols, dtype=float),
                              space=sp, columns_hp=cols)


def level0_expansions(global_basis: BernsteinLikeBasis, locals_: list) -> GammaTensor:
    """Expand each global basis function, section by section, in the local
    bases.  Pure linear algebra in the shared coefficient representation;
    each section contributes one square solve per global function.
    """
    sp = global_basis.space
    if sp is None:
        raise ValueError("level-0 expansions need a global (piecewise) basis")
    n = sp.dim - 1
    q = sp.nsections - 1
    if len(locals_) != q + 1:
        raise ValueError(f"expected {q + 1} local bases, got {len(locals_)}")
    data = np.empty((n + 1, q + 1, n + 1), dtype=linalg.LD)
    for k, loc in enumerate(locals_):
        lmat = loc.columns_hp
        rhs = sp.cumulative_hp[k] @ global_basis.columns_hp
        try:
            solved = linalg.solve(lmat, rhs)
        except SingularTransferError as exc:
            raise SingularExpansionError(f"local basis matrix singular on section {k}") from exc
        resid = float(np.linalg.norm(np.asarray(lmat @ solved - rhs, dtype=float)))
        scale = float(np.linalg.norm(loc.columns)) * float(
            np.linalg.norm(np.asarray(solved, dtype=float))
        ) + float(np.linalg.norm(np.asarray(rhs, dtype=float)))
        if not np.all(np.isfinite(solved)) or resid > 1e-6 * max(scale, 1e-300):
            raise SingularExpansionError(
                f"expansion on section {k} unreliable (residual {resid:.3e})"
            )
        data[:, k, :] = solved.T
    return GammaTensor(data=data, level=0, n=n, q=q)
