"""Independent ground-truth generators used to cross-check the test engine.

Nothing in here shares code paths with the positivity test: Bessel zeros
come from a direct series evaluation, the closed-form critical lengths from
bisection of their defining equations, Wronskian scans from exact jets of a
single distinguished kernel member, and the brute-force check from sampled
endpoint determinants straight off the definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NoSignChangeError, OutOfRegimeError
from .expfam import RootSet, build_family, find_roots
from .space import PiecewiseSpace

_BISECT_REL = 1e-12


@dataclass(frozen=True)
class OracleValue:
    value: float
    bracket: tuple
    method: str


def _bisect(f, lo: float, hi: float, method: str) -> OracleValue:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return OracleValue(lo, (lo, lo), method)
    if fhi == 0.0:
        return OracleValue(hi, (hi, hi), method)
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise NoSignChangeError(f"no sign change on [{lo}, {hi}] for {method}")
    while hi - lo > _BISECT_REL * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return OracleValue(mid, (mid, mid), method)
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return OracleValue(0.5 * (lo + hi), (lo, hi), method)


def _bessel_series(order: float, x: float) -> float:
    # J_order(x) by its power series; stable for order <= 10, x <= ~40.
    half = 0.5 * x
    term = half**order / math.gamma(order + 1.0)
    total = term
    m = 0
    while True:
        m += 1
        term *= -(half * half) / (m * (m + order))
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-280) or m > 400:
            return total


def bessel_first_zero(order: float, scan_max: float = 50.0) -> OracleValue:
    """First positive zero of the Bessel function of the first kind, by
    series evaluation, coarse sign scan and bisection."""
    if order < 0 or order > 10:
        raise ValueError("order must lie in [0, 10]")
    step = math.pi / 64
    prev_x = step
    prev_v = _bessel_series(order, prev_x)
    x = prev_x
    while x < scan_max:
        x += step
        v = _bessel_series(order, x)
        if prev_v == 0.0 or math.copysign(1.0, v) != math.copysign(1.0, prev_v):
            return _bisect(lambda t: _bessel_series(order, t), prev_x, x,
                           "bessel-series")
        prev_x, prev_v = x, v
    raise NoSignChangeError(f"no Bessel sign change below {scan_max}")


ZH3 = "zh3"
DTRIG_LOW = "dtrig_low"
DTRIG_HIGH = "dtrig_high"
ZS9 = "zs9"
HT1 = "ht1"

CLOSED_FORM_CASES = (ZH3, DTRIG_LOW, DTRIG_HIGH, ZS9, HT1)


def solve_closed_form(case: str, a: float = 1.0, b: float = 1.0) -> OracleValue:
    """Critical-length equations known in closed form for four-dimensional
    kernels, plus the two-section trig/hyperbolic boundary.

    zh3        kernel cosh(ax), sinh(ax), cos(bx), sin(bx):
               (b^2-a^2) sinh(ax) sin(bx) = 2ab (1 - cosh(ax) cos(bx))
               on ]pi/b, 2pi/b[.
    dtrig_low  two trig pairs, a < b <= 3a: b sin(ax) = a sin(bx) on
               [pi floor(b/a)/b, pi ceil(b/a)/b].
    dtrig_high two trig pairs, b >= 3a:
               (b-a) sin((b+a)x/2) + (b+a) sin((b-a)x/2) = 0
               on ]2pi/b, 2pi/(b-a)[.
    zs9        kernel e^{+-ax} cos(bx), e^{+-ax} sin(bx):
               b tanh(ax) = a tan(bx) on ]pi/b, 3pi/(2b)[.
    ht1        boundary of the two-dimensional trig(T)+hyperbolic(H) splice:
               solves coth H = -cot T (pass a = T); needs cot T < -1.
    """
    if case == ZH3:
        if a <= 0 or b <= 0:
            raise OutOfRegimeError("zh3 needs a, b > 0")
        f = lambda x: ((b * b - a * a) * math.sinh(a * x) * math.sin(b * x)
                       - 2 * a * b * (1 - math.cosh(a * x) * math.cos(b * x)))
        eps = 1e-9 * math.pi / b
        return _bisect(f, math.pi / b + eps, 2 * math.pi / b - eps, "zh3")

    if case == DTRIG_LOW:
        if not (0 < a < b <= 3 * a):
            raise OutOfRegimeError("dtrig_low needs a < b <= 3a")
        ratio = b / a
        lo = math.pi * math.floor(ratio) / b
        hi = math.pi * math.ceil(ratio) / b
        if math.floor(ratio) == math.ceil(ratio):
            # Integer frequency ratio: both sides vanish at pi/a exactly.
            return OracleValue(math.pi / a, (math.pi / a, math.pi / a),
                               "dtrig-low-degenerate")
        f = lambda x: b * math.sin(a * x) - a * math.sin(b * x)
        eps = 1e-9 * (hi - lo)
        return _bisect(f, lo + eps, hi - eps, "dtrig-low")

    if case == DTRIG_HIGH:
        if not (0 < a and b >= 3 * a):
            raise OutOfRegimeError("dtrig_high needs b >= 3a > 0")
        f = lambda x: ((b - a) * math.sin((b + a) * x / 2)
                       + (b + a) * math.sin((b - a) * x / 2))
        eps = 1e-9 / b
        return _bisect(f, 2 * math.pi / b + eps, 2 * math.pi / (b - a) - eps,
                       "dtrig-high")

    if case == ZS9:
        if a <= 0 or b <= 0:
            raise OutOfRegimeError("zs9 needs a, b > 0")
        f = lambda x: b * math.tanh(a * x) - a * math.tan(b * x)
        lo = math.pi / b * (1 + 1e-9)
        hi = 1.5 * math.pi / b * (1 - 1e-9)
        return _bisect(f, lo, hi, "zs9")

    if case == HT1:
        t = a
        if not 0 < t < math.pi:
            raise OutOfRegimeError("ht1 needs the trig length in (0, pi)")
        cot_t = math.cos(t) / math.sin(t)
        if cot_t >= -1.0:
            raise OutOfRegimeError(
                "cot T >= -1: the splice is EC for every hyperbolic length"
            )
        h = math.atanh(-1.0 / cot_t)
        return OracleValue(h, (h, h), "ht1-closed-form")

    raise ValueError(f"unknown closed-form case {case!r}")


def _distinguished_member(fam) -> np.ndarray:
    """Coefficients of the member with a full-order zero at 0 and unit
    n-th derivative there."""
    n = fam.dim - 1
    rows = fam.derivative_rows(0.0, n)
    rhs = np.zeros(fam.dim)
    rhs[n] = 1.0
    return np.linalg.solve(rows, rhs)


def wronskian_scan(op, k: int, h_max: float, step: float | None = None):
    """First positive zero of the Wronskian of (S, S', ..., S^(k)), where S
    is the kernel member vanishing to full order at 0, or None below h_max.

    Zeros are located by sign change; even-order touching zeros (the
    Wronskian dips to zero without crossing, as happens in cycloidal
    kernels) are caught by refining interior minima of |W| and accepting
    them when the refined value is negligible against the scan's scale.
    """
    roots = op if isinstance(op, RootSet) else find_roots(op)
    fam = build_family(roots)
    n = fam.dim - 1
    if k > n - 1:
        raise ValueError("k must be at most n-1")
    coeffs = _distinguished_member(fam)
    order = 2 * k

    def wronskian(h: float) -> float:
        jets = fam.derivative_rows(h, order) @ coeffs
        mat = np.empty((k + 1, k + 1))
        for r in range(k + 1):
            mat[r] = jets[r:r + k + 1]
        return float(np.linalg.det(mat))

    if step is None:
        step = h_max / 4096
    hs = np.arange(step, h_max + 0.5 * step, step)
    vals = np.array([wronskian(h) for h in hs])

    crossing = None
    for idx in range(len(hs) - 1):
        if vals[idx] == 0.0:
            crossing = hs[idx]
            break
        if math.copysign(1.0, vals[idx]) != math.copysign(1.0, vals[idx + 1]):
            crossing = _bisect(wronskian, hs[idx], hs[idx + 1], "wronskian").value
            break

    touch = None
    absvals = np.abs(vals)
    running_scale = np.maximum.accumulate(absvals)
    for idx in range(1, len(hs) - 1):
        if crossing is not None and hs[idx] >= crossing:
            break
        if absvals[idx] < absvals[idx - 1] and absvals[idx] <= absvals[idx + 1]:
            res = minimize_scalar(lambda h: abs(wronskian(h)),
                                  bounds=(hs[idx - 1], hs[idx + 1]),
                                  method="bounded",
                                  options={"xatol": 1e-12})
            if res.fun <= 1e-6 * max(running_scale[idx], 1e-300):
                touch = float(res.x)
                break

    candidates = [c for c in (crossing, touch) if c is not None]
    return min(candidates) if candidates else None


def brute_force_ec(sp: PiecewiseSpace, grid: int = 200, tau: float = 1e-13) -> str:
    """Definition-level EC check on a sampled grid of point pairs.

    For every split i + j = n + 1 (i, j >= 1), the determinant with i
    derivative columns at x and j at y must keep one strict sign over all
    sampled x < y.  A sign change yields NotEC, and so does a determinant
    that is essentially zero (below ``tau`` after column normalisation).
    Probabilistic by nature: generic zeros cross and are caught once the
    grid straddles them, but even-order touching zeros between grid nodes
    (reflection-symmetric kernels can produce them) escape detection.
    """
    n = sp.dim - 1
    if n > 4:
        raise ValueError("brute force check limited to dimension <= 5")
    if grid > 400:
        raise ValueError("grid limited to 400 points")
    xs = np.linspace(sp.a, sp.b, grid)
    jets = np.empty((grid, n + 1, n + 1))
    for t, x in enumerate(xs):
        sect = sp.locate(float(x))
        rows = sp.sections[sect].derivative_rows(float(x), n)
        jets[t] = rows @ sp.cumulative[sect]

    ii, jj = np.triu_indices(grid, k=1)
    for i in range(1, n + 1):
        j = n + 1 - i
        mats = np.concatenate(
            [jets[ii][:, :i, :].transpose(0, 2, 1),
             jets[jj][:, :j, :].transpose(0, 2, 1)],
            axis=2,
        )
        norms = np.linalg.norm(mats, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        dets = np.linalg.det(mats / norms)
        if dets.max() > 0 and dets.min() < 0:
            return "NotEC"
        if np.min(np.abs(dets)) <= tau:
            return "NotEC"
    return "EC"
