"""Two-phase critical-length computation.

The critical length of an operator kernel is the supremum of interval
lengths on which the kernel is an EC-space; it is finite exactly when the
characteristic polynomial has a non-real root.  Phase one multiplies up a
guaranteed-safe section length ell0 < pi/M (M the largest imaginary part
among the roots) until the glued test first fails, bracketing the critical
length between consecutive multiples of ell0.  Phase two bisects on the
interval length, probing each candidate with exactly two equal-length
sections so both sections stay safely EC throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import RunConfig
from .ectest import EC, ec_test
from .errors import ExhaustedError
from .expfam import CharPoly, FamilyBasis, RootSet, build_family, find_roots
from .space import make_spliced

FINITE = "Finite"
INFINITE = "Infinite"


@dataclass(frozen=True, eq=False)
class CriticalLengthResult:
    status: str
    value: float
    bracket: tuple | None = None
    mu: int | None = None
    ell0: float | None = None
    trace: tuple = ()
    design: bool = False

    @property
    def is_finite(self) -> bool:
        return self.status == FINITE

    def to_dict(self, include_trace: bool = False) -> dict:
        out = {
            "status": self.status,
            "value": self.value,
            "bracket": list(self.bracket) if self.bracket else None,
            "mu": self.mu,
            "ell0": self.ell0,
            "design": self.design,
        }
        if include_trace:
            out["trace"] = [[h, v] for h, v in self.trace]
        return out


def max_imag(r: RootSet) -> float:
    """Largest imaginary part among the roots; 0 when all roots are real."""
    return r.max_imag()


def _resolve_roots(op) -> RootSet:
    if isinstance(op, RootSet):
        return op
    if isinstance(op, CharPoly):
        return find_roots(op)
    raise TypeError(f"expected CharPoly or RootSet, got {type(op)!r}")


def _probe(fam: FamilyBasis, h: float, nsections: int, cfg: RunConfig) -> str:
    """Verdict for the kernel on an interval of length h split into equal
    sections.

    The kernel is translation invariant, so every section reads the family
    in a chart centred on itself (section-midpoint origins).  The verdict
    is unchanged, but polynomial terms stay small however long the probe
    interval grows, and the bracket accuracy directly inherits the much
    better conditioning at high dimension.
    """
    step = h / nsections
    sp = make_spliced([(fam, step)] * nsections, start=-0.5 * h,
                      center_charts=True)
    return ec_test(sp, cfg).verdict


def rough_estimate(op, ell0: float, k_max: int, cfg: RunConfig | None = None) -> int:
    """First k for which the kernel fails the test on [0, (k+1) ell0] with
    knots at the multiples of ell0.  That k is mu: the critical length lies
    in ]mu ell0, (mu+1) ell0].

    ell0 must be below pi/M so each unit section is EC by construction.
    Raises ExhaustedError after k_max probes without a failure; only the
    all-real-roots case proves the critical length infinite, so the caller
    decides what exhaustion means.
    """
    cfg = cfg or RunConfig()
    roots = _resolve_roots(op)
    m_imag = roots.max_imag()
    if m_imag > 0 and not ell0 < math.pi / m_imag:
        raise ValueError("ell0 must be strictly below pi / max_imag")
    fam = build_family(roots)
    for k in range(1, k_max + 1):
        if _probe(fam, (k + 1) * ell0, k + 1, cfg) != EC:
            return k
    raise ExhaustedError(k_max)


def dichotomy(op, mu: int, ell0: float, tol: float,
              cfg: RunConfig | None = None) -> CriticalLengthResult:
    """Bisection on the interval length inside ]mu ell0, (mu+1) ell0].

    Each probe splits [0, h] at h/2 into two equal sections; since mu >= 1,
    every such half stays within a certified-EC length.  Undecidable
    verdicts shrink the bracket from the failing side, keeping the passing
    endpoint certified.
    """
    cfg = cfg or RunConfig()
    if mu < 1:
        raise ValueError("dichotomy requires mu >= 1")
    roots = _resolve_roots(op)
    fam = build_family(roots)
    lo = mu * ell0
    hi = (mu + 1) * ell0
    trace = []
    while hi - lo > tol:
        h = 0.5 * (lo + hi)
        verdict = _probe(fam, h, 2, cfg)
        trace.append((h, verdict))
        if verdict == EC:
            lo = h
        else:
            hi = h
    return CriticalLengthResult(
        status=FINITE,
        value=0.5 * (lo + hi),
        bracket=(lo, hi),
        mu=mu,
        ell0=ell0,
        trace=tuple(trace) if cfg.keep_trace else (),
    )


def critical_length(op, cfg: RunConfig | None = None) -> CriticalLengthResult:
    """Critical length of a kernel given by CharPoly or RootSet.

    Returns Infinite immediately when all roots are real.  Otherwise runs
    the rough estimate with ell0 = ell0_factor * pi / M followed by the
    dichotomy at tolerance tol_dicho.
    """
    cfg = cfg or RunConfig()
    roots = _resolve_roots(op)
    if roots.degree < 2:
        raise ValueError("critical length needs an operator of degree >= 2")
    m_imag = roots.max_imag()
    if m_imag == 0.0:
        return CriticalLengthResult(status=INFINITE, value=math.inf)
    ell0 = cfg.ell0_factor * math.pi / m_imag
    mu = rough_estimate(roots, ell0, cfg.k_max, cfg)
    return dichotomy(roots, mu, ell0, cfg.tol_dicho, cfg)


def critical_length_for_design(op, cfg: RunConfig | None = None) -> CriticalLengthResult:
    """Critical length governing design use of a constants-containing kernel.

    Differentiating the kernel removes the constants, which amounts to
    dividing the characteristic polynomial by x; the result is the critical
    length of that deflated operator, flagged as a design value.
    """
    if isinstance(op, CharPoly):
        deflated = op.deflate_origin()
    elif isinstance(op, RootSet):
        deflated = op.deflate_origin()
    else:
        raise TypeError(f"expected CharPoly or RootSet, got {type(op)!r}")
    base = critical_length(deflated, cfg)
    return CriticalLengthResult(
        status=base.status,
        value=base.value,
        bracket=base.bracket,
        mu=base.mu,
        ell0=base.ell0,
        trace=base.trace,
        design=True,
    )
