"""Exponential-polynomial algebra for kernels of constant-coefficient operators.

A monic operator of order n+1 is described by its characteristic polynomial
p(x) = x^{n+1} + a_n x^n + ... + a_0.  Its kernel is spanned by real-form
terms x^j e^{ax} cos(bx) and x^j e^{ax} sin(bx) read off the roots of p.
This module finds and clusters those roots, builds the canonical term family
together with an exact differentiation matrix, and evaluates members and
their derivatives to any (capped) order without numerical differencing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NonFiniteError, NotDesignSpaceError

EXP = "exp"
COS = "cos"
SIN = "sin"

_KIND_RANK = {EXP: 0, COS: 1, SIN: 2}


class Term(NamedTuple):
    """One real-form basis function x^j e^{alpha x} * {1 | cos(beta x) | sin(beta x)}."""

    j: int
    alpha: float
    beta: float
    kind: str


class RootEntry(NamedTuple):
    """A root of the characteristic polynomial: real part, imaginary part
    (pair representative, >= 0) and multiplicity."""

    re: float
    im: float
    mult: int


@dataclass(frozen=True, eq=False)
class CharPoly:
    """Monic characteristic polynomial, stored by its low-order coefficients.

    ``coeffs`` holds a_0..a_n; the leading coefficient of x^{n+1} is an
    implied 1, so ``degree`` equals ``len(coeffs)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d sequence a_0..a_n")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full_coeffs(self) -> np.ndarray:
        """Coefficients a_0..a_n, 1 in ascending order of power."""
        return np.concatenate([self.coeffs, [1.0]])

    def __call__(self, z):
        return np.polyval(self.full_coeffs()[::-1], z)

    def deriv(self, z):
        full = self.full_coeffs()
        dcoeffs = full[1:] * np.arange(1, len(full))
        return np.polyval(dcoeffs[::-1], z)

    def deflate_origin(self) -> "CharPoly":
        """Divide by x.  Valid only when a_0 == 0 (constants in the kernel)."""
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        if abs(self.coeffs[0]) > 1e-12 * scale:
            raise NotDesignSpaceError("p(0) != 0: kernel does not contain constants")
        if self.degree < 2:
            raise ValueError("cannot deflate a degree-1 polynomial")
        return CharPoly(self.coeffs[1:])

    @staticmethod
    def from_roots(roots: "RootSet") -> "CharPoly":
        """Expand the (monic) polynomial with the given root multiset."""
        poly = np.array([1.0])
        for re, im, mult in roots.entries:
            if im == 0.0:
                factor = np.array([1.0, -re])
            else:
                factor = np.array([1.0, -2.0 * re, re * re + im * im])
            for _ in range(mult):
                poly = np.convolve(poly, factor)
        return CharPoly(poly[1:][::-1])


@dataclass(frozen=True, eq=False)
class RootSet:
    """Clustered roots of a characteristic polynomial.

    Complex conjugate pairs are stored once with im > 0; the pair counts
    twice toward the polynomial degree.
    """

    entries: tuple

    def __post_init__(self):
        ents = tuple(RootEntry(float(r), float(i), int(m)) for r, i, m in self.entries)
        for r, i, m in ents:
            if not (math.isfinite(r) and math.isfinite(i)):
                raise ValueError("root parts must be finite")
            if i < 0:
                raise ValueError("imaginary parts must be >= 0 (pair representatives)")
            if m < 1:
                raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "entries", tuple(sorted(ents)))

    @property
    def degree(self) -> int:
        return sum(m * (1 if i == 0.0 else 2) for _, i, m in self.entries)

    def max_imag(self) -> float:
        return max((i for _, i, _ in self.entries), default=0.0)

    def deflate_origin(self) -> "RootSet":
        """Remove one zero root.  Valid only when 0 is a root."""
        out = []
        found = False
        for re, im, mult in self.entries:
            if not found and im == 0.0 and abs(re) <= 1e-12:
                found = True
                if mult > 1:
                    out.append((re, im, mult - 1))
            else:
                out.append((re, im, mult))
        if not found:
            raise NotDesignSpaceError("0 is not a root: kernel does not contain constants")
        if not out:
            raise ValueError("cannot deflate to an empty root set")
        return RootSet(tuple(out))


def find_roots(p: CharPoly, cluster_tol: float = 1e-8) -> RootSet:
    """Roots of p via companion-matrix eigenvalues, polished and clustered.

    Numerically close roots merge within ``cluster_tol`` relative to the
    largest root magnitude (floored at 1).  Conjugate symmetry holds by
    construction since the coefficients are real.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    if p.degree < 1:
        raise ValueError("degree-0 operator rejected")
    raw = np.roots(p.full_coeffs()[::-1])
    if not np.all(np.isfinite(raw)):
        raise NonFiniteError("companion eigenvalue iteration produced non-finite roots")

    # One Newton step per root; skipped where p' nearly vanishes (multiple roots).
    polished = []
    pscale = max(1.0, float(np.max(np.abs(p.full_coeffs()))))
    for z in raw:
        dz = p.deriv(z)
        if abs(dz) > 1e-8 * pscale:
            z = z - p(z) / dz
        polished.append(z)
    roots = np.array(polished)
    if not np.all(np.isfinite(roots)):
        raise NonFiniteError("Newton polish diverged")

    tol = cluster_tol * max(1.0, float(np.max(np.abs(roots))))
    clusters = _cluster(roots, tol)

    entries = []
    used = [False] * len(clusters)
    for idx, (center, count) in enumerate(clusters):
        if used[idx]:
            continue
        used[idx] = True
        if abs(center.imag) <= tol:
            entries.append((center.real, 0.0, count))
            continue
        if center.imag < 0:
            center = center.conjugate()
        # Find and consume the conjugate partner cluster.
        partner = None
        for jdx, (other, ocount) in enumerate(clusters):
            if used[jdx]:
                continue
            if abs(other - center.conjugate()) <= 2 * tol and ocount == count:
                partner = jdx
                break
        if partner is None:
            raise NonFiniteError("conjugate pairing failed; widen cluster_tol")
        used[partner] = True
        mate = clusters[partner][0]
        re = 0.5 * (center.real + mate.real)
        im = 0.5 * (abs(center.imag) + abs(mate.imag))
        entries.append((re, im, count))

    rs = RootSet(tuple(entries))
    if rs.degree != p.degree:
        raise NonFiniteError(
            f"clustered multiplicities sum to {rs.degree}, expected {p.degree}"
        )
    return rs


def _cluster(points: np.ndarray, tol: float):
    """Greedy union of complex points within tol; returns (centroid, count) pairs."""
    m = len(points)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if abs(points[i] - points[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(points[i])
    return [(sum(g) / len(g), len(g)) for g in groups.values()]


@dataclass(frozen=True, eq=False)
class FamilyBasis:
    """Canonical ordered family of real-form kernel terms with its exact
    differentiation matrix.

    ``diff_op`` maps the coefficient vector of F to that of F' (column
    convention: coeffs' = diff_op @ coeffs), built from the exact product
    rules for x^j e^{ax} cos(bx) and x^j e^{ax} sin(bx).
    """

    terms: tuple
    diff_op: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.terms)

    def term_values(self, x: float, dtype=float) -> np.ndarray:
        """Values of every family term at x (optionally in longdouble)."""
        out = np.empty(self.dim, dtype=dtype)
        xv = dtype(x)
        for t, (j, alpha, beta, kind) in enumerate(self.terms):
            v = xv**j if j else dtype(1.0)
            if alpha:
                v = v * np.exp(dtype(alpha) * xv)
            if kind == COS:
                v = v * np.cos(dtype(beta) * xv)
            elif kind == SIN:
                v = v * np.sin(dtype(beta) * xv)
            out[t] = v
        return out

    def derivative_rows(self, x: float, max_order: int, dtype=float) -> np.ndarray:
        """Matrix R with R[o, t] = d^o/dx^o of term t at x, o = 0..max_order."""
        rows = np.empty((max_order + 1, self.dim), dtype=dtype)
        rows[0] = self.term_values(x, dtype=dtype)
        dop = self.diff_op.astype(dtype, copy=False)
        for o in range(1, max_order + 1):
            rows[o] = rows[o - 1] @ dop
        if not np.all(np.isfinite(rows)):
            raise NonFiniteError(f"term derivatives overflowed at x={x!r}")
        return rows

    def eval(self, coeffs: np.ndarray, x: float, order: int = 0) -> float:
        """Value of the order-th derivative of sum(coeffs * terms) at x."""
        return float(self.derivative_rows(x, order)[order] @ np.asarray(coeffs, float))


def build_family(r: RootSet) -> FamilyBasis:
    """Real-form kernel basis for a root multiset.

    Each real root a of multiplicity m contributes x^j e^{ax}, j < m; each
    conjugate pair a +- ib contributes x^j e^{ax} cos(bx) and the sin
    companion.  Terms are ordered by (alpha, beta, kind, j) so coefficient
    vectors are reproducible across runs.
    """
    if not r.entries:
        raise ValueError("empty root set")
    terms = []
    for re, im, mult in r.entries:
        if im == 0.0:
            terms.extend(Term(j, re, 0.0, EXP) for j in range(mult))
        else:
            terms.extend(Term(j, re, im, COS) for j in range(mult))
            terms.extend(Term(j, re, im, SIN) for j in range(mult))
    terms.sort(key=lambda t: (t.alpha, t.beta, _KIND_RANK[t.kind], t.j))
    terms = tuple(terms)

    index = {t: i for i, t in enumerate(terms)}
    dim = len(terms)
    diff = np.zeros((dim, dim))
    for t, (j, alpha, beta, kind) in enumerate(terms):
        if j > 0:
            diff[index[Term(j - 1, alpha, beta, kind)], t] += j
        if alpha != 0.0:
            diff[index[Term(j, alpha, beta, kind)], t] += alpha
        if kind == COS:
            diff[index[Term(j, alpha, beta, SIN)], t] += -beta
        elif kind == SIN:
            diff[index[Term(j, alpha, beta, COS)], t] += beta
    return FamilyBasis(terms=terms, diff_op=diff)


def eval_derivatives(fam: FamilyBasis, v: np.ndarray, x: float, max_order: int,
                     order_cap: int | None = None) -> list[float]:
    """[F(x), F'(x), ..., F^(max_order)(x)] for F with coefficients v.

    Derivative k is diff_op^k applied to v, then pointwise term evaluation;
    no numerical differencing is involved.  max_order is capped (default
    twice the family dimension) to keep repeated matrix powers honest.
    """
    cap = 2 * fam.dim if order_cap is None else order_cap
    if max_order > cap:
        raise ValueError(f"max_order {max_order} exceeds cap {cap}")
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    rows = fam.derivative_rows(x, max_order)
    vals = rows @ np.asarray(v, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError("derivative values exceeded the representable range")
    return [float(t) for t in vals]


def operator_from_json(obj: dict) -> CharPoly | RootSet:
    """Operator spec: {"coeffs":[a0..an]} (monic implied) or
    {"roots":[{"re":r,"im":i,"mult":m}, ...]} with im >= 0 pair representatives."""
    if not isinstance(obj, dict):
        raise ValueError("operator spec must be a JSON object")
    if ("coeffs" in obj) == ("roots" in obj):
        raise ValueError('operator spec needs exactly one of "coeffs" or "roots"')
    if "coeffs" in obj:
        return CharPoly(np.asarray(obj["coeffs"], dtype=float))
    entries = []
    for item in obj["roots"]:
        re = float(item["re"])
        im = float(item.get("im", 0.0))
        mult = int(item.get("mult", 1))
        if im < 0:
            raise ValueError("im < 0 rejected; store conjugate pairs once with im > 0")
        entries.append((re, im, mult))
    return RootSet(tuple(entries))
