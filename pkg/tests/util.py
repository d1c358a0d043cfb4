"""Shared helpers for the test suite."""

import numpy as np

from eclength import RootSet, build_family, make_uniform


def trig_roots(n: int) -> RootSet:
    """Roots of x^{n-1}(x^2+1): kernel 1, x, .., x^{n-2}, cos, sin."""
    entries = [(0.0, 1.0, 1)]
    if n >= 2:
        entries.append((0.0, 0.0, n - 1))
    return RootSet(tuple(entries))


def hyp_roots(n: int) -> RootSet:
    """Roots of x^{n-1}(x^2-1): kernel 1, x, .., x^{n-2}, cosh, sinh."""
    entries = [(1.0, 0.0, 1), (-1.0, 0.0, 1)]
    if n >= 2:
        entries.append((0.0, 0.0, n - 1))
    return RootSet(tuple(entries))


def trig_space(n: int, a: float, knots, b: float):
    return make_uniform(trig_roots(n), a, knots, b)


def finite_diff(f, x: float, h: float = 1e-6) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)
