import math

import numpy as np
import pytest

from eclength import (
    build_family,
    global_bernstein_like,
    level0_expansions,
    local_bernstein_like,
    make_uniform,
)
from eclength.bernlike import NoBasisEvidence
from eclength.errors import NotPositiveError, RankDeficientError

from util import trig_roots, trig_space


def proportional(f, g, xs, tol=1e-10):
    vals_f = np.array([f(x) for x in xs])
    vals_g = np.array([g(x) for x in xs])
    ratio = vals_f[np.argmax(np.abs(vals_g))] / vals_g[np.argmax(np.abs(vals_g))]
    return np.max(np.abs(vals_f - ratio * vals_g)) <= tol * max(1.0, np.max(np.abs(vals_f)))


class TestLocalBasis:
    def test_trig_pair_short_interval(self):
        fam = build_family(trig_roots(1))
        b = 2.0
        basis = local_bernstein_like(fam, 0.0, b)
        xs = np.linspace(0.0, b, 17)
        assert proportional(lambda x: basis.eval(0, x), lambda x: math.sin(b - x), xs)
        assert proportional(lambda x: basis.eval(1, x), lambda x: math.sin(x), xs)
        # Unit coefficient norm and positive first derivatives at the left end.
        assert np.allclose(np.linalg.norm(basis.columns, axis=0), 1.0)
        assert basis.eval(0, 0.0) > 0
        assert basis.eval(1, 0.0, order=1) > 0

    def test_linear_case(self):
        from eclength import RootSet

        fam = build_family(RootSet(((0.0, 0.0, 2),)))
        basis = local_bernstein_like(fam, 0.0, 1.0)
        xs = np.linspace(0.0, 1.0, 9)
        assert proportional(lambda x: basis.eval(0, x), lambda x: 1.0 - x, xs)
        assert proportional(lambda x: basis.eval(1, x), lambda x: x, xs)

    def test_half_period_rank_deficient(self):
        fam = build_family(trig_roots(1))
        with pytest.raises(RankDeficientError):
            local_bernstein_like(fam, 0.0, math.pi)

    def test_positivity_check_detects_long_interval(self):
        fam = build_family(trig_roots(1))
        with pytest.raises(NotPositiveError):
            local_bernstein_like(fam, 0.0, 3.3, check_positivity=True)

    def test_endpoint_multiplicities(self):
        fam = build_family(trig_roots(3))
        c, d = 0.0, 2.5
        basis = local_bernstein_like(fam, c, d)
        n = fam.dim - 1
        for i in range(fam.dim):
            for order in range(i):
                scale = np.linalg.norm(fam.derivative_rows(c, order)[order])
                assert abs(basis.eval(i, c, order)) <= 1e-9 * scale
            for order in range(n - i):
                scale = np.linalg.norm(fam.derivative_rows(d, order)[order])
                assert abs(basis.eval(i, d, order)) <= 1e-9 * scale
            assert basis.eval(i, c, i) > 0


class TestGlobalBasis:
    def test_exists_below_half_period(self):
        h = 2.0
        sp = trig_space(1, 0.0, [h / 2], h)
        basis = global_bernstein_like(sp)
        assert not isinstance(basis, NoBasisEvidence)
        # Closed form for the single endpoint determinant of this space:
        # with unit columns U(0) = (1, 0) and U(h) = (cos h, sin h) the
        # normalised determinant is exactly sin h.
        rows0 = sp.sections[0].derivative_rows(0.0, 0)
        rows1 = sp.sections[1].derivative_rows(h, 0) @ sp.cumulative[1]
        det = float(np.linalg.det(np.column_stack([rows0[0], rows1[0]])))
        assert det == pytest.approx(math.sin(h), abs=1e-12)

    def test_no_basis_at_half_period(self):
        h = math.pi
        sp = trig_space(1, 0.0, [h / 2], h)
        res = global_bernstein_like(sp)
        assert isinstance(res, NoBasisEvidence)
        assert (res.i, res.j) == (1, 1)

    def test_cycloidal_short_interval(self):
        sp = trig_space(4, 0.0, [0.05], 0.1)
        basis = global_bernstein_like(sp)
        assert not isinstance(basis, NoBasisEvidence)
        assert basis.dim == 5


class TestLevelZero:
    def test_lagrange_ratio(self):
        # Global first column on [0, pi/2] with knot pi/4 is proportional to
        # cos; expanding on the first section and solving the same system
        # from scratch at {0, pi/4} must give coefficients in ratio sqrt(2):1
        # for Lagrange-normalised local functions.
        sp = trig_space(1, 0.0, [math.pi / 4], math.pi / 2)
        gb = global_bernstein_like(sp)
        locals_ = [
            local_bernstein_like(sec.fam, sec.t0, sec.t1, origin=sec.origin)
            for sec in sp.sections
        ]
        gamma = level0_expansions(gb, locals_)
        # Independent 2x2 solve: values of local basis and of the global
        # column at the section endpoints.
        pts = [0.0, math.pi / 4]
        lmat = np.array([[locals_[0].eval(r, x) for r in range(2)] for x in pts])
        rhs = np.array([gb.eval(0, x) for x in pts])
        expected = np.linalg.solve(lmat, rhs)
        assert np.allclose(gamma.data[0, 0, :].astype(float), expected, rtol=1e-9)
        ratio = expected[0] / expected[1] / (locals_[0].eval(1, math.pi / 4)
                                             / locals_[0].eval(0, 0.0))
        assert ratio == pytest.approx(math.sqrt(2.0), rel=1e-9)
        assert np.all(gamma.data[0, 0, :] > 0)

    def test_single_section_identity(self):
        sp = trig_space(2, 0.0, [], 3.0)
        gb = global_bernstein_like(sp)
        locals_ = [local_bernstein_like(sp.sections[0].fam, 0.0, 3.0)]
        gamma = level0_expansions(gb, locals_)
        assert np.allclose(gamma.data[:, 0, :].astype(float), np.eye(3), atol=1e-9)

    def test_first_row_all_positive(self):
        sp = trig_space(1, 0.0, [1.0], 2.0)
        gb = global_bernstein_like(sp)
        locals_ = [
            local_bernstein_like(sec.fam, sec.t0, sec.t1) for sec in sp.sections
        ]
        gamma = level0_expansions(gb, locals_)
        assert np.all(gamma.data[0, 0, :] > 0)

    def test_zero_pattern_and_positivity(self):
        # Certified-EC space: pattern entries vanish, all others positive.
        sp = trig_space(3, 0.0, [2.0, 4.0], 6.0)
        gb = global_bernstein_like(sp)
        locals_ = [
            local_bernstein_like(sec.fam, sec.t0, sec.t1) for sec in sp.sections
        ]
        gamma = level0_expansions(gb, locals_)
        pattern = gamma.zero_pattern()
        scales = gamma.row_scales()
        data = gamma.data.astype(float)
        assert np.all(np.abs(data[pattern]) <= 1e-9 * np.broadcast_to(
            scales[:, :, None], data.shape)[pattern])
        assert np.all(data[~pattern] > 0)

    def test_reexpansion_identity(self):
        sp = trig_space(3, 0.0, [2.0, 4.0], 6.0)
        gb = global_bernstein_like(sp)
        locals_ = [
            local_bernstein_like(sec.fam, sec.t0, sec.t1) for sec in sp.sections
        ]
        gamma = level0_expansions(gb, locals_)
        data = gamma.data.astype(float)
        for k, sec in enumerate(sp.sections):
            xs = np.linspace(sec.t0, sec.t1, 33)
            for i in range(sp.dim):
                direct = np.array([gb.eval(i, float(x)) for x in xs])
                recon = np.zeros_like(direct)
                for r in range(sp.dim):
                    recon += data[i, k, r] * np.array(
                        [locals_[k].eval(r, float(x)) for x in xs])
                scale = max(1.0, np.max(np.abs(direct)))
                assert np.max(np.abs(direct - recon)) <= 1e-9 * scale
