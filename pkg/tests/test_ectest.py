import math

import numpy as np
import pytest

from eclength import (
    RunConfig,
    brute_force_ec,
    build_family,
    ec_test,
    gamma_step,
    make_spliced,
    make_uniform,
    positivity_verdict,
)
from eclength.bernlike import GammaTensor
from eclength.design import LevelTower, _jet_div
from eclength.ectest import EC, INCONCLUSIVE, NOT_EC

from util import hyp_roots, trig_roots, trig_space


def tensor(data, level=0):
    data = np.asarray(data, dtype=float)
    return GammaTensor(data=data, level=level, n=data.shape[0] - 1 + level,
                       q=data.shape[1] - 1)


class TestGammaStep:
    def test_two_by_two_formula(self):
        rng = np.random.default_rng(2)
        data = rng.uniform(0.5, 2.0, size=(2, 3, 2))
        out = gamma_step(tensor(data)).data
        for k in range(3):
            s0 = data[0, k, 0] + data[1, k, 0]
            s1 = data[0, k, 1] + data[1, k, 1]
            expected = data[1, k, 1] / s1 - data[1, k, 0] / s0
            assert out[0, k, 0] == pytest.approx(float(expected), rel=1e-14)

    def test_all_equal_gives_zero(self):
        out = gamma_step(tensor(np.ones((2, 2, 2)))).data
        assert np.allclose(out.astype(float), 0.0)

    def test_levels_strictly_positive_inside_critical_length(self):
        sp = trig_space(2, 0.0, [1.5], 3.0)
        report = ec_test(sp, RunConfig(keep_levels=True))
        assert report.verdict == EC
        assert brute_force_ec(sp) == EC
        level1 = report.levels[1].data.astype(float)
        pattern = report.levels[1].zero_pattern()
        assert np.all(level1[~pattern] > 0)


class TestPositivityVerdict:
    def test_negative_entry_fails_with_index(self):
        data = np.ones((2, 3, 2))
        data[1, 1, 0] = -1e-3
        v = positivity_verdict(tensor(data), 1e-9)
        assert v.kind == "fail"
        assert v.index == (1, 1, 0)

    def test_pattern_zeros_pass(self):
        data = np.ones((2, 2, 2))
        data[1, 0, 0] = 0.0   # first-interval structural zero
        data[0, 1, 1] = 0.0   # last-interval structural zero
        v = positivity_verdict(tensor(data), 1e-9)
        assert v.kind == "pass"

    def test_dead_band(self):
        tau = 1e-9
        data = np.ones((2, 3, 2))
        data[0, 1, 1] = 0.5 * tau  # scale of that row is 1
        v = positivity_verdict(tensor(data), tau)
        assert v.kind == "deadband"
        assert v.index == (0, 1, 1)


class TestEcTest:
    def test_trig_short(self):
        assert ec_test(trig_space(1, 0.0, [1.0], 2.0)).verdict == EC

    def test_trig_long(self):
        report = ec_test(trig_space(1, 0.0, [1.65], 3.3))
        assert report.verdict == NOT_EC
        assert report.failure is not None

    def test_splice_boundary_against_closed_form(self):
        # cot T + coth H > 0 characterises the glued space; at T = 2.5 the
        # boundary sits at H ~ 0.9662, below it the space is EC.
        template = [(build_family(trig_roots(1)), 2.5)]
        for h_len, expected in ((0.8, EC), (1.1, NOT_EC)):
            sp = make_spliced([(trig_roots(1), 2.5), (hyp_roots(1), h_len)])
            assert ec_test(sp).verdict == expected
            cot_coth = 1 / math.tan(2.5) + 1 / math.tanh(h_len)
            assert (cot_coth > 0) == (expected == EC)

    def test_not_ec_section_is_folded(self):
        # Trig section longer than its own critical length: the report says
        # NotEC rather than raising.
        sp = make_spliced([(trig_roots(1), 3.3), (hyp_roots(1), 0.5)])
        report = ec_test(sp, RunConfig(check_sections=True))
        assert report.verdict == NOT_EC

    def test_exactly_at_critical_length(self):
        sp = trig_space(1, 0.0, [math.pi / 2], math.pi)
        assert ec_test(sp).verdict in (NOT_EC, INCONCLUSIVE)


class TestEquivalenceProperties:
    def test_monotone_in_length(self):
        rng = np.random.default_rng(31)
        h_pass = 2.8
        assert ec_test(trig_space(1, 0.0, [h_pass / 2], h_pass)).verdict == EC
        for _ in range(10):
            h = rng.uniform(0.2, h_pass)
            assert ec_test(trig_space(1, 0.0, [h / 2], h)).verdict == EC

    def test_translation_invariance(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            alpha = rng.uniform(-5.0, 5.0)
            h = rng.uniform(0.5, 4.0)
            v0 = ec_test(trig_space(2, 0.0, [h / 2], h)).verdict
            v1 = ec_test(trig_space(2, alpha, [alpha + h / 2], alpha + h)).verdict
            assert v0 == v1

    def test_level_step_matches_derived_space_expansion(self):
        # Build the level-1 data independently: the next global basis is the
        # derivative of (tail sum / weight) of the level-0 one, and its
        # expansion in the analogous local bases is solved from jets at the
        # section midpoints.  Pure arithmetic recursion must agree.
        sp = trig_space(2, 0.0, [1.5], 3.0)
        report = ec_test(sp, RunConfig(keep_levels=True))
        assert report.verdict == EC
        g0 = report.levels[0].data.astype(float)
        g1 = report.levels[1].data.astype(float)
        tower = LevelTower(sp, report.local_bases, list(report.levels)
                           + [gamma_step(report.levels[1])])
        n = sp.dim - 1
        for k in range(sp.nsections):
            xm = 0.5 * (sp.knots[k] + sp.knots[k + 1])
            local1 = tower.local_jets(k, 1, float(xm), n - 1)
            rows = sp.sections[k].derivative_rows(float(xm), n + 1)
            l0jets = (rows @ report.local_bases[k].columns).T
            for i in range(n):
                tail = g0[i + 1:, k, :].sum(axis=0) @ l0jets
                w = g0[:, k, :].sum(axis=0) @ l0jets
                v1_jets = _jet_div(tail, w)[1:]
                sol = np.linalg.solve(local1.T[:n, :], v1_jets[:n])
                assert np.allclose(sol, g1[i, k, :], atol=1e-8)


class TestReport:
    def test_report_dict(self):
        report = ec_test(trig_space(1, 0.0, [1.0], 2.0), RunConfig(keep_levels=True))
        payload = report.to_dict(include_levels=True)
        assert payload["verdict"] == "EC"
        assert len(payload["levels"]) == 1
        assert all(m > 0 for m in payload["margins"])

    def test_keep_levels_off_by_default(self):
        report = ec_test(trig_space(1, 0.0, [1.0], 2.0))
        assert report.levels is None
        assert report.global_basis is not None
