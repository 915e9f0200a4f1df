"""Converse machinery: bound function, classification, projection, lower bound."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vceo import (
    BoundParams,
    DistortionTriple,
    DomainError,
    FRegion,
    InfeasibleTargetsError,
    OptimizeOptions,
    PBranch,
    SourceModel,
    classify_F_k,
    condition_holds,
    in_P,
    lower_bound,
    optimize_sum_rate,
    project_to_P,
    r_fn,
    sum_rate,
    sup_sigma_z,
)
from vceo.bound import in_F

from conftest import (
    random_condition_targets,
    random_feasible_targets,
    random_model,
    random_params,
    sample_F_point,
)

UNIT = SourceModel(1.0, 1.0, 1.0)
CANONICAL = DistortionTriple(0.4, 0.4, 0.35)


def random_F_k_triple(rng, sigma_n2):
    t = rng.uniform(0.05, 2.0)
    lo = sigma_n2 * math.exp(-2.0 * t)
    d1 = rng.uniform(lo, sigma_n2)
    d2 = rng.uniform(lo, sigma_n2)
    return d1, d2, t


class TestRFn:
    def test_zero_channel_noise_closed_form(self):
        # r(d1, d2, t, 0) = (1/2) log(n^2 / (d1 d2)), independent of t.
        assert r_fn(1.0, 0.5, 0.5, 1.0, 0.0) == pytest.approx(math.log(2.0), abs=1e-12)
        assert r_fn(1.0, 0.5, 0.5, 0.7, 0.0) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_outside_box_rejected(self):
        with pytest.raises(DomainError):
            r_fn(1.0, 1.2, 0.5, 1.0, 0.0)  # d1 > n
        with pytest.raises(DomainError):
            r_fn(1.0, 0.1, 0.5, 0.5, 0.0)  # n e^{-2t} > d1
        with pytest.raises(DomainError):
            r_fn(1.0, 0.5, 0.5, 1.0, -1.0)

    def test_infinite_channel_noise_is_t(self):
        assert r_fn(1.0, 0.5, 0.5, 1.0, math.inf) == 1.0

    @given(
        n=st.floats(0.25, 4.0),
        t=st.floats(0.05, 2.0),
        x1=st.floats(0.0, 1.0),
        x2=st.floats(0.0, 1.0),
        s=st.floats(0.0, 10.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_monotone_decreasing_in_d_increasing_in_t(self, n, t, x1, x2, s):
        lo = n * math.exp(-2.0 * t)
        d1 = lo + x1 * (n - lo)
        d2 = lo + x2 * (n - lo)
        base = r_fn(n, d1, d2, t, s)
        h = 1e-6 * n
        if d1 + h <= n:
            assert r_fn(n, d1 + h, d2, t, s) <= base + 1e-12
        if d2 + h <= n:
            assert r_fn(n, d1, d2 + h, t, s) <= base + 1e-12
        # Larger t keeps (d1, d2) inside the box, so no feasibility re-check.
        assert r_fn(n, d1, d2, t + 1e-6, s) >= base - 1e-12


class TestConditionHolds:
    def test_holds(self):
        assert condition_holds(UNIT, DistortionTriple(0.4, 0.4, 0.35))

    def test_fails(self):
        assert not condition_holds(UNIT, DistortionTriple(0.4, 0.4, 0.3))

    def test_boundary_is_closed(self):
        assert condition_holds(UNIT, DistortionTriple(0.4, 0.4, 1.0 / 3.0))


class TestSupSigmaZ:
    def test_decreasing_case_attains_at_zero(self):
        t = 0.7
        d = math.exp(-2.0 * t)
        argmax, value = sup_sigma_z(1.0, d, d, t)
        assert argmax == 0.0
        assert value == pytest.approx(2.0 * t, abs=1e-12)

    def test_increasing_case_attains_in_the_limit(self):
        argmax, value = sup_sigma_z(1.0, 1.0, 1.0, 0.5)
        assert math.isinf(argmax)
        assert value == pytest.approx(0.5, abs=1e-12)

    def test_dominates_brute_force_probes(self, rng):
        for _ in range(50):
            n = rng.uniform(0.25, 4.0)
            d1, d2, t = random_F_k_triple(rng, n)
            _, value = sup_sigma_z(n, d1, d2, t)
            probes = np.concatenate([rng.uniform(0.0, 20.0, 50), [0.0, 1e6]])
            best_probe = max(r_fn(n, d1, d2, t, s) for s in probes)
            assert value >= best_probe - 1e-9
            assert value >= t - 1e-12  # the limit candidate

    def test_argmax_is_a_maximizer(self, rng):
        for _ in range(50):
            n = rng.uniform(0.25, 4.0)
            d1, d2, t = random_F_k_triple(rng, n)
            argmax, value = sup_sigma_z(n, d1, d2, t)
            assert value == pytest.approx(r_fn(n, d1, d2, t, argmax), abs=1e-12)


class TestClassifyFk:
    def test_balanced_point_is_f2(self):
        t = -0.5 * math.log(0.5)
        assert classify_F_k(1.0, 0.5, 0.5, t) is FRegion.F2

    def test_sign_change_point_is_f1(self):
        # alphas (0.4, 1.5, 1.5): g(0) = 2.5 - 4/3 > 0, g(1) < 0.
        t = 0.5 * math.log(7.0 / 2.0)
        assert classify_F_k(1.0, 0.6, 0.6, t) is FRegion.F1

    def test_large_d_sum_is_f3(self):
        # d1 + d2 = 1.8 > 1 + e^{-2t} = 1.5.
        t = -0.5 * math.log(0.5)
        assert 0.9 + 0.9 > 1.0 * (1.0 + 0.5)
        assert classify_F_k(1.0, 0.9, 0.9, t) is FRegion.F3

    def test_outside_box(self):
        assert classify_F_k(1.0, 1.5, 0.5, 1.0) is FRegion.OUTSIDE

    def test_g_sign_at_noise_variance_tracks_d_sum(self, rng):
        # sign(g(n)) == sign(d1 + d2 - n e^{-2t} - n): F3 iff the sum exceeds.
        for _ in range(100):
            n = rng.uniform(0.25, 4.0)
            d1, d2, t = random_F_k_triple(rng, n)
            region = classify_F_k(n, d1, d2, t)
            exceeds = d1 + d2 - n * math.exp(-2.0 * t) - n > 0
            assert (region is FRegion.F3) == exceeds


class TestInP:
    def test_projection_lands_in_p(self, rng):
        for _ in range(25):
            model = random_model(rng)
            targets = random_feasible_targets(rng, model)
            p = sample_F_point(rng, model, targets)
            out = project_to_P(model, targets, p)
            assert in_P(model, targets, out) in (PBranch.P1, PBranch.P2)

    def test_violated_equality_is_rejected(self, rng):
        model = UNIT
        targets = CANONICAL
        p = project_to_P(model, targets, sample_F_point(rng, model, targets))
        bumped = BoundParams(p.d11 * 1.01, p.d12, p.d21, p.d22, p.t1, p.t2)
        assert in_P(model, targets, bumped) is None

    def test_p2_witness(self):
        # Individual equalities with both t pinned to the box floor and a
        # strictly slack central constraint.
        targets = DistortionTriple(0.4, 0.4, 0.385)
        p = BoundParams(0.1, 0.3, 0.4, 0.2, -0.5 * math.log(0.1), -0.5 * math.log(0.2))
        assert in_F(UNIT, targets, p)
        assert in_P(UNIT, targets, p) is PBranch.P2


class TestProjectToP:
    def test_already_critical_is_unchanged(self):
        targets = DistortionTriple(0.4, 0.4, 0.385)
        p = BoundParams(0.1, 0.3, 0.4, 0.2, -0.5 * math.log(0.1), -0.5 * math.log(0.2))
        out = project_to_P(UNIT, targets, p)
        assert out == p

    def test_individual_equalities_exact(self, rng):
        for _ in range(25):
            model = random_model(rng)
            targets = random_feasible_targets(rng, model)
            out = project_to_P(model, targets, sample_F_point(rng, model, targets))
            n1, n2 = model.sigma_n1_2, model.sigma_n2_2
            base = 1.0 / model.sigma_s2 + 1.0 / n1 + 1.0 / n2
            assert base - out.d11 / n1**2 - out.d21 / n2**2 == pytest.approx(
                1.0 / targets.d1, rel=1e-12
            )
            assert base - out.d12 / n1**2 - out.d22 / n2**2 == pytest.approx(
                1.0 / targets.d2, rel=1e-12
            )

    def test_central_slack_resolves_to_equality_or_pinned_floor(self):
        targets = DistortionTriple(0.4, 0.4, 0.385)
        p = BoundParams(0.1, 0.3, 0.4, 0.2, 2.0, 2.0)
        assert in_F(UNIT, targets, p)
        out = project_to_P(UNIT, targets, p)
        central = 1.0 + (1.0 - math.exp(-2 * out.t1)) + (1.0 - math.exp(-2 * out.t2))
        at_equality = central == pytest.approx(1.0 / targets.d0, rel=1e-9)
        pinned = math.exp(-2 * out.t1) == pytest.approx(min(out.d11, out.d12), rel=1e-9) and (
            math.exp(-2 * out.t2) == pytest.approx(min(out.d21, out.d22), rel=1e-9)
        )
        assert at_equality or pinned

    def test_monotone_moves(self, rng):
        for _ in range(25):
            model = random_model(rng)
            targets = random_feasible_targets(rng, model)
            p = sample_F_point(rng, model, targets)
            out = project_to_P(model, targets, p)
            assert out.d11 >= p.d11 and out.d12 >= p.d12
            assert out.d21 >= p.d21 and out.d22 >= p.d22
            assert out.t1 <= p.t1 + 1e-12 and out.t2 <= p.t2 + 1e-12

    def test_idempotent(self, rng):
        for _ in range(10):
            model = random_model(rng)
            targets = random_feasible_targets(rng, model)
            out = project_to_P(model, targets, sample_F_point(rng, model, targets))
            again = project_to_P(model, targets, out)
            for name in ("d11", "d12", "d21", "d22", "t1", "t2"):
                assert getattr(again, name) == pytest.approx(getattr(out, name), rel=1e-9)

    def test_rejects_points_outside_f(self):
        with pytest.raises(DomainError):
            project_to_P(UNIT, CANONICAL, BoundParams(0.9, 0.9, 0.9, 0.9, 0.1, 0.1))


class TestLowerBound:
    def test_canonical_value_matches_optimizer(self):
        lb = lower_bound(UNIT, CANONICAL)
        res = optimize_sum_rate(UNIT, CANONICAL, OptimizeOptions(starts=4, seed=0))
        assert abs(res.breakdown.sum_rate - lb.value) / lb.value <= 1e-3

    def test_loose_central_target_prefers_pinned_branch(self):
        # At the loosest admissible central target the equality manifold
        # degenerates into the pinned one, so the pinned branch carries the
        # minimum; the two infima coincide there, hence the solver-noise slack.
        targets = DistortionTriple(0.4, 0.4, 0.39999)
        lb = lower_bound(UNIT, targets)
        p1, p2 = lb.branch_values[PBranch.P1], lb.branch_values[PBranch.P2]
        assert p2 <= p1 + 1e-6 or math.isinf(p1)

    def test_argmin_is_critical_and_in_reported_branch(self, rng):
        for _ in range(3):
            model = random_model(rng)
            targets = random_condition_targets(rng, model)
            lb = lower_bound(model, targets)
            assert in_P(model, targets, lb.argmin) is lb.branch

    def test_weak_duality_against_random_feasible_schemes(self, rng):
        lb = lower_bound(UNIT, CANONICAL)
        found = 0
        while found < 30:
            params = random_params(rng, UNIT, w_lo=0.01, w_hi=2.0)
            from vceo import central_distortion, receiver_distortion

            if (
                receiver_distortion(UNIT, params, 1) <= CANONICAL.d1
                and receiver_distortion(UNIT, params, 2) <= CANONICAL.d2
                and central_distortion(UNIT, params) <= CANONICAL.d0
            ):
                found += 1
                assert sum_rate(UNIT, params).sum_rate >= lb.value - 1e-9

    def test_deterministic(self):
        a = lower_bound(UNIT, CANONICAL)
        b = lower_bound(UNIT, CANONICAL)
        assert a.value == b.value and a.argmin == b.argmin and a.branch == b.branch

    def test_sigma_z_reported_at_argmin(self):
        lb = lower_bound(UNIT, CANONICAL)
        s1, v1 = sup_sigma_z(UNIT.sigma_n1_2, lb.argmin.d11, lb.argmin.d12, lb.argmin.t1)
        assert lb.sigma_z[0] == s1
        s2, v2 = sup_sigma_z(UNIT.sigma_n2_2, lb.argmin.d21, lb.argmin.d22, lb.argmin.t2)
        const = 0.5 * math.log(UNIT.sigma_s2**2 / (CANONICAL.d1 * CANONICAL.d2))
        assert lb.value == pytest.approx(v1 + v2 + const, abs=1e-12)

    def test_infeasible_targets_raise(self):
        with pytest.raises(InfeasibleTargetsError) as exc:
            lower_bound(UNIT, DistortionTriple(0.5, 0.5, 0.2))
        assert exc.value.constraint == "d0"
        with pytest.raises(InfeasibleTargetsError):
            lower_bound(UNIT, DistortionTriple(0.3, 0.5, 0.25))


class TestCriticalSetStructure:
    def test_pairwise_sum_inequality_and_classification(self, rng):
        # Under the distortion condition every critical point satisfies
        # d_k1 + d_k2 <= n_k (1 + e^{-2 t_k}) and avoids the third region.
        checked = 0
        while checked < 25:
            model = random_model(rng)
            targets = random_condition_targets(rng, model)
            try:
                p = project_to_P(model, targets, sample_F_point(rng, model, targets))
            except RuntimeError:
                continue
            checked += 1
            for k in (1, 2):
                d1, d2, t = p.encoder(k)
                n = model.noise_var(k)
                assert d1 + d2 - n * math.exp(-2.0 * t) - n <= 1e-12
                assert classify_F_k(n, d1, d2, t) in (FRegion.F1, FRegion.F2)
