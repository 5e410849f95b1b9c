"""G/U matrices, critical tilts, drifts and the recurrence verdict."""

import numpy as np
import pytest

from qbd2d import (
    GNonConvergenceError,
    Region,
    StabilityError,
    StabilityVerdict,
    build_block_process,
    build_limited_service,
    classify_stability,
    compute_U,
    coordinate_profile,
    eta_curves,
    gen_col,
    mean_drifts,
    perron_root,
    solve_G,
    solve_R,
    stability,
    theta_dagger_coordinate,
    theta_extremes,
    theta_star,
)

from conftest import DRIFTED_INTERIOR, drifted_scalar_walk, reflected_scalar_model, scalar_model


class TestSolveG:
    def test_scalar_recurrent_case(self):
        # 0.3 g^2 - 0.8 g + 0.5 = 0 has roots {1, 5/3}; minimal is 1
        g = solve_G(np.array([[0.5]]), np.array([[0.2]]), np.array([[0.3]]))
        assert g[0, 0] == pytest.approx(1.0, abs=5e-12)

    def test_scalar_transient_case(self):
        # 0.5 g^2 - 0.8 g + 0.3 = 0 has roots {0.6, 1}; minimal is 0.6
        g = solve_G(np.array([[0.3]]), np.array([[0.2]]), np.array([[0.5]]))
        assert g[0, 0] == pytest.approx(0.6, abs=1e-12)

    def test_linear_case_matches_resolvent(self):
        rng = np.random.default_rng(5)
        a_minus = rng.random((4, 4)) * 0.1
        a_zero = rng.random((4, 4)) * 0.1
        g = solve_G(a_minus, a_zero, np.zeros((4, 4)))
        expected = np.linalg.solve(np.eye(4) - a_zero, a_minus)
        assert np.abs(g - expected).max() < 1e-12

    def test_equation_residual(self, symmetric_k10):
        z = np.exp(0.2)
        a_minus, a_zero, a_plus = (
            gen_col(symmetric_k10, Region.INTERIOR, i, z) for i in (-1, 0, 1)
        )
        g = solve_G(a_minus, a_zero, a_plus)
        residual = np.abs(a_minus + a_zero @ g + a_plus @ (g @ g) - g).max()
        assert residual <= 1e-13

    def test_iterates_increase_monotonically(self, symmetric_k1):
        z = np.exp(0.1)
        a_minus, a_zero, a_plus = (
            gen_col(symmetric_k1, Region.INTERIOR, i, z) for i in (-1, 0, 1)
        )
        x = np.zeros_like(a_minus)
        for _ in range(40):
            x_next = a_minus + a_zero @ x + a_plus @ (x @ x)
            assert (x_next - x).min() >= -1e-15
            x = x_next

    def test_scalar_minimality(self):
        # iterate limit never exceeds the smaller root
        g = solve_G(np.array([[0.3]]), np.array([[0.2]]), np.array([[0.5]]))
        assert g[0, 0] <= 0.6 + 1e-12

    def test_iteration_cap_raises(self):
        # supercritical scalar problem: no nonnegative solution below one
        with pytest.raises(GNonConvergenceError):
            solve_G(
                np.array([[0.9]]), np.array([[0.5]]), np.array([[0.4]]), max_iter=5000
            )

    def test_root_matches_lower_branch(self, symmetric_k1):
        curves = eta_curves(symmetric_k1)
        for theta in (-0.1, 0.0, 0.2, 0.45):
            z = np.exp(theta)
            a_minus, a_zero, a_plus = (
                gen_col(symmetric_k1, Region.INTERIOR, i, z) for i in (-1, 0, 1)
            )
            g = solve_G(a_minus, a_zero, a_plus)
            assert perron_root(g) == pytest.approx(
                np.exp(curves.eta2_lower(theta)), abs=1e-8
            )


class TestSolveR:
    def test_scalar_rate_matrix(self):
        # r = 0.2 + 0.3 r + 0.5 r^2 has minimal root 0.4... compare numerically
        r = solve_R(np.array([[0.2]]), np.array([[0.3]]), np.array([[0.5]]))
        roots = np.roots([0.5, 0.3 - 1.0, 0.2])
        assert r[0, 0] == pytest.approx(min(roots), abs=1e-12)


class TestComputeU:
    def test_subcritical_at_small_positive_tilt(self, symmetric_k1):
        for axis in (1, 2):
            u = compute_U(symmetric_k1, axis, 0.05)
            assert perron_root(u) < 1.0

    def test_zero_tilt_root_not_above_one(self, symmetric_k5):
        # At the zero tilt the censored root sits at one when the
        # complementary free walk is recurrent, strictly below otherwise.
        u1 = compute_U(symmetric_k5, 1, 0.0)
        u2 = compute_U(symmetric_k5, 2, 0.0)
        assert perron_root(u1) <= 1.0 + 1e-12
        assert perron_root(u2) < 1.0

    def test_scalar_hand_computation(self):
        model = drifted_scalar_walk()
        interior = DRIFTED_INTERIOR
        theta = 0.15
        z = np.exp(theta)
        quad = [
            sum(interior[(i1, i2)] * z**i1 for i1 in (-1, 0, 1))
            for i2 in (-1, 0, 1)
        ]
        roots = np.roots([quad[2], quad[1] - 1.0, quad[0]])
        g_hand = min(r.real for r in roots if abs(r.imag) < 1e-12 and r.real >= 0)

        def boundary(i1, i2):
            return model.block(Region.X_BOUNDARY, i1, i2)[0, 0]

        u_hand = (
            sum(boundary(i1, 0) * z**i1 for i1 in (-1, 0, 1))
            + sum(boundary(i1, 1) * z**i1 for i1 in (-1, 0, 1)) * g_hand
        )
        u = compute_U(model, 1, theta)
        assert u[0, 0] == pytest.approx(u_hand, abs=1e-11)


class TestThetaStar:
    def test_symmetric_k1(self, symmetric_k1):
        assert theta_star(symmetric_k1, 1) == pytest.approx(0.677, abs=0.005)

    def test_symmetric_k5_axis1(self, symmetric_k5):
        assert theta_star(symmetric_k5, 1) == pytest.approx(0.511, abs=0.005)

    def test_symmetric_k10_strict_gap(self, symmetric_k10):
        t1max = theta_extremes(symmetric_k10)[1]
        star = theta_star(symmetric_k10, 1)
        assert star == pytest.approx(0.511, abs=0.005)
        assert t1max == pytest.approx(0.513, abs=0.005)
        assert star < t1max - 1e-4

    def test_asymmetric_k1_axis2(self, asymmetric_k1):
        assert theta_star(asymmetric_k1, 2) == pytest.approx(0.110, abs=0.005)

    @pytest.mark.parametrize("axis,b", [(1, (2, 1)), (2, (1, 2)), (1, (2, 3))])
    def test_block_scaling(self, symmetric_k1, axis, b):
        derived = build_block_process(symmetric_k1, b)
        base = theta_star(symmetric_k1, axis)
        scale = b[0] if axis == 1 else b[1]
        assert theta_star(derived, axis) == pytest.approx(scale * base, abs=1e-6)


class TestThetaDagger:
    def test_unbinding_constraint_returns_axis_max(self, symmetric_k1):
        t1max = theta_extremes(symmetric_k1)[1]
        assert theta_dagger_coordinate(symmetric_k1, 1) == pytest.approx(t1max, abs=1e-9)

    def test_scalar_grid_oracle(self):
        model = drifted_scalar_walk()
        interior = DRIFTED_INTERIOR
        t2_star = theta_star(model, 2)
        t1min, t1max, _, _ = theta_extremes(model)
        dagger = theta_dagger_coordinate(model, 1, star_other=t2_star)
        # Dense-grid oracle: largest t1 whose lower curve branch stays
        # under theta2*, evaluated on a vectorized (t1, t2) lattice.
        t1_grid = np.linspace(t1min + 1e-9, t1max - 1e-9, 6000)
        t2_grid = np.linspace(-4.0, 4.0, 3000)
        total = np.zeros((t1_grid.size, t2_grid.size))
        for (i1, i2), p in interior.items():
            total += p * np.exp(i1 * t1_grid)[:, None] * np.exp(i2 * t2_grid)[None, :]
        inside = total <= 1.0
        lower_branch = np.where(
            inside.any(axis=1),
            t2_grid[np.argmax(inside, axis=1)],
            np.inf,
        )
        feasible = t1_grid[lower_branch <= t2_star]
        assert dagger == pytest.approx(feasible.max(), abs=2e-3)

    def test_block_scaling_of_binding_dagger(self):
        from conftest import random_stable_model
        from qbd2d import build_block_process as block

        model = random_stable_model(12)  # curve constraint genuinely binds
        star2 = theta_star(model, 2)
        base = theta_dagger_coordinate(model, 1, star_other=star2)
        assert base < theta_extremes(model)[1] - 1e-4
        derived = block(model, (2, 1))
        scaled = theta_dagger_coordinate(derived, 1, star_other=theta_star(derived, 2))
        assert scaled == pytest.approx(2.0 * base, abs=1e-6)

    def test_binding_constraint_strictly_inside(self, asymmetric_k1):
        # theta2* = 0.110 cuts the level set well below its top, so the
        # second-axis constraint binds the first-axis curve-constrained tilt.
        t2s = theta_star(asymmetric_k1, 2)
        curves = eta_curves(asymmetric_k1)
        dagger2 = theta_dagger_coordinate(asymmetric_k1, 2, star_other=theta_star(asymmetric_k1, 1))
        t2max = theta_extremes(asymmetric_k1)[3]
        assert t2s < t2max - 0.05
        assert dagger2 == pytest.approx(t2max, abs=1e-9)
        assert curves.eta2_lower(theta_dagger_coordinate(asymmetric_k1, 1, star_other=t2s)) <= t2s + 1e-8


def simulate_half_free_drift(model, axis, steps, seed):
    """Independent drift oracle: simulate the half-free walk directly.

    Tracks the reflected coordinate and phase, accumulates the free
    coordinate's increments, and returns their average.
    """
    rng = np.random.default_rng(seed)
    s0 = model.s0
    boundary = Region.X_BOUNDARY if axis == 1 else Region.Y_BOUNDARY
    tables = {}
    for region in (Region.INTERIOR, boundary):
        for j in range(s0):
            moves = []
            probs = []
            for (i1, i2) in region.admissible_steps:
                block = model.blocks.get((region, (i1, i2)))
                if block is None:
                    continue
                for jp in range(s0):
                    p = block[j, jp]
                    if p > 0:
                        moves.append((i1, i2, jp))
                        probs.append(p)
            tables[(region, j)] = (np.cumsum(probs), moves)
    level, phase = 1, 0
    total = 0
    draws = rng.random(steps)
    for u in draws:
        region = boundary if level == 0 else Region.INTERIOR
        cum, moves = tables[(region, phase)]
        idx = int(np.searchsorted(cum, u * cum[-1]))
        i1, i2, phase = moves[idx]
        if axis == 1:
            total += i1
            level += i2
        else:
            total += i2
            level += i1
    return total / steps


class TestMeanDrifts:
    def test_symmetric_model_has_equal_drifts(self, symmetric_k1):
        a1, a2, a12 = mean_drifts(symmetric_k1)
        assert a1 == pytest.approx(a2, abs=1e-9)
        assert a12[0] == pytest.approx(a12[1], abs=1e-12)
        assert a1 < 0 and a2 < 0

    def test_table_models_negative_half_free_drifts(self, symmetric_k1, asymmetric_k1):
        # When a half-free background escapes upward, the long-run drift
        # limit of the free coordinate equals its free-walk component.
        for model in (symmetric_k1, asymmetric_k1):
            a1, a2, a12 = mean_drifts(model)
            effective_a1 = a1 if a1 is not None else a12[0]
            effective_a2 = a2 if a2 is not None else a12[1]
            assert effective_a1 < 0
            assert effective_a2 < 0

    @pytest.mark.parametrize("axis", [1, 2])
    def test_against_simulation(self, symmetric_k1, axis):
        a1, a2, _ = mean_drifts(symmetric_k1)
        analytic = a1 if axis == 1 else a2
        simulated = simulate_half_free_drift(symmetric_k1, axis, 150_000, seed=42 + axis)
        assert simulated == pytest.approx(analytic, abs=0.02)

    def test_product_chain_interior_drift_factorizes(self):
        from test_model import scalar_model as sm

        px = {-1: 0.35, 0: 0.4, 1: 0.25}
        py = {-1: 0.4, 0: 0.35, 1: 0.25}
        interior = {(i, j): px[i] * py[j] for i in (-1, 0, 1) for j in (-1, 0, 1)}
        rx = {0: px[-1] + px[0], 1: px[1]}
        ry = {0: py[-1] + py[0], 1: py[1]}
        x_boundary = {(i, j): px[i] * ry[j] for i in (-1, 0, 1) for j in (0, 1)}
        y_boundary = {(i, j): rx[i] * py[j] for i in (0, 1) for j in (-1, 0, 1)}
        origin = {(i, j): rx[i] * ry[j] for i in (0, 1) for j in (0, 1)}
        model = sm(interior, x_boundary, y_boundary, origin)
        _, _, a12 = mean_drifts(model)
        assert a12[0] == pytest.approx(px[1] - px[-1], abs=1e-12)
        assert a12[1] == pytest.approx(py[1] - py[-1], abs=1e-12)

    def test_transient_model_reports_unavailable(self):
        model = build_limited_service((1.0, 1.0, 0.3, 0.3, 1))
        a1, a2, a12 = mean_drifts(model)
        assert a12[0] > 0 and a12[1] > 0
        assert a1 is None and a2 is None


class TestStability:
    def test_verdict_cases_from_drifts(self):
        pr = StabilityVerdict.POSITIVE_RECURRENT
        tr = StabilityVerdict.TRANSIENT
        ind = StabilityVerdict.INDETERMINATE
        assert classify_stability(-0.05, -0.07, (-0.1, -0.2)) is pr
        assert classify_stability(None, None, (0.1, 0.1)) is tr
        assert classify_stability(0.0, -0.1, (-0.1, -0.1)) is ind
        assert classify_stability(-0.1, 0.2, (-0.1, -0.1)) is tr
        assert classify_stability(-0.1, None, (0.05, -0.1)) is pr
        assert classify_stability(None, -0.1, (-0.1, 0.05)) is pr
        assert classify_stability(None, None, (0.0, 0.1)) is tr
        assert classify_stability(None, None, (0.0, 0.0)) is ind

    def test_table_models_positive_recurrent(self, symmetric_k5, asymmetric_k10):
        assert stability(symmetric_k5) is StabilityVerdict.POSITIVE_RECURRENT
        assert stability(asymmetric_k10) is StabilityVerdict.POSITIVE_RECURRENT

    def test_inverted_load_transient(self):
        assert stability(build_limited_service((1.0, 1.0, 0.3, 0.3, 1))) is (
            StabilityVerdict.TRANSIENT
        )
        assert stability(build_limited_service((1.2, 1.0, 0.24, 0.7, 1))) is (
            StabilityVerdict.TRANSIENT
        )

    def test_decay_analysis_refuses_transient_model(self):
        from qbd2d import xi_c

        model = build_limited_service((1.0, 1.0, 0.3, 0.3, 1))
        with pytest.raises(StabilityError):
            xi_c(model, (1, 1))


class TestCoordinateProfile:
    def test_profile_consistency(self, asymmetric_k1):
        profile = coordinate_profile(asymmetric_k1)
        assert profile.xi_10 == min(profile.theta1_star, profile.theta1_dagger)
        assert profile.xi_01 == min(profile.theta2_star, profile.theta2_dagger)
        assert profile.stability is StabilityVerdict.POSITIVE_RECURRENT
        assert 0.0 <= profile.theta1_star <= theta_extremes(asymmetric_k1)[1] + 1e-12
        assert perron_root(profile.G1) <= 1.0 + 1e-12
