import numpy as np
import pytest

from sympdefect.hamiltonians import quadratic_model
from sympdefect.integrators import (
    IntegrationError,
    Scheme,
    SchemeConfig,
    exact_se_quadratic,
    integrate,
    momentum_iterates,
    one_step,
    position_iterates,
    step_linear_implicit_em,
    step_p_implicit,
    step_q_implicit,
    step_sv_pq,
    step_sv_pq_direct,
    step_sv_qp,
    step_sv_qp_direct,
)
from sympdefect.state import PhaseState


class ZeroField:
    """Minimal potential-bearing model with A = 0 everywhere."""

    dim = 2

    def potential_and_jacobian(self, q, with_jacobian=True):
        return np.zeros(2), np.zeros((2, 2))


def test_config_requires_m_for_one_sided_schemes():
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.P_IMPLICIT, 0.1)
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.Q_IMPLICIT, 0.1, M=0)
    SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=1)


def test_config_requires_both_half_counts_for_compositions():
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.SV_PQ, 0.1, M1=1)
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.SV_QP, 0.1, M2=2)
    SchemeConfig(Scheme.SV_QP, 0.1, M1=2, M2=1)


def test_config_rejects_bad_step_and_variant():
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.P_IMPLICIT, 0.0, M=1)
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.P_IMPLICIT, -0.1, M=1)
    with pytest.raises(ValueError):
        SchemeConfig(Scheme.EXACT_QUADRATIC, 0.1, variant="x")


def test_config_accepts_scheme_names():
    cfg = SchemeConfig("q-implicit", 0.1, M=2)
    assert cfg.scheme is Scheme.Q_IMPLICIT


def test_zero_step_is_identity(quad3, quad3_state):
    z0 = quad3_state.to_vector()
    for step in (
        lambda: step_p_implicit(quad3, quad3_state, 0.0, 2),
        lambda: step_q_implicit(quad3, quad3_state, 0.0, 2),
        lambda: step_sv_pq(quad3, quad3_state, 0.0, 1, 2),
        lambda: step_sv_qp(quad3, quad3_state, 0.0, 1, 2),
        lambda: step_sv_pq_direct(quad3, quad3_state, 0.0, 1, 2),
        lambda: step_sv_qp_direct(quad3, quad3_state, 0.0, 1, 2),
        lambda: exact_se_quadratic(quad3_state, 0.0, "p"),
        lambda: exact_se_quadratic(quad3_state, 0.0, "q"),
    ):
        assert np.array_equal(step().to_vector(), z0)


def test_zero_step_identity_for_linear_implicit(tokamak, tokamak_state):
    out = step_linear_implicit_em(tokamak, tokamak_state, 0.0)
    assert np.array_equal(out.to_vector(), tokamak_state.to_vector())


def test_steps_reject_negative_step_size(quad3, quad3_state):
    with pytest.raises(ValueError):
        step_p_implicit(quad3, quad3_state, -0.1, 1)


def test_sweep_count_is_irrelevant_when_gradient_is_explicit(oscillator, oscillator_state):
    # grad_q of the oscillator ignores p, so every sweep reproduces sweep one
    outs = [
        step_p_implicit(oscillator, oscillator_state, 0.1, m).to_vector()
        for m in (1, 2, 3, 4)
    ]
    for other in outs[1:]:
        assert np.array_equal(outs[0], other)


def test_oscillator_step_closed_form(oscillator, oscillator_state):
    h = 0.1
    q, p = oscillator_state.q[0], oscillator_state.p[0]
    out = step_p_implicit(oscillator, oscillator_state, h, 1)
    pt = p - h * q
    np.testing.assert_allclose(out.p, [pt], rtol=1e-15)
    np.testing.assert_allclose(out.q, [q + h * pt], rtol=1e-15)


def test_oscillator_composition_is_kick_drift_kick(oscillator, oscillator_state):
    h = 0.1
    q, p = oscillator_state.q, oscillator_state.p
    pbar = p - 0.5 * h * q
    q1 = q + 0.5 * h * pbar
    qt = q1 + 0.5 * h * pbar
    pt = pbar - 0.5 * h * qt
    out = step_sv_pq(oscillator, oscillator_state, h, 1, 1)
    assert np.array_equal(out.q, qt)
    assert np.array_equal(out.p, pt)


def test_quadratic_single_sweep_frozen_step():
    model = quadratic_model(2)
    state = PhaseState(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    out = step_p_implicit(model, state, 0.1, 1)
    np.testing.assert_allclose(out.q, [1.01, -0.1], rtol=1e-14)
    np.testing.assert_allclose(out.p, [0.1, 1.0], rtol=1e-14)


def test_iterate_lists_start_at_input(quad3, quad3_state):
    its = momentum_iterates(quad3, quad3_state, 0.1, 3)
    assert len(its) == 4
    assert its[0] is quad3_state.p
    qits = position_iterates(quad3, quad3_state, 0.1, 3)
    assert len(qits) == 4
    assert qits[0] is quad3_state.q
    # the final sweep is the momentum the full step commits
    out = step_p_implicit(quad3, quad3_state, 0.1, 3)
    assert np.array_equal(out.p, its[3])


def test_iterate_cascade_gains_one_order_per_sweep(tokamak, tokamak_state):
    # distance between consecutive sweeps shrinks like h^n
    hs = np.geomspace(0.02, 0.2, 8)
    for n in (1, 2, 3):
        ds = []
        for h in hs:
            its = momentum_iterates(tokamak, tokamak_state, float(h), 3)
            ds.append(np.linalg.norm(its[n] - its[n - 1]))
        slope = np.polyfit(np.log(hs), np.log(ds), 1)[0]
        assert abs(slope - n) < 0.2


def test_tokamak_q_implicit_matches_literal_field_update(tokamak, tokamak_state):
    # the scheme written directly in terms of A and its Jacobian:
    # M position sweeps, then p + h J_A(q~)^T (p - A(q~))
    h, m = 0.1, 3
    q, p = tokamak_state.q, tokamak_state.p
    qn = q
    for _ in range(m):
        qn = q + h * (p - tokamak.vector_potential(qn))
    pot, jac = tokamak.potential_and_jacobian(qn)
    pt = p + h * (jac.T @ (p - pot))
    out = step_q_implicit(tokamak, tokamak_state, h, m)
    assert np.array_equal(out.q, qn)
    assert np.array_equal(out.p, pt)


@pytest.mark.parametrize("m1,m2", [(1, 3), (2, 2)])
def test_direct_composition_forms_agree(tokamak, tokamak_state, m1, m2):
    h = 0.1
    a = step_sv_pq(tokamak, tokamak_state, h, m1, m2).to_vector()
    b = step_sv_pq_direct(tokamak, tokamak_state, h, m1, m2).to_vector()
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)
    c = step_sv_qp(tokamak, tokamak_state, h, m1, m2).to_vector()
    d = step_sv_qp_direct(tokamak, tokamak_state, h, m1, m2).to_vector()
    np.testing.assert_allclose(c, d, rtol=0, atol=1e-15)


def test_linear_implicit_on_zero_field_is_free_motion():
    state = PhaseState(np.array([1.0, 2.0]), np.array([0.5, -0.5]))
    out = step_linear_implicit_em(ZeroField(), state, 0.2)
    np.testing.assert_allclose(out.p, state.p, rtol=1e-15)
    np.testing.assert_allclose(out.q, state.q + 0.2 * state.p, rtol=1e-15)


def test_linear_implicit_requires_potential(quad3, quad3_state):
    with pytest.raises(TypeError):
        step_linear_implicit_em(quad3, quad3_state, 0.1)


def test_linear_implicit_is_fully_converged_momentum_solve(tokamak, tokamak_state):
    # the scheme solves the linear implicit relation exactly, so many
    # fixed-point sweeps of the p-implicit step must converge to it
    em = step_linear_implicit_em(tokamak, tokamak_state, 0.1).to_vector()
    fpi = step_p_implicit(tokamak, tokamak_state, 0.1, 30).to_vector()
    np.testing.assert_allclose(em, fpi, rtol=0, atol=1e-12)


def test_exact_quadratic_variants_satisfy_their_implicit_relations(quad3, quad3_state):
    h = 0.1
    q, p = quad3_state.q, quad3_state.p
    out_p = exact_se_quadratic(quad3_state, h, "p")
    np.testing.assert_allclose(
        out_p.p, p - h * quad3.grad_q(q, out_p.p), rtol=1e-13
    )
    np.testing.assert_allclose(
        out_p.q, q + h * quad3.grad_p(q, out_p.p), rtol=1e-13
    )
    out_q = exact_se_quadratic(quad3_state, h, "q")
    np.testing.assert_allclose(
        out_q.q, q + h * quad3.grad_p(out_q.q, p), rtol=1e-13
    )
    np.testing.assert_allclose(
        out_q.p, p - h * quad3.grad_q(out_q.q, p), rtol=1e-13
    )


def test_exact_quadratic_rejects_bad_variant(quad3_state):
    with pytest.raises(ValueError):
        exact_se_quadratic(quad3_state, 0.1, "pq")


def test_sweeps_converge_to_exact_map_at_one_order_per_sweep(quad3, quad3_state):
    hs = np.geomspace(0.02, 0.2, 8)
    for m in (1, 2, 3):
        ds = []
        for h in hs:
            a = step_p_implicit(quad3, quad3_state, float(h), m).to_vector()
            b = exact_se_quadratic(quad3_state, float(h), "p").to_vector()
            ds.append(np.linalg.norm(a - b))
        slope = np.polyfit(np.log(hs), np.log(ds), 1)[0]
        assert abs(slope - (m + 1)) < 0.3


def test_one_step_dispatches_every_scheme(quad3, quad3_state, tokamak, tokamak_state):
    pairs = [
        (SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=2), quad3, quad3_state),
        (SchemeConfig(Scheme.Q_IMPLICIT, 0.1, M=2), quad3, quad3_state),
        (SchemeConfig(Scheme.SV_PQ, 0.1, M1=1, M2=2), quad3, quad3_state),
        (SchemeConfig(Scheme.SV_QP, 0.1, M1=1, M2=2), quad3, quad3_state),
        (SchemeConfig(Scheme.LINEAR_IMPLICIT_EM, 0.1), tokamak, tokamak_state),
        (SchemeConfig(Scheme.EXACT_QUADRATIC, 0.1, variant="q"), quad3, quad3_state),
    ]
    for config, model, state in pairs:
        out = one_step(model, config, state)
        assert out.dim == state.dim
        assert np.all(np.isfinite(out.to_vector().astype(float)))


def test_integrate_single_step_equals_step_function(quad3, quad3_state):
    config = SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=2)
    traj = integrate(quad3, config, quad3_state, steps=1)
    direct = step_p_implicit(quad3, quad3_state, 0.1, 2)
    assert np.array_equal(traj.states[1], direct.to_vector())
    assert traj.state_at(0).dim == 3


def test_integrate_sampling_pattern(quad3, quad3_state):
    config = SchemeConfig(Scheme.P_IMPLICIT, 0.05, M=1)
    traj = integrate(quad3, config, quad3_state, steps=10, stride=4)
    assert traj.step_indices.tolist() == [0, 4, 8, 10]
    np.testing.assert_allclose(traj.times, 0.05 * traj.step_indices, rtol=1e-15)
    assert traj.states.shape == (4, 6)
    assert traj.energies.shape == (4,)


def test_integrate_zero_steps(quad3, quad3_state):
    traj = integrate(quad3, SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=1), quad3_state, steps=0)
    assert traj.step_indices.tolist() == [0]
    assert np.array_equal(traj.states[0], quad3_state.to_vector())


def test_integrate_validation(quad3, quad3_state):
    config = SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=1)
    with pytest.raises(ValueError):
        integrate(quad3, config, quad3_state, steps=-1)
    with pytest.raises(ValueError):
        integrate(quad3, config, quad3_state, steps=2, stride=0)
    with pytest.raises(ValueError):
        integrate(quad3, config, quad3_state, steps=2.5)


def test_integrate_can_skip_energy(quad3, quad3_state):
    config = SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=1)
    traj = integrate(quad3, config, quad3_state, steps=3, record_energy=False)
    assert traj.energies is None


def test_integrate_reports_failing_step(tokamak, tokamak_state):
    config = SchemeConfig(Scheme.Q_IMPLICIT, 1e3, M=2)
    with pytest.raises(IntegrationError) as err:
        integrate(tokamak, config, tokamak_state, steps=50, record_energy=False)
    assert err.value.step_index == 3


def test_leapfrog_energy_error_stays_bounded(oscillator, oscillator_state):
    config = SchemeConfig(Scheme.SV_PQ, 0.1, M1=1, M2=1)
    traj = integrate(oscillator, config, oscillator_state, steps=10_000, stride=10)
    err = np.abs(traj.energies - traj.energies[0])
    assert err.max() <= 1e-3
    half = err.size // 2
    assert err[half:].max() <= 1.001 * err[:half].max()


def test_tokamak_orbit_stays_in_containment_box(tokamak, tokamak_state):
    config = SchemeConfig(Scheme.Q_IMPLICIT, 0.1, M=3)
    traj = integrate(tokamak, config, tokamak_state, steps=5000, stride=10)
    rho = np.hypot(traj.states[:, 0], traj.states[:, 1])
    z = traj.states[:, 2]
    assert 0.12 <= rho.min() and rho.max() <= 0.30
    assert np.max(np.abs(z)) <= 0.1
    err = np.abs(traj.energies - traj.energies[0])
    assert err.max() <= 1e-5
