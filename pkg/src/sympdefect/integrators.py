"""One-step maps built on truncated fixed-point iteration.

The implicit half of a symplectic Euler step is replaced by exactly M
fixed-point sweeps, always initialized at the explicit input value and never
stopped early: the truncated map itself is the object under study, so an
adaptive exit would change the flow being measured.  Two-sided compositions
of half steps give the Stoermer-Verlet variants; the literal single-pass
forms are kept alongside as references.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import linalg
from .hamiltonians import mixed_hessian
from .state import PhaseState


class NonFiniteIterateError(ValueError):
    """A fixed-point iterate or updated state left the finite range."""


class IntegrationError(RuntimeError):
    """A step failed during trajectory integration; carries the step index."""

    def __init__(self, step_index: int, message: str):
        self.step_index = step_index
        super().__init__(f"integration failed at step {step_index}: {message}")


class Scheme(str, Enum):
    P_IMPLICIT = "p-implicit"
    Q_IMPLICIT = "q-implicit"
    SV_PQ = "sv-pq"
    SV_QP = "sv-qp"
    LINEAR_IMPLICIT_EM = "linear-implicit-em"
    EXACT_QUADRATIC = "exact-quadratic"


@dataclass
class SchemeConfig:
    """Scheme selection plus step size and iteration counts.

    M is the sweep count for the one-sided schemes; M1/M2 are the counts of
    the first and second half step of a composition.  `variant` picks the
    implicit side ("p" or "q") of the exact quadratic reference map.
    """

    scheme: Scheme
    h: float
    M: int | None = None
    M1: int | None = None
    M2: int | None = None
    variant: str = "p"

    def __post_init__(self) -> None:
        self.scheme = Scheme(self.scheme)
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"step size must be positive and finite, got {self.h}")
        if self.scheme in (Scheme.P_IMPLICIT, Scheme.Q_IMPLICIT):
            _require_count("M", self.M)
        elif self.scheme in (Scheme.SV_PQ, Scheme.SV_QP):
            _require_count("M1", self.M1)
            _require_count("M2", self.M2)
        elif self.scheme is Scheme.EXACT_QUADRATIC and self.variant not in ("p", "q"):
            raise ValueError(f"variant must be 'p' or 'q', got {self.variant!r}")


def _require_count(name: str, value) -> None:
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise ValueError(f"{name} must be an integer >= 1, got {value!r}")


def _check_step(h: float) -> None:
    if not (math.isfinite(h) and h >= 0):
        raise ValueError(f"step size must be non-negative and finite, got {h}")


def _check_finite(vec: np.ndarray, label: str) -> None:
    # dual-number paths are checked by the jacobian driver instead;
    # a nan/inf component makes the sum non-finite, which is all we need
    if vec.dtype != object and not math.isfinite(vec.sum()):
        raise NonFiniteIterateError(f"non-finite {label}")


def momentum_iterates(model, state: PhaseState, h: float, m: int) -> list[np.ndarray]:
    """All momentum sweeps p_0..p_M of the p-implicit half at (q, p)."""
    _check_step(h)
    _require_count("M", m)
    q, p = state.q, state.p
    iterates = [p]
    pn = p
    for n in range(m):
        pn = p - h * model.grad_q(q, pn)
        _check_finite(pn, f"momentum iterate {n + 1}")
        iterates.append(pn)
    return iterates


def position_iterates(model, state: PhaseState, h: float, m: int) -> list[np.ndarray]:
    """All position sweeps q_0..q_M of the q-implicit half at (q, p)."""
    _check_step(h)
    _require_count("M", m)
    q, p = state.q, state.p
    iterates = [q]
    qn = q
    for n in range(m):
        qn = q + h * model.grad_p(qn, p)
        _check_finite(qn, f"position iterate {n + 1}")
        iterates.append(qn)
    return iterates


def step_p_implicit(model, state: PhaseState, h: float, m: int) -> PhaseState:
    """Symplectic Euler with implicit momentum, M fixed-point sweeps."""
    _check_step(h)
    _require_count("M", m)
    q, p = state.q, state.p
    pn = p
    for n in range(m):
        pn = p - h * model.grad_q(q, pn)
        _check_finite(pn, f"momentum iterate {n + 1}")
    qt = q + h * model.grad_p(q, pn)
    _check_finite(qt, "updated position")
    return PhaseState(qt, pn)


def step_q_implicit(model, state: PhaseState, h: float, m: int) -> PhaseState:
    """Symplectic Euler with implicit position, M fixed-point sweeps."""
    _check_step(h)
    _require_count("M", m)
    q, p = state.q, state.p
    qn = q
    for n in range(m):
        qn = q + h * model.grad_p(qn, p)
        _check_finite(qn, f"position iterate {n + 1}")
    pt = p - h * model.grad_q(qn, p)
    _check_finite(pt, "updated momentum")
    return PhaseState(qn, pt)


def step_sv_pq(model, state: PhaseState, h: float, m1: int, m2: int) -> PhaseState:
    """Stoermer-Verlet as q-implicit(M2) after p-implicit(M1) half steps."""
    half = step_p_implicit(model, state, 0.5 * h, m1)
    return step_q_implicit(model, half, 0.5 * h, m2)


def step_sv_qp(model, state: PhaseState, h: float, m1: int, m2: int) -> PhaseState:
    """Stoermer-Verlet as p-implicit(M2) after q-implicit(M1) half steps."""
    half = step_q_implicit(model, state, 0.5 * h, m1)
    return step_p_implicit(model, half, 0.5 * h, m2)


def step_sv_pq_direct(model, state: PhaseState, h: float, m1: int, m2: int) -> PhaseState:
    """Literal single-pass form of :func:`step_sv_pq`.

    Agrees with the composition exactly up to floating-point association;
    kept as an independent reference.
    """
    _check_step(h)
    _require_count("M1", m1)
    _require_count("M2", m2)
    q, p = state.q, state.p
    hh = 0.5 * h
    pbar = p
    for n in range(m1):
        pbar = p - hh * model.grad_q(q, pbar)
        _check_finite(pbar, f"momentum iterate {n + 1}")
    gp0 = model.grad_p(q, pbar)
    qn = q + hh * gp0
    for n in range(m2):
        qn = q + hh * (gp0 + model.grad_p(qn, pbar))
        _check_finite(qn, f"position iterate {n + 1}")
    pt = pbar - hh * model.grad_q(qn, pbar)
    _check_finite(pt, "updated momentum")
    return PhaseState(qn, pt)


def step_sv_qp_direct(model, state: PhaseState, h: float, m1: int, m2: int) -> PhaseState:
    """Literal single-pass form of :func:`step_sv_qp`."""
    _check_step(h)
    _require_count("M1", m1)
    _require_count("M2", m2)
    q, p = state.q, state.p
    hh = 0.5 * h
    qbar = q
    for n in range(m1):
        qbar = q + hh * model.grad_p(qbar, p)
        _check_finite(qbar, f"position iterate {n + 1}")
    gq0 = model.grad_q(qbar, p)
    pn = p - hh * gq0
    for n in range(m2):
        pn = p - hh * (gq0 + model.grad_q(qbar, pn))
        _check_finite(pn, f"momentum iterate {n + 1}")
    qt = qbar + hh * model.grad_p(qbar, pn)
    _check_finite(qt, "updated position")
    return PhaseState(qt, pn)


def step_linear_implicit_em(model, state: PhaseState, h: float) -> PhaseState:
    """Linearly implicit Euler for minimally coupled H = |p - A(q)|^2 / 2.

    The momentum update solves the N x N system
    (I - h dA/dq(q))^T p~ = p - h (dA/dq(q))^T A(q), then
    q~ = q + h (p~ - A(q)).  Requires a model exposing the vector potential
    and its Jacobian.
    """
    _check_step(h)
    if not hasattr(model, "potential_and_jacobian"):
        raise TypeError("model does not expose a vector potential with Jacobian")
    q, p = state.q, state.p
    pot, jac = model.potential_and_jacobian(q)
    lhs = np.eye(model.dim) - h * jac.T
    rhs = p - h * (jac.T @ pot)
    if lhs.dtype != object and rhs.dtype != object:
        try:
            pt = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            pt = linalg.lu_solve(lhs, rhs)
    else:
        pt = linalg.lu_solve(lhs, rhs)
    _check_finite(pt, "updated momentum")
    qt = q + h * (pt - pot)
    _check_finite(qt, "updated position")
    return PhaseState(qt, pt)


def exact_se_quadratic(state: PhaseState, h: float, variant: str = "p") -> PhaseState:
    """Exactly solved symplectic Euler step for :class:`QuadraticModel`.

    The implicit relation is linear there, so one LU solve replaces the
    fixed-point sweeps; this is the M -> infinity reference map.
    """
    _check_step(h)
    if variant not in ("p", "q"):
        raise ValueError(f"variant must be 'p' or 'q', got {variant!r}")
    n = state.dim
    coupling = mixed_hessian(n)
    q, p = state.q, state.p
    eye = np.eye(n)
    if variant == "p":
        pt = linalg.lu_solve(eye + h * coupling, p - h * q)
        qt = q + h * (pt + coupling.T @ q)
    else:
        qt = linalg.lu_solve(eye - h * coupling.T, q + h * p)
        pt = p - h * (qt + coupling @ p)
    _check_finite(np.asarray(pt), "updated momentum")
    _check_finite(np.asarray(qt), "updated position")
    return PhaseState(qt, pt)


def one_step(model, config: SchemeConfig, state: PhaseState) -> PhaseState:
    """Apply the configured scheme once."""
    s = config.scheme
    if s is Scheme.P_IMPLICIT:
        return step_p_implicit(model, state, config.h, config.M)
    if s is Scheme.Q_IMPLICIT:
        return step_q_implicit(model, state, config.h, config.M)
    if s is Scheme.SV_PQ:
        return step_sv_pq(model, state, config.h, config.M1, config.M2)
    if s is Scheme.SV_QP:
        return step_sv_qp(model, state, config.h, config.M1, config.M2)
    if s is Scheme.LINEAR_IMPLICIT_EM:
        return step_linear_implicit_em(model, state, config.h)
    if s is Scheme.EXACT_QUADRATIC:
        return exact_se_quadratic(state, config.h, config.variant)
    raise ValueError(f"unknown scheme {s!r}")


@dataclass
class Trajectory:
    """Sampled orbit: states are rows (q_1..q_N, p_1..p_N)."""

    step_indices: np.ndarray
    times: np.ndarray
    states: np.ndarray
    energies: np.ndarray | None
    config: SchemeConfig

    @property
    def dim(self) -> int:
        return self.states.shape[1] // 2

    def state_at(self, i: int) -> PhaseState:
        return PhaseState.from_vector(self.states[i])


def integrate(
    model,
    config: SchemeConfig,
    state: PhaseState,
    steps: int,
    stride: int = 1,
    record_energy: bool = True,
) -> Trajectory:
    """Iterate the one-step map, sampling every `stride` steps.

    Step 0 and the final step are always sampled.  A non-finite state or a
    failed solve aborts with the offending step index.
    """
    if not isinstance(steps, (int, np.integer)) or steps < 0:
        raise ValueError(f"steps must be a non-negative integer, got {steps!r}")
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise ValueError(f"stride must be an integer >= 1, got {stride!r}")
    indices = []
    rows = []
    energies = [] if record_energy else None

    def sample(k: int, st: PhaseState) -> None:
        indices.append(k)
        rows.append(st.to_vector().astype(float))
        if energies is not None:
            energies.append(model.energy(st))

    current = state
    sample(0, current)
    for k in range(1, steps + 1):
        try:
            current = one_step(model, config, current)
        except (ValueError, ArithmeticError) as exc:
            raise IntegrationError(k, str(exc)) from exc
        if k % stride == 0 or k == steps:
            sample(k, current)
    idx = np.array(indices, dtype=int)
    return Trajectory(
        step_indices=idx,
        times=config.h * idx,
        states=np.array(rows),
        energies=None if energies is None else np.array(energies),
        config=config,
    )
