"""Hamiltonian models: separable test systems and a guiding-field tokamak.

The tokamak model describes a charged particle in a static magnetic field
with helical field lines around a circular magnetic axis of radius R.  In
Cartesian coordinates the vector potential is

    A_x = -B0 F(r) y / rho^2,   A_y = B0 F(r) x / rho^2,
    A_z = -B0 R log(rho / R),

with rho^2 = x^2 + y^2 the squared distance from the torus axis, r the
distance from the magnetic axis circle, and F(r) the antiderivative of the
field profile f(r) = r (1 + r^2) / (R (1 + a r)).  After nondimensionalizing
with the gyration scales (L0, T0, P0) the Hamiltonian is the minimally
coupled kinetic energy H = |p - A(q)|^2 / 2.

All model callables accept float arrays or object arrays of dual numbers,
so flows built on them can be differentiated by forward-mode AD unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import CustomPrimitive, jacobian, log, sqrt, value_of
from .state import PhaseState

# Fixed-order Gauss-Legendre rule for the field-profile integral F; order 32
# leaves the relative quadrature error far below round-off for r up to ~R.
GAUSS_ORDER = 32
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)
_NODES_PLUS_1 = _NODES + 1.0
_QUAD_SCRATCH = np.empty(GAUSS_ORDER)
_QUAD_SCRATCH2 = np.empty(GAUSS_ORDER)

# Positions closer to the torus axis than this fraction of R are rejected
# because the potential has a genuine singularity at rho = 0.
AXIS_TOLERANCE = 1e-9


class AxisSingularityError(ValueError):
    """Evaluation requested on (or numerically at) the torus axis rho = 0."""


@dataclass(frozen=True)
class PhysicalParams:
    """Tokamak field and particle constants in SI units."""

    R: float = 5.0  # major radius [m]
    a: float = 1.0  # safety-factor shaping coefficient [1/m]
    B0: float = 0.02  # field strength [T]
    mass: float = 1.673e-27  # particle mass [kg]
    charge: float = 1.602e-19  # particle charge [C]

    def __post_init__(self) -> None:
        for name in ("R", "a", "B0", "mass", "charge"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class CharacteristicScales:
    """Gyration-based scales used to nondimensionalize states and fields.

    L0 is one circumference of the magnetic axis, T0 the inverse gyration
    frequency, P0 = mass * L0 / T0 the momentum scale; A0 = P0 / charge
    (= L0 B0) makes the scaled potential charge-free and H0 = P0^2 / mass
    is the energy scale.
    """

    L0: float
    T0: float
    P0: float
    A0: float
    H0: float

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "CharacteristicScales":
        length = 2.0 * math.pi * params.R
        time = params.mass / (params.charge * params.B0)
        momentum = params.mass * length / time
        return cls(
            L0=length,
            T0=time,
            P0=momentum,
            A0=momentum / params.charge,
            H0=momentum**2 / params.mass,
        )

    def nondimensionalize(self, state: PhaseState) -> PhaseState:
        """SI state -> dimensionless state."""
        return PhaseState(state.q / self.L0, state.p / self.P0)

    def dimensionalize(self, state: PhaseState) -> PhaseState:
        """Dimensionless state -> SI state."""
        return PhaseState(state.q * self.L0, state.p * self.P0)


def safety_factor(r, params: PhysicalParams):
    """Field-line pitch profile q(r) = (1 + a r) / (1 + r^2)."""
    return (1.0 + params.a * r) / (1.0 + r * r)


def field_profile(r, params: PhysicalParams):
    """f(r) = r / (R q(r)), the radial profile under the flux integral."""
    return r * (1.0 + r * r) / (params.R * (1.0 + params.a * r))


def F_integral(r: float, params: PhysicalParams) -> float:
    """F(r) = integral of f from 0 to r, by fixed-order Gauss-Legendre.

    r is in the same length unit as params.R (meters).
    """
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"radius must be finite and non-negative, got {r}")
    if 1.0 + params.a * r <= 0:
        raise ValueError("field profile has a pole inside the integration range")
    # In-place evaluation of f at the scaled nodes; this sits on the hot path
    # of every tokamak field evaluation.
    lam = np.multiply(_NODES_PLUS_1, 0.5 * r, out=_QUAD_SCRATCH)
    num = np.multiply(lam, lam, out=_QUAD_SCRATCH2)
    num += 1.0
    num *= lam
    lam *= params.a * params.R
    lam += params.R
    num /= lam
    return 0.5 * r * float(num @ _WEIGHTS)


class HamiltonianModel:
    """Smooth Hamiltonian H(q, p) with gradients and Hessian blocks.

    Subclasses set `dim` and implement value/grad_q/grad_p; the Hessian
    blocks default to one forward-AD pass over the stacked gradients and
    are overridden where they are constant.
    """

    dim: int

    def value(self, q: np.ndarray, p: np.ndarray):
        raise NotImplementedError

    def grad_q(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad_p(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian_blocks(self, q: np.ndarray, p: np.ndarray):
        """Blocks (H_qq, H_pp, H_pq) with H_pq[r, s] = d^2 H / dp_s dq_r."""
        n = self.dim

        def stacked(z):
            return np.concatenate([self.grad_q(z[:n], z[n:]), self.grad_p(z[:n], z[n:])])

        z0 = np.concatenate([np.asarray(q, dtype=float), np.asarray(p, dtype=float)])
        jac = jacobian(stacked, z0)
        return jac[:n, :n], jac[n:, n:], jac[:n, n:]

    def energy(self, state: PhaseState) -> float:
        return float(value_of(self.value(state.q, state.p)))


class HarmonicOscillator(HamiltonianModel):
    """H = (q^2 + p^2) / 2 in one degree of freedom."""

    dim = 1

    def value(self, q, p):
        return 0.5 * (q[0] * q[0] + p[0] * p[0])

    def grad_q(self, q, p):
        return np.array(q, copy=True)

    def grad_p(self, q, p):
        return np.array(p, copy=True)

    def hessian_blocks(self, q, p):
        return np.eye(1), np.eye(1), np.zeros((1, 1))


def mixed_hessian(n: int, dtype=float) -> np.ndarray:
    """Constant coupling matrix with 0 diagonal, -2 above it and +1 below."""
    if n < 2:
        raise ValueError(f"dimension must be at least 2, got {n}")
    m = np.zeros((n, n), dtype=dtype)
    for i in range(n):
        m[i, :i] = 1
        m[i, i + 1 :] = -2
    return m


class QuadraticModel(HamiltonianModel):
    """Quadratic Hamiltonian whose mixed Hessian is the asymmetric coupling

        H = (|q|^2 + |p|^2) / 2 + sum_{i<j} (p_i q_j - 2 q_i p_j),

    so H_qq = H_pp = I and H_pq is the constant matrix from
    :func:`mixed_hessian`.  Its skew part never vanishes, which makes the
    model a sharp probe for block-defect measurements.
    """

    def __init__(self, n: int):
        self.dim = n
        self.coupling = mixed_hessian(n)

    def value(self, q, p):
        return 0.5 * (q @ q + p @ p) + q @ (self.coupling @ p)

    def grad_q(self, q, p):
        return q + self.coupling @ p

    def grad_p(self, q, p):
        return p + self.coupling.T @ q

    def hessian_blocks(self, q, p):
        n = self.dim
        return np.eye(n), np.eye(n), self.coupling.copy()


class SwappedModel(HamiltonianModel):
    """The wrapped Hamiltonian in swapped coordinates (Q, P) = (-p, q).

    Composing with the inverse swap gives H'(Q, P) = H(P, -Q); p-type
    schemes applied to H' reproduce q-type schemes applied to H after
    conjugating states back.
    """

    def __init__(self, inner: HamiltonianModel):
        self.inner = inner
        self.dim = inner.dim

    def value(self, q, p):
        return self.inner.value(p, -q)

    def grad_q(self, q, p):
        return -self.inner.grad_p(p, -q)

    def grad_p(self, q, p):
        return self.inner.grad_q(p, -q)

    def hessian_blocks(self, q, p):
        qq, pp, pq = self.inner.hessian_blocks(p, -q)
        return pp, qq, -pq.T


class TokamakModel(HamiltonianModel):
    """Charged particle in the helical tokamak field, dimensionless form.

    Positions and momenta are in units of (L0, P0); the one-step maps see
    H(q, p) = |p - A(q)|^2 / 2 with A the scaled vector potential.  The
    flux integral F is a registered AD primitive whose derivative is the
    field profile f, so differentiating a flow never walks the quadrature.
    """

    dim = 3

    def __init__(self, params: PhysicalParams | None = None):
        self.params = params if params is not None else PhysicalParams()
        self.scales = CharacteristicScales.from_params(self.params)
        self._flux = CustomPrimitive(
            evaluate=self._flux_value,
            derivative=self._flux_slope,
            name="field-profile-integral",
        )
        # one-entry memo for the float path: fixed-point sweeps and adjacent
        # steps revisit the same position, so this halves field evaluations
        self._memo_key: bytes | None = None
        self._memo_pot: np.ndarray | None = None
        self._memo_jac: np.ndarray | None = None

    def _flux_value(self, r: float) -> float:
        return F_integral(r, self.params)

    def _flux_slope(self, r: float) -> float:
        return field_profile(r, self.params)

    def _si_potential(self, x, y, z, with_jacobian: bool):
        """Vector potential (and optionally its position Jacobian) in SI."""
        par = self.params
        b0, big_r, a = par.B0, par.R, par.a
        u = x * x + y * y
        rho = sqrt(u)
        if value_of(rho) <= AXIS_TOLERANCE * big_r:
            raise AxisSingularityError(
                f"position is within {AXIS_TOLERANCE:g} R of the torus axis"
            )
        dr = rho - big_r
        r = sqrt(dr * dr + z * z)
        flux = self._flux(r)
        w = flux / u
        ax = -b0 * y * w
        ay = b0 * x * w
        az = -b0 * big_r * log(rho / big_r)
        if not with_jacobian:
            return (ax, ay, az), None
        # g = f(r)/r stays finite on the magnetic axis circle r = 0
        g = (1.0 + r * r) / (big_r * (1.0 + a * r))
        c = (g * dr / rho - 2.0 * w) / u
        wx = x * c
        wy = y * c
        wz = g * z / u
        jac = (
            (-b0 * y * wx, -b0 * (w + y * wy), -b0 * y * wz),
            (b0 * (w + x * wx), b0 * x * wy, b0 * x * wz),
            (-b0 * big_r * x / u, -b0 * big_r * y / u, 0.0),
        )
        return (ax, ay, az), jac

    def _float_potential(self, q: np.ndarray, with_jacobian: bool):
        """Plain-float twin of _si_potential for the time-stepping hot path.

        Returned arrays are shared with the memo; callers must not mutate.
        """
        key = q.tobytes()
        if key == self._memo_key and (self._memo_jac is not None or not with_jacobian):
            return self._memo_pot, (self._memo_jac if with_jacobian else None)
        par = self.params
        b0, big_r, a = par.B0, par.R, par.a
        s = self.scales
        x, y, z = float(q[0]) * s.L0, float(q[1]) * s.L0, float(q[2]) * s.L0
        u = x * x + y * y
        rho = math.sqrt(u)
        if rho <= AXIS_TOLERANCE * big_r:
            raise AxisSingularityError(
                f"position is within {AXIS_TOLERANCE:g} R of the torus axis"
            )
        dr = rho - big_r
        r = math.sqrt(dr * dr + z * z)
        flux = F_integral(r, par)
        w = flux / u
        inv_a0 = 1.0 / s.A0
        pot = np.empty(3)
        pot[0] = -b0 * y * w * inv_a0
        pot[1] = b0 * x * w * inv_a0
        pot[2] = -b0 * big_r * math.log(rho / big_r) * inv_a0
        if not with_jacobian:
            self._memo_key, self._memo_pot, self._memo_jac = key, pot, None
            return pot, None
        g = (1.0 + r * r) / (big_r * (1.0 + a * r))
        c = (g * dr / rho - 2.0 * w) / u
        wx = x * c
        wy = y * c
        wz = g * z / u
        scale = s.L0 / s.A0
        jac = np.empty((3, 3))
        jac[0, 0] = -b0 * y * wx * scale
        jac[0, 1] = -b0 * (w + y * wy) * scale
        jac[0, 2] = -b0 * y * wz * scale
        jac[1, 0] = b0 * (w + x * wx) * scale
        jac[1, 1] = b0 * x * wy * scale
        jac[1, 2] = b0 * x * wz * scale
        jac[2, 0] = -b0 * big_r * x / u * scale
        jac[2, 1] = -b0 * big_r * y / u * scale
        jac[2, 2] = 0.0
        self._memo_key, self._memo_pot, self._memo_jac = key, pot, jac
        return pot, jac

    def potential_and_jacobian(self, q: np.ndarray, with_jacobian: bool = True):
        """Dimensionless A(q) and optionally its Jacobian dA/dq."""
        if q.dtype != object:
            return self._float_potential(q, with_jacobian)
        s = self.scales
        x, y, z = q[0] * s.L0, q[1] * s.L0, q[2] * s.L0
        (ax, ay, az), jac = self._si_potential(x, y, z, with_jacobian)
        inv_a0 = 1.0 / s.A0
        pot = np.array([ax * inv_a0, ay * inv_a0, az * inv_a0])
        if jac is None:
            return pot, None
        scale = s.L0 / s.A0
        rows = [[jac[i][j] * scale for j in range(3)] for i in range(3)]
        return pot, np.array(rows)

    def vector_potential(self, q: np.ndarray) -> np.ndarray:
        return self.potential_and_jacobian(q, with_jacobian=False)[0]

    def potential_jacobian(self, q: np.ndarray) -> np.ndarray:
        return self.potential_and_jacobian(q, with_jacobian=True)[1]

    def value(self, q, p):
        d = p - self.vector_potential(q)
        return 0.5 * (d @ d)

    def grad_q(self, q, p):
        pot, jac = self.potential_and_jacobian(q)
        d = p - pot
        return -(jac.T @ d)

    def grad_p(self, q, p):
        return p - self.vector_potential(q)


def vector_potential(q: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """Dimensionless tokamak vector potential at dimensionless position q."""
    return TokamakModel(params).vector_potential(q)


def harmonic_oscillator() -> HarmonicOscillator:
    return HarmonicOscillator()


def quadratic_model(n: int) -> QuadraticModel:
    return QuadraticModel(n)


def tokamak_model(params: PhysicalParams | None = None) -> TokamakModel:
    return TokamakModel(params)


def reference_initial_state_si() -> PhaseState:
    """Bundled SI initial condition: a passing particle near the axis circle."""
    return PhaseState(
        np.array([5.1, 0.0, 0.1]),
        np.array([1e-23, 1e-23, 1e-21]),
    )


def reference_initial_state(model: TokamakModel) -> PhaseState:
    """The bundled initial condition in the model's dimensionless units."""
    return model.scales.nondimensionalize(reference_initial_state_si())
