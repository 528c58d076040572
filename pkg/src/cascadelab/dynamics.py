"""Time integration of the cascade systems and theorem-level diagnostics.

The limit system is the autonomous diagonal cascade

    dF_k/dT = sum_k' M[k,k'] |F_k'|^2 F_k,

whose structure conserves the l2 mass exactly (the real part of M is
antisymmetric) and pushes occupation monotonically toward the lowest
mode.  The prelimit system runs over all index quadruples with explicit
oscillatory phases e^{i T dE / eta^2}; its remainder terms (the freely
dispersing part of the initial field data) are dropped, which is the one
modeling deviation of this package: those terms vanish in the
weak-coupling limit but would require the full field propagator to
evaluate at finite eta.

Integration uses an adaptive embedded Runge-Kutta 4(5) pair; conserved
quantities are monitored, never enforced, so their drift doubles as a
quality statistic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .coeffs import CoefficientSet
from .errors import NumericalError, ValidationError

#: Below this rate the ground-row transition is treated as numerically
#: vanishing and rate-based diagnostics are skipped rather than reported.
MIN_GROUND_RATE = 1e-14


@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-9
    atol: float = 1e-12
    n_samples: int = 256
    method: str = "RK45"
    #: fraction of the fastest oscillation period used to cap prelimit steps
    step_cap_factor: float = 0.1
    #: optional post-sampling mass renormalization (off by default; drift is
    #: a test statistic and renormalizing would hide it)
    renormalize: bool = False


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (n_samples, K), complex
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.states.shape[1]

    def masses(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)


@dataclass(frozen=True)
class DiagnosticsSeries:
    times: np.ndarray
    mass: np.ndarray
    energy: np.ndarray
    ground_occupation: np.ndarray
    tail_masses: np.ndarray  # shape (K, n): tail_masses[j] = sum_{k>j} |F_k|^2
    logistic: np.ndarray | None
    gamma_tilde: float | None
    flags: dict = field(default_factory=dict)

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])))

    def max_energy_increase(self) -> float:
        return float(max(0.0, np.max(np.diff(self.energy), initial=-np.inf)))

    def max_tail_increase(self) -> float:
        diffs = np.diff(self.tail_masses, axis=1)
        return float(max(0.0, np.max(diffs, initial=-np.inf)))


def rhs_limit(state: np.ndarray, coeffs: CoefficientSet) -> np.ndarray:
    """Right-hand side of the limit cascade."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (coeffs.size,):
        raise ValidationError(
            f"state has {state.shape} entries, coefficients expect {coeffs.size}"
        )
    return (coeffs.limit_matrix @ np.abs(state) ** 2) * state


def rhs_prelimit(
    t: float, state: np.ndarray, coeffs: CoefficientSet, eta: float
) -> np.ndarray:
    """Right-hand side of the oscillatory prelimit system (remainders dropped)."""
    if not coeffs.has_tensor:
        raise ValidationError("coefficient set carries no prelimit tensor")
    state = np.asarray(state, dtype=complex)
    if state.shape != (coeffs.size,):
        raise ValidationError(
            f"state has {state.shape} entries, coefficients expect {coeffs.size}"
        )
    phases = np.exp((1j * t / eta**2) * coeffs.tensor_gaps)
    weighted = coeffs.tensor * phases
    return np.einsum("abcd,c,d,b->a", weighted, state, np.conj(state), state)


def fastest_phase(coeffs: CoefficientSet) -> float:
    """Largest |dE| among quadruples that actually contribute.

    This is the fastest prelimit phase rate times eta^2; quadruples with a
    zero coefficient (e.g. under a resonant-only restriction) cannot force
    the step cap.
    """
    if not coeffs.has_tensor:
        return 0.0
    active = coeffs.tensor != 0.0
    if not np.any(active):
        return 0.0
    return float(np.max(np.abs(coeffs.tensor_gaps[active])))


def integrate(
    rhs,
    initial_state: np.ndarray,
    t_end: float,
    options: SolverOptions = SolverOptions(),
    t_eval: np.ndarray | None = None,
    max_step: float = np.inf,
) -> Trajectory:
    """Adaptive RK45 integration with dense sampling.

    ``rhs`` is a callable (t, state) -> derivative over complex states.
    Raises on solver breakdown or non-finite output instead of returning
    partial data.
    """
    initial_state = np.asarray(initial_state, dtype=complex)
    if not np.all(np.isfinite(initial_state)):
        raise ValidationError("initial state contains non-finite entries")
    if t_end <= 0:
        raise ValidationError(f"t_end must be positive, got {t_end}")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, options.n_samples)

    sol = solve_ivp(
        rhs,
        (0.0, float(t_end)),
        initial_state,
        method=options.method,
        rtol=options.rtol,
        atol=options.atol,
        t_eval=t_eval,
        max_step=max_step,
    )
    if not sol.success:
        raise NumericalError(f"integration failed at t = {sol.t[-1] if len(sol.t) else 0.0}: {sol.message}")
    states = np.ascontiguousarray(sol.y.T.astype(complex))
    if not np.all(np.isfinite(states)):
        raise NumericalError("integration produced non-finite amplitudes")

    if options.renormalize:
        mass0 = np.sum(np.abs(initial_state) ** 2)
        norms = np.sqrt(np.sum(np.abs(states) ** 2, axis=1))
        states = states * np.sqrt(mass0) / norms[:, None]

    meta = {
        "method": options.method,
        "rtol": options.rtol,
        "atol": options.atol,
        "max_step": None if np.isinf(max_step) else max_step,
        "nfev": int(sol.nfev),
    }
    return Trajectory(times=np.asarray(t_eval, dtype=float), states=states, meta=meta)


def integrate_limit(
    coeffs: CoefficientSet,
    initial_state: np.ndarray,
    t_end: float,
    options: SolverOptions = SolverOptions(),
    t_eval: np.ndarray | None = None,
) -> Trajectory:
    traj = integrate(
        lambda _t, y: rhs_limit(y, coeffs), initial_state, t_end, options, t_eval
    )
    traj.meta["system"] = "limit"
    return traj


def integrate_prelimit(
    coeffs: CoefficientSet,
    initial_state: np.ndarray,
    t_end: float,
    options: SolverOptions = SolverOptions(),
    t_eval: np.ndarray | None = None,
) -> Trajectory:
    """Integrate the prelimit system, capping steps to resolve the phases."""
    eta = coeffs.eta
    if eta is None:
        raise ValidationError("coefficient set was not assembled at a finite eta")
    rate = fastest_phase(coeffs) / eta**2
    cap = options.step_cap_factor * 2.0 * np.pi / rate if rate > 0 else np.inf
    traj = integrate(
        lambda t, y: rhs_prelimit(t, y, coeffs, eta),
        initial_state,
        t_end,
        options,
        t_eval,
        max_step=cap,
    )
    traj.meta["system"] = "prelimit"
    traj.meta["eta"] = eta
    return traj


def logistic_bound(f0_ground_mass: float, gamma_tilde: float, t) -> float | np.ndarray:
    """Lower bound for the ground occupation of unit-mass data.

    1 / (1 + (1 - x0)/x0 * exp(-2 gamma t)) with x0 the initial ground
    occupation; valid for data supported on finitely many modes with
    gamma the smallest ground-row rate among them.
    """
    x0 = float(f0_ground_mass)
    if not 0.0 < x0 <= 1.0:
        raise ValidationError(f"initial ground occupation must be in (0, 1], got {x0}")
    if gamma_tilde <= 0:
        raise ValidationError(f"rate must be positive, got {gamma_tilde}")
    t = np.asarray(t, dtype=float)
    out = 1.0 / (1.0 + (1.0 - x0) / x0 * np.exp(-2.0 * gamma_tilde * t))
    return float(out) if out.ndim == 0 else out


def diagnostics(
    traj: Trajectory,
    energies: np.ndarray,
    coeffs: CoefficientSet | None = None,
    min_rate: float = MIN_GROUND_RATE,
) -> DiagnosticsSeries:
    """Mass, energy, ground occupation, tail masses, and the logistic trace.

    The logistic lower bound is attached only when it applies: unit-mass
    data with nonzero ground occupation and strictly positive ground-row
    rates over the occupied modes.  Otherwise the series records why it
    was skipped instead of dividing by zero.
    """
    energies = np.asarray(energies, dtype=float)
    occ = np.abs(traj.states) ** 2  # (n, K)
    size = occ.shape[1]
    if len(energies) != size:
        raise ValidationError("energy vector does not match the trajectory size")

    mass = np.sum(occ, axis=1)
    energy = occ @ energies
    ground = occ[:, 0]
    # tail_masses[j] = sum_{k > j} |F_k|^2
    reversed_cumsum = np.cumsum(occ[:, ::-1], axis=1)[:, ::-1]
    tails = np.zeros((size, len(traj.times)))
    tails[: size - 1] = reversed_cumsum[:, 1:].T

    flags: dict = {}
    logistic = None
    gamma_tilde = None
    occ0 = occ[0]
    support = np.flatnonzero(occ0 > 1e-14 * max(mass[0], 1.0))
    if ground[0] <= 0.0:
        flags["logistic_skipped"] = "zero initial ground occupation"
    elif abs(mass[0] - 1.0) > 1e-9:
        flags["logistic_skipped"] = "initial data not unit mass"
    elif coeffs is None:
        flags["logistic_skipped"] = "no coefficient set supplied"
    elif len(support) == 1 and support[0] == 0:
        logistic = np.ones_like(traj.times)
        flags["logistic_note"] = "ground-only data; bound is identically 1"
    else:
        top = int(support[-1])
        rates = coeffs.fgr[0, 1 : top + 1]
        if np.min(rates) < min_rate:
            flags["logistic_skipped"] = (
                f"ground-row rate below {min_rate:g} for some occupied mode"
            )
        else:
            gamma_tilde = float(np.min(rates))
            logistic = logistic_bound(float(ground[0]), gamma_tilde, traj.times)

    return DiagnosticsSeries(
        times=traj.times,
        mass=mass,
        energy=energy,
        ground_occupation=ground,
        tail_masses=tails,
        logistic=logistic,
        gamma_tilde=gamma_tilde,
        flags=flags,
    )
