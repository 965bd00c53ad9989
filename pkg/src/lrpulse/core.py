"""Hamiltonian, dynamical invariant, eigenstructure, and analytic evolution.

The driven three-level lambda system is kept beyond the rotating-wave
approximation: the pump and Stokes couplings retain their full cos(omega*t)
carrier factors. A family of Hermitian invariants parametrized by four
auxiliary angles (alpha, beta, epsilon, lambda) commutes with the dynamics in
the Lewis-Riesenfeld sense, and its eigenvectors carry the state up to
accumulated phases. Everything here is a pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SingularityError
from .numerics import central_diff

SQRT2 = np.sqrt(2.0)

_TINY = 1e-12


def ket(j: int) -> np.ndarray:
    """Basis state |j> for j in {1, 2, 3}."""
    if j not in (1, 2, 3):
        raise ValueError("basis index must be 1, 2, or 3")
    v = np.zeros(3, dtype=complex)
    v[j - 1] = 1.0
    return v


def is_normalized(psi: np.ndarray, tol: float = 1e-9) -> bool:
    return abs(np.linalg.norm(psi) - 1.0) <= tol


@dataclass(frozen=True)
class SystemParams:
    """Carrier frequencies plus evaluable envelopes and detunings.

    Envelopes are complex-valued callables of time (angular-frequency units);
    detunings are real-valued callables. The schedule domain is [t_start,
    t_end].
    """

    omega_p: float
    omega_s: float
    Omega_p: Callable[[float], complex]
    Omega_s: Callable[[float], complex]
    Delta_p: Callable[[float], float]
    Delta_s: Callable[[float], float]
    t_start: float
    t_end: float

    def __post_init__(self):
        if self.omega_p <= 0 or self.omega_s <= 0:
            raise ValueError("carrier frequencies must be positive")


@dataclass(frozen=True)
class AuxParams:
    """Snapshot of the auxiliary angles and their first time-derivatives."""

    alpha: float
    beta: float
    epsilon: float
    lam: float
    theta: float
    alpha_dot: float = 0.0
    beta_dot: float = 0.0
    epsilon_dot: float = 0.0
    lam_dot: float = 0.0
    theta_dot: float = 0.0

    def constraint_residual(self) -> float:
        """Residual of alpha_dot = lam_dot * cos(beta) * cos(epsilon)."""
        return abs(self.alpha_dot
                   - self.lam_dot * np.cos(self.beta) * np.cos(self.epsilon))


def hamiltonian_at(sys: SystemParams, t: float) -> np.ndarray:
    """Full (non-RWA) Hamiltonian matrix at time t, hbar = 1."""
    if not sys.t_start <= t <= sys.t_end:
        raise DomainError(f"t={t} outside schedule domain "
                          f"[{sys.t_start}, {sys.t_end}]")
    p = complex(sys.Omega_p(t)) * np.cos(sys.omega_p * t)
    s = complex(sys.Omega_s(t)) * np.cos(sys.omega_s * t)
    h11 = -sys.omega_p - sys.Delta_p(t)
    h33 = -sys.omega_s - sys.Delta_s(t)
    return np.array([
        [h11, p, 0.0],
        [np.conj(p), 0.0, np.conj(s)],
        [0.0, s, h33],
    ], dtype=complex)


def invariant_at(aux: AuxParams) -> np.ndarray:
    """Invariant matrix for the given auxiliary angles (eigenvalues +1, -1, 0)."""
    a, b, e, l = aux.alpha, aux.beta, aux.epsilon, aux.lam
    for name, v in (("alpha", a), ("beta", b), ("epsilon", e), ("lambda", l)):
        if not np.isfinite(v):
            raise ValueError(f"non-finite auxiliary angle {name}")
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    c2l, s2l = np.cos(2 * l), np.sin(2 * l)
    s2a = np.sin(2 * a)
    i11 = c2l * (ca**2 * cb**2 - sa**2) + np.cos(e) * cb * s2a * s2l
    i12 = (ca * c2l * cb + np.exp(-1j * e) * sa * s2l) * sb
    i13 = (0.25 * c2l * (3 + np.cos(2 * b)) * s2a
           - cb * (np.cos(e) * np.cos(2 * a) + 1j * np.sin(e)) * s2l)
    i22 = c2l * sb**2
    i23 = (sa * c2l * cb - np.exp(1j * e) * ca * s2l) * sb
    i33 = c2l * (sa**2 * cb**2 - ca**2) - np.cos(e) * cb * s2a * s2l
    return np.array([
        [i11, i12, i13],
        [np.conj(i12), i22, i23],
        [np.conj(i13), np.conj(i23), i33],
    ], dtype=complex)


def invariant_eigenvectors(aux: AuxParams):
    """Closed-form eigenvectors (phi_plus, phi_minus, phi_zero).

    They belong to eigenvalues +1, -1, 0 of invariant_at(aux) and form an
    orthonormal triple.
    """
    a, b, e, l = aux.alpha, aux.beta, aux.epsilon, aux.lam
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cl, sl = np.cos(l), np.sin(l)
    ee = np.exp(-1j * e)
    phi_plus = np.array([ca * cb * cl + ee * sa * sl,
                         sb * cl,
                         sa * cb * cl - ee * ca * sl], dtype=complex)
    phi_minus = np.array([ca * cb * sl - ee * sa * cl,
                          sb * sl,
                          sa * cb * sl + ee * ca * cl], dtype=complex)
    phi_zero = np.array([ca * sb, -cb, sa * sb], dtype=complex)
    return phi_plus, phi_minus, phi_zero


def lr_phase_rate(aux: AuxParams) -> float:
    """Phase-rate parameter tied to the zero-eigenvalue branch.

    Evaluates -(epsilon_dot + 2*lam_dot*sin(eps)*cos(beta)*cot(2*alpha)) /
    sin(beta)^2. Synthesis never calls this at sin(beta) = 0; it inverts the
    relation instead. Raises SingularityError at the poles.
    """
    sb2 = np.sin(aux.beta) ** 2
    num = aux.epsilon_dot
    if aux.lam_dot != 0.0:
        s2a = np.sin(2 * aux.alpha)
        if abs(s2a) < _TINY:
            raise SingularityError("cot(2*alpha) pole with lam_dot != 0")
        num += (2.0 * aux.lam_dot * np.sin(aux.epsilon) * np.cos(aux.beta)
                * np.cos(2 * aux.alpha) / s2a)
    if sb2 < _TINY:
        if abs(num) < _TINY:
            return 0.0
        raise SingularityError("sin(beta) = 0 with nonzero phase-rate numerator")
    return -num / sb2


def invariance_residual(sys: SystemParams, aux_traj, t: float, h: float) -> float:
    """Frobenius norm of i*dI/dt - [H(t), I(t)], dI/dt by central difference.

    Vanishes as O(h^2) for schedules synthesized from aux_traj.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    H = hamiltonian_at(sys, t)
    I = invariant_at(aux_traj.at(t))
    dI = central_diff(lambda u: invariant_at(aux_traj.at(u)), t, h)
    return float(np.linalg.norm(1j * dI - (H @ I - I @ H)))


def analytic_evolution(aux_traj, psi0: np.ndarray, t: float) -> np.ndarray:
    """Closed-form state at time t from the invariant eigenbasis expansion.

    The initial amplitudes are projections of psi0 on the eigenvectors at the
    trajectory start; each branch then picks up its accumulated phase as
    supplied by the trajectory (phase_plus, phase_minus, phase_zero).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if not is_normalized(psi0):
        raise ValueError("psi0 must be normalized")
    p0, m0, z0 = invariant_eigenvectors(aux_traj.at(aux_traj.t_start))
    cp, cm, cz = np.vdot(p0, psi0), np.vdot(m0, psi0), np.vdot(z0, psi0)
    pt, mt, zt = invariant_eigenvectors(aux_traj.at(t))
    return (cp * np.exp(1j * aux_traj.phase_plus(t)) * pt
            + cm * np.exp(1j * aux_traj.phase_minus(t)) * mt
            + cz * np.exp(1j * aux_traj.phase_zero(t)) * zt)


def final_state_prediction(alpha: float, epsilon_T: float) -> np.ndarray:
    """Endpoint state (up to a global phase) for a transfer started in |1>
    with beta vanishing at both ends and constant alpha (lambda = 0)."""
    ee = np.exp(-1j * epsilon_T)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([ca**2 + ee * sa**2, 0.0, (1.0 - ee) * sa * ca],
                    dtype=complex)
