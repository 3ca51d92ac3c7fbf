"""Gaussian Lindblad engine for the two-ensemble dissipative scheme.

Jump operators linear in the mode operators give closed drift/diffusion
dynamics for the first and second moments; the entangling channels are
the two nonlocal operators mixing one ensemble's annihilation with the
other's creation operator.  Rates are normalized by d*Gamma internally;
SI conversion happens at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as sla

from .constants import EPR_BOUND, JUMP_RATE_FACTOR, symplectic_form
from .gaussian import (
    GaussianError,
    GaussianState,
    ModeId,
    _as_modes,
    epr_variance,
)


class NoUniqueSteadyState(RuntimeError):
    """Drift is not Hurwitz: the dissipative map has no unique fixed point."""


@dataclass(frozen=True)
class JumpOperators:
    """Coefficient vectors of the two nonlocal jump operators over
    (a_I, a_I†, a_II, a_II†) implicitly, stored in quadrature form."""

    A: np.ndarray  # complex row over (x1, p1, x2, p2)
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=complex))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=complex))


@dataclass(frozen=True)
class LindbladModel:
    """Drift/diffusion pair plus the jump list it was built from.

    jump_coeffs[k] is the complex coefficient row lambda_k with
    L_k = lambda_k . R over quadratures R = (x1, p1, ...); rates[k] its
    rate.  drift = Ω Im(M), diffusion = Ω Re(M) Ωᵀ with
    M = sum_k rates[k] conj(lambda_k) lambda_kᵀ.
    """

    modes: tuple[ModeId, ...]
    jump_coeffs: tuple[np.ndarray, ...]
    rates: tuple[float, ...]
    drift: np.ndarray
    diffusion: np.ndarray
    mu: float = 1.0
    nu: float = 0.0
    gamma_s: float = 0.0

    @property
    def n_modes(self) -> int:
        return len(self.modes)


def _assemble(modes, jump_coeffs, rates) -> tuple[np.ndarray, np.ndarray]:
    n = len(modes)
    om = symplectic_form(n)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    for lam, r in zip(jump_coeffs, rates):
        lam = np.asarray(lam, dtype=complex).reshape(2 * n)
        M += r * np.outer(lam.conj(), lam)
    drift = om @ M.imag
    diffusion = om @ M.real @ om.T
    diffusion = 0.5 * (diffusion + diffusion.T)
    if np.linalg.eigvalsh(diffusion).min() < -1e-12:
        raise GaussianError("diffusion matrix is not PSD")
    return drift, diffusion


def _mode_quadrature_rows(n: int, mode_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient rows for a and a† of one mode over quadratures."""
    a = np.zeros(2 * n, dtype=complex)
    a[2 * mode_index] = 1 / math.sqrt(2)
    a[2 * mode_index + 1] = 1j / math.sqrt(2)
    return a, a.conj()


def build_ideal_model(
    mu: float,
    nu: float,
    d: float,
    Gamma: float,
    mode_a: ModeId | str = "ens_I",
    mode_b: ModeId | str = "ens_II",
) -> LindbladModel:
    """Ideal two-channel model: A = mu a - nu b†, B = mu b - nu a†.

    Requires mu^2 - nu^2 = 1.  Channel rates are 2 d Gamma so that first
    moments decay at gamma_s = d Gamma (see constants.JUMP_RATE_FACTOR);
    the unique steady state is the two-mode squeezed vacuum annihilated
    by both operators, with EPR variance (mu - nu)^2 = 1/Z^2.
    """
    if abs(mu * mu - nu * nu - 1.0) > 1e-9:
        raise GaussianError(f"mu^2 - nu^2 = {mu * mu - nu * nu} != 1")
    if d <= 0 or Gamma <= 0:
        raise GaussianError("d and Gamma must be positive")
    modes = _as_modes([mode_a, mode_b])
    a, adag = _mode_quadrature_rows(2, 0)
    b, bdag = _mode_quadrature_rows(2, 1)
    lam_A = mu * a - nu * bdag
    lam_B = mu * b - nu * adag
    gamma_s = d * Gamma
    rate = JUMP_RATE_FACTOR * d * Gamma
    drift, diffusion = _assemble(modes, [lam_A, lam_B], [rate, rate])
    return LindbladModel(
        modes=modes,
        jump_coeffs=(lam_A, lam_B),
        rates=(rate, rate),
        drift=drift,
        diffusion=diffusion,
        mu=mu,
        nu=nu,
        gamma_s=gamma_s,
    )


NOISE_KINDS = ("single_atom_decay", "pump", "repump", "dephasing")


def add_noise_channel(
    model: LindbladModel,
    kind: str,
    rate: float,
    n_thermal: float = 0.0,
) -> LindbladModel:
    """Append local noise channels to every mode of the model.

    single_atom_decay: thermalizing decay (downward at rate*(1+n_th),
    upward at rate*n_th) - atoms leaving the encoded two-level system
    look like added noise, n_thermal > 0.
    pump / repump: damping toward the fully polarized state (vacuum),
    with optional excess diffusion n_thermal from the incoherent light.
    dephasing: pure phase diffusion on each mode at the given rate.
    """
    if kind not in NOISE_KINDS:
        raise GaussianError(f"unknown noise kind {kind!r}; options: {NOISE_KINDS}")
    if rate < 0:
        raise GaussianError("noise rate must be nonnegative")
    if rate == 0.0:
        return model
    n = model.n_modes
    coeffs = list(model.jump_coeffs)
    rates = list(model.rates)
    for k in range(n):
        a, adag = _mode_quadrature_rows(n, k)
        if kind == "dephasing":
            # L = a†a is not linear; Gaussian dephasing enters as a pair of
            # quadrature channels producing pure diffusion in x and p
            x = np.zeros(2 * n, dtype=complex)
            p = np.zeros(2 * n, dtype=complex)
            x[2 * k] = 1.0
            p[2 * k + 1] = 1.0
            coeffs += [x, p]
            rates += [rate, rate]
        else:
            coeffs.append(a)
            rates.append(rate * (1.0 + n_thermal))
            if n_thermal > 0.0:
                coeffs.append(adag)
                rates.append(rate * n_thermal)
    drift, diffusion = _assemble(model.modes, coeffs, rates)
    return replace(
        model,
        jump_coeffs=tuple(coeffs),
        rates=tuple(rates),
        drift=drift,
        diffusion=diffusion,
    )


def evolve(model: LindbladModel, state: GaussianState, t: float) -> GaussianState:
    """Propagate mean and covariance for time t.

    mean(t) = e^{At} mean(0); cov(t) solves the Lyapunov ODE, evaluated in
    closed form via the block-exponential identity, valid for any drift
    (Hurwitz or not).
    """
    if t < 0:
        raise GaussianError("t must be nonnegative")
    idx = [state.index(m) for m in model.modes]
    if sorted(idx) != list(range(state.n_modes)) or idx != sorted(idx):
        raise GaussianError("state modes must match model modes in order")
    A = model.drift
    D = model.diffusion
    n2 = A.shape[0]
    blk = np.zeros((2 * n2, 2 * n2))
    blk[:n2, :n2] = A
    blk[:n2, n2:] = D
    blk[n2:, n2:] = -A.T
    eblk = sla.expm(blk * t)
    F = eblk[:n2, :n2]  # e^{At}
    K = eblk[:n2, n2:]  # int_0^t e^{As} D e^{-A^T s} ds shifted
    G = K @ F.T  # int_0^t e^{As} D e^{A^T s} ds
    mean = F @ state.mean
    cov = F @ state.cov @ F.T + G
    return GaussianState(state.modes, mean, cov)


def is_unique(model: LindbladModel) -> tuple[bool, np.ndarray]:
    """True iff the drift is Hurwitz; also returns its eigenvalues."""
    ev = np.linalg.eigvals(model.drift)
    return bool(np.all(ev.real < -1e-12)), ev


def steady_state(model: LindbladModel) -> GaussianState:
    """Unique zero-mean Gaussian fixed point from the Lyapunov equation."""
    ok, ev = is_unique(model)
    if not ok:
        raise NoUniqueSteadyState(
            f"drift eigenvalue real parts {sorted(ev.real)} are not all negative"
        )
    cov = sla.solve_continuous_lyapunov(model.drift, -model.diffusion)
    cov = 0.5 * (cov + cov.T)
    return GaussianState(model.modes, np.zeros(2 * model.n_modes), cov)


def jump_expectation(model: LindbladModel, state: GaussianState, which: int = 0) -> float:
    """<L† L> on a Gaussian state; vanishes iff the state is dark for L."""
    lam = model.jump_coeffs[which]
    idx = [state.index(m) for m in model.modes]
    if idx != sorted(idx):
        raise GaussianError("state modes must match model modes in order")
    n = state.n_modes
    om = symplectic_form(n)
    second = state.cov + 0.5j * om + np.outer(state.mean, state.mean)
    val = lam.conj() @ second @ lam
    return float(val.real)


@dataclass(frozen=True)
class EntanglementReport:
    epr_variance: float
    threshold: float
    entangled: bool


def entanglement_report(
    state: GaussianState,
    pair: tuple[ModeId | str, ModeId | str],
    threshold: float = EPR_BOUND,
) -> EntanglementReport:
    """EPR variance of the pair against the separability threshold.

    threshold defaults to the two-mode vacuum value 1; protocols with a
    shrinking macroscopic spin pass the decayed bound explicitly.
    """
    v = epr_variance(state, pair[0], pair[1])
    return EntanglementReport(v, threshold, bool(v < threshold))
