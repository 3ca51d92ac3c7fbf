"""Truncated Fock-space oracle.

Brute-force density-matrix simulation for up to three modes: conversion
from Gaussian data, symplectic maps applied through their Fock-space
generators, Lindblad master-equation integration, and quadrature moments.
Exists to certify the Gaussian engine, so it shares nothing with it
beyond the quadrature convention.  Dense/sparse matrices only; no
performance ambitions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .constants import VACUUM_VAR, symplectic_form
from .gaussian import GaussianError, GaussianState, symplectic_eigenvalues

MAX_MODES = 3
LEAK_WARN = 1e-3


@dataclass
class FockState:
    """Density matrix over a truncated product Fock space."""

    cutoffs: tuple[int, ...]
    rho: np.ndarray
    leak: float = 0.0

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dim(self) -> int:
        return int(np.prod([c + 1 for c in self.cutoffs]))

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))


def destroy(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1)


def mode_operators(cutoffs: tuple[int, ...]) -> list[np.ndarray]:
    """Annihilation operator for each mode on the product space."""
    dims = [c + 1 for c in cutoffs]
    ops = []
    for k, d in enumerate(dims):
        mats = [np.eye(dd) for dd in dims]
        mats[k] = destroy(cutoffs[k])
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        ops.append(out)
    return ops


def quadrature_operators(cutoffs: tuple[int, ...]) -> list[np.ndarray]:
    """x and p for each mode, interleaved (x1, p1, x2, p2, ...)."""
    out = []
    for a in mode_operators(cutoffs):
        ad = a.conj().T
        out.append((a + ad) / math.sqrt(2))
        out.append(-1j * (a - ad) / math.sqrt(2))
    return out


def vacuum_fock(cutoffs: tuple[int, ...]) -> FockState:
    dim = int(np.prod([c + 1 for c in cutoffs]))
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return FockState(tuple(cutoffs), rho)


def _thermal_diag(nbar: float, cutoff: int) -> np.ndarray:
    if nbar <= 0:
        p = np.zeros(cutoff + 1)
        p[0] = 1.0
        return p
    lam = nbar / (nbar + 1.0)
    return (1.0 / (nbar + 1.0)) * lam ** np.arange(cutoff + 1)


def williamson(cov: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Williamson decomposition cov = S diag(nu...) Sᵀ with S symplectic.

    Returns (S, nus) where nus are the symplectic eigenvalues (one per
    mode, each entering the diagonal twice).
    """
    n = cov.shape[0] // 2
    om = symplectic_form(n)
    root = sla.sqrtm(cov).real
    z = root @ om @ root
    # antisymmetric real Schur form: 2x2 blocks [[0, nu],[-nu, 0]]
    t, q = sla.schur(z, output="real")
    nus = np.zeros(n)
    for k in range(n):
        b = t[2 * k, 2 * k + 1]
        if b < 0:
            # swap the block's basis vectors to flip the sign
            q[:, [2 * k, 2 * k + 1]] = q[:, [2 * k + 1, 2 * k]]
            b = -b
        nus[k] = b
    dhalf_inv = np.diag(np.repeat(1.0 / np.sqrt(nus), 2))
    S = root @ q @ dhalf_inv
    return S, nus


def symplectic_generator(S: np.ndarray) -> np.ndarray:
    """Quadratic-Hamiltonian matrix h with S = exp(Ω h), h symmetric."""
    n = S.shape[0] // 2
    om = symplectic_form(n)
    logS = sla.logm(S)
    if np.max(np.abs(logS.imag)) > 1e-9:
        raise GaussianError("symplectic matrix has no real logarithm; split the map")
    logS = logS.real
    if np.max(np.abs(sla.expm(logS) - S)) > 1e-8 * max(1.0, float(np.max(np.abs(S)))):
        raise GaussianError("matrix logarithm failed to reproduce the map")
    h = -om @ logS
    return 0.5 * (h + h.T)


def apply_symplectic(state: FockState, S: np.ndarray, d: np.ndarray | None = None) -> FockState:
    """Conjugate rho by the Gaussian unitary of (S, d)."""
    h = symplectic_generator(S)
    quads = quadrature_operators(state.cutoffs)
    dim = state.dim
    H = np.zeros((dim, dim), dtype=complex)
    for i in range(2 * state.n_modes):
        for j in range(2 * state.n_modes):
            if h[i, j] != 0.0:
                H += 0.5 * h[i, j] * 0.5 * (quads[i] @ quads[j] + quads[j] @ quads[i])
    U = sla.expm(-1j * H)
    rho = U @ state.rho @ U.conj().T
    if d is not None and np.any(d != 0.0):
        om = symplectic_form(state.n_modes)
        G = np.zeros((dim, dim), dtype=complex)
        coeff = np.asarray(d, dtype=float) @ om
        for i in range(2 * state.n_modes):
            G += coeff[i] * quads[i]
        D = sla.expm(-1j * G)
        rho = D @ rho @ D.conj().T
    return FockState(state.cutoffs, rho, state.leak)


def from_gaussian(state: GaussianState, cutoff: int | tuple[int, ...] = 30) -> FockState:
    """Truncated density matrix of a Gaussian state.

    Thermal core from the Williamson decomposition, rotated by the
    Gaussian unitary of the Williamson S, then displaced.  The truncated
    weight is renormalized and reported as .leak; a warning fires above
    1e-3.
    """
    n = state.n_modes
    if n > MAX_MODES:
        raise GaussianError(f"fock oracle supports at most {MAX_MODES} modes, got {n}")
    if symplectic_eigenvalues(state.cov).min() < VACUUM_VAR - 1e-9:
        raise GaussianError("cannot build a Fock state from an unphysical covariance")
    cutoffs = tuple(np.broadcast_to(np.asarray(cutoff, dtype=int), (n,)))
    S, nus = williamson(state.cov)
    diags = [_thermal_diag(nu - VACUUM_VAR, c) for nu, c in zip(nus, cutoffs)]
    core = diags[0]
    for dvec in diags[1:]:
        core = np.kron(core, dvec)
    leak = 1.0 - float(core.sum())
    if leak > LEAK_WARN:
        warnings.warn(f"fock truncation leak {leak:.3e} exceeds {LEAK_WARN}", stacklevel=2)
    rho = np.diag((core / core.sum()).astype(complex))
    fs = FockState(cutoffs, rho, leak)
    return apply_symplectic(fs, S, state.mean)


def moments(state: FockState) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature mean vector and covariance matrix of a Fock state."""
    quads = quadrature_operators(state.cutoffs)
    k = len(quads)
    mean = np.array([float(np.real(np.trace(q @ state.rho))) for q in quads])
    cov = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            sym = 0.5 * (quads[i] @ quads[j] + quads[j] @ quads[i])
            cov[i, j] = cov[j, i] = float(np.real(np.trace(sym @ state.rho))) - mean[i] * mean[j]
    return mean, cov


def _liouvillian(jumps: list[np.ndarray], rates: list[float], dim: int) -> sparse.csr_matrix:
    """Sparse superoperator for sum_k r_k D[L_k], column-stacking convention."""
    eye = sparse.identity(dim, format="csr", dtype=complex)
    L_total = sparse.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for L, r in zip(jumps, rates):
        if r < 0:
            raise GaussianError(f"negative jump rate {r}")
        if r == 0.0:
            continue
        Ls = sparse.csr_matrix(L)
        LdL = (Ls.conj().T @ Ls).tocsr()
        term = sparse.kron(Ls.conj(), Ls, format="csr")
        term = term - 0.5 * sparse.kron(eye, LdL, format="csr")
        term = term - 0.5 * sparse.kron(LdL.T, eye, format="csr")
        L_total = L_total + r * term
    return L_total


def evolve_lindblad(
    state: FockState,
    jumps: list[np.ndarray],
    rates: list[float],
    t: float,
    hamiltonian: np.ndarray | None = None,
) -> FockState:
    """Integrate the Lindblad master equation for time t.

    Uses the exact action of the exponentiated superoperator on the
    vectorized density matrix; trace preservation is checked after.
    """
    if t < 0:
        raise GaussianError("t must be nonnegative")
    dim = state.dim
    L = _liouvillian(jumps, rates, dim)
    if hamiltonian is not None:
        eye = sparse.identity(dim, format="csr", dtype=complex)
        Hs = sparse.csr_matrix(hamiltonian)
        L = L + (-1j) * (sparse.kron(eye, Hs, format="csr") - sparse.kron(Hs.T, eye, format="csr"))
    if t == 0.0 or L.nnz == 0:
        return FockState(state.cutoffs, state.rho.copy(), state.leak)
    vec = state.rho.reshape(-1, order="F")
    out = expm_multiply(L * t, vec)
    rho = out.reshape((dim, dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.real(np.trace(rho)))
    if abs(tr - state.trace()) > 1e-8 * max(1.0, abs(state.trace())):
        raise GaussianError(f"Lindblad step lost trace: {tr} vs {state.trace()}")
    return FockState(state.cutoffs, rho, state.leak)


def steady_state_lindblad(
    state: FockState,
    jumps: list[np.ndarray],
    rates: list[float],
    relax_rate: float,
    rel_tol: float = 1e-10,
    max_time: float = 1e4,
) -> FockState:
    """Evolve until second moments stop changing (independent steady state)."""
    t_step = 4.0 / relax_rate
    current = state
    _, cov_prev = moments(current)
    t_total = 0.0
    while t_total < max_time / relax_rate:
        current = evolve_lindblad(current, jumps, rates, t_step)
        t_total += t_step
        _, cov = moments(current)
        if np.max(np.abs(cov - cov_prev)) < rel_tol * max(1.0, float(np.max(np.abs(cov)))):
            return current
        cov_prev = cov
    raise GaussianError("fock steady state did not converge")
