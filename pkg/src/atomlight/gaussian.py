"""Gaussian-state algebra over labeled bosonic modes.

States are (mean, covariance) pairs over an ordered set of modes;
maps are symplectic matrices with optional displacements.  All
operations are pure: they return new values and never mutate inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg as sla

from .constants import (
    COV_SYMMETRY_RTOL,
    EPR_BOUND,
    MIN_CONDITION_VAR,
    PHYSICALITY_TOL,
    SYMPLECTIC_TOL,
    VACUUM_VAR,
    symplectic_form,
)


class GaussianError(ValueError):
    """Raised on contract violations in Gaussian-state operations."""


class ModeKind(str, Enum):
    ATOMIC = "atomic"
    LIGHT_SIN = "light_sin"
    LIGHT_COS = "light_cos"
    LIGHT_SIDEBAND_UPPER = "light_sideband_upper"
    LIGHT_SIDEBAND_LOWER = "light_sideband_lower"
    MECHANICAL = "mechanical"
    READING_MODE = "reading_mode"


@dataclass(frozen=True)
class ModeId:
    """Identifier for one bosonic mode: a unique label plus a taxonomy kind."""

    label: str
    kind: ModeKind = ModeKind.ATOMIC

    def __str__(self) -> str:
        return self.label


def _as_modes(modes: Iterable[ModeId | str]) -> tuple[ModeId, ...]:
    out = []
    for m in modes:
        out.append(ModeId(m) if isinstance(m, str) else m)
    return tuple(out)


@dataclass(frozen=True)
class GaussianState:
    """Mean vector and covariance matrix over an ordered list of modes.

    mean has length 2n ordered (x1, p1, ..., xn, pn); cov is the symmetric
    2n x 2n matrix of second central moments, vacuum = (1/2) I.
    """

    modes: tuple[ModeId, ...]
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        modes = _as_modes(self.modes)
        object.__setattr__(self, "modes", modes)
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            raise GaussianError(f"duplicate mode labels: {labels}")
        n = len(modes)
        mean = np.asarray(self.mean, dtype=float).reshape(2 * n)
        cov = np.asarray(self.cov, dtype=float).reshape(2 * n, 2 * n)
        scale = max(1.0, float(np.max(np.abs(cov))))
        defect = float(np.max(np.abs(cov - cov.T)))
        if defect > COV_SYMMETRY_RTOL * scale * 100:
            raise GaussianError(f"covariance asymmetric (defect {defect:.3e})")
        cov = 0.5 * (cov + cov.T)
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def index(self, mode: ModeId | str) -> int:
        label = mode if isinstance(mode, str) else mode.label
        for i, m in enumerate(self.modes):
            if m.label == label:
                return i
        raise GaussianError(f"mode {label!r} not in state {[m.label for m in self.modes]}")

    def variance(self, mode: ModeId | str, quadrature: str = "x") -> float:
        i = 2 * self.index(mode) + (0 if quadrature == "x" else 1)
        return float(self.cov[i, i])

    def mean_of(self, mode: ModeId | str, quadrature: str = "x") -> float:
        i = 2 * self.index(mode) + (0 if quadrature == "x" else 1)
        return float(self.mean[i])


@dataclass(frozen=True)
class SymplecticMap:
    """Linear symplectic transformation S plus displacement d.

    input_modes fixes the quadrature ordering of columns, output_modes of
    rows; lengths match (the map relabels, it never adds or drops modes).
    Only exactly symplectic maps are representable; lossy channels live in
    the dissipative engine.
    """

    S: np.ndarray
    input_modes: tuple[ModeId, ...]
    output_modes: tuple[ModeId, ...]
    d: np.ndarray | None = None

    def __post_init__(self):
        ins = _as_modes(self.input_modes)
        outs = _as_modes(self.output_modes)
        object.__setattr__(self, "input_modes", ins)
        object.__setattr__(self, "output_modes", outs)
        if len(ins) != len(outs):
            raise GaussianError("input/output mode counts differ")
        n = len(ins)
        S = np.asarray(self.S, dtype=float).reshape(2 * n, 2 * n)
        d = np.zeros(2 * n) if self.d is None else np.asarray(self.d, dtype=float).reshape(2 * n)
        defect = symplectic_defect(S)
        if defect > SYMPLECTIC_TOL:
            raise GaussianError(f"matrix is not symplectic (defect {defect:.3e})")
        S.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "d", d)


@dataclass(frozen=True)
class PhysicalityReport:
    symplectic_eigenvalues: tuple[float, ...]
    min_eigenvalue_margin: float  # min nu_k - 1/2
    symmetry_defect: float
    physical: bool


def symplectic_defect(S: np.ndarray) -> float:
    """||S Ω Sᵀ - Ω||_max for a candidate symplectic matrix."""
    n = S.shape[0] // 2
    om = symplectic_form(n)
    return float(np.max(np.abs(S @ om @ S.T - om)))


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a covariance matrix (n values, sorted)."""
    n = cov.shape[0] // 2
    om = symplectic_form(n)
    ev = np.linalg.eigvals(1j * om @ cov)
    # eigenvalues come in +/- pairs; keep one of each
    return np.sort(np.abs(ev))[::2][:n]


def vacuum(modes: Sequence[ModeId | str]) -> GaussianState:
    """Vacuum state: zero mean, cov = (1/2) I."""
    modes = _as_modes(modes)
    if not modes:
        raise GaussianError("vacuum requires at least one mode")
    n = len(modes)
    return GaussianState(modes, np.zeros(2 * n), VACUUM_VAR * np.eye(2 * n))


def thermal(modes: Sequence[ModeId | str], nbar: float | Sequence[float]) -> GaussianState:
    """Thermal state(s) with mean occupation nbar per mode."""
    modes = _as_modes(modes)
    n = len(modes)
    nbars = np.broadcast_to(np.asarray(nbar, dtype=float), (n,))
    diag = np.repeat(nbars + VACUUM_VAR, 2)
    return GaussianState(modes, np.zeros(2 * n), np.diag(diag))


def squeezed_vacuum(mode: ModeId | str, r: float, phase: float = 0.0) -> GaussianState:
    """Single-mode squeezed vacuum; phase=0 squeezes x (var e^{-2r}/2)."""
    c, s = math.cos(phase), math.sin(phase)
    rot = np.array([[c, -s], [s, c]])
    core = np.diag([math.exp(-2 * r), math.exp(2 * r)]) * VACUUM_VAR
    return GaussianState(_as_modes([mode]), np.zeros(2), rot @ core @ rot.T)


def two_mode_squeezed(mode_a: ModeId | str, mode_b: ModeId | str, r: float) -> GaussianState:
    """Two-mode squeezed vacuum with cosh r = mu; EPR variance e^{-2r}."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    cov = VACUUM_VAR * np.array(
        [
            [ch, 0, sh, 0],
            [0, ch, 0, -sh],
            [sh, 0, ch, 0],
            [0, -sh, 0, ch],
        ]
    )
    return GaussianState(_as_modes([mode_a, mode_b]), np.zeros(4), cov)


def displace(state: GaussianState, mode: ModeId | str, dx: float = 0.0, dp: float = 0.0) -> GaussianState:
    i = state.index(mode)
    mean = state.mean.copy()
    mean[2 * i] += dx
    mean[2 * i + 1] += dp
    return GaussianState(state.modes, mean, state.cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state on the disjoint union of modes (block-diagonal cov)."""
    overlap = {m.label for m in a.modes} & {m.label for m in b.modes}
    if overlap:
        raise GaussianError(f"mode label collision: {sorted(overlap)}")
    modes = a.modes + b.modes
    mean = np.concatenate([a.mean, b.mean])
    cov = sla.block_diag(a.cov, b.cov)
    return GaussianState(modes, mean, cov)


def reduce(state: GaussianState, keep: Sequence[ModeId | str]) -> GaussianState:
    """Partial trace down to the kept modes (in the order given)."""
    keep = _as_modes(keep)
    idx = []
    for m in keep:
        i = state.index(m)
        idx.extend([2 * i, 2 * i + 1])
    idx = np.array(idx, dtype=int)
    return GaussianState(
        tuple(state.modes[state.index(m)] for m in keep),
        state.mean[idx],
        state.cov[np.ix_(idx, idx)],
    )


def apply_map(state: GaussianState, smap: SymplecticMap) -> GaussianState:
    """Apply a symplectic map to the subset of modes it addresses.

    Affected modes are relabeled slot-wise to the map's output modes;
    unaffected modes (and their cross-covariances) transform consistently.
    """
    positions = [state.index(m) for m in smap.input_modes]
    n = state.n_modes
    big = np.eye(2 * n)
    dfull = np.zeros(2 * n)
    for pi in positions:
        big[2 * pi : 2 * pi + 2, :] = 0.0
    for bi, pi in enumerate(positions):
        dfull[2 * pi : 2 * pi + 2] = smap.d[2 * bi : 2 * bi + 2]
        for bj, pj in enumerate(positions):
            big[2 * pi : 2 * pi + 2, 2 * pj : 2 * pj + 2] = smap.S[
                2 * bi : 2 * bi + 2, 2 * bj : 2 * bj + 2
            ]
    mean = big @ state.mean + dfull
    cov = big @ state.cov @ big.T
    new_modes = list(state.modes)
    for bi, pi in enumerate(positions):
        new_modes[pi] = smap.output_modes[bi]
    return GaussianState(tuple(new_modes), mean, cov)


def homodyne_condition(
    state: GaussianState,
    mode: ModeId | str,
    quadrature: str = "x",
    outcome: float | str = "sample",
    rng: np.random.Generator | None = None,
) -> tuple[GaussianState, float]:
    """Condition on an ideal homodyne measurement of one quadrature.

    The measured mode is removed; the remaining modes are updated by
    Gaussian conditioning (Schur complement on the measured quadrature).
    The conditional covariance is independent of the outcome value.
    outcome="sample" draws from the marginal using the caller's rng.
    """
    i = state.index(mode)
    q = 2 * i + (0 if quadrature == "x" else 1)
    var_q = float(state.cov[q, q])
    if var_q < MIN_CONDITION_VAR:
        raise GaussianError(
            f"measured quadrature variance {var_q:.3e} below {MIN_CONDITION_VAR}; "
            "singular conditioning indicates an upstream modeling bug"
        )
    if outcome == "sample":
        if rng is None:
            raise GaussianError("outcome='sample' requires an explicit rng")
        m = float(rng.normal(state.mean[q], math.sqrt(var_q)))
    else:
        m = float(outcome)

    keep = [j for j in range(2 * state.n_modes) if j not in (2 * i, 2 * i + 1)]
    keep = np.array(keep, dtype=int)
    cross = state.cov[keep, q]
    mean = state.mean[keep] + cross * (m - state.mean[q]) / var_q
    cov = state.cov[np.ix_(keep, keep)] - np.outer(cross, cross) / var_q
    modes = tuple(mm for j, mm in enumerate(state.modes) if j != i)
    return GaussianState(modes, mean, cov), m


def epr_variance(state: GaussianState, a: ModeId | str, b: ModeId | str) -> float:
    """var((x_a - x_b)/√2) + var((p_a + p_b)/√2); two-mode vacuum gives 1."""
    ia, ib = state.index(a), state.index(b)
    n = state.n_modes
    u = np.zeros(2 * n)
    v = np.zeros(2 * n)
    u[2 * ia], u[2 * ib] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    v[2 * ia + 1], v[2 * ib + 1] = 1 / math.sqrt(2), 1 / math.sqrt(2)
    return float(u @ state.cov @ u + v @ state.cov @ v)


def is_epr_entangled(state: GaussianState, a: ModeId | str, b: ModeId | str) -> bool:
    return epr_variance(state, a, b) < EPR_BOUND


def fidelity(a: GaussianState, b: GaussianState) -> float:
    """Uhlmann fidelity between Gaussian states (squared convention).

    F(a, a) = 1; for pure states F = |<psi_a|psi_b>|^2.  Valid for any
    number of modes and arbitrary mixed states.
    """
    if len(a.modes) != len(b.modes) or {m.label for m in a.modes} != {m.label for m in b.modes}:
        raise GaussianError("fidelity requires identical mode sets")
    # align b's ordering with a's
    if tuple(m.label for m in a.modes) != tuple(m.label for m in b.modes):
        b = reduce(b, [m.label for m in a.modes])
    for st in (a, b):
        if symplectic_eigenvalues(st.cov).min() < VACUUM_VAR - 1e-7:
            raise GaussianError("fidelity of an unphysical state is undefined")
    n = a.n_modes
    om = symplectic_form(n)
    s_sum = a.cov + b.cov
    s_inv = np.linalg.inv(s_sum)
    v_aux = om.T @ s_inv @ (om / 4.0 + b.cov @ om @ a.cov)
    m = v_aux @ om
    arg = np.eye(2 * n) + 0.25 * np.linalg.inv(m @ m)
    root = np.real(sla.sqrtm(arg))
    ftot4 = np.linalg.det(2.0 * (root + np.eye(2 * n)) @ v_aux)
    f0 = max(ftot4, 0.0) ** 0.25 / np.linalg.det(s_sum) ** 0.25
    delta = b.mean - a.mean
    f_sqrt = f0 * math.exp(-0.25 * float(delta @ s_inv @ delta))
    return float(np.clip(f_sqrt * f_sqrt, 0.0, 1.0))


def check_physical(state: GaussianState) -> PhysicalityReport:
    """Diagnostic report: symplectic spectrum, margin to 1/2, symmetry defect."""
    nus = symplectic_eigenvalues(state.cov)
    margin = float(nus.min() - VACUUM_VAR)
    sym = float(np.max(np.abs(state.cov - state.cov.T)))
    return PhysicalityReport(
        symplectic_eigenvalues=tuple(float(v) for v in nus),
        min_eigenvalue_margin=margin,
        symmetry_defect=sym,
        physical=margin >= -PHYSICALITY_TOL,
    )
