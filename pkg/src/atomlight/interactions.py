"""Symplectic maps for the tunable light-matter interface.

Builds the pulse-level input-output relations: the balanced (QND) maps
for a single cell and for two oppositely polarized cells, the imbalanced
maps parametrized by the asymmetry Z and swap rate gamma_s, their
long-interaction limit, and the temporal mode functions the light modes
live on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .constants import OMEGA_T_ADVISORY
from .gaussian import GaussianError, ModeId, ModeKind, SymplecticMap, _as_modes


@dataclass(frozen=True)
class InteractionParams:
    """Coupling parameters: asymmetry Z, swap rate gamma_s (1/s), pulse
    duration T (s), Larmor frequency Omega (rad/s).

    Derived: mu = (Z + 1/Z)/2, nu = (Z - 1/Z)/2 (so mu^2 - nu^2 = 1) and
    the effective coupling kappa = sqrt(1 - e^{-2 gamma_s T}) * Z.
    """

    Z: float
    gamma_s: float
    T: float
    Omega: float = 0.0

    def __post_init__(self):
        if self.Z <= 0:
            raise GaussianError(f"Z must be positive, got {self.Z}")
        if self.gamma_s < 0:
            raise GaussianError(f"gamma_s must be nonnegative, got {self.gamma_s}")
        if self.T <= 0:
            raise GaussianError(f"T must be positive, got {self.T}")
        if self.Omega != 0.0 and self.Omega * self.T < OMEGA_T_ADVISORY:
            warnings.warn(
                f"Omega*T = {self.Omega * self.T:.3g} < {OMEGA_T_ADVISORY}: "
                "sideband modes are only approximately canonical and independent",
                stacklevel=2,
            )

    @property
    def mu(self) -> float:
        return 0.5 * (self.Z + 1.0 / self.Z)

    @property
    def nu(self) -> float:
        return 0.5 * (self.Z - 1.0 / self.Z)

    @property
    def kappa(self) -> float:
        return kappa_effective(self.Z, self.gamma_s, self.T)


def coupling_params(Z: float, gamma_s: float, T: float) -> tuple[float, float, float]:
    """(mu, nu, kappa) from (Z, gamma_s, T)."""
    p = InteractionParams(Z, gamma_s, T)
    return p.mu, p.nu, p.kappa


def kappa_effective(Z: float, gamma_s: float, T: float) -> float:
    """Finite-duration coupling kappa = sqrt(1 - e^{-2 gamma_s T}) Z.

    This is the memory-protocol normalization; it is what multiplies the
    rising reading mode in the imbalanced input-output relations.
    """
    return math.sqrt(-math.expm1(-2.0 * gamma_s * T)) * Z


def kappa_qnd_limit(Z: float, gamma_s: float, T: float) -> float:
    """Leading-order coupling kappa = sqrt(2 gamma_s T) Z.

    The balanced (QND) relations arise as Z -> infinity with this product
    held fixed.  Agrees with kappa_effective to O(gamma_s T): the two
    normalizations differ only by finite-duration corrections.
    """
    return math.sqrt(2.0 * gamma_s * T) * Z


def _sector_qnd(kappa: float) -> np.ndarray:
    # (x_A, p_A, x_L, p_L): x_A += k p_L, x_L += k p_A, both p conserved
    return np.array(
        [
            [1.0, 0.0, 0.0, kappa],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, kappa, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def _sector_nonqnd(Z: float, gamma_s_T: float) -> np.ndarray:
    # (x_A, p_A, x_+, p_+) -> (x_A', p_A', x_-', p_-')
    a = math.exp(-gamma_s_T)
    b = math.sqrt(-math.expm1(-2.0 * gamma_s_T))
    return np.array(
        [
            [a, 0.0, 0.0, b * Z],
            [0.0, a, -b / Z, 0.0],
            [0.0, b * Z, a, 0.0],
            [-b / Z, 0.0, 0.0, a],
        ]
    )


def _sector_long_time(Z: float) -> np.ndarray:
    # full swap + squeeze: x_- = Z p_A, p_- = -x_A/Z, x_A' = Z p_+, p_A' = -x_+/Z
    return np.array(
        [
            [0.0, 0.0, 0.0, Z],
            [0.0, 0.0, -1.0 / Z, 0.0],
            [0.0, Z, 0.0, 0.0],
            [-1.0 / Z, 0.0, 0.0, 0.0],
        ]
    )


def _two_sector(block_cos: np.ndarray, block_sin: np.ndarray) -> np.ndarray:
    """Embed per-sector 4x4 blocks into the 8x8 (A_cos, A_sin, L_cos, L_sin) layout."""
    S = np.zeros((8, 8))
    for S4, slots in ((block_cos, (0, 2)), (block_sin, (1, 3))):
        for bi, pi in enumerate(slots):
            for bj, pj in enumerate(slots):
                S[2 * pi : 2 * pi + 2, 2 * pj : 2 * pj + 2] = S4[
                    2 * bi : 2 * bi + 2, 2 * bj : 2 * bj + 2
                ]
    return S


def qnd_single_pass(kappa: float, atomic: ModeId | str, light: ModeId | str) -> SymplecticMap:
    """Balanced single-cell, zero-field pass: x_A += kappa p_L, x_L += kappa p_A."""
    if kappa < 0:
        raise GaussianError("kappa must be nonnegative")
    modes = _as_modes([atomic, light])
    return SymplecticMap(_sector_qnd(kappa), modes, modes)


def qnd_two_cell(
    kappa: float,
    atomic_cos: ModeId | str,
    atomic_sin: ModeId | str,
    light_cos: ModeId | str,
    light_sin: ModeId | str,
) -> SymplecticMap:
    """Two antiparallel cells in a field: independent QND copies on the
    cos and sin sectors (all higher photonic backaction orders cancel)."""
    if kappa < 0:
        raise GaussianError("kappa must be nonnegative")
    modes = _as_modes([atomic_cos, atomic_sin, light_cos, light_sin])
    if len({m.label for m in modes}) != 4:
        raise GaussianError("two-cell map needs four distinct modes")
    S = _two_sector(_sector_qnd(kappa), _sector_qnd(kappa))
    return SymplecticMap(S, modes, modes)


def reading_mode_pass(
    params: InteractionParams,
    atomic: ModeId | str,
    reading_in: ModeId | str,
    reading_out: ModeId | str | None = None,
) -> SymplecticMap:
    """Imbalanced single-sector pass on (atoms, rising reading mode).

    Atoms decay as e^{-gamma_s T} while admixing the rising reading mode
    with weight sqrt(1 - e^{-2 gamma_s T}); the falling output reading
    mode carries the swapped atomic quadratures scaled by Z and -1/Z.
    """
    gT = params.gamma_s * params.T
    a, r_in = _as_modes([atomic, reading_in])
    r_out = r_in if reading_out is None else _as_modes([reading_out])[0]
    return SymplecticMap(_sector_nonqnd(params.Z, gT), (a, r_in), (a, r_out))


def sideband_to_reading(
    Z: float,
    upper: ModeId | str,
    lower: ModeId | str,
    reading: ModeId | str,
    complement: ModeId | str,
) -> SymplecticMap:
    """Assemble a reading mode from exponentially modulated sideband modes.

    x_r = mu x_us + nu p_ls, p_r = mu p_us + nu x_ls with mu, nu = (Z +/- 1/Z)/2;
    the orthogonal complement is kept explicit so the map stays symplectic.
    """
    mu = 0.5 * (Z + 1.0 / Z)
    nu = 0.5 * (Z - 1.0 / Z)
    S = np.array(
        [
            [mu, 0.0, 0.0, nu],
            [0.0, mu, nu, 0.0],
            [0.0, nu, mu, 0.0],
            [nu, 0.0, 0.0, mu],
        ]
    )
    return SymplecticMap(S, _as_modes([upper, lower]), _as_modes([reading, complement]))


def nonqnd_single_cell(
    params: InteractionParams,
    atomic: ModeId | str,
    upper_sideband: ModeId | str,
    lower_sideband: ModeId | str,
) -> SymplecticMap:
    """Imbalanced single cell in a field, sidebands made explicit.

    Composes the sideband-to-reading-mode assembly with the reading-mode
    pass; output modes are (atoms, falling reading mode, spectator
    complement).  The composite is exactly symplectic.
    """
    a, us, ls = _as_modes([atomic, upper_sideband, lower_sideband])
    r_in = ModeId(f"{us.label}*read+", ModeKind.READING_MODE)
    r_out = ModeId(f"{us.label}*read-", ModeKind.READING_MODE)
    comp = ModeId(f"{us.label}*comp", ModeKind.READING_MODE)
    asm = sideband_to_reading(params.Z, us, ls, r_in, comp)
    core = reading_mode_pass(params, a, r_in, r_out)
    # compose on (a, us, ls): S_total = core_embedded @ asm_embedded
    asm_full = np.zeros((6, 6))
    asm_full[:2, :2] = np.eye(2)
    asm_full[2:, 2:] = asm.S
    core_full = np.zeros((6, 6))
    core_full[:4, :4] = core.S
    core_full[4:, 4:] = np.eye(2)
    return SymplecticMap(core_full @ asm_full, (a, us, ls), (a, r_out, comp))


def nonqnd_two_cell(
    params: InteractionParams,
    atomic_cos: ModeId | str,
    atomic_sin: ModeId | str,
    reading_cos: ModeId | str,
    reading_sin: ModeId | str,
) -> SymplecticMap:
    """Imbalanced two-cell map: independent imbalanced passes on the cos
    and sin sectors; atomic quadratures decay as e^{-gamma_s T} and the
    reading-mode admixture carries the diag(Z, -1/Z) structure."""
    gT = params.gamma_s * params.T
    modes = _as_modes([atomic_cos, atomic_sin, reading_cos, reading_sin])
    if len({m.label for m in modes}) != 4:
        raise GaussianError("two-cell map needs four distinct modes")
    S4 = _sector_nonqnd(params.Z, gT)
    S = _two_sector(S4, S4)
    return SymplecticMap(S, modes, modes)


def long_time_limit(
    Z: float,
    atomic_cos: ModeId | str,
    atomic_sin: ModeId | str,
    reading_cos: ModeId | str,
    reading_sin: ModeId | str,
) -> SymplecticMap:
    """gamma_s T -> infinity limit: light and atoms swap states and each
    is squeezed by Z^2 (vacuum in gives var(p_-) = 1/(2 Z^2))."""
    if Z <= 0:
        raise GaussianError("Z must be positive")
    modes = _as_modes([atomic_cos, atomic_sin, reading_cos, reading_sin])
    S4 = _sector_long_time(Z)
    return SymplecticMap(_two_sector(S4, S4), modes, modes)


# ---------------------------------------------------------------------------
# temporal mode functions


@dataclass(frozen=True)
class ModeFunctionSpec:
    """Envelope of a temporal light mode on [0, T].

    kind: flat | cos_modulated | sin_modulated | exp_rising | exp_falling.
    rate is the exponential rate (1/s) for the exponential kinds; omega is
    the carrier (rad/s) for the modulated kinds.  The envelope carries the
    normalization (1/T) Int f(t)^2 dt = 1 (exactly for flat/exponential,
    to O(1/(omega T)) for the modulated kinds).
    """

    kind: str
    T: float
    rate: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.kind not in ("flat", "cos_modulated", "sin_modulated", "exp_rising", "exp_falling"):
            raise GaussianError(f"unknown mode-function kind {self.kind!r}")
        if self.T <= 0:
            raise GaussianError("T must be positive")
        if self.kind.startswith("exp") and self.rate <= 0:
            raise GaussianError("exponential mode functions need rate > 0")

    @property
    def normalization(self) -> float:
        """Prefactor c with (1/T) Int (c * shape)^2 dt = 1."""
        if self.kind == "flat":
            return 1.0
        if self.kind in ("cos_modulated", "sin_modulated"):
            return math.sqrt(2.0)
        # rising is the time-reverse of falling: same prefactor, shifted shape
        gT = self.rate * self.T
        return math.sqrt(2.0 * gT / -math.expm1(-2.0 * gT))


def mode_function(spec: ModeFunctionSpec, t: float) -> float:
    """Normalized envelope value at time t in [0, T]."""
    if not 0.0 <= t <= spec.T:
        raise GaussianError(f"t = {t} outside [0, {spec.T}]")
    c = spec.normalization
    if spec.kind == "flat":
        return c
    if spec.kind == "cos_modulated":
        return c * math.cos(spec.omega * t)
    if spec.kind == "sin_modulated":
        return c * math.sin(spec.omega * t)
    if spec.kind == "exp_rising":
        return c * math.exp(spec.rate * (t - spec.T))
    return c * math.exp(-spec.rate * t)


def mode_overlap(f: ModeFunctionSpec, g: ModeFunctionSpec) -> float:
    """(1/T) Int f(t) g(t) dt by numerical quadrature (same T required)."""
    if abs(f.T - g.T) > 1e-15 * max(f.T, g.T):
        raise GaussianError("overlap requires equal durations")
    val, _ = quad(lambda t: mode_function(f, t) * mode_function(g, t), 0.0, f.T, limit=400)
    return val / f.T
