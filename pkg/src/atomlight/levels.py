"""Interaction asymmetry Z from atomic level structure.

Coherently interfering Raman paths through the excited hyperfine manifold
set the branching ratio r between the two ground-state transfer
directions; Z follows from Z^2 = (r+1)/(r-1).  Angular-momentum algebra
(Clebsch-Gordan, Wigner 6j) is done with exact rational intermediates to
avoid catastrophic cancellation, floats only at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import yaml

from .gaussian import GaussianError


class LevelError(ValueError):
    """Raised on invalid level-structure inputs."""


def _half(x: float) -> int:
    """Doubled quantum number as exact int; rejects non-half-integers."""
    d = round(2 * x)
    if abs(2 * x - d) > 1e-9:
        raise LevelError(f"quantum number {x} is not half-integer")
    return int(d)


def _fact(n: int) -> int:
    if n < 0:
        raise LevelError("negative factorial in angular momentum algebra")
    return math.factorial(n)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.

    Racah's closed sum with exact Fraction intermediates; returns 0 for
    M != m1 + m2 or violated triangle conditions.
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_half(v) for v in (j1, m1, j2, m2, J, M))
    if tM != tm1 + tm2:
        return 0.0
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2):
        return 0.0
    if (tj1 + tj2 + tJ) % 2 != 0 or abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if (tj1 + tm1) % 2 != 0 or (tj2 + tm2) % 2 != 0 or (tJ + tM) % 2 != 0:
        return 0.0

    def f(tx: int) -> int:
        # factorial of a doubled-integer/2 quantity, must be integral
        if tx % 2 != 0:
            raise LevelError("non-integer factorial argument")
        return _fact(tx // 2)

    pref = Fraction(
        (tJ + 1)
        * f(tJ + tj1 - tj2)
        * f(tJ - tj1 + tj2)
        * f(tj1 + tj2 - tJ)
        * f(tJ + tM)
        * f(tJ - tM)
        * f(tj1 - tm1)
        * f(tj1 + tm1)
        * f(tj2 - tm2)
        * f(tj2 + tm2),
        f(tj1 + tj2 + tJ + 2),
    )
    total = Fraction(0)
    k_min = max(0, (tj2 - tJ - tm1) // 2, (tj1 + tm2 - tJ) // 2)
    k_max = min((tj1 + tj2 - tJ) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    for k in range(k_min, k_max + 1):
        denom = (
            _fact(k)
            * f(tj1 + tj2 - tJ - 2 * k)
            * f(tj1 - tm1 - 2 * k)
            * f(tj2 + tm2 - 2 * k)
            * f(tJ - tj2 + tm1 + 2 * k)
            * f(tJ - tj1 - tm2 + 2 * k)
        )
        total += Fraction((-1) ** k, denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


def _triangle(ta: int, tb: int, tc: int) -> Fraction | None:
    """Delta(abc) as an exact Fraction, or None if the triad is forbidden."""
    if (ta + tb + tc) % 2 != 0:
        return None
    if not (abs(ta - tb) <= tc <= ta + tb):
        return None
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6} via the Racah sum formula."""
    t = [_half(v) for v in (j1, j2, j3, j4, j5, j6)]
    tj1, tj2, tj3, tj4, tj5, tj6 = t
    tris = [
        _triangle(tj1, tj2, tj3),
        _triangle(tj1, tj5, tj6),
        _triangle(tj4, tj2, tj6),
        _triangle(tj4, tj5, tj3),
    ]
    if any(tr is None for tr in tris):
        return 0.0
    pref = Fraction(1)
    for tr in tris:
        pref *= tr
    t_min = max(tj1 + tj2 + tj3, tj1 + tj5 + tj6, tj4 + tj2 + tj6, tj4 + tj5 + tj3) // 2
    t_max = min(tj1 + tj2 + tj4 + tj5, tj2 + tj3 + tj5 + tj6, tj1 + tj3 + tj4 + tj6) // 2
    total = Fraction(0)
    for tt in range(t_min, t_max + 1):
        denom = (
            _fact(tt - (tj1 + tj2 + tj3) // 2)
            * _fact(tt - (tj1 + tj5 + tj6) // 2)
            * _fact(tt - (tj4 + tj2 + tj6) // 2)
            * _fact(tt - (tj4 + tj5 + tj3) // 2)
            * _fact((tj1 + tj2 + tj4 + tj5) // 2 - tt)
            * _fact((tj2 + tj3 + tj5 + tj6) // 2 - tt)
            * _fact((tj1 + tj3 + tj4 + tj6) // 2 - tt)
        )
        total += Fraction((-1) ** tt * _fact(tt + 1), denom)
    if total == 0:
        return 0.0
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(pref * total * total))


# ---------------------------------------------------------------------------
# level schemes


@dataclass(frozen=True)
class ExcitedLevel:
    name: str
    F: float
    m_F: float
    detuning: float  # rad/s, laser frequency minus transition frequency
    linewidth: float  # rad/s


@dataclass(frozen=True)
class DipolePath:
    """One Raman path src -> via -> dst with combined amplitude c.

    c is the product of the two dimensionless dipole amplitudes (drive leg
    times emission leg); signs carry the interference structure.
    """

    src: str
    via: str
    dst: str
    coefficient: float


@dataclass(frozen=True)
class LevelScheme:
    ground_levels: tuple[tuple[str, float, float], ...]  # (name, F, m_F)
    excited_levels: tuple[ExcitedLevel, ...]
    dipole_paths: tuple[DipolePath, ...]
    rabi_frequency: float = 1.0  # rad/s

    def __post_init__(self):
        for lvl in self.excited_levels:
            if lvl.linewidth > 0 and abs(lvl.detuning) < 10 * lvl.linewidth:
                import warnings

                warnings.warn(
                    f"level {lvl.name}: |detuning| < 10 linewidths, "
                    "dispersive treatment is marginal",
                    stacklevel=2,
                )

    def excited(self, name: str) -> ExcitedLevel:
        for lvl in self.excited_levels:
            if lvl.name == name:
                return lvl
        raise LevelError(f"unknown excited level {name!r}")


@dataclass(frozen=True)
class BranchingResult:
    gamma_up_down: float
    gamma_down_up: float
    r: float
    Z: float
    mu: float
    nu: float
    active_dominated: bool = False
    degenerate: bool = False


def path_rate(scheme: LevelScheme, src: str, dst: str) -> float:
    """Effective rate for src -> dst: coherent sum over excited levels,
    Gamma = Omega_R^2 |sum_l c_l / Delta_l|^2 * gamma."""
    paths = [p for p in scheme.dipole_paths if p.src == src and p.dst == dst]
    if not paths:
        raise LevelError(f"no dipole path connects {src!r} -> {dst!r}")
    amp = 0.0
    gamma = 0.0
    for p in paths:
        lvl = scheme.excited(p.via)
        amp += p.coefficient / lvl.detuning
        gamma = max(gamma, lvl.linewidth)
    if gamma == 0.0:
        gamma = 1.0  # dimensionless toy schemes
    return scheme.rabi_frequency**2 * amp * amp * gamma


def z_from_scheme(scheme: LevelScheme, up: str = "up", down: str = "down") -> BranchingResult:
    """Branching ratio r and asymmetry Z from a level scheme.

    r^2 = Gamma(down->up)/Gamma(up->down); r > 1 gives the passive-dominated
    branch Z = sqrt((r+1)/(r-1)) > 1.  r < 1 is returned on the Z < 1
    branch with active_dominated set (the dominant process is pair
    creation); r = 1 is degenerate (balanced, QND-like), Z = inf.

    Large-detuning behavior: as the detuning grows the two rates converge,
    r -> 1 from above for blue detuning, and Z -> infinity; the balanced
    limit is the same point described either way.
    """
    g_ud = path_rate(scheme, up, down)
    g_du = path_rate(scheme, down, up)
    if g_ud <= 0 or g_du <= 0:
        raise LevelError("both transition directions need nonzero rate")
    r = math.sqrt(g_du / g_ud)
    if abs(r - 1.0) < 1e-12:
        return BranchingResult(g_ud, g_du, r, math.inf, math.inf, math.inf, degenerate=True)
    if r > 1.0:
        Z = math.sqrt((r + 1.0) / (r - 1.0))
        active = False
    else:
        rr = 1.0 / r
        Z = 1.0 / math.sqrt((rr + 1.0) / (rr - 1.0))
        active = True
    mu = 0.5 * (Z + 1.0 / Z)
    nu = 0.5 * (Z - 1.0 / Z)
    return BranchingResult(g_ud, g_du, r, Z, mu, nu, active_dominated=active)


# ---------------------------------------------------------------------------
# cesium D2


def _wigner_eckart_weight(F: float, Fp: float, J: float, Jp: float, I: float) -> float:
    """g(F')^2 with <F' m'|d_q|F m> = CG(F,m;1,q|F',m') g(F').

    g^2 = (2F+1) {J J' 1; F' F I}^2 (common J-reduced factor dropped).
    The sign of g cancels in every up-and-down Raman path.
    """
    return (2 * F + 1) * wigner_6j(J, Jp, 1, Fp, F, I) ** 2


def dipole_amplitude(F: float, m: float, Fp: float, mp: float, q: int, J: float, Jp: float, I: float) -> float:
    """Relative amplitude for |F m> + photon(q) -> |F' m'> within one line."""
    return clebsch_gordan(F, m, 1, q, Fp, mp) * math.sqrt(_wigner_eckart_weight(F, Fp, J, Jp, I))


def _default_data_file() -> Path:
    return Path(str(resources.files("atomlight").joinpath("data/cesium_d2.yaml")))


def cesium_d2_tables(
    detuning_mhz: float = 850.0,
    data_file: str | Path | None = None,
    drive_polarization: str = "y",
) -> LevelScheme:
    """Cesium D2 scheme for the two-level encoding |4,4>, |4,3>.

    detuning_mhz > 0 is blue of the F'=5 level; the drive polarization
    selects which transition legs are classical ("y": sigma drive + pi
    quantum field; "x": pi drive + sigma quantum field, which exchanges
    the level sets feeding the two transfer directions).
    """
    path = Path(data_file) if data_file is not None else _default_data_file()
    raw = yaml.safe_load(path.read_text())
    I = float(raw["nuclear_spin"])
    J = float(raw["ground"]["J"])
    F = float(raw["ground"]["F"])
    Jp = float(raw["excited"]["J"])
    gamma = 2 * math.pi * 1e6 * float(raw["excited"]["linewidth_mhz"])
    iv = raw["excited"]["hyperfine_intervals_mhz"]
    # detunings relative to the reference F'=5, in MHz then rad/s
    offsets = {5.0: 0.0, 4.0: iv["5-4"], 3.0: iv["5-4"] + iv["4-3"], 2.0: iv["5-4"] + iv["4-3"] + iv["3-2"]}

    m_up, m_dn = F, F - 1.0  # |up> = |4,4>, |down> = |4,3>
    excited = []
    paths = []
    fprimes = [fp for fp in (2.0, 3.0, 4.0, 5.0) if abs(F - fp) <= Jp + 0.6]

    if drive_polarization == "y":
        q_drive_active, q_drive_passive, q_emit = -1, +1, 0
    elif drive_polarization == "x":
        # pi drive, sigma-polarized quantum field
        q_drive_active, q_drive_passive, q_emit = 0, 0, None
    else:
        raise LevelError(f"unknown drive polarization {drive_polarization!r}")

    for fp in fprimes:
        for mp in sorted({m_up - 1, m_up, m_dn, m_dn + 1}):
            if abs(mp) > fp:
                continue
            name = f"F{int(fp)}m{int(mp)}"
            if any(l.name == name for l in excited):
                continue
            det = 2 * math.pi * 1e6 * (detuning_mhz + offsets[fp])
            excited.append(ExcitedLevel(name, fp, mp, det, gamma))

    def amp(m, fp, mp, q):
        return dipole_amplitude(F, m, fp, mp, q, J, Jp, I)

    if drive_polarization == "y":
        # active (up -> down, blue sideband): sigma- drive to m'=3, pi emission
        for fp in fprimes:
            mp = m_up - 1
            if abs(mp) > fp:
                continue
            c = amp(m_up, fp, mp, -1) * amp(m_dn, fp, mp, 0)
            if c != 0.0:
                paths.append(DipolePath("up", f"F{int(fp)}m{int(mp)}", "down", c))
        # passive (down -> up, red sideband): sigma+ drive to m'=4, pi emission
        for fp in fprimes:
            mp = m_dn + 1
            if abs(mp) > fp:
                continue
            c = amp(m_dn, fp, mp, +1) * amp(m_up, fp, mp, 0)
            if c != 0.0:
                paths.append(DipolePath("down", f"F{int(fp)}m{int(mp)}", "up", c))
    else:
        # pi drive: active goes up->(m'=4)->down via sigma+ emission,
        # passive down->(m'=3)->up via sigma- emission; the F' sets swap.
        for fp in fprimes:
            mp = m_up
            if abs(mp) > fp:
                continue
            c = amp(m_up, fp, mp, 0) * amp(m_dn, fp, mp, +1)
            if c != 0.0:
                paths.append(DipolePath("up", f"F{int(fp)}m{int(mp)}", "down", c))
        for fp in fprimes:
            mp = m_dn
            if abs(mp) > fp:
                continue
            c = amp(m_dn, fp, mp, 0) * amp(m_up, fp, mp, -1)
            if c != 0.0:
                paths.append(DipolePath("down", f"F{int(fp)}m{int(mp)}", "up", c))

    used = {p.via for p in paths}
    excited = tuple(l for l in excited if l.name in used)
    return LevelScheme(
        ground_levels=(("up", F, m_up), ("down", F, m_dn)),
        excited_levels=excited,
        dipole_paths=tuple(paths),
        rabi_frequency=1.0,
    )
