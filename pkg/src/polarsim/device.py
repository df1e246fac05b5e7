"""Register geometry, addressing frequencies and dipole-dipole couplings.

A register is a 1-D chain of molecules at lattice sites spaced by half the
trap wavelength, in a transverse bias field with a linear gradient. Each
site gets its own transition frequency (spectroscopic addressing); pairs of
sites are coupled by the always-on dipole-dipole interaction between their
induced dipoles, which splits each site's transition into conditional lines
depending on the neighbors' logical states.

The layout stores two addressing frequencies per site: ``nu_linear`` from
the linearized plan nu = 2B + d_ref*E/h with the plateau dipole
d_ref = 0.75*mu (this reproduces the quoted 3.5-6.0 GHz drive plan), and
``nu_exact`` = W1 - W0 from the Stark solver at the local field (used by
the simulator so the device is self-consistent).
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import stark, units

# Linearized addressing uses the plateau value of the effective dipole.
D_EFF_PLATEAU_FRACTION = 0.75

# Dense coupling tables are stored up to this register size; beyond it the
# table keeps neighbors within COUPLING_NEIGHBOR_RANGE sites (1/n^3 falloff
# puts the dropped terms below 1e-3 of nearest-neighbor).
DENSE_COUPLING_LIMIT = 64
COUPLING_NEIGHBOR_RANGE = 10

# Dipole field at distance r on the equatorial plane, for d in Debye and
# r in um, in V/cm: |E| = d/(4 pi eps0 r^3).
_FIELD_V_PER_CM_PER_DEBYE_UM3 = units.DEBYE / (4.0 * np.pi * units.EPSILON_0 * 1e-18) / 100.0


@dataclass(frozen=True)
class TrapGeometry:
    """1-D optical lattice with crossed-beam transverse confinement."""

    lambda_t_um: float          # trap laser wavelength, um
    length_mm: float            # array length, mm
    waist_um: float             # lattice beam waist, um
    transverse_waist_um: float  # transverse confinement waist, um
    depth_k: float              # trap depth, K

    def __post_init__(self):
        for name in ("lambda_t_um", "length_mm", "waist_um", "transverse_waist_um", "depth_k"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def site_spacing_um(self):
        return self.lambda_t_um / 2.0


#: Trap of the reference design: lambda_t = 1.1 um, L = 5 mm, w0 = 50 um,
#: transverse waist ~ lambda_t, U0 = 100 uK.
PAPER_TRAP = TrapGeometry(
    lambda_t_um=1.1, length_mm=5.0, waist_um=50.0, transverse_waist_um=1.1, depth_k=100e-6
)


@dataclass(frozen=True)
class FieldProfile:
    """Transverse bias field with a linear gradient along the array."""

    e0_v_per_cm: float
    gradient_v_per_cm_per_mm: float

    def field_at(self, x_um):
        """Local field E0 + x*dE/dx in V/cm, x in um."""
        return self.e0_v_per_cm + np.asarray(x_um) * 1e-3 * self.gradient_v_per_cm_per_mm


def paper_field_profile(mol=stark.KCS, trap=PAPER_TRAP, beta_lo=2.0, beta_hi=5.0):
    """Field profile spanning reduced fields [beta_lo, beta_hi] across the array."""
    e_lo = stark.field_at_beta(mol, beta_lo)
    e_hi = stark.field_at_beta(mol, beta_hi)
    return FieldProfile(
        e0_v_per_cm=e_lo,
        gradient_v_per_cm_per_mm=(e_hi - e_lo) / trap.length_mm,
    )


def rayleigh_length(waist_um, lambda_um):
    """Rayleigh length pi*w0^2/lambda of the lattice beam, in mm.

    A homogeneous array requires this to exceed the array length.
    """
    if waist_um <= 0 or lambda_um <= 0:
        raise ValueError("waist and wavelength must be positive")
    return np.pi * waist_um**2 / lambda_um * 1e-3


def site_count(length_mm, lambda_um):
    """Number of lattice sites (spacing lambda/2) fitting in the array length."""
    if length_mm <= 0 or lambda_um <= 0:
        raise ValueError("length and wavelength must be positive")
    # 1e-9 guard keeps exact multiples from landing one below due to rounding
    return int(math.floor(2.0 * length_mm * 1e3 / lambda_um + 1e-9))


def cnot_time(delta_nu_hz):
    """Minimum CNOT pulse time 1/(2 pi delta_nu) set by the coupling splitting."""
    if delta_nu_hz <= 0:
        raise ValueError(f"coupling splitting must be positive, got {delta_nu_hz}")
    return 1.0 / (2.0 * np.pi * delta_nu_hz)


class DeviceLayout:
    """Immutable per-site data of an N-molecule register.

    Arrays (length N unless noted): ``positions_um``, ``e_local`` (V/cm),
    ``beta``, ``w0_hz``/``w1_hz`` (qubit-level energies, Hz), ``d0``/``d1``
    (signed induced dipoles, Debye), ``d_eff``, ``mu_t`` (Debye),
    ``nu_linear``/``nu_exact`` (addressing frequencies, Hz).

    Couplings delta_nu_ab = d_eff,a * d_eff,b / (4 pi eps0 h r_ab^3) are
    available pairwise via :meth:`coupling`; :attr:`coupling_matrix` stores
    the dense table for N <= 64.
    """

    def __init__(self, molecule, trap, field, positions_um, solutions):
        self.molecule = molecule
        self.trap = trap
        self.field = field
        self.n = len(positions_um)
        self.positions_um = np.asarray(positions_um, dtype=float)
        self.positions_um.setflags(write=False)
        b = molecule.b_hz
        self.beta = np.array([s.beta for s in solutions])
        self.e_local = np.asarray(field.field_at(self.positions_um), dtype=float)
        self.w0_hz = np.array([s.w0 * b for s in solutions])
        self.w1_hz = np.array([s.w1 * b for s in solutions])
        self.d0 = np.array([s.d0 for s in solutions])
        self.d1 = np.array([s.d1 for s in solutions])
        self.d_eff = np.array([s.d_eff for s in solutions])
        self.mu_t = np.array([s.mu_t for s in solutions])
        self.jmax_used = max(s.jmax_used for s in solutions)
        self.nu_exact = self.w1_hz - self.w0_hz
        d_ref = D_EFF_PLATEAU_FRACTION * molecule.mu_debye
        self.nu_linear = 2.0 * b + units.dipole_field_to_frequency(d_ref, self.e_local)
        self.addressing_degenerate = bool(
            self.n >= 2 and np.any(np.diff(self.nu_linear) <= 0.0)
        )
        for a in (self.beta, self.e_local, self.w0_hz, self.w1_hz, self.d0,
                  self.d1, self.d_eff, self.mu_t, self.nu_exact, self.nu_linear):
            a.setflags(write=False)

    def separation_um(self, a, b):
        return abs(self.positions_um[a] - self.positions_um[b])

    def coupling(self, a, b):
        """Coupling shift delta_nu_ab in Hz (zero for a == b)."""
        if a == b:
            return 0.0
        return units.dipole_dipole_coupling(
            self.d_eff[a], self.d_eff[b], self.separation_um(a, b)
        )

    @cached_property
    def coupling_matrix(self):
        """Dense N x N coupling table, zero diagonal. Only for N <= 64."""
        if self.n > DENSE_COUPLING_LIMIT:
            raise ValueError(
                f"dense coupling table limited to N <= {DENSE_COUPLING_LIMIT}; "
                f"use coupling_pairs() for N = {self.n}"
            )
        m = np.zeros((self.n, self.n))
        for a in range(self.n):
            for b in range(a + 1, self.n):
                m[a, b] = m[b, a] = self.coupling(a, b)
        m.setflags(write=False)
        return m

    def coupling_pairs(self):
        """Stored coupling table as (a, b, delta_nu_hz) tuples with a < b.

        All pairs for N <= 64; neighbors within 10 sites beyond that.
        """
        reach = self.n if self.n <= DENSE_COUPLING_LIMIT else COUPLING_NEIGHBOR_RANGE
        out = []
        for a in range(self.n):
            for b in range(a + 1, min(a + reach + 1, self.n)):
                out.append((a, b, self.coupling(a, b)))
        return out

    def transition_shift(self, a, b, bit_b):
        """Shift of site a's transition frequency when neighbor b holds ``bit_b``.

        (d1_a - d0_a) * d(bit_b)_b / (4 pi eps0 h r^3); negative of the
        coupling for bit_b = 0 at low field since d1 - d0 = -d_eff there.
        """
        if a == b:
            raise ValueError("a neighbor is a different site")
        d_b = self.d1[b] if bit_b else self.d0[b]
        return units.dipole_dipole_coupling(
            self.d1[a] - self.d0[a], d_b, self.separation_um(a, b)
        )

    def line_center(self, a):
        """Site a's transition frequency with every neighbor at mean field.

        Midpoint of the conditional-line spread; the natural frequency for
        unconditional (one-bit) pulses.
        """
        nu = self.nu_exact[a]
        for b in range(self.n):
            if b != a:
                nu += 0.5 * (self.transition_shift(a, b, 0) + self.transition_shift(a, b, 1))
        return nu

    def conditional_line(self, target, control, control_bit):
        """Target's transition frequency conditioned on the control's state.

        Spectator sites (everything except control and target) enter at
        mean field, as for :meth:`line_center`.
        """
        nu = self.nu_exact[target] + self.transition_shift(target, control, control_bit)
        for b in range(self.n):
            if b != target and b != control:
                nu += 0.5 * (
                    self.transition_shift(target, b, 0) + self.transition_shift(target, b, 1)
                )
        return nu

    def max_coupling(self, a=None):
        """Largest coupling in the register, or involving site ``a``."""
        if self.n < 2:
            return 0.0
        sites = range(self.n) if a is None else [a]
        return max(
            self.coupling(s, b) for s in sites for b in range(self.n) if b != s
        )


def build_layout(mol, trap, field, n, jmax=stark.DEFAULT_JMAX):
    """Construct the register layout for the first ``n`` lattice sites.

    Sites sit at x_a = a * lambda_t/2 for a = 0..n-1. Rejects n beyond the
    geometric capacity of the trap and field profiles that are not strictly
    positive over the array.
    """
    if n < 1:
        raise ValueError(f"need at least one site, got n={n}")
    capacity = site_count(trap.length_mm, trap.lambda_t_um)
    if n > capacity:
        raise ValueError(f"n={n} exceeds the {capacity} sites fitting in the trap")
    positions = np.arange(n) * trap.site_spacing_um
    e_local = np.asarray(field.field_at(positions), dtype=float)
    if np.any(e_local <= 0):
        raise ValueError("bias field must stay positive over the whole array")
    solutions = [stark.qubit_levels(mol, e, jmax) for e in e_local]
    return DeviceLayout(mol, trap, field, positions, solutions)


def internal_field(layout, config):
    """Per-site field perturbation (V/cm) from the neighbors' dipoles.

    ``config`` is a logical bit-string (site 0 first); each neighbor
    contributes -d_b/(4 pi eps0 r^3) with d_b the induced dipole of its
    logical state. Uses the same neighbor truncation as the coupling table.
    """
    bits = _parse_config(config, layout.n)
    d_site = np.where(bits, layout.d1, layout.d0)
    reach = layout.n if layout.n <= DENSE_COUPLING_LIMIT else COUPLING_NEIGHBOR_RANGE
    out = np.zeros(layout.n)
    for a in range(layout.n):
        lo, hi = max(0, a - reach), min(layout.n, a + reach + 1)
        for b in range(lo, hi):
            if b != a:
                r = layout.separation_um(a, b)
                out[a] -= _FIELD_V_PER_CM_PER_DEBYE_UM3 * d_site[b] / r**3
    return out


def _parse_config(config, n):
    """Logical configuration as a 0/1 int array of length n, site 0 first."""
    if isinstance(config, str):
        if len(config) != n or any(c not in "01" for c in config):
            raise ValueError(f"config must be {n} characters of 0/1, got {config!r}")
        return np.array([int(c) for c in config])
    bits = np.asarray(config, dtype=int)
    if bits.shape != (n,) or np.any((bits != 0) & (bits != 1)):
        raise ValueError(f"config must be {n} bits, got {config!r}")
    return bits


def layout_to_json(layout):
    """Layout as a JSON-ready dict (sites plus stored coupling pairs)."""
    return {
        "molecule": {
            "name": layout.molecule.name,
            "B_Hz": layout.molecule.b_hz,
            "mu_D": layout.molecule.mu_debye,
        },
        "N": layout.n,
        "sites": [
            {
                "index": a,
                "x_um": float(layout.positions_um[a]),
                "E_Vcm": float(layout.e_local[a]),
                "nu_linear_Hz": float(layout.nu_linear[a]),
                "nu_exact_Hz": float(layout.nu_exact[a]),
                "d_eff_D": float(layout.d_eff[a]),
            }
            for a in range(layout.n)
        ],
        "couplings": [
            {"a": a, "b": b, "delta_nu_Hz": float(c)} for a, b, c in layout.coupling_pairs()
        ],
    }
