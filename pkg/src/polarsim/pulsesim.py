"""State-vector simulation of frequency-addressed pulses on the register.

Each molecule is truncated to its two pendular qubit levels. The lab-frame
Hamiltonian is diagonal in the computational basis (site Stark energies
plus the always-on dipole-dipole couplings) except during drive pulses,
when a global rf field couples every pair of basis states differing in one
bit. Pulses are evolved in the rotating-wave approximation in a frame
rotating at the pulse frequency for every qubit; the frame is entered and
left with the state's absolute clock, so schedules mixing frequencies and
split pulses compose exactly.

Rabi-frequency convention: a resonant pulse of Rabi frequency Omega flips
a qubit in t_pi = 1/(2*Omega).

Basis ordering: site 0 is the least significant bit of the basis-state
index; bit-strings are written site 0 first ("0110" puts site 1 and
site 2 in |1>).
"""

import weakref
from dataclasses import dataclass

import numpy as np

from . import units

#: Hard cap on register size for dense 2^N state vectors.
MAX_QUBITS = 14

_NORM_TOL = 1e-10
_TIME_TOL = 1e-15


class SimulationError(ValueError):
    """Invalid state, pulse, or schedule."""


def bits_to_index(bits, n):
    """Basis index of a bit-string (site 0 first, site 0 = LSB)."""
    if isinstance(bits, str):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise SimulationError(f"bit-string must be {n} chars of 0/1, got {bits!r}")
        values = [int(c) for c in bits]
    else:
        values = list(bits)
        if len(values) != n or any(v not in (0, 1) for v in values):
            raise SimulationError(f"bit-string must be {n} bits, got {bits!r}")
    return sum(v << a for a, v in enumerate(values))


def index_to_bits(index, n):
    """Bit-string (site 0 first) of a basis index."""
    return "".join("1" if (index >> a) & 1 else "0" for a in range(n))


class RegisterState:
    """Normalized state vector of the N-molecule register with a lab clock."""

    __slots__ = ("n", "amplitudes", "time", "__weakref__")

    def __init__(self, n, amplitudes, time=0.0):
        if n < 1 or n > MAX_QUBITS:
            raise SimulationError(f"register size must be 1..{MAX_QUBITS}, got {n}")
        amps = np.array(amplitudes, dtype=np.complex128)  # own copy, frozen below
        if amps.shape != (2**n,):
            raise SimulationError(f"need 2^{n} amplitudes, got shape {amps.shape}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise SimulationError(f"state not normalized: sum |a|^2 = {norm!r}")
        self.n = n
        self.amplitudes = amps
        self.time = float(time)
        amps.setflags(write=False)

    @classmethod
    def ground(cls, n, time=0.0):
        """All molecules in |0>."""
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n, amps, time)

    @classmethod
    def basis_state(cls, n, bits, time=0.0):
        """Computational basis state from a bit-string (site 0 first)."""
        amps = np.zeros(2**n, dtype=np.complex128)
        amps[bits_to_index(bits, n)] = 1.0
        return cls(n, amps, time)

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def population(self, bits):
        """Probability of one basis state given as a bit-string."""
        return float(np.abs(self.amplitudes[bits_to_index(bits, self.n)]) ** 2)


@dataclass(frozen=True)
class Pulse:
    """Rectangular drive segment: global rf field at one frequency.

    ``rabi`` is the on-resonance Rabi frequency Omega (t_pi = 1/(2*Omega));
    ``phase`` is the drive phase of cos(2 pi f t + phase) on the absolute
    lab clock.
    """

    start: float          # s
    duration: float       # s
    frequency: float      # Hz
    rabi: float           # Hz
    phase: float = 0.0    # rad

    def __post_init__(self):
        if self.start < 0 or not np.isfinite(self.start):
            raise SimulationError(f"pulse start must be >= 0, got {self.start}")
        if self.duration <= 0 or not np.isfinite(self.duration):
            raise SimulationError(f"pulse duration must be positive, got {self.duration}")
        if self.rabi < 0 or not np.isfinite(self.rabi):
            raise SimulationError(f"Rabi frequency must be >= 0, got {self.rabi}")

    @property
    def end(self):
        return self.start + self.duration


@dataclass(frozen=True)
class DephasingEvent:
    """A scattering event modeled as an instantaneous Z-phase kick."""

    time: float
    site: int
    phase_kick: float


@dataclass(frozen=True)
class ScatteringNoise:
    """Per-site Poisson dephasing at the photon-scattering rate."""

    rate_per_s: float
    seed: int

    def __post_init__(self):
        if self.rate_per_s < 0:
            raise SimulationError(f"scattering rate must be >= 0, got {self.rate_per_s}")


@dataclass(frozen=True)
class MeasurementRecord:
    """Per-site readout outcomes: 0, 1, or 'lost' (detector inefficiency)."""

    outcomes: tuple
    seed: int


# Cached per-layout basis tables; keyed weakly so layouts can be collected.
_DIAG_CACHE = weakref.WeakKeyDictionary()


def _bit_table(n):
    """(2^n, n) array of bit values, site 0 = LSB."""
    return (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1


def diagonal_energies(layout):
    """W(s)/h for every basis state s, as a (2^N,) array in Hz.

    W(s) = sum_a w(s_a, E_a) + sum_{a<b} d(s_a) d(s_b)/(4 pi eps0 r_ab^3):
    the diagonal of the lab-frame Hamiltonian.
    """
    cached = _DIAG_CACHE.get(layout)
    if cached is not None:
        return cached
    n = layout.n
    if n > MAX_QUBITS:
        raise SimulationError(f"register too large to simulate: N={n} > {MAX_QUBITS}")
    bits = _bit_table(n)
    diag = bits @ layout.w1_hz + (1 - bits) @ layout.w0_hz
    if n >= 2:
        d_site = np.where(bits, layout.d1, layout.d0)
        r = np.abs(layout.positions_um[:, None] - layout.positions_um[None, :])
        np.fill_diagonal(r, 1.0)
        kmat = units.dipole_dipole_coupling(1.0, 1.0, r)
        np.fill_diagonal(kmat, 0.0)
        diag = diag + 0.5 * np.einsum("si,ij,sj->s", d_site, kmat, d_site)
    diag.setflags(write=False)
    _DIAG_CACHE[layout] = diag
    return diag


def config_energy(layout, config):
    """Total energy W(s)/h in Hz of one logical configuration."""
    return float(diagonal_energies(layout)[bits_to_index(config, layout.n)])


def _popcounts(n):
    return _bit_table(n).sum(axis=1)


def evolve_idle(state, duration, layout):
    """Free evolution: diagonal phase accrual under Stark + coupling energies."""
    if duration < 0:
        raise SimulationError(f"idle duration must be >= 0, got {duration}")
    if duration == 0:
        return state
    diag = diagonal_energies(layout)
    amps = state.amplitudes * np.exp(-2j * np.pi * diag * duration)
    return RegisterState(state.n, amps, state.time + duration)


def evolve_pulse(state, pulse, layout):
    """Evolve through one rectangular pulse (RWA, exact exponentiation).

    In the frame rotating at the pulse frequency for every qubit the
    Hamiltonian is time-independent: diagonal W(s)/h - f * popcount(s),
    off-diagonal (Omega/2) e^{-i phase} between states differing in one
    bit. The frame transformation uses the absolute lab clock, so the
    pulse may start after the state's clock (the gap is idled) but not
    before it.
    """
    if layout.n != state.n:
        raise SimulationError(f"layout has {layout.n} sites, state has {state.n}")
    if pulse.start < state.time - _TIME_TOL * max(1.0, abs(state.time)):
        raise SimulationError(
            f"pulse starts at {pulse.start} but the state clock is already at {state.time}"
        )
    if pulse.start > state.time:
        state = evolve_idle(state, pulse.start - state.time, layout)
    n = state.n
    dim = 2**n
    pops = _popcounts(n)
    f = pulse.frequency
    ham = np.zeros((dim, dim), dtype=np.complex128)
    ham[np.arange(dim), np.arange(dim)] = diagonal_energies(layout) - f * pops
    if pulse.rabi > 0:
        half = 0.5 * pulse.rabi * np.exp(-1j * pulse.phase)
        for a in range(n):
            low = np.nonzero(((np.arange(dim) >> a) & 1) == 0)[0]
            high = low + (1 << a)
            ham[high, low] += half
            ham[low, high] += np.conj(half)
    t0 = state.time
    amps = state.amplitudes * np.exp(2j * np.pi * f * pops * t0)
    w, v = np.linalg.eigh(ham)
    amps = v @ (np.exp(-2j * np.pi * w * pulse.duration) * (v.conj().T @ amps))
    amps = amps * np.exp(-2j * np.pi * f * pops * (t0 + pulse.duration))
    return RegisterState(n, amps, t0 + pulse.duration)


def _apply_phase_kick(state, site, phase):
    kick = np.where(_bit_table(state.n)[:, site] == 1, np.exp(-1j * phase), 1.0)
    return RegisterState(state.n, state.amplitudes * kick, state.time)


def _sample_events(noise, n, t_begin, t_end):
    """Poisson dephasing events over [t_begin, t_end], sorted by time."""
    rng = np.random.default_rng(noise.seed)
    span = t_end - t_begin
    events = []
    for site in range(n):
        count = rng.poisson(noise.rate_per_s * span)
        times = t_begin + span * rng.random(count)
        phases = 2.0 * np.pi * rng.random(count)
        events.extend(DephasingEvent(float(t), site, float(p)) for t, p in zip(times, phases))
    events.sort(key=lambda e: (e.time, e.site))
    return events


def _validate_pulse_order(pulses):
    prev_end = -np.inf
    for p in pulses:
        if p.start < prev_end - _TIME_TOL * max(1.0, abs(prev_end)):
            raise SimulationError(f"pulses overlap near t={p.start}")
        prev_end = p.end


def run_schedule(state, schedule, layout, noise=None):
    """Run a pulse schedule: alternating idles and pulses, optional dephasing.

    ``schedule`` needs ``pulses`` (time-ordered, non-overlapping, absolute
    starts) and ``total_duration`` (absolute end time). With ``noise``,
    per-site dephasing events are Poisson-sampled at the scattering rate
    and applied as uniform random Z-phase kicks; the trajectory is
    deterministic for a given seed. Returns (final_state, events).
    """
    pulses = list(schedule.pulses)
    _validate_pulse_order(pulses)
    t_end = float(schedule.total_duration)
    if pulses:
        if pulses[0].start < state.time - _TIME_TOL:
            raise SimulationError("schedule starts before the state clock")
        if pulses[-1].end > t_end + _TIME_TOL * max(1.0, t_end):
            raise SimulationError("schedule total_duration ends before its last pulse")
    events = [] if noise is None else _sample_events(noise, state.n, state.time, t_end)

    def advance_idle(st, until, pending):
        while pending and pending[0].time <= until:
            ev = pending.pop(0)
            st = evolve_idle(st, max(0.0, ev.time - st.time), layout)
            st = _apply_phase_kick(st, ev.site, ev.phase_kick)
        return evolve_idle(st, max(0.0, until - st.time), layout)

    pending = list(events)
    for p in pulses:
        state = advance_idle(state, p.start, pending)
        t_cursor = p.start
        while pending and pending[0].time < p.end:
            ev = pending.pop(0)
            if ev.time > t_cursor:
                state = evolve_pulse(
                    state,
                    Pulse(t_cursor, ev.time - t_cursor, p.frequency, p.rabi, p.phase),
                    layout,
                )
                t_cursor = ev.time
            state = _apply_phase_kick(state, ev.site, ev.phase_kick)
        if p.end > t_cursor:
            state = evolve_pulse(
                state, Pulse(t_cursor, p.end - t_cursor, p.frequency, p.rabi, p.phase), layout
            )
    state = advance_idle(state, t_end, pending)
    return state, events


def measure(state, eta, seed):
    """Projective readout with per-site detection efficiency ``eta``.

    Samples one basis state by Born probabilities, then independently
    replaces each site's outcome with 'lost' with probability 1 - eta.
    """
    if not 0.0 <= eta <= 1.0:
        raise SimulationError(f"efficiency must be in [0, 1], got {eta}")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    index = int(rng.choice(probs.size, p=probs))
    detected = rng.random(state.n)
    outcomes = tuple(
        "lost" if detected[a] >= eta else (index >> a) & 1 for a in range(state.n)
    )
    return MeasurementRecord(outcomes=outcomes, seed=seed)


def fidelity(state, reference):
    """Squared overlap |<reference|state>|^2."""
    if state.n != reference.n:
        raise SimulationError(f"register sizes differ: {state.n} vs {reference.n}")
    return float(np.abs(np.vdot(reference.amplitudes, state.amplitudes)) ** 2)


def in_rotating_frame(state, frequencies):
    """State with each site's reference precession unwound at its clock time.

    Multiplies amplitudes by exp(+2 pi i sum_a f_a s_a t): the logical frame
    co-rotating at per-site reference frequencies (typically the layout's
    addressing lines). Drive pulses are phase-locked to the lab clock, so
    states at different times only compare meaningfully in this frame; the
    bare lab overlap of an idling register oscillates at GHz rates.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.shape != (state.n,):
        raise SimulationError(f"need {state.n} frame frequencies, got {freqs.shape}")
    phase = _bit_table(state.n) @ freqs
    amps = state.amplitudes * np.exp(2j * np.pi * phase * state.time)
    return RegisterState(state.n, amps, state.time)


def frame_fidelity(state, reference, frequencies):
    """Fidelity in the rotating frame at per-site reference frequencies."""
    return fidelity(in_rotating_frame(state, frequencies), in_rotating_frame(reference, frequencies))
