"""Compile logical circuits to pulse schedules with echo refocusing.

Gate set: one-qubit rotations about equatorial axes, nearest-neighbor
CNOTs, and timed idles. Rotations become strong pulses at the target's
line center (conditional-phase spread suppressed as (delta_nu/Omega)^2);
CNOTs become weak pi pulses resonant only with the target's control=1
conditional line; idles become Walsh-patterned echo groups whose serial
per-site pi pulses cancel both the single-site phase accrual and the
always-on Ising (ZZ) phases exactly in the instantaneous-pulse limit.

The conditional pulse is two-body selective: spectator sites coupled to
the target comparably to the drive strength split the target's line
further and condition the gate on their own state (in a chain, an
interior target's far-side neighbor couples as strongly as the control).
Gate-quality contracts therefore hold on two-site registers;
:func:`validate_circuit` flags affected CNOTs on larger ones.

Two global echo groups (all sites flipped at T/2 and T) cancel only the
single-site terms: the pair products of the sign patterns never change
sign. Cancelling the Ising phases as well requires pairwise-distinct sign
patterns, which is what the Walsh assignment provides; for a single site
it reduces to the plain two-group echo at T/2 and T.

Deterministic Z phases are never driven: they accumulate in the
schedule's per-site ``frame_corrections``, including the compensation of
the small AC-Stark kicks that each echo pulse imprints on the spectator
sites (dressed-phase formula, tracked through the toggling frame).
"""

from dataclasses import dataclass, field

import numpy as np

from . import units
from .pulsesim import Pulse, RegisterState, bits_to_index

MIN_KAPPA_ONEBIT = 5.0
MIN_KAPPA_CNOT = 10.0


class CircuitError(ValueError):
    """Malformed circuit or circuit text."""


class CompileError(ValueError):
    """Circuit cannot be scheduled on the given layout."""


@dataclass(frozen=True)
class Rot:
    """Rotation by ``theta`` about the equatorial axis at angle ``phi``."""

    site: int
    theta: float
    phi: float


@dataclass(frozen=True)
class Cnot:
    control: int
    target: int


@dataclass(frozen=True)
class Idle:
    duration: float


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on ``n`` qubits.

    Construction checks site ranges, angle ranges and durations; CNOT
    adjacency is a device rule, enforced at compile time and reported by
    :func:`validate_circuit`.
    """

    n: int
    ops: tuple

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError(f"need at least one qubit, got n={self.n}")
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if isinstance(op, Rot):
                if not 0 <= op.site < self.n:
                    raise CircuitError(f"ROT site {op.site} out of range for n={self.n}")
                if not 0.0 <= op.theta < 2.0 * np.pi:
                    raise CircuitError(f"ROT angle must be in [0, 2*pi), got {op.theta}")
            elif isinstance(op, Cnot):
                if not (0 <= op.control < self.n and 0 <= op.target < self.n):
                    raise CircuitError(f"CNOT sites {op.control},{op.target} out of range")
                if op.control == op.target:
                    raise CircuitError("CNOT control and target must differ")
            elif isinstance(op, Idle):
                if op.duration < 0:
                    raise CircuitError(f"IDLE duration must be >= 0, got {op.duration}")
            else:
                raise CircuitError(f"unknown op {op!r}")


def parse_circuit(text, n=None):
    """Parse the line-oriented circuit format.

    ``ROT site theta phi``, ``CNOT control target``, ``IDLE seconds``;
    ``#`` starts a comment. If ``n`` is omitted it is inferred from the
    highest site index used.
    """
    ops = []
    max_site = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        word = fields[0].upper()
        try:
            if word == "ROT":
                if len(fields) != 4:
                    raise ValueError("expected: ROT site theta phi")
                site, theta, phi = int(fields[1]), float(fields[2]), float(fields[3])
                ops.append(Rot(site, theta, phi))
                max_site = max(max_site, site)
            elif word == "CNOT":
                if len(fields) != 3:
                    raise ValueError("expected: CNOT control target")
                c, t = int(fields[1]), int(fields[2])
                ops.append(Cnot(c, t))
                max_site = max(max_site, c, t)
            elif word == "IDLE":
                if len(fields) != 2:
                    raise ValueError("expected: IDLE seconds")
                ops.append(Idle(float(fields[1])))
            else:
                raise ValueError(f"unknown directive {fields[0]!r}")
        except ValueError as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if n is None:
        if max_site < 0:
            raise CircuitError("cannot infer qubit count from a circuit without gates")
        n = max_site + 1
    return Circuit(n=n, ops=tuple(ops))


@dataclass(frozen=True)
class CompileSettings:
    """Pulse-strength selectivity factors.

    One-bit pulses run at Omega = kappa_onebit * (largest coupling of the
    driven site); CNOT pulses at Omega = delta_nu / kappa_cnot. The floor
    keeps one-bit pulses finite on a register without couplings.
    """

    kappa_onebit: float = 20.0
    kappa_cnot: float = 20.0
    rabi_floor_hz: float = 1e3

    def __post_init__(self):
        if self.kappa_onebit < MIN_KAPPA_ONEBIT:
            raise CompileError(f"kappa_onebit must be >= {MIN_KAPPA_ONEBIT}")
        if self.kappa_cnot < MIN_KAPPA_CNOT:
            raise CompileError(f"kappa_cnot must be >= {MIN_KAPPA_CNOT}")
        if self.rabi_floor_hz <= 0:
            raise CompileError("rabi_floor_hz must be positive")


@dataclass(frozen=True)
class PulseSchedule:
    """Time-ordered non-overlapping pulses plus per-site virtual-Z frame.

    ``frame_corrections[a]`` (radians, in [0, 2*pi)) is the phase to apply
    to every basis state with site a in |1> to map the physical final
    state onto the logical one; see :func:`apply_frame_corrections`.
    """

    n: int
    pulses: tuple
    total_duration: float
    frame_corrections: np.ndarray = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        fc = self.frame_corrections
        fc = np.zeros(self.n) if fc is None else np.mod(np.asarray(fc, dtype=float), 2.0 * np.pi)
        if fc.shape != (self.n,):
            raise CompileError(f"need {self.n} frame corrections, got shape {fc.shape}")
        fc.setflags(write=False)
        object.__setattr__(self, "frame_corrections", fc)
        t = 0.0
        for p in self.pulses:
            if p.start < t - 1e-15 * max(1.0, t):
                raise CompileError(f"pulses overlap or are out of order near t={p.start}")
            t = p.end
        if self.total_duration < t - 1e-15 * max(1.0, t):
            raise CompileError("total_duration ends before the last pulse")


def apply_frame_corrections(state, schedule):
    """Rotate the physical final state into the schedule's logical frame."""
    bit = (np.arange(2**state.n)[:, None] >> np.arange(state.n)[None, :]) & 1
    corr = np.exp(1j * (bit @ schedule.frame_corrections))
    return RegisterState(state.n, state.amplitudes * corr, state.time)


def _walsh_rows(length):
    """Sylvester-Hadamard rows of the given power-of-two size, sequency order."""
    h = np.array([[1]])
    while h.shape[0] < length:
        h = np.block([[h, h], [h, -h]])
    sequency = [int(np.sum(row[1:] != row[:-1])) for row in h]
    return h[np.argsort(sequency, kind="stable")]


def _echo_assignment(layout):
    """Walsh row index per site: fewest sign flips on the most-coupled sites."""
    n = layout.n
    load = [sum(layout.coupling(a, b) for b in range(n) if b != a) for a in range(n)]
    order = sorted(range(n), key=lambda a: -load[a])
    rows = np.empty(n, dtype=int)
    for rank, site in enumerate(order):
        rows[site] = rank + 1
    return rows


def _pair_diag(layout, c, t, bit_c, bit_t):
    """Mean-field diagonal energy (Hz) of the (c, t) pair in given states.

    Spectator sites enter at the average of their two induced dipoles;
    spectator-spectator terms are a state-independent offset and dropped.
    """
    w = (layout.w1_hz[c] if bit_c else layout.w0_hz[c]) + (
        layout.w1_hz[t] if bit_t else layout.w0_hz[t]
    )
    d_c = layout.d1[c] if bit_c else layout.d0[c]
    d_t = layout.d1[t] if bit_t else layout.d0[t]
    w += units.dipole_dipole_coupling(d_c, d_t, layout.separation_um(c, t))
    for b in range(layout.n):
        if b in (c, t):
            continue
        d_bar = 0.5 * (layout.d0[b] + layout.d1[b])
        w += units.dipole_dipole_coupling(d_c, d_bar, layout.separation_um(c, b))
        w += units.dipole_dipole_coupling(d_t, d_bar, layout.separation_um(t, b))
    return w


def _branch_unitary(layout, c, t, bit_c, rabi, phase, frequency, t_start, duration):
    """Lab-frame 2x2 propagator of the target's levels with the control fixed.

    Same rotating-frame construction as the simulator, restricted to the
    driven pair; used for the compile-time phase bookkeeping of
    conditional pulses.
    """
    e0 = _pair_diag(layout, c, t, bit_c, 0)
    e1 = _pair_diag(layout, c, t, bit_c, 1)
    n0 = bit_c
    ham = np.array(
        [
            [e0 - frequency * n0, 0.5 * rabi * np.exp(1j * phase)],
            [0.5 * rabi * np.exp(-1j * phase), e1 - frequency * (n0 + 1)],
        ],
        dtype=complex,
    )
    w, v = np.linalg.eigh(ham)
    u = v @ np.diag(np.exp(-2j * np.pi * w * duration)) @ v.conj().T
    t_end = t_start + duration
    pre = np.exp(2j * np.pi * frequency * t_start * np.array([n0, n0 + 1]))
    post = np.exp(-2j * np.pi * frequency * t_end * np.array([n0, n0 + 1]))
    return post[:, None] * u * pre[None, :]


class _Scheduler:
    """Emits pulses while tracking per-site virtual-Z frame phases.

    Ledger semantics: the logical state is recovered from the physical one
    by applying the phase z[a] to every basis state with site a in |1>
    (on top of the per-site rotating frame at the line centers, which is
    diagonal and does not affect populations). Echo pi pulses negate a
    site's ledger phase; conditional pulses update both sites' phases by
    the solved pre/post-Z decomposition of the physical gate.
    """

    def __init__(self, layout, settings):
        self.layout = layout
        self.settings = settings
        self.t = 0.0
        self.pulses = []
        self.z = np.zeros(layout.n)
        self.centers = np.array([layout.line_center(a) for a in range(layout.n)])

    def onebit_rabi(self, site):
        return max(
            self.settings.kappa_onebit * self.layout.max_coupling(site),
            self.settings.rabi_floor_hz,
        )

    def emit(self, duration, frequency, rabi, phase):
        self.pulses.append(Pulse(self.t, duration, frequency, rabi, phase % (2.0 * np.pi)))
        self.t += duration

    def compensate_kicks(self, site, frequency, rabi, duration):
        # off-resonant dressing advances each spectator's transition from
        # |detuning| to sqrt(detuning^2 + rabi^2); deterministic, so it is
        # cancelled in the ledger rather than left as an error
        for b in range(self.layout.n):
            if b == site:
                continue
            det = frequency - self.centers[b]
            kick = np.sign(det) * 2.0 * np.pi * (np.hypot(rabi, det) - abs(det)) * duration
            self.z[b] -= kick

    def add_rot(self, op):
        if op.theta == 0.0:
            return
        rabi = self.onebit_rabi(op.site)
        duration = op.theta / (2.0 * np.pi * rabi)
        self.emit(duration, self.centers[op.site], rabi, self.z[op.site] - op.phi)
        self.compensate_kicks(op.site, self.centers[op.site], rabi, duration)

    def add_cnot(self, op):
        if abs(op.control - op.target) != 1:
            raise CompileError(f"CNOT({op.control},{op.target}) is not nearest-neighbor")
        c, t = op.control, op.target
        delta_nu = self.layout.coupling(c, t)
        rabi = delta_nu / self.settings.kappa_cnot
        duration = 1.0 / (2.0 * rabi)
        frequency = self.layout.conditional_line(t, c, 1)
        t0 = self.t
        t1 = t0 + duration
        # phases of the two 2x2 branch propagators, in the per-site
        # line-center frame (fractional cycles keep the floats small)
        u_c0 = _branch_unitary(self.layout, c, t, 0, rabi, 0.0, frequency, t0, duration)
        u_c1 = _branch_unitary(self.layout, c, t, 1, rabi, 0.0, frequency, t0, duration)
        two_pi = 2.0 * np.pi
        nu_c, nu_t = self.centers[c], self.centers[t]
        phi00 = np.angle(u_c0[0, 0])
        phi01 = np.angle(u_c0[1, 1]) + two_pi * ((nu_t * duration) % 1.0)
        p10 = np.angle(u_c1[1, 0]) + two_pi * (((nu_c * duration) % 1.0) + ((nu_t * t1) % 1.0))
        p01 = np.angle(u_c1[0, 1]) + two_pi * (((nu_c * duration) % 1.0) - ((nu_t * t0) % 1.0))
        # the physical gate is CNOT up to pre/post Z's: the pulse phase
        # absorbs the target's pre-Z (incl. the ledger history), the
        # remaining post-Z's update the ledger
        pulse_phase = 0.5 * ((p10 - p01) + (phi00 - phi01) + 2.0 * self.z[t])
        self.emit(duration, frequency, rabi, pulse_phase)
        p10 = p10 - pulse_phase
        z_t = self.z[t] + (phi00 - phi01)
        self.z[c] = self.z[c] + phi00 - p10 - z_t
        self.z[t] = z_t

    def add_echo_pi(self, site, rabi):
        duration = 1.0 / (2.0 * rabi)
        self.emit(duration, self.centers[site], rabi, 0.0)
        self.compensate_kicks(site, self.centers[site], rabi, duration)
        self.z[site] = -self.z[site]

    def add_idle(self, op):
        if op.duration == 0.0:
            return
        n = self.layout.n
        length = 2
        while length < n + 1:
            length *= 2
        rows = _walsh_rows(length)
        assignment = _echo_assignment(self.layout)
        flips = {}
        for a in range(n):
            row = rows[assignment[a]]
            flips[a] = {
                k for k in range(1, length + 1)
                if (row[k] if k < length else 1) != row[k - 1]
            }
        # one register-wide Rabi frequency so every echo pulse shares the
        # same duration (keeps synchronized settings synchronized)
        rabi = max(
            self.settings.kappa_onebit * self.layout.max_coupling(),
            self.settings.rabi_floor_hz,
        )
        segment = op.duration / length
        for k in range(1, length + 1):
            self.t += segment
            for a in range(n):
                if k in flips[a]:
                    self.add_echo_pi(a, rabi)


def compile_circuit(circuit, layout, settings=None):
    """Compile a circuit into a PulseSchedule for the given layout."""
    if settings is None:
        settings = CompileSettings()
    if circuit.n != layout.n:
        raise CompileError(f"circuit has {circuit.n} qubits, layout has {layout.n} sites")
    sched = _Scheduler(layout, settings)
    for op in circuit.ops:
        if isinstance(op, Rot):
            sched.add_rot(op)
        elif isinstance(op, Cnot):
            sched.add_cnot(op)
        else:
            sched.add_idle(op)
    return PulseSchedule(
        n=circuit.n,
        pulses=tuple(sched.pulses),
        total_duration=sched.t,
        frame_corrections=sched.z,
    )


@dataclass(frozen=True)
class CompileDiagnostics:
    """Pre-flight report: rule violations and schedule-vs-coherence budget.

    ``warnings`` lists CNOTs whose target has further neighbors with
    couplings comparable to the drive strength: the conditional pulse is
    two-body selective, so such spectators split the target's line and
    condition the gate on their own state (a limitation of single-line
    selective addressing under always-on couplings, relevant for N > 2).
    """

    violations: tuple
    warnings: tuple
    addressing_step_hz: float
    max_coupling_hz: float
    step_over_coupling: float
    estimated_duration_s: float
    coherence_time_s: float = None
    duration_over_coherence: float = None


def _spectator_warnings(circuit, layout, settings):
    out = []
    for op in circuit.ops:
        if not isinstance(op, Cnot) or abs(op.control - op.target) != 1:
            continue
        rabi = layout.coupling(op.control, op.target) / settings.kappa_cnot
        for b in range(layout.n):
            if b in (op.control, op.target):
                continue
            split = layout.coupling(op.target, b)
            if split > 0.5 * rabi:
                out.append(
                    f"CNOT({op.control},{op.target}): site {b} splits the target line "
                    f"by {split:.3g} Hz vs drive {rabi:.3g} Hz; the gate is "
                    f"conditioned on site {b}'s state"
                )
    return tuple(out)


def validate_circuit(circuit, layout, scattering_rate=None, settings=None):
    """Diagnostics for a circuit against a layout (never raises on violations)."""
    if settings is None:
        settings = CompileSettings()
    violations = tuple(
        f"CNOT({op.control},{op.target}) is not nearest-neighbor"
        for op in circuit.ops
        if isinstance(op, Cnot) and abs(op.control - op.target) != 1
    )
    step = (
        float(np.min(np.abs(np.diff(layout.nu_exact)))) if layout.n >= 2 else float("inf")
    )
    max_coupling = float(layout.max_coupling())
    duration = 0.0
    if not violations:
        duration = float(compile_circuit(circuit, layout, settings).total_duration)
    t2 = None if scattering_rate is None else 1.0 / scattering_rate
    return CompileDiagnostics(
        violations=violations,
        warnings=_spectator_warnings(circuit, layout, settings),
        addressing_step_hz=step,
        max_coupling_hz=max_coupling,
        step_over_coupling=step / max_coupling if max_coupling > 0 else float("inf"),
        estimated_duration_s=duration,
        coherence_time_s=t2,
        duration_over_coherence=None if t2 is None else duration / t2,
    )


def schedule_to_json(schedule):
    """Schedule in the documented export format."""
    return {
        "N": schedule.n,
        "pulses": [
            {
                "start_s": p.start, "duration_s": p.duration,
                "freq_Hz": p.frequency, "rabi_Hz": p.rabi, "phase_rad": p.phase,
            }
            for p in schedule.pulses
        ],
        "frame_corrections": [float(x) for x in schedule.frame_corrections],
    }


def schedule_from_json(payload):
    """Inverse of :func:`schedule_to_json`."""
    pulses = tuple(
        Pulse(
            start=p["start_s"], duration=p["duration_s"], frequency=p["freq_Hz"],
            rabi=p["rabi_Hz"], phase=p["phase_rad"],
        )
        for p in payload["pulses"]
    )
    total = max((p.end for p in pulses), default=0.0)
    return PulseSchedule(
        n=payload["N"], pulses=pulses, total_duration=total,
        frame_corrections=np.asarray(payload["frame_corrections"], dtype=float),
    )


def ideal_circuit_amplitudes(circuit, input_bits):
    """Amplitudes of the ideal (noiseless, instantaneous-gate) circuit output.

    Rot(site, theta, phi) = exp(-i theta/2 (cos(phi) X + sin(phi) Y)),
    CNOT flips the target where the control is |1>, Idle is the identity.
    """
    n = circuit.n
    dim = 2**n
    start = input_bits if isinstance(input_bits, (int, np.integer)) else bits_to_index(input_bits, n)
    amps = np.zeros(dim, dtype=np.complex128)
    amps[start] = 1.0
    indices = np.arange(dim)
    for op in circuit.ops:
        if isinstance(op, Rot):
            c, s = np.cos(op.theta / 2.0), np.sin(op.theta / 2.0)
            u00, u01 = c, -1j * s * np.exp(-1j * op.phi)
            u10, u11 = -1j * s * np.exp(1j * op.phi), c
            low = indices[(indices >> op.site) & 1 == 0]
            high = low + (1 << op.site)
            a0, a1 = amps[low].copy(), amps[high].copy()
            amps[low] = u00 * a0 + u01 * a1
            amps[high] = u10 * a0 + u11 * a1
        elif isinstance(op, Cnot):
            ctrl_set = indices[(indices >> op.control) & 1 == 1]
            swapped = ctrl_set ^ (1 << op.target)
            new = amps.copy()
            new[swapped] = amps[ctrl_set]
            amps = new
    return amps
