"""Decoherence and technical-noise requirements of the design.

Forward chain: the photon-scattering rate of the trap laser sets the
coherence time T2 = 1/Rs and, with the CNOT time, the gate capacity
T2/tau. The drive-frequency noise budget is the square root of the
scattering rate (amplitude spectral density at the qubit frequency,
taken at face value from the design criterion); dividing it by the
tensor light shift gives the required relative intensity stability of
the trap laser, and converting it through the effective dipole and the
field-plate gap gives the required broadband voltage noise.

Sources the design dismisses qualitatively (heating, photodissociation,
blackbody, background-gas collisions) are carried as an informational
checklist only, with no numerics.
"""

from dataclasses import dataclass

from . import units


@dataclass(frozen=True)
class NoiseBudget:
    """Complete forward noise budget of one operating point."""

    scattering_rate_per_s: float       # Rs
    coherence_time_s: float            # T2 = 1/Rs
    cnot_time_s: float                 # tau
    gate_capacity: float               # T2/tau
    tensor_shift_hz: float             # assumed as large as the trap depth U0
    dnu_budget_hz_rt_hz: float         # drive-frequency noise bound, Hz/sqrt(Hz)
    intensity_stability_rt_hz: float   # required dI/I, 1/sqrt(Hz)
    voltage_noise_v_rt_hz: float       # required dV, V/sqrt(Hz)
    plate_gap_cm: float
    d_eff_debye: float


#: Qualitative checklist carried along with every report.
FEASIBILITY_NOTES = (
    "intensity stability target is ~300x the shot-noise limit",
    "voltage noise target equals room-temperature Johnson noise of a 10 MOhm resistor",
    "dismissed without numerics: heating from intensity/pointing/frequency fluctuations",
    "dismissed without numerics: trap-laser photodissociation",
    "dismissed without numerics: spontaneous emission",
    "dismissed without numerics: blackbody coupling",
    "dismissed without numerics: background-gas collisions",
)

_REQUIRED_KEYS = ("Rs_per_s", "U0_K", "d_eff_D", "plate_gap_cm", "cnot_time_s")


def coherence_time(scattering_rate_per_s):
    """T2 = 1/Rs."""
    if scattering_rate_per_s <= 0:
        raise ValueError(f"scattering rate must be positive, got {scattering_rate_per_s}")
    return 1.0 / scattering_rate_per_s


def gate_capacity(t2_s, tau_s):
    """Number of CNOT gates fitting in the coherence time."""
    if t2_s <= 0 or tau_s <= 0:
        raise ValueError("coherence time and gate time must be positive")
    return t2_s / tau_s


def required_intensity_stability(dnu_budget_hz_rt_hz, tensor_shift_hz):
    """Trap-laser dI/I keeping tensor-shift noise below the frequency budget."""
    if dnu_budget_hz_rt_hz <= 0 or tensor_shift_hz <= 0:
        raise ValueError("noise budget and tensor shift must be positive")
    return dnu_budget_hz_rt_hz / tensor_shift_hz


def required_voltage_noise(dnu_budget_hz_rt_hz, d_eff_debye, plate_gap_cm):
    """Field-plate voltage noise keeping Stark noise below the frequency budget.

    A voltage fluctuation dV across the gap moves every addressing
    frequency by d_eff * (dV/gap) / h.
    """
    if dnu_budget_hz_rt_hz <= 0 or d_eff_debye <= 0 or plate_gap_cm <= 0:
        raise ValueError("noise budget, dipole and gap must be positive")
    hz_per_volt = units.dipole_field_to_frequency(d_eff_debye, 1.0) / plate_gap_cm
    return dnu_budget_hz_rt_hz / hz_per_volt


def budget_report(config):
    """Assemble the full NoiseBudget from a configuration mapping.

    Required keys: Rs_per_s, U0_K, d_eff_D, plate_gap_cm, cnot_time_s.
    Missing or non-positive entries are rejected with the offending keys
    named.
    """
    bad = [k for k in _REQUIRED_KEYS if k not in config]
    if bad:
        raise KeyError(f"missing config keys: {', '.join(bad)}")
    bad = [k for k in _REQUIRED_KEYS if not config[k] > 0]
    if bad:
        raise ValueError(f"config keys must be positive: {', '.join(bad)}")
    rs = config["Rs_per_s"]
    t2 = coherence_time(rs)
    dnu = rs**0.5
    tensor = units.temperature_to_frequency(config["U0_K"])
    return NoiseBudget(
        scattering_rate_per_s=rs,
        coherence_time_s=t2,
        cnot_time_s=config["cnot_time_s"],
        gate_capacity=gate_capacity(t2, config["cnot_time_s"]),
        tensor_shift_hz=tensor,
        dnu_budget_hz_rt_hz=dnu,
        intensity_stability_rt_hz=required_intensity_stability(dnu, tensor),
        voltage_noise_v_rt_hz=required_voltage_noise(dnu, config["d_eff_D"], config["plate_gap_cm"]),
        plate_gap_cm=config["plate_gap_cm"],
        d_eff_debye=config["d_eff_D"],
    )


def budget_to_json(budget):
    """Budget as a JSON-ready dict, feasibility notes included."""
    return {
        "Rs_per_s": budget.scattering_rate_per_s,
        "T2_s": budget.coherence_time_s,
        "cnot_time_s": budget.cnot_time_s,
        "gate_capacity": budget.gate_capacity,
        "tensor_shift_Hz": budget.tensor_shift_hz,
        "dnu_budget_Hz_rtHz": budget.dnu_budget_hz_rt_hz,
        "intensity_stability_rtHz": budget.intensity_stability_rt_hz,
        "voltage_noise_V_rtHz": budget.voltage_noise_v_rt_hz,
        "plate_gap_cm": budget.plate_gap_cm,
        "d_eff_D": budget.d_eff_debye,
        "notes": list(FEASIBILITY_NOTES),
    }


def render_budget_text(budget):
    """Aligned plain-text table of the budget plus the checklist."""
    rows = [
        ("photon scattering rate", f"{budget.scattering_rate_per_s:.3g} 1/s"),
        ("coherence time T2", f"{budget.coherence_time_s:.3g} s"),
        ("CNOT time", f"{budget.cnot_time_s:.3g} s"),
        ("gate capacity T2/tau", f"{budget.gate_capacity:.3g}"),
        ("tensor shift", f"{budget.tensor_shift_hz:.4g} Hz"),
        ("drive-noise budget", f"{budget.dnu_budget_hz_rt_hz:.3g} Hz/sqrt(Hz)"),
        ("required dI/I", f"{budget.intensity_stability_rt_hz:.3g} /sqrt(Hz)"),
        ("required dV", f"{budget.voltage_noise_v_rt_hz * 1e6:.3g} uV/sqrt(Hz)"),
        ("plate gap", f"{budget.plate_gap_cm:.3g} cm"),
        ("effective dipole", f"{budget.d_eff_debye:.3g} D"),
    ]
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    lines.append("")
    lines.extend(f"note: {n}" for n in FEASIBILITY_NOTES)
    return "\n".join(lines)
