"""Batch front-end: config-driven subcommands with CSV/JSON emission.

Subcommands: ``stark-scan``, ``design-report``, ``simulate``, ``budget``.
Configuration is a JSON file with sections molecule/trap/field/noise/sim;
every key carries its unit in the name and unknown keys are rejected so a
misspelled unit cannot slip through silently. Missing keys fall back to
the reference design (KCs in the 1.1 um / 5 mm trap with the bias field
spanning reduced fields 2 to 5 across the array).

Outputs are deterministic: a fixed-format metadata header (tool version,
config hash, seed - never a timestamp), sorted JSON keys, and CSV floats
at 12 significant digits. Exit codes: 0 success, 1 validation error,
2 I/O error, 3 physics-check failure under --strict.
"""

import argparse
import hashlib
import json
import sys

import numpy as np

from . import __version__, compiler, device, noisebudget, pulsesim, stark, units

D_EFF_REF_FRACTION = device.D_EFF_PLATEAU_FRACTION

#: Largest register for which simulate emits a full truth table (2^N runs).
TRUTH_TABLE_MAX_QUBITS = 6

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_PHYSICS = 3


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


_SCHEMA = {
    "molecule": {"name": str, "B_Hz": float, "mu_D": float},
    "trap": {"lambda_t_um": float, "L_mm": float, "w0_um": float, "wt_um": float, "U0_K": float},
    "field": {"E0_Vcm": float, "dEdx_Vcm_per_mm": float},
    "noise": {"Rs_per_s": float, "plate_gap_cm": float, "eta": float},
    "sim": {"N": int, "Jmax": int, "seed": int, "trajectories": int},
}

_POSITIVE = {
    ("molecule", "B_Hz"), ("molecule", "mu_D"),
    ("trap", "lambda_t_um"), ("trap", "L_mm"), ("trap", "w0_um"),
    ("trap", "wt_um"), ("trap", "U0_K"),
    ("noise", "plate_gap_cm"),
}
_NON_NEGATIVE = {("noise", "Rs_per_s"), ("sim", "trajectories")}


def default_config():
    """Reference-design configuration (KCs, 1.1 um / 5 mm trap)."""
    return {
        "molecule": {"name": "KCs", "B_Hz": 1.0e9, "mu_D": 1.92},
        "trap": {"lambda_t_um": 1.1, "L_mm": 5.0, "w0_um": 50.0, "wt_um": 1.1, "U0_K": 1.0e-4},
        "noise": {"Rs_per_s": 0.2, "plate_gap_cm": 1.0, "eta": 0.9},
        "sim": {"N": 2, "Jmax": 20, "seed": 12345, "trajectories": 0},
    }


def resolve_config(user):
    """Merge a user config over the defaults, rejecting unknown keys.

    The field section defaults are derived from the resolved molecule and
    trap (bias spanning reduced fields 2 to 5 across the array), so they
    stay consistent when those sections are overridden.
    """
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = [s for s in user if s not in _SCHEMA]
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    cfg = default_config()
    for section, keys in _SCHEMA.items():
        given = user.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        bad = [f"{section}.{k}" for k in given if k not in keys]
        if bad:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(bad))}")
        if section != "field":
            cfg[section].update(given)
    for section, keys in _SCHEMA.items():
        if section == "field":
            continue
        for key, typ in keys.items():
            value = cfg[section][key]
            if typ is str:
                if not isinstance(value, str):
                    raise ConfigError(f"{section}.{key} must be a string")
                continue
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
            if typ is int and int(value) != value:
                raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
            cfg[section][key] = typ(value)
            if (section, key) in _POSITIVE and cfg[section][key] <= 0:
                raise ConfigError(f"{section}.{key} must be positive")
            if (section, key) in _NON_NEGATIVE and cfg[section][key] < 0:
                raise ConfigError(f"{section}.{key} must be non-negative")
    mol = _molecule(cfg)
    e_lo = stark.field_at_beta(mol, 2.0)
    e_hi = stark.field_at_beta(mol, 5.0)
    cfg["field"] = {
        "E0_Vcm": e_lo,
        "dEdx_Vcm_per_mm": (e_hi - e_lo) / cfg["trap"]["L_mm"],
    }
    for key, value in user.get("field", {}).items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field.{key} must be a number, got {value!r}")
        cfg["field"][key] = float(value)
    if not 0.0 <= cfg["noise"]["eta"] <= 1.0:
        raise ConfigError("noise.eta must be in [0, 1]")
    if cfg["sim"]["N"] < 1:
        raise ConfigError("sim.N must be at least 1")
    if cfg["sim"]["Jmax"] < 2:
        raise ConfigError("sim.Jmax must be at least 2")
    return cfg


def load_config(path):
    if path is None:
        return resolve_config({})
    with open(path, "r", encoding="utf-8") as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    return resolve_config(user)


def _molecule(cfg):
    m = cfg["molecule"]
    return stark.MoleculeSpec(name=m["name"], b_hz=m["B_Hz"], mu_debye=m["mu_D"])


def _trap(cfg):
    t = cfg["trap"]
    return device.TrapGeometry(
        lambda_t_um=t["lambda_t_um"], length_mm=t["L_mm"], waist_um=t["w0_um"],
        transverse_waist_um=t["wt_um"], depth_k=t["U0_K"],
    )


def _field(cfg):
    f = cfg["field"]
    return device.FieldProfile(
        e0_v_per_cm=f["E0_Vcm"], gradient_v_per_cm_per_mm=f["dEdx_Vcm_per_mm"]
    )


def _meta(cfg, seed):
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return {
        "tool": "polarsim",
        "version": __version__,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "seed": seed,
    }


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _fmt(x):
    return f"{x:.12g}"


# ---------------------------------------------------------------- stark-scan

def cmd_stark_scan(cfg, beta_min, beta_max, points, out_path, seed):
    if points < 1:
        raise ConfigError(f"points must be at least 1, got {points}")
    if beta_min < 0:
        raise ConfigError(f"beta-min must be non-negative, got {beta_min}")
    if points > 1 and beta_max <= beta_min:
        raise ConfigError("beta-max must exceed beta-min")
    mol = _molecule(cfg)
    grid = np.linspace(beta_min, beta_max, points)
    solutions = stark.stark_scan(mol, grid, jmax=cfg["sim"]["Jmax"])
    meta = _meta(cfg, seed)
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    lines.append("beta,E_V_per_cm,W0_over_B,W1_over_B,d0_D,d1_D,d_eff_D,mu_t_D")
    for s in solutions:
        e = stark.field_at_beta(mol, s.beta)
        lines.append(",".join(_fmt(v) for v in (s.beta, e, s.w0, s.w1, s.d0, s.d1, s.d_eff, s.mu_t)))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {points} rows to {out_path}")
    return EXIT_OK


# ------------------------------------------------------------- design-report

def design_report(cfg):
    """Full-array design report as a JSON-ready dict."""
    mol = _molecule(cfg)
    trap = _trap(cfg)
    field = _field(cfg)
    capacity = device.site_count(trap.length_mm, trap.lambda_t_um)
    z0 = device.rayleigh_length(trap.waist_um, trap.lambda_t_um)
    layout = device.build_layout(mol, trap, field, capacity, jmax=cfg["sim"]["Jmax"])
    steps = np.diff(layout.nu_linear)
    d_ref = D_EFF_REF_FRACTION * mol.mu_debye
    delta_nu_ref = units.dipole_dipole_coupling(d_ref, d_ref, trap.site_spacing_um)
    adjacent = np.array([layout.coupling(a, a + 1) for a in range(layout.n - 1)])
    tau = device.cnot_time(delta_nu_ref)
    e_int = device.internal_field(layout, "0" * layout.n)
    budget = noisebudget.budget_report({
        "Rs_per_s": cfg["noise"]["Rs_per_s"],
        "U0_K": trap.depth_k,
        "d_eff_D": d_ref,
        "plate_gap_cm": cfg["noise"]["plate_gap_cm"],
        "cnot_time_s": tau,
    })
    return {
        "geometry": {
            "site_count": capacity,
            "site_spacing_um": trap.site_spacing_um,
            "length_mm": trap.length_mm,
            "rayleigh_length_mm": z0,
            "rayleigh_ok": bool(z0 > trap.length_mm),
        },
        "addressing": {
            "N": layout.n,
            "nu_linear_min_Hz": float(layout.nu_linear[0]),
            "nu_linear_max_Hz": float(layout.nu_linear[-1]),
            "nu_exact_min_Hz": float(layout.nu_exact[0]),
            "nu_exact_max_Hz": float(layout.nu_exact[-1]),
            "step_mean_Hz": float(steps.mean()) if steps.size else 0.0,
            "step_min_Hz": float(steps.min()) if steps.size else 0.0,
            "step_max_Hz": float(steps.max()) if steps.size else 0.0,
            "degenerate": layout.addressing_degenerate,
        },
        "coupling": {
            "delta_nu_ref_Hz": delta_nu_ref,
            "delta_nu_adjacent_min_Hz": float(adjacent.min()),
            "delta_nu_adjacent_max_Hz": float(adjacent.max()),
            "cnot_time_s": tau,
            "step_over_coupling": float(steps.min() / adjacent.max()) if steps.size else None,
        },
        "internal_field": {
            "max_abs_V_per_cm": float(np.max(np.abs(e_int))),
            "max_over_external": float(np.max(np.abs(e_int) / layout.e_local)),
        },
        "budget": noisebudget.budget_to_json(budget),
    }


def render_design_text(report):
    g, a, c = report["geometry"], report["addressing"], report["coupling"]
    rows = [
        ("trap sites", f"{g['site_count']}"),
        ("site spacing", f"{g['site_spacing_um']:.4g} um"),
        ("Rayleigh length", f"{g['rayleigh_length_mm']:.4g} mm "
                            f"({'>' if g['rayleigh_ok'] else '<='} L = {g['length_mm']:.4g} mm)"),
        ("nu_linear span", f"{a['nu_linear_min_Hz']/1e9:.4f} - {a['nu_linear_max_Hz']/1e9:.4f} GHz"),
        ("nu_exact span", f"{a['nu_exact_min_Hz']/1e9:.4f} - {a['nu_exact_max_Hz']/1e9:.4f} GHz"),
        ("site-to-site step", f"{a['step_mean_Hz']/1e3:.4g} kHz"),
        ("reference coupling", f"{c['delta_nu_ref_Hz']/1e3:.4g} kHz"),
        ("adjacent couplings", f"{c['delta_nu_adjacent_min_Hz']/1e3:.4g} - "
                               f"{c['delta_nu_adjacent_max_Hz']/1e3:.4g} kHz"),
        ("CNOT time", f"{c['cnot_time_s']*1e6:.4g} us"),
        ("step / coupling", f"{c['step_over_coupling']:.4g}"),
        ("internal field ratio", f"{report['internal_field']['max_over_external']:.3g}"),
    ]
    if a["degenerate"]:
        rows.append(("warning", "addressing degenerate (zero field gradient)"))
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    lines.append("")
    lines.append("noise budget:")
    lines.append(noisebudget.render_budget_text(_budget_from_json(report["budget"])))
    return "\n".join(lines)


def _budget_from_json(b):
    return noisebudget.NoiseBudget(
        scattering_rate_per_s=b["Rs_per_s"],
        coherence_time_s=b["T2_s"],
        cnot_time_s=b["cnot_time_s"],
        gate_capacity=b["gate_capacity"],
        tensor_shift_hz=b["tensor_shift_Hz"],
        dnu_budget_hz_rt_hz=b["dnu_budget_Hz_rtHz"],
        intensity_stability_rt_hz=b["intensity_stability_rtHz"],
        voltage_noise_v_rt_hz=b["voltage_noise_V_rtHz"],
        plate_gap_cm=b["plate_gap_cm"],
        d_eff_debye=b["d_eff_D"],
    )


def cmd_design_report(cfg, out_path, seed, strict):
    report = design_report(cfg)
    payload = {"meta": _meta(cfg, seed), **report}
    if out_path:
        _write_json(out_path, payload)
    print(render_design_text(report))
    if strict and (not report["geometry"]["rayleigh_ok"] or report["addressing"]["degenerate"]):
        print("physics check failed", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


# ------------------------------------------------------------------ simulate

def simulate(cfg, circuit_text, seed):
    """Compile and run a circuit; returns the JSON-ready result dict."""
    n = cfg["sim"]["N"]
    circuit = compiler.parse_circuit(circuit_text, n=n)
    if n > pulsesim.MAX_QUBITS:
        raise ConfigError(f"sim.N = {n} exceeds the simulator cap of {pulsesim.MAX_QUBITS}")
    mol = _molecule(cfg)
    layout = device.build_layout(mol, _trap(cfg), _field(cfg), n, jmax=cfg["sim"]["Jmax"])
    diagnostics = compiler.validate_circuit(circuit, layout, cfg["noise"]["Rs_per_s"] or None)
    for warning in diagnostics.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    schedule = compiler.compile_circuit(circuit, layout)

    def run_from(bits):
        state = pulsesim.RegisterState.basis_state(n, bits)
        out, _ = pulsesim.run_schedule(state, schedule, layout)
        return compiler.apply_frame_corrections(out, schedule)

    def pop_fidelity(state, ideal_amps):
        return float(np.sum(np.sqrt(state.probabilities() * np.abs(ideal_amps) ** 2)) ** 2)

    ground = "0" * n
    noiseless = run_from(ground)
    ideal = compiler.ideal_circuit_amplitudes(circuit, ground)
    result = {
        "circuit": {"n": n, "gates": len(circuit.ops)},
        "warnings": list(diagnostics.warnings),
        "schedule": compiler.schedule_to_json(schedule),
        "noiseless": {
            "population_fidelity_vs_ideal": pop_fidelity(noiseless, ideal),
            "populations": {
                pulsesim.index_to_bits(i, n): float(p)
                for i, p in enumerate(noiseless.probabilities()) if p > 1e-12
            },
        },
    }
    if n <= TRUTH_TABLE_MAX_QUBITS:
        table = []
        for i in range(2**n):
            bits = pulsesim.index_to_bits(i, n)
            out = run_from(bits)
            ideal_i = compiler.ideal_circuit_amplitudes(circuit, bits)
            table.append({
                "input": bits,
                "population_fidelity_vs_ideal": pop_fidelity(out, ideal_i),
                "populations": {
                    pulsesim.index_to_bits(j, n): float(p)
                    for j, p in enumerate(out.probabilities()) if p > 1e-12
                },
            })
        result["truth_table"] = table
    else:
        result["truth_table"] = None

    rs = cfg["noise"]["Rs_per_s"]
    trajectories = cfg["sim"]["trajectories"]
    if trajectories > 0 and rs > 0:
        eta = cfg["noise"]["eta"]
        child_seeds = np.random.default_rng(seed).integers(2**63, size=trajectories)
        records = []
        fids = []
        histogram = {}
        for child in child_seeds:
            child = int(child)
            state = pulsesim.RegisterState.basis_state(n, ground)
            noise = pulsesim.ScatteringNoise(rate_per_s=rs, seed=child)
            out, events = pulsesim.run_schedule(state, schedule, layout, noise)
            out = compiler.apply_frame_corrections(out, schedule)
            fid = pulsesim.fidelity(out, noiseless)
            fids.append(fid)
            record = pulsesim.measure(out, eta, seed=child + 1)
            key = "".join("L" if o == "lost" else str(o) for o in record.outcomes)
            histogram[key] = histogram.get(key, 0) + 1
            records.append({
                "seed": child,
                "events": [
                    {"t": e.time, "site": e.site, "phase": e.phase_kick} for e in events
                ],
                "final_outcomes": list(record.outcomes),
                "fidelity_vs_ideal": fid,
            })
        fids = np.asarray(fids)
        result["trajectories"] = records
        result["trajectory_summary"] = {
            "count": trajectories,
            "mean_fidelity": float(fids.mean()),
            "stderr_fidelity": float(fids.std(ddof=1) / np.sqrt(len(fids))) if len(fids) > 1 else 0.0,
        }
        result["measurement_histogram"] = dict(sorted(histogram.items()))
    return result


def cmd_simulate(cfg, circuit_path, out_path, seed):
    with open(circuit_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    result = simulate(cfg, text, seed)
    payload = {"meta": _meta(cfg, seed), **result}
    if out_path:
        _write_json(out_path, payload)
    nl = result["noiseless"]["population_fidelity_vs_ideal"]
    print(f"noiseless population fidelity vs ideal: {nl:.6f}")
    if "trajectory_summary" in result:
        s = result["trajectory_summary"]
        print(
            f"{s['count']} noise trajectories: mean fidelity "
            f"{s['mean_fidelity']:.6f} +- {s['stderr_fidelity']:.6f}"
        )
    return EXIT_OK


# -------------------------------------------------------------------- budget

def cmd_budget(cfg, out_path, seed):
    mol = _molecule(cfg)
    rs = cfg["noise"]["Rs_per_s"]
    if rs <= 0:
        raise ConfigError("noise.Rs_per_s must be positive for a budget report")
    d_ref = D_EFF_REF_FRACTION * mol.mu_debye
    trap = _trap(cfg)
    tau = device.cnot_time(units.dipole_dipole_coupling(d_ref, d_ref, trap.site_spacing_um))
    budget = noisebudget.budget_report({
        "Rs_per_s": rs,
        "U0_K": trap.depth_k,
        "d_eff_D": d_ref,
        "plate_gap_cm": cfg["noise"]["plate_gap_cm"],
        "cnot_time_s": tau,
    })
    if out_path:
        _write_json(out_path, {"meta": _meta(cfg, seed), **noisebudget.budget_to_json(budget)})
    print(noisebudget.render_budget_text(budget))
    return EXIT_OK


# ---------------------------------------------------------------------- main

def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarsim",
        description="Design calculator and pulse-level simulator for a polar-molecule qubit register",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file (defaults: reference design)")
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--strict", action="store_true",
                       help="exit 3 when a physics check fails")

    p = sub.add_parser("stark-scan", help="tabulate pendular-state energies and dipoles")
    common(p)
    p.add_argument("--beta-min", type=float, default=0.0)
    p.add_argument("--beta-max", type=float, default=6.0)
    p.add_argument("--points", type=int, default=121)

    p = sub.add_parser("design-report", help="full-array geometry, addressing and budget report")
    common(p)

    p = sub.add_parser("simulate", help="compile a circuit file and run it")
    common(p)
    p.add_argument("--circuit", required=True, help="circuit file (ROT/CNOT/IDLE)")

    p = sub.add_parser("budget", help="decoherence and technical-noise budget")
    common(p)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg["sim"]["seed"]
        if args.command == "stark-scan":
            if not args.out:
                raise ConfigError("stark-scan requires --out")
            return cmd_stark_scan(cfg, args.beta_min, args.beta_max, args.points, args.out, seed)
        if args.command == "design-report":
            return cmd_design_report(cfg, args.out, seed, args.strict)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.circuit, args.out, seed)
        if args.command == "budget":
            return cmd_budget(cfg, args.out, seed)
        raise ConfigError(f"unknown command {args.command!r}")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, compiler.CircuitError, compiler.CompileError,
            pulsesim.SimulationError, stark.TruncationError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
