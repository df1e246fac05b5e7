"""Acceptance suite: one test per release criterion, printed pass/fail.

Run with ``pytest tests/test_acceptance.py -v -s`` for the full checklist
output. Every tolerance is fixed here; runtime budgets are asserted with
wall-clock timers around the relevant computation.
"""

import json
import time

import numpy as np
import pytest

from polarsim import cli, compiler, device, noisebudget, pulsesim, stark, units

import helpers
from oracles import brute_force_schedule, perturbation_levels, rabi_transfer
from oracles import finite_difference_dipoles


def report(name, ok, detail):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def test_criterion_01_stark_plateau():
    start = time.perf_counter()
    grid = np.linspace(0.0, 6.0, 601)
    solutions = stark.stark_scan(stark.KCS, grid)
    d_eff = np.array([s.d_eff for s in solutions])
    peak = d_eff.max()
    plateau = d_eff[(grid >= 2.0) & (grid <= 5.0)]
    elapsed = time.perf_counter() - start
    ok = (
        abs(peak - 0.75 * 1.92) <= 0.03
        and np.all(plateau >= 0.9 * peak)
        and elapsed < 1.0
    )
    report(
        "01 stark plateau", ok,
        f"max d_eff {peak:.4f} D vs 1.44 +- 0.03, plateau min/max "
        f"{plateau.min() / peak:.4f} >= 0.9, {elapsed:.2f} s",
    )


def test_criterion_02_field_range():
    start = time.perf_counter()
    e2 = stark.field_at_beta(stark.KCS, 2.0)
    e5 = stark.field_at_beta(stark.KCS, 5.0)
    elapsed = time.perf_counter() - start
    ok = (
        abs(e2 - 2.07e3) <= 0.01 * 2.07e3
        and abs(e5 - 5.17e3) <= 0.01 * 5.17e3
        and elapsed < 1.0
    )
    report("02 field range", ok, f"beta 2 -> {e2:.1f} V/cm, beta 5 -> {e5:.1f} V/cm, {elapsed:.2f} s")


def test_criterion_03_addressing_plan():
    cfg = cli.resolve_config({})
    start = time.perf_counter()
    rep = cli.design_report(cfg)
    elapsed = time.perf_counter() - start
    lo = rep["addressing"]["nu_linear_min_Hz"]
    hi = rep["addressing"]["nu_linear_max_Hz"]
    step = rep["addressing"]["step_mean_Hz"]
    ok = (
        rep["addressing"]["N"] == 9090
        and abs(lo - 3.50e9) <= 0.05 * 3.50e9
        and abs(hi - 5.75e9) <= 0.05 * 5.75e9
        and abs(step - 247.5e3) <= 0.10 * 247.5e3
        and elapsed < 10.0
    )
    report(
        "03 addressing plan", ok,
        f"span {lo/1e9:.3f}-{hi/1e9:.3f} GHz, step {step/1e3:.1f} kHz, "
        f"{rep['addressing']['N']} sites in {elapsed:.2f} s",
    )


def test_criterion_04_coupling_and_gate_time():
    start = time.perf_counter()
    delta_nu = units.dipole_dipole_coupling(1.44, 1.44, 0.55)
    tau = device.cnot_time(delta_nu)
    elapsed = time.perf_counter() - start
    ok = (
        abs(delta_nu - 1.88e3) <= 0.02 * 1.88e3
        and 0.5 <= tau / 50e-6 <= 2.0
        and elapsed < 1.0
    )
    report(
        "04 coupling and gate time", ok,
        f"delta_nu {delta_nu:.1f} Hz vs 1.88 kHz +- 2%, tau {tau*1e6:.1f} us "
        f"within factor 2 of 50 us, {elapsed:.2f} s",
    )


def test_criterion_05_trap_geometry():
    start = time.perf_counter()
    z0 = device.rayleigh_length(50.0, 1.1)
    n11 = device.site_count(5.0, 1.1)
    n10 = device.site_count(5.0, 1.0)
    elapsed = time.perf_counter() - start
    ok = (
        abs(z0 - 7.14) <= 0.01 * 7.14
        and z0 > 5.0
        and n11 == 9090
        and n10 == 10000
        and elapsed < 1.0
    )
    report(
        "05 trap geometry", ok,
        f"z0 {z0:.3f} mm > 5 mm, sites {n11} (1.1 um) / {n10} (1.0 um), {elapsed:.2f} s",
    )


def test_criterion_06_budget_chain():
    start = time.perf_counter()
    tau = device.cnot_time(units.dipole_dipole_coupling(1.44, 1.44, 0.55))
    budget = noisebudget.budget_report(
        {"Rs_per_s": 0.2, "U0_K": 100e-6, "d_eff_D": 1.44, "plate_gap_cm": 1.0, "cnot_time_s": tau}
    )
    elapsed = time.perf_counter() - start
    ok = (
        budget.coherence_time_s == 5.0
        and 0.5 <= budget.gate_capacity / 1e5 <= 2.0
        and 0.5 <= budget.intensity_stability_rt_hz / 3e-7 <= 2.0
        and 0.5 <= budget.voltage_noise_v_rt_hz / 0.5e-6 <= 2.0
        and elapsed < 1.0
    )
    report(
        "06 budget chain", ok,
        f"T2 {budget.coherence_time_s} s, capacity {budget.gate_capacity:.3g}, "
        f"dI/I {budget.intensity_stability_rt_hz:.3g}, dV {budget.voltage_noise_v_rt_hz*1e6:.3g} uV, "
        f"{elapsed:.2f} s",
    )


def test_criterion_07_simulator_properties(paper_field, layout1, layout2):
    start = time.perf_counter()
    layouts = {
        n: device.build_layout(stark.KCS, device.PAPER_TRAP, paper_field, n) for n in (1, 2, 3, 4)
    }

    # norm conservation over 1000 random schedules, N <= 4
    rng = np.random.default_rng(1234)
    worst_norm_drift = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        layout = layouts[n]
        state = helpers.random_product_state(n, rng)
        t = 0.0
        pulses = []
        for _ in range(int(rng.integers(1, 4))):
            t += rng.uniform(0.0, 1e-4)
            duration = rng.uniform(1e-6, 1e-4)
            site = int(rng.integers(n))
            pulses.append(
                pulsesim.Pulse(
                    t, duration,
                    layout.nu_exact[site] + rng.uniform(-5e4, 5e4),
                    rng.uniform(0.0, 5e4), rng.uniform(0.0, 2 * np.pi),
                )
            )
            t += duration

        class S:
            pass

        S.pulses = pulses
        S.total_duration = t
        out, _ = pulsesim.run_schedule(state, S, layout)
        worst_norm_drift = max(
            worst_norm_drift, abs(float(np.sum(np.abs(out.amplitudes) ** 2)) - 1.0)
        )
    ok_norm = worst_norm_drift < 1e-10

    # resonant pi flip
    omega = 5e3
    flip = pulsesim.evolve_pulse(
        pulsesim.RegisterState.ground(1),
        pulsesim.Pulse(0.0, 1.0 / (2.0 * omega), layout1.nu_exact[0], omega),
        layout1,
    )
    ok_flip = 1.0 - flip.population("1") < 1e-10

    # off-resonant transfer against the closed form
    ok_rabi = True
    rng = np.random.default_rng(99)
    for _ in range(50):
        det = rng.uniform(-5e4, 5e4)
        dur = rng.uniform(1e-6, 3e-4)
        out = pulsesim.evolve_pulse(
            pulsesim.RegisterState.ground(1),
            pulsesim.Pulse(0.0, dur, layout1.nu_exact[0] + det, omega, rng.uniform(0, 2 * np.pi)),
            layout1,
        )
        ok_rabi &= abs(out.population("1") - rabi_transfer(omega, det, dur)) < 1e-8

    # two-qubit schedule against the fine-step integrator
    delta_nu = layout2.coupling(0, 1)
    pulses = [
        pulsesim.Pulse(5e-5, 1.5e-4, layout2.nu_exact[0], 2.5e4, 0.3),
        pulsesim.Pulse(3e-4, 10.0 / (2.0 * delta_nu), layout2.conditional_line(1, 0, 1), delta_nu / 10.0, 1.2),
    ]

    class S2:
        pass

    S2.pulses = pulses
    S2.total_duration = pulses[-1].end + 1e-4
    state = helpers.random_product_state(2, np.random.default_rng(5))
    out, _ = pulsesim.run_schedule(state, S2, layout2)
    psi = brute_force_schedule(state.amplitudes, pulses, S2.total_duration, layout2)
    oracle_fidelity = abs(np.vdot(psi, out.amplitudes)) ** 2
    ok_oracle = oracle_fidelity > 1.0 - 1e-8

    # Hellmann-Feynman dipoles vs finite differences
    ok_hf = True
    for beta in (0.5, 2.0, 5.0):
        s = stark.solve_beta(stark.KCS, beta)
        d0_fd, d1_fd = finite_difference_dipoles(beta, stark.KCS.mu_debye)
        ok_hf &= abs(s.d0 - d0_fd) <= 1e-6 * abs(d0_fd)
        ok_hf &= abs(s.d1 - d1_fd) <= 1e-6 * abs(d1_fd)

    # perturbation theory at beta = 0.1
    s = stark.solve_beta(stark.KCS, 0.1)
    pt = perturbation_levels(0.1, stark.KCS.mu_debye)
    ok_pt = (
        abs(s.w0 - pt["w0"]) < 1e-4
        and abs(s.w1 - pt["w1"]) < 1e-4
        and abs(s.d0 - pt["d0"]) < 1e-4
        and abs(s.d1 - pt["d1"]) < 1e-4
    )

    elapsed = time.perf_counter() - start
    ok = ok_norm and ok_flip and ok_rabi and ok_oracle and ok_hf and ok_pt and elapsed < 60.0
    report(
        "07 simulator properties", ok,
        f"norm drift {worst_norm_drift:.1e}, pi-flip ok {ok_flip}, rabi ok {ok_rabi}, "
        f"oracle fidelity 1-{1-oracle_fidelity:.1e}, HF ok {ok_hf}, PT ok {ok_pt}, {elapsed:.1f} s",
    )


def test_criterion_08_cnot_mechanism(layout2):
    start = time.perf_counter()
    schedule = compiler.compile_circuit(
        compiler.Circuit(2, (compiler.Cnot(0, 1),)),
        layout2,
        compiler.CompileSettings(kappa_cnot=20),
    )
    worst = 0.0
    for bits, want in (("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")):
        out, _ = pulsesim.run_schedule(
            pulsesim.RegisterState.basis_state(2, bits), schedule, layout2
        )
        worst = max(worst, 1.0 - out.population(want))
    ok_table = worst < 1e-2

    # selectivity envelope: peak wrong-branch flip probability vs Omega/delta_nu
    delta_nu = layout2.coupling(0, 1)
    peaks = []
    kappas = (10.0, 20.0, 40.0, 80.0)
    for kappa in kappas:
        pulse = compiler.compile_circuit(
            compiler.Circuit(2, (compiler.Cnot(0, 1),)),
            layout2,
            compiler.CompileSettings(kappa_cnot=kappa),
        ).pulses[0]
        state0 = pulsesim.RegisterState.basis_state(2, "00")
        peak = 0.0
        for t in np.linspace(pulse.duration / 150.0, pulse.duration, 150):
            out = pulsesim.evolve_pulse(
                state0, pulsesim.Pulse(0.0, t, pulse.frequency, pulse.rabi, pulse.phase), layout2
            )
            peak = max(peak, out.population("01") + out.population("11"))
        peaks.append(peak)
    slope = np.polyfit(np.log(1.0 / np.asarray(kappas)), np.log(peaks), 1)[0]
    elapsed = time.perf_counter() - start
    ok = ok_table and abs(slope - 2.0) <= 0.2 and elapsed < 30.0
    report(
        "08 cnot mechanism", ok,
        f"truth-table error {worst:.2e} < 1e-2 at kappa 20, envelope slope {slope:.3f} "
        f"over kappa {kappas}, {elapsed:.1f} s",
    )


def test_criterion_09_refocusing(echo_layout3):
    start = time.perf_counter()
    layout = echo_layout3
    delta_nu = max(layout.coupling(a, a + 1) for a in range(2))
    duration = 1.0 / (4.0 * delta_nu)
    settings = compiler.CompileSettings(
        kappa_onebit=helpers.synced_onebit_kappa(layout), kappa_cnot=20
    )
    schedule = compiler.compile_circuit(
        compiler.Circuit(3, (compiler.Idle(duration),)), layout, settings
    )
    frame = helpers.line_center_frame(layout)
    refocused = 1.0
    for seed in range(8):
        state = helpers.random_product_state(3, np.random.default_rng(seed))
        out, _ = pulsesim.run_schedule(state, schedule, layout)
        out = compiler.apply_frame_corrections(out, schedule)
        refocused = min(refocused, pulsesim.frame_fidelity(out, state, frame))

    plus = pulsesim.RegisterState(3, np.full(8, 1.0 / np.sqrt(8.0)))
    bare = pulsesim.evolve_idle(plus, duration, layout)
    unrefocused = pulsesim.frame_fidelity(bare, plus, frame)
    elapsed = time.perf_counter() - start
    ok = refocused > 0.999 and unrefocused < 0.9 and elapsed < 30.0
    report(
        "09 refocusing", ok,
        f"compiled idle fidelity {refocused:.5f} > 0.999, unrefocused {unrefocused:.3f} < 0.9, "
        f"idle {duration*1e6:.0f} us, {elapsed:.1f} s",
    )


def test_criterion_10_determinism(tmp_path):
    circuit = tmp_path / "c.circ"
    circuit.write_text("ROT 0 1.2 0.4\nCNOT 0 1\nIDLE 0.1\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sim": {"trajectories": 20, "seed": 777}}))
    outs = []
    for name in ("a", "b"):
        sim = tmp_path / f"sim_{name}.json"
        scan = tmp_path / f"scan_{name}.csv"
        budget = tmp_path / f"budget_{name}.json"
        assert cli.main(["simulate", "--config", str(cfg), "--circuit", str(circuit), "--out", str(sim)]) == 0
        assert cli.main(["stark-scan", "--out", str(scan), "--points", "31"]) == 0
        assert cli.main(["budget", "--out", str(budget)]) == 0
        outs.append((sim.read_bytes(), scan.read_bytes(), budget.read_bytes()))
    ok = outs[0] == outs[1]
    report("10 determinism", ok, "byte-identical simulate/stark-scan/budget outputs")
