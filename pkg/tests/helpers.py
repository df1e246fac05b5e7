"""Shared fixtures-adjacent helpers for the test suite."""

import numpy as np

from polarsim import device, pulsesim, stark


def echo_field(gradient_factor=32.0):
    """Reference field with the gradient scaled up for echo headroom.

    Echo pi pulses need addressing headroom (site step much larger than
    their Rabi frequency); a short test register can afford a steeper
    gradient than the full 9090-site drive plan uses.
    """
    base = device.paper_field_profile()
    return device.FieldProfile(
        e0_v_per_cm=base.e0_v_per_cm,
        gradient_v_per_cm_per_mm=base.gradient_v_per_cm_per_mm * gradient_factor,
    )


def echo_layout(n, gradient_factor=32.0):
    return device.build_layout(stark.KCS, device.PAPER_TRAP, echo_field(gradient_factor), n)


def synced_onebit_kappa(layout, target_rabi=240e3):
    """kappa_onebit whose echo pulses complete an integer number of
    generalized Rabi cycles on the neighboring sites (zero residual
    transfer at pulse end)."""
    step = float(np.min(np.diff(layout.nu_exact)))
    m = max(1, round(np.hypot(target_rabi, step) / (2.0 * target_rabi)))
    omega = step / np.sqrt(4.0 * m * m - 1.0)
    return omega / layout.max_coupling()


def random_product_state(n, rng):
    """Haar-random single-qubit states on every site."""
    amps = np.array([1.0], dtype=complex)
    for _ in range(n):
        theta = np.arccos(2.0 * rng.random() - 1.0)
        phi = 2.0 * np.pi * rng.random()
        qubit = np.array([np.cos(theta / 2.0), np.exp(1j * phi) * np.sin(theta / 2.0)])
        amps = np.kron(qubit, amps)  # site 0 = least significant
    return pulsesim.RegisterState(n, amps)


def line_center_frame(layout):
    return np.array([layout.line_center(a) for a in range(layout.n)])


def population_fidelity(probabilities, reference_probabilities):
    """Classical (Bhattacharyya) fidelity of two distributions."""
    return float(np.sum(np.sqrt(probabilities * reference_probabilities)) ** 2)
