"""Independent oracles the tests check the package against.

Everything here is deliberately written from the raw definitions with its
own constants and loop-level arithmetic, so that agreement with the
package is a genuine cross-check rather than the same code evaluated
twice.
"""

import numpy as np
import scipy.constants
import scipy.linalg

from polarsim.stark import build_hamiltonian


def rabi_transfer(omega, detuning, t):
    """Two-level transfer probability of a rectangular pulse (closed form)."""
    w = np.hypot(omega, detuning)
    if w == 0:
        return 0.0
    return (omega / w) ** 2 * np.sin(np.pi * w * t) ** 2


def perturbation_levels(beta, mu_debye):
    """Second-order perturbation theory for the two m=0 qubit levels.

    Energies in units of B, dipoles in Debye: W0 = -beta^2/6,
    W1 = 2 + beta^2/10, d0 = mu*beta/3, d1 = -mu*beta/5.
    """
    return {
        "w0": -(beta**2) / 6.0,
        "w1": 2.0 + beta**2 / 10.0,
        "d0": mu_debye * beta / 3.0,
        "d1": -mu_debye * beta / 5.0,
    }


def finite_difference_dipoles(beta, mu_debye, jmax=25, h=1e-4):
    """Induced dipoles from a central difference of the eigenvalues.

    d_i = -mu * dW_i/dbeta, with the energies from a plain dense
    eigenvalue solve; no eigenvector expectation values involved.
    """
    w_plus = np.linalg.eigvalsh(build_hamiltonian(beta + h, 0, jmax))
    w_minus = np.linalg.eigvalsh(build_hamiltonian(beta - h, 0, jmax))
    d0 = -mu_debye * (w_plus[0] - w_minus[0]) / (2.0 * h)
    d1 = -mu_debye * (w_plus[1] - w_minus[1]) / (2.0 * h)
    return d0, d1


def _oracle_diagonal(layout):
    """Basis-state energies in Hz, from explicit loops and scipy constants."""
    n = layout.n
    debye = 1e-21 / scipy.constants.c
    coupling_j_m3 = debye * debye / (4.0 * np.pi * scipy.constants.epsilon_0)
    diag = np.zeros(2**n)
    for s in range(2**n):
        bits = [(s >> a) & 1 for a in range(n)]
        total = 0.0
        for a in range(n):
            total += layout.w1_hz[a] if bits[a] else layout.w0_hz[a]
        for a in range(n):
            for b in range(a + 1, n):
                da = layout.d1[a] if bits[a] else layout.d0[a]
                db = layout.d1[b] if bits[b] else layout.d0[b]
                r = abs(layout.positions_um[a] - layout.positions_um[b]) * 1e-6
                total += coupling_j_m3 * da * db / r**3 / scipy.constants.h
        diag[s] = total
    return diag


def brute_force_schedule(amplitudes, pulses, total_duration, layout, oversample=100):
    """Fine-step integrator for a pulse schedule, in the rotating frame.

    Each pulse is evolved as a product of per-step matrix exponentials of
    the (time-independent) rotating-frame Hamiltonian, with the step set
    by the spread of that Hamiltonian after removing its trace offset;
    idles are exact diagonal phases. Global phases are not tracked.
    """
    n = layout.n
    dim = 2**n
    diag = _oracle_diagonal(layout)
    pops = np.array([bin(s).count("1") for s in range(dim)])
    psi = np.array(amplitudes, dtype=complex)
    t = 0.0
    for p in pulses:
        if p.start > t:
            psi = psi * np.exp(-2j * np.pi * diag * (p.start - t))
            t = p.start
        ham = np.zeros((dim, dim), dtype=complex)
        for s in range(dim):
            ham[s, s] = diag[s] - p.frequency * pops[s]
        for s in range(dim):
            for a in range(n):
                if not (s >> a) & 1:
                    up = s | (1 << a)
                    ham[up, s] += 0.5 * p.rabi * np.exp(-1j * p.phase)
                    ham[s, up] += 0.5 * p.rabi * np.conj(np.exp(-1j * p.phase))
        shift = ham.diagonal().real.min()
        ham = ham - shift * np.eye(dim)
        scale = np.abs(ham).sum(axis=1).max()
        steps = max(1, int(np.ceil(p.duration * oversample * scale)))
        dt = p.duration / steps
        u_dt = scipy.linalg.expm(-2j * np.pi * ham * dt)
        psi = psi * np.exp(2j * np.pi * p.frequency * pops * t)
        for _ in range(steps):
            psi = u_dt @ psi
        t = p.start + p.duration
        psi = psi * np.exp(-2j * np.pi * p.frequency * pops * t)
    if total_duration > t:
        psi = psi * np.exp(-2j * np.pi * diag * (total_duration - t))
    return psi


def ideal_gate_matrix(circuit):
    """Dense unitary of a circuit from explicit kron products."""
    eye = np.eye(2)
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    y = np.array([[0.0, -1j], [1j, 0.0]])
    u = np.eye(2**circuit.n, dtype=complex)
    for op in circuit.ops:
        name = type(op).__name__
        if name == "Rot":
            axis = np.cos(op.phi) * x + np.sin(op.phi) * y
            gate = scipy.linalg.expm(-1j * op.theta / 2.0 * axis)
            full = np.array([[1.0]])
            for site in range(circuit.n):
                factor = gate if site == op.site else eye
                full = np.kron(factor, full)  # site 0 = least significant
            u = full @ u
        elif name == "Cnot":
            dim = 2**circuit.n
            full = np.zeros((dim, dim))
            for s in range(dim):
                out = s ^ (1 << op.target) if (s >> op.control) & 1 else s
                full[out, s] = 1.0
            u = full @ u
    return u
