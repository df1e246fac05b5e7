"""Rigid polar rotor in a static electric field.

The field mixes rotational levels into pendular states. The two qubit
levels are the lowest two m = 0 eigenstates (adiabatically connected to
J = 0 and J = 1, m = 0); the solver returns their energies, their induced
dipole moments d0 and d1 (aligned with / against the field), the effective
dipole d_eff = |d0 - d1| that sets addressability and qubit-qubit coupling,
and the transition dipole mu_t that sets drive strength.

In reduced form the m-block Hamiltonian is H/(hB) = J(J+1) - beta*cos(theta)
with beta = mu*E/(hB); energies below are in units of B and dipoles in
Debye. Induced dipoles come from the Hellmann-Feynman identity
d_i = -mu * dW_i/dbeta = mu * <cos(theta)>_i, evaluated as an expectation
value in the eigenvector (exact, no numerical derivative).
"""

from dataclasses import dataclass

import numpy as np

from . import units

DEFAULT_JMAX = 20
# Basis increment for the automatic truncation-convergence check.
_JMAX_STEP = 5
_CONVERGENCE_RTOL = 1e-10


@dataclass(frozen=True)
class MoleculeSpec:
    """Rigid-rotor parameters of a polar diatomic molecule."""

    name: str
    b_hz: float          # rotational constant, Hz (E/h)
    mu_debye: float      # body-frame dipole moment, Debye

    def __post_init__(self):
        if self.b_hz <= 0:
            raise ValueError(f"rotational constant must be positive, got {self.b_hz}")
        if self.mu_debye <= 0:
            raise ValueError(f"dipole moment must be positive, got {self.mu_debye}")


#: Default molecule: KCs, B = 1.0 GHz, mu = 1.92 D.
KCS = MoleculeSpec(name="KCs", b_hz=1.0e9, mu_debye=1.92)


@dataclass(frozen=True)
class StarkSolution:
    """Qubit-level solution of the Stark problem at one field value.

    Energies w0, w1 are in units of B (multiply by B for Hz); dipoles are
    in Debye. d0 >= 0 is the dipole induced in the lower qubit state
    (polarized along the field); d1 starts negative (against the field) and
    turns positive at strong field. jmax_used records the basis truncation
    that passed the convergence check.
    """

    beta: float
    w0: float
    w1: float
    d0: float
    d1: float
    d_eff: float
    mu_t: float
    jmax_used: int


class TruncationError(RuntimeError):
    """Basis truncation failed the automatic convergence check."""


def cos_theta_element(j, m):
    """Matrix element <J+1, m|cos(theta)|J, m| of the orientation cosine.

    cos(theta) only connects J <-> J+-1 at fixed m; this is the upward
    element sqrt(((J+1)^2 - m^2) / ((2J+1)(2J+3))).
    """
    if j < 0:
        raise ValueError(f"J must be non-negative, got {j}")
    if abs(m) > j:
        raise ValueError(f"|m| must not exceed J, got m={m}, J={j}")
    return np.sqrt(((j + 1) ** 2 - m**2) / ((2 * j + 1) * (2 * j + 3)))


def build_hamiltonian(beta, m, jmax):
    """Stark Hamiltonian of the m-block in units of B.

    Basis J = |m| .. jmax; diagonal J(J+1), off-diagonal
    -beta * <J+1,m|cos(theta)|J,m>. Real symmetric tridiagonal, returned
    dense.
    """
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    if jmax < abs(m) + 2:
        raise ValueError(f"jmax must be at least |m| + 2, got jmax={jmax}, m={m}")
    js = np.arange(abs(m), jmax + 1)
    h = np.diag(js * (js + 1.0)).astype(float)
    off = -beta * np.array([cos_theta_element(j, m) for j in js[:-1]])
    idx = np.arange(len(js) - 1)
    h[idx, idx + 1] = off
    h[idx + 1, idx] = off
    return h


def _solve_m0(beta, jmax):
    """Two lowest m = 0 eigenpairs plus dipole expectation values.

    Returns (w0, w1, c0, c1, x) where w are energies in units of B, c the
    <cos(theta)> expectation values, and x the cross element
    <psi1|cos(theta)|psi0| (non-negative).
    """
    h = build_hamiltonian(beta, 0, jmax)
    w, v = np.linalg.eigh(h)
    v0, v1 = v[:, 0], v[:, 1]
    elems = np.array([cos_theta_element(j, 0) for j in range(jmax)])
    c0 = 2.0 * np.sum(elems * v0[:-1] * v0[1:])
    c1 = 2.0 * np.sum(elems * v1[:-1] * v1[1:])
    x = abs(np.sum(elems * (v1[:-1] * v0[1:] + v1[1:] * v0[:-1])))
    return w[0], w[1], c0, c1, x


def solve_beta(mol: MoleculeSpec, beta, jmax=DEFAULT_JMAX) -> StarkSolution:
    """Qubit-level Stark solution at reduced field ``beta``.

    Solves at ``jmax`` and ``jmax + 5`` and rejects the truncation unless
    energies and dipoles agree to 1e-10 (relative, with an absolute floor
    of one unit of B / one Debye for near-zero values).
    """
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    coarse = _solve_m0(beta, jmax)
    jmax_used = jmax + _JMAX_STEP
    fine = _solve_m0(beta, jmax_used)
    for a, b in zip(coarse[:4], fine[:4]):
        if abs(a - b) > _CONVERGENCE_RTOL * max(1.0, abs(b)):
            raise TruncationError(
                f"Stark solution not converged at jmax={jmax} for beta={beta}: "
                f"{a!r} vs {b!r} with jmax={jmax_used}"
            )
    w0, w1, c0, c1, x = fine
    mu = mol.mu_debye
    return StarkSolution(
        beta=float(beta),
        w0=float(w0),
        w1=float(w1),
        d0=float(mu * c0),
        d1=float(mu * c1),
        d_eff=float(abs(mu * c0 - mu * c1)),
        mu_t=float(mu * x),
        jmax_used=jmax_used,
    )


def qubit_levels(mol: MoleculeSpec, field_v_per_cm, jmax=DEFAULT_JMAX) -> StarkSolution:
    """Qubit-level Stark solution at a static field given in V/cm."""
    if field_v_per_cm < 0:
        raise ValueError(f"field must be non-negative, got {field_v_per_cm}")
    beta = units.reduced_field_beta(mol.mu_debye, field_v_per_cm, mol.b_hz)
    return solve_beta(mol, beta, jmax)


def field_at_beta(mol: MoleculeSpec, beta):
    """Static field (V/cm) at which the molecule reaches reduced field ``beta``."""
    return units.field_for_beta(mol.mu_debye, beta, mol.b_hz)


def stark_scan(mol: MoleculeSpec, beta_grid, jmax=DEFAULT_JMAX):
    """Stark solutions over a grid of reduced fields.

    The grid must be non-empty and strictly increasing. Returns one
    StarkSolution per grid point, in grid order.
    """
    grid = np.asarray(beta_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("beta grid is empty")
    if np.any(grid < 0):
        raise ValueError("beta grid values must be non-negative")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("beta grid must be strictly increasing")
    return [solve_beta(mol, b, jmax) for b in grid]
