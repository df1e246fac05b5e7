"""Physical constants and unit conversions.

Working units throughout the package: energies are stored as E/h in Hz,
dipole moments in Debye, static electric fields in V/cm, device lengths in
um (array geometry) or mm (beam geometry), temperatures in K, times in s.
Every number quoted by the design (rotational constant, addressing
frequencies, trap depth, noise densities) is naturally a frequency, so E/h
bookkeeping avoids stray factors of h in the physics modules.

Constants are CODATA 2018 values taken from scipy.constants; h and k_B are
exact SI definitions.
"""

import numpy as np
from scipy import constants as _const

H_PLANCK = _const.h                 # J s (exact)
K_BOLTZMANN = _const.k              # J/K (exact)
EPSILON_0 = _const.epsilon_0        # F/m
DEBYE = 1e-21 / _const.c            # C m, 1 D = 1e-21/c by definition

# 1 Debye in a 1 V/cm field, expressed as a frequency: d*E/h.
HZ_PER_DEBYE_V_PER_CM = DEBYE * 1e2 / H_PLANCK

# Dipole-dipole prefactor: d1*d2/(4 pi eps0 r^3) / h for d in Debye, r in um.
_DIPOLE_DIPOLE_HZ_UM3 = DEBYE**2 / (4.0 * np.pi * EPSILON_0 * H_PLANCK * 1e-18)


def dipole_field_to_frequency(d_debye, field_v_per_cm):
    """Interaction energy d*E of a dipole in a static field, in Hz (E/h).

    Sign-preserving: either argument may be negative.
    """
    return d_debye * field_v_per_cm * HZ_PER_DEBYE_V_PER_CM


def reduced_field_beta(mu_debye, field_v_per_cm, b_hz):
    """Dimensionless field strength beta = mu*E/(h*B) of the rotor Stark problem."""
    if b_hz <= 0:
        raise ValueError(f"rotational constant must be positive, got {b_hz}")
    if mu_debye <= 0:
        raise ValueError(f"dipole moment must be positive, got {mu_debye}")
    return dipole_field_to_frequency(mu_debye, field_v_per_cm) / b_hz


def field_for_beta(mu_debye, beta, b_hz):
    """Static field (V/cm) at which the reduced field equals ``beta``.

    Exact inverse of :func:`reduced_field_beta`.
    """
    if b_hz <= 0:
        raise ValueError(f"rotational constant must be positive, got {b_hz}")
    if mu_debye <= 0:
        raise ValueError(f"dipole moment must be positive, got {mu_debye}")
    return beta * b_hz / (mu_debye * HZ_PER_DEBYE_V_PER_CM)


def temperature_to_frequency(t_kelvin):
    """k_B*T/h in Hz. Rejects negative temperatures."""
    if np.any(np.asarray(t_kelvin) < 0):
        raise ValueError(f"temperature must be non-negative, got {t_kelvin}")
    return K_BOLTZMANN * t_kelvin / H_PLANCK


def dipole_dipole_coupling(d1_debye, d2_debye, separation_um):
    """Energy shift d1*d2/(4 pi eps0 r^3) of two parallel dipoles, in Hz.

    Dipoles are taken perpendicular to their separation (field axis normal
    to the trap axis), which makes the interaction +d1*d2/(4 pi eps0 r^3).
    Signed: anti-parallel dipoles (one argument negative) give a negative
    shift.
    """
    if np.any(np.asarray(separation_um) <= 0):
        raise ValueError("separation must be positive")
    return _DIPOLE_DIPOLE_HZ_UM3 * d1_debye * d2_debye / separation_um**3
