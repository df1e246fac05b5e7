"""Design calculator and pulse-level simulator for a 1-D array of
field-oriented polar-molecule qubits.

Subpackages:

- :mod:`polarsim.units`       constants and unit conversions
- :mod:`polarsim.stark`       rigid rotor in a static field (pendular states)
- :mod:`polarsim.device`      register geometry, addressing, couplings
- :mod:`polarsim.pulsesim`    state-vector simulation of RWA pulse schedules
- :mod:`polarsim.compiler`    circuit -> pulse schedule with echo refocusing
- :mod:`polarsim.noisebudget` decoherence and technical-noise requirements
- :mod:`polarsim.cli`         batch front-end (stark-scan, design-report,
  simulate, budget)
"""

__version__ = "0.1.0"
