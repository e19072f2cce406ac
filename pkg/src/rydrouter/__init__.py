"""Direction-switchable single-photon readout from a Rydberg ensemble.

Calculators for the level scheme, emission geometry and pulse timing of a
redirected collective readout, plus a deterministic thermal Monte Carlo of
the motional-dephasing suppression, exposed as an HTTP service with a thin
command-line client.
"""

__version__ = "0.1.0"
