"""Shared physical constants, SI units."""

import math

TWO_PI = 2.0 * math.pi

# Exact by the 2019 SI redefinition.
BOLTZMANN = 1.380649e-23  # J/K
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

# Cs-133 atomic mass, 132.905451933 u.
CS133_MASS = 132.905451933 * ATOMIC_MASS_UNIT  # kg
