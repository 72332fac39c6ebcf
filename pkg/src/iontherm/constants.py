"""Physical constants pinned to fixed published values.

All outputs of the toolkit are derived from this one table so results
never drift between builds or host environments (CODATA 2018).
"""

HBAR = 1.054571817e-34  # reduced Planck constant, J s
ATOMIC_MASS = 1.66053906660e-27  # unified atomic mass unit, kg

# Default probe ion: 40Ca+ (mass of the singly charged ion is taken as the
# neutral atomic mass; the electron mass deficit is far below fit precision).
CA40_MASS_AMU = 39.9626
