"""Frozen reference values checked by the unit and acceptance tests."""
import math

LOG2 = math.log(2.0)

# Tr(rho(z+) rho(x+)) = 1/2 for the Bloch pair (0,0,1), (1,0,0)
HALF_OVERLAP_FS = math.pi / 4
HALF_OVERLAP_BURES_PURE = math.sqrt(0.5)
HALF_OVERLAP_BURES = math.sqrt(1 - math.sqrt(0.5))
BURES_POLE_VS_CENTER = math.sqrt(1 - 1 / math.sqrt(2))
DIV_POLE_VS_CENTER = LOG2
DIV_POLE_VS_DIAG = -math.log(0.75)

# minimum pairwise angle of the 1000-point Fibonacci lattice
FIBONACCI_1000_MIN_SEPARATION = 0.09781308358564764

# depolarizing b -> r b: log 2 - h((1 + r)/2)
DEPOLARIZING_CAPACITY = {
    0.25: 0.031583942,
    0.5: 0.130812036,
    0.9: 0.494631937,
}

# Choi spectrum of the depolarizing channel r I: (1 + 3r)/2 once, (1 - r)/2 three times
def depolarizing_choi_spectrum(r):
    return sorted([(1 + 3 * r) / 2] + [(1 - r) / 2] * 3)
