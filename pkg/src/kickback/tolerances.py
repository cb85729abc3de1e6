"""Centralized numerical tolerances.

VALID_TOL guards type invariants (hermiticity, trace, positivity, unitarity).
EQ_TOL is the entrywise tolerance for equality of the two decoherence routes
acting on the same input. CERT_TOL is the default pass threshold for
equivalence certificates, looser than EQ_TOL because certified pairs may
involve discretized continuous weights. ZERO_TOL is the magnitude below which
a complex coherence is treated as exactly zero when reporting phases.
"""

VALID_TOL = 1e-10
EQ_TOL = 1e-9
CERT_TOL = 1e-8
ZERO_TOL = 1e-14
