"""Global numerical tolerances and clamps, fixed in one place."""

# Relative tolerance for matrix-factorization reconstruction checks.
RECON_RTOL = 1e-9

# Absolute tolerance on ||F*F - I||_F below which a matrix counts as semi-unitary.
UNITARY_ATOL = 1e-10

# Absolute tolerance for capacity identities (chain rule, unitary invariance).
CAPACITY_ATOL = 1e-9

# Bit LLR magnitude representing a noiseless observation.  Large enough that no
# decoder decision can be affected, small enough that exp() never overflows.
LLR_CLAMP = 40.0

# Ceiling on density-evolution LLR means; beyond this every synthesized channel
# is error-free for any practical purpose.
GA_MEAN_CLAMP = 1e5
