DEFAULT_QPURIFY_TOML = """[qpurify]
# Number of qubits sent through the channel (even)
n = 6

# Weight of the original state after depolarization, 0.5 <= c1 <= 1
c1 = 0.75

# Monte Carlo trials per configuration cell
trials = 40000

# Measurement direction rule: "adaptive" or "random"
strategy = "adaptive"

# Purify before estimating
purify = true

# "exact" averages every purification outcome M with p_M, "sampled" draws one
weighting = "exact"

# Posterior / search grid points on the Bloch sphere (even)
grid_size = 1024

seed = 20020101

# Worker processes; leave unset for machine parallelism
# workers = 4

# --- sweep ---
compare = "purify"
c1_min = 0.5
c1_max = 1.0
c1_steps = 11
"""
