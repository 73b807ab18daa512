from __future__ import annotations

import numpy as np

# spawn-key purposes; stream identity depends only on (seed, trial, purpose)
TRUTH_STREAM = 0
MEASUREMENT_STREAM = 1


def trial_generator(master_seed: int, trial_index: int, purpose: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index), int(purpose)))
    return np.random.default_rng(seq)
