"""Softmin weighting basics: temperature, shift invariance, big scores.

The Gibbs map sends accumulated scores to simplex weights with mass
concentrated on the smallest entries.  Temperature controls how hard the
concentration is; only score differences matter; and the implementation
shifts before exponentiating, so absurdly large scores are fine.
"""

import numpy as np

from mirroragg import gibbs_map

scores = np.array([0.0, 0.5, 2.0, 5.0])
print("scores:", scores)
print()

print("temperature sweep (rows sum to 1, lower score -> more weight):")
for beta in (0.1, 0.5, 1.0, 5.0, 100.0):
    theta = gibbs_map(scores, beta)
    print(f"  beta = {beta:>6}: " + "  ".join(f"{w:.4f}" for w in theta))
print()

# Only differences matter: shifting every score by a constant is a no-op.
shifted = gibbs_map(scores + 1234.5, 1.0)
baseline = gibbs_map(scores, 1.0)
print("shift invariance, max |difference|:", np.max(np.abs(shifted - baseline)))
print()

# Scores in the hundreds of thousands would overflow a naive exp; the
# max-shift keeps everything finite.
huge = np.array([1e6, 1e6 + 1.0, 1e6 + 2.0])
print("huge scores", huge, "->", gibbs_map(huge, 1.0))

# At tiny temperature the map is effectively argmin.
print("beta = 1e-6 on", scores, "->", gibbs_map(scores, 1e-6))
