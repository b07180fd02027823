"""Exact risks and the two oracles on finite-support instances.

With finitely many atoms every population risk is a weighted sum, so the
selection oracle is plain enumeration and the convex oracle is a small
simplex minimization with a duality-gap certificate.
"""

import numpy as np

from mirroragg import (
    FiniteDistribution,
    LabeledSample,
    LossSpec,
    TabularDictionary,
    c_oracle,
    exact_risk,
    ms_oracle,
    uniform_weights,
)

spec = LossSpec("squared", y_bound=1.0)

# three arms over four design points; responses have a small quirk arm 2
# tracks best, but no single arm is perfect
values = np.array(
    [
        [0.9, 0.1, -0.5, 0.3],
        [-0.2, 0.4, 0.1, -0.6],
        [0.5, 0.3, -0.2, 0.1],
    ]
)
dictionary = TabularDictionary(values)
atoms = [
    (LabeledSample(0, 0.55), 0.25),
    (LabeledSample(1, 0.35), 0.25),
    (LabeledSample(2, -0.30), 0.25),
    (LabeledSample(3, 0.05), 0.25),
]
dist = FiniteDistribution(atoms)

print("per-arm risks:")
for j in range(dictionary.size):
    print(f"  arm {j}: {exact_risk(j, dictionary, spec, dist):.6f}")

ms = ms_oracle(dictionary, spec, dist)
print(f"selection oracle: arm {ms.minimizer}, risk {ms.risk_value:.6f}")

convex = c_oracle(dictionary, spec, dist)
weights = ", ".join(f"{w:.4f}" for w in convex.minimizer)
print(f"convex oracle:    weights [{weights}], risk {convex.risk_value:.6f}")
print(f"                  certified optimality gap {convex.gap_certificate:.2e}")

uniform_risk = exact_risk(uniform_weights(3), dictionary, spec, dist)
print(f"uniform mixture:  risk {uniform_risk:.6f}")
print()
print("ordering: convex <= selection <= uniform mixture here:")
print(f"  {convex.risk_value:.6f} <= {ms.risk_value:.6f} <= {uniform_risk:.6f}")
print()

# Hinge with predictions inside [-1, 1] is affine in the mixture weights,
# so the convex minimum sits at a vertex and the two oracles coincide.
hinge = LossSpec("phi_hinge")
rng = np.random.default_rng(3)
class_values = rng.uniform(-1.0, 1.0, (4, 3))
class_atoms = []
for x, eta in enumerate((0.8, 0.3, 0.6)):
    class_atoms.append((LabeledSample(x, 1.0), eta / 3))
    class_atoms.append((LabeledSample(x, -1.0), (1.0 - eta) / 3))
class_dict = TabularDictionary(class_values)
class_dist = FiniteDistribution(class_atoms)
h_ms = ms_oracle(class_dict, hinge, class_dist)
h_c = c_oracle(class_dict, hinge, class_dist)
print("hinge loss, values in [-1, 1]:")
print(f"  selection {h_ms.risk_value:.8f}  convex {h_c.risk_value:.8f}"
      f"  difference {abs(h_ms.risk_value - h_c.risk_value):.2e}")
