"""Probing when a loss behaves at a given temperature.

Two checkers: a Monte Carlo estimate of the exponential-moment quantity
whose sign separates good from bad temperatures, and an exact secant test
of concavity of the exponential map on the simplex.  Both come with an
instance where they fail, which is half the point the checkers are only
useful if they can say no.
"""

import math

from mirroragg import (
    GeneratorSpec,
    LossSpec,
    check_exp_map_concavity,
    check_nice_loss,
    generate_instance,
    nice_beta_report,
    surrogate_mixture_loss,
)

squared = LossSpec("squared", y_bound=1.0)
exponential = LossSpec("phi_exponential")

print("exponential-moment check, squared loss (10000 replicates each):")
benchmark = GeneratorSpec(family="bounded_regression", grid_size=16, noise_level=0.25)
dist, dictionary = generate_instance(benchmark, m=8, seed=424243)
for beta in (16.0, 0.16):
    v = check_nice_loss(squared, dictionary, dist, beta=beta, n=64, mc_outer=10_000, seed=424243)
    print(f"  regression benchmark, beta = {beta:>5}: {v.verdict:<12} estimate {v.estimate:+.3e}")

# The near-tie ladder is noisy constants with almost equal risks; at a
# temperature a hundred times too small the inequality visibly flips.
ladder = GeneratorSpec(family="near_tie", grid_size=4, noise_level=0.5, tie_gap=0.01)
tie_dist, tie_dict = generate_instance(ladder, m=8, seed=424243)
for beta in (16.0, 0.16):
    v = check_nice_loss(squared, tie_dict, tie_dist, beta=beta, n=64, mc_outer=10_000, seed=424243)
    print(f"  near-tie ladder,      beta = {beta:>5}: {v.verdict:<12} estimate {v.estimate:+.3e}")
print()

print("concavity of the exponential map, exponential loss:")
classifiers = GeneratorSpec(family="phi_classification", grid_size=8)
c_dist, c_dict = generate_instance(classifiers, m=6, seed=1000)
for beta in (math.e, 0.5):
    v = check_exp_map_concavity(exponential, c_dict, c_dist, beta=beta, seed=0)
    print(f"  random classifiers, beta = {beta:.3f}: {v.verdict} (worst secant slack {v.estimate:+.2e})")

# Negative control: replace the mixture loss by its linearization.  The
# map becomes exp(affine), which is convex, so violations must appear.
surrogate = surrogate_mixture_loss(exponential, c_dict, c_dist)
v = check_exp_map_concavity(
    exponential, c_dict, c_dist, beta=math.e, seed=0, mixture_loss=surrogate
)
print(f"  same instance, linear surrogate loss: {v.verdict}")
if v.witness is not None:
    a, b = v.witness
    print(f"    witness pair: {a.round(4)} / {b.round(4)}")
print()

print("minimal temperatures from the margin-loss criterion:")
for kind in ("phi_exponential", "phi_logit2"):
    r = nice_beta_report(kind)
    print(
        f"  {kind}: computed {r.computed_beta:.6f}, commonly quoted {r.quoted_beta:.6f}, "
        f"agrees: {r.agrees}"
    )
try:
    nice_beta_report("phi_hinge")
except ValueError as exc:
    print(f"  phi_hinge: {exc}")
