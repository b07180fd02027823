"""Step-by-step traces of the two aggregation recursions.

A two-arm dictionary of constant predictors and five observations, small
enough to follow every number.  The key detail both algorithms share: the
reported output averages the weights held *before* each update, so the
first contribution is always the uniform vector.
"""

import numpy as np

from mirroragg import (
    LabeledSample,
    LossSpec,
    Schedule,
    TabularDictionary,
    averaged_weights,
    lma_run,
    ma_init,
    ma_run,
    ma_step,
)

spec = LossSpec("squared", y_bound=1.0)
# arm 0 predicts 0.8 everywhere, arm 1 predicts -0.2
dictionary = TabularDictionary(np.array([[0.8], [-0.2]]))
data = [LabeledSample(0, y) for y in (0.9, 0.7, -0.1, 0.8, 0.6)]

print("gradient recursion, constant schedule beta = 1:")
sched = Schedule.constant(1.0)
state = ma_init(dictionary.size)
print(f"  step 0: mirrored = {state.mirrored}")
for i, z in enumerate(data, start=1):
    state = ma_step(state, z, spec, dictionary, sched)
    print(
        f"  step {i}: y = {z.y:+.1f}  scores = [{state.scores[0]:+.3f}, {state.scores[1]:+.3f}]"
        f"  mirrored = [{state.mirrored[0]:.4f}, {state.mirrored[1]:.4f}]"
    )
theta = averaged_weights(state)
print(f"  averaged output: [{theta[0]:.4f}, {theta[1]:.4f}]")

theta_again, predictor = ma_run(data, spec, dictionary, sched)
assert np.allclose(theta, theta_again)
print(f"  mixture prediction at x = 0: {predictor(0):+.4f}")
print()

print("linearized recursion at beta = 1 (scores are summed per-arm losses):")
theta_lin, predictor_lin = lma_run(data, spec, dictionary, beta=1.0)
print(f"  averaged output: [{theta_lin[0]:.4f}, {theta_lin[1]:.4f}]")
print(f"  mixture prediction at x = 0: {predictor_lin(0):+.4f}")
print()

# With a single observation nothing has been learned yet: the averaged
# output is exactly uniform for both recursions.
one = data[:1]
print("single observation, both outputs stay uniform:")
print("  gradient:  ", ma_run(one, spec, dictionary, sched)[0])
print("  linearized:", lma_run(one, spec, dictionary, 1.0)[0])
