"""Invert the accountant: what epsilon does a delta budget buy?

delta(epsilon) is convex and decreasing, so the Newton iteration in
epsilon_of_delta converges in a handful of steps. This script inverts a
few budgets for a fixed training run and then replays one of them through
the slow bisection oracle as an independent check.
"""

from dpconv import CompositionQuery, Grid, MechanismSpec, delta_of_epsilon, epsilon_of_delta
from dpconv.oracle import bisection_epsilon

mechanism = MechanismSpec(sigma=1.5, q=0.01)
grid = Grid(12.0, 2**17)
steps = 10_000

print(f"{'target delta':>14}  {'epsilon':>20}  {'achieved delta':>20}  {'iters':>5}")
for target in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7):
    query = CompositionQuery.homogeneous(mechanism, k=steps, grid=grid, delta=target)
    result = epsilon_of_delta(query)
    print(
        f"{target:>14.1e}  {result.value:>20.12f}  {result.delta:>20.12e}  "
        f"{result.newton_iterations:>5}"
    )

# Round trip: the delta at the returned epsilon should hit the target to
# within the Newton tolerance (1e-10 by default).
target = 1e-5
query = CompositionQuery.homogeneous(mechanism, k=steps, grid=grid, delta=target)
inverted = epsilon_of_delta(query)
forward = delta_of_epsilon(
    CompositionQuery.homogeneous(mechanism, k=steps, grid=grid, epsilon=inverted.value)
)
print(f"\nround trip at target {target:.0e}:")
print(f"  epsilon_of_delta -> {inverted.value:.12f}")
print(f"  delta_of_epsilon back -> {forward.value:.12e} (residual {abs(forward.value - target):.2e})")

oracle_eps = bisection_epsilon(mechanism, steps, grid, target)
print(f"  bisection oracle  -> {oracle_eps:.12f} (gap {abs(oracle_eps - inverted.value):.2e})")
