"""Tight (epsilon, delta) guarantees for composed subsampled Gaussian mechanisms.

The forward direction evaluates, for a composition described by a
CompositionQuery, the truncated and discretised integral

    delta(eps) = dx * sum_{l >= l_eps} (1 - exp(eps - x_l)) * C_l,

where C is the convolved privacy loss density from module spectral and l_eps
is the first grid index strictly to the right of eps. The reverse direction
inverts delta(eps) with a bracketed Newton iteration that reuses the single
convolution across all iterations.

The remove/add relation is asymmetric: the tight delta is the larger of the
two likelihood-ratio directions, so Poisson queries run the pipeline once per
direction and report both. The substitute schemes are self-dual and run once.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import error_bounds
from .discretization import Grid, discretize
from .errors import (
    DomainError,
    NonConvergenceError,
    TargetDeltaBelowFloor,
    TargetDeltaTooLarge,
)
from .mechanisms import Direction, MechanismSpec, Scheme
from .spectral import ConvolvedPld, convolution_power, convolution_product

_NEWTON_MAX_ITER = 50
_DERIVATIVE_FLOOR = 1e-300
_EMPTY_SUM_WARNING = "epsilon exceeds truncation radius"
_OVER_UNITY_WARNING = "computed delta exceeded 1; the grid under-resolves this composition"


@dataclass(frozen=True)
class CompositionQuery:
    """One accounting question: a composition, a grid, and a target.

    specs and counts describe the composition: counts[i] invocations of
    specs[i], convolved together. Exactly one of epsilon (for delta_of_epsilon)
    or delta (for epsilon_of_delta) should be set.
    """

    specs: tuple[MechanismSpec, ...]
    counts: tuple[int, ...]
    grid: Grid
    epsilon: float | None = None
    delta: float | None = None
    newton_tolerance: float = 1e-10

    def __post_init__(self) -> None:
        if not self.specs:
            raise DomainError("a query needs at least one mechanism")
        if len(self.specs) != len(self.counts):
            raise DomainError(
                f"got {len(self.specs)} specs but {len(self.counts)} repetition counts"
            )
        if any(c < 1 for c in self.counts):
            raise DomainError(f"all repetition counts must be >= 1, got {self.counts}")
        if self.epsilon is not None and self.epsilon < 0.0:
            raise DomainError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.delta is not None and not (0.0 < self.delta < 1.0):
            raise DomainError(f"target delta must lie in (0, 1), got {self.delta}")
        if self.newton_tolerance <= 0.0:
            raise DomainError(f"newton_tolerance must be positive, got {self.newton_tolerance}")

    @classmethod
    def homogeneous(
        cls,
        spec: MechanismSpec,
        k: int,
        grid: Grid,
        epsilon: float | None = None,
        delta: float | None = None,
        newton_tolerance: float = 1e-10,
    ) -> "CompositionQuery":
        """k repetitions of a single mechanism."""
        return cls(
            specs=(spec,),
            counts=(k,),
            grid=grid,
            epsilon=epsilon,
            delta=delta,
            newton_tolerance=newton_tolerance,
        )

    @property
    def k(self) -> int:
        """Total number of composed mechanism invocations."""
        return int(sum(self.counts))


@dataclass(frozen=True)
class DeltaResult:
    """Outcome of one accounting computation.

    For kind "delta", value is delta at the queried epsilon. For kind
    "epsilon", value is the epsilon returned by the Newton inversion and
    delta is the delta actually achieved there. per_direction maps each
    evaluated likelihood-ratio direction to its delta; value is their max
    for kind "delta". ell_eps is the first grid index entering the weighted
    sum in the direction that attains the max.
    """

    value: float
    kind: str
    epsilon: float
    delta: float
    ell_eps: int
    per_direction: tuple[tuple[str, float], ...]
    warnings: tuple[str, ...]
    query: CompositionQuery
    tail_estimate: float
    tail_estimate_valid: bool
    discretization_estimate: float | None = None
    newton_iterations: int | None = None


def _directions_needed(specs: tuple[MechanismSpec, ...]) -> list[Direction]:
    """Both directions when any mechanism uses the asymmetric remove/add
    relation, a single pass otherwise (substitute losses are odd)."""
    if any(s.scheme is Scheme.POISSON for s in specs):
        return [Direction.X_OVER_Y, Direction.Y_OVER_X]
    return [Direction.X_OVER_Y]


def _oriented(spec: MechanismSpec, direction: Direction) -> MechanismSpec:
    if spec.scheme is not Scheme.POISSON or spec.direction is direction:
        return spec
    return dataclasses.replace(spec, direction=direction)


def _convolved(query: CompositionQuery, direction: Direction) -> ConvolvedPld:
    """Builds C for one direction, grouping repeated specs into powers."""
    groups: dict[MechanismSpec, int] = {}
    for spec, count in zip(query.specs, query.counts):
        oriented = _oriented(spec, direction)
        groups[oriented] = groups.get(oriented, 0) + int(count)
    if len(groups) == 1:
        (spec, total), = groups.items()
        return convolution_power(discretize(spec, query.grid), total)
    plds = [discretize(spec, query.grid) for spec in groups]
    return convolution_product(plds, list(groups.values()))


def _delta_terms(conv: ConvolvedPld, epsilon: float):
    """Grid index l_eps and the summed tail arrays for one delta evaluation."""
    points = conv.grid.points()
    ell_eps = int(np.searchsorted(points, epsilon, side="right"))
    return points, ell_eps


def _delta_value(conv: ConvolvedPld, epsilon: float) -> tuple[float, int, str | None]:
    points, ell_eps = _delta_terms(conv, epsilon)
    n = conv.grid.size
    if ell_eps >= n:
        return 0.0, ell_eps, _EMPTY_SUM_WARNING
    weights = -np.expm1(epsilon - points[ell_eps:])
    value = conv.grid.dx * float(weights @ conv.samples[ell_eps:])
    if value > 1.0:
        # A tight delta never exceeds 1; quadrature error compounding as
        # mass**k can. Report 1 and say so rather than returning garbage.
        return 1.0, ell_eps, _OVER_UNITY_WARNING
    return max(value, 0.0), ell_eps, None


def _delta_slope(conv: ConvolvedPld, epsilon: float) -> float:
    """d delta / d eps as the matching Riemann sum, always negative."""
    points, ell_eps = _delta_terms(conv, epsilon)
    if ell_eps >= conv.grid.size:
        return 0.0
    terms = np.exp(epsilon - points[ell_eps:]) @ conv.samples[ell_eps:]
    return -conv.grid.dx * float(terms)


def _query_tail_estimate(query: CompositionQuery) -> tuple[float, bool]:
    """Chernoff-style tail estimate for the query's composition.

    Log-moment exponents add across independent mechanisms, so the composite
    estimate uses the sum of per-mechanism exponents at lambda = L/2. The
    with-replacement scheme reuses the estimate with its aggregate sampling
    fraction batch_size/dataset_size, which the underlying moment lemma does
    not cover; validity is flagged false in that case.
    """
    half_width = query.grid.half_width
    lam = half_width / 2.0
    exponent = 0.0
    valid = True
    for spec, count in zip(query.specs, query.counts):
        if spec.scheme is Scheme.WITH_REPLACEMENT:
            q_eff = spec.batch_size / spec.dataset_size
            valid = False
        else:
            q_eff = spec.q
        alpha = error_bounds.alpha_bound(spec.sigma, q_eff, lam)
        exponent += count * alpha.value
        valid = valid and alpha.valid
    log_value = exponent - half_width * half_width / 2.0
    return (math.exp(log_value) if log_value < 709.0 else math.inf), valid


def _build_result(
    query: CompositionQuery,
    kind: str,
    epsilon: float,
    per_direction: list[tuple[str, float, int, str | None]],
    newton_iterations: int | None = None,
) -> DeltaResult:
    best = max(per_direction, key=lambda item: item[1])
    warnings = tuple(sorted({w for *_rest, w in per_direction if w is not None}))
    tail, tail_valid = _query_tail_estimate(query)
    return DeltaResult(
        value=best[1] if kind == "delta" else epsilon,
        kind=kind,
        epsilon=epsilon,
        delta=best[1],
        ell_eps=best[2],
        per_direction=tuple((name, value) for name, value, _ell, _w in per_direction),
        warnings=warnings,
        query=query,
        tail_estimate=tail,
        tail_estimate_valid=tail_valid,
        newton_iterations=newton_iterations,
    )


def delta_of_epsilon(query: CompositionQuery, epsilon: float | None = None) -> DeltaResult:
    """Tight delta at a given epsilon for the queried composition.

    epsilon defaults to the query's stored target. An epsilon beyond the
    rightmost grid point leaves nothing to sum; the result is then 0 with an
    explicit warning, since such an epsilon almost always means the
    truncation radius was chosen too small.
    """
    eps = query.epsilon if epsilon is None else epsilon
    if eps is None:
        raise DomainError("delta_of_epsilon needs an epsilon target")
    if eps < 0.0:
        raise DomainError(f"epsilon must be >= 0, got {eps}")
    per_direction = []
    for direction in _directions_needed(query.specs):
        conv = _convolved(query, direction)
        value, ell_eps, warning = _delta_value(conv, eps)
        per_direction.append((direction.value, value, ell_eps, warning))
    return _build_result(query, "delta", eps, per_direction)


def epsilon_of_delta(query: CompositionQuery, delta: float | None = None) -> DeltaResult:
    """Smallest epsilon whose tight delta meets the target, by Newton's method.

    The convolved density for each direction is built once; every iteration
    only re-evaluates the weighted sums. Iteration starts at epsilon = 0 and
    keeps a bracket [lo, hi] with delta(lo) >= target >= delta(hi); a Newton
    proposal falling outside the bracket is replaced by its midpoint, so the
    iteration cannot escape or stall outside the root's neighbourhood.

    Raises TargetDeltaTooLarge when even epsilon = 0 gives less than the
    target (beyond tolerance), and TargetDeltaBelowFloor when the bracket
    collapses without reaching the target, which happens for targets below
    what the truncated grid can resolve.
    """
    target = query.delta if delta is None else delta
    if target is None:
        raise DomainError("epsilon_of_delta needs a delta target")
    if not (0.0 < target < 1.0):
        raise DomainError(f"target delta must lie in (0, 1), got {target}")
    tol = query.newton_tolerance

    convs = [_convolved(query, d) for d in _directions_needed(query.specs)]

    def tight_delta(eps: float) -> float:
        return max(_delta_value(conv, eps)[0] for conv in convs)

    def tight_slope(eps: float) -> float:
        slope = min(_delta_slope(conv, eps) for conv in convs)
        return min(slope, -_DERIVATIVE_FLOOR)

    at_zero = tight_delta(0.0)
    if target - at_zero > tol:
        raise TargetDeltaTooLarge(
            f"target delta {target:.6g} exceeds delta(0) = {at_zero:.6g}; "
            "every epsilon >= 0 already satisfies a stronger guarantee"
        )

    lo, hi = 0.0, float(convs[0].grid.points()[-1])
    eps = 0.0
    value = at_zero
    iterations = 0
    # The delta residual alone leaves epsilon poorly determined where the
    # curve is flat, so after meeting the tolerance the iteration also
    # polishes until its own step is negligible. At the starting point a
    # met tolerance returns immediately (zero steps).
    converged = abs(value - target) <= tol
    while not converged and iterations < _NEWTON_MAX_ITER:
        iterations += 1
        if value >= target:
            lo = eps
        else:
            hi = eps
        proposal = eps - (value - target) / tight_slope(eps)
        if not (lo < proposal < hi):
            proposal = 0.5 * (lo + hi)
        step = proposal - eps
        eps = proposal
        value = tight_delta(eps)
        residual_met = abs(value - target) <= tol
        converged = residual_met and abs(step) <= 1e-9 * max(1.0, abs(eps))
        if hi - lo <= 1e-15 * max(1.0, abs(hi)) and not converged:
            if residual_met:
                converged = True
            else:
                raise TargetDeltaBelowFloor(
                    f"target delta {target:.6g} is below what the grid resolves near "
                    f"epsilon = {eps:.6g}; enlarge the truncation radius or lower the tolerance"
                )
    if not converged and abs(value - target) > tol:
        if tight_delta(hi) == 0.0:
            # The upper bracket end has fallen off the lattice support, so
            # attainable deltas jump over the target: a resolution floor, not
            # a solver failure.
            raise TargetDeltaBelowFloor(
                f"target delta {target:.6g} is below what the grid resolves near "
                f"epsilon = {eps:.6g}; enlarge the truncation radius or lower the tolerance"
            )
        raise NonConvergenceError(
            f"Newton iteration did not reach |delta - target| <= {tol:.3g} "
            f"within {_NEWTON_MAX_ITER} steps (best residual {abs(value - target):.3g})"
        )

    per_direction = []
    for direction, conv in zip(_directions_needed(query.specs), convs):
        dvalue, ell_eps, warning = _delta_value(conv, eps)
        per_direction.append((direction.value, dvalue, ell_eps, warning))
    return _build_result(query, "epsilon", eps, per_direction, newton_iterations=iterations)


def compose_heterogeneous(
    pairs: list[tuple[MechanismSpec, int]],
    grid: Grid,
    epsilon: float,
    newton_tolerance: float = 1e-10,
) -> DeltaResult:
    """Tight delta at epsilon for a composition of distinct mechanisms.

    pairs lists (spec, count) groups; a single-entry list reduces to
    delta_of_epsilon on the homogeneous query, bit for bit.
    """
    if not pairs:
        raise DomainError("need at least one (spec, count) pair")
    specs, counts = zip(*pairs)
    query = CompositionQuery(
        specs=tuple(specs),
        counts=tuple(int(c) for c in counts),
        grid=grid,
        epsilon=epsilon,
        newton_tolerance=newton_tolerance,
    )
    return delta_of_epsilon(query)
