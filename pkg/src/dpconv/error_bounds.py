"""Tail, periodisation, and discretisation error control for the accountant.

Three sources of error separate the computed delta from the exact one:

* truncation: mass of the convolved loss density beyond the grid radius,
  controlled through Chernoff bounds on the moment generating function of
  the loss (tail_estimate, analytic_tail_bound);
* periodisation: the circular convolution wraps tail mass back into the
  window (periodisation_bound);
* discretisation: the left-Riemann sum against the exact integral, estimated
  to first order by comparing two grid resolutions (discretization_estimate).

Every closed-form bound carries explicit preconditions inherited from the
moment lemmas it rests on. Rather than raising, each function returns a
BoundResult with the value, a validity flag, and the list of violated
conditions, so callers can still print an advisory number clearly labelled
as out of envelope. The one exception is analytic_tail_bound, whose claim to
rigour would be meaningless outside its envelope: it reports nan there.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError

_SERIES_TERM_FLOOR = 1e-300
_SERIES_MAX_TERMS = 64


@dataclass(frozen=True)
class BoundResult:
    """A bound value plus the verdict on its preconditions.

    violated lists human-readable descriptions of the failed conditions;
    valid is True exactly when it is empty. details carries named
    intermediate quantities (for the periodisation bound: the individual
    terms and the series length).
    """

    value: float
    valid: bool
    violated: tuple[str, ...] = ()
    details: tuple[tuple[str, float], ...] = ()


def _exp(exponent: float) -> float:
    if exponent > 709.0:
        return math.inf
    return math.exp(exponent)


def alpha_lambda_limit(sigma: float, q: float) -> float:
    """Largest moment order the alpha_bound envelope admits: sigma^2 log(1/(q sigma))."""
    return sigma * sigma * math.log(1.0 / (q * sigma))


def alpha_bound(sigma: float, q: float, lam: float) -> BoundResult:
    """Moment bound on the loss: log E[exp(lam * loss)] <= q^2 lam (lam+1) / ((1-q) sigma^2).

    The closed form drops a cubic correction term, so the result is an
    estimate of the moment rather than a proven bound; its envelope is
    sigma >= 1, q < 1/(16 sigma), 1 <= lam <= alpha_lambda_limit(sigma, q).
    The value is computed regardless, with validity flagged.
    """
    if sigma <= 0 or not (0.0 < q <= 1.0):
        raise DomainError(f"alpha_bound needs sigma > 0 and q in (0, 1], got {sigma}, {q}")
    violated = []
    if sigma < 1.0:
        violated.append(f"sigma >= 1 fails (sigma = {sigma:g})")
    if q >= 1.0 / (16.0 * sigma):
        violated.append(f"q < 1/(16 sigma) fails (q = {q:g}, limit {1.0 / (16.0 * sigma):g})")
    if q == 1.0:
        # The (1-q) denominator degenerates at the non-subsampled limit; an
        # infinite moment value keeps downstream tolerances conservative.
        violated.append("q < 1 fails (q = 1 collapses the mixture)")
        return BoundResult(value=math.inf, valid=False, violated=tuple(violated))
    limit = alpha_lambda_limit(sigma, q)
    if not (1.0 <= lam <= limit):
        violated.append(f"1 <= lambda <= {limit:.4g} fails (lambda = {lam:g})")
    value = q * q * lam * (lam + 1.0) / ((1.0 - q) * sigma * sigma)
    return BoundResult(value=value, valid=not violated, violated=tuple(violated))


def tail_estimate(sigma: float, q: float, k: int, half_width: float) -> BoundResult:
    """Chernoff-style estimate of the convolved density's mass beyond the grid.

    exp(k * alpha(L/2)) * exp(-L^2 / 2) with the closed-form alpha; shares
    that formula's envelope at lam = L/2 and inherits its approximative
    character.
    """
    lam = half_width / 2.0
    alpha = alpha_bound(sigma, q, lam)
    value = _exp(k * alpha.value - half_width * half_width / 2.0)
    return BoundResult(value=value, valid=alpha.valid, violated=alpha.violated)


def _analytic_conditions(sigma: float, q: float, lam: float) -> list[str]:
    violated = []
    if q > 0.2:
        violated.append(f"q <= 1/5 fails (q = {q:g})")
    if sigma < 4.0:
        violated.append(f"sigma >= 4 fails (sigma = {sigma:g})")
    if lam <= 1.0:
        violated.append(f"lambda > 1 fails (lambda = {lam:g})")
        return violated
    c = math.log1p(1.0 / (q * (lam - 1.0)))
    first_cap = sigma * sigma * c / 2.0 - 2.0 * math.log(sigma)
    if lam > first_cap:
        violated.append(
            f"lambda <= sigma^2 c/2 - 2 log sigma fails (lambda = {lam:g}, cap {first_cap:.4g})"
        )
    denom = c + math.log(q * lam) + 1.0 / (2.0 * sigma * sigma)
    second_cap = (sigma * sigma * c / 2.0 - math.log(5.0) - 2.0 * math.log(sigma)) / denom
    if denom <= 0.0 or lam > second_cap:
        violated.append(
            "lambda <= (sigma^2 c/2 - log 5 - 2 log sigma)/(c + log(q lambda) + 1/(2 sigma^2)) "
            f"fails (lambda = {lam:g}, cap {second_cap:.4g})"
        )
    return violated


def analytic_tail_bound(sigma: float, q: float, k: int, half_width: float) -> BoundResult:
    """Rigorous tail bound (1 + 2 q^2 (lam+1) lam / sigma^2)^k exp(-L^2/2), lam = L/2.

    Valid only under its envelope (q <= 1/5, sigma >= 4, and two caps on
    lam); outside it there is no rigorous claim to make, so the value is nan
    and the violated conditions are listed.
    """
    if sigma <= 0 or not (0.0 < q < 1.0):
        raise DomainError(f"analytic_tail_bound needs sigma > 0 and q in (0, 1), got {sigma}, {q}")
    lam = half_width / 2.0
    violated = _analytic_conditions(sigma, q, lam)
    if violated:
        return BoundResult(value=math.nan, valid=False, violated=tuple(violated))
    growth = 2.0 * q * q * (lam + 1.0) * lam / (sigma * sigma)
    value = _exp(k * math.log1p(growth) - half_width * half_width / 2.0)
    return BoundResult(value=value, valid=True)


def analytic_lambda_limit(sigma: float, q: float) -> float:
    """Largest lambda the analytic_tail_bound envelope admits, by bisection.

    Only the two lambda caps are probed; the fixed gates on sigma and q must
    already hold, otherwise no lambda is admissible and 0 is returned.
    """
    def admissible(lam: float) -> bool:
        return not _analytic_conditions(sigma, q, lam)

    lo = 1.0 + 1e-9
    if not admissible(lo):
        return 0.0
    hi = 2.0
    while admissible(hi):
        hi *= 2.0
        if hi > 1e9:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def periodisation_bound(
    sigma: float,
    q: float,
    k: int,
    half_width: float,
    alpha_fn: Callable[[float], BoundResult] | None = None,
) -> BoundResult:
    """Bound on the mass the circular convolution wraps back into the window.

    Three contributions: a boundary term L k sigma exp(-(sigma^2 L + C)^2 /
    (2 sigma^2)) with C = sigma^2 log(1/(2q)) - 1/2, a single-mechanism
    moment term exp(alpha(L/2)) exp(-L^2/2), and the doubly exponentially
    decaying image series 2 sum_j exp(k alpha(jL)) exp(-2 (jL)^2), truncated
    once terms drop below 1e-300 or after 64 terms. alpha_fn defaults to the
    closed-form alpha_bound for this sigma and q; its validity flags
    propagate into the result.
    """
    if alpha_fn is None:
        alpha_fn = lambda lam: alpha_bound(sigma, q, lam)
    violated = []
    if not (0.0 < q < 0.5):
        violated.append(f"0 < q < 1/2 fails (q = {q:g})")
    if half_width < 1.0:
        violated.append(f"L >= 1 fails (L = {half_width:g})")

    shift = sigma * sigma * math.log(1.0 / (2.0 * q)) - 0.5
    boundary = (
        half_width * k * sigma
        * _exp(-((sigma * sigma * half_width + shift) ** 2) / (2.0 * sigma * sigma))
    )

    moment = alpha_fn(half_width / 2.0)
    alpha_violations = set(moment.violated)
    moment_term = _exp(moment.value - half_width * half_width / 2.0)

    series = 0.0
    terms_used = 0
    for j in range(1, _SERIES_MAX_TERMS + 1):
        image = j * half_width
        alpha_j = alpha_fn(image)
        alpha_violations.update(alpha_j.violated)
        term = 2.0 * _exp(k * alpha_j.value - 2.0 * image * image)
        series += term
        terms_used = j
        if term < _SERIES_TERM_FLOOR:
            break

    violated.extend(sorted(alpha_violations))
    return BoundResult(
        value=boundary + moment_term + series,
        valid=not violated,
        violated=tuple(violated),
        details=(
            ("boundary_term", boundary),
            ("moment_term", moment_term),
            ("image_series", series),
            ("image_series_terms", float(terms_used)),
        ),
    )


def discretization_estimate(
    query, value: float | None = None, relative: bool = False
) -> float:
    """First-order discretisation error estimate 2 |I_n - I_2n|.

    I_m is the tight delta the accountant computes at m grid points; the
    factor 2 turns the difference of two first-order approximations into an
    estimate of the error of the coarser one. Costs one extra full pipeline
    run on the doubled grid. value, when given, is taken as the already
    computed I_n. relative=True divides by I_n, the form reference tables
    tend to quote in their pre-asymptotic rows.
    """
    from .accountant import delta_of_epsilon

    if query.epsilon is None:
        raise DomainError("discretization_estimate needs a query with an epsilon target")
    base = delta_of_epsilon(query).value if value is None else value
    refined = delta_of_epsilon(dataclasses.replace(query, grid=query.grid.refine()))
    estimate = 2.0 * abs(base - refined.value)
    if relative:
        return estimate / base if base > 0.0 else (math.inf if estimate > 0.0 else 0.0)
    return estimate
