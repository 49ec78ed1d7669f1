"""Privacy loss densities of subsampled Gaussian mechanisms.

A mechanism releases the sum of a subsampled query batch plus Gaussian noise
of scale sigma (sensitivity normalised to 1). For a pair of neighbouring
datasets the output densities f_X and f_Y induce the privacy loss function

    loss(t) = log(f_X(t) / f_Y(t)),

and the privacy loss density is the pushforward of f_X through the loss,

    omega(s) = f_X(loss_inverse(s)) * d loss_inverse / ds,

supported on the closure of the image of the loss. Three subsampling schemes
are covered:

* Poisson subsampling under the remove/add neighbouring relation, where
  f_X = q N(1, sigma^2) + (1-q) N(0, sigma^2) and f_Y = N(0, sigma^2).
  The loss image is (log(1-q), +inf); the two likelihood-ratio directions
  differ and are linked by omega_xy(s) = exp(s) * omega_yx(-s).
* Sampling without replacement under the substitute relation, where
  f_Y = q N(-1, sigma^2) + (1-q) N(0, sigma^2). The loss is odd, so the two
  directions coincide and omega(s) = exp(s) * omega(-s).
* Sampling with replacement (batch_size independent draws, each hitting the
  substituted element with probability 1/dataset_size), where f_X and f_Y
  are binomial mixtures of Gaussians centred on 0..batch_size and its
  negation. The loss inverse has no closed form and is solved numerically.

All densities accept scalars or numpy arrays and evaluate in a vectorised,
overflow-safe way.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, softmax

from .errors import DomainError, RootFindingError

_LOSS_INVERSE_TOL = 1e-13
_LOSS_INVERSE_MAX_ITER = 100


class Scheme(enum.Enum):
    """Subsampling scheme plus the neighbouring-dataset relation it implies."""

    POISSON = "poisson"
    WITHOUT_REPLACEMENT = "without-replacement"
    WITH_REPLACEMENT = "with-replacement"


class Direction(enum.Enum):
    """Which likelihood ratio the loss is built from.

    X_OVER_Y draws the loss variable from f_X and compares against f_Y;
    Y_OVER_X is the reverse. For the substitute schemes the two coincide.
    """

    X_OVER_Y = "x-over-y"
    Y_OVER_X = "y-over-x"


@dataclass(frozen=True)
class MechanismSpec:
    """Parameters of one subsampled Gaussian mechanism invocation.

    Attributes:
        sigma: noise scale, must be positive and finite.
        scheme: subsampling scheme, see Scheme.
        q: sampling fraction in (0, 1] for POISSON / WITHOUT_REPLACEMENT.
            q = 1 is the non-subsampled limit, in which the Poisson density
            collapses to the plain Gaussian privacy loss. Must be None for
            WITH_REPLACEMENT.
        batch_size: number of independent draws (WITH_REPLACEMENT only).
        dataset_size: number of records; the per-draw probability of hitting
            the substituted record is 1 / dataset_size (WITH_REPLACEMENT only).
        direction: likelihood-ratio direction, ignored for substitute schemes.
    """

    sigma: float
    scheme: Scheme = Scheme.POISSON
    q: float | None = None
    batch_size: int | None = None
    dataset_size: int | None = None
    direction: Direction = Direction.X_OVER_Y

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")
        if self.scheme in (Scheme.POISSON, Scheme.WITHOUT_REPLACEMENT):
            if self.q is None:
                raise DomainError(f"scheme {self.scheme.value} requires a sampling fraction q")
            if not (0.0 < self.q <= 1.0):
                raise DomainError(f"q must lie in (0, 1], got {self.q}")
            if self.batch_size is not None or self.dataset_size is not None:
                raise DomainError(
                    "batch_size/dataset_size only apply to the with-replacement scheme"
                )
        else:
            if self.q is not None:
                raise DomainError("the with-replacement scheme derives q from dataset_size")
            if self.batch_size is None or self.batch_size < 1:
                raise DomainError(f"batch_size must be a positive integer, got {self.batch_size}")
            if self.dataset_size is None or self.dataset_size < 2:
                raise DomainError(f"dataset_size must be at least 2, got {self.dataset_size}")
            if self.batch_size > self.dataset_size:
                raise DomainError(
                    f"batch_size {self.batch_size} exceeds dataset_size {self.dataset_size}"
                )

    @property
    def draw_probability(self) -> float:
        """Per-draw probability of selecting the substituted record."""
        if self.scheme is not Scheme.WITH_REPLACEMENT:
            raise DomainError("draw_probability is defined for the with-replacement scheme only")
        return 1.0 / self.dataset_size

    def with_direction(self, direction: Direction) -> "MechanismSpec":
        return dataclasses.replace(self, direction=direction)


@dataclass(frozen=True)
class PldDensity:
    """A privacy loss density omega together with its support interval.

    omega is zero outside (support_lo, support_hi) and integrates to one.
    Instances are callables: density(s) evaluates omega pointwise.
    """

    spec: MechanismSpec
    support_lo: float
    support_hi: float

    def __call__(self, s):
        scheme = self.spec.scheme
        if scheme is Scheme.POISSON:
            return pld_density_poisson(self.spec, s)
        if scheme is Scheme.WITHOUT_REPLACEMENT:
            return pld_density_without_replacement(self.spec, s)
        return pld_density_with_replacement(self.spec, s)


def pld_density(spec: MechanismSpec) -> PldDensity:
    """Builds the privacy loss density object for a mechanism."""
    lo, hi = -math.inf, math.inf
    if spec.scheme is Scheme.POISSON and spec.q < 1.0:
        edge = math.log1p(-spec.q)
        if spec.direction is Direction.X_OVER_Y:
            lo = edge
        else:
            hi = -edge
    return PldDensity(spec=spec, support_lo=lo, support_hi=hi)


def _split_scalar(s):
    arr = np.asarray(s, dtype=float)
    return arr, arr.ndim == 0


def _pack_scalar(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _mixture_pdf(t: np.ndarray, sigma: float, q: float) -> np.ndarray:
    """Density of q N(1, sigma^2) + (1-q) N(0, sigma^2)."""
    two_var = 2.0 * sigma * sigma
    norm = 1.0 / math.sqrt(math.pi * two_var)
    shifted = q * np.exp(-np.square(t - 1.0) / two_var)
    centred = (1.0 - q) * np.exp(-np.square(t) / two_var) if q < 1.0 else 0.0
    return norm * (shifted + centred)


# ---------------------------------------------------------------------------
# Poisson subsampling, remove/add relation
# ---------------------------------------------------------------------------

def loss_poisson(spec: MechanismSpec, t):
    """Privacy loss log(f_X(t)/f_Y(t)) for Poisson subsampling."""
    arr, scalar = _split_scalar(t)
    sigma, q = spec.sigma, spec.q
    a = (2.0 * arr - 1.0) / (2.0 * sigma * sigma)
    if q == 1.0:
        return _pack_scalar(a, scalar)
    out = np.logaddexp(math.log(q) + a, math.log1p(-q))
    return _pack_scalar(out, scalar)


def loss_inverse_poisson(spec: MechanismSpec, s):
    """Inverse of the Poisson loss, sigma^2 log((exp(s) - (1-q))/q) + 1/2.

    Raises DomainError if any point lies at or below the support edge
    log(1-q), where the inverse is undefined.
    """
    arr, scalar = _split_scalar(s)
    sigma, q = spec.sigma, spec.q
    if q == 1.0:
        return _pack_scalar(sigma * sigma * arr + 0.5, scalar)
    # exp(s) - (1 - q) via expm1 keeps precision near the support edge.
    u = np.expm1(arr) + q
    if np.any(u <= 0.0) or np.any(arr <= math.log1p(-q)):
        raise DomainError(
            f"loss inverse undefined at or below the support edge log(1-q) = {math.log1p(-q):.6g}"
        )
    out = sigma * sigma * (np.log(u) - math.log(q)) + 0.5
    return _pack_scalar(out, scalar)


def _poisson_density_xy(sigma: float, q: float, arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr)
    if q == 1.0:
        inside = np.ones_like(arr, dtype=bool)
    else:
        inside = arr > math.log1p(-q)
    sm = arr[inside]
    u = np.expm1(sm) + q
    ok = u > 0.0
    t = np.full_like(sm, -np.inf)
    np.log(u, out=t, where=ok)
    t = sigma * sigma * (t - math.log(q)) + 0.5
    deriv = np.zeros_like(sm)
    np.divide(np.exp(sm), u, out=deriv, where=ok)
    deriv *= sigma * sigma
    vals = _mixture_pdf(t, sigma, q) * deriv
    out[inside] = np.where(ok, vals, 0.0)
    return out


def pld_density_poisson(spec: MechanismSpec, s):
    """Privacy loss density for Poisson subsampling.

    The X-over-Y direction is evaluated directly from the loss inverse and
    its derivative; the Y-over-X direction follows from the identity
    omega_yx(s) = exp(s) * omega_xy(-s), so its support is the mirrored
    interval (-inf, -log(1-q)).
    """
    arr, scalar = _split_scalar(s)
    if spec.direction is Direction.X_OVER_Y:
        out = _poisson_density_xy(spec.sigma, spec.q, arr)
    else:
        out = np.exp(arr) * _poisson_density_xy(spec.sigma, spec.q, -arr)
    return _pack_scalar(out, scalar)


# ---------------------------------------------------------------------------
# Sampling without replacement, substitute relation
# ---------------------------------------------------------------------------

def loss_without_replacement(spec: MechanismSpec, t):
    """Privacy loss for fixed-size sampling without replacement."""
    arr, scalar = _split_scalar(t)
    sigma, q = spec.sigma, spec.q
    two_var = 2.0 * sigma * sigma
    a = (2.0 * arr - 1.0) / two_var
    b = (-2.0 * arr - 1.0) / two_var
    if q == 1.0:
        return _pack_scalar(a - b, scalar)
    lq, l1q = math.log(q), math.log1p(-q)
    out = np.logaddexp(lq + a, l1q) - np.logaddexp(lq + b, l1q)
    return _pack_scalar(out, scalar)


def _wor_positive_root(sigma: float, q: float, arr: np.ndarray) -> np.ndarray:
    """Positive root x = exp(t/sigma^2) of the quadratic that inverts the loss.

    With c = q exp(-1/(2 sigma^2)) the inverse solves
    c x^2 + (1-q)(1-exp(s)) x - c exp(s) = 0. The two algebraically equal
    forms of the positive root are picked per sign of s so that neither
    suffers cancellation.
    """
    c = q * math.exp(-1.0 / (2.0 * sigma * sigma))
    em = np.expm1(arr)
    es = np.exp(arr)
    disc = np.square((1.0 - q) * em) + 4.0 * c * c * es
    root = np.sqrt(disc)
    grow = ((1.0 - q) * em + root) / (2.0 * c)
    decay_denom = -(1.0 - q) * em + root
    decay = np.divide(2.0 * c * es, decay_denom, out=np.zeros_like(arr), where=decay_denom > 0)
    return np.where(arr >= 0.0, grow, decay)


def loss_inverse_without_replacement(spec: MechanismSpec, s):
    """Closed-form inverse of the without-replacement loss."""
    arr, scalar = _split_scalar(s)
    x = _wor_positive_root(spec.sigma, spec.q, arr)
    out = spec.sigma * spec.sigma * np.log(x)
    return _pack_scalar(out, scalar)


def _wor_inverse_derivative(sigma: float, q: float, arr: np.ndarray) -> np.ndarray:
    """Derivative of the without-replacement loss inverse, cancellation-free.

    Writing b = (1-q)(1-exp(s)) and R = sqrt(b^2 + 4 c^2 exp(s)), the
    derivative equals sigma^2 exp(s) (2 c^2 + (1-q)(R - b)) / (R (R - b)).
    R - b is computed as 4 c^2 exp(s) / (R + b) whenever b > 0, which keeps
    precision deep in the left tail.
    """
    c = q * math.exp(-1.0 / (2.0 * sigma * sigma))
    em = np.expm1(arr)
    es = np.exp(arr)
    b = -(1.0 - q) * em
    r = np.sqrt(b * b + 4.0 * c * c * es)
    conj = np.divide(4.0 * c * c * es, r + b, out=np.zeros_like(arr), where=(r + b) > 0)
    r_minus_b = np.where(b > 0.0, conj, r - b)
    return sigma * sigma * es * (2.0 * c * c + (1.0 - q) * r_minus_b) / (r * r_minus_b)


def pld_density_without_replacement(spec: MechanismSpec, s):
    """Privacy loss density for sampling without replacement.

    The loss is odd, so this density serves both directions and satisfies
    omega(s) = exp(s) * omega(-s).
    """
    arr, scalar = _split_scalar(s)
    sigma, q = spec.sigma, spec.q
    t = sigma * sigma * np.log(_wor_positive_root(sigma, q, arr))
    out = _mixture_pdf(t, sigma, q) * _wor_inverse_derivative(sigma, q, arr)
    return _pack_scalar(out, scalar)


# ---------------------------------------------------------------------------
# Sampling with replacement, substitute relation
# ---------------------------------------------------------------------------

def _wr_log_weights(spec: MechanismSpec):
    """Binomial mixture weights, in log space.

    Returns (centres, log_binom, log_coeff) where log_binom are the log
    probabilities of hitting the substituted record ell times in
    batch_size draws and log_coeff additionally absorbs the Gaussian factor
    exp(-ell^2 / (2 sigma^2)) that appears in the loss polynomial.
    """
    m = spec.batch_size
    p = spec.draw_probability
    ell = np.arange(m + 1, dtype=float)
    log_binom = (
        gammaln(m + 1.0)
        - gammaln(ell + 1.0)
        - gammaln(m - ell + 1.0)
        + ell * math.log(p)
        + (m - ell) * math.log1p(-p)
    )
    log_coeff = log_binom - np.square(ell) / (2.0 * spec.sigma * spec.sigma)
    return ell, log_binom, log_coeff


def loss_with_replacement(spec: MechanismSpec, t):
    """Privacy loss for sampling with replacement, via stable log-sum-exp."""
    arr, scalar = _split_scalar(t)
    ell, _, log_coeff = _wr_log_weights(spec)
    scaled = arr[..., None] * ell / (spec.sigma * spec.sigma)
    out = logsumexp(log_coeff + scaled, axis=-1) - logsumexp(log_coeff - scaled, axis=-1)
    return _pack_scalar(np.asarray(out), scalar)


def _wr_loss_derivative(spec: MechanismSpec, arr: np.ndarray) -> np.ndarray:
    ell, _, log_coeff = _wr_log_weights(spec)
    scaled = arr[..., None] * ell / (spec.sigma * spec.sigma)
    up = softmax(log_coeff + scaled, axis=-1) @ ell
    down = softmax(log_coeff - scaled, axis=-1) @ ell
    return (up + down) / (spec.sigma * spec.sigma)


def loss_inverse_with_replacement(spec: MechanismSpec, s):
    """Numerical inverse of the with-replacement loss.

    The loss is strictly increasing and odd with image all of R. Starting
    from the single-draw closed form (exact for batch_size = 1), brackets
    are expanded geometrically and then tightened by Newton steps that fall
    back to bisection whenever they leave the bracket. Raises
    RootFindingError if the tolerance is not met within the iteration cap.
    """
    arr, scalar = _split_scalar(s)
    flat = np.atleast_1d(arr).astype(float).ravel()
    t = np.atleast_1d(
        loss_inverse_without_replacement(
            MechanismSpec(
                sigma=spec.sigma, scheme=Scheme.WITHOUT_REPLACEMENT, q=spec.draw_probability
            ),
            flat,
        )
    ).astype(float)

    lo, hi = t - 1.0, t + 1.0
    width = 1.0
    for _ in range(120):
        too_high = np.atleast_1d(loss_with_replacement(spec, lo)) > flat
        too_low = np.atleast_1d(loss_with_replacement(spec, hi)) < flat
        if not (too_high.any() or too_low.any()):
            break
        width *= 2.0
        lo[too_high] -= width
        hi[too_low] += width
    else:
        raise RootFindingError("could not bracket the loss inverse")

    t = np.clip(t, lo, hi)
    done = np.zeros_like(flat, dtype=bool)
    for _ in range(_LOSS_INVERSE_MAX_ITER):
        resid = np.atleast_1d(loss_with_replacement(spec, t)) - flat
        done |= np.abs(resid) <= _LOSS_INVERSE_TOL
        if done.all():
            break
        above = (resid > 0.0) & ~done
        below = (resid < 0.0) & ~done
        hi[above] = t[above]
        lo[below] = t[below]
        slope = _wr_loss_derivative(spec, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(slope > 0.0, resid / slope, 0.0)
        proposal = t - step
        outside = (proposal <= lo) | (proposal >= hi) | (step == 0.0)
        proposal = np.where(outside, 0.5 * (lo + hi), proposal)
        t = np.where(done, t, proposal)
    else:
        raise RootFindingError(
            f"loss inverse did not reach |loss(t) - s| <= {_LOSS_INVERSE_TOL} "
            f"within {_LOSS_INVERSE_MAX_ITER} iterations"
        )

    out = t.reshape(np.shape(arr)) if np.ndim(arr) else t[0]
    return _pack_scalar(np.asarray(out), scalar)


def pld_density_with_replacement(spec: MechanismSpec, s):
    """Privacy loss density for sampling with replacement.

    omega(s) = f_X(t) / loss'(t) at t = loss_inverse(s), with f_X the
    binomial Gaussian mixture evaluated by log-sum-exp.
    """
    arr, scalar = _split_scalar(s)
    t = np.atleast_1d(loss_inverse_with_replacement(spec, arr))
    ell, log_binom, _ = _wr_log_weights(spec)
    sigma = spec.sigma
    log_norm = 0.5 * math.log(2.0 * math.pi * sigma * sigma)
    log_fx = logsumexp(
        log_binom - np.square(t[..., None] - ell) / (2.0 * sigma * sigma), axis=-1
    ) - log_norm
    out = np.exp(log_fx) / _wr_loss_derivative(spec, t)
    out = out.reshape(np.shape(arr)) if np.ndim(arr) else out[0]
    return _pack_scalar(np.asarray(out), scalar)
