"""Closed-form uncertainty measures for posteriors over a Bernoulli parameter.

The outcome distribution given a parameter value t is Bernoulli(t); posteriors
over t come in three families: uniform intervals, beta distributions and
finite mixtures of point masses. All measures reduce to a small closed-form
kernel: the posterior mean of t and the posterior means of ln t and ln(1 - t).
Point masses at 0 or 1 make the log moments -inf, which is exactly the case
where the pairwise-KL epistemic component genuinely diverges; divergence is
detected analytically, never via quadrature overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum, inf, log
from typing import Union

from scipy.integrate import quad
from scipy.special import digamma
from scipy.stats import beta as beta_dist

from .errors import ConfigurationError, FamilyInfeasibleError, NumericalFailureError
from .types import PosteriorEnsemble, UncertaintyTriple, View

QUAD_ABS_TOL = 1e-10
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Uniform:
    """Uniform posterior on [lo, hi] with 0 <= lo < hi <= 1."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ConfigurationError("uniform support must satisfy 0 <= lo < hi <= 1")


@dataclass(frozen=True)
class Beta:
    """Beta(alpha, beta) posterior with both shape parameters > 0."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ConfigurationError("beta shape parameters must be positive")


@dataclass(frozen=True)
class DeltaMixture:
    """Finite mixture of point masses at distinct locations in [0, 1]."""

    locations: tuple
    weights: tuple

    def __init__(self, locations, weights):
        locs = tuple(float(t) for t in locations)
        w = tuple(float(x) for x in weights)
        if len(locs) < 1 or len(locs) != len(w):
            raise ConfigurationError("need matching non-empty locations and weights")
        if any(not 0.0 <= t <= 1.0 for t in locs):
            raise ConfigurationError("locations must lie in [0, 1]")
        if len(set(locs)) != len(locs):
            raise ConfigurationError("locations must be distinct")
        if any(x <= 0.0 for x in w):
            raise ConfigurationError("weights must be positive")
        total = fsum(w)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError("weights must sum to 1 within 1e-9")
        if total != 1.0:
            w = tuple(x / total for x in w)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "weights", w)


Posterior1D = Union[Uniform, Beta, DeltaMixture]


@dataclass(frozen=True)
class BernoulliReport:
    """All measures for one posterior, as one table row."""

    posterior: Posterior1D
    expected_theta: float
    mi_triple: UncertaintyTriple
    epkl_triple: UncertaintyTriple
    rmi: float


def binary_entropy(t: float) -> float:
    """Entropy of Bernoulli(t) in nats."""
    if t <= 0.0 or t >= 1.0:
        return 0.0
    return -t * log(t) - (1.0 - t) * log(1.0 - t)


def expected_theta(post: Posterior1D) -> float:
    """Posterior mean of the Bernoulli parameter."""
    if isinstance(post, Uniform):
        return 0.5 * (post.lo + post.hi)
    if isinstance(post, Beta):
        return post.alpha / (post.alpha + post.beta)
    return fsum(w * t for w, t in zip(post.weights, post.locations))


def _uniform_log_moment(a: float, b: float) -> float:
    # E[ln t] for t ~ U[a, b], with the 0 ln 0 = 0 convention at a = 0.
    top = b * log(b) - (a * log(a) if a > 0.0 else 0.0)
    return top / (b - a) - 1.0


def expected_log_moments(post: Posterior1D) -> tuple[float, float]:
    """(E[ln t], E[ln(1 - t)]) as extended reals in (-inf, 0]."""
    if isinstance(post, Uniform):
        return (
            _uniform_log_moment(post.lo, post.hi),
            _uniform_log_moment(1.0 - post.hi, 1.0 - post.lo),
        )
    if isinstance(post, Beta):
        psi_ab = digamma(post.alpha + post.beta)
        return (
            float(digamma(post.alpha) - psi_ab),
            float(digamma(post.beta) - psi_ab),
        )
    lt = []
    l1t = []
    for w, t in zip(post.weights, post.locations):
        lt.append(-inf if t == 0.0 else w * log(t))
        l1t.append(-inf if t == 1.0 else w * log(1.0 - t))
    e_lt = -inf if -inf in lt else fsum(lt)
    e_l1t = -inf if -inf in l1t else fsum(l1t)
    return min(e_lt, 0.0), min(e_l1t, 0.0)


def _quad_expectation(integrand, post: Posterior1D) -> float:
    """Posterior expectation of a bounded integrand by adaptive quadrature."""
    if isinstance(post, Uniform):
        width = post.hi - post.lo
        value, err = quad(
            integrand, post.lo, post.hi, epsabs=QUAD_ABS_TOL * width * 0.1,
            epsrel=0.0, limit=200,
        )
        value, err = value / width, err / width
    else:
        a, b = post.alpha, post.beta

        def weighted(t):
            return integrand(t) * beta_dist.pdf(t, a, b)

        value, err = quad(weighted, 0.0, 1.0, epsabs=QUAD_ABS_TOL * 0.1,
                          epsrel=0.0, limit=500, points=[0.0, 1.0])
    if err > QUAD_ABS_TOL:
        raise NumericalFailureError(
            f"quadrature reached {err:.3e}, wanted {QUAD_ABS_TOL:.1e}",
            achieved_tolerance=err,
        )
    return value


def aleatoric(post: Posterior1D) -> float:
    """Posterior-expected outcome entropy E[H(Bernoulli(t))]; finite, <= ln 2."""
    if isinstance(post, DeltaMixture):
        return fsum(w * binary_entropy(t) for w, t in zip(post.weights, post.locations))
    return max(_quad_expectation(binary_entropy, post), 0.0)


def mi_decomposition(post: Posterior1D) -> UncertaintyTriple:
    """Mixture-entropy decomposition: total = H(Bernoulli(E[t]))."""
    total = binary_entropy(expected_theta(post))
    au = aleatoric(post)
    epistemic = max(total - au, 0.0)
    return UncertaintyTriple.from_components(au, epistemic, View.MI_BASED)


def _pairwise_epistemic(post: Posterior1D, au_value: float) -> float:
    mean_t = expected_theta(post)
    e_lt, e_l1t = expected_log_moments(post)
    if (mean_t > 0.0 and math.isinf(e_lt)) or (mean_t < 1.0 and math.isinf(e_l1t)):
        return inf
    terms = [-au_value]
    if mean_t > 0.0:
        terms.append(-mean_t * e_lt)
    if mean_t < 1.0:
        terms.append(-(1.0 - mean_t) * e_l1t)
    return max(fsum(terms), 0.0)


def epkl_decomposition(post: Posterior1D) -> UncertaintyTriple:
    """Pairwise-KL decomposition; epistemic (and total) may be +inf."""
    au = aleatoric(post)
    return UncertaintyTriple.from_components(
        au, _pairwise_epistemic(post, au), View.EPKL_BASED
    )


def rmi(post: Posterior1D) -> float:
    """Reverse mutual information, from the same closed-form log moments.

    Computed directly as -H(Bernoulli(E[t])) - E[t] E[ln t] - (1-E[t]) E[ln(1-t)],
    so no infinity is ever subtracted from another.
    """
    mean_t = expected_theta(post)
    e_lt, e_l1t = expected_log_moments(post)
    if (mean_t > 0.0 and math.isinf(e_lt)) or (mean_t < 1.0 and math.isinf(e_l1t)):
        return inf
    terms = [-binary_entropy(mean_t)]
    if mean_t > 0.0:
        terms.append(-mean_t * e_lt)
    if mean_t < 1.0:
        terms.append(-(1.0 - mean_t) * e_l1t)
    return max(fsum(terms), 0.0)


def report(post: Posterior1D) -> BernoulliReport:
    """All measures for one posterior."""
    au = aleatoric(post)
    mean_t = expected_theta(post)
    mi_total = binary_entropy(mean_t)
    mi_triple = UncertaintyTriple.from_components(
        au, max(mi_total - au, 0.0), View.MI_BASED
    )
    epkl_triple = UncertaintyTriple.from_components(
        au, _pairwise_epistemic(post, au), View.EPKL_BASED
    )
    return BernoulliReport(post, mean_t, mi_triple, epkl_triple, rmi(post))


# Showcase posteriors, in presentation order: full-range uniform, peaked beta,
# bathtub beta, two centered uniforms of different width and position, and the
# two-point extreme mixture whose pairwise-KL epistemic term diverges.
SHOWCASE_POSTERIORS: tuple[Posterior1D, ...] = (
    Uniform(0.0, 1.0),
    Beta(5.0, 5.0),
    Beta(0.4, 0.4),
    Uniform(0.3, 0.7),
    Uniform(0.5, 0.9),
    DeltaMixture((0.0, 1.0), (0.5, 0.5)),
)


def reproduce_fig2() -> list[BernoulliReport]:
    """Reports for the six showcase posteriors, in order."""
    return [report(p) for p in SHOWCASE_POSTERIORS]


def to_ensemble(post: DeltaMixture) -> PosteriorEnsemble:
    """Equivalent two-class posterior ensemble: member i = (t_i, 1 - t_i)."""
    members = [[t, 1.0 - t] for t in post.locations]
    return PosteriorEnsemble(members, list(post.weights))


def _bisect(f, lo: float, hi: float, max_iter: int = 200) -> float:
    """Root of monotone f on [lo, hi] with f(lo), f(hi) of opposite sign.

    Residuals below 1e-12 at a bracket endpoint count as roots, so targets
    sitting exactly on a family's boundary resolve to the boundary parameter.
    """
    flo = f(lo)
    fhi = f(hi)
    if abs(flo) <= 1e-12:
        return lo
    if abs(fhi) <= 1e-12:
        return hi
    if flo * fhi > 0.0:
        raise NumericalFailureError("bisection bracket does not straddle the root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def construct_matched_degenerates(target_au: float) -> tuple[Uniform, Beta, DeltaMixture]:
    """Three posteriors with mean 0.5 and the given aleatoric value.

    All three share the identical mixture-entropy decomposition (total ln 2,
    aleatoric = target), while their pairwise-KL epistemic components differ.
    Found by bisection: aleatoric is monotone in each family parameter.

    The centered-uniform family only reaches aleatoric values in [0.5, ln 2);
    targets outside a family's range raise FamilyInfeasibleError.
    """
    if not 0.0 < target_au < LN2:
        raise ConfigurationError("target aleatoric must lie strictly in (0, ln 2)")

    # Centered uniform U[0.5 - c, 0.5 + c]: aleatoric falls from ln 2 to 0.5.
    if target_au < 0.5:
        raise FamilyInfeasibleError(
            "uniform",
            f"centered uniform posteriors only reach aleatoric >= 0.5 nats, "
            f"target {target_au} is unreachable",
        )
    c = _bisect(
        lambda x: aleatoric(Uniform(0.5 - x, 0.5 + x)) - target_au, 1e-9, 0.5
    )
    uniform = Uniform(0.5 - c, 0.5 + c)

    # Symmetric beta: aleatoric rises from ~0 to ln 2 over a log-scale bracket.
    lo_a, hi_a = 1e-3, 1e4
    if not aleatoric(Beta(lo_a, lo_a)) <= target_au <= aleatoric(Beta(hi_a, hi_a)):
        raise FamilyInfeasibleError(
            "beta", f"target {target_au} outside the bracketed symmetric-beta range"
        )
    log_alpha = _bisect(
        lambda la: aleatoric(Beta(math.exp(la), math.exp(la))) - target_au,
        math.log(lo_a),
        math.log(hi_a),
    )
    sym_beta = Beta(math.exp(log_alpha), math.exp(log_alpha))

    # Two-point mixture at 0.5 +/- d: aleatoric is H(0.5 + d), falling to 0.
    d = _bisect(lambda x: binary_entropy(0.5 + x) - target_au, 1e-12, 0.5 - 1e-12)
    mixture = DeltaMixture((0.5 - d, 0.5 + d), (0.5, 0.5))

    return uniform, sym_beta, mixture
