"""Information-theoretic uncertainty measures over a posterior ensemble.

Every public function is a pure function of its inputs. All sums run through
``math.fsum`` in a fixed index order, so results are deterministic and the
documented identities hold to near machine precision:

* mutual information  = expected KL from each member to the mixture,
* expected pairwise KL = double posterior expectation of member-vs-member KL,
* reverse mutual information = expected KL from the mixture to each member,
* expected pairwise KL = mutual information + reverse mutual information.

Infinities are genuine results (disjoint supports), never errors, and no
identity used for *computation* ever subtracts extended reals.
"""

from __future__ import annotations

import math
from math import fsum, inf, log

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError
from .types import PosteriorEnsemble, ProbabilityVector, UncertaintyTriple, View

__all__ = [
    "entropy",
    "kl_divergence",
    "cross_entropy",
    "bma",
    "expected_entropy",
    "mutual_information",
    "expected_pairwise_kl",
    "reverse_mutual_information",
    "decompose",
    "model_conditional_uncertainty",
]


def _check_same_k(p: ProbabilityVector, q: ProbabilityVector) -> None:
    if p.num_classes != q.num_classes:
        raise DimensionMismatchError(
            f"class counts differ: {p.num_classes} vs {q.num_classes}"
        )


def _entropy_raw(row: np.ndarray) -> float:
    # 0 * log 0 = 0; clamp tiny negative round-off.
    h = fsum(-x * log(x) for x in row.tolist() if x > 0.0)
    return h if h > 0.0 else 0.0


def _kl_raw(p: np.ndarray, q: np.ndarray) -> float:
    terms = []
    for pk, qk in zip(p.tolist(), q.tolist()):
        if pk > 0.0:
            if qk == 0.0:
                return inf
            terms.append(pk * log(pk / qk))
    d = fsum(terms)
    return d if d > 0.0 else 0.0


def _cross_entropy_raw(p: np.ndarray, q: np.ndarray) -> float:
    terms = []
    for pk, qk in zip(p.tolist(), q.tolist()):
        if pk > 0.0:
            if qk == 0.0:
                return inf
            terms.append(-pk * log(qk))
    ce = fsum(terms)
    return ce if ce > 0.0 else 0.0


def entropy(p: ProbabilityVector) -> float:
    """Shannon entropy in nats; always finite, in [0, ln K]."""
    return _entropy_raw(p.probs)


def kl_divergence(p: ProbabilityVector, q: ProbabilityVector) -> float:
    """KL divergence D(p || q) in nats; +inf iff p puts mass where q has none."""
    _check_same_k(p, q)
    return _kl_raw(p.probs, q.probs)


def cross_entropy(p: ProbabilityVector, q: ProbabilityVector) -> float:
    """Cross-entropy -sum_k p_k ln q_k; equals H(p) + D(p || q)."""
    _check_same_k(p, q)
    return _cross_entropy_raw(p.probs, q.probs)


def bma(ens: PosteriorEnsemble) -> ProbabilityVector:
    """Posterior-weighted mixture of the ensemble members."""
    return ProbabilityVector(_bma_raw(ens))


def _bma_raw(ens: PosteriorEnsemble) -> np.ndarray:
    mixed = np.array(
        [
            fsum(w * p for w, p in zip(ens.weights.tolist(), col.tolist()))
            for col in ens.members.T
        ]
    )
    np.clip(mixed, 0.0, None, out=mixed)
    return mixed


def expected_entropy(ens: PosteriorEnsemble) -> float:
    """Posterior expectation of member entropies; the shared aleatoric term."""
    return fsum(
        w * _entropy_raw(ens.members[i])
        for i, w in enumerate(ens.weights.tolist())
        if w > 0.0
    )


def mutual_information(ens: PosteriorEnsemble) -> float:
    """Expected KL from each member to the mixture.

    Equals H(mixture) - E[H(member)]; finite whenever all positive-weight
    members are covered by the mixture's support, which holds by construction.
    """
    mixed = _bma_raw(ens)
    mi = fsum(
        w * _kl_raw(ens.members[i], mixed)
        for i, w in enumerate(ens.weights.tolist())
        if w > 0.0
    )
    return mi if mi > 0.0 else 0.0


def expected_pairwise_kl(ens: PosteriorEnsemble, method: str = "fast") -> float:
    """Double posterior expectation of member-vs-member KL divergence.

    ``method="fast"`` runs in O(SK) using
    EPKL = -E[H] - sum_k mix_k * (sum_j w_j ln p_jk);
    ``method="brute"`` runs the O(S^2 K) double sum. Both return +inf exactly
    when some positive-weight pair has disjoint support at a class.
    """
    if method == "brute":
        return _epkl_brute(ens)
    if method != "fast":
        raise ConfigurationError(f"unknown method {method!r}")
    weights = ens.weights.tolist()
    active = [i for i, w in enumerate(weights) if w > 0.0]
    mixed = _bma_raw(ens)
    terms = []
    for k, mix_k in enumerate(mixed.tolist()):
        if mix_k <= 0.0:
            continue
        col = ens.members[:, k]
        if any(col[i] == 0.0 for i in active):
            return inf
        log_term = fsum(weights[i] * log(col[i]) for i in active)
        terms.append(-mix_k * log_term)
    epkl = fsum(terms) - expected_entropy(ens)
    return epkl if epkl > 0.0 else 0.0


def _epkl_brute(ens: PosteriorEnsemble) -> float:
    weights = ens.weights.tolist()
    active = [i for i, w in enumerate(weights) if w > 0.0]
    terms = []
    for i in active:
        for j in active:
            d = _kl_raw(ens.members[i], ens.members[j])
            if math.isinf(d):
                return inf
            terms.append(weights[i] * weights[j] * d)
    epkl = fsum(terms)
    return epkl if epkl > 0.0 else 0.0


def reverse_mutual_information(ens: PosteriorEnsemble) -> float:
    """Expected KL from the mixture to each member; +inf iff some
    positive-weight member lacks support where the mixture has mass."""
    mixed = _bma_raw(ens)
    terms = []
    for j, w in enumerate(ens.weights.tolist()):
        if w <= 0.0:
            continue
        d = _kl_raw(mixed, ens.members[j])
        if math.isinf(d):
            return inf
        terms.append(w * d)
    rmi = fsum(terms)
    return rmi if rmi > 0.0 else 0.0


def decompose(ens: PosteriorEnsemble, view: View) -> UncertaintyTriple:
    """Additive (total, aleatoric, epistemic) decomposition for one view.

    MI_BASED: aleatoric = E[H], epistemic = mutual information.
    EPKL_BASED: aleatoric = E[H], epistemic = expected pairwise KL.
    RMI_VIEW: epistemic = reverse MI; the second slot carries the whole
    MI-based total and is therefore not exclusively aleatoric.
    """
    aleatoric = expected_entropy(ens)
    if view is View.MI_BASED:
        return UncertaintyTriple.from_components(
            aleatoric, mutual_information(ens), View.MI_BASED
        )
    if view is View.EPKL_BASED:
        return UncertaintyTriple.from_components(
            aleatoric, expected_pairwise_kl(ens), View.EPKL_BASED
        )
    if view is View.RMI_VIEW:
        mi_total = aleatoric + mutual_information(ens)
        return UncertaintyTriple.from_components(
            mi_total, reverse_mutual_information(ens), View.RMI_VIEW
        )
    raise ConfigurationError(f"unknown view {view!r}")


def model_conditional_uncertainty(index: int, ens: PosteriorEnsemble) -> UncertaintyTriple:
    """Uncertainty of one pre-selected member against the whole posterior.

    aleatoric = H(member), epistemic = expected KL from the member to every
    member; the posterior-weighted average of these totals over all members
    recovers the EPKL-based total.
    """
    if not 0 <= index < ens.size:
        raise ConfigurationError(
            f"member index {index} out of range for ensemble of size {ens.size}"
        )
    chosen = ens.members[index]
    aleatoric = _entropy_raw(chosen)
    terms = []
    epistemic = 0.0
    for j, w in enumerate(ens.weights.tolist()):
        if w <= 0.0:
            continue
        d = _kl_raw(chosen, ens.members[j])
        if math.isinf(d):
            epistemic = inf
            break
        terms.append(w * d)
    else:
        epistemic = max(fsum(terms), 0.0)
    return UncertaintyTriple.from_components(aleatoric, epistemic, View.EPKL_BASED)
