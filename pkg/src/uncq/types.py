"""Core value types: probability vectors, posterior ensembles and
uncertainty triples.

All information quantities are extended non-negative reals in nats; +inf is a
first-class result (plain ``math.inf``), never an error.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DimensionMismatchError

PROB_SUM_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-6


def _as_float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("probabilities must be finite")
    return arr


@dataclass(frozen=True)
class ProbabilityVector:
    """One categorical predictive distribution over K >= 2 classes.

    Entries may be exactly zero; this is required for the disjoint-support
    cases where pairwise KL genuinely diverges.
    """

    probs: np.ndarray

    def __init__(self, probs: Sequence[float] | np.ndarray):
        arr = _as_float_array(probs)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ConfigurationError("need a 1-D vector with at least 2 classes")
        if np.any(arr < 0.0):
            raise ConfigurationError("probabilities must be non-negative")
        if abs(math.fsum(arr.tolist()) - 1.0) > PROB_SUM_TOL:
            raise ConfigurationError(
                f"probabilities must sum to 1 within {PROB_SUM_TOL}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)

    @property
    def num_classes(self) -> int:
        return int(self.probs.shape[0])


@dataclass(frozen=True)
class PosteriorEnsemble:
    """S posterior-weighted predictive distributions for one input.

    ``members`` is an (S, K) row-stochastic array; ``weights`` sum to one.
    Weights within 1e-6 of one are renormalized, larger deviations are a hard
    error (a corrupt input, not float round-off).
    """

    members: np.ndarray
    weights: np.ndarray

    def __init__(
        self,
        members: Sequence[Sequence[float]] | Sequence[ProbabilityVector] | np.ndarray,
        weights: Sequence[float] | np.ndarray | None = None,
    ):
        if len(members) and isinstance(members[0], ProbabilityVector):
            arr = np.stack([m.probs for m in members])
        else:
            arr = _as_float_array(members)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
            raise ConfigurationError("members must be an (S, K) array with K >= 2")
        if np.any(arr < 0.0):
            raise ConfigurationError("member probabilities must be non-negative")
        row_sums = arr.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > PROB_SUM_TOL):
            raise ConfigurationError(
                f"every member must sum to 1 within {PROB_SUM_TOL}"
            )

        s = arr.shape[0]
        if weights is None:
            w = np.full(s, 1.0 / s)
        else:
            w = _as_float_array(weights)
            if w.shape != (s,):
                raise DimensionMismatchError("weights length must match member count")
            if np.any(w < 0.0):
                raise ConfigurationError("weights must be non-negative")
            total = math.fsum(w.tolist())
            if abs(total - 1.0) > WEIGHT_SUM_TOL:
                raise ConfigurationError(
                    f"weights sum {total!r} deviates from 1 by more than {WEIGHT_SUM_TOL}"
                )
            if total != 1.0:
                w = w / total
        arr.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "members", arr)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.members.shape[1])

    def member(self, i: int) -> ProbabilityVector:
        return ProbabilityVector(self.members[i])


class View(enum.Enum):
    """Which additive decomposition an UncertaintyTriple expresses."""

    MI_BASED = "mi"
    EPKL_BASED = "epkl"
    RMI_VIEW = "rmi"


@dataclass(frozen=True)
class UncertaintyTriple:
    """(total, aleatoric, epistemic) in nats, total = aleatoric + epistemic.

    The total is always *constructed* as the extended-real sum of the other
    two, so the additive identity holds exactly. In the RMI view the second
    slot is not exclusively aleatoric (it is the whole MI-based total); the
    ``view`` field records this.
    """

    total: float
    aleatoric: float
    epistemic: float
    view: View = field(default=View.MI_BASED)

    def __post_init__(self):
        for name in ("total", "aleatoric", "epistemic"):
            v = getattr(self, name)
            if math.isnan(v) or v < 0.0:
                raise ConfigurationError(f"{name} must be a non-negative extended real")
        if self.view is not View.RMI_VIEW and not math.isfinite(self.aleatoric):
            raise ConfigurationError("aleatoric component must be finite")

    @classmethod
    def from_components(
        cls, aleatoric: float, epistemic: float, view: View
    ) -> "UncertaintyTriple":
        return cls(aleatoric + epistemic, aleatoric, epistemic, view)

    @property
    def aleatoric_is_exclusive(self) -> bool:
        return self.view is not View.RMI_VIEW
