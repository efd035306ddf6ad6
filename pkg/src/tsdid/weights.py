"""Convex weighting schemes over pre- and post-treatment horizons.

A scheme is a rule that can be realized over any horizon H, producing
non-negative weights that sum to one.  Admissible schemes additionally
satisfy a boundedness condition: ``H * max(w) <= C_w`` uniformly in H,
which rules out weight concentrating on a vanishing fraction of periods.
The bound constant defaults to ``DEFAULT_CONCENTRATION_BOUND = 8``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_CONCENTRATION_BOUND = 8.0

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class WeightingScheme:
    """A convex weighting rule realizable over any horizon.

    Use the constructors :meth:`uniform`, :meth:`linear_decay` and
    :meth:`custom` rather than instantiating directly.
    """

    kind: str
    decay: float = 0.0
    vector: np.ndarray | None = field(default=None)
    concentration_bound: float = DEFAULT_CONCENTRATION_BOUND

    @classmethod
    def uniform(cls) -> "WeightingScheme":
        return cls(kind="uniform")

    @classmethod
    def linear_decay(cls, a: float) -> "WeightingScheme":
        """Linearly decreasing weights w_H(t) proportional to H - 2*a*t.

        Periods closer to the treatment window get more weight.  Requires
        ``a`` in [0, 0.5); a = 0 collapses to the uniform scheme.
        """
        if not 0.0 <= a < 0.5:
            raise ValidationError(f"linear-decay parameter must be in [0, 0.5), got {a}")
        return cls(kind="linear-decay", decay=float(a))

    @classmethod
    def custom(cls, vector, concentration_bound: float = DEFAULT_CONCENTRATION_BOUND) -> "WeightingScheme":
        """Fixed non-negative weight vector, renormalized to sum to one.

        A vector that does not already sum to one is renormalized with a
        warning; negative entries or a zero sum are rejected.
        """
        vec = np.asarray(vector, dtype=float)
        if vec.ndim != 1 or vec.size == 0:
            raise ValidationError("custom weight vector must be a non-empty 1-d array")
        if not np.all(np.isfinite(vec)):
            raise ValidationError("custom weight vector contains non-finite entries")
        if np.any(vec < 0):
            raise ValidationError("custom weight vector has a negative entry")
        total = vec.sum()
        if total <= 0:
            raise ValidationError("custom weight vector sums to zero")
        if abs(total - 1.0) > _SUM_TOL:
            warnings.warn(
                "custom weights renormalized to sum to 1 (had sum %.6g)" % total,
                stacklevel=2,
            )
        vec = vec / total
        vec.flags.writeable = False
        return cls(kind="custom", vector=vec, concentration_bound=concentration_bound)

    def __str__(self) -> str:
        if self.kind == "linear-decay":
            return f"linear-decay(a={self.decay})"
        return self.kind


def realize_weights(scheme: WeightingScheme, horizon: int) -> np.ndarray:
    """Realize a weighting scheme over a horizon.

    Parameters
    ----------
    scheme : WeightingScheme
    horizon : int
        Number of periods H >= 1.

    Returns
    -------
    numpy.ndarray
        Non-negative weights of length ``horizon`` summing to one, ordered
        from the period nearest the treatment window outward (for a
        post-treatment horizon this is t = 1..H; for a pre-treatment horizon
        tau = -1..-H).
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    if scheme.kind == "uniform":
        w = np.full(horizon, 1.0 / horizon)
    elif scheme.kind == "linear-decay":
        t = np.arange(1, horizon + 1, dtype=float)
        raw = horizon - 2.0 * scheme.decay * t
        w = raw / raw.sum()
    elif scheme.kind == "custom":
        if scheme.vector.size != horizon:
            raise ValidationError(
                f"custom scheme has {scheme.vector.size} weights, "
                f"cannot realize over horizon {horizon}"
            )
        w = np.asarray(scheme.vector)
    else:
        raise ValidationError(f"unknown weighting scheme kind {scheme.kind!r}")

    bound = scheme.concentration_bound
    if horizon * w.max() > bound + _SUM_TOL:
        raise ValidationError(
            f"scheme {scheme} violates the concentration bound: "
            f"H*max(w) = {horizon * w.max():.3g} > {bound}"
        )
    return w


@dataclass(frozen=True)
class RegimeWeights:
    """Signed full-horizon weights for a panel's regime layout.

    ``omega`` is positive over post-treatment periods (summing to one),
    negative over pre-treatment periods (summing to minus one), and exactly
    zero over the transition window.
    """

    omega: np.ndarray
    wpost: np.ndarray
    wpre: np.ndarray
    n_pre: int
    n_transition: int
    n_post: int

    @property
    def n_periods(self) -> int:
        return self.n_pre + self.n_transition + self.n_post


def regime_weights(
    n_pre: int,
    n_transition: int,
    n_post: int,
    wpost: WeightingScheme,
    wpre: WeightingScheme,
) -> RegimeWeights:
    """Realize pre and post schemes over a panel layout.

    The pre-treatment weights are stored in chronological order, i.e.
    ``wpre[0]`` is the weight of the earliest period tau = -n_pre and
    ``wpre[-1]`` the weight of tau = -1.
    """
    post = realize_weights(wpost, n_post)
    # realize_weights orders pre weights tau = -1..-H; flip to chronological.
    pre = realize_weights(wpre, n_pre)[::-1].copy()
    omega = np.concatenate([-pre, np.zeros(n_transition), post])
    omega.flags.writeable = False
    pre.flags.writeable = False
    return RegimeWeights(
        omega=omega,
        wpost=post,
        wpre=pre,
        n_pre=n_pre,
        n_transition=n_transition,
        n_post=n_post,
    )
