"""Panel container for one treated unit and J >= 1 control units.

Periods are ordered as: ``n_pre`` pre-treatment periods, ``n_transition``
transition-window periods (these receive weight zero in every estimator),
then ``n_post`` post-treatment periods.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def _as_locked_array(values, name: str, length: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if length is not None and arr.size != length:
        raise ValidationError(
            f"{name} has {arr.size} entries, expected {length}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Panel:
    """Outcome series for one treated unit and its candidate controls.

    Parameters
    ----------
    treated : array_like
        Outcome series of the treated unit, length
        ``n_pre + n_transition + n_post``.
    controls : sequence of array_like
        Outcome series of the ``J >= 1`` control units, same length.
    n_pre, n_transition, n_post : int
        Regime sizes. ``n_pre >= 2`` and ``n_post >= 2`` are required;
        ``n_transition`` may be zero.
    treated_label, control_labels : str / sequence of str, optional
        Unit names for reporting.
    periods : array_like of int, optional
        Original period labels (e.g. calendar years), strictly increasing.
    """

    treated: np.ndarray
    controls: tuple[np.ndarray, ...]
    n_pre: int
    n_transition: int
    n_post: int
    treated_label: str = "treated"
    control_labels: tuple[str, ...] = ()
    periods: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.n_pre < 2 or self.n_post < 2:
            raise ValidationError(
                "degenerate horizons: need at least 2 pre- and 2 post-treatment "
                f"periods, got n_pre={self.n_pre}, n_post={self.n_post}"
            )
        if self.n_transition < 0:
            raise ValidationError("n_transition must be >= 0")
        n = self.n_pre + self.n_transition + self.n_post
        object.__setattr__(
            self, "treated", _as_locked_array(self.treated, "treated series", n)
        )
        controls = tuple(self.controls)
        if len(controls) < 1:
            raise ValidationError("need at least one control unit")
        labels = tuple(self.control_labels) or tuple(
            f"control{j}" for j in range(len(controls))
        )
        if len(labels) != len(controls):
            raise ValidationError("control_labels length must match controls")
        object.__setattr__(
            self,
            "controls",
            tuple(
                _as_locked_array(c, f"control series '{lab}'", n)
                for c, lab in zip(controls, labels)
            ),
        )
        object.__setattr__(self, "control_labels", labels)
        if self.periods is not None:
            per = np.asarray(self.periods, dtype=int)
            if per.size != n:
                raise ValidationError("periods length must match series length")
            if np.any(np.diff(per) <= 0):
                raise ValidationError("periods must be strictly increasing")
            per = per.copy()
            per.flags.writeable = False
            object.__setattr__(self, "periods", per)

    @property
    def n_controls(self) -> int:
        return len(self.controls)

    @property
    def n_periods(self) -> int:
        return self.n_pre + self.n_transition + self.n_post

    @property
    def pre_slice(self) -> slice:
        return slice(0, self.n_pre)

    @property
    def transition_slice(self) -> slice:
        return slice(self.n_pre, self.n_pre + self.n_transition)

    @property
    def post_slice(self) -> slice:
        return slice(self.n_pre + self.n_transition, self.n_periods)

    def resolve_control(self, control) -> int:
        """Map a 0-based index or unit label to a control position."""
        if isinstance(control, str):
            try:
                return self.control_labels.index(control)
            except ValueError:
                raise ValidationError(f"unknown control unit {control!r}") from None
        idx = int(control)
        if not 0 <= idx < self.n_controls:
            raise ValidationError(
                f"control index {idx} out of range for {self.n_controls} controls"
            )
        return idx

    def difference(self, control=0) -> np.ndarray:
        """Treated-minus-control outcome series X_t for one control unit."""
        j = self.resolve_control(control)
        return self.treated - self.controls[j]

    def with_series(self, treated, controls) -> "Panel":
        """New panel with the same regime layout but replaced series."""
        return Panel(
            treated=treated,
            controls=tuple(controls),
            n_pre=self.n_pre,
            n_transition=self.n_transition,
            n_post=self.n_post,
            treated_label=self.treated_label,
            control_labels=self.control_labels,
            periods=self.periods,
        )
