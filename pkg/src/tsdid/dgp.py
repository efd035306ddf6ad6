"""Seedable data-generating processes for the simulation studies.

Two units are generated.  Untreated potential outcomes follow

    Y_d(0)_t = a0 + d*(a1 - a0) + a2*Y_d(0)_{t-1} + phi(t) + d*nu_t
               + (1 - d*(1 - 1/sqrt(2))) * (e0_t + a3*e0_{t-1})

and the observed treated outcome adds an effect component delta_t with

    delta_t = ATT(t) + a2*delta_{t-1} + a4*t + (1/sqrt(2))*(e1_t + a3*e1_{t-1})

active at every period (ATT(t) = 0 before treatment).  The two error
channels e0 and e1 are built from independent innovation streams; the
treated unit's total error mixes them so that its correlation with the
control unit's error is 1/sqrt(2).

Channel-0 innovations are standardized chi-square(1); channel-1 innovations
are Student-t with the post-treatment horizon as degrees of freedom, scaled
to unit variance.  Recursive states (AR, GARCH, MA lags) are initialized
through a burn-in that is discarded before the sample window.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import kernels
from .errors import ValidationError
from .panel import Panel
from .weights import WeightingScheme, realize_weights

SQRT2 = math.sqrt(2.0)

GARCH_OMEGA = 0.4
GARCH_ALPHA = 0.3
GARCH_BETA = 0.3

BURN_IN = 200

TRENDS = ("none", "binary-step", "cosine", "quadratic")
VIOLATIONS = ("none", "signed-decay", "slow-decay", "idtest-pre", "idtest-post", "idtest-both")
# "none" disables the error channels entirely (deterministic skeleton).
ERRORS = ("none", "mds", "garch", "whitenoise")


@dataclass(frozen=True)
class DgpSpec:
    """Full parameterization of one simulation design.

    ``att`` is either a constant effect level or the string ``"sin"`` for
    the heterogeneous path sin(t)/pi.  ``violation_intensity`` is the h
    parameter of the identification-test violation patterns.
    """

    alpha0: float = 0.5
    alpha1: float = 0.5
    alpha2: float = 0.0
    alpha3: float = 0.0
    alpha4: float = 0.0
    trend: str = "none"
    violation: str = "none"
    violation_intensity: float = 0.0
    error: str = "mds"
    att: float | str = 0.0
    name: str = ""

    def __post_init__(self):
        if self.trend not in TRENDS:
            raise ValidationError(f"unknown trend {self.trend!r}")
        if self.violation not in VIOLATIONS:
            raise ValidationError(f"unknown violation pattern {self.violation!r}")
        if self.error not in ERRORS:
            raise ValidationError(f"unknown error process {self.error!r}")
        if isinstance(self.att, str) and self.att != "sin":
            raise ValidationError(f"att must be a number or 'sin', got {self.att!r}")


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for substream (master_seed, *path).

    Parallel and serial runs that address substreams by index draw
    identical values.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def trend_values(kind: str, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if kind == "none":
        return np.zeros_like(t)
    if kind == "binary-step":
        return SQRT2 * (t >= 4.0)
    if kind == "cosine":
        return np.cos(t)
    if kind == "quadratic":
        return t + t * t / 500.0
    raise ValidationError(f"unknown trend {kind!r}")


def violation_means(spec: DgpSpec, t: np.ndarray) -> np.ndarray:
    """Mean of the identification-violation term nu_t at each period label.

    All decay patterns carry an implicit 1{t != 0} guard (zero mean at the
    transition period, where |t|^-c is undefined); sgn(0) = 0.
    """
    t = np.asarray(t, dtype=float)
    h = spec.violation_intensity
    nonzero = t != 0.0
    absd = np.where(nonzero, np.abs(t), 1.0)
    if spec.violation == "signed-decay":
        return 0.5 * nonzero * np.sign(t) * absd**-0.9
    if spec.violation == "slow-decay":
        return 0.5 * nonzero * absd**-0.25
    if spec.violation == "idtest-pre":
        return np.where(t <= -1.0, 2.5 * h * absd**-0.25, 0.0)
    if spec.violation == "idtest-post":
        return np.where(t >= 1.0, 2.5 * h * absd**-0.25, 0.0)
    if spec.violation == "idtest-both":
        return 2.5 * (1.0 - h * (1.0 - np.sign(t))) * nonzero * absd**-0.25
    raise ValidationError(f"unknown violation pattern {spec.violation!r}")


def _violation_is_deterministic_zero(spec: DgpSpec, t: np.ndarray) -> np.ndarray:
    """Mask of periods where nu_t is exactly zero (not merely mean zero)."""
    t = np.asarray(t, dtype=float)
    if spec.violation == "idtest-pre":
        return t > -1.0
    if spec.violation == "idtest-post":
        return t < 1.0
    return np.zeros(t.shape, dtype=bool)


def att_path_values(spec: DgpSpec, n_post: int) -> np.ndarray:
    """ATT(t) for t = 1..n_post."""
    t = np.arange(1, n_post + 1, dtype=float)
    if isinstance(spec.att, str):
        return np.sin(t) / math.pi
    return np.full(n_post, float(spec.att))


def true_att(spec: DgpSpec, wpost: WeightingScheme | None, n_post: int) -> float:
    """Exact weighted aggregate of the ATT path under the post weights."""
    w = realize_weights(wpost or WeightingScheme.uniform(), n_post)
    return float(w @ att_path_values(spec, n_post))


def error_series(kind: str, eps: np.ndarray) -> np.ndarray:
    """Build an error series of length len(eps) - 2 from innovations.

    The first two innovations seed the lag states; every process consumes
    the same number of draws so substreams stay aligned across processes.
    """
    if kind == "none":
        return np.zeros(eps.shape[0] - 2)
    if kind == "mds":
        return eps[2:] * eps[1:-1]
    if kind == "whitenoise":
        return (eps[2:] + eps[1:-1] * eps[:-2]) / SQRT2
    if kind == "garch":
        # State initialized at the unconditional variance 1 with e = 0.
        return kernels.garch_filter(
            np.ascontiguousarray(eps[2:]), GARCH_OMEGA, GARCH_ALPHA, GARCH_BETA, 1.0, 0.0
        )
    raise ValidationError(f"unknown error process {kind!r}")


@dataclass(frozen=True)
class SimulatedPanel:
    """A generated two-unit panel with its generating design."""

    panel: Panel
    spec: DgpSpec

    def true_att(self, wpost: WeightingScheme | None = None) -> float:
        # Recomputed on demand so the truth always matches this horizon.
        return true_att(self.spec, wpost, self.panel.n_post)


def generate(
    spec: DgpSpec,
    n_pre: int,
    n_post: int,
    seed,
    n_transition: int = 1,
    burn_in: int = BURN_IN,
) -> SimulatedPanel:
    """Simulate a two-unit panel; bit-reproducible given (spec, sizes, seed).

    ``seed`` is either an integer master seed or a Generator (e.g. from
    :func:`substream` for per-replication streams).
    """
    if n_pre < 2 or n_post < 2:
        raise ValidationError("need n_pre >= 2 and n_post >= 2")
    if n_post <= 2:
        raise ValidationError(
            "Student-t innovations need at least 3 post-treatment periods "
            "(degrees of freedom equal the post horizon)"
        )
    rng = seed if isinstance(seed, np.random.Generator) else substream(int(seed))

    n_sample = n_pre + n_transition + n_post
    m = burn_in + n_sample
    labels = np.concatenate(
        [
            np.arange(-(n_pre + burn_in), 0, dtype=float),
            np.zeros(n_transition),
            np.arange(1, n_post + 1, dtype=float),
        ]
    )

    # Fixed draw order: channel-0 innovations, channel-1 innovations, nu.
    eps0 = (rng.chisquare(1.0, size=m + 2) - 1.0) / SQRT2
    df = float(n_post)
    eps1 = rng.standard_t(df, size=m + 2) / math.sqrt(df / (df - 2.0))

    e0 = error_series(spec.error, eps0)  # length m, aligned with labels
    e1 = error_series(spec.error, eps1)

    # One-lag noise composites; index k refers to timeline position k.
    noise0 = np.empty(m)
    noise0[0] = e0[0]
    noise0[1:] = e0[1:] + spec.alpha3 * e0[:-1]
    noise1 = np.empty(m)
    noise1[0] = e1[0]
    noise1[1:] = e1[1:] + spec.alpha3 * e1[:-1]

    nu = np.zeros(m)
    if spec.violation != "none":
        means = violation_means(spec, labels)
        draws = rng.normal(loc=means, scale=1.0)
        zero_mask = _violation_is_deterministic_zero(spec, labels)
        nu = np.where(zero_mask, 0.0, draws)

    phi = trend_values(spec.trend, labels)

    u0 = spec.alpha0 + phi + noise0
    u1 = spec.alpha1 + phi + nu + noise0 / SQRT2

    att = np.zeros(m)
    att[-n_post:] = att_path_values(spec, n_post)
    u_delta = att + spec.alpha4 * labels + noise1 / SQRT2

    if spec.alpha2 == 0.0:
        y0_pot = u0
        y1_pot = u1
        delta = u_delta
    else:
        y0_pot = kernels.ar1_filter(np.ascontiguousarray(u0), spec.alpha2, 0.0)
        y1_pot = kernels.ar1_filter(np.ascontiguousarray(u1), spec.alpha2, 0.0)
        delta = kernels.ar1_filter(np.ascontiguousarray(u_delta), spec.alpha2, 0.0)

    treated = (y1_pot + delta)[-n_sample:]
    control = y0_pot[-n_sample:]
    panel = Panel(
        treated=treated,
        controls=(control,),
        n_pre=n_pre,
        n_transition=n_transition,
        n_post=n_post,
        treated_label="unit1",
        control_labels=("unit0",),
    )
    return SimulatedPanel(panel=panel, spec=spec)


_PRESETS = {
    "sc-ba": dict(alpha0=0.5, alpha1=0.5, error="mds"),
    "ba": dict(alpha0=0.5, alpha1=-0.5, error="mds"),
    "sc": dict(alpha0=0.5, alpha1=0.5, trend="binary-step", error="mds"),
    "pt-na-a": dict(alpha0=0.5, alpha1=0.5, violation="signed-decay", error="mds"),
    "pt-na-b": dict(alpha0=0.5, alpha1=0.5, violation="slow-decay", error="mds"),
    "garch": dict(alpha0=0.5, alpha1=0.5, error="garch"),
    "ma1": dict(alpha0=0.5, alpha1=0.5, alpha3=0.25, error="whitenoise"),
    "ar1": dict(alpha0=0.5, alpha1=0.5, alpha2=0.5, trend="cosine", error="whitenoise"),
    "u-r": dict(alpha0=0.5, alpha1=0.5, alpha2=1.0, error="whitenoise"),
    "q-t": dict(alpha0=0.5, alpha1=0.5, trend="quadratic", error="whitenoise"),
    "t-t": dict(alpha0=0.5, alpha1=0.5, alpha4=1.0, error="mds"),
    "idtest-i": dict(alpha0=0.5, alpha1=-0.5, violation="idtest-pre", error="mds"),
    "idtest-ii": dict(alpha0=0.5, alpha1=0.5, trend="binary-step", violation="idtest-post", error="mds"),
    "idtest-iii": dict(alpha0=0.5, alpha1=-0.5, trend="binary-step", violation="idtest-both", error="mds"),
}

_ALIASES = {
    "scba": "sc-ba",
    "ptnaa": "pt-na-a",
    "ptnab": "pt-na-b",
    "garch11": "garch",
    "ur": "u-r",
    "qt": "q-t",
    "tt": "t-t",
    "idtest1": "idtest-i",
    "idtest2": "idtest-ii",
    "idtest3": "idtest-iii",
    "idtesti": "idtest-i",
    "idtestii": "idtest-ii",
    "idtestiii": "idtest-iii",
}


def preset_names() -> tuple[str, ...]:
    return tuple(_PRESETS)


def _canonical(name: str) -> str:
    key = "".join(ch for ch in name.lower() if ch.isalnum())
    for canon in _PRESETS:
        if "".join(ch for ch in canon if ch.isalnum()) == key:
            return canon
    if key in _ALIASES:
        return _ALIASES[key]
    raise ValidationError(
        f"unknown preset {name!r}; known presets: {', '.join(_PRESETS)}"
    )


def preset(name: str, h: float = 0.0, att: float | str = 0.0) -> DgpSpec:
    """Named simulation design from the fourteen-preset registry.

    ``h`` sets the violation intensity of the identification-test designs;
    ``att`` overrides the treatment-effect path.
    """
    canon = _canonical(name)
    fields = dict(_PRESETS[canon])
    return DgpSpec(name=canon, violation_intensity=float(h), att=att, **fields)


def spec_to_dict(spec: DgpSpec) -> dict:
    return asdict(spec)


def spec_from_dict(data: dict) -> DgpSpec:
    """Rebuild a spec from a mapping; a 'preset' key seeds the fields and any
    remaining keys override them."""
    data = dict(data)
    base = None
    if "preset" in data:
        base = preset(data.pop("preset"))
    known = {f for f in DgpSpec.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown DGP fields: {sorted(unknown)}")
    if base is not None:
        return replace(base, **data)
    return DgpSpec(**data)
