"""Core probability model for vague temporal adverbials.

Each event class gets a temporal precedence curve: the probability that an
occurrence ``t`` minutes in the past counts as settled, modeled as a
standard normal CDF in ``t`` with an event-specific width ``sigma_e``.
Each adverbial ("just", "recently", ...) is an unnormalized Gaussian
kernel on that precedence axis, peaking at the adverbial's prototypical
precedence value ``mu_a``.  Composing the two yields the probability that
the adverbial applies to the event at a given elapsed time.

The non-factorized baseline skips the shared precedence axis and assigns
one Gaussian kernel in raw minutes to every (event, adverbial) pair.

Functions here are scalar and pure; the vectorized equivalents used by the
optimizer live in :mod:`justnow.fitting`.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

__all__ = [
    "UNIT_MINUTES",
    "DomainError",
    "UnknownUnitError",
    "UnknownIdError",
    "Duration",
    "EventParams",
    "AdverbialParams",
    "FactorizedModel",
    "PairParams",
    "PairGaussianModel",
    "erf",
    "event_precedence",
    "adverbial_applicability",
    "composite_probability",
    "baseline_probability",
    "best_adverbial",
    "reference_model",
    "save_model",
    "load_model",
    "save_baseline",
    "load_baseline",
    "load_any_model",
]

# Calendar convention: 365-day year, month = year / 12 (43800 min = 30.4166.. days).
UNIT_MINUTES: dict[str, float] = {
    "minute": 1.0,
    "hour": 60.0,
    "day": 1440.0,
    "week": 10080.0,
    "month": 43800.0,
    "year": 525600.0,
}

_SQRT2 = math.sqrt(2.0)


class DomainError(ValueError):
    """Numeric argument outside a function's domain (non-finite or wrong sign)."""


class UnknownUnitError(ValueError):
    """Time unit not present in the supported unit table."""


class UnknownIdError(KeyError):
    """Event or adverbial id missing from a model."""


def canonical_unit(text: str) -> str:
    """Normalize a unit name: lowercase, trailing plural "s" stripped."""
    unit = text.strip().lower()
    if unit not in UNIT_MINUTES and unit.endswith("s") and unit[:-1] in UNIT_MINUTES:
        unit = unit[:-1]
    return unit


@dataclass(frozen=True)
class Duration:
    """A non-negative elapsed time, stored as (value, unit)."""

    value: float
    unit: str = "minute"

    def __post_init__(self) -> None:
        if self.unit not in UNIT_MINUTES:
            raise UnknownUnitError(
                f"unknown time unit {self.unit!r}; expected one of {sorted(UNIT_MINUTES)}"
            )
        value = float(self.value)
        if not math.isfinite(value) or value < 0.0:
            raise DomainError(f"duration value must be finite and >= 0, got {self.value!r}")
        object.__setattr__(self, "value", value)

    def to_minutes(self) -> float:
        return self.value * UNIT_MINUTES[self.unit]

    @classmethod
    def parse(cls, text: str) -> "Duration":
        """Parse ``"<value> <unit>"``, e.g. ``"1 day"`` or ``"90 minutes"``.

        A trailing plural "s" on the unit is accepted.
        """
        parts = text.split()
        if len(parts) != 2:
            raise UnknownUnitError(f"expected '<value> <unit>', got {text!r}")
        try:
            value = float(parts[0])
        except ValueError as exc:
            raise DomainError(f"bad duration value in {text!r}") from exc
        return cls(value, canonical_unit(parts[1]))


@dataclass(frozen=True)
class EventParams:
    """Precedence-curve width for one event class; sigma_e is in minutes."""

    event_id: str
    sigma_e: float

    def __post_init__(self) -> None:
        sigma = float(self.sigma_e)
        if not math.isfinite(sigma) or sigma <= 0.0:
            raise DomainError(f"sigma_e must be finite and > 0, got {self.sigma_e!r}")
        object.__setattr__(self, "sigma_e", sigma)


@dataclass(frozen=True)
class AdverbialParams:
    """Kernel location and width for one adverbial on the precedence axis."""

    adverbial_id: str
    mu_a: float
    sigma_a: float

    def __post_init__(self) -> None:
        mu = float(self.mu_a)
        sigma = float(self.sigma_a)
        if not math.isfinite(mu):
            raise DomainError(f"mu_a must be finite, got {self.mu_a!r}")
        if not math.isfinite(sigma) or sigma <= 0.0:
            raise DomainError(f"sigma_a must be finite and > 0, got {self.sigma_a!r}")
        object.__setattr__(self, "mu_a", mu)
        object.__setattr__(self, "sigma_a", sigma)


def erf(x: float) -> float:
    """Gauss error function.

    Evaluated on |x| and mirrored with copysign so erf(-x) == -erf(x) holds
    bit-for-bit regardless of the platform libm.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"erf requires a finite argument, got {x!r}")
    return math.copysign(math.erf(abs(x)), x)


def event_precedence(t_minutes: float, event: EventParams) -> float:
    """Probability that an occurrence t_minutes ago counts as settled.

    Standard normal CDF of t / sigma_e: exactly 0.5 at t = 0, strictly
    increasing, and inside (0, 1) for all finite t up to float saturation.
    """
    t_minutes = float(t_minutes)
    if not math.isfinite(t_minutes):
        raise DomainError(f"elapsed time must be finite, got {t_minutes!r}")
    return 0.5 * (erf(t_minutes / (_SQRT2 * event.sigma_e)) + 1.0)


def adverbial_applicability(x: float, adverbial: AdverbialParams) -> float:
    """Unnormalized Gaussian kernel on the precedence axis; equals 1 iff x == mu_a."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"precedence value must be finite, got {x!r}")
    z = (x - adverbial.mu_a) / adverbial.sigma_a
    return math.exp(-0.5 * z * z)


def composite_probability(t: Duration, event: EventParams, adverbial: AdverbialParams) -> float:
    """Probability that the adverbial applies to the event at elapsed time t."""
    return adverbial_applicability(event_precedence(t.to_minutes(), event), adverbial)


@dataclass(frozen=True)
class PairParams:
    """Baseline kernel for one (event, adverbial) pair, in raw minutes."""

    event_id: str
    adverbial_id: str
    mu_minutes: float
    sigma_minutes: float

    def __post_init__(self) -> None:
        mu = float(self.mu_minutes)
        sigma = float(self.sigma_minutes)
        if not math.isfinite(mu):
            raise DomainError(f"mu_minutes must be finite, got {self.mu_minutes!r}")
        if not math.isfinite(sigma) or sigma <= 0.0:
            raise DomainError(f"sigma_minutes must be finite and > 0, got {self.sigma_minutes!r}")
        object.__setattr__(self, "mu_minutes", mu)
        object.__setattr__(self, "sigma_minutes", sigma)


def baseline_probability(t: Duration, pair: PairParams) -> float:
    """Per-pair Gaussian kernel in minutes, peaking at 1 when t == mu_minutes."""
    z = (t.to_minutes() - pair.mu_minutes) / pair.sigma_minutes
    return math.exp(-0.5 * z * z)


@dataclass(frozen=True)
class FactorizedModel:
    """A set of event curves plus a set of adverbial kernels.

    Any event can be combined with any adverbial, so the model needs
    E + A functions (E + 2A scalar parameters) to cover E x A pairs.
    """

    events: dict[str, EventParams] = field(default_factory=dict)
    adverbials: dict[str, AdverbialParams] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, ev in self.events.items():
            if key != ev.event_id:
                raise ValueError(f"event key {key!r} does not match id {ev.event_id!r}")
        for key, adv in self.adverbials.items():
            if key != adv.adverbial_id:
                raise ValueError(f"adverbial key {key!r} does not match id {adv.adverbial_id!r}")

    @classmethod
    def from_params(
        cls, events: list[EventParams], adverbials: list[AdverbialParams]
    ) -> "FactorizedModel":
        ev_map: dict[str, EventParams] = {}
        for ev in events:
            if ev.event_id in ev_map:
                raise ValueError(f"duplicate event id {ev.event_id!r}")
            ev_map[ev.event_id] = ev
        adv_map: dict[str, AdverbialParams] = {}
        for adv in adverbials:
            if adv.adverbial_id in adv_map:
                raise ValueError(f"duplicate adverbial id {adv.adverbial_id!r}")
            adv_map[adv.adverbial_id] = adv
        return cls(ev_map, adv_map)

    def event(self, event_id: str) -> EventParams:
        try:
            return self.events[event_id]
        except KeyError:
            raise UnknownIdError(f"event {event_id!r} not in model") from None

    def adverbial(self, adverbial_id: str) -> AdverbialParams:
        try:
            return self.adverbials[adverbial_id]
        except KeyError:
            raise UnknownIdError(f"adverbial {adverbial_id!r} not in model") from None

    def probability(self, event_id: str, adverbial_id: str, t: Duration) -> float:
        return composite_probability(t, self.event(event_id), self.adverbial(adverbial_id))

    @property
    def function_count(self) -> int:
        return len(self.events) + len(self.adverbials)

    @property
    def parameter_count(self) -> int:
        return len(self.events) + 2 * len(self.adverbials)

    def to_dict(self) -> dict:
        return {
            "events": [
                {"id": eid, "sigma_e_minutes": self.events[eid].sigma_e}
                for eid in sorted(self.events)
            ],
            "adverbials": [
                {
                    "id": aid,
                    "mu_a": self.adverbials[aid].mu_a,
                    "sigma_a": self.adverbials[aid].sigma_a,
                }
                for aid in sorted(self.adverbials)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FactorizedModel":
        try:
            events = [
                EventParams(str(row["id"]), float(row["sigma_e_minutes"]))
                for row in doc["events"]
            ]
            adverbials = [
                AdverbialParams(str(row["id"]), float(row["mu_a"]), float(row["sigma_a"]))
                for row in doc["adverbials"]
            ]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed factorized model document: {exc}") from exc
        return cls.from_params(events, adverbials)


@dataclass(frozen=True)
class PairGaussianModel:
    """Baseline: one independent Gaussian kernel per (event, adverbial) pair."""

    pairs: dict[tuple[str, str], PairParams] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, pair in self.pairs.items():
            if key != (pair.event_id, pair.adverbial_id):
                raise ValueError(f"pair key {key!r} does not match ids in {pair!r}")

    @classmethod
    def from_params(cls, pairs: list[PairParams]) -> "PairGaussianModel":
        pair_map: dict[tuple[str, str], PairParams] = {}
        for pair in pairs:
            key = (pair.event_id, pair.adverbial_id)
            if key in pair_map:
                raise ValueError(f"duplicate pair {key!r}")
            pair_map[key] = pair
        return cls(pair_map)

    def pair(self, event_id: str, adverbial_id: str) -> PairParams:
        try:
            return self.pairs[(event_id, adverbial_id)]
        except KeyError:
            raise UnknownIdError(f"pair ({event_id!r}, {adverbial_id!r}) not in model") from None

    def probability(self, event_id: str, adverbial_id: str, t: Duration) -> float:
        return baseline_probability(t, self.pair(event_id, adverbial_id))

    @property
    def function_count(self) -> int:
        return len(self.pairs)

    @property
    def parameter_count(self) -> int:
        return 2 * len(self.pairs)

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {
                    "event": key[0],
                    "adverbial": key[1],
                    "mu_minutes": self.pairs[key].mu_minutes,
                    "sigma_minutes": self.pairs[key].sigma_minutes,
                }
                for key in sorted(self.pairs)
            ]
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PairGaussianModel":
        try:
            pairs = [
                PairParams(
                    str(row["event"]),
                    str(row["adverbial"]),
                    float(row["mu_minutes"]),
                    float(row["sigma_minutes"]),
                )
                for row in doc["pairs"]
            ]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed baseline model document: {exc}") from exc
        return cls.from_params(pairs)


def best_adverbial(
    t: Duration, event: EventParams, model: FactorizedModel
) -> tuple[str, float]:
    """Adverbial with the highest composite probability for this event and time.

    Ties break toward the lexicographically smaller adverbial id.
    """
    if event.event_id not in model.events:
        raise UnknownIdError(f"event {event.event_id!r} not in model")
    if not model.adverbials:
        raise UnknownIdError("model has no adverbials")
    best_id = None
    best_p = -math.inf
    for adverbial_id in sorted(model.adverbials):
        p = composite_probability(t, event, model.adverbials[adverbial_id])
        if p > best_p:
            best_id, best_p = adverbial_id, p
    assert best_id is not None
    return best_id, best_p


# Fitted parameters shipped with the repository; reference_model.json mirrors these.
REFERENCE_EVENT_SIGMA_MINUTES: dict[str, float] = {
    "Brushing Teeth": 935.0,
    "Birthday": 314830.0,
    "Vacation": 396579.0,
    "Sabbatical": 798494.0,
    "Year Abroad": 1240803.0,
    "Marriage": 2334869.0,
}

REFERENCE_ADVERBIAL_PARAMS: dict[str, tuple[float, float]] = {
    "Just": (0.48, 0.04),
    "Recently": (0.45, 0.09),
    "Some Time Ago": (0.78, 0.19),
    "Long Time Ago": (1.00, 0.23),
}


def reference_model() -> FactorizedModel:
    """The fitted parameter set shipped with the repository."""
    return FactorizedModel.from_params(
        [EventParams(eid, sigma) for eid, sigma in REFERENCE_EVENT_SIGMA_MINUTES.items()],
        [
            AdverbialParams(aid, mu, sigma)
            for aid, (mu, sigma) in REFERENCE_ADVERBIAL_PARAMS.items()
        ],
    )


def save_model(model: FactorizedModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> FactorizedModel:
    """Load a factorized model from JSON; unknown top-level keys are ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "events" not in doc or "adverbials" not in doc:
        raise ValueError(f"{path}: not a factorized model file")
    return FactorizedModel.from_dict(doc)


def save_baseline(model: PairGaussianModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")


def load_baseline(path: str | os.PathLike) -> PairGaussianModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "pairs" not in doc:
        raise ValueError(f"{path}: not a baseline model file")
    return PairGaussianModel.from_dict(doc)


def load_any_model(path: str | os.PathLike) -> FactorizedModel | PairGaussianModel:
    """Load either model family, dispatching on the document's top-level keys."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "pairs" in doc:
        return PairGaussianModel.from_dict(doc)
    if isinstance(doc, dict) and "events" in doc and "adverbials" in doc:
        return FactorizedModel.from_dict(doc)
    raise ValueError(f"{path}: not a recognized model file")
