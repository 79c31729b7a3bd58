"""Constrained Gauss-Gamma mixture models.

A constrained mixture splits its components by the sign domain they explain:

* ``NEGATIVE`` components are Gamma densities of ``-x`` and vanish for x >= 0,
* ``NEARZERO`` components are zero-mean Gaussians on the whole line,
* ``POSITIVE`` components are Gamma densities of ``x`` and vanish for x <= 0.

``FREE_GAUSSIAN`` components (Gaussians with a free mean) only appear in the
baseline Gaussian mixture.  Components are always stored in the order
negative, near-zero, positive, free, so a model is fully described by its
configuration counts plus per-component parameters.

At exactly x = 0 only the Gaussian components contribute, apart from the
exponential (shape 1) Gamma limit.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from scipy.special import gammainc, gammaln, ndtr

from .distributions import (
    GammaParams,
    GaussianParams,
    gamma_log_pdf,
    gaussian_log_pdf,
    sample_gamma,
    sample_gaussian,
)
from .errors import SchemaError

WEIGHT_SUM_TOL = 1e-12
_LOG_2PI = math.log(2.0 * math.pi)


def logsumexp_rows(a: np.ndarray) -> np.ndarray:
    """``log(sum(exp(a), axis=-1))``; rows of all ``-inf`` give ``-inf``."""
    m = np.max(a, axis=-1)
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return safe + np.log(np.sum(np.exp(a - safe[..., None]), axis=-1))


class DomainRole(str, Enum):
    NEGATIVE = "negative"
    NEARZERO = "nearzero"
    POSITIVE = "positive"
    FREE_GAUSSIAN = "free_gaussian"

    @property
    def is_gaussian(self) -> bool:
        return self in (DomainRole.NEARZERO, DomainRole.FREE_GAUSSIAN)


_ROLE_ORDER = (
    DomainRole.NEGATIVE,
    DomainRole.NEARZERO,
    DomainRole.POSITIVE,
    DomainRole.FREE_GAUSSIAN,
)


@dataclass(frozen=True)
class Component:
    role: DomainRole
    params: Union[GaussianParams, GammaParams]

    def __post_init__(self):
        role = DomainRole(self.role)
        object.__setattr__(self, "role", role)
        if role.is_gaussian:
            if not isinstance(self.params, GaussianParams):
                raise ValueError(f"{role.value} component needs GaussianParams")
            if role is DomainRole.NEARZERO and self.params.mean != 0.0:
                raise ValueError("near-zero components must have mean exactly 0")
        elif not isinstance(self.params, GammaParams):
            raise ValueError(f"{role.value} component needs GammaParams")

    @classmethod
    def nearzero(cls, variance: float) -> Component:
        return cls(DomainRole.NEARZERO, GaussianParams(0.0, variance))

    @classmethod
    def positive(cls, shape: float, rate: float) -> Component:
        return cls(DomainRole.POSITIVE, GammaParams(shape, rate))

    @classmethod
    def negative(cls, shape: float, rate: float) -> Component:
        return cls(DomainRole.NEGATIVE, GammaParams(shape, rate))

    @classmethod
    def free_gaussian(cls, mean: float, variance: float) -> Component:
        return cls(DomainRole.FREE_GAUSSIAN, GaussianParams(mean, variance))

    def log_pdf(self, x):
        """Log density at ``x``; ``-inf`` outside the component's domain."""
        x = np.asarray(x, dtype=float)
        if self.role.is_gaussian:
            return gaussian_log_pdf(x, self.params)
        if self.role is DomainRole.POSITIVE:
            return gamma_log_pdf(x, self.params)
        return gamma_log_pdf(-x, self.params)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.role.is_gaussian:
            return ndtr((x - p.mean) / math.sqrt(p.variance))
        if self.role is DomainRole.POSITIVE:
            return gammainc(p.shape, p.rate * np.maximum(x, 0.0))
        return 1.0 - gammainc(p.shape, p.rate * np.maximum(-x, 0.0))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.role.is_gaussian:
            return sample_gaussian(self.params, rng, n)
        draws = sample_gamma(self.params, rng, n)
        return -draws if self.role is DomainRole.NEGATIVE else draws


_CONFIG_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*/\s*(\d+)\s*$")


@dataclass(frozen=True, order=True)
class Configuration:
    """Component counts per domain, written ``negative/nearzero/positive``."""

    negative: int = 0
    nearzero: int = 0
    positive: int = 0
    free: int = 0

    def __post_init__(self):
        for name in ("negative", "nearzero", "positive", "free"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} count must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n_components < 1:
            raise ValueError("a configuration needs at least one component")

    @classmethod
    def parse(cls, text: str) -> Configuration:
        m = _CONFIG_RE.match(text)
        if m is None:
            raise ValueError(f"expected a configuration like '2/1/2', got {text!r}")
        return cls(*(int(g) for g in m.groups()))

    @property
    def n_components(self) -> int:
        return self.negative + self.nearzero + self.positive + self.free

    @property
    def roles(self) -> tuple[DomainRole, ...]:
        counts = (self.negative, self.nearzero, self.positive, self.free)
        return tuple(r for r, c in zip(_ROLE_ORDER, counts) for _ in range(c))

    @property
    def is_constrained(self) -> bool:
        return self.free == 0

    def __str__(self):
        s = f"{self.negative}/{self.nearzero}/{self.positive}"
        return s if self.free == 0 else f"{s}+{self.free}g"


@dataclass(frozen=True)
class MixtureModel:
    """Weighted sum of domain-restricted components.

    The configuration is derived from the component roles, which must already
    be in canonical order.
    """

    weights: tuple[float, ...]
    components: tuple[Component, ...]

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        components = tuple(self.components)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)
        if len(weights) != len(components) or not components:
            raise ValueError("need one weight per component and at least one component")
        for w in weights:
            if not (0.0 <= w <= 1.0):
                raise ValueError(f"weights must lie in [0, 1], got {w}")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {math.fsum(weights)!r}")
        ranks = [_ROLE_ORDER.index(c.role) for c in components]
        if ranks != sorted(ranks):
            raise ValueError("components must be ordered negative, nearzero, positive, free")

    @property
    def configuration(self) -> Configuration:
        roles = [c.role for c in self.components]
        return Configuration(*(roles.count(r) for r in _ROLE_ORDER))

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def log_weights(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(self.weights))

    def component_log_pdf(self, x) -> np.ndarray:
        """Matrix of per-component log densities, shape ``x.shape + (K,)``.

        Entries are ``-inf`` where an observation lies outside a component's
        domain.
        """
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = np.empty((flat.size, self.n_components))
        gauss = [k for k, c in enumerate(self.components) if c.role.is_gaussian]
        gam = [k for k, c in enumerate(self.components) if not c.role.is_gaussian]
        if gauss:
            mean = np.array([self.components[k].params.mean for k in gauss])
            var = np.array([self.components[k].params.variance for k in gauss])
            out[:, gauss] = -0.5 * (_LOG_2PI + np.log(var)) - (flat[:, None] - mean) ** 2 / (2.0 * var)
        if gam:
            shape = np.array([self.components[k].params.shape for k in gam])
            rate = np.array([self.components[k].params.rate for k in gam])
            positive = np.array([self.components[k].role is DomainRole.POSITIVE for k in gam])
            ax = np.abs(flat)
            with np.errstate(divide="ignore"):
                log_ax = np.log(ax)
            const = shape * np.log(rate) - gammaln(shape)
            dens = const + (shape - 1.0) * np.where(ax > 0, log_ax, 0.0)[:, None] - rate * ax[:, None]
            inside = np.where(positive, (flat > 0)[:, None], (flat < 0)[:, None])
            at_zero = (flat == 0)[:, None] & (shape == 1.0)
            out[:, gam] = np.where(inside, dens, np.where(at_zero, np.log(rate), -np.inf))
        return out.reshape(x.shape + (self.n_components,))

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = logsumexp_rows(self.component_log_pdf(x) + self.log_weights)
        return out[()] if np.ndim(out) == 0 else out

    def pdf(self, x):
        return np.exp(self.log_pdf(x))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def log_likelihood(self, data) -> float:
        return float(np.sum(self.log_pdf(np.asarray(data, dtype=float))))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` observations: pick a component by weight, then draw from it."""
        if n < 1:
            raise ValueError("n must be >= 1")
        labels = rng.choice(self.n_components, size=n, p=np.asarray(self.weights))
        out = np.empty(n)
        for k, comp in enumerate(self.components):
            idx = np.flatnonzero(labels == k)
            if idx.size:
                out[idx] = comp.sample(rng, idx.size)
        return out

    def support_bound(self) -> float:
        """Half-width of an interval that holds all but a negligible tail."""
        scales = []
        for c in self.components:
            p = c.params
            if c.role.is_gaussian:
                scales.append(abs(p.mean) + 50.0 * math.sqrt(p.variance))
            else:
                scales.append(50.0 * max(p.shape / p.rate, math.sqrt(p.shape) / p.rate))
        return max(scales)


# -- serialization ----------------------------------------------------------


def serialize(model: MixtureModel) -> dict:
    cfg = model.configuration
    config = {"negative": cfg.negative, "nearzero": cfg.nearzero, "positive": cfg.positive}
    if cfg.free:
        config["free_gaussian"] = cfg.free
    comps = []
    for c in model.components:
        if c.role.is_gaussian:
            body = {"gaussian": {"mean": c.params.mean, "variance": c.params.variance}}
        else:
            body = {"gamma": {"shape": c.params.shape, "rate": c.params.rate}}
        comps.append({"role": c.role.value, **body})
    return {"configuration": config, "weights": list(model.weights), "components": comps}


def _number(doc, key, path):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(path, f"missing field {key!r}")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{path}.{key}", f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise SchemaError(f"{path}.{key}", "must be finite")
    return float(v)


def _count(doc, key, path):
    v = doc.get(key, 0)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise SchemaError(f"{path}.{key}", f"expected a non-negative integer, got {v!r}")
    return v


def deserialize(doc) -> MixtureModel:
    if not isinstance(doc, dict):
        raise SchemaError("$", "model document must be an object")
    for key in ("configuration", "weights", "components"):
        if key not in doc:
            raise SchemaError("$", f"missing field {key!r}")
    cfg_doc = doc["configuration"]
    if not isinstance(cfg_doc, dict):
        raise SchemaError("$.configuration", "must be an object")
    counts = [
        _count(cfg_doc, k, "$.configuration")
        for k in ("negative", "nearzero", "positive", "free_gaussian")
    ]
    try:
        config = Configuration(*counts)
    except ValueError as exc:
        raise SchemaError("$.configuration", str(exc)) from None

    weights = doc["weights"]
    comps_doc = doc["components"]
    if not isinstance(weights, list):
        raise SchemaError("$.weights", "must be an array")
    if not isinstance(comps_doc, list):
        raise SchemaError("$.components", "must be an array")
    if len(weights) != config.n_components:
        raise SchemaError("$.weights", f"expected {config.n_components} weights, got {len(weights)}")
    if len(comps_doc) != config.n_components:
        raise SchemaError(
            "$.components", f"expected {config.n_components} components, got {len(comps_doc)}"
        )
    w = [_number({"w": v}, "w", f"$.weights[{i}]") for i, v in enumerate(weights)]
    for i, v in enumerate(w):
        if not 0.0 <= v <= 1.0:
            raise SchemaError(f"$.weights[{i}]", f"weight must lie in [0, 1], got {v!r}")
    if abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
        raise SchemaError("$.weights", f"weights must sum to 1, got {math.fsum(w)!r}")

    components = []
    for i, (role, c) in enumerate(zip(config.roles, comps_doc)):
        path = f"$.components[{i}]"
        if not isinstance(c, dict):
            raise SchemaError(path, "must be an object")
        if c.get("role") != role.value:
            raise SchemaError(f"{path}.role", f"expected {role.value!r}, got {c.get('role')!r}")
        if role.is_gaussian:
            mean = _number(c.get("gaussian"), "mean", f"{path}.gaussian")
            var = _number(c["gaussian"], "variance", f"{path}.gaussian")
            if var <= 0:
                raise SchemaError(f"{path}.gaussian.variance", "must be > 0")
            if role is DomainRole.NEARZERO and mean != 0.0:
                raise SchemaError(f"{path}.gaussian.mean", "near-zero components have mean 0")
            components.append(Component(role, GaussianParams(mean, var)))
        else:
            shape = _number(c.get("gamma"), "shape", f"{path}.gamma")
            rate = _number(c["gamma"], "rate", f"{path}.gamma")
            if shape <= 0:
                raise SchemaError(f"{path}.gamma.shape", "must be > 0")
            if rate <= 0:
                raise SchemaError(f"{path}.gamma.rate", "must be > 0")
            components.append(Component(role, GammaParams(shape, rate)))
    return MixtureModel(tuple(w), tuple(components))


def dumps(model: MixtureModel) -> str:
    return json.dumps(serialize(model), indent=2) + "\n"


def loads(text: str) -> MixtureModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    return deserialize(doc)


def save_model(model: MixtureModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model))


def load_model(path) -> MixtureModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def paper_ground_truth() -> MixtureModel:
    """Two Gamma tails per side (shapes 20 and 10, rates 3 and 4) around N(0, 1).

    The source study does not report weights; they are uniform here.
    """
    return MixtureModel(
        weights=(0.2,) * 5,
        components=(
            Component.negative(20.0, 3.0),
            Component.negative(10.0, 4.0),
            Component.nearzero(1.0),
            Component.positive(20.0, 3.0),
            Component.positive(10.0, 4.0),
        ),
    )
