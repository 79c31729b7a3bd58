"""Expectation-Maximisation for constrained mixtures of fixed configuration.

The M-step is closed form throughout.  Near-zero Gaussians re-estimate their
variance with the mean held at 0, free Gaussians use the usual weighted mean
and variance, and Gamma components are moment matched to the responsibility
weighted mean and variance of the (sign-corrected) observations in their
domain.

Moment matching is not the exact maximiser of the expected complete-data
log-likelihood for a Gamma component, so plain moment-matching EM can lose
likelihood near convergence.  When the previous model is available the
M-step therefore guards each Gamma update: the matched rate ``shape / mean``
is the exact maximiser for a fixed shape, and the matched shape is
accepted if it scores at least as well as the previous shape under that
rate; otherwise the shape backtracks towards the previous value until it
does.  This keeps every iteration an ascent step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from scipy.special import gammaln

from .distributions import GammaParams, GaussianParams, Moments, moments_to_gamma
from .errors import (
    ComponentCollapse,
    GaussGammaError,
    InfeasibleConfiguration,
    ZeroDensityObservation,
)
from .mixture import Component, Configuration, DomainRole, MixtureModel, serialize

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    rel_tol: float = 1e-8
    weight_floor: float = 1e-10
    seed: int = 0
    # accept a moment-matched Gamma shape only if it does not lower the
    # expected complete-data log-likelihood
    monotone_guard: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not self.weight_floor > 0:
            raise ValueError("weight_floor must be > 0")


@dataclass(frozen=True)
class Responsibilities:
    """Posterior component probabilities, one row per observation."""

    values: np.ndarray

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_components(self) -> int:
        return self.values.shape[1]


@dataclass
class FitReport:
    model: MixtureModel
    log_likelihood: float
    ll_trace: list[float]
    iterations: int
    converged: bool
    seed: int = 0
    configuration: Configuration = field(default=None)

    def __post_init__(self):
        if self.configuration is None:
            self.configuration = self.model.configuration

    def to_dict(self) -> dict:
        return {
            "configuration": str(self.configuration),
            "seed": self.seed,
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "converged": self.converged,
            "ll_trace": list(self.ll_trace),
            "model": serialize(self.model),
        }


def _as_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("data must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("data must be finite")
    return x


class _Workspace:
    """Data-derived arrays shared by every iteration of a fit."""

    def __init__(self, x: np.ndarray, config: Configuration):
        self.x = x
        self.config = config
        roles = config.roles
        self.n_obs = x.size
        self.gauss = np.array([k for k, r in enumerate(roles) if r.is_gaussian], dtype=int)
        self.gamma = np.array([k for k, r in enumerate(roles) if not r.is_gaussian], dtype=int)
        self.nearzero = np.array([r is DomainRole.NEARZERO for r in roles])
        self.positive = np.array([roles[k] is DomainRole.POSITIVE for k in self.gamma], dtype=bool)
        # component-major layout: rows are components, columns observations
        ax = np.abs(x)
        self.ax = ax
        self.log_ax = np.log(np.where(ax > 0, ax, 1.0))
        self.zero = ax == 0
        self.outside = ~np.where(self.positive[:, None], x > 0, x < 0)

    def log_joint(self, p: _Params) -> np.ndarray:
        """``log(weight_k) + log p_k(x_t)`` for every observation and component."""
        out = np.empty((self.config.n_components, self.n_obs))
        with np.errstate(divide="ignore"):
            log_w = np.log(p.weights)
        if self.gauss.size:
            dev = self.x - p.mean[:, None]
            c = log_w[self.gauss] - 0.5 * (_LOG_2PI + np.log(p.var))
            out[self.gauss] = c[:, None] - dev * dev / (2.0 * p.var)[:, None]
        if self.gamma.size:
            c = log_w[self.gamma] + p.shape * np.log(p.rate) - gammaln(p.shape)
            dens = c[:, None] + np.outer(p.shape - 1.0, self.log_ax) - np.outer(p.rate, self.ax)
            dens[self.outside] = -np.inf
            if np.any(p.shape == 1.0) and np.any(self.zero):
                limit = np.where(p.shape == 1.0, c, -np.inf)
                dens[:, self.zero] = limit[:, None]
            out[self.gamma] = dens
        return out

    def e_step(self, p: _Params) -> tuple[np.ndarray, float]:
        joint = self.log_joint(p)
        top = joint.max(axis=0)
        bad = np.flatnonzero(~np.isfinite(top))
        if bad.size:
            t = int(bad[0])
            raise ZeroDensityObservation(t, float(self.x[t]))
        joint -= top
        g = np.exp(joint, out=joint)
        total = g.sum(axis=0)
        g /= total
        return g, float(np.sum(top + np.log(total)))

    def m_step(self, g: np.ndarray, weight_floor: float, previous: _Params | None) -> _Params:
        x = self.x
        n = g.sum(axis=1)
        for k in np.flatnonzero(~(n >= weight_floor * self.n_obs)):
            raise ComponentCollapse(int(k), f"effective count {float(n[k])!r} below floor")
        # weighted first moment, then centred second moment (two-pass for accuracy)
        centre = (g @ x) / n
        centre[self.nearzero] = 0.0
        dev = x - centre[:, None]
        var = np.einsum("kt,kt->k", g, dev * dev) / n
        for k in np.flatnonzero(~((var > 0) & np.isfinite(var))):
            raise ComponentCollapse(int(k), f"weighted variance is {float(var[k])!r}")

        shape = rate = _EMPTY
        if self.gamma.size:
            gam = self.gamma
            mean = np.where(self.positive, centre[gam], -centre[gam])
            for j in np.flatnonzero(~(mean > 0)):
                raise ComponentCollapse(int(gam[j]), f"weighted mean is {float(mean[j])!r}")
            vg = var[gam]
            shape = mean * mean / vg
            if previous is not None:
                gg = g[gam]
                mean_log = (gg @ self.log_ax) / n[gam]
                # exact zeros carrying weight (exponential limit) leave log-moments undefined
                zero_mass = gg[:, self.zero].sum(axis=1) if np.any(self.zero) else np.zeros(gam.size)
                shape = np.array([
                    _guarded_shape(float(a), float(a0), float(m), float(ml)) if zm == 0 else float(a)
                    for a, a0, m, ml, zm in zip(shape, previous.shape, mean, mean_log, zero_mass)
                ])
            rate = shape / mean
        return _Params(
            weights=n / n.sum(),
            mean=centre[self.gauss],
            var=var[self.gauss],
            shape=shape,
            rate=rate,
        )


_EMPTY = np.empty(0)


@dataclass(frozen=True)
class _Params:
    """Flat parameter arrays: Gaussian entries then Gamma entries, each in
    component order."""

    weights: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    shape: np.ndarray
    rate: np.ndarray

    @classmethod
    def from_model(cls, model: MixtureModel) -> _Params:
        gauss = [c.params for c in model.components if c.role.is_gaussian]
        gam = [c.params for c in model.components if not c.role.is_gaussian]
        return cls(
            weights=np.asarray(model.weights),
            mean=np.array([p.mean for p in gauss]),
            var=np.array([p.variance for p in gauss]),
            shape=np.array([p.shape for p in gam]),
            rate=np.array([p.rate for p in gam]),
        )

    def to_model(self, config: Configuration) -> MixtureModel:
        gi = gj = 0
        comps = []
        for role in config.roles:
            if role.is_gaussian:
                comps.append(Component(role, GaussianParams(float(self.mean[gi]), float(self.var[gi]))))
                gi += 1
            else:
                comps.append(Component(role, GammaParams(float(self.shape[gj]), float(self.rate[gj]))))
                gj += 1
        return MixtureModel(tuple(self.weights.tolist()), tuple(comps))


def e_step(model: MixtureModel, data) -> tuple[Responsibilities, float]:
    """Responsibilities of every component for every observation, and the
    data log-likelihood under ``model``.

    Raises ZeroDensityObservation if some observation lies outside the
    domain of every component.
    """
    x = _as_data(data)
    g, ll = _Workspace(x, model.configuration).e_step(_Params.from_model(model))
    return Responsibilities(g.T.copy()), ll


def _gamma_profile(shape: float, mean: float, mean_log: float) -> float:
    # expected complete-data log-likelihood per unit weight at rate = shape / mean
    return shape * math.log(shape / mean) - math.lgamma(shape) + (shape - 1.0) * mean_log - shape


_BACKTRACK_STEPS = 10


def _guarded_shape(matched: float, old: float, mean: float, mean_log: float) -> float:
    """Moment-matched shape, or the closest step towards it from ``old``
    that does not lower the profiled objective."""
    base = _gamma_profile(old, mean, mean_log)
    if _gamma_profile(matched, mean, mean_log) >= base:
        return matched
    step = 0.5
    for _ in range(_BACKTRACK_STEPS):
        shape = old + step * (matched - old)
        if _gamma_profile(shape, mean, mean_log) >= base:
            return shape
        step *= 0.5
    return old


def m_step(
    data,
    resp: Responsibilities,
    config: Configuration,
    weight_floor: float = 1e-10,
    previous: MixtureModel | None = None,
) -> MixtureModel:
    """Re-estimate weights and component parameters from responsibilities.

    Weights become ``N_k / T`` with ``N_k`` the column sums of ``resp``;
    variances and means are normalised by ``N_k``.  With ``previous`` given,
    Gamma shape updates are guarded so the expected complete-data
    log-likelihood never decreases (see module docstring).
    """
    x = _as_data(data)
    if resp.values.shape != (x.size, config.n_components):
        raise ValueError(
            f"responsibilities have shape {resp.values.shape}, "
            f"expected {(x.size, config.n_components)}"
        )
    prev = _Params.from_model(previous) if previous is not None else None
    ws = _Workspace(x, config)
    return ws.m_step(np.ascontiguousarray(resp.values.T), weight_floor, prev).to_model(config)


def _bands(values: np.ndarray, m: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Split sorted ``values`` into ``m`` contiguous quantile bands with
    seed-dependent jitter on the interior cut points."""
    if m == 1:
        return [values]
    cuts = np.arange(1, m) / m + rng.uniform(-0.25, 0.25, size=m - 1) / m
    idx = np.round(np.sort(cuts) * values.size).astype(int)
    idx = np.clip(idx, 1, values.size - 1)
    bounds = [0, *idx.tolist(), values.size]
    out = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        out.append(values[lo:max(hi, lo + 1)])
    return out


def _band_moments(band: np.ndarray, fallback_var: float) -> tuple[float, float]:
    mean = float(band.mean())
    var = float(band.var()) if band.size > 1 else 0.0
    if not var > 1e-6 * fallback_var:
        var = fallback_var / 4.0
    return mean, var


def initialize(data, config: Configuration, seed: int = 0) -> MixtureModel:
    """Deterministic, seed-dependent starting model.

    Weights are uniform.  Each sign domain's observations are cut into one
    quantile band per component of that role and every component is moment
    matched to its band.  Near-zero Gaussians are fitted to the observations
    within one standard deviation of zero (all observations when the model
    has no Gamma components).
    """
    x = _as_data(data)
    rng = np.random.default_rng(seed)
    _check_feasible(x, config)
    K = config.n_components
    comps: list[Component] = []

    for role, count in ((DomainRole.NEGATIVE, config.negative), (DomainRole.POSITIVE, config.positive)):
        if not count:
            continue
        y = np.sort(x[x < 0] * -1.0 if role is DomainRole.NEGATIVE else x[x > 0])
        slice_var = float(y.var())
        bands = _bands(y, count, rng)
        params = [moments_to_gamma(Moments(*_band_moments(b, slice_var))) for b in bands]
        comps.extend(Component(role, p) for p in params)

    if config.nearzero:
        has_gamma = config.negative + config.positive > 0
        if has_gamma:
            sd = float(x.std())
            central = x[np.abs(x) <= sd]
            if central.size < 2:
                central = x
        else:
            central = x
        r = np.sort(np.abs(central))
        bands = _bands(r, config.nearzero, rng)
        fallback = float(np.mean(central**2)) or 1.0
        for b in bands:
            var = float(np.mean(b**2))
            if not var > 1e-6 * fallback:
                var = fallback
            comps.append(Component.nearzero(var))

    if config.free:
        xs = np.sort(x)
        fallback = float(x.var()) or 1.0
        for b in _bands(xs, config.free, rng):
            comps.append(Component.free_gaussian(*_band_moments(b, fallback)))

    order = {DomainRole.NEGATIVE: 0, DomainRole.NEARZERO: 1, DomainRole.POSITIVE: 2, DomainRole.FREE_GAUSSIAN: 3}
    comps.sort(key=lambda c: order[c.role])
    return MixtureModel((1.0 / K,) * K, tuple(comps))


def _check_feasible(x: np.ndarray, config: Configuration) -> None:
    n_pos = int(np.count_nonzero(x > 0))
    n_neg = int(np.count_nonzero(x < 0))
    if config.positive and n_pos < 2 * config.positive:
        raise InfeasibleConfiguration(
            f"{config.positive} positive components need at least {2 * config.positive} "
            f"positive observations, have {n_pos}"
        )
    if config.negative and n_neg < 2 * config.negative:
        raise InfeasibleConfiguration(
            f"{config.negative} negative components need at least {2 * config.negative} "
            f"negative observations, have {n_neg}"
        )
    if config.nearzero or config.free:
        return
    if np.any(x == 0):
        raise InfeasibleConfiguration("zero-valued observations need a Gaussian component")
    if n_pos and not config.positive:
        raise InfeasibleConfiguration("positive observations but no positive or Gaussian component")
    if n_neg and not config.negative:
        raise InfeasibleConfiguration("negative observations but no negative or Gaussian component")


def converged(ll_old: float, ll_new: float, rel_tol: float) -> bool:
    return abs(ll_new - ll_old) / (abs(ll_old) + 1.0) < rel_tol


def fit(data, config: Configuration, opts: FitOptions | None = None) -> FitReport:
    """Fit a mixture of the given configuration by EM from a single start.

    Iterates until the relative log-likelihood change drops below
    ``opts.rel_tol`` or ``opts.max_iterations`` M-steps have run.  The
    trace holds the log-likelihood of the initial model followed by that of
    every iterate; the returned model is the last iterate.
    """
    opts = opts or FitOptions()
    x = _as_data(data)
    model = initialize(x, config, opts.seed)
    ws = _Workspace(x, config)
    params = _Params.from_model(model)
    iteration = 0
    try:
        g, ll = ws.e_step(params)
        trace = [ll]
        done = False
        for iteration in range(1, opts.max_iterations + 1):
            previous = params if opts.monotone_guard else None
            params = ws.m_step(g, opts.weight_floor, previous)
            g, ll_new = ws.e_step(params)
            trace.append(ll_new)
            done = converged(ll, ll_new, opts.rel_tol)
            ll = ll_new
            if done:
                break
        model = params.to_model(config)
    except GaussGammaError as exc:
        exc.iteration = iteration
        raise
    if not done:
        logger.info("fit %s seed %d stopped after %d iterations without converging",
                    config, opts.seed, iteration)
    return FitReport(
        model=model,
        log_likelihood=ll,
        ll_trace=trace,
        iterations=iteration,
        converged=done,
        seed=opts.seed,
        configuration=config,
    )
