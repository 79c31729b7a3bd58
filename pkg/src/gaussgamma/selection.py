"""Model-order selection by BIC over grids of configurations."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .em import FitOptions, FitReport, fit
from .errors import EmptySweep, GaussGammaError
from .mixture import Configuration

logger = logging.getLogger(__name__)


def param_count(config: Configuration) -> int:
    """Free parameters: shape and rate per Gamma, variance per near-zero
    Gaussian, mean and variance per free Gaussian, and K - 1 weights."""
    return (
        2 * (config.negative + config.positive)
        + config.nearzero
        + 2 * config.free
        + config.n_components
        - 1
    )


def bic(log_likelihood: float, n_params: int, n_obs: int) -> float:
    if n_obs < 1:
        raise ValueError("n_obs must be >= 1")
    return -2.0 * log_likelihood + n_params * math.log(n_obs)


@dataclass
class PenalizedScore:
    config: Configuration
    log_likelihood: Optional[float]
    param_count: int
    n_obs: int
    bic: Optional[float]
    failed: bool = False
    best_seed: Optional[int] = None
    error: Optional[str] = None
    report: Optional[FitReport] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        c = self.config
        return {
            "config": str(c),
            "negative": c.negative,
            "nearzero": c.nearzero,
            "positive": c.positive,
            "loglik": self.log_likelihood,
            "params": self.param_count,
            "bic": self.bic,
            "failed": self.failed,
            "best_seed": self.best_seed,
        }


def _tie_key(score: PenalizedScore):
    c = score.config
    return (c.n_components, c.negative, c.nearzero, c.positive)


def rank(scores: Sequence[PenalizedScore]) -> list[PenalizedScore]:
    """Successful scores by ascending BIC (ties: fewer components, then
    lexicographic counts), followed by failures in grid order."""
    ok = sorted((s for s in scores if not s.failed), key=lambda s: (s.bic, _tie_key(s)))
    return ok + [s for s in scores if s.failed]


def select(scores: Sequence[PenalizedScore]) -> PenalizedScore:
    ok = [s for s in scores if not s.failed]
    if not ok:
        raise EmptySweep("every configuration failed")
    return min(ok, key=lambda s: (s.bic, _tie_key(s)))


@dataclass(frozen=True)
class SweepSpec:
    negative_range: tuple[int, int] = (1, 3)
    nearzero_range: tuple[int, int] = (1, 3)
    positive_range: tuple[int, int] = (1, 3)
    n_starts: int = 5
    fit_options: FitOptions = FitOptions()

    def __post_init__(self):
        for name in ("negative_range", "nearzero_range", "positive_range"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValueError(f"{name} must be an inclusive range lo..hi with 0 <= lo <= hi")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.nearzero_range[1] + self.negative_range[1] + self.positive_range[1] < 1:
            raise ValueError("the grid contains no configuration with a component")

    def configurations(self) -> list[Configuration]:
        grids = [range(lo, hi + 1) for lo, hi in
                 (self.negative_range, self.nearzero_range, self.positive_range)]
        return [Configuration(*c) for c in itertools.product(*grids) if sum(c) > 0]


def fit_best_of(data, config: Configuration, n_starts: int, opts: FitOptions) -> PenalizedScore:
    """Fit ``config`` from seeds ``opts.seed + 0 .. n_starts - 1`` and score
    the start with the highest log-likelihood."""
    x = np.asarray(data, dtype=float)
    best: Optional[FitReport] = None
    last_error = None
    for i in range(n_starts):
        try:
            report = fit(x, config, replace(opts, seed=opts.seed + i))
        except GaussGammaError as exc:
            last_error = exc
            logger.debug("config %s start %d failed: %s", config, i, exc)
            continue
        if best is None or report.log_likelihood > best.log_likelihood:
            best = report
    p = param_count(config)
    if best is None:
        return PenalizedScore(config, None, p, x.size, None, failed=True, error=str(last_error))
    return PenalizedScore(
        config,
        best.log_likelihood,
        p,
        x.size,
        bic(best.log_likelihood, p, x.size),
        best_seed=best.seed,
        report=best,
    )


def sweep(data, spec: SweepSpec = SweepSpec()) -> list[PenalizedScore]:
    """Score every configuration of the grid and return them ranked.

    Raises EmptySweep if no configuration could be fitted.
    """
    x = np.asarray(data, dtype=float)
    scores = []
    for config in spec.configurations():
        score = fit_best_of(x, config, spec.n_starts, spec.fit_options)
        logger.info("%s: bic=%s", config, score.bic)
        scores.append(score)
    if all(s.failed for s in scores):
        raise EmptySweep("every configuration failed")
    return rank(scores)


def report_document(scores: Sequence[PenalizedScore]) -> list[dict]:
    return [s.to_dict() for s in scores]
