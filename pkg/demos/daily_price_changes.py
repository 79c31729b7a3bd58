"""
Fitting daily price changes
===========================

The package ships 1514 synthetic daily average prices of a bond-like
instrument (see make_synthetic_prices.py).  Their first differences are the
returns; most days barely move, and the large moves are skewed away from zero
on both sides.  This is the situation a constrained mixture is built for.

    python demos/daily_price_changes.py
"""

import numpy as np

from gaussgamma import (
    FitOptions,
    SweepSpec,
    bundled_prices_path,
    load_series,
    prices_to_returns,
    select,
    sweep,
)

prices = load_series(bundled_prices_path(), "price", has_header=True)
returns = prices_to_returns(prices, source="bundled").values
print(f"{prices.size} prices -> {returns.size} daily changes")
print(f"share of exact zeros: {np.mean(returns == 0):.2%}")
print(f"sample sd {returns.std():.4f}, kurtosis {np.mean((returns - returns.mean())**4) / returns.var()**2:.1f}")

# %% Small sweep over one or two components per domain.
scores = sweep(returns, SweepSpec((1, 2), (1, 2), (1, 2), n_starts=3, fit_options=FitOptions(seed=1)))
for s in scores:
    print(f"  {str(s.config):6s} bic={s.bic:10.2f}")
best = select(scores)
model = best.report.model
print(f"\nselected {best.config} after {best.report.iterations} EM iterations")
for w, c in zip(model.weights, model.components):
    print(f"  {w:.3f}  {c.role.value:9s} {c.params}")

# %% Tail probabilities.  The Gamma tails put far more weight on large moves
# than a single Gaussian with the same variance would.
from scipy.stats import norm  # noqa: E402

sd = returns.std()
for k in (2, 3, 4):
    model_tail = model.cdf(-k * sd) + 1 - model.cdf(k * sd)
    gauss_tail = 2 * norm.sf(k)
    empirical = np.mean(np.abs(returns) > k * sd)
    print(f"P(|x| > {k} sd): data {empirical:.4f}  mixture {model_tail:.4f}  gaussian {gauss_tail:.4f}")
