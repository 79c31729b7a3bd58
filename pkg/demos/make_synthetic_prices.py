"""Regenerate the bundled synthetic daily price file.

The series is 1514 daily average prices of a bond-like instrument whose
day-over-day changes follow a 1/1/1 constrained mixture: small moves around
zero plus one Gamma tail per side.  Prices are rounded to four decimals, the
way a vendor file would quote them.

    python demos/make_synthetic_prices.py
"""

from pathlib import Path

import numpy as np

from gaussgamma import Component, MixtureModel

N_PRICES = 1514
START_PRICE = 118.25
SEED = 20100104

returns_model = MixtureModel(
    weights=(0.3, 0.4, 0.3),
    components=(
        Component.negative(2.5, 6.0),
        Component.nearzero(0.02),
        Component.positive(2.5, 6.0),
    ),
)

rng = np.random.default_rng(SEED)
steps = returns_model.sample(rng, N_PRICES - 1)
prices = np.round(START_PRICE + np.concatenate([[0.0], np.cumsum(steps)]), 4)

out = Path(__file__).resolve().parents[1] / "src" / "gaussgamma" / "data" / "synthetic_prices.csv"
with open(out, "w", encoding="utf-8") as fh:
    fh.write("day,price\n")
    for day, p in enumerate(prices):
        fh.write(f"{day},{p:.4f}\n")
print(f"wrote {len(prices)} prices to {out}")
