"""How well a Lorentzian fit recovers its parameters from 15 noisy points."""

import numpy as np

from oamsim import LorentzianParams, fit_lorentzian
from oamsim.source_model import lorentzian_eval

xs = np.arange(-7.0, 8.0)
gen = np.random.default_rng(6)

for p in (LorentzianParams(0.0, 0.0, 7.7, 2030.0), LorentzianParams(0.132, 0.0, 2.274, 0.354)):
    ys = lorentzian_eval(xs, p)
    widths, areas = [], []
    for _ in range(500):
        yn = ys * (1 + 0.01 * gen.standard_normal(xs.size))
        fit = fit_lorentzian(xs, yn, weights=1 / yn**2)
        widths.append(fit.params.w / p.w - 1)
        areas.append(fit.params.A / p.A - 1)
    print(f"w = {p.w}, A = {p.A}: relative spread of w {np.std(widths):.2%}, of A {np.std(areas):.2%}")

# a small peak on a large baseline leaves w and A poorly determined;
# their errors are strongly correlated
print("correlation of w and A errors (last curve):", round(np.corrcoef(widths, areas)[0, 1], 3))
