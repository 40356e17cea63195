"""The source spectrum narrows when one photon is stored in a mode-selective memory."""

from pathlib import Path

import numpy as np

from oamsim import ExperimentConfig, fit_lorentzian, simulate_coincidence_matrix
from oamsim.source_model import storage_survival

cfg = ExperimentConfig.from_json(Path(__file__).with_name("experiment.json").read_text())
modes = cfg.modes.astype(float)

for stored in (False, True):
    table = simulate_coincidence_matrix(cfg, stored=stored, exact=True)
    diag = np.diag(table.matrix(cfg.modes)).astype(float)
    fit = fit_lorentzian(modes, diag, weights="poisson")
    tag = "after storage " if stored else "before storage"
    print(f"{tag}: total {diag.sum():8.1f} counts, fitted width {fit.params.w:.3f}")

# the same with Poisson noise over the configured acquisition
sampled = simulate_coincidence_matrix(cfg, stored=True)
diag = np.diag(sampled.matrix(cfg.modes)).astype(float)
print("sampled diagonal after storage:", diag.astype(int))
print("fitted width (sampled):", round(fit_lorentzian(modes, diag, weights="poisson").params.w, 3))

# averaged over the source spectrum, only a fraction of pairs survive
print("pair survival:", round(storage_survival(cfg.source_spectrum(), cfg.storage_profile()), 4))
print("peak efficiency:", round(cfg.storage_profile().efficiency(0), 4))
