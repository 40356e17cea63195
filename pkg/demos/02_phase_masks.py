"""Phase masks for two-mode OAM superpositions, written as PGM images."""

from pathlib import Path

import numpy as np

from oamsim import FieldGrid, equal_amplitude_radius, lg_amplitude, superposition_phase_mask
from oamsim.oam_optics import superposition_intensity, write_intensity_pgm, write_phase_pgm

out = Path("demo_output")
out.mkdir(exist_ok=True)
grid = FieldGrid(size=256, extent=3.0)

for m1, m2, theta in [(1, -1, 0.0), (2, 0, np.pi / 2), (5, -1, 0.0)]:
    phase, flagged = superposition_phase_mask(m1, m2, theta, grid)
    stem = out / f"mask_{m1}_{m2}"
    write_phase_pgm(f"{stem}_phase.pgm", phase)
    write_intensity_pgm(f"{stem}_intensity.pgm", superposition_intensity(m1, m2, theta, grid))
    print(f"m1 = {m1:+d}, m2 = {m2:+d}: {flagged.sum()} null pixels -> {stem}_*.pgm")

# where both amplitudes match, the superposition vanishes |m1 - m2| times around the ring
m1, m2 = 5, -1
r = equal_amplitude_radius(m1, m2)
phi = np.linspace(0, 2 * np.pi, 2000, endpoint=False) + 1e-3
field = lg_amplitude(m1, r, phi) + lg_amplitude(m2, r, phi)
dips = np.sum(np.abs(np.angle(field[1:] / field[:-1])) > np.pi / 2)
print(f"equal-amplitude radius {r:.4f}; pi phase jumps around it: {dips}")
