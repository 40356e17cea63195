"""Laguerre-Gaussian modes, SLM phase masks and OAM measurement bases.

Modes are restricted to radial order p = 0 at the waist plane. Mode vectors
live in the basis ``modes = [m_min, ..., m_max]``, index ``m - m_min``.
"""

import re
from dataclasses import dataclass
from math import factorial, pi, sqrt

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * pi

#: Qutrit labels used throughout: |L>, |G>, |R> carry OAM -1, 0, +1.
QUTRIT_MODES = (-1, 0, 1)
L, G, R = 0, 1, 2


def lg_amplitude(m, r, phi, w0=1.0):
    """Normalized p = 0 Laguerre-Gaussian amplitude at the waist plane.

    ``|LG_m|**2`` integrates to one over the transverse plane. ``r`` and
    ``phi`` broadcast.
    """
    if w0 <= 0:
        raise DomainError("beam waist must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radial coordinate must be non-negative")
    am = abs(int(m))
    norm = sqrt(2.0 / (pi * factorial(am))) / w0
    x = r * sqrt(2.0) / w0
    return norm * x**am * np.exp(-(r**2) / w0**2) * np.exp(1j * m * np.asarray(phi, dtype=float))


@dataclass(frozen=True)
class FieldGrid:
    """Square sampling grid; ``extent`` is the half-width in units of the waist."""

    size: int = 512
    extent: float = 3.0
    w0: float = 1.0

    def __post_init__(self):
        if self.size < 2:
            raise DomainError("grid size must be at least 2")
        if self.extent <= 0:
            raise DomainError("grid extent must be positive")
        if self.w0 <= 0:
            raise DomainError("beam waist must be positive")

    def coordinates(self):
        """Pixel-centre polar coordinates ``(r, phi)`` as ``size x size`` arrays."""
        half = self.extent * self.w0
        step = 2.0 * half / self.size
        axis = -half + step * (np.arange(self.size) + 0.5)
        x, y = np.meshgrid(axis, axis)
        return np.hypot(x, y), np.arctan2(y, x)

    @property
    def pixel_area(self):
        return (2.0 * self.extent * self.w0 / self.size) ** 2

    def field(self, m):
        r, phi = self.coordinates()
        return lg_amplitude(m, r, phi, self.w0)


def superposition_field(m1, m2, theta, grid):
    return grid.field(m1) + np.exp(1j * theta) * grid.field(m2)


def phase_of(field):
    """Wrapped phase in ``[0, 2pi)`` plus a mask of pixels where the field is exactly zero.

    Flagged pixels get phase 0.
    """
    field = np.asarray(field)
    flagged = field == 0
    phase = np.mod(np.angle(field), TWO_PI)
    # np.mod can round tiny negative angles up to exactly 2pi
    phase[phase >= TWO_PI] = 0.0
    phase[flagged] = 0.0
    return phase, flagged


def superposition_phase_mask(m1, m2, theta, grid=None):
    """Phase of ``LG_m1 + exp(i theta) LG_m2`` on ``grid``.

    Returns ``(phase, flagged)`` where ``flagged`` marks pixels with no field.
    """
    grid = FieldGrid() if grid is None else grid
    return phase_of(superposition_field(m1, m2, theta, grid))


def superposition_intensity(m1, m2, theta, grid=None):
    """Intensity of the same superposition, normalized to a maximum of 1."""
    grid = FieldGrid() if grid is None else grid
    inten = np.abs(superposition_field(m1, m2, theta, grid)) ** 2
    peak = inten.max()
    return inten / peak if peak > 0 else inten


def equal_amplitude_radius(m1, m2, w0=1.0):
    """Radius where ``|LG_m1| == |LG_m2|`` for ``|m1| != |m2|``."""
    a1, a2 = abs(m1), abs(m2)
    if a1 == a2:
        raise DomainError("modes with equal |m| have equal amplitude everywhere")
    # (x^a1 / sqrt(a1!)) == (x^a2 / sqrt(a2!)), x = r sqrt(2) / w0
    x = (sqrt(factorial(a1)) / sqrt(factorial(a2))) ** (1.0 / (a1 - a2))
    return x * w0 / sqrt(2.0)


def write_pgm(path, values, vmax):
    """Write an 8-bit binary PGM (P5); ``values`` in ``[0, vmax)`` map linearly to 0..255."""
    values = np.asarray(values, dtype=float)
    h, w = values.shape
    levels = np.clip(np.floor(values / vmax * 256.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())


_PGM_HEADER = re.compile(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s")


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    match = _PGM_HEADER.match(data)
    if match is None:
        raise DomainError("not a binary PGM file")
    w, h, maxval = (int(v) for v in match.groups())
    if maxval != 255:
        raise DomainError("only 8-bit PGM supported")
    pixels = data[match.end():match.end() + w * h]
    if len(pixels) != w * h:
        raise DomainError("truncated PGM file")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(h, w)


def write_phase_pgm(path, phase):
    write_pgm(path, phase, TWO_PI)


def write_intensity_pgm(path, intensity):
    intensity = np.asarray(intensity, dtype=float)
    peak = float(intensity.max())
    # brightest pixel lands on 255 via the clip
    write_pgm(path, intensity / peak if peak > 0 else intensity, 1.0)


@dataclass(frozen=True)
class SubspaceBasis:
    """Two orthonormal states of the 2-D subspace spanned by ``|m>, |n>``.

    ``states[k]`` holds the coefficients on ``(|m>, |n>)``; ``states[0]`` is
    the "+" outcome.
    """

    pair: tuple
    label: str
    states: np.ndarray

    def embedded(self, modes):
        """The two states as vectors over the full mode list ``modes``."""
        modes = list(modes)
        m, n = self.pair
        out = np.zeros((2, len(modes)), dtype=complex)
        out[:, modes.index(m)] = self.states[:, 0]
        out[:, modes.index(n)] = self.states[:, 1]
        return out


_MUB = {
    "z": np.array([[1, 0], [0, 1]], dtype=complex),
    "x": np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2.0),
    "y": np.array([[1, 1j], [1, -1j]], dtype=complex) / sqrt(2.0),
}

MUB_LABELS = ("x", "y", "z")


def mub_basis(pair, label):
    m, n = (int(v) for v in pair)
    if m == n:
        raise DomainError("a subspace needs two distinct modes")
    if label not in _MUB:
        raise DomainError(f"basis label must be one of x, y, z; got {label!r}")
    return SubspaceBasis((m, n), label, _MUB[label].copy())


def qutrit_tomo_states():
    """The nine projection states on ``(|L>, |G>, |R>)`` in fixed setting order."""
    s = 1.0 / sqrt(2.0)
    return [
        np.array([1, 0, 0], dtype=complex),
        np.array([0, 1, 0], dtype=complex),
        np.array([0, 0, 1], dtype=complex),
        np.array([s, s, 0], dtype=complex),  # (G + L)
        np.array([0, s, s], dtype=complex),  # (G + R)
        np.array([1j * s, s, 0], dtype=complex),  # (G + iL)
        np.array([0, s, -1j * s], dtype=complex),  # (G - iR)
        np.array([s, 0, s], dtype=complex),  # (L + R)
        np.array([s, 0, 1j * s], dtype=complex),  # (L + iR)
    ]


def mode_vector(m, modes):
    modes = list(modes)
    v = np.zeros(len(modes), dtype=complex)
    v[modes.index(m)] = 1.0
    return v
