"""Entangled-source model: Lorentzian spiral spectrum, mode-dependent storage, noise.

The source emits ``sum_m c_m |m>|m>`` over a finite mode range. Coincidence
counts are proportional to ``c_m**2``, so amplitudes are square roots of the
fitted Lorentzian.
"""

import json
from dataclasses import asdict, dataclass, field
from math import pi
from typing import Optional

import numpy as np

from .errors import ConfigError, DegenerateSpectrumError, DomainError, NoSurvivingAmplitudeError
from .quantum_state import check_density_matrix, check_pure_state


@dataclass(frozen=True)
class LorentzianParams:
    """Parameters of ``y = y0 + (2A/pi) w / (4 (x - xc)**2 + w**2)``.

    Note that ``y(xc +- w/2) - y0`` is half the peak height, so ``w`` is the
    full distance between the half-maximum points.
    """

    y0: float
    xc: float
    w: float
    A: float

    def __post_init__(self):
        if not self.w > 0:
            raise DomainError(f"Lorentzian width must be positive, got {self.w}")
        if self.A < 0:
            raise DomainError(f"Lorentzian area must be non-negative, got {self.A}")

    def as_tuple(self):
        return (self.y0, self.xc, self.w, self.A)


def lorentzian_eval(x, p):
    x = np.asarray(x, dtype=float)
    return p.y0 + (2.0 * p.A / pi) * p.w / (4.0 * (x - p.xc) ** 2 + p.w**2)


@dataclass(frozen=True)
class SpiralSpectrum:
    """Amplitudes ``c_m`` over the contiguous modes ``m_min..m_max``.

    ``phases`` are optional per-mode relative phases (radians); the
    coefficients themselves stay real and non-negative.
    """

    m_min: int
    coefficients: np.ndarray
    phases: Optional[np.ndarray] = None

    @property
    def modes(self):
        return np.arange(self.m_min, self.m_min + len(self.coefficients))

    @property
    def m_max(self):
        return self.m_min + len(self.coefficients) - 1

    @property
    def amplitudes(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if self.phases is not None:
            c = c * np.exp(1j * np.asarray(self.phases, dtype=float))
        return c

    def probabilities(self):
        return np.asarray(self.coefficients, dtype=float) ** 2

    def coefficient(self, m):
        return float(self.coefficients[m - self.m_min])


def _mode_range(mode_range):
    m_min, m_max = (int(v) for v in mode_range)
    if m_max < m_min:
        raise DomainError(f"empty mode range [{m_min}, {m_max}]")
    return m_min, m_max


def spectrum_from_weights(m_min, weights, phases=None):
    """Normalize non-negative per-mode weights (count-like, ``~ c_m**2``) into a spectrum."""
    weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
    total = weights.sum()
    if not total > 0:
        raise DegenerateSpectrumError("spectrum has no positive weight")
    return SpiralSpectrum(int(m_min), np.sqrt(weights / total), phases)


def build_spiral_spectrum(p, mode_range, phases=None):
    m_min, m_max = _mode_range(mode_range)
    modes = np.arange(m_min, m_max + 1)
    return spectrum_from_weights(m_min, lorentzian_eval(modes, p), phases)


def uniform_spectrum(mode_range):
    m_min, m_max = _mode_range(mode_range)
    return spectrum_from_weights(m_min, np.ones(m_max - m_min + 1))


def joint_state(spectrum):
    """Two-arm pure state ``sum_m c_m |m>|m>`` over the spectrum's mode range."""
    c = spectrum.amplitudes
    d = len(c)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = c
    return check_pure_state(psi)


@dataclass(frozen=True)
class StorageProfile:
    m_min: int
    efficiencies: np.ndarray

    def __post_init__(self):
        eta = np.asarray(self.efficiencies, dtype=float)
        if np.any(eta < 0) or np.any(eta > 1):
            raise DomainError("storage efficiencies must lie in [0, 1]")

    @property
    def modes(self):
        return np.arange(self.m_min, self.m_min + len(self.efficiencies))

    def efficiency(self, m):
        return float(self.efficiencies[m - self.m_min])


def storage_profile_from_lorentzian(p, mode_range):
    """Per-mode efficiencies from the fit function, clipped into ``[0, 1]``."""
    m_min, m_max = _mode_range(mode_range)
    eta = np.clip(lorentzian_eval(np.arange(m_min, m_max + 1), p), 0.0, 1.0)
    return StorageProfile(m_min, eta)


def _spectrum_of(state, m_min):
    if isinstance(state, SpiralSpectrum):
        return state
    psi = check_pure_state(state)
    d = int(round(np.sqrt(psi.size)))
    if d * d != psi.size:
        raise DomainError("joint state length is not a perfect square")
    diag = psi[np.arange(d) * (d + 1)]
    if not np.allclose(np.delete(psi, np.arange(d) * (d + 1)), 0.0, atol=1e-12):
        raise DomainError("state is not of the form sum_m c_m |m>|m>")
    return SpiralSpectrum(m_min, np.abs(diag), np.angle(diag))


def apply_storage(state, profile):
    """Post-selected spectrum after storing one arm: ``o_m ~ c_m sqrt(eta_m)``.

    ``state`` is either a :class:`SpiralSpectrum` or a joint-state vector on
    the profile's mode range.
    """
    spec = _spectrum_of(state, profile.m_min)
    if spec.m_min != profile.m_min or len(spec.coefficients) != len(profile.efficiencies):
        raise DomainError("spectrum and storage profile cover different modes")
    eta = np.asarray(profile.efficiencies, dtype=float)
    c = np.asarray(spec.coefficients, dtype=float)
    surviving = float(np.sum(c**2 * eta))
    if not surviving > 0:
        raise NoSurvivingAmplitudeError("no amplitude survives storage")
    return SpiralSpectrum(spec.m_min, c * np.sqrt(eta) / np.sqrt(surviving), spec.phases)


def storage_survival(spectrum, profile):
    """Overall pair survival probability ``sum_m c_m**2 eta_m``."""
    return float(np.sum(spectrum.probabilities() * np.asarray(profile.efficiencies, dtype=float)))


@dataclass(frozen=True)
class NoiseParams:
    epsilon: float = 0.0
    floor_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise DomainError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.floor_rate < 0:
            raise DomainError(f"floor_rate must be non-negative, got {self.floor_rate}")


def apply_noise(rho, noise):
    """White-noise mixture ``(1 - eps) rho + eps I / dim``."""
    eps = noise.epsilon if isinstance(noise, NoiseParams) else float(noise)
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {eps}")
    rho = check_density_matrix(rho)
    d = rho.shape[0]
    return (1.0 - eps) * rho + eps * np.eye(d) / d


# --- experiment configuration -------------------------------------------------

_LORENTZ_KEYS = ("y0", "xc", "w", "A")


def _lorentzian_from_dict(name, doc):
    if not isinstance(doc, dict):
        raise ConfigError(name, "expected an object with keys y0, xc, w, A")
    missing = [k for k in _LORENTZ_KEYS if k not in doc]
    if missing:
        raise ConfigError(f"{name}.{missing[0]}", "missing")
    for k in _LORENTZ_KEYS:
        if not isinstance(doc[k], (int, float)) or isinstance(doc[k], bool):
            raise ConfigError(f"{name}.{k}", "must be a number")
    try:
        return LorentzianParams(*(float(doc[k]) for k in _LORENTZ_KEYS))
    except DomainError as exc:
        raise ConfigError(name, str(exc)) from None


@dataclass(frozen=True)
class ExperimentConfig:
    mode_min: int = -7
    mode_max: int = 7
    source_lorentzian: LorentzianParams = field(default_factory=lambda: LorentzianParams(0.0, 0.0, 7.7, 2030.0))
    storage_lorentzian: Optional[LorentzianParams] = field(
        default_factory=lambda: LorentzianParams(0.132, 0.0, 2.274, 0.354)
    )
    epsilon: float = 0.0
    floor_rate: float = 0.0
    pair_rate: float = 50.0
    acquisition_seconds: float = 100.0
    seed: Optional[int] = None
    phases: Optional[tuple] = None
    stored_pair_rate: Optional[float] = None

    @property
    def mode_range(self):
        return (self.mode_min, self.mode_max)

    @property
    def modes(self):
        return np.arange(self.mode_min, self.mode_max + 1)

    @property
    def noise(self):
        return NoiseParams(self.epsilon, self.floor_rate)

    def source_spectrum(self):
        phases = None if self.phases is None else np.asarray(self.phases, dtype=float)
        return build_spiral_spectrum(self.source_lorentzian, self.mode_range, phases)

    def storage_profile(self):
        if self.storage_lorentzian is None:
            return StorageProfile(self.mode_min, np.ones(len(self.modes)))
        return storage_profile_from_lorentzian(self.storage_lorentzian, self.mode_range)

    def spectrum(self, stored=False):
        spec = self.source_spectrum()
        return apply_storage(spec, self.storage_profile()) if stored else spec

    def effective_pair_rate(self, stored=False):
        """Pair rate; after storage defaults to the input rate times the survival probability."""
        if not stored:
            return self.pair_rate
        if self.stored_pair_rate is not None:
            return self.stored_pair_rate
        return self.pair_rate * storage_survival(self.source_spectrum(), self.storage_profile())

    def to_dict(self):
        doc = asdict(self)
        for key in ("source_lorentzian", "storage_lorentzian"):
            if doc[key] is not None:
                doc[key] = dict(doc[key])
        if doc["phases"] is not None:
            doc["phases"] = list(doc["phases"])
        return doc

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        kw = {}
        for key in ("mode_min", "mode_max", "seed"):
            if key in doc:
                if not isinstance(doc[key], int) or isinstance(doc[key], bool):
                    raise ConfigError(key, "must be an integer")
                kw[key] = doc[key]
        for key in ("epsilon", "floor_rate", "pair_rate", "acquisition_seconds", "stored_pair_rate"):
            if key in doc and doc[key] is not None:
                if not isinstance(doc[key], (int, float)) or isinstance(doc[key], bool):
                    raise ConfigError(key, "must be a number")
                kw[key] = float(doc[key])
        if "source_lorentzian" in doc:
            kw["source_lorentzian"] = _lorentzian_from_dict("source_lorentzian", doc["source_lorentzian"])
        if "storage_lorentzian" in doc:
            s = doc["storage_lorentzian"]
            kw["storage_lorentzian"] = None if s is None else _lorentzian_from_dict("storage_lorentzian", s)
        if doc.get("phases") is not None:
            kw["phases"] = tuple(float(v) for v in doc["phases"])
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from None
        return cls.from_dict(doc)

    def validate(self):
        if self.mode_max < self.mode_min:
            raise ConfigError("mode_max", "must be >= mode_min")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", "must lie in [0, 1]")
        for key in ("floor_rate", "pair_rate", "acquisition_seconds"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be non-negative")
        if self.stored_pair_rate is not None and self.stored_pair_rate < 0:
            raise ConfigError("stored_pair_rate", "must be non-negative")
        if self.phases is not None and len(self.phases) != len(self.modes):
            raise ConfigError("phases", f"expected {len(self.modes)} values, one per mode")
        if np.all(lorentzian_eval(self.modes, self.source_lorentzian) <= 0):
            raise ConfigError("source_lorentzian", "spectrum is zero on every mode")
        return self
