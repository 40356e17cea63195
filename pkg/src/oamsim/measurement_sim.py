"""Projective coincidence measurements: Born probabilities, Poisson sampling,
mode-correlation tables and two-mode subspace visibilities."""

import csv
import io
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import rng as rng_mod
from .errors import DomainError, UndefinedVisibilityError
from .oam_optics import MUB_LABELS, mode_vector, mub_basis
from .quantum_state import check_pure_state, density_from_pure
from .source_model import apply_noise, joint_state

OUTCOMES = ("+", "-")


@dataclass(frozen=True)
class Setting:
    """Product projector ``|a><a| (x) |b><b|``."""

    a: np.ndarray
    b: np.ndarray
    label_a: str
    label_b: str

    def __post_init__(self):
        check_pure_state(self.a)
        check_pure_state(self.b)

    @property
    def label(self):
        return f"{self.label_a}|{self.label_b}"

    @property
    def vector(self):
        return np.kron(np.asarray(self.a, dtype=complex), np.asarray(self.b, dtype=complex))


def _as_density(state):
    state = np.asarray(state, dtype=complex)
    return density_from_pure(state) if state.ndim == 1 else state


def born_probabilities(state, settings):
    """Vectorized ``Tr[rho (|a><a| (x) |b><b|)]`` for a list of settings.

    ``state`` is a density matrix or a pure-state vector.
    """
    state = np.asarray(state, dtype=complex)
    vecs = np.array([s.vector for s in settings])
    dim = state.shape[0]
    if vecs.shape[1] != dim:
        raise DomainError(f"settings act on dimension {vecs.shape[1]}, state has {dim}")
    if state.ndim == 1:
        p = np.abs(vecs.conj() @ state) ** 2
    else:
        p = np.einsum("ki,ij,kj->k", vecs.conj(), state, vecs).real
    return np.clip(p, 0.0, None)


def born_probability(state, setting):
    return float(born_probabilities(state, [setting])[0])


def sample_counts(mean, rng):
    """One Poisson variate with the given mean."""
    if mean < 0:
        raise DomainError(f"Poisson mean must be non-negative, got {mean}")
    return int(rng.poisson(mean))


@dataclass
class CoincidenceTable:
    """Counts per (arm-A setting, arm-B setting). Counts may be float when they are exact expectations."""

    labels_a: list
    labels_b: list
    counts: np.ndarray
    seconds: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        self.seconds = np.broadcast_to(np.asarray(self.seconds, dtype=float), self.counts.shape).copy()
        if not (len(self.labels_a) == len(self.labels_b) == len(self.counts)):
            raise DomainError("one count per setting required")
        if np.any(self.counts < 0):
            raise DomainError("counts must be non-negative")

    def __len__(self):
        return len(self.counts)

    def index(self):
        return {(a, b): i for i, (a, b) in enumerate(zip(self.labels_a, self.labels_b))}

    def with_counts(self, counts):
        return CoincidenceTable(list(self.labels_a), list(self.labels_b), counts, self.seconds)

    def matrix(self, modes):
        """Mode-correlation table ``C[m_a, m_b]`` for settings labelled ``m=<int>``."""
        modes = list(modes)
        out = np.zeros((len(modes), len(modes)), dtype=self.counts.dtype)
        idx = self.index()
        for i, ma in enumerate(modes):
            for j, mb in enumerate(modes):
                out[i, j] = self.counts[idx[(mode_label(ma), mode_label(mb))]]
        return out

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting_a", "setting_b", "counts", "seconds"])
        integral = np.issubdtype(self.counts.dtype, np.integer)
        for a, b, c, s in zip(self.labels_a, self.labels_b, self.counts, self.seconds):
            w.writerow([a, b, int(c) if integral else repr(float(c)), repr(float(s))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["setting_a", "setting_b", "counts", "seconds"]:
            raise DomainError("expected header setting_a,setting_b,counts,seconds")
        la, lb, counts, secs = [], [], [], []
        integral = True
        for n, row in enumerate(rows[1:], start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DomainError(f"line {n}: expected 4 fields")
            la.append(row[0])
            lb.append(row[1])
            try:
                c = float(row[2])
                secs.append(float(row[3]))
            except ValueError:
                raise DomainError(f"line {n}: non-numeric counts or seconds") from None
            integral = integral and row[2].strip().lstrip("-").isdigit()
            counts.append(c)
        counts = np.array(counts, dtype=np.int64 if integral else float)
        return cls(la, lb, counts, np.array(secs))


def mode_label(m):
    return f"m={int(m)}"


def mub_label(pair, basis, outcome):
    return f"pair={pair[0]},{pair[1]};basis={basis};out={outcome}"


def correlation_settings(modes):
    """All ``(|m_a>, |m_b>)`` settings over ``modes``, row-major in ``m_a``."""
    modes = list(modes)
    vecs = {m: mode_vector(m, modes) for m in modes}
    return [Setting(vecs[ma], vecs[mb], mode_label(ma), mode_label(mb)) for ma in modes for mb in modes]


def mub_settings(pair, modes):
    """The 12 subspace settings for ``pair``: bases x, y, z times outcomes (+, -) on each arm."""
    out = []
    for label in MUB_LABELS:
        vecs = mub_basis(pair, label).embedded(modes)
        for i, oa in enumerate(OUTCOMES):
            for j, ob in enumerate(OUTCOMES):
                out.append(Setting(vecs[i], vecs[j], mub_label(pair, label, oa), mub_label(pair, label, ob)))
    return out


def all_pairs(modes):
    """Unordered pairs in the order the modes are given."""
    return list(combinations([int(m) for m in modes], 2))


def _sample_settings(means, settings, seed, tag):
    counts = np.empty(len(means), dtype=np.int64)
    for i, (mean, s) in enumerate(zip(means, settings)):
        counts[i] = sample_counts(mean, rng_mod.stream(seed, tag, s.label_a, s.label_b))
    return counts


def measure(state, settings, pair_rate, seconds, floor_rate=0.0, seed=None, exact=False, tag="measure"):
    """Coincidence table for ``settings`` on ``state``.

    Expected counts are ``pair_rate * seconds * p + floor_rate * seconds``.
    With ``exact=True`` the expectations are returned unsampled; otherwise
    each setting is Poisson-sampled from its own stream ``(seed, tag, labels)``.
    """
    means = (pair_rate * born_probabilities(state, settings) + floor_rate) * seconds
    if exact:
        counts = means
    else:
        counts = _sample_settings(means, settings, 0 if seed is None else seed, tag)
    return CoincidenceTable([s.label_a for s in settings], [s.label_b for s in settings], counts, seconds)


def model_state(config, stored=False):
    """Density matrix of the two-arm state described by ``config``."""
    psi = joint_state(config.spectrum(stored))
    rho = density_from_pure(psi)
    return apply_noise(rho, config.epsilon) if config.epsilon > 0 else rho


def simulate_coincidence_matrix(config, stored=False, seed=None, exact=False):
    """Mode-correlation table over every ``(m, m')`` in the config's mode range."""
    seed = config.seed if seed is None else seed
    return measure(
        model_state(config, stored),
        correlation_settings(config.modes),
        config.effective_pair_rate(stored),
        config.acquisition_seconds,
        config.floor_rate,
        seed=seed,
        exact=exact,
        tag=("correlation", bool(stored)),
    )


def simulate_mub_counts(state, modes, measured_modes=None, pair_rate=1.0, seconds=1.0, floor_rate=0.0,
                        seed=0, exact=False, tag="mub"):
    """Subspace x/y/z counts for every pair of ``measured_modes`` (default: all modes)."""
    measured = list(modes) if measured_modes is None else list(measured_modes)
    settings = [s for pair in all_pairs(measured) for s in mub_settings(pair, modes)]
    return measure(state, settings, pair_rate, seconds, floor_rate, seed=seed, exact=exact, tag=tag)


def simulate_witness_data(config, measured_modes=None, stored=False, seed=None, exact=False):
    seed = config.seed if seed is None else seed
    return simulate_mub_counts(
        model_state(config, stored),
        config.modes,
        measured_modes,
        config.effective_pair_rate(stored),
        config.acquisition_seconds,
        config.floor_rate,
        seed=seed,
        exact=exact,
        tag=("witness", bool(stored)),
    )


# --- visibilities --------------------------------------------------------------


@dataclass(frozen=True)
class Visibilities:
    pair: tuple
    vx: float
    vy: float
    vz: float
    sx: float = 0.0
    sy: float = 0.0
    sz: float = 0.0

    @property
    def M(self):
        return self.vx + self.vy

    @property
    def N(self):
        return self.vx + self.vy + self.vz


def visibility(cpp, cpm, cmp, cmm, basis="?", pair=None):
    """``|C++ + C-- - C+- - C-+| / total`` for one basis."""
    total = cpp + cpm + cmp + cmm
    if not total > 0:
        raise UndefinedVisibilityError(basis, pair)
    return abs(cpp + cmm - cpm - cmp) / total


def _vis_array(c):
    """Vectorized visibility over the last axis ``(++, +-, -+, --)``; NaN where total is 0."""
    total = c.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(c[..., 0] + c[..., 3] - c[..., 1] - c[..., 2]) / total


def pair_counts(table, pair):
    """``{basis: (C++, C+-, C-+, C--)}`` for ``pair`` pulled from a MUB-labelled table."""
    idx = table.index()
    out = {}
    for basis in MUB_LABELS:
        row = []
        for oa in OUTCOMES:
            for ob in OUTCOMES:
                key = (mub_label(pair, basis, oa), mub_label(pair, basis, ob))
                if key not in idx:
                    return None
                row.append(table.counts[idx[key]])
        out[basis] = tuple(row)
    return out


def visibilities_from_counts(counts, pair=None, replicates=1000, seed=0, on_empty="raise"):
    """Visibilities for one pair from ``{basis: (C++, C+-, C-+, C--)}``.

    Standard deviations come from Poisson resampling of the counts.
    ``on_empty="zero"`` scores a basis without counts as visibility 0 and
    std 0 instead of raising.
    """
    c = np.array([counts[b] for b in MUB_LABELS], dtype=float)
    v = _vis_array(c)
    for b, val in zip(MUB_LABELS, v):
        if np.isnan(val) and on_empty == "raise":
            raise UndefinedVisibilityError(b, pair)
    v = np.nan_to_num(v)
    if replicates and replicates >= 2:
        gen = rng_mod.stream(seed, "visibility", str(pair))
        draws = gen.poisson(np.broadcast_to(c, (replicates,) + c.shape)).astype(float)
        s = np.nan_to_num(_vis_array(draws)).std(axis=0, ddof=1)
    else:
        s = np.zeros(3)
    return Visibilities(pair, float(v[0]), float(v[1]), float(v[2]), float(s[0]), float(s[1]), float(s[2]))


def visibilities_from_table(table, modes, replicates=1000, seed=0, on_empty="raise"):
    """Visibilities for every pair of ``modes``; pairs absent from the table map to ``None``."""
    out = {}
    for pair in all_pairs(modes):
        pc = pair_counts(table, pair)
        out[pair] = None if pc is None else visibilities_from_counts(pc, pair, replicates, seed, on_empty)
    return out
