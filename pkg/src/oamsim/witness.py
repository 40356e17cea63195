"""Entanglement and dimensionality witnesses built from subspace visibilities.

Two conventions exist for reading a violated dimensionality bound:

``claims``
    violating ``W_d`` certifies ``d``-dimensional entanglement (matches the
    published numerical conclusions);
``prose``
    violating ``W_d`` certifies at least ``d + 1`` dimensions.

Both are always reported. All violations use strict inequalities.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rng as rng_mod
from .errors import DomainError, IncompleteDataError
from .measurement_sim import Visibilities, _vis_array, all_pairs, pair_counts
from .oam_optics import MUB_LABELS

CONVENTIONS = ("claims", "prose")

_WORDS = {
    1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven", 8: "eight",
    9: "nine", 10: "ten", 11: "eleven", 12: "twelve", 13: "thirteen", 14: "fourteen", 15: "fifteen",
}


def bound_M(d):
    """Separable ceiling ``(d - 1)**2`` of the summed x/y visibilities."""
    d = int(d)
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    return (d - 1) ** 2


def bound_W(D, d):
    """Dimensionality bound ``3 D (D - 1) / 2 - D (D - d)`` for ``D`` measured modes."""
    D, d = int(D), int(d)
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if d > D:
        raise DomainError(f"dimension {d} exceeds number of modes {D}")
    # D (D - 1) is always even
    return 3 * D * (D - 1) // 2 - D * (D - d)


def _check_complete(vis, modes):
    if modes is None:
        modes = sorted({m for pair in vis for m in pair})
    missing = [p for p in all_pairs(modes) if vis.get(p) is None and vis.get(p[::-1]) is None]
    if missing:
        raise IncompleteDataError(missing)
    return [vis.get(p) or vis.get(p[::-1]) for p in all_pairs(modes)]


def compute_M(vis, modes=None):
    """``(M, sigma_M)`` with ``M = sum_pairs (V_x + V_y)``.

    ``vis`` maps pairs to :class:`~oamsim.measurement_sim.Visibilities`.
    Pairs use disjoint counts, so the per-pair Monte Carlo deviations add in
    quadrature.
    """
    rows = _check_complete(vis, modes)
    m = sum(v.vx + v.vy for v in rows)
    s = np.sqrt(sum(v.sx**2 + v.sy**2 for v in rows))
    return float(m), float(s)


def compute_W(vis, modes=None):
    """``(W, sigma_W)`` with ``W = sum_pairs (V_x + V_y + V_z)``."""
    rows = _check_complete(vis, modes)
    w = sum(v.vx + v.vy + v.vz for v in rows)
    s = np.sqrt(sum(v.sx**2 + v.sy**2 + v.sz**2 for v in rows))
    return float(w), float(s)


def schmidt_threshold_check(fidelity, threshold=Fraction(2, 3)):
    """``(passed, margin)``: fidelity to the ideal qutrit state must strictly exceed 2/3."""
    if not 0.0 <= fidelity <= 1.0:
        raise DomainError(f"fidelity must lie in [0, 1], got {fidelity}")
    return fidelity > threshold, float(fidelity - float(threshold))


def certify_dimension(W, sigma_W, D, k_sigma=3.0, convention="claims"):
    """Certified entanglement dimension from a measured ``W``.

    Under ``claims`` this is the largest ``d`` with
    ``W - bound_W(D, d) > k_sigma * sigma_W``; ``prose`` adds one. With no
    violated bound the result is 1 under either convention. Since
    ``bound_W(D, D)`` equals the largest possible ``W``, ``d = D`` is never
    certified and a larger ``W`` is rejected.
    """
    if D < 2:
        raise DomainError("need at least two modes")
    if k_sigma < 0:
        raise DomainError("k_sigma must be non-negative")
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    # small slack for rounding in visibilities computed from exact expectations
    if W > bound_W(D, D) * (1 + 1e-12):
        raise DomainError(f"W = {W} exceeds its maximum {bound_W(D, D)} for {D} modes")
    best = None
    for d in range(2, D + 1):
        if W - bound_W(D, d) > k_sigma * sigma_W:
            best = d
    if best is None:
        return 1
    return best if convention == "claims" else best + 1


def certify_dimension_M(M, sigma_M, D, k_sigma=3.0):
    """Largest ``d <= D`` with ``M - (d - 1)**2 > k_sigma * sigma_M``, else 1."""
    best = 1
    for d in range(2, D + 1):
        if M - bound_M(d) > k_sigma * sigma_M:
            best = d
    return best


def _pair_count_array(table, modes):
    pairs = all_pairs(modes)
    missing = []
    out = np.zeros((len(pairs), 3, 4))
    for i, pair in enumerate(pairs):
        pc = pair_counts(table, pair)
        if pc is None:
            missing.append(pair)
            continue
        out[i] = [pc[b] for b in MUB_LABELS]
    if missing:
        raise IncompleteDataError(missing)
    return pairs, out


@dataclass
class WitnessReport:
    modes: list
    pair_visibilities: dict
    M: float
    sigma_M: float
    W: float
    sigma_W: float
    k_sigma: float
    convention: str
    bounds_W: dict
    bounds_M: dict
    violations: dict
    certified_dimension: int
    certified_dimension_prose: int
    certified_dimension_claims: int
    certified_dimension_M: int
    undefined_bases: list = field(default_factory=list)

    @property
    def D(self):
        return len(self.modes)

    def to_json(self):
        return {
            "mode_set": list(self.modes),
            "D": self.D,
            "pair_visibilities": [
                {
                    "pair": list(p),
                    "V_x": v.vx, "V_y": v.vy, "V_z": v.vz,
                    "sigma_x": v.sx, "sigma_y": v.sy, "sigma_z": v.sz,
                }
                for p, v in self.pair_visibilities.items()
            ],
            "M": self.M,
            "sigma_M": self.sigma_M,
            "W": self.W,
            "sigma_W": self.sigma_W,
            "k_sigma": self.k_sigma,
            "bounds": {
                "W": {str(d): b for d, b in self.bounds_W.items()},
                "M": {str(d): b for d, b in self.bounds_M.items()},
            },
            "violations": {
                str(d): {"excess": e, "excess_over_sigma": z if np.isfinite(z) else None} for d, (e, z) in self.violations.items()
            },
            "certified_dimension": self.certified_dimension,
            "convention": {
                "selected": self.convention,
                "claims": self.certified_dimension_claims,
                "prose": self.certified_dimension_prose,
            },
            "certified_dimension_M": self.certified_dimension_M,
            "undefined_bases": [{"pair": list(p), "basis": b} for p, b in self.undefined_bases],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def summary(self, reference=None):
        """Plain-text report. ``reference`` optionally maps names to published values for comparison."""
        lines = [
            f"modes: {', '.join(str(m) for m in self.modes)} (D = {self.D})",
            f"M = {self.M:.3f} +- {self.sigma_M:.3f}",
        ]
        if self.D >= 2:
            bm = bound_M(self.D)
            verdict = "violates" if self.M - bm > self.k_sigma * self.sigma_M else "does not violate"
            lines.append(f"M {verdict} M_d = {bm} for d = {self.D}")
        dm = self.certified_dimension_M
        if dm > 1:
            lines.append(f"entanglement witness: at least {_WORDS.get(dm, str(dm))}-dimensional")
        lines.append(f"W = {self.W:.3f} +- {self.sigma_W:.3f}")
        for d, (excess, z) in self.violations.items():
            line = f"W violates W_d = {self.bounds_W[d]} (d = {d}) by {excess:.3f}"
            if np.isfinite(z):
                line += f", {z:.1f} standard deviations"
            lines.append(line)
        lines.append(
            f"certified dimension: {self.certified_dimension_claims} (claims), "
            f"{self.certified_dimension_prose} (prose); threshold {self.k_sigma:g} sigma; "
            f"selected convention: {self.convention}"
        )
        if self.undefined_bases:
            lines.append(f"{len(self.undefined_bases)} bases had no counts and were scored as zero visibility")
        if reference:
            for key, val in reference.items():
                lines.append(f"reference {key}: {val}")
        return "\n".join(lines) + "\n"


def witness_report(table, modes, k_sigma=3.0, convention="claims", replicates=1000, seed=0):
    """Witness analysis of a MUB coincidence table over ``modes``.

    ``sigma_M`` and ``sigma_W`` come from Poisson resampling of every count
    and recomputing the full sums. Bases without any counts are scored as
    zero visibility (this can only lower M and W) and listed in
    ``undefined_bases``.
    """
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    modes = [int(m) for m in modes]
    D = len(modes)
    if D < 2:
        raise DomainError("need at least two modes")
    pairs, counts = _pair_count_array(table, modes)
    v = _vis_array(counts)
    undefined = [(pairs[i], MUB_LABELS[j]) for i, j in zip(*np.nonzero(np.isnan(v)))]
    v = np.nan_to_num(v)

    if replicates and replicates >= 2:
        draws = np.empty((replicates,) + v.shape)
        for r in range(replicates):
            gen = rng_mod.stream(seed, "witness", r)
            draws[r] = np.nan_to_num(_vis_array(gen.poisson(counts).astype(float)))
        s = draws.std(axis=0, ddof=1)
        m_draws = draws[:, :, :2].sum(axis=(1, 2))
        w_draws = draws.sum(axis=(1, 2))
        sigma_M = float(m_draws.std(ddof=1))
        sigma_W = float(w_draws.std(ddof=1))
    else:
        s = np.zeros_like(v)
        sigma_M = sigma_W = 0.0

    vis = {
        p: Visibilities(p, float(v[i, 0]), float(v[i, 1]), float(v[i, 2]),
                        float(s[i, 0]), float(s[i, 1]), float(s[i, 2]))
        for i, p in enumerate(pairs)
    }
    M = float(v[:, :2].sum())
    W = float(v.sum())
    bounds_W = {d: bound_W(D, d) for d in range(2, D + 1)}
    bounds_M = {d: bound_M(d) for d in range(2, D + 1)}
    violations = {}
    for d, b in bounds_W.items():
        excess = W - b
        if excess > k_sigma * sigma_W:
            violations[d] = (excess, excess / sigma_W if sigma_W > 0 else float("inf"))
    claims = certify_dimension(W, sigma_W, D, k_sigma, "claims")
    prose = certify_dimension(W, sigma_W, D, k_sigma, "prose")
    return WitnessReport(
        modes=modes,
        pair_visibilities=vis,
        M=M,
        sigma_M=sigma_M,
        W=W,
        sigma_W=sigma_W,
        k_sigma=k_sigma,
        convention=convention,
        bounds_W=bounds_W,
        bounds_M=bounds_M,
        violations=violations,
        certified_dimension=claims if convention == "claims" else prose,
        certified_dimension_prose=prose,
        certified_dimension_claims=claims,
        certified_dimension_M=certify_dimension_M(M, sigma_M, D, k_sigma),
        undefined_bases=undefined,
    )


def report_from_values(W, sigma_W, D, k_sigma=3.0):
    """Excess table for a published ``(W, sigma_W)``: ``{d: (excess, excess / sigma)}`` for violated bounds."""
    out = {}
    for d in range(2, D + 1):
        excess = W - bound_W(D, d)
        if excess > k_sigma * sigma_W:
            out[d] = (excess, excess / sigma_W if sigma_W > 0 else float("inf"))
    return out
