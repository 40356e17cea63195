"""Lorentzian least-squares fits and half-maximum widths."""

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateFitError, DomainError, NoPeakError, UnderdeterminedError
from .source_model import LorentzianParams, SpiralSpectrum, lorentzian_eval

N_PARAMS = 4


@dataclass
class FitResult:
    params: LorentzianParams
    residual_rms: float
    covariance: np.ndarray
    converged: bool
    iterations: int

    def to_json(self):
        return {
            "params": dict(zip(("y0", "xc", "w", "A"), self.params.as_tuple())),
            "residual_rms": self.residual_rms,
            "covariance": self.covariance.tolist(),
            "converged": self.converged,
            "iterations": self.iterations,
        }


def _model(theta, x):
    y0, xc, w, a = theta
    return y0 + (2.0 * a / np.pi) * w / (4.0 * (x - xc) ** 2 + w**2)


def _jacobian(theta, x):
    y0, xc, w, a = theta
    den = 4.0 * (x - xc) ** 2 + w**2
    k = 2.0 / np.pi
    return np.column_stack(
        [
            np.ones_like(x),
            k * a * w * 8.0 * (x - xc) / den**2,
            k * a * (den - 2.0 * w**2) / den**2,
            k * w / den,
        ]
    )


def poisson_weights(ys):
    """Default weights for count data: ``1 / max(y, 1)``."""
    return 1.0 / np.maximum(np.asarray(ys, dtype=float), 1.0)


def initial_guess(xs, ys):
    """Baseline from the minimum, centre at the maximum, width from the sampled half-maximum."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    y0 = float(ys.min())
    i = int(np.argmax(ys))
    height = float(ys[i]) - y0
    try:
        w = hwhm_width(xs, ys, baseline=y0)
    except NoPeakError:
        w = float(np.ptp(xs)) / 2.0 or 1.0
    w = max(w, 1e-6)
    return LorentzianParams(y0, float(xs[i]), w, max(height, 0.0) * np.pi * w / 2.0)


def fit_lorentzian(xs, ys, weights=None, init=None, max_iter=500, ftol=1e-12):
    """Weighted least-squares fit of the Lorentzian fit function.

    Minimizes ``sum weights * (y - model)**2`` by Levenberg-Marquardt.
    ``weights`` may be an array, ``None`` (unweighted) or ``"poisson"``.
    The returned width is made positive (the model is even in ``w``).

    Raises
    ------
    UnderdeterminedError
        Fewer data points than parameters.
    DegenerateFitError
        The Jacobian is rank-deficient at the optimum; the partial
        :class:`FitResult` is attached as ``exc.partial``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DomainError("xs and ys must be 1-D arrays of equal length")
    if xs.size <= N_PARAMS:
        raise UnderdeterminedError(f"need more than {N_PARAMS} points, got {xs.size}")
    if isinstance(weights, str):
        if weights != "poisson":
            raise DomainError(f"unknown weighting {weights!r}")
        weights = poisson_weights(ys)
    wts = np.ones_like(ys) if weights is None else np.asarray(weights, dtype=float)
    if np.any(wts < 0):
        raise DomainError("weights must be non-negative")
    sw = np.sqrt(wts)
    if init is None:
        init = initial_guess(xs, ys)
        if weights is not None:
            # strongly non-uniform weights can pull LM off a crude start;
            # seed from the unweighted optimum instead
            try:
                init = fit_lorentzian(xs, ys, None, init, max_iter, ftol).params
            except DegenerateFitError as exc:
                init = exc.partial.params
    if not init.w > 0:
        raise DomainError("initial width must be positive")

    sol = least_squares(
        lambda t: sw * (_model(t, xs) - ys),
        np.array(init.as_tuple(), dtype=float),
        jac=lambda t: sw[:, None] * _jacobian(t, xs),
        method="lm",
        ftol=ftol,
        xtol=1e-15,
        gtol=1e-15,
        max_nfev=max_iter * (N_PARAMS + 1),
    )
    theta = sol.x.copy()
    theta[2] = abs(theta[2])
    resid = _model(theta, xs) - ys
    rms = float(np.sqrt(np.mean(resid**2)))

    jac = sw[:, None] * _jacobian(theta, xs)
    sv = np.linalg.svd(jac, compute_uv=False)
    dof = max(xs.size - N_PARAMS, 1)
    chi2 = float(np.sum(wts * resid**2))
    degenerate = not (theta[2] > 0) or sv[-1] <= sv[0] * 1e-10
    if degenerate:
        cov = np.full((N_PARAMS, N_PARAMS), np.nan)
    else:
        cov = np.linalg.inv(jac.T @ jac) * (chi2 / dof)
    params = LorentzianParams(theta[0], theta[1], theta[2] if theta[2] > 0 else 1e-300, max(theta[3], 0.0))
    result = FitResult(params, rms, cov, bool(sol.success), int(sol.nfev))
    if degenerate:
        raise DegenerateFitError("Jacobian is rank-deficient at the optimum; no identifiable peak", result)
    return result


def hwhm_width(xs, ys=None, baseline=0.0):
    """Width of a peak between its half-maximum crossings, by linear interpolation.

    For the Lorentzian fit function this returns its ``w`` parameter (the
    crossings sit at ``xc +- w/2``). ``xs`` may instead be a
    :class:`SpiralSpectrum`, in which case the curve is ``c_m**2`` over its
    modes.
    """
    if isinstance(xs, SpiralSpectrum):
        xs, ys = xs.modes.astype(float), xs.probabilities()
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float) - baseline
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    i = int(np.argmax(ys))
    peak = ys[i]
    if not peak > 0:
        raise NoPeakError("curve has no maximum above its baseline")
    half = peak / 2.0
    if np.count_nonzero(ys >= half) < 2:
        raise NoPeakError("need at least two samples above half maximum")
    if i == 0 or i == len(ys) - 1:
        raise NoPeakError("maximum sits at the edge of the sampled range")

    left = i
    while left > 0 and ys[left - 1] > half:
        left -= 1
    right = i
    while right < len(ys) - 1 and ys[right + 1] > half:
        right += 1
    if left == 0 or right == len(ys) - 1:
        raise NoPeakError("curve does not fall to half maximum on both sides")

    def cross(a, b):
        return xs[a] + (half - ys[a]) * (xs[b] - xs[a]) / (ys[b] - ys[a])

    return float(cross(right, right + 1) - cross(left - 1, left))


def read_fit_csv(text):
    """Parse ``x,y[,weight]`` rows; returns ``(xs, ys, weights or None)``."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise DomainError("empty fit input")
    header = [h.strip() for h in rows[0]]
    if header not in (["x", "y"], ["x", "y", "weight"]):
        raise DomainError("expected header x,y or x,y,weight")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError:
        raise DomainError("non-numeric fit input") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise DomainError("ragged fit input")
    weights = data[:, 2] if len(header) == 3 else None
    return data[:, 0], data[:, 1], weights


def sampled_lorentzian(p, xs):
    return lorentzian_eval(np.asarray(xs, dtype=float), p)
