"""Qutrit-qutrit state tomography from the 9 x 9 product projection settings,
and Poisson Monte Carlo error propagation."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .errors import DomainError, MonteCarloError, RankDeficiencyError
from .measurement_sim import CoincidenceTable
from .oam_optics import qutrit_tomo_states
from .quantum_state import check_density_matrix, density_to_json, matrix_sqrt_psd

N_STATES = 9
DIM = 9  # two qutrits


def _projectors():
    states = qutrit_tomo_states()
    single = [np.outer(s, s.conj()) for s in states]
    return np.array([np.kron(pa, pb) for pa in single for pb in single])


#: ``PROJECTORS[9 * j + k] = P_j (x) P_k``.
PROJECTORS = _projectors()


def ideal_state():
    """``(|LL> + |GG> + |RR>) / sqrt(3)`` as a density matrix."""
    psi = np.zeros(DIM, dtype=complex)
    psi[[0, 4, 8]] = 1.0 / np.sqrt(3.0)
    return np.outer(psi, psi.conj())


@dataclass
class TomoDataset:
    """Counts indexed by (setting on A, setting on B), settings 1..9 stored at 0..8."""

    counts: np.ndarray
    seconds: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if self.counts.shape != (N_STATES, N_STATES):
            raise DomainError(f"tomography data must be 9 x 9, got {self.counts.shape}")
        if np.any(self.counts < 0):
            raise DomainError("counts must be non-negative")

    def transposed(self):
        return TomoDataset(self.counts.T.copy(), self.seconds, dict(self.metadata))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "k", "counts"])
        integral = np.issubdtype(self.counts.dtype, np.integer)
        for j in range(N_STATES):
            for k in range(N_STATES):
                c = self.counts[j, k]
                w.writerow([j + 1, k + 1, int(c) if integral else repr(float(c))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if not rows or [h.strip() for h in rows[0]] != ["j", "k", "counts"]:
            raise DomainError("expected header j,k,counts")
        counts = np.full((N_STATES, N_STATES), np.nan)
        integral = True
        for n, row in enumerate(rows[1:], start=2):
            if len(row) != 3:
                raise DomainError(f"line {n}: expected 3 fields")
            try:
                j, k, c = int(row[0]), int(row[1]), float(row[2])
            except ValueError:
                raise DomainError(f"line {n}: malformed entry") from None
            if not (1 <= j <= N_STATES and 1 <= k <= N_STATES):
                raise DomainError(f"line {n}: setting index out of range 1..9")
            if not np.isnan(counts[j - 1, k - 1]):
                raise DomainError(f"line {n}: duplicate setting ({j}, {k})")
            integral = integral and row[2].strip().isdigit()
            counts[j - 1, k - 1] = c
        if np.isnan(counts).any():
            j, k = np.argwhere(np.isnan(counts))[0] + 1
            raise DomainError(f"missing setting ({j}, {k})")
        return cls(counts.astype(np.int64) if integral else counts)


def _counts(data):
    return np.asarray(data.counts if isinstance(data, TomoDataset) else data, dtype=float)


def forward_probabilities(rho):
    """``p[j, k] = Tr[rho (P_j (x) P_k)]`` as a 9 x 9 array."""
    rho = np.asarray(rho, dtype=complex)
    p = np.einsum("kij,ji->k", PROJECTORS, rho).real
    return np.clip(p, 0.0, None).reshape(N_STATES, N_STATES)


def simulate_tomo_counts(rho, total_counts, seed=None, exact=False):
    """Tomography data with ``total_counts`` expected coincidences over all 81 settings."""
    p = forward_probabilities(rho)
    means = total_counts * p / p.sum()
    if exact:
        return TomoDataset(means)
    gen = rng_mod.stream(0 if seed is None else seed, "tomography")
    return TomoDataset(gen.poisson(means).astype(np.int64))


def _hermitian_basis(d):
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j], e[j, i] = -1j, 1j
            basis.append(e)
    return np.array(basis)


_HBASIS = _hermitian_basis(DIM)
_DESIGN = np.einsum("kij,aji->ka", PROJECTORS, _HBASIS).real


def linear_inversion(data):
    """Least-squares Hermitian estimate with trace fixed to one (may be unphysical).

    The unknown global rate is absorbed by fitting the unnormalized operator
    ``rate * rho`` to the raw counts and dividing out its trace.
    """
    counts = _counts(data).ravel()
    if not counts.sum() > 0:
        raise DomainError("tomography data has no counts")
    rank = np.linalg.matrix_rank(_DESIGN)
    if rank < _DESIGN.shape[1]:
        raise RankDeficiencyError(f"design matrix has rank {rank} < {_DESIGN.shape[1]}")
    x, *_ = np.linalg.lstsq(_DESIGN, counts, rcond=None)
    h = np.einsum("a,aij->ij", x, _HBASIS)
    h = 0.5 * (h + h.conj().T)
    return h / np.trace(h).real


@dataclass
class ReconstructionResult:
    rho: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    likelihood_trace: list = field(default_factory=list, repr=False)

    def to_json(self, **extra):
        return density_to_json(
            self.rho,
            log_likelihood=self.log_likelihood,
            iterations=self.iterations,
            converged=self.converged,
            **extra,
        )


# The tomography projectors do not sum to the identity. Working with
# sigma = G^(1/2) rho G^(1/2) / Tr turns them into a complete POVM
# G^(-1/2) P G^(-1/2), on which the multinomial likelihood of the
# normalized frequencies equals the rate-profiled Poisson likelihood.
_G = PROJECTORS.sum(axis=0)
_G_HALF = matrix_sqrt_psd(_G)
_G_INV_HALF = np.linalg.inv(_G_HALF)
_POVM = np.einsum("ij,kjl,lm->kim", _G_INV_HALF, PROJECTORS, _G_INV_HALF)
# p_k = Tr(Pi_k sigma) = sum_ij Pi_k[j, i] sigma[i, j]
_POVM_T_FLAT = _POVM.transpose(0, 2, 1).reshape(len(_POVM), -1)
_POVM_FLAT = _POVM.reshape(len(_POVM), -1)


def mle_reconstruct(data, max_iter=10_000, tol=1e-10, init=None):
    """Maximum-likelihood density matrix via the diluted ``R rho R`` iteration.

    Each step first tries the full ``R sigma R`` update; if the likelihood
    would drop, the step is diluted to ``(I + eps R) sigma (I + eps R)`` with
    ``eps`` halved until it does not. Convergence is declared when the
    largest eigenvalue of ``R`` is within ``tol`` of one (its value at the
    maximum) or changes by less than ``tol`` between iterations; the latter
    covers rank-deficient optima, which the iteration approaches slowly.

    ``init`` is an optional full-rank starting state (default ``I / 9``);
    the multiplicative update never leaves the support of its start.
    """
    counts = _counts(data).ravel()
    total = counts.sum()
    if not total > 0:
        raise DomainError("tomography data has no counts")
    # only observed outcomes enter the likelihood and the update operator
    seen = counts > 0
    freq = counts[seen] / total
    povm_t = _POVM_T_FLAT[seen]
    povm = _POVM_FLAT[seen]
    eye = np.eye(DIM)

    def probs(sig):
        return (povm_t @ sig.ravel()).real

    def loglik(q):
        return float(freq @ np.log(q))

    if init is None:
        sigma = eye / DIM
    else:
        sigma = _G_HALF @ check_density_matrix(init) @ _G_HALF
        sigma /= np.trace(sigma).real
    p = probs(sigma)
    ll = loglik(p)
    trace = [ll]
    converged = False
    lam_prev = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        r = ((freq / p) @ povm).reshape(DIM, DIM)
        r = 0.5 * (r + r.conj().T)
        lam = np.linalg.eigvalsh(r)[-1]
        if lam - 1.0 < tol or abs(lam - lam_prev) < tol:
            converged = True
            it -= 1
            break
        lam_prev = lam
        step = None
        eps = np.inf
        while True:
            op = r if np.isinf(eps) else eye + eps * r
            cand = op @ sigma @ op
            cand = 0.5 * (cand + cand.conj().T)
            cand /= cand.trace().real
            p_new = probs(cand)
            ll_new = loglik(p_new)
            if ll_new >= ll or eps < 1e-12:
                step = (cand, p_new, ll_new)
                break
            eps = 1.0 if np.isinf(eps) else eps * 0.5
        sigma, p, ll_new = step
        if ll_new < ll:
            # no ascent possible at machine precision
            converged = True
            break
        ll = ll_new
        trace.append(ll)

    rho = _G_INV_HALF @ sigma @ _G_INV_HALF
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    # log-likelihood reported in the Poisson form: sum n log(p_k / sum p)
    rho = check_density_matrix(rho)
    return ReconstructionResult(rho, float(total * ll), it, converged, trace)


# --- Monte Carlo -------------------------------------------------------------


def _raw_counts(data):
    if isinstance(data, (TomoDataset, CoincidenceTable)):
        return np.asarray(data.counts, dtype=float)
    return np.asarray(data, dtype=float)


def _rebuild(data, counts):
    if isinstance(data, TomoDataset):
        return TomoDataset(counts, data.seconds, dict(data.metadata))
    if isinstance(data, CoincidenceTable):
        return data.with_counts(counts)
    return counts


def monte_carlo(data, analysis, replicates=1000, seed=0, max_drop_fraction=0.1):
    """Mean and standard deviation of ``analysis`` over Poisson-resampled data.

    Every replicate redraws each count as ``Poisson(observed)`` from the
    replicate's own stream and reruns ``analysis`` on a dataset of the same
    kind. Replicates whose analysis raises are dropped; dropping more than
    ``max_drop_fraction`` of them is an error.
    """
    if replicates < 2:
        raise DomainError("need at least two Monte Carlo replicates")
    base = _raw_counts(data)
    outputs = []
    dropped = 0
    for i in range(replicates):
        gen = rng_mod.stream(seed, "monte_carlo", i)
        draw = gen.poisson(base).astype(np.int64)
        try:
            outputs.append(np.atleast_1d(np.asarray(analysis(_rebuild(data, draw)), dtype=float)))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError):
            dropped += 1
    if dropped > max_drop_fraction * replicates:
        raise MonteCarloError(f"{dropped} of {replicates} replicates failed")
    out = np.array(outputs)
    mean = out.mean(axis=0)
    std = out.std(axis=0, ddof=1)
    if mean.size == 1:
        return float(mean[0]), float(std[0])
    return mean, std
