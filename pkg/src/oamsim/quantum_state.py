"""Small dense quantum states.

States are plain numpy arrays: a pure state is a complex 1-D vector, a
density matrix a complex square matrix. The ``check_*`` helpers enforce the
invariants where it matters (construction, deserialization).
"""

import json

import numpy as np

from .errors import DomainError, NormalizationError

NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
EIG_TOL = 1e-8


def check_pure_state(psi, tol=NORM_TOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.size == 0:
        raise DomainError(f"pure state must be a non-empty vector, got shape {psi.shape}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise NormalizationError(f"state has squared norm {norm2!r}, expected 1")
    return psi


def check_density_matrix(rho):
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise DomainError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise NormalizationError(f"density matrix has trace {tr!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -EIG_TOL:
        raise DomainError("density matrix has a negative eigenvalue")
    return rho


def normalize(psi):
    psi = np.asarray(psi, dtype=complex)
    return psi / np.linalg.norm(psi)


def density_from_pure(psi):
    """Return ``|psi><psi|``. Raises :class:`NormalizationError` for unnormalized input."""
    psi = check_pure_state(psi)
    return np.outer(psi, psi.conj())


def _check_hermitian(h):
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(h).max(initial=0.0)):
        raise DomainError("matrix is not Hermitian")
    return h


def matrix_sqrt_psd(h):
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-8, 0)`` are treated as numerical noise and clamped
    to zero; anything more negative is rejected.
    """
    h = _check_hermitian(h)
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    if vals.min() < -EIG_TOL:
        raise DomainError(f"matrix is not positive semidefinite (min eigenvalue {vals.min():.3g})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def uhlmann_fidelity(rho, sigma):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    Evaluated as the squared nuclear norm of ``sqrt(rho) @ sqrt(sigma)``,
    which avoids the nested square root of a near-singular product.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DomainError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    s = np.linalg.svd(matrix_sqrt_psd(rho) @ matrix_sqrt_psd(sigma), compute_uv=False)
    return float(min(max(s.sum() ** 2, 0.0), 1.0))


def project_to_physical(h):
    """Closest unit-trace PSD matrix in Frobenius norm.

    The eigenvalues are first shifted uniformly to unit trace, then the most
    negative one is repeatedly set to zero and its deficit spread evenly over
    the eigenvalues that are still nonzero. Eigenvectors are kept.
    """
    h = _check_hermitian(h)
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    n = vals.size
    order = np.argsort(vals)[::-1]
    lam = vals[order] + (1.0 - vals.sum()) / n

    active = n
    deficit = 0.0
    for i in range(n - 1, -1, -1):
        if lam[i] + deficit / active < 0.0:
            deficit += lam[i]
            lam[i] = 0.0
            active -= 1
        else:
            break
    lam[:active] += deficit / active

    v = vecs[:, order]
    return (v * lam) @ v.conj().T


def kron_product(*mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m))
    return out


def swap_operator(d_a, d_b):
    """Permutation matrix mapping ``|i>|j>`` on (A, B) to ``|j>|i>`` on (B, A)."""
    s = np.zeros((d_a * d_b, d_a * d_b))
    for i in range(d_a):
        for j in range(d_b):
            s[j * d_a + i, i * d_b + j] = 1.0
    return s


def density_to_json(rho, **metadata):
    """Serialize as ``{dim, re, im}`` with row-major entries. Extra keys are passed through."""
    rho = np.asarray(rho, dtype=complex)
    doc = {
        "dim": int(rho.shape[0]),
        "re": [float(x) for x in rho.real.ravel()],
        "im": [float(x) for x in rho.imag.ravel()],
    }
    doc.update(metadata)
    return doc


def density_from_json(doc):
    if isinstance(doc, str):
        doc = json.loads(doc)
    dim = int(doc["dim"])
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc["im"], dtype=float)
    if re.size != dim * dim or im.size != dim * dim:
        raise DomainError(f"expected {dim * dim} entries for dim {dim}")
    return check_density_matrix((re + 1j * im).reshape(dim, dim))
