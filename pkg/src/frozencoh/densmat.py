"""Dense linear algebra on qubit registers.

Everything here works on plain ``numpy`` complex arrays of dimension ``2**N``
with ``N <= 6``. Density matrices are not wrapped in a class; functions that
need a physical state call :func:`validate_density` on entry.

Entropies and relative entropies are in bits.
"""
from __future__ import annotations

import math
from functools import reduce

import numpy as np

MAX_DIM = 64

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues below this are treated as exact zeros in entropies and supports
ZERO_EIG = 1e-14

_PAULIS = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid density matrix."""


def pauli(index: int) -> np.ndarray:
    """Return sigma_index, with sigma_0 the 2x2 identity."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be 0..3, got {index!r}")
    return _PAULIS[index].copy()


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a (x) b`` with the usual block convention."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise ValueError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds {MAX_DIM}"
        )
    return np.kron(a, b)


def tensor_all(mats) -> np.ndarray:
    return reduce(tensor, mats)


def pauli_string(indices) -> np.ndarray:
    """sigma_{i1} (x) sigma_{i2} (x) ... for a sequence of Pauli indices."""
    return tensor_all([_PAULIS[i] for i in indices])


def n_qubits_of(m: np.ndarray) -> int:
    dim = m.shape[0]
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if m.ndim != 2 or m.shape[1] != dim or n < 1 or 2**n != dim or dim > MAX_DIM:
        raise ValueError(f"expected a 2^N x 2^N matrix with 2 <= dim <= {MAX_DIM}, got {m.shape}")
    return n


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def eig_hermitian(m: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    The input must be Hermitian within ``tol``; it is symmetrised before the
    LAPACK call so rounding asymmetry does not leak into the result.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return w, v


def validate_density(rho, *, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Check the density-matrix invariants and return ``rho`` as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    try:
        n_qubits_of(rho)
    except ValueError as exc:
        raise InvalidStateError(str(exc)) from None
    if not is_hermitian(rho, HERMITIAN_TOL):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"density matrix has trace {tr!r}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -psd_tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3e}")
    return rho


def clamped_spectrum(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a state with tiny negative rounding clamped to zero."""
    w = np.linalg.eigvalsh(rho)
    if w[0] < -PSD_TOL:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e} beyond clamp tolerance")
    return np.clip(w, 0.0, None)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > ZERO_EIG]
    return float(-np.sum(p * np.log2(p)))


def von_neumann_entropy(rho) -> float:
    """S(rho) = -Tr rho log2 rho."""
    rho = validate_density(rho)
    return max(shannon_entropy(clamped_spectrum(rho)), 0.0)


def _check_pair(rho, tau):
    rho = np.asarray(rho, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    if rho.shape != tau.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {tau.shape}")
    return rho, tau


def trace_distance(rho, tau) -> float:
    """Half the trace norm of ``rho - tau``."""
    rho, tau = _check_pair(rho, tau)
    diff = rho - tau
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(0.5 * np.sum(np.abs(w)))


def relative_entropy(rho, tau) -> float:
    """Quantum relative entropy S(rho||tau) in bits.

    Returns ``math.inf`` when the support of ``rho`` is not contained in the
    support of ``tau``; callers compare against it rather than catching.
    """
    rho, tau = _check_pair(rho, tau)
    w_r = clamped_spectrum(rho)
    w_t, v_t = np.linalg.eigh(0.5 * (tau + tau.conj().T))
    # weights of rho along the eigenvectors of tau
    weights = np.real(np.einsum("ij,ik,kj->j", v_t.conj(), rho, v_t))
    null = w_t <= ZERO_EIG
    if np.any(weights[null] > 1e-12):
        return math.inf
    keep = ~null & (weights > 0)
    cross = -float(np.sum(weights[keep] * np.log2(w_t[keep])))
    value = cross - shannon_entropy(w_r)
    return max(value, 0.0)


def sqrtm_psd(rho) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def psd_factor(rho) -> np.ndarray:
    """A with rho = A A^dag, one column per eigenvalue above ZERO_EIG."""
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    keep = w > ZERO_EIG
    return v[:, keep] * np.sqrt(w[keep])


def root_fidelity(rho, tau) -> float:
    """Tr sqrt(sqrt(rho) tau sqrt(rho)), computed as ||A^dag B||_1 for
    rho = A A^dag and tau = B B^dag; dropping null directions keeps
    rounding-level eigenvalues out of the square roots."""
    rho, tau = _check_pair(rho, tau)
    sv = np.linalg.svd(psd_factor(rho).conj().T @ psd_factor(tau), compute_uv=False)
    return float(min(np.sum(sv), 1.0))


def fidelity(rho, tau) -> float:
    return root_fidelity(rho, tau) ** 2


def bures_distance(rho, tau) -> float:
    """sqrt(2 - 2 sqrt(F)), evaluated as min over partial isometries W of
    ||A W - B||_F (or ||A - B W^dag||_F) for factors rho = A A^dag, tau = B B^dag.

    The sum-of-squares form avoids the cancellation in 2 - 2 sqrt(F), which
    would put a floor of about 1e-8 under small distances.
    """
    rho, tau = _check_pair(rho, tau)
    a, b = psd_factor(rho), psd_factor(tau)
    x, _, yh = np.linalg.svd(a.conj().T @ b, full_matrices=False)
    w = x @ yh
    res = a @ w - b if a.shape[1] <= b.shape[1] else a - b @ w.conj().T
    return float(np.linalg.norm(res))


def bloch_to_density(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if float(n @ n) > 1.0 + 1e-12:
        raise InvalidStateError(f"Bloch vector norm {math.sqrt(n @ n):.6g} exceeds 1")
    return 0.5 * (_PAULIS[0] + n[0] * _PAULIS[1] + n[1] * _PAULIS[2] + n[2] * _PAULIS[3])


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("Bloch vectors exist only for single-qubit states")
    return np.array([np.trace(rho @ _PAULIS[k]).real for k in (1, 2, 3)])


def partial_trace(rho, keep, n_qubits: int) -> np.ndarray:
    """Reduced state on the qubits listed in ``keep`` (qubit 0 is the leftmost factor)."""
    keep = sorted(set(keep))
    traced = [k for k in range(n_qubits) if k not in keep]
    t = np.asarray(rho, dtype=complex).reshape([2] * (2 * n_qubits))
    # trace out highest indices first so axis numbers stay valid
    for q in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + cur)
    d = 2 ** len(keep)
    return t.reshape(d, d)


def partial_transpose(rho, n_qubits: int, qubits=(1,)) -> np.ndarray:
    """Transpose the listed qubit factors."""
    t = np.asarray(rho, dtype=complex).reshape([2] * (2 * n_qubits))
    axes = list(range(2 * n_qubits))
    for q in qubits:
        axes[q], axes[q + n_qubits] = axes[q + n_qubits], axes[q]
    d = 2**n_qubits
    return t.transpose(axes).reshape(d, d)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble random state; full rank unless ``rank`` is given."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_bloch(rng: np.random.Generator, *, surface: bool = False) -> np.ndarray:
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    return v if surface else v * rng.uniform() ** (1 / 3)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + g.conj().T)
