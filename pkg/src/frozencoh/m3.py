"""States with maximally mixed marginals (M3 states).

An N-qubit M3 state is ``2**-N (I + c1 X..X + c2 Y..Y + c3 Z..Z)`` and is
identified by its triple ``(c1, c2, c3)``. For N = 2 these are the
Bell-diagonal states. This module covers construction, the closed-form
spectrum for even N, evolution under local flip noise, the freezing family,
the two-qubit standard form and a PPT separability check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channels import beta_pairs, beta_vector
from .densmat import (
    MAX_DIM,
    InvalidStateError,
    pauli,
    pauli_string,
    partial_transpose,
    tensor_all,
    validate_density,
)

VALIDITY_TOL = 1e-12


@lru_cache(maxsize=None)
def _sigma_string(i: int, n_qubits: int) -> np.ndarray:
    m = pauli_string([i] * n_qubits)
    m.setflags(write=False)
    return m


def parity_sign(n_qubits: int) -> int:
    """(-1)^(N/2), the sign in the even-N freezing condition."""
    return -1 if (n_qubits // 2) % 2 else 1


@dataclass(frozen=True)
class M3Triple:
    c1: float
    c2: float
    c3: float
    n: int = 2

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            v = float(getattr(self, name))
            if not -1.0 - VALIDITY_TOL <= v <= 1.0 + VALIDITY_TOL:
                raise InvalidStateError(f"{name}={v!r} outside [-1, 1]")
            object.__setattr__(self, name, v)
        if not isinstance(self.n, (int, np.integer)) or self.n < 1 or 2**self.n > MAX_DIM:
            raise ValueError(f"qubit count must be an integer in 1..6, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        lo = min_eigenvalue(self)
        if lo < -VALIDITY_TOL:
            raise InvalidStateError(
                f"triple ({self.c1}, {self.c2}, {self.c3}) with N={self.n} is not a state "
                f"(eigenvalue {lo:.3e})"
            )

    @property
    def c(self) -> tuple[float, float, float]:
        return (self.c1, self.c2, self.c3)

    def replace(self, **kw) -> "M3Triple":
        vals = dict(c1=self.c1, c2=self.c2, c3=self.c3, n=self.n)
        vals.update(kw)
        return M3Triple(**vals)


def _eigen_formula(c1, c2, c3, n_qubits):
    """Closed-form spectrum for even N as (value, sign, parity) per beta pair."""
    sgn = parity_sign(n_qubits)
    scale = 2.0**-n_qubits
    out = []
    for x, _ in beta_pairs(n_qubits):
        p = bin(x).count("1") % 2
        par = -1 if p else 1
        for pm in (1, -1):
            lam = scale * (1 + pm * c1 + pm * sgn * par * c2 + par * c3)
            out.append((lam, pm, p))
    return out


def min_eigenvalue(triple: M3Triple) -> float:
    if triple.n % 2 == 0:
        return min(lam for lam, _, _ in _eigen_formula(*triple.c, triple.n))
    return float(np.linalg.eigvalsh(_matrix(triple.c, triple.n))[0])


def is_valid_triple(c1: float, c2: float, c3: float, n: int = 2) -> bool:
    try:
        M3Triple(c1, c2, c3, n)
    except InvalidStateError:
        return False
    return True


def _matrix(c, n_qubits: int) -> np.ndarray:
    rho = np.eye(2**n_qubits, dtype=complex)
    for i, ci in enumerate(c, start=1):
        if ci:
            rho = rho + ci * _sigma_string(i, n_qubits)
    return rho / 2**n_qubits


def m3_state(triple: M3Triple) -> np.ndarray:
    """Density matrix of the triple."""
    return _matrix(triple.c, triple.n)


def z_family_state(s: float, n_qubits: int) -> np.ndarray:
    """The incoherent M3 state 2^-N (I + s Z..Z)."""
    return _matrix((0.0, 0.0, s), n_qubits)


def triple_from_density(rho, tol: float = 1e-12) -> M3Triple | None:
    """Read off c_i = Tr(rho sigma_i^N); None if rho is not of M3 form within ``tol``."""
    rho = np.asarray(rho, dtype=complex)
    n = int(round(math.log2(rho.shape[0])))
    c = [float(np.real(np.trace(rho @ _sigma_string(i, n)))) for i in (1, 2, 3)]
    if np.max(np.abs(rho - _matrix(c, n))) > tol:
        return None
    return M3Triple(*c, n)


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    sign: int
    parity: int
    pair: int


def m3_eigensystem(triple: M3Triple) -> list[EigenPair]:
    """Eigenvalues from the parity formula with the |beta_i^pm> eigenvectors.

    Ordered pair by pair (``+`` then ``-``), pairs in ascending order of the
    smaller computational label.
    """
    n = triple.n
    if n % 2:
        raise ValueError("closed-form eigensystem holds for even N only")
    pairs = []
    for k, (lam, pm, p) in enumerate(_eigen_formula(*triple.c, n)):
        i = k // 2
        pairs.append(EigenPair(lam, beta_vector(n, i, pm), pm, p, i))
    return pairs


def evolve_triple(triple: M3Triple, k: int, q: float) -> M3Triple:
    """Local k-flip noise of strength q on every qubit: c_j -> (1-q)^N c_j for j != k."""
    if k not in (1, 2, 3):
        raise ValueError(f"flip axis must be 1, 2 or 3, got {k!r}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"noise strength must lie in [0, 1], got {q!r}")
    f = (1.0 - q) ** triple.n
    c = [ci if j == k else f * ci for j, ci in enumerate(triple.c, start=1)]
    return M3Triple(*c, triple.n)


def freezing_triple(c1: float, c3: float, n: int = 2, *, allow_odd: bool = False) -> M3Triple:
    """(c1, (-1)^(N/2) c1 c3, c3).

    With ``allow_odd`` the same expression is formed for odd N using
    (-1)^floor(N/2); such triples do not freeze and exist for comparison runs.
    """
    if n % 2 and not allow_odd:
        raise ValueError("the freezing condition is defined for even N")
    return M3Triple(c1, parity_sign(n) * c1 * c3, c3, n)


def is_frozen_family(triple, tol: float = 1e-12, n: int | None = None) -> bool:
    """|c2 - (-1)^(N/2) c1 c3| <= tol.

    Accepts an :class:`M3Triple` or a bare ``(c1, c2, c3)`` with ``n``; the
    predicate is algebraic and does not require a valid state.
    """
    if isinstance(triple, M3Triple):
        c1, c2, c3 = triple.c
        n = triple.n
    else:
        c1, c2, c3 = (float(v) for v in triple)
        n = 2 if n is None else n
    if n % 2:
        raise ValueError("the freezing condition is defined for even N")
    return abs(c2 - parity_sign(n) * c1 * c3) <= tol


def threshold_q_star(triple: M3Triple) -> float:
    """Largest q with |c3(q)| >= |c1(q)| under local bit flip noise."""
    a1, a3 = abs(triple.c1), abs(triple.c3)
    if a1 == 0.0:
        return 1.0
    if a3 <= a1:
        return 0.0
    return 1.0 - (a1 / a3) ** (1.0 / triple.n)


def v_unitary() -> np.ndarray:
    """V = (I + i sigma_2)/sqrt(2); V^N swaps c1 and c3 for even N."""
    return (pauli(0) + 1j * pauli(2)) / math.sqrt(2)


def pair_flip_unitary(j: int, n_qubits: int) -> np.ndarray:
    """sigma_1 on qubits j-1 and j (1-based j = 1..N-1), identity elsewhere."""
    if not 1 <= j <= n_qubits - 1:
        raise ValueError(f"pair index must be in 1..{n_qubits - 1}, got {j}")
    idx = [0] * n_qubits
    idx[j - 1] = idx[j] = 1
    return pauli_string(idx)


@dataclass(frozen=True)
class StandardFormState:
    """Two-qubit state with local Bloch vectors x, y and diagonal correlations t."""

    x: tuple[float, float, float] = (0.0, 0.0, 0.0)
    y: tuple[float, float, float] = (0.0, 0.0, 0.0)
    t: tuple[float, float, float] = (0.0, 0.0, 0.0)


def standard_form_state(params: StandardFormState) -> np.ndarray:
    s = [pauli(i) for i in range(4)]
    rho = np.kron(s[0], s[0]).astype(complex)
    for j in (1, 2, 3):
        rho = rho + params.x[j - 1] * np.kron(s[j], s[0])
        rho = rho + params.y[j - 1] * np.kron(s[0], s[j])
        rho = rho + params.t[j - 1] * np.kron(s[j], s[j])
    return validate_density(rho / 4)


def l1_freezing_predicate(params: StandardFormState, tol: float = 1e-12) -> bool:
    """x2 = y2 = 0 and |T22| <= |T11|: the l1-norm is then frozen under bit flips."""
    return (
        abs(params.x[1]) <= tol
        and abs(params.y[1]) <= tol
        and abs(params.t[1]) <= abs(params.t[0]) + tol
    )


def is_ppt_separable(rho, tol: float = 1e-10) -> bool:
    """Peres-Horodecki test; exact for two qubits."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("PPT separability test implemented for two qubits only")
    pt = partial_transpose(rho, 2, qubits=(1,))
    return bool(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0] >= -tol)


def local_unitary(u, n_qubits: int) -> np.ndarray:
    return tensor_all([u] * n_qubits)
