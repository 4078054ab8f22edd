"""Kraus channels: the single-qubit incoherent noise catalog, local lifting to
N qubits, and the global rephasing map used in the freezing proofs."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .densmat import MAX_DIM, pauli, tensor_all

COMPLETENESS_TOL = 1e-10

FLIP_KINDS = {"bit_flip": 1, "bit_phase_flip": 2, "phase_flip": 3}
CHANNEL_KINDS = (
    "identity",
    "bit_flip",
    "bit_phase_flip",
    "phase_flip",
    "depolarizing",
    "amplitude_damping",
    "phase_damping",
    "rephasing",
)


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple
    label: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            if k.shape != (dim, dim):
                raise ValueError("Kraus operators must all be square with equal dimension")
        object.__setattr__(self, "kraus_ops", ops)
        err = completeness_error(ops)
        if err > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators violate completeness by {err:.3e}")

    @property
    def dim(self) -> int:
        return self.kraus_ops[0].shape[0]

    def __call__(self, rho):
        return apply(self, rho)

    def __len__(self):
        return len(self.kraus_ops)


def completeness_error(ops) -> float:
    dim = ops[0].shape[0]
    total = sum(k.conj().T @ k for k in ops)
    return float(np.max(np.abs(total - np.eye(dim))))


def noise_strength(q=None, *, gamma=None, t=None) -> float:
    """Noise strength in [0, 1], either given directly or as 1 - exp(-gamma t)."""
    if q is None:
        if gamma is None or t is None:
            raise ValueError("give q, or both gamma and t")
        if gamma < 0 or t < 0:
            raise ValueError("gamma and t must be non-negative")
        q = -math.expm1(-gamma * t)
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"noise strength q must lie in [0, 1], got {q!r}")
    return q


def time_of(q: float, gamma: float) -> float:
    """Inverse of q(t) = 1 - exp(-gamma t); q = 1 maps to infinity."""
    if q >= 1.0:
        return math.inf
    return -math.log1p(-q) / gamma


def _drop_zero(ops):
    return [k for k in ops if np.any(np.abs(k) > 0)]


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),), "identity")


def flip_channel(k: int, q: float) -> KrausChannel:
    """Bit (k=1), bit-phase (k=2) or phase (k=3) flip with strength q."""
    if k not in (1, 2, 3):
        raise ValueError(f"flip axis must be 1, 2 or 3, got {k!r}")
    q = noise_strength(q)
    ops = _drop_zero([math.sqrt(1 - q / 2) * pauli(0), math.sqrt(q / 2) * pauli(k)])
    name = {1: "bit_flip", 2: "bit_phase_flip", 3: "phase_flip"}[k]
    return KrausChannel(tuple(ops), name, {"q": q})


def depolarizing_channel(q: float) -> KrausChannel:
    q = noise_strength(q)
    ops = [math.sqrt(1 - 3 * q / 4) * pauli(0)] + [math.sqrt(q / 4) * pauli(j) for j in (1, 2, 3)]
    return KrausChannel(tuple(_drop_zero(ops)), "depolarizing", {"q": q})


def amplitude_damping_channel(q: float) -> KrausChannel:
    q = noise_strength(q)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - q)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(q)], [0, 0]], dtype=complex)
    return KrausChannel(tuple(_drop_zero([k0, k1])), "amplitude_damping", {"q": q})


def phase_damping_channel(q: float) -> KrausChannel:
    q = noise_strength(q)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - q)]], dtype=complex)
    k1 = np.array([[0, 0], [0, math.sqrt(q)]], dtype=complex)
    return KrausChannel(tuple(_drop_zero([k0, k1])), "phase_damping", {"q": q})


@dataclass(frozen=True)
class LocalChannel:
    """``n_qubits`` independent copies of a single-qubit channel.

    The full Kraus set (all tensor products) is only materialised on request;
    :func:`apply` acts qubit by qubit, which is exact and much cheaper.
    """

    single: KrausChannel
    n_qubits: int

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def label(self) -> str:
        return f"{self.single.label}^{self.n_qubits}"

    @property
    def params(self) -> dict:
        return dict(self.single.params, n=self.n_qubits)

    @cached_property
    def kraus_ops(self) -> tuple:
        return tuple(
            tensor_all(combo)
            for combo in itertools.product(self.single.kraus_ops, repeat=self.n_qubits)
        )

    def __call__(self, rho):
        return apply(self, rho)

    def __len__(self):
        return len(self.single) ** self.n_qubits


def lift_local(channel: KrausChannel, n_qubits: int):
    """Identical independent copies of a single-qubit channel on every qubit."""
    if channel.dim != 2:
        raise ValueError("only single-qubit channels can be lifted")
    if n_qubits < 1 or 2**n_qubits > MAX_DIM:
        raise ValueError(f"n_qubits must be in 1..6, got {n_qubits}")
    if n_qubits == 1:
        return channel
    return LocalChannel(channel, n_qubits)


def _apply_on_qubit(ks: np.ndarray, rho: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    left, right = 2**qubit, 2 ** (n_qubits - qubit - 1)
    t = rho.reshape(left, 2, right, left, 2, right)
    out = np.einsum("kab,ibjlcm,kdc->iajldm", ks, t, ks.conj())
    return out.reshape(rho.shape)


def apply(channel, rho) -> np.ndarray:
    """sum_j K_j rho K_j^dagger."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (channel.dim, channel.dim):
        raise ValueError(f"channel acts on dim {channel.dim}, state has shape {rho.shape}")
    if isinstance(channel, LocalChannel):
        ks = np.stack(channel.single.kraus_ops)
        out = rho
        for qubit in range(channel.n_qubits):
            out = _apply_on_qubit(ks, out, qubit, channel.n_qubits)
    else:
        ks = np.stack(channel.kraus_ops)
        out = np.einsum("kij,jl,kml->im", ks, rho, ks.conj())
    return 0.5 * (out + out.conj().T)


def beta_pairs(n_qubits: int) -> list[tuple[int, int]]:
    """Computational labels (x, NOT x) with x < NOT x, in ascending order of x.

    Pair ``i`` (0-based) spans the Bell-like basis vectors
    ``|beta_i^pm> = (|x> pm |NOT x>)/sqrt(2)``.
    """
    mask = 2**n_qubits - 1
    return [(x, x ^ mask) for x in range(2 ** (n_qubits - 1))]


def beta_vector(n_qubits: int, i: int, sign: int) -> np.ndarray:
    x, xbar = beta_pairs(n_qubits)[i]
    v = np.zeros(2**n_qubits, dtype=complex)
    v[x] = 1 / math.sqrt(2)
    v[xbar] = sign / math.sqrt(2)
    return v


def rephasing_channel(r: float, n_qubits: int) -> KrausChannel:
    """Global rephasing map: |x><x| goes to the beta pair of x, weighted (1 pm r)/2."""
    if n_qubits % 2 or n_qubits < 2:
        raise ValueError("the rephasing channel is defined for even N only")
    if 2**n_qubits > MAX_DIM:
        raise ValueError(f"n_qubits must be at most 6, got {n_qubits}")
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"rephasing strength must lie in [0, 1], got {r!r}")
    dim = 2**n_qubits
    pair_of = {}
    for i, (x, xbar) in enumerate(beta_pairs(n_qubits)):
        pair_of[x] = pair_of[xbar] = i
    ops = []
    for x in range(dim):
        e_x = np.zeros(dim, dtype=complex)
        e_x[x] = 1.0
        for sign in (1, -1):
            w = math.sqrt((1 + sign * r) / 2)
            ops.append(w * np.outer(beta_vector(n_qubits, pair_of[x], sign), e_x))
    return KrausChannel(tuple(ops), "rephasing", {"r": r, "n": n_qubits})


def is_incoherent_channel(channel: KrausChannel, tol: float = 1e-12) -> bool:
    """Every Kraus operator must send every basis projector to a diagonal matrix."""
    for k in channel.kraus_ops:
        for x in range(channel.dim):
            col = k[:, x]
            out = np.outer(col, col.conj())
            off = out - np.diag(np.diag(out))
            if np.max(np.abs(off)) > tol:
                return False
    return True


def unitary_channel(u) -> KrausChannel:
    return KrausChannel((np.asarray(u, dtype=complex),), "unitary")


def make_channel(kind: str, q: float, n_qubits: int = 1):
    """Catalog channel by name, lifted to ``n_qubits`` (rephasing is global)."""
    if kind == "identity":
        return identity_channel(2**n_qubits)
    if kind == "rephasing":
        return rephasing_channel(q, n_qubits)
    if kind in FLIP_KINDS:
        single = flip_channel(FLIP_KINDS[kind], q)
    elif kind == "depolarizing":
        single = depolarizing_channel(q)
    elif kind == "amplitude_damping":
        single = amplitude_damping_channel(q)
    elif kind == "phase_damping":
        single = phase_damping_channel(q)
    else:
        raise ValueError(f"unknown channel kind {kind!r}; expected one of {CHANNEL_KINDS}")
    return lift_local(single, n_qubits)
