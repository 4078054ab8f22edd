"""Coherence quantifiers in the computational basis.

Closed forms: the l1-norm, the relative entropy of coherence and the
trace-distance coherence of two-qubit M3 states. The generic distance-based
measure ``min_delta D(rho, delta)`` over diagonal states is computed by a
multi-start Nelder-Mead search in softmax coordinates; for M3 states a
one-parameter search over the ``2^-N (I + s Z..Z)`` family is also offered.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import _simplex
from .densmat import (
    bures_distance,
    psd_factor,
    relative_entropy,
    shannon_entropy,
    trace_distance,
    validate_density,
    von_neumann_entropy,
)
from .m3 import M3Triple, m3_state, z_family_state

DEFAULT_SEED = 0xF0C05


class DistanceKind(str, enum.Enum):
    TRACE = "trace"
    BURES = "bures"
    RELATIVE_ENTROPY = "relative_entropy"

    @classmethod
    def parse(cls, value) -> "DistanceKind":
        if isinstance(value, cls):
            return value
        aliases = {"tr": "trace", "re": "relative_entropy", "relent": "relative_entropy"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise ValueError(f"unknown distance {value!r}") from None


_KIND_CODE = {
    DistanceKind.TRACE: _simplex.TRACE,
    DistanceKind.BURES: _simplex.BURES,
    DistanceKind.RELATIVE_ENTROPY: _simplex.RELATIVE_ENTROPY,
}


def distance(kind, rho, tau) -> float:
    """D(rho, tau) for one of the three supported distances."""
    kind = DistanceKind.parse(kind)
    if kind is DistanceKind.TRACE:
        return trace_distance(rho, tau)
    if kind is DistanceKind.BURES:
        return bures_distance(rho, tau)
    return relative_entropy(rho, tau)


@dataclass(frozen=True)
class MinimizerOptions:
    """Settings of the simplex search.

    ``restarts`` caps the number of starts (rho_diag, uniform, then random).
    The search stops early once ``agree`` starts reach the best value within
    ``value_tol``. A Nelder-Mead round ends when the simplex is smaller than
    ``step_tol`` or its values agree within ``spread_tol``; the default
    (None) is 1e-14 for the trace distance, whose kinks can stall a simplex
    with agreeing values away from the minimum, and ``value_tol`` otherwise.
    """

    restarts: int = 8
    seed: int = DEFAULT_SEED
    step_tol: float = 1e-9
    value_tol: float = 1e-10
    spread_tol: float | None = None
    agree: int = 2
    initial_step: float = 0.5
    restart_step: float = 0.05
    max_rounds: int = 30
    max_evals: int = 20000


@dataclass
class CoherenceResult:
    value: float
    minimizer: np.ndarray | None = None
    method: str = "closed_form"
    restarts_used: int = 0
    final_step: float = 0.0
    converged: bool = True
    details: dict = field(default_factory=dict)


def diagonal_part(rho) -> np.ndarray:
    return np.diag(np.diag(rho))


def incoherent_state(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("incoherent state needs a probability vector")
    return np.diag(np.clip(p, 0.0, None)).astype(complex)


def is_incoherent(rho, tol: float = 1e-12) -> bool:
    rho = np.asarray(rho)
    off = rho - np.diag(np.diag(rho))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)


def c_l1(rho) -> float:
    """Sum of the moduli of the off-diagonal entries."""
    rho = np.asarray(rho)
    return float(np.sum(np.abs(rho)) - np.sum(np.abs(np.diag(rho))))


def c_re(rho) -> float:
    """Relative entropy of coherence S(rho_diag) - S(rho), in bits."""
    rho = validate_density(rho)
    value = shannon_entropy(np.real(np.diag(rho))) - von_neumann_entropy(rho)
    return max(value, 0.0)


def trace_distance_to_z_family(triple: M3Triple, s: float) -> float:
    """Closed-form D_Tr between a two-qubit M3 state and (I + s ZZ)/4.

    Both states are diagonal in the Bell basis, so the distance is half the
    l1 distance between their spectra.
    """
    if triple.n != 2:
        raise ValueError("closed form available for two qubits only")
    a = triple.c1 - triple.c2
    b = triple.c1 + triple.c2
    u = triple.c3 - s
    return (abs(a + u) + abs(a - u) + abs(b + u) + abs(b - u)) / 8.0


def c_tr_m3(triple: M3Triple) -> float:
    """Trace-distance coherence of a two-qubit M3 state (attained at s = c3)."""
    return trace_distance_to_z_family(triple, triple.c3)


def _aux_for(kind: DistanceKind, rho: np.ndarray) -> np.ndarray:
    if kind is DistanceKind.BURES:
        return np.ascontiguousarray(psd_factor(rho), dtype=complex)
    if kind is DistanceKind.RELATIVE_ENTROPY:
        aux = np.zeros((2, rho.shape[0]), dtype=complex)
        aux[0, 0] = -von_neumann_entropy(rho)
        aux[1] = np.real(np.diag(rho))
        return aux
    return np.zeros((1, 1), dtype=complex)


class SimplexObjective:
    """D(rho, diag(p)) evaluated by the compiled kernels, singly or in batches."""

    def __init__(self, rho, kind):
        self.kind = DistanceKind.parse(kind)
        self.rho = np.ascontiguousarray(rho, dtype=complex)
        self.aux = _aux_for(self.kind, self.rho)
        self.code = _KIND_CODE[self.kind]

    def __call__(self, p) -> float:
        p = np.ascontiguousarray(p, dtype=float)
        return float(_simplex.distance_to_diag(self.code, self.rho, self.aux, p))

    def batch(self, ps) -> np.ndarray:
        ps = np.ascontiguousarray(ps, dtype=float)
        return _simplex.batch_distance(self.code, self.rho, self.aux, ps)

    def search(self, p0, opts: MinimizerOptions):
        """Local search from ``p0``; returns (value, p, rounds, evals, step)."""
        z0, ref = _simplex.start_logits(np.asarray(p0, dtype=float))
        if z0.size == 0:
            p = np.ones(1)
            return self(p), p, 0, 1, 0.0
        spread_tol = opts.spread_tol
        if spread_tol is None:
            spread_tol = 1e-14 if self.kind is DistanceKind.TRACE else opts.value_tol
        z, f, rounds, evals, step = _simplex.local_search(
            self.code, self.rho, self.aux, z0, ref, opts.initial_step, opts.restart_step,
            opts.step_tol, spread_tol, opts.value_tol, opts.max_rounds, opts.max_evals,
        )
        return float(f), _simplex.probabilities(z, ref), int(rounds), int(evals), float(step)


def start_points(rho, opts: MinimizerOptions, rng: np.random.Generator):
    d = rho.shape[0]
    yield np.clip(np.real(np.diag(rho)), 0.0, None)
    yield np.full(d, 1.0 / d)
    for _ in range(max(opts.restarts - 2, 0)):
        yield rng.dirichlet(np.ones(d))


def c_d(rho, d="trace", opts: MinimizerOptions | None = None) -> CoherenceResult:
    """Distance-based coherence min over diagonal delta of D(rho, delta)."""
    kind = DistanceKind.parse(d)
    rho = validate_density(rho)
    if kind is DistanceKind.RELATIVE_ENTROPY:
        return CoherenceResult(c_re(rho), np.real(np.diag(rho)).copy(), "closed_form")
    if rho.shape[0] > 16:
        raise ValueError("the simplex optimizer is limited to N <= 4 qubits")
    opts = opts or MinimizerOptions()
    rng = np.random.default_rng(opts.seed)
    obj = SimplexObjective(rho, kind)

    p_diag = np.clip(np.real(np.diag(rho)), 0.0, None)
    p_diag /= p_diag.sum()
    best_value, best_p, step = obj(p_diag), p_diag, 0.0
    found = []
    converged = False
    for p0 in start_points(rho, opts, rng):
        value, p, _, _, step_k = obj.search(p0 / p0.sum(), opts)
        found.append(value)
        if value < best_value or len(found) == 1:
            step = step_k
        if value < best_value:
            best_value, best_p = value, p
        top = min(found)
        if sum(v <= top + opts.value_tol for v in found) >= opts.agree:
            converged = True
            break
    return CoherenceResult(
        max(best_value, 0.0),
        best_p,
        "optimizer",
        restarts_used=len(found),
        final_step=step,
        converged=converged,
        details={"start_values": found},
    )


def _restricted_objective(triple: M3Triple, kind: DistanceKind):
    """s -> D(rho, 2^-N (I + s Z..Z)); the family is diagonal, so the compiled
    kernel applies."""
    obj = SimplexObjective(m3_state(triple), kind)
    n = triple.n
    parity = np.array([1.0 - 2.0 * (bin(x).count("1") % 2) for x in range(2**n)])

    def f(s):
        return obj((1.0 + s * parity) / 2**n)

    return f


def minimize_on_interval(f, lo: float, hi: float, grid: int = 41, xatol: float = 1e-12):
    """Coarse scan then bounded Brent refinement of a quasi-convex function."""
    ss = np.linspace(lo, hi, grid)
    vals = np.array([f(s) for s in ss])
    k = int(np.argmin(vals))
    a, b = ss[max(k - 1, 0)], ss[min(k + 1, grid - 1)]
    best_s, best_v = float(ss[k]), float(vals[k])
    if b > a:
        res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": xatol})
        if res.fun <= best_v:
            best_s, best_v = float(res.x), float(res.fun)
    return best_s, best_v


def c_d_m3_restricted(triple: M3Triple, d="trace") -> CoherenceResult:
    """min over s in [-1, 1] of D(rho(c), 2^-N (I + s Z..Z)), for even N."""
    kind = DistanceKind.parse(d)
    if triple.n % 2:
        raise ValueError("the restricted family is established for even N only")
    f = _restricted_objective(triple, kind)
    s_opt, value = minimize_on_interval(f, -1.0, 1.0)
    # the diagonal part (s = c3) is always a candidate and often exactly optimal
    v_diag = f(triple.c3)
    if v_diag <= value:
        s_opt, value = triple.c3, v_diag
    p = np.real(np.diag(z_family_state(s_opt, triple.n)))
    return CoherenceResult(max(value, 0.0), p, "restricted", details={"s": s_opt})
