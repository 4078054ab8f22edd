"""Noise sweeps and freezing verdicts.

A sweep evolves an initial state across a grid of noise strengths ``q`` and
evaluates a list of coherence measures at each point. Measures are selected
by strings:

``l1``        l1-norm of coherence
``re``        relative entropy of coherence
``tr``        trace-distance coherence (closed form for two-qubit M3 states)
``d:trace``   distance-based measure with the trace distance
``d:bures``   distance-based measure with the Bures distance
``d:re``      distance-based measure with the relative entropy (= ``re``)
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .channels import CHANNEL_KINDS, FLIP_KINDS, make_channel, time_of
from .coherence import (
    DEFAULT_SEED,
    MinimizerOptions,
    c_d,
    c_d_m3_restricted,
    c_l1,
    c_re,
    c_tr_m3,
    is_incoherent,
)
from .densmat import bloch_to_density, validate_density
from .m3 import (
    M3Triple,
    StandardFormState,
    evolve_triple,
    m3_state,
    standard_form_state,
    threshold_q_star,
    triple_from_density,
)

MEASURE_SELECTORS = ("l1", "re", "tr", "d:trace", "d:bures", "d:re")

# freeze tolerances by evaluation method
METHOD_TOLERANCE = {"closed_form": 1e-9, "restricted": 1e-8, "optimizer": 1e-5}

OPTIMIZER_MAX_DIM = 16


def default_grid(points: int = 101) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``initial`` is an :class:`M3Triple`, a length-3 Bloch vector, a
    :class:`StandardFormState` or a density matrix. ``channel`` is a kind from
    :data:`frozencoh.channels.CHANNEL_KINDS`; the grid value is its strength.
    ``path`` selects closed-form triple evolution (``auto``) or always the
    Kraus sum (``kraus``). ``optimizer`` set to ``full`` forces the simplex
    search for ``d:*`` measures even where the M3 one-parameter search applies.
    """

    initial: object
    channel: str = "bit_flip"
    measures: tuple[str, ...] = ("l1", "re")
    grid: tuple[float, ...] = tuple(default_grid())
    seed: int = DEFAULT_SEED
    extra_points: int = 20
    gamma: float | None = None
    path: str = "auto"
    optimizer: str = "auto"

    def __post_init__(self):
        if self.channel not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel {self.channel!r}; choose from {', '.join(CHANNEL_KINDS)}")
        grid = tuple(float(q) for q in np.atleast_1d(self.grid))
        if len(grid) < 2:
            raise ValueError("the q grid needs at least two points")
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise ValueError("the q grid must be sorted")
        if grid[0] < 0.0 or grid[-1] > 1.0:
            raise ValueError("q values must lie in [0, 1]")
        object.__setattr__(self, "grid", grid)
        measures = tuple(self.measures)
        for m in measures:
            if m not in MEASURE_SELECTORS:
                raise ValueError(f"unknown measure {m!r}; choose from {', '.join(MEASURE_SELECTORS)}")
        if not measures:
            raise ValueError("at least one measure is required")
        object.__setattr__(self, "measures", measures)
        if self.path not in ("auto", "kraus"):
            raise ValueError(f"path must be 'auto' or 'kraus', got {self.path!r}")
        if self.optimizer not in ("auto", "full"):
            raise ValueError(f"optimizer must be 'auto' or 'full', got {self.optimizer!r}")
        if self.extra_points < 0:
            raise ValueError("extra_points must be non-negative")


@dataclass(frozen=True)
class FreezeVerdict:
    frozen: bool
    max_deviation: float
    tolerance: float
    status: str = "frozen"

    def to_dict(self) -> dict:
        return {
            "frozen": self.frozen,
            "status": self.status,
            "max_deviation": _json_float(self.max_deviation),
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class PointFailure:
    measure: str
    q: float
    best_value: float


@dataclass
class SweepSeries:
    q: np.ndarray
    values: dict[str, np.ndarray]
    verdicts: dict[str, FreezeVerdict]
    methods: dict[str, str]
    extra_q: np.ndarray
    extra_values: dict[str, np.ndarray]
    failures: list[PointFailure] = field(default_factory=list)
    q_star: float | None = None
    t: np.ndarray | None = None
    trivial: str | None = None
    seed: int = DEFAULT_SEED

    @property
    def degraded(self) -> bool:
        return bool(self.failures)

    def to_dict(self) -> dict:
        out = {
            "q": [float(x) for x in self.q],
            "values": {m: [_json_float(v) for v in vs] for m, vs in self.values.items()},
            "verdicts": {m: v.to_dict() for m, v in self.verdicts.items()},
            "methods": dict(self.methods),
            "extra_q": [float(x) for x in self.extra_q],
            "extra_values": {m: [_json_float(v) for v in vs] for m, vs in self.extra_values.items()},
            "failures": [
                {"measure": f.measure, "q": f.q, "best_value": _json_float(f.best_value)}
                for f in self.failures
            ],
            "q_star": self.q_star,
            "trivial": self.trivial,
            "seed": self.seed,
        }
        if self.t is not None:
            out["t"] = [_json_float(x) for x in self.t]
        return out


def _json_float(x):
    x = float(x)
    return x if math.isfinite(x) else None


def point_seed(seed: int, q: float) -> int:
    """Per-point optimizer seed from the sweep seed and the bit pattern of q."""
    (bits,) = struct.unpack("<Q", struct.pack("<d", float(q)))
    return int(np.random.SeedSequence([seed, bits]).generate_state(1, np.uint64)[0])


# initial states


def initial_state(initial) -> tuple[np.ndarray, M3Triple | None]:
    """Density matrix for a state descriptor, plus its triple when it is M3."""
    if isinstance(initial, M3Triple):
        return m3_state(initial), initial
    if isinstance(initial, StandardFormState):
        return standard_form_state(initial), None
    arr = np.asarray(initial)
    if arr.shape == (3,):
        return bloch_to_density(arr.astype(float)), None
    return validate_density(arr), None


def evolve(initial, channel: str, q: float, *, path: str = "auto"):
    """State after the channel of strength q; returns (rho, triple or None)."""
    rho0, triple0 = initial_state(initial)
    if triple0 is not None and path == "auto" and channel in FLIP_KINDS:
        k = FLIP_KINDS[channel]
        t = evolve_triple(triple0, k, q)
        return m3_state(t), t
    n = int(round(math.log2(rho0.shape[0])))
    rho = make_channel(channel, q, n)(rho0)
    triple = triple_from_density(rho) if triple0 is not None else None
    return rho, triple


# measures


@dataclass(frozen=True)
class MeasureValue:
    value: float
    method: str
    ok: bool = True


def evaluate_measure(
    selector: str,
    rho: np.ndarray,
    triple: M3Triple | None = None,
    *,
    seed: int = DEFAULT_SEED,
    optimizer: str = "auto",
) -> MeasureValue:
    """Evaluate one measure selector on a state."""
    if selector == "l1":
        return MeasureValue(c_l1(rho), "closed_form")
    if selector in ("re", "d:re"):
        return MeasureValue(c_re(rho), "closed_form")
    even_m3 = triple is not None and triple.n % 2 == 0
    if selector == "tr":
        if even_m3 and triple.n == 2:
            return MeasureValue(c_tr_m3(triple), "closed_form")
        if even_m3:
            return MeasureValue(c_d_m3_restricted(triple, "trace").value, "restricted")
        return _optimized(rho, "trace", seed)
    if selector in ("d:trace", "d:bures"):
        kind = selector[2:]
        if even_m3 and (rho.shape[0] > OPTIMIZER_MAX_DIM or (optimizer == "auto" and triple.n > 2)):
            return MeasureValue(c_d_m3_restricted(triple, kind).value, "restricted")
        return _optimized(rho, kind, seed)
    raise ValueError(f"unknown measure {selector!r}")


def _optimized(rho, kind, seed) -> MeasureValue:
    if rho.shape[0] > OPTIMIZER_MAX_DIM:
        raise ValueError(
            f"{kind} coherence of a non-M3 state needs the simplex optimizer, limited to N <= 4"
        )
    res = c_d(rho, kind, MinimizerOptions(seed=seed))
    return MeasureValue(res.value, "optimizer", res.converged)


# verdicts


def freeze_verdict(values, tol: float, reference: float | None = None) -> FreezeVerdict:
    """Largest deviation from the first value (or ``reference``) against ``tol``.

    Any missing (nan) entry makes the verdict indeterminate, never frozen.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot judge an empty series")
    ref = values[0] if reference is None else float(reference)
    if not np.all(np.isfinite(values)) or not math.isfinite(ref):
        finite = values[np.isfinite(values)]
        dev = float(np.max(np.abs(finite - ref))) if finite.size and math.isfinite(ref) else math.nan
        return FreezeVerdict(False, dev, tol, "indeterminate")
    dev = float(np.max(np.abs(values - ref)))
    frozen = dev <= tol
    return FreezeVerdict(frozen, dev, tol, "frozen" if frozen else "not_frozen")


def trivial_kind(initial, channel: str, grid, tol: float = 1e-12) -> str | None:
    """``incoherent`` or ``invariant`` when freezing holds for a trivial reason."""
    rho0, _ = initial_state(initial)
    if is_incoherent(rho0, tol):
        return "incoherent"
    for q in grid:
        rho, _ = evolve(initial, channel, q, path="kraus")
        if np.max(np.abs(rho - rho0)) > tol:
            return None
    return "invariant"


def run_sweep(spec: SweepSpec) -> SweepSeries:
    """Evaluate every measure along the grid (and on random off-grid points)."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x0FF]))
    extra_q = np.sort(rng.uniform(spec.grid[0], spec.grid[-1], spec.extra_points))
    qs = np.asarray(spec.grid)

    values = {m: np.empty(qs.size) for m in spec.measures}
    extra_values = {m: np.empty(extra_q.size) for m in spec.measures}
    tolerance = {m: 0.0 for m in spec.measures}
    methods: dict[str, set] = {m: set() for m in spec.measures}
    failures = []

    for target, points in ((values, qs), (extra_values, extra_q)):
        for i, q in enumerate(points):
            rho, triple = evolve(spec.initial, spec.channel, float(q), path=spec.path)
            seed = point_seed(spec.seed, q)
            for m in spec.measures:
                mv = evaluate_measure(m, rho, triple, seed=seed, optimizer=spec.optimizer)
                methods[m].add(mv.method)
                tolerance[m] = max(tolerance[m], METHOD_TOLERANCE[mv.method])
                if mv.ok:
                    target[m][i] = mv.value
                else:
                    target[m][i] = math.nan
                    failures.append(PointFailure(m, float(q), mv.value))

    verdicts = {}
    for m in spec.measures:
        both = np.concatenate([values[m], extra_values[m]])
        verdicts[m] = freeze_verdict(both, tolerance[m], reference=values[m][0])

    _, triple0 = initial_state(spec.initial)
    q_star = None
    if triple0 is not None and spec.channel == "bit_flip":
        q_star = threshold_q_star(triple0)
    t = None
    if spec.gamma is not None:
        t = np.array([time_of(q, spec.gamma) for q in qs])
    return SweepSeries(
        q=qs,
        values=values,
        verdicts=verdicts,
        methods={m: "+".join(sorted(s)) for m, s in methods.items()},
        extra_q=extra_q,
        extra_values=extra_values,
        failures=failures,
        q_star=q_star,
        t=t,
        trivial=trivial_kind(spec.initial, spec.channel, spec.grid),
        seed=spec.seed,
    )


# single-qubit common freezing


@dataclass(frozen=True)
class CommonFreezingReport:
    bloch: tuple[float, float, float]
    channel: str
    l1: FreezeVerdict
    re: FreezeVerdict
    trivial: str | None

    @property
    def nontrivial_common(self) -> bool:
        return self.l1.frozen and self.re.frozen and self.trivial is None


def no_common_freezing_scan(n0, channel: str = "bit_flip", grid=None) -> CommonFreezingReport:
    """Freeze verdicts of the l1-norm and relative entropy for one qubit."""
    n0 = np.asarray(n0, dtype=float)
    if n0.shape != (3,):
        raise ValueError("the common-freezing scan takes a single-qubit Bloch vector")
    grid = tuple(default_grid()) if grid is None else tuple(grid)
    series = run_sweep(SweepSpec(n0, channel, ("l1", "re"), grid, extra_points=0))
    return CommonFreezingReport(
        tuple(float(x) for x in n0),
        channel,
        series.verdicts["l1"],
        series.verdicts["re"],
        series.trivial,
    )


def random_common_freezing_scan(rng, samples: int = 200, channel: str = "bit_flip", grid=None):
    """Reports on random Bloch vectors, half of them with n2 = 0.

    Returns the list of reports; a nontrivial common freeze would show up as
    ``report.nontrivial_common``.
    """
    from .densmat import random_bloch

    out = []
    for i in range(samples):
        n = random_bloch(rng)
        if i % 2:
            n[1] = 0.0
        out.append(no_common_freezing_scan(n, channel, grid))
    return out


# coincidence report


@dataclass(frozen=True)
class CoincidenceRow:
    q: float
    regime: str
    values: dict[str, float]


@dataclass(frozen=True)
class CoincidenceReport:
    triple: M3Triple
    q_star: float
    rows: tuple[CoincidenceRow, ...]

    @property
    def regimes(self) -> set[str]:
        return {r.regime for r in self.rows}


def measure_coincidence_report(
    triple: M3Triple, measures=("l1", "re", "tr", "d:bures"), grid=None, seed: int = DEFAULT_SEED
) -> CoincidenceReport:
    """Measure values along the bit flip evolution, split at q*."""
    if triple.n != 2:
        raise ValueError("the coincidence report is defined for two qubits")
    if abs(triple.c3) < abs(triple.c1):
        raise ValueError("the coincidence report needs |c3| >= |c1|")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    q_star = threshold_q_star(triple)
    rows = []
    for q in grid:
        rho, t = evolve(triple, "bit_flip", float(q))
        vals = {
            m: evaluate_measure(m, rho, t, seed=point_seed(seed, q)).value for m in measures
        }
        rows.append(CoincidenceRow(float(q), "q<=q*" if q <= q_star else "q>q*", vals))
    return CoincidenceReport(triple, q_star, tuple(rows))


# output


def format_float(x: float) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else f"{x:.17g}"


def series_to_csv(series: SweepSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    measures = list(series.values)
    w.writerow(["q", *measures])
    for i, q in enumerate(series.q):
        w.writerow([format_float(q), *(format_float(series.values[m][i]) for m in measures)])
    return buf.getvalue()


def series_to_json(series: SweepSeries) -> str:
    return json.dumps(series.to_dict(), indent=2, sort_keys=True) + "\n"


# JSON run configs (validated against the shipped schema by the CLI)


def parse_triple(c, n: int) -> M3Triple:
    """Triple from ``[c1, c2, c3]`` where c2 may be the keyword ``"freeze"``."""
    from .m3 import freezing_triple

    c1, c2, c3 = c
    if isinstance(c2, str):
        if c2 != "freeze":
            raise ValueError(f"c2 must be a number or 'freeze', got {c2!r}")
        return freezing_triple(float(c1), float(c3), n, allow_odd=True)
    return M3Triple(float(c1), float(c2), float(c3), n)


def state_from_config(doc: dict):
    if "m3" in doc:
        return parse_triple(doc["m3"], int(doc.get("n", 2)))
    if "bloch" in doc:
        return np.asarray(doc["bloch"], dtype=float)
    if "standard_form" in doc:
        sf = doc["standard_form"]
        return StandardFormState(
            tuple(sf.get("x", (0, 0, 0))), tuple(sf.get("y", (0, 0, 0))), tuple(sf.get("t", (0, 0, 0)))
        )
    if "matrix" in doc:
        m = doc["matrix"]
        return np.asarray(m["re"], dtype=float) + 1j * np.asarray(m.get("im", np.zeros_like(m["re"])), dtype=float)
    raise ValueError("initial state needs one of m3, bloch, standard_form, matrix")


def spec_from_config(doc: dict) -> SweepSpec:
    grid = doc.get("grid", 101)
    grid = default_grid(grid) if isinstance(grid, int) else np.asarray(grid, dtype=float)
    channel = doc.get("channel", {"kind": "bit_flip"})
    return SweepSpec(
        initial=state_from_config(doc["initial"]),
        channel=channel["kind"],
        measures=tuple(doc.get("measures", ("l1", "re"))),
        grid=tuple(grid),
        seed=int(doc.get("seed", DEFAULT_SEED)),
        extra_points=int(doc.get("extra_points", 20)),
        gamma=channel.get("gamma"),
        path=doc.get("path", "auto"),
        optimizer=doc.get("optimizer", "auto"),
    )
