"""Parameter sweeps over tilings, radii and model parameters.

A sweep is described by a small key-value config, runs a fixed set of
estimators at every (parameter, radius) point, and emits one self-describing
record per estimator as JSONL.  Everything downstream (trend verdicts, the
site-threshold proxy) consumes those records, so the whole pipeline replays
byte-for-byte from a seed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, asdict
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .clusters import SiteConfig, SpinBoundary, site_clusters
from .contours import proxy_triple
from .errors import BudgetExceeded, ConfigError, InsufficientData
from .planar_map import CombinatorialMap, TilingSpec, build_ball
from .samplers import RngSpec, swendsen_wang_chain_batch

MODELS = ("Bernoulli", "Ising", "FK", "XOR")
BOUNDARIES = ("free", "plus", "minus", "wired")

ESTIMATORS = (
    "plus_boundary_clusters",
    "minus_boundary_clusters",
    "phi_plus_proxy_count",
    "largest_cluster_fraction",
    "magnetization",
)

BUDGET_ENV = "HYPERPERC_BUDGET"


@dataclass(frozen=True)
class ExperimentConfig:
    tiling: TilingSpec
    radii: Tuple[int, ...]
    model: str
    grid: Tuple[float, ...]
    boundary: str = "free"
    chains: int = 1
    sweeps: int = 1
    burn_in: int = 0
    thinning: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.model in ("Ising", "XOR") and self.boundary == "wired":
            raise ConfigError("wired boundary applies to bond models only")
        if self.model in ("Bernoulli", "FK") and self.boundary == "minus":
            raise ConfigError(f"minus boundary undefined for {self.model}")
        if self.model == "Bernoulli" and self.boundary != "free":
            raise ConfigError("Bernoulli ignores boundary; use free")
        if not self.grid:
            raise ConfigError("empty parameter grid")
        if not self.radii:
            raise ConfigError("empty radius list")
        if self.chains < 1:
            raise ConfigError(f"chains {self.chains} < 1")
        if self.burn_in < 0:
            raise ConfigError(f"burn_in {self.burn_in} < 0")
        if self.sweeps < 1:
            raise ConfigError(f"sweeps {self.sweeps} < 1")
        if self.thinning < 1:
            raise ConfigError(f"thinning {self.thinning} < 1")
        if self.sweeps // self.thinning < 1:
            raise ConfigError("thinning leaves no samples")
        for r in self.radii:
            if r < 0:
                raise ConfigError(f"radius {r} < 0")
        for x in self.grid:
            if self.model in ("Bernoulli", "FK") and not 0.0 < x < 1.0:
                raise ConfigError(f"density {x} outside (0, 1)")
            if self.model in ("Ising", "XOR") and x < 0.0:
                raise ConfigError(f"coupling {x} < 0")


_INT_FIELDS = ("chains", "sweeps", "burn_in", "thinning", "seed")


def parse_config(text: str) -> ExperimentConfig:
    """Key = value lines mirroring the ExperimentConfig field names."""
    fields: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in fields:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = val

    def ints(s: str) -> List[int]:
        parts = s.replace(",", " ").split()
        return [int(p) for p in parts]

    def floats(s: str) -> List[float]:
        parts = s.replace(",", " ").split()
        return [float(p) for p in parts]

    kwargs: Dict[str, object] = {}
    for key, val in fields.items():
        if key == "tiling":
            sizes = ints(val)
            if len(sizes) != 2:
                raise ConfigError(f"tiling wants two integers, got {val!r}")
            kwargs["tiling"] = TilingSpec.regular(sizes[0], sizes[1])
        elif key == "radii":
            kwargs["radii"] = tuple(ints(val))
        elif key == "grid":
            kwargs["grid"] = tuple(floats(val))
        elif key in ("model", "boundary"):
            kwargs[key] = val
        elif key in _INT_FIELDS:
            kwargs[key] = int(val)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    for required in ("tiling", "radii", "model", "grid", "seed"):
        if required not in kwargs:
            raise ConfigError(f"missing config key {required!r}")
    try:
        return ExperimentConfig(**kwargs)  # type: ignore[arg-type]
    except TypeError as exc:
        raise ConfigError(str(exc))


def serialize_config(cfg: ExperimentConfig) -> str:
    face, degree = cfg.tiling.face_sizes[0], len(cfg.tiling.face_sizes)
    lines = [
        f"tiling = {face} {degree}",
        "radii = " + " ".join(str(r) for r in cfg.radii),
        f"model = {cfg.model}",
        "grid = " + " ".join(repr(x) for x in cfg.grid),
        f"boundary = {cfg.boundary}",
        f"chains = {cfg.chains}",
        f"sweeps = {cfg.sweeps}",
        f"burn_in = {cfg.burn_in}",
        f"thinning = {cfg.thinning}",
        f"seed = {cfg.seed}",
    ]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunRecord:
    """One estimator summary at one sweep coordinate."""

    tiling: Tuple[int, ...]
    radius: int
    model: str
    boundary: str
    parameter: float
    chains: int
    sweeps: int
    burn_in: int
    thinning: int
    seed: int
    stream_id: int
    estimator: str
    value: float
    stderr: float
    sample_count: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ConfigError(f"stderr {self.stderr} < 0")

    def to_json_line(self) -> str:
        d = asdict(self)
        d["tiling"] = list(self.tiling)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json_line(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        d["tiling"] = tuple(int(x) for x in d["tiling"])
        return cls(**d)


def write_records(records: Iterable[RunRecord], path: str) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json_line() + "\n")
            n += 1
    return n


def read_records(path: str) -> List[RunRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(RunRecord.from_json_line(line))
    return out


# -- estimation ----------------------------------------------------------------


def _estimate_sample(cfg: SiteConfig) -> Dict[str, float]:
    lab0 = site_clusters(cfg, 0)
    lab1 = site_clusters(cfg, 1)
    largest = 0
    if lab0.sizes.size:
        largest = int(lab0.sizes.max())
    if lab1.sizes.size:
        largest = max(largest, int(lab1.sizes.max()))
    n = cfg.map.n_vertices
    s0, s1, k_plus = proxy_triple(cfg)
    return {
        "plus_boundary_clusters": float(s1),
        "minus_boundary_clusters": float(s0),
        "phi_plus_proxy_count": float(k_plus),
        "largest_cluster_fraction": largest / n,
        "magnetization": float(2.0 * cfg.states.mean() - 1.0),
    }


_SPIN_OF = {"free": SpinBoundary.FREE, "plus": SpinBoundary.PLUS,
            "minus": SpinBoundary.MINUS, "wired": SpinBoundary.FREE}


def _site_samples(cfg: ExperimentConfig, m: CombinatorialMap, x: float,
                  rng: np.random.Generator) -> Tuple[np.ndarray, SpinBoundary]:
    """All thinned site samples for one (parameter, radius) block,
    stacked as (samples, V)."""
    n_keep = cfg.sweeps // cfg.thinning
    V = m.n_vertices

    if cfg.model == "Bernoulli":
        rows = (rng.random((cfg.chains * n_keep, V)) < x).astype(np.uint8)
        return rows, SpinBoundary.FREE

    spin = _SPIN_OF[cfg.boundary]

    def run_spins(coupling: float, states: Optional[np.ndarray],
                  n_sweeps: int) -> np.ndarray:
        return swendsen_wang_chain_batch(m, coupling, cfg.chains, n_sweeps,
                                         rng, boundary=spin, init=states)

    if cfg.model in ("Ising", "XOR"):
        couplings = 1 if cfg.model == "Ising" else 2
        chains = [run_spins(x, None, cfg.burn_in) for _ in range(couplings)]
        kept = []
        for _ in range(n_keep):
            chains = [run_spins(x, st, cfg.thinning) for st in chains]
            if cfg.model == "Ising":
                kept.append(chains[0].copy())
            else:
                kept.append((1 - (chains[0] ^ chains[1])).astype(np.uint8))
        boundary = spin if cfg.model == "Ising" else (
            SpinBoundary.FREE if spin is SpinBoundary.FREE
            else SpinBoundary.PLUS)
        return np.concatenate(kept, axis=0), boundary

    # FK: drive the spin chain at the coupled temperature, read bonds off
    # the spins (open agreeing edges independently), recolour the bonds
    coupling = -0.5 * math.log(1.0 - x)
    spin = SpinBoundary.FREE if cfg.boundary == "free" else SpinBoundary.PLUS
    ends = m.edge_endpoints()
    glue = (m.boundary_vertices if cfg.boundary == "wired" else None)
    from .samplers import _min_label_components, _uniform_spin_per_label

    states = run_spins(coupling, None, cfg.burn_in)
    kept = []
    for _ in range(n_keep):
        states = run_spins(coupling, states, cfg.thinning)
        agree = states[:, ends[:, 0]] == states[:, ends[:, 1]]
        opened = agree & (rng.random(agree.shape) < x)
        labels = _min_label_components(opened, ends, V, glue)
        kept.append(_uniform_spin_per_label(labels, rng))
    return np.concatenate(kept, axis=0), SpinBoundary.FREE


def sweep_budget(cfg: ExperimentConfig) -> int:
    """Total Markov sweeps the config will consume."""
    per_block = cfg.chains * (cfg.burn_in + cfg.sweeps)
    if cfg.model == "XOR":
        per_block *= 2
    return per_block * len(cfg.grid) * len(cfg.radii)


def run_sweep(cfg: ExperimentConfig) -> Iterator[RunRecord]:
    """One record per (grid point, radius, estimator), in that order.

    Fully deterministic under cfg.seed: each (grid, radius) block draws
    from its own numbered stream.  HYPERPERC_BUDGET, when set, caps the
    total sweep count before any work starts.
    """
    budget = os.environ.get(BUDGET_ENV)
    if budget is not None:
        need = sweep_budget(cfg)
        if need > int(budget):
            raise BudgetExceeded(
                f"sweep needs {need} sweeps, budget is {budget}")

    maps: Dict[int, CombinatorialMap] = {}
    for ri, radius in enumerate(cfg.radii):
        maps[radius] = build_ball(cfg.tiling, radius)

    for gi, x in enumerate(cfg.grid):
        for ri, radius in enumerate(cfg.radii):
            m = maps[radius]
            stream_id = gi * len(cfg.radii) + ri
            rng = RngSpec(cfg.seed, stream_id).generator()
            rows, spin = _site_samples(cfg, m, x, rng)
            table = {name: [] for name in ESTIMATORS}
            for row in rows:
                got = _estimate_sample(SiteConfig(m, row, spin))
                for name in ESTIMATORS:
                    table[name].append(got[name])
            n = len(rows)
            for name in ESTIMATORS:
                vals = np.asarray(table[name])
                stderr = (float(vals.std(ddof=1)) / math.sqrt(n)
                          if n > 1 else 0.0)
                yield RunRecord(
                    tiling=cfg.tiling.face_sizes, radius=radius,
                    model=cfg.model, boundary=cfg.boundary, parameter=x,
                    chains=cfg.chains, sweeps=cfg.sweeps,
                    burn_in=cfg.burn_in, thinning=cfg.thinning,
                    seed=cfg.seed, stream_id=stream_id, estimator=name,
                    value=float(vals.mean()), stderr=stderr, sample_count=n)


# -- trend verdicts ------------------------------------------------------------


@dataclass(frozen=True)
class TrendReport:
    estimator: str
    radii: Tuple[int, ...]
    medians: Tuple[float, ...]
    verdict: str
    fraction_nondecreasing: float
    fraction_nonincreasing: float
    n_bootstrap: int

    def to_json_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "radii": list(self.radii),
            "medians": list(self.medians),
            "verdict": self.verdict,
            "fraction_nondecreasing": self.fraction_nondecreasing,
            "fraction_nonincreasing": self.fraction_nonincreasing,
            "n_bootstrap": self.n_bootstrap,
        }


def growth_trend(records: Sequence[RunRecord], estimator: str,
                 confidence: float = 0.95, n_bootstrap: int = 1000,
                 rng_seed: int = 0) -> TrendReport:
    """Monotone-trend verdict for one estimator across radii.

    Resamples the per-radius records (parametrically through their standard
    errors) and reports how often the sequence of per-radius medians is
    monotone.  Verdicts: increasing, decreasing, flat, mixed; a sequence
    statistically indistinguishable from constant is flat.
    """
    by_radius: Dict[int, List[RunRecord]] = {}
    for r in records:
        if r.estimator == estimator:
            by_radius.setdefault(r.radius, []).append(r)
    radii = sorted(by_radius)
    if len(radii) < 3:
        raise InsufficientData(
            f"{len(radii)} radii for {estimator!r}, need at least 3")

    values = [np.array([rec.value for rec in by_radius[r]]) for r in radii]
    errs = [np.array([rec.stderr for rec in by_radius[r]]) for r in radii]
    medians = tuple(float(np.median(v)) for v in values)

    rng = np.random.default_rng(rng_seed)
    n_up = 0
    n_down = 0
    for _ in range(n_bootstrap):
        seq = []
        for v, e in zip(values, errs):
            idx = rng.integers(0, len(v), size=len(v))
            draw = v[idx] + e[idx] * rng.standard_normal(len(v))
            seq.append(np.median(draw))
        diffs = np.diff(seq)
        if (diffs >= -1e-12).all():
            n_up += 1
        if (diffs <= 1e-12).all():
            n_down += 1
    f_up = n_up / n_bootstrap
    f_down = n_down / n_bootstrap

    if f_up >= confidence and f_down >= confidence:
        verdict = "flat"
    elif f_up >= confidence:
        verdict = "increasing"
    elif f_down >= confidence:
        verdict = "decreasing"
    else:
        # indistinguishable from constant counts as flat
        pooled = float(np.median(np.concatenate(values)))
        tol = [max(2.0 * float(np.max(e)) if e.size else 0.0, 1e-12)
               for e in errs]
        if all(abs(m - pooled) <= t for m, t in zip(medians, tol)):
            verdict = "flat"
        else:
            verdict = "mixed"
    return TrendReport(estimator=estimator, radii=tuple(radii),
                       medians=medians, verdict=verdict,
                       fraction_nondecreasing=f_up,
                       fraction_nonincreasing=f_down,
                       n_bootstrap=n_bootstrap)


# -- site threshold proxy ------------------------------------------------------


@dataclass(frozen=True)
class PcEstimate:
    """Finite-size stand-in for the site threshold, not a rigorous value.

    Per radius: the density where the probability that the central face's
    open cluster reaches the boundary crosses one half.  The estimate
    extrapolates those crossings in 1/R; the bracket spans the crossings
    of the three largest radii, widened by one grid step.
    """

    tiling: Tuple[int, ...]
    p_grid: Tuple[float, ...]
    crossings_by_radius: Dict[int, float]
    estimate: float
    bracket: Tuple[float, float]
    n_samples_per_point: int
    note: str = "finite-size proxy from center-to-boundary reach"

    def to_json_dict(self) -> dict:
        return {
            "tiling": list(self.tiling),
            "p_grid": list(self.p_grid),
            "crossings_by_radius":
                {str(k): v for k, v in self.crossings_by_radius.items()},
            "estimate": self.estimate,
            "bracket": list(self.bracket),
            "n_samples_per_point": self.n_samples_per_point,
            "note": self.note,
        }


def _central_face_vertices(m: CombinatorialMap) -> np.ndarray:
    darts = np.flatnonzero(m.face_of == 0)
    return np.unique(m.vertex_of[darts])


def _reach_probability(m: CombinatorialMap, p: float, n_samples: int,
                       rng: np.random.Generator) -> float:
    """P(some open vertex of the central face joins an open boundary
    vertex through open vertices)."""
    from .samplers import _min_label_components

    V = m.n_vertices
    ends = m.edge_endpoints()
    center = _central_face_vertices(m)
    bmask = m.boundary_vertex_mask()
    hits = 0
    step = max(1, min(n_samples, 512))
    done = 0
    while done < n_samples:
        rows = min(step, n_samples - done)
        open_v = rng.random((rows, V)) < p
        open_e = open_v[:, ends[:, 0]] & open_v[:, ends[:, 1]]
        labels = _min_label_components(open_e, ends, V)
        for i in range(rows):
            cl = set(labels[i, center[open_v[i, center]]].tolist())
            if not cl:
                continue
            bl = labels[i, bmask & open_v[i]]
            if np.isin(bl, list(cl)).any():
                hits += 1
        done += rows
    return hits / n_samples


def estimate_pc_site(tiling: TilingSpec, radii: Sequence[int],
                     seeds: Sequence[int],
                     p_grid: Optional[Sequence[float]] = None,
                     samples_per_seed: int = 200) -> PcEstimate:
    """Bracketed crossing density for center-to-boundary reach.

    Needs at least three radii to say anything about the trend in R; the
    reach curves are monotonized before interpolating the half-crossing.
    """
    radii = sorted(set(int(r) for r in radii))
    if len(radii) < 3:
        raise InsufficientData(f"{len(radii)} radii, need at least 3")
    if not seeds:
        raise InsufficientData("no seeds")
    if p_grid is None:
        p_grid = [round(0.05 * i, 10) for i in range(1, 20)]
    p_grid = [float(p) for p in p_grid]

    crossings: Dict[int, float] = {}
    n_per_point = samples_per_seed * len(seeds)
    for ri, radius in enumerate(radii):
        m = build_ball(tiling, radius)
        curve = []
        for pi, p in enumerate(p_grid):
            acc = 0.0
            for si, seed in enumerate(seeds):
                stream = (ri * len(p_grid) + pi) * len(seeds) + si
                rng = RngSpec(int(seed), stream).generator()
                acc += _reach_probability(m, p, samples_per_seed, rng)
            curve.append(acc / len(seeds))
        curve = np.maximum.accumulate(curve)
        crossings[radius] = _half_crossing(p_grid, curve)

    xs = np.array([1.0 / r for r in radii[-3:]])
    ys = np.array([crossings[r] for r in radii[-3:]])
    slope, intercept = np.polyfit(xs, ys, 1)
    estimate = float(np.clip(intercept, 0.0, 1.0))
    step = max(p_grid[i + 1] - p_grid[i] for i in range(len(p_grid) - 1))
    lo = min(ys.min(), estimate) - step
    hi = max(ys.max(), estimate) + step
    return PcEstimate(tiling=tiling.face_sizes, p_grid=tuple(p_grid),
                      crossings_by_radius=crossings, estimate=estimate,
                      bracket=(max(0.0, float(lo)), min(1.0, float(hi))),
                      n_samples_per_point=n_per_point)


def _half_crossing(p_grid: Sequence[float], curve: np.ndarray) -> float:
    if curve[0] >= 0.5:
        return float(p_grid[0])
    if curve[-1] < 0.5:
        return float(p_grid[-1])
    i = int(np.argmax(curve >= 0.5))
    p0, p1 = p_grid[i - 1], p_grid[i]
    y0, y1 = float(curve[i - 1]), float(curve[i])
    if y1 == y0:
        return float(p1)
    return float(p0 + (0.5 - y0) * (p1 - p0) / (y1 - y0))
