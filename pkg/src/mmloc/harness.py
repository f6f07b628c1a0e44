"""Experiment runner: convergence traces, RMSE sweeps over SNR or source
frequency, and CRLB overlays, driven by a JSON config.

Reproducibility contract: (config, seed) determines every output byte.
The master seed is split into independent streams for scenario
generation, the trace measurement draw, and the per-trial noise; each
trial's noise is drawn once as unit normals and rescaled per sweep value
(common random numbers), so RMSE curves differ across the sweep only
through the noise level, not the realization.  Per-trial seeding also
makes results independent of any execution order or worker count.

Failed trials (singular step systems) are excluded from the RMSE average
and counted in the "failed" column; this policy is recorded in the
metadata sidecar.
"""

from __future__ import annotations

import importlib.metadata
import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from . import crlb as _crlb
from . import initializer as _init
from . import scenario as _scen
from . import sfp as _sfp
from . import solvit as _solvit
from .errors import LocalizationError

_GENERATOR_ID = "numpy default_rng (PCG64)"

_INIT_CHOICES = ("proposed", "random", "fixed", "centroid", "both")


@dataclass
class RmseRow:
    sweep: float          # SNR [dB] or frequency [Hz]
    rmse: float           # [m]
    crlb: float           # [m]; NaN when no bound applies, inf when unbounded
    trials_failed: int

    def __post_init__(self):
        if not (self.rmse >= 0 or math.isnan(self.rmse)):
            raise ValueError("rmse must be >= 0")
        if self.trials_failed < 0:
            raise ValueError("trials_failed must be >= 0")


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment.

    scenario: either {"file": <scenario json path>} or
        {"sensors": {...}, "source": [...] | {"uniform": [lo, hi]},
         "noise": {"f0":.., "c":.., "fs_factor":..}}
        with sensors one of
        {"kind": "circular", "m":.., "radius":..} | {"kind": "rhombus"}
        | {"kind": "linear"}
        | {"kind": "random", "m":.., "lo":.., "hi":.., "n":..}.
    snr_grid / freq_grid: exactly one non-empty for RMSE sweeps.  A
        frequency sweep holds the SNR at snr_db.  Infinite SNR entries
        mean zero noise.
    init: proposed | random | fixed | centroid | both ("both" only for
        traces; "fixed" requires init_point; sfp cannot use "proposed"
        since the hyperbola scheme needs range differences).
    """

    scenario: dict
    snr_grid: list[float] | None = None
    freq_grid: list[float] | None = None
    snr_db: float = 0.0
    trials: int = 500
    solver: str = "solvit"
    init: str = "proposed"
    init_point: list[float] | None = None
    seed: int = 0
    tol: float = 1e-4
    max_iter: int = 500

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.solver not in ("solvit", "sfp"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.init not in _INIT_CHOICES:
            raise ValueError(f"init must be one of {_INIT_CHOICES}")
        if self.solver == "sfp" and self.init in ("proposed", "both"):
            raise ValueError(
                "sfp consumes ranges; the proposed initializer needs range "
                "differences — use init=centroid, random, or fixed"
            )
        if self.init == "fixed" and self.init_point is None:
            raise ValueError("init=fixed requires init_point")
        if not isinstance(self.scenario, dict) or not self.scenario:
            raise ValueError("scenario spec must be a non-empty object")

    def solver_config(self) -> _solvit.SolverConfig:
        return _solvit.SolverConfig(tol=self.tol, max_iter=self.max_iter)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            doc = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**doc)

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# scenario resolution
# ---------------------------------------------------------------------------

def _build_array(spec: dict, rng) -> _scen.SensorArray:
    kind = spec.get("kind")
    if kind == "circular":
        return _scen.circular_array(int(spec["m"]), float(spec["radius"]))
    if kind == "rhombus":
        return _scen.rhombus_array()
    if kind == "linear":
        return _scen.linear_array()
    if kind == "random":
        return _scen.random_array(int(spec["m"]), float(spec["lo"]), float(spec["hi"]),
                                  n=int(spec.get("n", 2)), seed=rng)
    raise ValueError(f"unknown sensor kind {kind!r}")


def _resolve_scenario(spec: dict, rng):
    """Return (array, source, noise-template dict without sigma2)."""
    if "file" in spec:
        scen = _scen.load_scenario(spec["file"])
        noise = {"f0": scen.noise.f0, "c": scen.noise.c,
                 "fs_factor": scen.noise.fs_factor}
        return scen.array, scen.source, noise
    array = _build_array(spec["sensors"], rng)
    src_spec = spec["source"]
    if isinstance(src_spec, dict):
        lo, hi = (float(v) for v in src_spec["uniform"])
        source = rng.uniform(lo, hi, size=array.n)
    else:
        source = _scen.as_position(src_spec, array.n)
    noise_spec = spec.get("noise", {})
    noise = {
        "f0": float(noise_spec.get("f0", 1000.0)),
        "c": float(noise_spec.get("c", 340.0)),
        "fs_factor": float(noise_spec.get("fs_factor", 4.0)),
    }
    return array, source, noise


def _noise_at(noise_template: dict, sigma2: float, f0: float | None = None) -> _scen.NoiseModel:
    return _scen.NoiseModel(
        sigma2=sigma2,
        f0=noise_template["f0"] if f0 is None else f0,
        c=noise_template["c"],
        fs_factor=noise_template["fs_factor"],
    )


def _sigma2_of(snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    return _scen.snr_to_sigma2(snr_db)


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

def _pick_x0(init: str, cfg: ExperimentConfig, array, rd, init_seed):
    if init == "proposed":
        return _init.init_point(array, rd, _init.InitConfig(seed=init_seed))
    if init == "random":
        return np.random.default_rng(init_seed).uniform(0.0, 1.0, size=array.n)
    if init == "fixed":
        return _scen.as_position(cfg.init_point, array.n)
    if init == "centroid":
        return array.centroid()
    raise ValueError(f"init {init!r} not valid here")


def run_trace(cfg: ExperimentConfig, out_dir=None) -> dict:
    """One solve per requested initialization, with full iterate traces.

    Noise level comes from cfg.snr_db.  Returns {init_name: (estimate,
    SolveTrace)}; with out_dir set, each trace is also written to
    trace_<init_name>.csv.
    """
    master = np.random.SeedSequence(cfg.seed)
    scen_ss, meas_ss, init_ss = master.spawn(3)
    array, source, noise_t = _resolve_scenario(cfg.scenario, np.random.default_rng(scen_ss))
    noise = _noise_at(noise_t, _sigma2_of(cfg.snr_db))
    solver_cfg = cfg.solver_config()
    init_names = ["proposed", "random"] if cfg.init == "both" else [cfg.init]
    init_seeds = init_ss.spawn(len(init_names))

    # one measurement draw shared by every initialization
    if cfg.solver == "solvit":
        rd = _scen.noisy_rangediffs(source, array, noise,
                                    seed=np.random.default_rng(meas_ss))
    else:
        ranges = _scen.noisy_ranges(source, array, noise,
                                    seed=np.random.default_rng(meas_ss))

    results = {}
    for name, init_seed in zip(init_names, init_seeds):
        if cfg.solver == "solvit":
            x0 = _pick_x0(name, cfg, array, rd, init_seed)
            est, trace = _solvit.solvit_solve(x0, array, rd, solver_cfg)
        else:
            x0 = None if name == "centroid" else _pick_x0(name, cfg, array, None, init_seed)
            est, trace = _sfp.sfp_solve(x0, array, ranges, solver_cfg)
        results[name] = (est, trace)
        if out_dir is not None:
            _solvit.write_trace_csv(os.path.join(out_dir, f"trace_{name}.csv"), trace)
    return results


def run_rmse_sweep(cfg: ExperimentConfig) -> list[RmseRow]:
    """RMSE across the SNR or frequency grid, with a CRLB column.

    RMSE is sqrt(mean over successful trials of squared position error).
    The CRLB column is the range-difference bound at the true source; for
    the range-only solver no bound is implemented and NaN is written.
    """
    if bool(cfg.snr_grid) == bool(cfg.freq_grid):
        raise ValueError("exactly one of snr_grid / freq_grid must be non-empty")
    sweep = list(cfg.snr_grid or cfg.freq_grid)
    by_freq = cfg.freq_grid is not None and len(cfg.freq_grid) > 0

    master = np.random.SeedSequence(cfg.seed)
    scen_ss, _meas_ss, trial_ss = master.spawn(3)
    array, source, noise_t = _resolve_scenario(cfg.scenario, np.random.default_rng(scen_ss))
    solver_cfg = cfg.solver_config()
    d_true = _scen.true_ranges(source, array)

    # one unit-noise draw and one init seed per trial, shared across the sweep
    trial_states = []
    for ss in trial_ss.spawn(cfg.trials):
        rng_t = np.random.default_rng(ss)
        trial_states.append((rng_t.standard_normal(array.m),
                             int(rng_t.integers(2 ** 63))))

    rows = []
    for value in sweep:
        if by_freq:
            noise = _noise_at(noise_t, _sigma2_of(cfg.snr_db), f0=float(value))
        else:
            noise = _noise_at(noise_t, _sigma2_of(float(value)))
        std = _scen.range_noise_std(source, array, noise)
        if cfg.solver == "solvit":
            bound = _crlb.fisher(source, array, noise).rmse_bound
        else:
            bound = math.nan
        sqerrs = []
        failed = 0
        for eps_unit, init_seed in trial_states:
            meas = d_true + eps_unit * std
            try:
                if cfg.solver == "solvit":
                    rd = _scen.rangediffs_from_ranges(meas)
                    x0 = _pick_x0(cfg.init, cfg, array, rd, init_seed)
                    est, trace = _solvit.solvit_solve(x0, array, rd, solver_cfg)
                else:
                    x0 = (None if cfg.init == "centroid"
                          else _pick_x0(cfg.init, cfg, array, None, init_seed))
                    est, trace = _sfp.sfp_solve(x0, array, meas, solver_cfg)
            except LocalizationError:
                failed += 1
                continue
            if trace.status == _solvit.SINGULAR_SYSTEM:
                failed += 1
                continue
            sqerrs.append(float(np.sum((est - source) ** 2)))
        rmse = math.sqrt(sum(sqerrs) / len(sqerrs)) if sqerrs else math.inf
        rows.append(RmseRow(sweep=float(value), rmse=rmse, crlb=bound,
                            trials_failed=failed))
    return rows


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def write_rmse_csv(path, rows) -> None:
    with open(path, "w") as fh:
        fh.write("sweep,rmse,crlb,failed\n")
        for row in rows:
            fh.write(f"{row.sweep!r},{row.rmse!r},{row.crlb!r},{row.trials_failed}\n")


def read_rmse_csv(path) -> list[RmseRow]:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "sweep,rmse,crlb,failed":
            raise ValueError(f"expected header 'sweep,rmse,crlb,failed', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            s, r, c, f = line.split(",")
            rows.append(RmseRow(float(s), float(r), float(c), int(f)))
    return rows


def _pkg_version() -> str:
    try:
        return importlib.metadata.version("mmloc")
    except importlib.metadata.PackageNotFoundError:  # pragma: no cover
        return "unknown"


def write_metadata(path, cfg: ExperimentConfig) -> None:
    """JSON sidecar recording everything needed to reproduce a result file."""
    doc = {
        "seed": cfg.seed,
        "generator": _GENERATOR_ID,
        "solver": {
            "name": cfg.solver,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "init": cfg.init,
            "init_point": cfg.init_point,
        },
        "trials": cfg.trials,
        "snr_db": cfg.snr_db,
        "snr_to_sigma2": "10**(-snr_db/10), unit signal power",
        "failed_policy": "failed trials excluded from RMSE, counted in the failed column",
        "crlb_column": "range-difference bound at the true source; NaN for the range-only solver",
        "version": _pkg_version(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
