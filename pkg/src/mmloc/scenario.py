"""Sensor geometries, the noise model, and synthetic measurement generation.

Measurements follow the additive model r_i = ||x - y_i|| + eps_i with
independent zero-mean Gaussian eps_i per sensor.  The per-sensor variance
is distance dependent (see crlb.range_variance).  Range differences are
formed by differencing one noise draw per sensor, so entries that share a
sensor are correlated by construction, and each stored entry is oriented
so that its value is nonnegative.

All containers are immutable after construction; generation functions are
pure given (inputs, seed).  Random draws use numpy's default PCG64
generator, which is what output metadata records.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

# sensors closer than this are considered coincident [m]
COINCIDENT_TOL = 1e-12


def as_position(x, n: int | None = None) -> np.ndarray:
    """Validate and return a position as a float vector of length 2 or 3."""
    p = np.asarray(x, dtype=float).reshape(-1)
    if p.size not in (2, 3):
        raise ValueError(f"position must have 2 or 3 coordinates, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("position coordinates must be finite")
    if n is not None and p.size != n:
        raise ValueError(f"position has dimension {p.size}, expected {n}")
    return p


@dataclass(frozen=True)
class SensorArray:
    """An ordered set of m >= 2 distinct sensor positions (1-indexed accessors)."""

    sensors: np.ndarray  # (m, n) [m]

    def __post_init__(self):
        arr = np.asarray(self.sensors, dtype=float)
        if arr.ndim != 2:
            raise ValueError("sensors must be a 2-D array of shape (m, n)")
        m, n = arr.shape
        if m < 2:
            raise ValueError(f"need at least 2 sensors, got {m}")
        if n not in (2, 3):
            raise ValueError(f"sensor dimension must be 2 or 3, got {n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sensor coordinates must be finite")
        for i in range(m):
            for j in range(i + 1, m):
                if np.linalg.norm(arr[i] - arr[j]) <= COINCIDENT_TOL:
                    raise ValueError(f"sensors {i + 1} and {j + 1} coincide")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "sensors", arr)

    @property
    def m(self) -> int:
        return self.sensors.shape[0]

    @property
    def n(self) -> int:
        return self.sensors.shape[1]

    def sensor(self, i: int) -> np.ndarray:
        """Position of sensor i (1-based)."""
        if not 1 <= i <= self.m:
            raise IndexError(f"sensor index {i} out of range 1..{self.m}")
        return self.sensors[i - 1]

    def centroid(self) -> np.ndarray:
        return self.sensors.mean(axis=0)


def sensor_coords(array) -> np.ndarray:
    """Coordinates of a SensorArray, or a raw (m, n) array passed through.

    Raw arrays are accepted so that the objective and solver functions can
    be evaluated on configurations (e.g. a single sensor) that the
    SensorArray container deliberately rejects.
    """
    if isinstance(array, SensorArray):
        return array.sensors
    arr = np.asarray(array, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError("sensor coordinates must have shape (m, 2) or (m, 3)")
    if arr.shape[0] < 1:
        raise ValueError("need at least one sensor")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sensor coordinates must be finite")
    return arr


@dataclass(frozen=True)
class RangeDiffSet:
    """All m(m-1)/2 distinct range-difference measurements.

    Entry k states ||x - y_i[k]|| - ||x - y_j[k]|| ~= values[k] with
    values[k] >= 0; the (i, j) orientation encodes the sign.  Indices are
    1-based.  Every unordered sensor pair appears exactly once.
    """

    i: np.ndarray        # (m_hat,) int, 1-based
    j: np.ndarray        # (m_hat,) int, 1-based
    values: np.ndarray   # (m_hat,) float [m], >= 0
    m: int               # number of sensors

    def __post_init__(self):
        ii = np.asarray(self.i, dtype=int)
        jj = np.asarray(self.j, dtype=int)
        vv = np.asarray(self.values, dtype=float)
        if not (ii.shape == jj.shape == vv.shape) or ii.ndim != 1:
            raise ValueError("i, j, values must be 1-D arrays of equal length")
        m = int(self.m)
        if m < 2:
            raise ValueError("need at least 2 sensors")
        expected = m * (m - 1) // 2
        if ii.size != expected:
            raise ValueError(f"expected {expected} entries for m={m}, got {ii.size}")
        if np.any((ii < 1) | (ii > m)) or np.any((jj < 1) | (jj > m)):
            raise ValueError("pair indices out of range")
        if np.any(ii == jj):
            raise ValueError("pair indices must differ")
        seen = {frozenset((a, b)) for a, b in zip(ii, jj)}
        if len(seen) != expected:
            raise ValueError("each unordered pair must appear exactly once")
        if not np.all(np.isfinite(vv)):
            raise ValueError("range differences must be finite")
        if np.any(vv < 0):
            raise ValueError("stored range differences must be >= 0 (flip i,j instead)")
        for name, arr in (("i", ii), ("j", jj), ("values", vv)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "m", m)

    @property
    def n_pairs(self) -> int:
        return self.values.size

    def entries(self):
        """Yield (i, j, value) tuples with plain Python scalars."""
        for a, b, v in zip(self.i, self.j, self.values):
            yield int(a), int(b), float(v)


@dataclass(frozen=True)
class NoiseModel:
    """Receiver/propagation parameters that drive both simulation and the CRLB."""

    sigma2: float            # receiver output noise variance (dimensionless power)
    f0: float                # source frequency [Hz]
    c: float                 # propagation speed [m/s]
    fs_factor: float = 4.0   # sampling rate as a multiple of f0

    def __post_init__(self):
        if not (self.sigma2 >= 0 and math.isfinite(self.sigma2)):
            raise ValueError("sigma2 must be finite and >= 0")
        if not (self.f0 > 0 and math.isfinite(self.f0)):
            raise ValueError("f0 must be finite and > 0")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError("c must be finite and > 0")
        if not (self.fs_factor > 0 and math.isfinite(self.fs_factor)):
            raise ValueError("fs_factor must be finite and > 0")


# ---------------------------------------------------------------------------
# array constructors
# ---------------------------------------------------------------------------

def circular_array(m: int, radius: float) -> SensorArray:
    """m sensors on a circle: sensor i at radius*[cos(2*pi*i/m), sin(2*pi*i/m)]."""
    if m < 2:
        raise ValueError(f"need at least 2 sensors, got {m}")
    if not radius > 0:
        raise ValueError("radius must be > 0")
    idx = np.arange(1, m + 1)
    ang = 2.0 * np.pi * idx / m
    return SensorArray(radius * np.column_stack([np.cos(ang), np.sin(ang)]))


def rhombus_array() -> SensorArray:
    """Four sensors at [0,10], [10,0], [0,-10], [-10,0]."""
    return SensorArray(np.array([[0.0, 10.0], [10.0, 0.0], [0.0, -10.0], [-10.0, 0.0]]))


def linear_array() -> SensorArray:
    """Four collinear sensors at [5,0], [5,10], [5,20], [5,30]."""
    return SensorArray(np.array([[5.0, 0.0], [5.0, 10.0], [5.0, 20.0], [5.0, 30.0]]))


def random_array(m: int, lo: float, hi: float, n: int = 2, seed=None) -> SensorArray:
    """Sensors with i.i.d. uniform coordinates in [lo, hi]^n, deterministic given seed."""
    if m < 2:
        raise ValueError(f"need at least 2 sensors, got {m}")
    if not lo < hi:
        raise ValueError(f"degenerate bounds: lo={lo} must be < hi={hi}")
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        coords = rng.uniform(lo, hi, size=(m, n))
        dmin = min(
            np.linalg.norm(coords[i] - coords[j])
            for i in range(m) for j in range(i + 1, m)
        )
        if dmin > COINCIDENT_TOL:
            return SensorArray(coords)
    raise RuntimeError("could not draw a non-coincident sensor array in 100 attempts")


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def unordered_pairs(m: int) -> list[tuple[int, int]]:
    """All (i, j) with 1 <= i < j <= m in ascending enumeration order."""
    return [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]


def true_ranges(x, array) -> np.ndarray:
    """Euclidean distances ||x - y_i||, one per sensor [m]."""
    coords = sensor_coords(array)
    p = as_position(x, coords.shape[1])
    return np.linalg.norm(p - coords, axis=1)


def snr_to_sigma2(snr_db: float) -> float:
    """Map an SNR in dB to a noise variance under a unit-signal-power convention.

    sigma2 = 10**(-snr_db / 10).  This mapping is a convention of this
    package; it is recorded here and in benchmark metadata so that RMSE
    curves are comparable run to run.
    """
    if not math.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return 10.0 ** (-snr_db / 10.0)


def range_noise_std(x, array, noise: NoiseModel) -> np.ndarray:
    """Per-sensor noise standard deviations [m] at the true source position.

    The variance is distance dependent; a sensor at zero distance gets the
    limiting value 0.
    """
    from .crlb import range_variance  # local import to avoid a module cycle

    d = true_ranges(x, array)
    out = np.zeros_like(d)
    for k, dk in enumerate(d):
        if dk > 0:
            out[k] = math.sqrt(range_variance(dk, noise))
    return out


def noisy_ranges(x, array, noise: NoiseModel, seed=None) -> np.ndarray:
    """Draw r_i = ||x - y_i|| + eps_i with per-sensor Gaussian noise.

    Values are not clamped: at realistic noise levels negativity is
    improbable, and clamping would bias downstream estimators.  A warning
    reports any non-positive draws.
    """
    d = true_ranges(x, array)
    if noise.sigma2 == 0:
        return d
    std = range_noise_std(x, array, noise)
    rng = np.random.default_rng(seed)
    r = d + rng.standard_normal(d.size) * std
    bad = int(np.sum(r <= 0))
    if bad:
        warnings.warn(f"{bad} noisy range(s) non-positive; kept unclamped", stacklevel=2)
    return r


def rangediffs_from_ranges(ranges) -> RangeDiffSet:
    """Pairwise differences r_i - r_j for i < j, oriented so stored values are >= 0.

    Ties (difference exactly 0) keep the (i, j) order with i < j.
    """
    r = np.asarray(ranges, dtype=float).reshape(-1)
    m = r.size
    if m < 2:
        raise ValueError("need at least 2 ranges")
    ii, jj, vv = [], [], []
    for (i, j) in unordered_pairs(m):
        v = r[i - 1] - r[j - 1]
        if v >= 0:
            ii.append(i); jj.append(j); vv.append(v)
        else:
            ii.append(j); jj.append(i); vv.append(-v)
    return RangeDiffSet(np.array(ii), np.array(jj), np.array(vv), m)


def noisy_rangediffs(x, array, noise: NoiseModel, seed=None) -> RangeDiffSet:
    """All distinct range differences from a single per-sensor noise draw.

    Same seed convention as noisy_ranges: the differences reconstruct the
    underlying noisy ranges exactly, entry for entry.
    """
    return rangediffs_from_ranges(noisy_ranges(x, array, noise, seed))


# ---------------------------------------------------------------------------
# scenario files and measurement CSV
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A complete simulation setup: sensors, true source, noise, seed."""

    array: SensorArray
    source: np.ndarray
    noise: NoiseModel
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "source", as_position(self.source, self.array.n))


def save_scenario(path, scen: Scenario) -> None:
    doc = {
        "n": scen.array.n,
        "sensors": scen.array.sensors.tolist(),
        "source": scen.source.tolist(),
        "noise": {
            "sigma2": scen.noise.sigma2,
            "f0": scen.noise.f0,
            "c": scen.noise.c,
            "fs_factor": scen.noise.fs_factor,
        },
        "seed": scen.seed,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        doc = json.load(fh)
    array = SensorArray(np.asarray(doc["sensors"], dtype=float))
    if array.n != int(doc["n"]):
        raise ValueError("scenario dimension field disagrees with sensor coordinates")
    noise = NoiseModel(
        sigma2=float(doc["noise"]["sigma2"]),
        f0=float(doc["noise"]["f0"]),
        c=float(doc["noise"]["c"]),
        fs_factor=float(doc["noise"].get("fs_factor", 4.0)),
    )
    seed = doc.get("seed")
    return Scenario(array, np.asarray(doc["source"], dtype=float), noise,
                    None if seed is None else int(seed))


def write_ranges_csv(path, ranges) -> None:
    r = np.asarray(ranges, dtype=float).reshape(-1)
    with open(path, "w") as fh:
        fh.write("i,r_i\n")
        for k, v in enumerate(r, start=1):
            fh.write(f"{k},{float(v)!r}\n")


def read_ranges_csv(path) -> np.ndarray:
    values = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "i,r_i":
            raise ValueError(f"expected header 'i,r_i', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i_s, v_s = line.split(",")
            values[int(i_s)] = float(v_s)
    m = len(values)
    if sorted(values) != list(range(1, m + 1)):
        raise ValueError("range CSV must contain sensors 1..m exactly once each")
    return np.array([values[i] for i in range(1, m + 1)])


def write_rangediffs_csv(path, rd: RangeDiffSet) -> None:
    with open(path, "w") as fh:
        fh.write("i,j,r_ij\n")
        for i, j, v in rd.entries():
            fh.write(f"{i},{j},{v!r}\n")


def read_rangediffs_csv(path) -> RangeDiffSet:
    ii, jj, vv = [], [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "i,j,r_ij":
            raise ValueError(f"expected header 'i,j,r_ij', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i_s, j_s, v_s = line.split(",")
            ii.append(int(i_s)); jj.append(int(j_s)); vv.append(float(v_s))
    if not ii:
        raise ValueError("empty range-difference CSV")
    m = max(max(ii), max(jj))
    return RangeDiffSet(np.array(ii), np.array(jj), np.array(vv), m)
