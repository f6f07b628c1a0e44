"""Cramér-Rao lower bound for range-difference localization.

Builds the Fisher information J = H cov^+ H^T where the columns of H are
the gradients of the range differences,

    h_ij = (x - y_i)/||x - y_i|| - (x - y_j)/||x - y_j||,

and cov is the covariance of the range-difference noise.  Because the
differences are formed from one noise term per sensor, cov is singular
for m >= 3 (rank m-1); the Moore-Penrose pseudoinverse gives the Fisher
information of the underlying (m-1)-dimensional statistic and is
invariant to sensor relabeling.  The scalar bound is
sqrt(trace(J^{-1})), reported as +inf when J is singular.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import SensorSingularityError
from .scenario import NoiseModel, as_position, sensor_coords, unordered_pairs


@dataclass(frozen=True)
class CrlbReport:
    fisher: np.ndarray   # (n, n) symmetric PSD
    cov_rank: int
    rmse_bound: float    # [m]; +inf when the Fisher matrix is singular

    def to_dict(self) -> dict:
        return {
            "fisher": self.fisher.tolist(),
            "cov_rank": self.cov_rank,
            "rmse_bound": self.rmse_bound,
        }

    def save_json(self, path) -> None:
        # non-finite bounds serialize as Infinity (json module convention)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def range_variance(D: float, noise: NoiseModel) -> float:
    """Variance [m^2] of a single range estimate at source distance D [m].

    For a sinusoidal source of frequency f0 received with noise power
    sigma2 and sampled at fs_factor * f0:

        var = sigma2 * c^2 * D^4 / ((fs_factor/2) * (c^2 + 4 pi^2 f0^2 D^2))

    which grows ~D^2 at long range and ~D^4 when the phase term is small.
    """
    if not D > 0:
        raise ValueError("distance D must be > 0")
    num = noise.sigma2 * noise.c ** 2 * D ** 4
    den = (noise.fs_factor / 2.0) * (noise.c ** 2 + 4.0 * math.pi ** 2 * noise.f0 ** 2 * D ** 2)
    return num / den


def _oriented_pairs(x: np.ndarray, coords: np.ndarray) -> list[tuple[int, int]]:
    """Pairs in ascending (i < j) enumeration, oriented by the sign of the
    true difference (ties keep i < j) — the same order and orientation a
    zero-noise measurement set stores."""
    d = np.linalg.norm(x[None, :] - coords, axis=1)
    out = []
    for (i, j) in unordered_pairs(coords.shape[0]):
        if d[i - 1] - d[j - 1] >= 0:
            out.append((i, j))
        else:
            out.append((j, i))
    return out


def rd_covariance(x, array, noise: NoiseModel) -> np.ndarray:
    """Covariance of the range-difference noise vector, (m_hat, m_hat).

    Row/column order and orientation follow the zero-noise measurement
    set at x (ascending pair enumeration, value-sign orientation).  With
    eps_ab = eps_a - eps_b and independent per-sensor noise, the entry for
    pairs (a, b) and (c, d) is

        delta_ac var_a - delta_ad var_a - delta_bc var_b + delta_bd var_b.
    """
    coords = sensor_coords(array)
    p = as_position(x, coords.shape[1])
    d = np.linalg.norm(p[None, :] - coords, axis=1)
    for k, dk in enumerate(d):
        if dk <= 0:
            raise SensorSingularityError(k + 1)
    var = np.array([range_variance(dk, noise) for dk in d])
    pairs = _oriented_pairs(p, coords)
    mh = len(pairs)
    cov = np.zeros((mh, mh))
    for a in range(mh):
        ia, ja = pairs[a]
        for b in range(a, mh):
            ib, jb = pairs[b]
            v = 0.0
            if ia == ib:
                v += var[ia - 1]
            if ia == jb:
                v -= var[ia - 1]
            if ja == ib:
                v -= var[ja - 1]
            if ja == jb:
                v += var[ja - 1]
            cov[a, b] = cov[b, a] = v
    return cov


def fisher(x, array, noise: NoiseModel) -> CrlbReport:
    """Fisher information and RMSE lower bound at the true source x.

    J is invariant to flipping the orientation of any pair (both the h
    column and the corresponding covariance row/column change sign), so
    the report does not depend on measurement noise realizations.
    """
    coords = sensor_coords(array)
    p = as_position(x, coords.shape[1])
    d = np.linalg.norm(p[None, :] - coords, axis=1)
    for k, dk in enumerate(d):
        if dk <= 0:
            raise SensorSingularityError(k + 1)
    units = (p[None, :] - coords) / d[:, None]
    pairs = _oriented_pairs(p, coords)
    H = np.column_stack([units[i - 1] - units[j - 1] for (i, j) in pairs])
    cov = rd_covariance(p, coords, noise)
    J = H @ np.linalg.pinv(cov) @ H.T
    J = 0.5 * (J + J.T)
    cov_rank = int(np.linalg.matrix_rank(cov))
    eigs = np.linalg.eigvalsh(J)
    if eigs[-1] > 0 and eigs[0] > 1e-12 * eigs[-1]:
        rmse = math.sqrt(float(np.sum(1.0 / eigs)))
    else:
        rmse = math.inf
    return CrlbReport(fisher=J, cov_rank=cov_rank, rmse_bound=rmse)
