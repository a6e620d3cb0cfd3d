"""Milestone point clouds and kernel-density anomaly scoring.

At a control milestone every simulated run is rewound to the moment its
earned curve matches the underway project's earned value; the resulting
(time, actual-work) pairs form a point cloud whose density ranks how
unusual the observed project state is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sedm.curves import CumulativeCurve, earned_time
from sedm.simulate import SimulationStore, TrajectoryRecord


class DegenerateBandwidthError(ValueError):
    """Samples have no spread; KDE cannot be fitted. Skip density scoring."""


@dataclass
class PointCloud:
    """One (ad_j, tad_j) pair per simulated run at a common earned value."""

    ad: np.ndarray
    tad: np.ndarray
    run_ids: np.ndarray
    ted_target: float

    def __len__(self) -> int:
        return len(self.ad)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("run_id,ad_j,tad_j\n")
            for rid, x, y in zip(self.run_ids, self.ad, self.tad):
                fh.write(f"{rid},{float(x)!r},{float(y)!r}\n")


def match_progress(record: TrajectoryRecord, ted_target: float) -> tuple[float, float]:
    """Rewind one trajectory to the time its earned curve hits ted_target;
    return that time and the actual-work value there (both interpolated)."""
    if record.ted is None:
        raise ValueError("record has no stored trajectory")
    curve = CumulativeCurve(measure="work-periods", values=record.ted)
    ad_j = earned_time(curve, ted_target)
    tad_j = float(np.interp(ad_j, np.arange(len(record.tad)), record.tad))
    return ad_j, tad_j


def build_point_cloud(store: SimulationStore, ted_target: float) -> PointCloud:
    """match_progress over every run, vectorized through the padded curves."""
    if not store.has_trajectories():
        raise ValueError("store was saved without trajectories; cannot build cloud")
    ted, tad = store.curve_matrices()
    n, width = ted.shape
    final = ted[:, -1]
    if ted_target < -1e-9 or ted_target > final.max() + 1e-6:
        raise ValueError(f"ted target {ted_target} outside trajectory range")
    # last index with value <= target; rows are non-decreasing
    t = np.sum(ted <= ted_target, axis=1) - 1
    t = np.clip(t, 0, width - 1)
    at_end = (t >= width - 1) | (ted_target >= final - 1e-9)
    t_safe = np.minimum(t, width - 2)
    rows = np.arange(n)
    v0 = ted[rows, t_safe]
    v1 = ted[rows, t_safe + 1]
    denom = np.where(v1 > v0, v1 - v0, 1.0)
    frac = np.clip((ted_target - v0) / denom, 0.0, 1.0)
    # curves are padded flat past their own end: cap at the true curve end
    ends = np.array([len(r.ted) - 1 for r in store.records], dtype=float)
    ad = np.where(at_end, ends, t_safe + frac)
    x0 = tad[rows, np.minimum(ad.astype(int), width - 1)]
    x1 = tad[rows, np.minimum(ad.astype(int) + 1, width - 1)]
    tad_at = x0 + (x1 - x0) * (ad - np.floor(ad))
    run_ids = np.array([r.run_id for r in store.records])
    return PointCloud(ad=ad, tad=tad_at, run_ids=run_ids, ted_target=float(ted_target))


# ---------------------------------------------------------------------------
# Kernel density estimation
# ---------------------------------------------------------------------------

def bandwidth_nrd(samples) -> float:
    """Normal-reference bandwidth: 4 * 1.06 * min(sd, IQR/1.349) * n^(-1/5).

    This is the axis bandwidth convention of the classic 2-d KDE routine,
    whose Gaussian kernels then use a standard deviation of h/4.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 samples for a bandwidth")
    sd = float(np.std(x, ddof=1))
    q1, q3 = np.percentile(x, [25, 75])
    spread = min(sd, (q3 - q1) / 1.349) if q3 > q1 else sd
    if spread <= 0:
        raise DegenerateBandwidthError(
            "samples have zero spread; skip kernel density scoring"
        )
    return 4.0 * 1.06 * spread * n ** (-1.0 / 5.0)


@dataclass
class KdeModel:
    """2-d Gaussian product-kernel estimate over a point cloud."""

    x: np.ndarray
    y: np.ndarray
    h_x: float
    h_y: float

    def __post_init__(self):
        if self.h_x <= 0 or self.h_y <= 0:
            raise ValueError("bandwidths must be positive")


def fit_kde(
    cloud: PointCloud, h_x: float | None = None, h_y: float | None = None
) -> KdeModel:
    """Fit the density model, defaulting both bandwidths to the normal
    reference rule. Explicit bandwidths allow degenerate clouds."""
    return KdeModel(
        x=np.asarray(cloud.ad, dtype=float),
        y=np.asarray(cloud.tad, dtype=float),
        h_x=h_x if h_x is not None else bandwidth_nrd(cloud.ad),
        h_y=h_y if h_y is not None else bandwidth_nrd(cloud.tad),
    )


def kde_density(model: KdeModel, point: tuple[float, float]) -> float:
    """Exact density at one query point."""
    return float(kde_density_many(model, np.array([point]))[0])


def kde_density_many(model: KdeModel, points: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Exact density at each query point (rows of `points`), chunked so the
    pairwise kernel matrix stays small."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    sx, sy = model.h_x / 4.0, model.h_y / 4.0
    norm = 1.0 / (2.0 * math.pi * sx * sy * len(model.x))
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        block = pts[lo : lo + chunk]
        dx = (block[:, 0, None] - model.x[None, :]) / sx
        dy = (block[:, 1, None] - model.y[None, :]) / sy
        out[lo : lo + chunk] = norm * np.exp(-0.5 * (dx * dx + dy * dy)).sum(axis=1)
    return out


def anomaly_percentile(model: KdeModel, observed: tuple[float, float]) -> float:
    """Fraction of cloud points whose density strictly exceeds the density
    at the observed point. 0.98 reads as: the observed state sits outside
    the region containing 98% of simulated projects. Ties (exact duplicates)
    count as not exceeding, which keeps the statistic conservative."""
    f_obs = kde_density(model, observed)
    f_cloud = kde_density_many(model, np.column_stack([model.x, model.y]))
    return float(np.mean(f_cloud > f_obs))


def kde_grid(
    model: KdeModel, nx: int = 100, ny: int = 100, pad_bandwidths: float = 8.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Density evaluated on a regular grid covering the cloud's bounding box
    padded by pad_bandwidths axis bandwidths; returns (xs, ys, density[ny, nx])."""
    px, py = pad_bandwidths * model.h_x, pad_bandwidths * model.h_y
    xs = np.linspace(model.x.min() - px, model.x.max() + px, nx)
    ys = np.linspace(model.y.min() - py, model.y.max() + py, ny)
    gx, gy = np.meshgrid(xs, ys)
    dens = kde_density_many(model, np.column_stack([gx.ravel(), gy.ravel()]))
    return xs, ys, dens.reshape(ny, nx)


def grid_mass(xs: np.ndarray, ys: np.ndarray, density: np.ndarray) -> float:
    """Trapezoid integral of a gridded density; should be close to 1."""
    return float(np.trapezoid(np.trapezoid(density, xs, axis=1), ys))


def write_density_grid(path, xs, ys, density) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y,density\n")
        for iy, yv in enumerate(ys):
            for ix, xv in enumerate(xs):
                fh.write(f"{float(xv)!r},{float(yv)!r},{float(density[iy, ix])!r}\n")
