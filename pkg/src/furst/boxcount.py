"""Grid covering numbers and log-log dimension fits for point clouds."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientData,
    InvalidParameter,
    InvalidScale,
    StaleResolution,
)
from .util import snap_floor


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite set of points plus the scale down to which it is faithful.

    `resolution_floor` is the smallest scale at which the cloud still
    represents its idealized set; counting below it would measure the
    truncation instead.
    """

    points: np.ndarray
    resolution_floor: float

    def __init__(self, points, resolution_floor):
        pts = np.atleast_2d(np.asarray(points, dtype=float)).copy()
        if pts.size and not np.all(np.isfinite(pts)):
            raise InvalidParameter("points must be finite")
        if resolution_floor <= 0:
            raise InvalidParameter("resolution floor must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "resolution_floor", float(resolution_floor))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def translated(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=float),
                          self.resolution_floor)


def _cell_codes(idx: np.ndarray) -> np.ndarray:
    """Collapse integer cell coordinates (n, d) to one int64 code per row."""
    mins = idx.min(axis=0)
    spans = idx.max(axis=0) - mins + 1
    if float(np.prod(spans.astype(float))) >= 2**62:
        raise InvalidScale("grid too fine to index; raise the scale")
    codes = np.zeros(idx.shape[0], dtype=np.int64)
    for c in range(idx.shape[1]):
        codes = codes * spans[c] + (idx[:, c] - mins[c])
    return codes


def grid_count(cloud: PointCloud, delta: float) -> int:
    """Number of axis-aligned cells of diameter delta hit by the cloud.

    Cells have side delta/sqrt(d) (so the cell diameter is delta) and sit
    on the lattice anchored at the origin.  The result brackets the true
    minimal cover: N_true <= grid_count <= 3^d * N_true.
    """
    if delta <= 0:
        raise InvalidScale("scale must be positive")
    if delta < cloud.resolution_floor:
        raise StaleResolution(
            f"scale {delta:.3e} is below the cloud's resolution floor "
            f"{cloud.resolution_floor:.3e}"
        )
    if len(cloud) == 0:
        return 0
    side = delta / np.sqrt(cloud.dim)
    idx = snap_floor(cloud.points, side)
    return int(np.unique(_cell_codes(idx)).size)


def dyadic_schedule(delta_max: float, delta_min: float) -> list[float]:
    """Powers of two inside [delta_min, delta_max], descending."""
    if not (0.0 < delta_min <= delta_max < 1.0):
        raise InvalidParameter("need 0 < delta_min <= delta_max < 1")
    scales = []
    j = 1
    while 2.0**-j > delta_max:
        j += 1
    while 2.0**-j >= delta_min:
        scales.append(2.0**-j)
        j += 1
    if not scales:
        raise InvalidParameter(
            f"no power of two lies in [{delta_min}, {delta_max}]"
        )
    return scales


@dataclass(frozen=True)
class CoverReport:
    """Covering counts over a scale schedule plus the fitted exponent."""

    deltas: tuple
    counts: tuple
    slope: float
    residual: float
    fit_range: tuple  # (coarsest, finest)

    def __post_init__(self):
        d = np.array(self.deltas)
        c = np.array(self.counts)
        if np.any(np.diff(d) >= 0):
            raise InvalidParameter("report scales must be strictly decreasing")
        if np.any(np.diff(c) < 0):
            raise InvalidParameter(
                "counts must be nondecreasing as the scale decreases; "
                "use a geometric schedule with integer scale ratios"
            )

    def rows(self):
        """(delta, count, log(1/delta), log(count)) per schedule entry."""
        return [
            (d, n, float(np.log(1.0 / d)), float(np.log(n)))
            for d, n in zip(self.deltas, self.counts)
        ]

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("delta,count,log_inv_delta,log_count\n")
            for d, n, x, y in self.rows():
                fh.write(f"{d!r},{n},{x!r},{y!r}\n")

    def sidecar(self) -> dict:
        return {
            "slope": self.slope,
            "residual": self.residual,
            "fit_range": list(self.fit_range),
        }

    def write_sidecar(self, path, extra: dict | None = None):
        payload = self.sidecar()
        if extra:
            payload.update(extra)
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")


def fit_slope(deltas, counts) -> tuple[float, float]:
    """Least squares slope and RMS residual of log N against log(1/delta)."""
    x = np.log(1.0 / np.asarray(deltas, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    xm, ym = x.mean(), y.mean()
    var = float(((x - xm) ** 2).sum())
    if var == 0.0:
        raise InsufficientData("degenerate schedule: all scales equal")
    slope = float(((x - xm) * (y - ym)).sum() / var)
    resid = y - (ym + slope * (x - xm))
    return slope, float(np.sqrt((resid**2).mean()))


def estimate_dimension(cloud: PointCloud, schedule) -> CoverReport:
    """Grid counts over the schedule and the fitted box-dimension slope.

    Requires at least three scales, all at or above the cloud's resolution
    floor.  The RMS residual of the fit is reported so callers can reject
    regimes where the counts are not power-law-like.
    """
    schedule = [float(s) for s in schedule]
    if len(schedule) < 3:
        raise InsufficientData("need at least 3 scales for a slope fit")
    if any(s < cloud.resolution_floor for s in schedule):
        raise StaleResolution("schedule reaches below the resolution floor")
    if any(s2 >= s1 for s1, s2 in zip(schedule, schedule[1:])):
        raise InvalidParameter("schedule must be strictly decreasing")
    counts = [grid_count(cloud, s) for s in schedule]
    slope, residual = fit_slope(schedule, counts)
    return CoverReport(
        deltas=tuple(schedule),
        counts=tuple(counts),
        slope=slope,
        residual=residual,
        fit_range=(schedule[0], schedule[-1]),
    )
