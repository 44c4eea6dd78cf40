"""Geometry of lines in R^d.

Lines through the origin are represented by canonical unit direction
vectors; affine lines by the unique standard form ``direction +
translation`` with the translation orthogonal to the direction.  The
module provides the product metric on line space (projection operator-norm
distance between directions plus Euclidean distance between translations),
covers of direction space at a scale, and the mesh counter used to measure
covering numbers of line families.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, InvalidScale, StaleResolution
from .util import derive_seed, snap_floor

ORTHO_TOL = 1e-12


def canonical_vector(v) -> np.ndarray:
    """Normalize v and fix the sign so antipodal vectors coincide.

    The first nonzero component is made positive; exact zeros defer the
    decision to the next coordinate.
    """
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.all(np.isfinite(v)):
        raise InvalidParameter("direction vector must be nonzero and finite")
    u = v / norm
    for component in u:
        if component != 0.0:
            if component < 0.0:
                u = -u
            break
    u = u + 0.0  # clear negative zeros left by the sign flip
    u.setflags(write=False)
    return u


@dataclass(frozen=True, eq=False)
class Direction:
    """A line through the origin, stored as a canonical unit vector."""

    vector: np.ndarray

    def __init__(self, vector):
        object.__setattr__(self, "vector", canonical_vector(vector))

    @property
    def dim(self) -> int:
        return self.vector.size

    def angle(self) -> float:
        """Canonical angle in [0, pi) for planar directions."""
        if self.dim != 2:
            raise InvalidParameter("angle() is defined for d=2 only")
        theta = float(np.arctan2(self.vector[1], self.vector[0]))
        return theta % np.pi


@dataclass(frozen=True, eq=False)
class AffineLine:
    """A line in R^d in standard form: direction plus orthogonal translation."""

    direction: Direction
    translation: np.ndarray

    def __init__(self, direction, translation):
        if not isinstance(direction, Direction):
            direction = Direction(direction)
        a = np.asarray(translation, dtype=float).copy()
        if a.shape != direction.vector.shape:
            raise InvalidParameter("translation dimension mismatch")
        if abs(float(a @ direction.vector)) > ORTHO_TOL:
            raise InvalidParameter(
                "translation must be orthogonal to the direction "
                f"(inner product {float(a @ direction.vector):.3e})"
            )
        a.setflags(write=False)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "translation", a)

    @property
    def dim(self) -> int:
        return self.direction.dim

    def point_distance(self, points) -> np.ndarray:
        """Euclidean distance from points (n, d) to this line."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rel = pts - self.translation
        along = rel @ self.direction.vector
        perp = rel - np.outer(along, self.direction.vector)
        return np.linalg.norm(perp, axis=1)


def standard_form(point, direction) -> AffineLine:
    """Line through `point` with the given direction, in standard form.

    The translation is the projection of the point onto the direction's
    orthocomplement, which makes the representation unique once the
    direction sign is canonical.
    """
    d = Direction(direction)
    p = np.asarray(point, dtype=float)
    if p.shape != d.vector.shape:
        raise InvalidParameter("point dimension mismatch")
    a = p - (p @ d.vector) * d.vector
    return AffineLine(d, a)


def projection_distance(u, v) -> float:
    """Operator norm of the difference of the two rank-1 projections.

    Equals the sine of the principal angle.  Computed as the norm of the
    component of u orthogonal to v, which agrees with sqrt(1 - <u, v>^2)
    for unit representatives but stays accurate when the directions nearly
    coincide (no cancellation near <u, v> = +-1).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if tuple(u) > tuple(v):  # fixed argument order makes symmetry exact
        u, v = v, u
    perp = u - float(u @ v) * v
    return min(1.0, float(np.linalg.norm(perp)))


def metric_d1(line_a: AffineLine, line_b: AffineLine) -> float:
    """Distance on line space: projection-norm term plus translation term."""
    return projection_distance(
        line_a.direction.vector, line_b.direction.vector
    ) + float(np.linalg.norm(line_a.translation - line_b.translation))


def _gram_schmidt_frame(center: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal frame of center-perp, rows = d-1 vectors.

    Seeds Gram-Schmidt with the standard basis vectors least aligned with
    the center (ties broken by index), so the frame is reproducible from
    the center alone.
    """
    d = center.size
    order = sorted(range(d), key=lambda i: (abs(center[i]), i))
    frame = []
    for i in order:
        v = np.zeros(d)
        v[i] = 1.0
        v = v - (v @ center) * center
        for f in frame:
            v = v - (v @ f) * f
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            frame.append(v / norm)
        if len(frame) == d - 1:
            break
    return np.array(frame)


@dataclass(frozen=True, eq=False)
class DirectionCover:
    """A realized delta-cover of direction space.

    For d=2 the cover is the uniform partition of the angle interval
    [0, pi) into `width`-wide buckets; centers are stored as unit vectors.
    For d >= 3 the centers come from a greedy separated net and assignment
    is by nearest center in the projection metric.
    """

    dim: int
    delta: float
    centers: np.ndarray  # (k, d) canonical unit vectors
    angle_width: float | None = None  # set for the planar fast path
    _frames: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return self.centers.shape[0]

    def assign(self, unit_vectors: np.ndarray) -> np.ndarray:
        """Bucket index for each row of `unit_vectors`."""
        vecs = np.atleast_2d(unit_vectors)
        if self.angle_width is not None:
            theta = np.arctan2(vecs[:, 1], vecs[:, 0]) % np.pi
            idx = np.minimum(
                (theta / self.angle_width).astype(np.int64), len(self) - 1
            )
            return idx
        # nearest center by max |cos|, i.e. min projection distance
        cos = np.abs(vecs @ self.centers.T)
        return np.argmax(cos, axis=1)

    def frame(self, bucket: int) -> np.ndarray:
        """Orthonormal frame of the bucket center's orthocomplement."""
        if bucket not in self._frames:
            self._frames[bucket] = _gram_schmidt_frame(self.centers[bucket])
        return self._frames[bucket]


def direction_cover(d: int, delta: float) -> DirectionCover:
    """Realized delta-cover of the space of directions in R^d.

    d=2: uniform angle buckets of width min(arcsin(delta), pi/2); every
    direction is within delta of its bucket center in the projection
    metric and the bucket count is <= ceil(pi / arcsin(delta)), i.e. about
    pi * delta^{-1}.  delta = 1 (the diameter of planar direction space)
    is served by a single bucket.

    d>=3: greedy maximal (0.6*delta)-separated net over a deterministic
    dense candidate set; the net covers at radius delta and its size is
    within a constant factor (about (2/0.6)^{d-1}) of delta^{-(d-1)}.
    """
    if not (0.0 < delta <= 1.0):
        raise InvalidScale(f"cover scale must lie in (0, 1], got {delta}")
    if d < 2:
        raise InvalidParameter("ambient dimension must be >= 2")
    if d == 2:
        if delta >= 1.0:
            centers = np.array([[1.0, 0.0]])
            return DirectionCover(2, delta, centers, angle_width=float(np.pi))
        width = min(float(np.arcsin(delta)), np.pi / 2)
        n = int(np.ceil(np.pi / width))
        angles = (np.arange(n) + 0.5) * width
        centers = np.column_stack([np.cos(angles), np.sin(angles)])
        flip = (centers[:, 0] < 0) | ((centers[:, 0] == 0) & (centers[:, 1] < 0))
        centers[flip] *= -1.0
        centers += 0.0
        return DirectionCover(2, delta, centers, angle_width=width)
    return DirectionCover(d, delta, _greedy_sphere_net(d, delta))


def _candidate_directions(d: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform candidate directions."""
    if d == 3:
        i = np.arange(count)
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        z = 1.0 - (2.0 * i + 1.0) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = 2.0 * np.pi * i / golden
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    else:
        rng = np.random.default_rng(derive_seed(0, f"direction-cover-d{d}"))
        pts = rng.standard_normal((count, d))
    return np.array([canonical_vector(p) for p in pts])


def _greedy_sphere_net(d: int, delta: float) -> np.ndarray:
    sep = 0.6 * delta
    count = int(np.ceil((6.0 / delta) ** (d - 1)))
    count = min(count, 400_000)
    cands = _candidate_directions(d, count)
    kept: list[np.ndarray] = []
    kept_mat = np.empty((0, d))
    for c in cands:
        if kept_mat.shape[0]:
            cos = np.abs(kept_mat @ c)
            if np.sqrt(np.maximum(0.0, 1.0 - np.minimum(1.0, cos * cos))).min() < sep:
                continue
        kept.append(c)
        kept_mat = np.vstack([kept_mat, c])
    return kept_mat


@dataclass(frozen=True, eq=False)
class LineFamily:
    """A finite family of lines in standard form, with a resolution floor.

    Directions and translations are stored as parallel (n, d) arrays;
    `resolution_floor` is the smallest scale at which the family still
    faithfully represents the idealized (usually infinite) family it
    truncates.
    """

    directions: np.ndarray
    translations: np.ndarray
    resolution_floor: float

    def __init__(self, directions, translations, resolution_floor):
        dirs = np.atleast_2d(np.asarray(directions, dtype=float)).copy()
        trans = np.atleast_2d(np.asarray(translations, dtype=float)).copy()
        if dirs.shape != trans.shape:
            raise InvalidParameter("directions/translations shape mismatch")
        if resolution_floor <= 0:
            raise InvalidParameter("resolution floor must be positive")
        norms = np.linalg.norm(dirs, axis=1)
        if dirs.shape[0] and np.any(np.abs(norms - 1.0) > 1e-9):
            raise InvalidParameter("directions must be unit vectors")
        if dirs.shape[0]:
            inner = np.abs(np.einsum("ij,ij->i", dirs, trans))
            if np.any(inner > 1e-9):
                raise InvalidParameter("translations must be orthogonal to directions")
        dirs.setflags(write=False)
        trans.setflags(write=False)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "translations", trans)
        object.__setattr__(self, "resolution_floor", float(resolution_floor))

    @classmethod
    def from_lines(cls, lines, resolution_floor):
        dirs = np.array([ln.direction.vector for ln in lines])
        trans = np.array([ln.translation for ln in lines])
        if len(lines) == 0:
            dirs = np.empty((0, 2))
            trans = np.empty((0, 2))
        return cls(dirs, trans, resolution_floor)

    def line(self, i: int) -> AffineLine:
        return AffineLine(Direction(self.directions[i]), self.translations[i])

    def __len__(self) -> int:
        return self.directions.shape[0]

    @property
    def dim(self) -> int:
        return self.directions.shape[1]


@dataclass(frozen=True)
class MeshCellId:
    """One product cell of the line-space mesh at some scale.

    `direction_bucket` indexes the realized direction cover;
    `translation_cell` holds the integer coordinates N of the product of
    intervals [4*N*delta, 4*(N+1)*delta) in the bucket frame.
    """

    direction_bucket: int
    translation_cell: tuple


def mesh_cells(family: LineFamily, delta: float) -> list[MeshCellId]:
    """The mesh cell of every line, in family order."""
    buckets, cells, _ = mesh_assign(family, delta)
    return [
        MeshCellId(int(b), tuple(int(c) for c in row))
        for b, row in zip(buckets, cells)
    ]


def mesh_assign(family: LineFamily, delta: float, cover: DirectionCover | None = None):
    """Assign every line a (direction bucket, translation mesh cell) pair.

    The translation is expressed in the bucket center's orthocomplement
    frame and binned by the 4*delta mesh anchored at 0.  Returns
    (bucket indices (n,), cell coordinates (n, d-1) int array, cover).
    """
    if cover is None:
        cover = direction_cover(family.dim, delta)
    n = len(family)
    buckets = cover.assign(family.directions) if n else np.empty(0, np.int64)
    cells = np.zeros((n, family.dim - 1), dtype=np.int64)
    width = 4.0 * delta
    if n and cover.angle_width is not None:
        # planar fast path: the frame of an angle-phi center is (-sin, cos)
        angles = (buckets.astype(float) + 0.5) * cover.angle_width
        coord = (
            -family.translations[:, 0] * np.sin(angles)
            + family.translations[:, 1] * np.cos(angles)
        )
        cells[:, 0] = snap_floor(coord, width)
    elif n:
        for b in np.unique(buckets):
            sel = buckets == b
            coords = family.translations[sel] @ cover.frame(int(b)).T
            cells[sel] = snap_floor(coords, width)
    return buckets, cells, cover


def mesh_cover_count(family: LineFamily, delta: float) -> int:
    """Number of (direction bucket) x (4*delta mesh cell) products hit.

    This is the covering-number proxy for line families; its log-log slope
    against 1/delta estimates the family's box dimension.
    """
    if not (0.0 < delta <= 1.0):
        raise InvalidScale(f"mesh scale must lie in (0, 1], got {delta}")
    if len(family) == 0:
        warnings.warn("mesh_cover_count of an empty family", stacklevel=2)
        return 0
    if delta < family.resolution_floor:
        raise StaleResolution(
            f"scale {delta:.3e} is below the family's resolution floor "
            f"{family.resolution_floor:.3e}"
        )
    buckets, cells, _ = mesh_assign(family, delta)
    # pack (bucket, cell coords) into a single integer code per line
    codes = buckets.copy()
    for c in range(cells.shape[1]):
        col = cells[:, c]
        lo = col.min()
        span = col.max() - lo + 1
        if float(codes.max() + 1) * float(span) >= 2**62:
            raise InvalidScale("mesh too fine to index at this scale")
        codes = codes * span + (col - lo)
    return int(np.unique(codes).size)
