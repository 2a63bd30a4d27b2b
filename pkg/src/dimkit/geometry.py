"""Point clouds and covering counts.

Every count in this module uses half-open mesh cubes of side ``r`` anchored at
the origin, so ``N_r`` is the number of cubes ``prod [k_i r, (k_i + 1) r)``
that meet the set. Balls ``B(x, R)`` are closed balls of the max norm, i.e.
axis-aligned cubes of side ``2R`` centred at ``x``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, ResolutionError

# Points sitting on a cube boundary up to rounding are assigned to the upper cube.
_SNAP = 1e-9
_REL = 1e-12


@dataclass(frozen=True)
class PointCloud:
    """Finite subset of R^d that is faithful to a set down to ``resolution``.

    Points are stored as an ``(n, d)`` float array, deduplicated and sorted
    lexicographically. One-dimensional clouds are therefore sorted, which the
    interval routines rely on.
    """

    points: np.ndarray
    resolution: float
    bbox: tuple[np.ndarray, np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise DomainError("a point cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("point coordinates must be finite")
        if not self.resolution > 0:
            raise DomainError(f"resolution must be positive, got {self.resolution}")
        pts = np.unique(pts, axis=0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "resolution", float(self.resolution))
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        if self.bbox is not None:
            blo = np.asarray(self.bbox[0], dtype=float)
            bhi = np.asarray(self.bbox[1], dtype=float)
            if np.any(lo < blo - _REL) or np.any(hi > bhi + _REL):
                raise DomainError("points fall outside the declared bounding box")
            lo, hi = blo, bhi
        object.__setattr__(self, "bbox", (lo, hi))

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def diameter(self) -> float:
        """Max-norm diameter of the bounding box of the points."""
        return float(np.max(self.points.max(axis=0) - self.points.min(axis=0)))

    def affine_image(self, scale: float, shift: Sequence[float] | float = 0.0) -> "PointCloud":
        """Image under ``x -> scale * x + shift`` with resolution scaled to match."""
        if not scale > 0:
            raise DomainError("scale must be positive")
        shift = np.broadcast_to(np.asarray(shift, dtype=float), (self.ambient_dim,))
        return PointCloud(self.points * scale + shift, self.resolution * scale)


@dataclass(frozen=True)
class ScalePair:
    """Scales ``0 < r <= R <= 1``."""

    r: float
    R: float

    def __post_init__(self):
        if not (0 < self.r <= self.R * (1 + _REL) and self.R <= 1 + _REL):
            raise DomainError(f"need 0 < r <= R <= 1, got r={self.r}, R={self.R}")


@dataclass
class CoveringProfile:
    """Global and localized covering counts over a grid of scales."""

    global_counts: dict[float, int]
    local_counts: dict[ScalePair, int]
    center_count: int

    def scales(self) -> np.ndarray:
        return np.array(sorted(self.global_counts))


@dataclass(frozen=True)
class CoverSpec:
    """A cover of points on the line by closed intervals ``[a, a + diam]``."""

    intervals: tuple[tuple[float, float], ...]
    cost_exponent: float
    diam_min: float
    diam_max: float

    @property
    def diameters(self) -> np.ndarray:
        return np.array([b - a for a, b in self.intervals])

    @property
    def cost(self) -> float:
        return float(np.sum(self.diameters ** self.cost_exponent))

    def covers(self, points: Iterable[float], tol: float = 1e-12) -> bool:
        pts = np.asarray(list(points), dtype=float)
        covered = np.zeros(pts.shape, dtype=bool)
        for a, b in self.intervals:
            covered |= (pts >= a - tol) & (pts <= b + tol)
        return bool(covered.all())


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported measure with positive weights."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=float)
        if sup.ndim == 1:
            sup = sup[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        if sup.shape[0] == 0:
            raise DomainError("empty measure")
        if sup.shape[0] != w.shape[0]:
            raise DomainError("support and weights differ in length")
        if np.any(w <= 0):
            raise DomainError("weights must be positive")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "weights", w)

    @property
    def total(self) -> float:
        return float(math.fsum(self.weights))

    @classmethod
    def uniform(cls, cloud: PointCloud) -> "DiscreteMeasure":
        """Uniformly distributed probability measure on the cloud's points."""
        n = len(cloud)
        return cls(cloud.points, np.full(n, 1.0 / n))


def _check_scale(cloud: PointCloud, r: float) -> None:
    if not r > 0:
        raise DomainError(f"scale must be positive, got {r}")
    if r < cloud.resolution * (1 - 1e-9):
        raise ResolutionError(
            f"scale {r:.3g} is below the cloud resolution {cloud.resolution:.3g}"
        )


def cell_indices(points: np.ndarray, r: float) -> np.ndarray:
    """Integer mesh-cube coordinates of each point at side ``r``."""
    return np.floor(points / r + _SNAP).astype(np.int64)


def cell_keys(points: np.ndarray, r: float) -> np.ndarray:
    """One int64 key per point identifying its mesh cube."""
    idx = cell_indices(points, r)
    if idx.shape[1] == 1:
        return idx[:, 0]
    idx = idx - idx.min(axis=0)
    span = idx.max(axis=0) + 1
    if float(np.prod(span.astype(float))) >= 2.0**62:
        # too many cubes to pack; fall back to row-unique ids
        _, keys = np.unique(idx, axis=0, return_inverse=True)
        return keys.ravel().astype(np.int64)
    return np.ravel_multi_index(idx.T, span).astype(np.int64)


def mesh_count(cloud: PointCloud, r: float) -> int:
    """Number of mesh cubes of side ``r`` meeting the cloud.

    >>> mesh_count(PointCloud(np.arange(8) / 8, 1 / 8), 1 / 8)
    8
    """
    _check_scale(cloud, r)
    return int(np.unique(cell_keys(cloud.points, r)).size)


def local_count(cloud: PointCloud, center, pair: ScalePair) -> int:
    """Mesh cubes of side ``pair.r`` meeting ``cloud`` inside the ball ``B(center, pair.R)``."""
    _check_scale(cloud, pair.r)
    c = np.broadcast_to(np.asarray(center, dtype=float), (cloud.ambient_dim,))
    inside = np.all(np.abs(cloud.points - c) <= pair.R * (1 + _REL), axis=1)
    if not inside.any():
        return 0
    return int(np.unique(cell_keys(cloud.points[inside], pair.r)).size)


def _local_counts_1d(x: np.ndarray, centers: np.ndarray, r: float, R: float) -> np.ndarray:
    # x sorted, so mesh cells are nondecreasing and distinct cells in a window
    # are counted by a prefix sum of "new cell" flags.
    cells = np.floor(x / r + _SNAP).astype(np.int64)
    new = np.ones(x.size, dtype=np.int64)
    new[1:] = cells[1:] != cells[:-1]
    csum = np.cumsum(new)
    tol = R * _REL
    lo = np.searchsorted(x, centers - R - tol, side="left")
    hi = np.searchsorted(x, centers + R + tol, side="right")
    out = np.zeros(centers.size, dtype=np.int64)
    ok = hi > lo
    out[ok] = csum[hi[ok] - 1] - csum[lo[ok]] + 1
    return out


def _local_counts_nd(cloud: PointCloud, tree: cKDTree, centers: np.ndarray, r: float, R: float) -> np.ndarray:
    keys = cell_keys(cloud.points, r)
    out = np.empty(centers.shape[0], dtype=np.int64)
    for i, c in enumerate(centers):
        hit = tree.query_ball_point(c, R * (1 + _REL), p=np.inf, return_sorted=False)
        out[i] = np.unique(keys[hit]).size
    return out


class _PlaneIndex:
    """Points of a planar cloud bucketed by mesh cell at one scale ``r``.

    Cells are keyed column-major, ``key = ix * H + iy``, so each column of
    cells is a contiguous key range and so is the slice of sorted points in it.
    """

    def __init__(self, points: np.ndarray, r: float):
        idx = cell_indices(points, r)
        self.r = r
        self.origin = idx.min(axis=0)
        idx = idx - self.origin
        self.W = int(idx[:, 0].max()) + 1
        self.H = int(idx[:, 1].max()) + 1
        keys = idx[:, 0] * self.H + idx[:, 1]
        order = np.argsort(keys, kind="stable")
        self.keys = keys[order]
        self.pts = points[order]
        first = np.flatnonzero(np.r_[True, self.keys[1:] != self.keys[:-1]])
        self.ukeys = self.keys[first]
        self.ymax = np.maximum.reduceat(self.pts[:, 1], first)
        self.ymin = np.minimum.reduceat(self.pts[:, 1], first)

    def _cells(self, v: np.ndarray, axis: int) -> np.ndarray:
        return np.floor(v / self.r + _SNAP).astype(np.int64) - self.origin[axis]

    def _present(self, k: np.ndarray, ok: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = np.searchsorted(self.ukeys, k)
        pos_c = np.minimum(pos, self.ukeys.size - 1)
        return ok & (self.ukeys[pos_c] == k), pos_c

    def _interior(self, cx, a, b, ylo, yhi, ay, by, budget=4_000_000):
        # columns strictly between a and b: every cell with ay < iy < by counts
        # if occupied; rows ay and by count if some point crosses into the box
        H = self.H
        out = np.zeros(cx.size, dtype=np.int64)
        width = int(np.max(b - a - 1, initial=0))
        if width <= 0:
            return out
        chunk = max(1, budget // width)
        steps = np.arange(1, width + 1)
        for s in range(0, cx.size, chunk):
            sl = slice(s, s + chunk)
            cols = a[sl, None] + steps[None, :]
            ok = (cols < b[sl, None]) & (cols >= 0) & (cols < self.W)
            lo = np.clip(ay[sl] + 1, 0, H)[:, None]
            hi = np.clip(by[sl] - 1, -1, H - 1)[:, None]
            base = cols * H
            n_in = np.searchsorted(self.ukeys, base + hi + 1) - np.searchsorted(self.ukeys, base + lo)
            n_in = np.where(ok & (hi >= lo), n_in, 0)
            bot_ok = ok & ((ay[sl] >= 0) & (ay[sl] < H))[:, None]
            pres, pos = self._present(base + ay[sl, None], bot_ok)
            n_in += pres & (self.ymax[pos] >= ylo[sl, None])
            top_ok = ok & ((by[sl] >= 0) & (by[sl] < H))[:, None]
            pres, pos = self._present(base + by[sl, None], top_ok)
            n_in += pres & (self.ymin[pos] <= yhi[sl, None])
            out[sl] = n_in.sum(axis=1)
        return out

    def _edge_column(self, col, xcond, ylo, yhi, ay, by) -> int:
        if not (0 <= col < self.W):
            return 0
        lo_key = col * self.H + max(ay, 0)
        hi_key = col * self.H + min(by, self.H - 1)
        if hi_key < lo_key:
            return 0
        s = np.searchsorted(self.keys, lo_key)
        e = np.searchsorted(self.keys, hi_key, side="right")
        if e <= s:
            return 0
        p = self.pts[s:e]
        mask = xcond(p[:, 0]) & (p[:, 1] >= ylo) & (p[:, 1] <= yhi)
        k = self.keys[s:e][mask]
        return 0 if k.size == 0 else int(np.count_nonzero(k[1:] != k[:-1]) + 1)

    def counts(self, centers: np.ndarray, R: float) -> np.ndarray:
        half = R * (1 + _REL)
        xlo, xhi = centers[:, 0] - half, centers[:, 0] + half
        ylo, yhi = centers[:, 1] - half, centers[:, 1] + half
        a, b = self._cells(xlo, 0), self._cells(xhi, 0)
        ay, by = self._cells(ylo, 1), self._cells(yhi, 1)
        out = self._interior(centers[:, 0], a, b, ylo, yhi, ay, by)
        for i in range(centers.shape[0]):
            out[i] += self._edge_column(int(a[i]), lambda x, v=xlo[i]: x >= v, ylo[i], yhi[i], int(ay[i]), int(by[i]))
            if b[i] != a[i]:
                out[i] += self._edge_column(int(b[i]), lambda x, v=xhi[i]: x <= v, ylo[i], yhi[i], int(ay[i]), int(by[i]))
        return out


class LocalCounter:
    """Batched evaluation of ``max_x N_r(B(x, R) ∩ F)`` over sampled centres.

    Centres are drawn among the cloud points: all of them when ``max_centers``
    is at least the cloud size, otherwise a seeded sample without replacement.
    """

    def __init__(self, cloud: PointCloud, max_centers: int = 4096, seed: int = 0):
        self.cloud = cloud
        n = len(cloud)
        if max_centers >= n:
            self.centers = cloud.points
        else:
            rng = np.random.default_rng(seed)
            pick = np.sort(rng.choice(n, size=max_centers, replace=False))
            self.centers = cloud.points[pick]
        self._tree = cKDTree(cloud.points) if cloud.ambient_dim > 2 else None
        self._planes: dict[float, _PlaneIndex] = {}

    def counts(self, r: float, R: float) -> np.ndarray:
        _check_scale(self.cloud, r)
        d = self.cloud.ambient_dim
        if d == 1:
            return _local_counts_1d(self.cloud.points[:, 0], self.centers[:, 0], r, R)
        if d == 2 and R >= r:
            if r not in self._planes:
                self._planes = {r: _PlaneIndex(self.cloud.points, r)}
            return self._planes[r].counts(self.centers, R)
        if self._tree is None:
            self._tree = cKDTree(self.cloud.points)
        return _local_counts_nd(self.cloud, self._tree, self.centers, r, R)

    def sup(self, r: float, R: float) -> int:
        return int(self.counts(r, R).max())


def covering_profile(
    cloud: PointCloud,
    scale_grid: Sequence[ScalePair],
    centers_per_pair: int = 4096,
    seed: int = 0,
) -> CoveringProfile:
    """Global counts at every ``r`` and ``R`` of the grid plus sampled local suprema."""
    if len(scale_grid) == 0:
        raise DomainError("empty scale grid")
    if centers_per_pair < 1:
        raise DomainError("centers_per_pair must be positive")
    for pair in scale_grid:
        _check_scale(cloud, pair.r)
    counter = LocalCounter(cloud, centers_per_pair, seed)
    scales = sorted({pair.r for pair in scale_grid} | {pair.R for pair in scale_grid})
    global_counts = {s: mesh_count(cloud, s) for s in scales}
    local_counts = {pair: counter.sup(pair.r, pair.R) for pair in scale_grid}
    return CoveringProfile(global_counts, local_counts, len(counter.centers))


def geometric_scales(r_lo: float, r_hi: float, ratio: float = 2.0) -> np.ndarray:
    """``r_lo * ratio**k`` for every ``k >= 0`` that stays at or below ``r_hi``."""
    if not (0 < r_lo <= r_hi * (1 + 1e-9)) or ratio <= 1:
        raise DomainError("need 0 < r_lo <= r_hi and ratio > 1")
    k = int(math.floor(math.log(r_hi / r_lo) / math.log(ratio) + 1e-9))
    return r_lo * ratio ** np.arange(k + 1)


def separated_net(cloud: PointCloud, r: float) -> PointCloud:
    """Maximal ``r``-separated subset chosen greedily in lexicographic order.

    Net points are pairwise more than ``r`` apart (Euclidean) and every cloud
    point lies within ``r`` of a net point.
    """
    _check_scale(cloud, r)
    pts = cloud.points
    if cloud.ambient_dim == 1:
        x = pts[:, 0]
        keep = [0]
        last = x[0]
        # gaps are usually far below r in dense regions, so jump with searchsorted
        i = 0
        while True:
            i = int(np.searchsorted(x, last + r, side="right"))
            if i >= x.size:
                break
            keep.append(i)
            last = x[i]
        return PointCloud(pts[keep], r)

    grid: dict[tuple[int, ...], list[int]] = {}
    cells = np.floor(pts / r).astype(np.int64)
    offsets = list(itertools.product((-1, 0, 1), repeat=cloud.ambient_dim))
    keep = []
    r2 = r * r
    for i in range(pts.shape[0]):
        c = tuple(cells[i])
        p = pts[i]
        near = False
        for off in offsets:
            for j in grid.get(tuple(a + b for a, b in zip(c, off)), ()):
                d = pts[j] - p
                if float(d @ d) <= r2:
                    near = True
                    break
            if near:
                break
        if not near:
            keep.append(i)
            grid.setdefault(c, []).append(i)
    return PointCloud(pts[keep], r)


def min_cover_cost_1d(
    points: Sequence[float], diam_min: float, diam_max: float, s: float
) -> tuple[float, CoverSpec]:
    """Exact minimum of ``sum |U_i|**s`` over interval covers with ``diam_min <= |U_i| <= diam_max``.

    Dynamic programme over the sorted points: the leftmost uncovered point is
    the left end of the next interval, and that interval is shrunk to the
    smallest admissible diameter that still reaches its last covered point.
    For ``s >= 0`` shrinking never raises the cost, so this family of covers
    contains an optimum.

    Returns
    -------
    cost : float
    cover : CoverSpec
        A cover achieving ``cost``.
    """
    if not (0 < diam_min <= diam_max):
        raise DomainError(f"need 0 < diam_min <= diam_max, got [{diam_min}, {diam_max}]")
    if s < 0:
        raise DomainError("cost exponent must be nonnegative")
    x = np.asarray(points, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("no points to cover")
    if np.any(np.diff(x) < 0):
        raise DomainError("points must be sorted")
    n = x.size
    hi = np.searchsorted(x, x + diam_max * (1 + _REL), side="right")
    best = np.zeros(n + 1)
    choice = np.zeros(n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        ends = np.arange(i, hi[i])
        diam = np.maximum(x[ends] - x[i], diam_min)
        total = diam**s + best[ends + 1]
        k = int(np.argmin(total))
        best[i] = total[k]
        choice[i] = ends[k]
    intervals = []
    i = 0
    while i < n:
        j = choice[i]
        d = max(x[j] - x[i], diam_min)
        intervals.append((float(x[i]), float(x[i] + d)))
        i = j + 1
    cover = CoverSpec(tuple(intervals), float(s), float(diam_min), float(diam_max))
    return float(best[0]), cover


FROSTMAN_CONSTANT = 1.0
FROSTMAN_STEP = 0.002


def dyadic_masses(measure: DiscreteMeasure, diam_min: float, diam_max: float):
    """Largest mesh-cube mass at each side ``diam_min * 2**j <= diam_max``."""
    if not (0 < diam_min <= diam_max):
        raise DomainError("need 0 < diam_min <= diam_max")
    sides = geometric_scales(diam_min, diam_max, 2.0)
    masses = np.empty(sides.size)
    for k, side in enumerate(sides):
        keys = cell_keys(measure.support, side)
        _, inv = np.unique(keys, return_inverse=True)
        masses[k] = np.bincount(inv.ravel(), weights=measure.weights).max()
    return sides, masses


def frostman_exponent(
    measure: DiscreteMeasure,
    diam_min: float,
    diam_max: float,
    constant: float = FROSTMAN_CONSTANT,
    step: float = FROSTMAN_STEP,
) -> float:
    """Largest grid exponent ``s`` with ``mu(U) <= constant * |U|**s`` on all test cubes.

    Test cubes are the mesh cubes of sides ``diam_min * 2**j`` up to
    ``diam_max``; ``s`` ranges over ``0, step, 2 step, ...`` up to the ambient
    dimension. Returns 0 when no grid exponent qualifies.
    """
    sides, masses = dyadic_masses(measure, diam_min, diam_max)
    d = measure.support.shape[1]
    grid = np.arange(0.0, d + step / 2, step)
    ok = np.all(masses[None, :] <= constant * sides[None, :] ** grid[:, None] * (1 + 1e-12), axis=1)
    if not ok.any():
        return 0.0
    return float(grid[np.nonzero(ok)[0].max()])


def write_cloud(cloud: PointCloud, path: str | Path) -> tuple[Path, Path]:
    """Write ``path`` (CSV) and its ``.meta`` sidecar; returns both paths."""
    path = Path(path)
    d = cloud.ambient_dim
    header = ",".join(f"x{i + 1}" for i in range(d))
    rows = "\n".join(",".join(repr(float(v)) for v in row) for row in cloud.points)
    path.write_text(header + "\n" + rows + "\n")
    meta = path.with_suffix(path.suffix + ".meta")
    lo, hi = cloud.bbox
    meta.write_text(
        f"ambient_dim={d}\n"
        f"resolution={cloud.resolution!r}\n"
        f"bbox_min={','.join(repr(float(v)) for v in lo)}\n"
        f"bbox_max={','.join(repr(float(v)) for v in hi)}\n"
        f"count={len(cloud)}\n"
    )
    return path, meta


def read_cloud(path: str | Path) -> PointCloud:
    path = Path(path)
    meta = {}
    for line in path.with_suffix(path.suffix + ".meta").read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            k, _, v = line.partition("=")
            meta[k.strip()] = v.strip()
    lines = path.read_text().splitlines()
    d = int(meta["ambient_dim"])
    if lines[0] != ",".join(f"x{i + 1}" for i in range(d)):
        raise DomainError(f"unexpected header {lines[0]!r} for dimension {d}")
    pts = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln], dtype=float)
    bbox = (
        np.array([float(v) for v in meta["bbox_min"].split(",")]),
        np.array([float(v) for v in meta["bbox_max"].split(",")]),
    )
    return PointCloud(pts.reshape(-1, d), float(meta["resolution"]), bbox)
