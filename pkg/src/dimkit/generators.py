"""Finite-resolution samples of the catalogued fractal families.

Specs are small frozen dataclasses, one per family. ``generate`` turns a spec
and a resolution into a :class:`~dimkit.geometry.PointCloud` whose points are
within ``resolution`` of the true set and vice versa.

Spec files are ``key=value`` lines (``#`` starts a comment)::

    variant=carpet
    m=2
    n=3
    cells=(0,0);(0,2);(1,1)

Recognised keys per variant:

==============  ===============================================
countable       ``p``  (positive; fractions such as ``1/10`` allowed)
carpet          ``m``, ``n``, ``cells=(col,row);(col,row);...``
selfsimilar     ``maps=(c,t);(c,t);...``
spiral          ``p``  (at least 1)
percolation     ``d``, ``m``, ``p``, ``seed``
==============  ===============================================
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import ClassVar, Union

import numpy as np

from .errors import DomainError, ExtinctionError, SpecError
from .geometry import PointCloud

log = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True)
class Countable:
    """``F_p = {n**-p : n >= 1}``."""

    p: float
    variant: ClassVar[str] = "countable"

    def __post_init__(self):
        if not self.p > 0:
            raise SpecError(f"countable: p must be positive, got {self.p}")


@dataclass(frozen=True)
class Carpet:
    """Bedford-McMullen carpet on an ``m x n`` grid (``m`` columns, ``n`` rows)."""

    m: int
    n: int
    cells: frozenset
    variant: ClassVar[str] = "carpet"

    def __post_init__(self):
        cells = frozenset((int(c), int(r)) for c, r in self.cells)
        object.__setattr__(self, "cells", cells)
        if not (self.n > self.m >= 2):
            raise SpecError(f"carpet: need n > m >= 2, got m={self.m}, n={self.n}")
        if len(cells) < 2:
            raise SpecError("carpet: need at least two chosen rectangles")
        for c, r in cells:
            if not (0 <= c < self.m and 0 <= r < self.n):
                raise SpecError(f"carpet: cell {(c, r)} outside the {self.m}x{self.n} grid")

    @property
    def N(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class SelfSimilarLine:
    """Attractor of ``x -> c_i x + t_i`` on ``[0, 1]``."""

    maps: tuple
    variant: ClassVar[str] = "selfsimilar"

    def __post_init__(self):
        maps = tuple((float(c), float(t)) for c, t in self.maps)
        object.__setattr__(self, "maps", maps)
        if len(maps) < 1:
            raise SpecError("selfsimilar: need at least one map")
        for c, t in maps:
            if not (0 < c < 1):
                raise SpecError(f"selfsimilar: contraction ratio {c} not in (0, 1)")
            if not (-_EPS <= t <= 1 - c + _EPS):
                raise SpecError(f"selfsimilar: map ({c}, {t}) does not send [0,1] into itself")


@dataclass(frozen=True)
class Spiral:
    """Polynomial spiral ``{x**-p exp(ix) : x > 1}`` in the plane."""

    p: float
    variant: ClassVar[str] = "spiral"

    def __post_init__(self):
        if not self.p >= 1:
            raise SpecError(f"spiral: p must be at least 1, got {self.p}")


@dataclass(frozen=True)
class Percolation:
    """Mandelbrot percolation in ``[0,1]**d`` with ``m**d`` subcubes kept w.p. ``p``."""

    d: int
    m: int
    p: float
    seed: int = 0
    variant: ClassVar[str] = "percolation"

    def __post_init__(self):
        if self.d < 1:
            raise SpecError("percolation: d must be a positive integer")
        if self.m < 2:
            raise SpecError("percolation: m must be at least 2")
        if not (self.m ** (-self.d) < self.p < 1):
            raise SpecError(
                f"percolation: need m**-d < p < 1 for survival, got p={self.p}"
            )
        if not (0 <= self.seed < 2**64):
            raise SpecError("percolation: seed must be a 64-bit unsigned integer")


FractalSpec = Union[Countable, Carpet, SelfSimilarLine, Spiral, Percolation]

FIGURE6_CARPET = Carpet(2, 3, frozenset({(0, 0), (0, 2), (1, 1)}))


# ---------------------------------------------------------------- spec files

def _number(text: str) -> float:
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _pairs(text: str) -> list[tuple[str, str]]:
    out = re.findall(r"\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)", text)
    if not out:
        raise SpecError(f"expected a list of (a,b) pairs, got {text!r}")
    return out


def parse_spec(text: str, overrides: dict | None = None) -> FractalSpec:
    """Build a spec from ``key=value`` text; ``overrides`` replace file values."""
    kv: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"malformed line {raw!r}")
        k, v = line.split("=", 1)
        kv[k.strip().lower()] = v.strip()
    for k, v in (overrides or {}).items():
        if v is not None:
            kv[k] = str(v)
    variant = kv.pop("variant", None)
    try:
        if variant == "countable":
            return Countable(_number(kv["p"]))
        if variant == "carpet":
            cells = frozenset((int(a), int(b)) for a, b in _pairs(kv["cells"]))
            return Carpet(int(kv["m"]), int(kv["n"]), cells)
        if variant == "selfsimilar":
            maps = tuple((_number(c), _number(t)) for c, t in _pairs(kv["maps"]))
            return SelfSimilarLine(maps)
        if variant == "spiral":
            return Spiral(_number(kv["p"]))
        if variant == "percolation":
            return Percolation(int(kv["d"]), int(kv["m"]), _number(kv["p"]), int(kv.get("seed", 0)))
    except KeyError as exc:
        raise SpecError(f"{variant}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown variant {variant!r}")


def load_spec(path: str | Path, overrides: dict | None = None) -> FractalSpec:
    return parse_spec(Path(path).read_text(), overrides)


def _fmt(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def format_spec(spec: FractalSpec) -> str:
    """Inverse of :func:`parse_spec` (round-trips every spec)."""
    lines = [f"variant={spec.variant}"]
    if isinstance(spec, Countable) or isinstance(spec, Spiral):
        lines.append(f"p={_fmt(spec.p)}")
    elif isinstance(spec, Carpet):
        cells = ";".join(f"({c},{r})" for c, r in sorted(spec.cells))
        lines += [f"m={spec.m}", f"n={spec.n}", f"cells={cells}"]
    elif isinstance(spec, SelfSimilarLine):
        lines.append("maps=" + ";".join(f"({c!r},{t!r})" for c, t in spec.maps))
    elif isinstance(spec, Percolation):
        lines += [f"d={spec.d}", f"m={spec.m}", f"p={spec.p!r}", f"seed={spec.seed}"]
    return "\n".join(lines) + "\n"


def spec_label(spec: FractalSpec) -> str:
    """Short single-token label, used in CSV ``family`` columns and file names."""
    if isinstance(spec, (Countable, Spiral)):
        return f"{spec.variant}-p{Fraction(spec.p).limit_denominator(1000)}".replace("/", "_")
    if isinstance(spec, Carpet):
        cells = "".join(f"{c}{r}" for c, r in sorted(spec.cells))
        return f"carpet-m{spec.m}n{spec.n}-{cells}"
    if isinstance(spec, SelfSimilarLine):
        return f"selfsimilar-{len(spec.maps)}maps"
    return f"percolation-d{spec.d}m{spec.m}p{spec.p:g}-s{spec.seed}"


# ---------------------------------------------------------------- carpets

@dataclass(frozen=True)
class CarpetStats:
    M: int
    C_list: tuple
    C_max: int
    N: int
    uniform_fibres: bool


def carpet_derived(spec: Carpet) -> CarpetStats:
    """Column statistics; ``C_list`` is ordered by column index."""
    cols: dict[int, int] = {}
    for c, _ in spec.cells:
        cols[c] = cols.get(c, 0) + 1
    C = tuple(cols[c] for c in sorted(cols))
    return CarpetStats(len(C), C, max(C), spec.N, all(x == max(C) for x in C))


def _level(resolution: float, base: int) -> int:
    return max(1, math.ceil(math.log(1 / resolution) / math.log(base) - _EPS))


def carpet_rectangles(spec: Carpet, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower-left corners (column and row integer indices) of the level-``k`` rectangles.

    Returns integer arrays ``(I, J)`` so the rectangles are
    ``[I m**-k, (I+1) m**-k] x [J n**-k, (J+1) n**-k]``.
    """
    cells = np.array(sorted(spec.cells), dtype=np.int64)
    I = np.zeros(1, dtype=np.int64)
    J = np.zeros(1, dtype=np.int64)
    for _ in range(k):
        I = (I[:, None] * spec.m + cells[None, :, 0]).ravel()
        J = (J[:, None] * spec.n + cells[None, :, 1]).ravel()
    return I, J


def _carpet_cloud(spec: Carpet, resolution: float) -> PointCloud:
    k = _level(resolution, spec.m)
    if abs(spec.m ** (-k) - resolution) > _EPS * resolution:
        log.warning("carpet: resolution %.3g rounded down to m**-%d", resolution, k)
    I, J = carpet_rectangles(spec, k)
    pts = np.column_stack([(I + 0.5) / spec.m**k, (J + 0.5) / spec.n**k])
    return PointCloud(pts, float(spec.m) ** (-k), (np.zeros(2), np.ones(2)))


# ---------------------------------------------------------------- other families

def countable_threshold(p: float, resolution: float) -> int:
    """Smallest ``n`` with ``n**-p - (n+1)**-p <= resolution``.

    Gaps decrease in ``n``, so from this index on ``F_p`` is
    resolution-dense. The value is close to ``(p / resolution)**(1/(1+p))``.
    """

    def gap(n):
        return n ** (-p) - (n + 1) ** (-p)

    n = max(1, math.floor((p / resolution) ** (1.0 / (1.0 + p))))
    while n > 1 and gap(n - 1) <= resolution * (1 + _EPS):
        n -= 1
    while gap(n) > resolution * (1 + _EPS):
        n += 1
    return n


def countable_cutoff(p: float, resolution: float) -> int:
    """Last exact index ``ceil(resolution**(-1/(1+p)))`` kept by the generator.

    >>> countable_cutoff(1.0, 1e-4)
    100
    """
    x = resolution ** (-1.0 / (1.0 + p))
    return max(1, math.ceil(x - _EPS * x))


def _countable_cloud(spec: Countable, resolution: float) -> PointCloud:
    # exact points down to the cutoff, a uniform mesh on the tail below it;
    # for p > 2 the true gaps just under the cutoff reach about p * resolution
    nstar = countable_cutoff(spec.p, resolution)
    sparse = np.arange(1, nstar + 1, dtype=float) ** (-spec.p)
    top = resolution ** (spec.p / (1.0 + spec.p))
    mesh = np.arange(0, math.floor(top / resolution + _EPS) + 1) * resolution
    return PointCloud(np.concatenate([sparse, mesh]), resolution, (np.zeros(1), np.ones(1)))


def _selfsimilar_cloud(spec: SelfSimilarLine, resolution: float) -> PointCloud:
    cs = np.array([c for c, _ in spec.maps])
    ts = np.array([t for _, t in spec.maps])
    ratio = np.ones(1)
    shift = np.zeros(1)
    done = []
    while ratio.size:
        # compose current word with each map applied first: x -> ratio*(c x + t) + shift
        ratio, shift = (ratio[:, None] * cs[None, :]).ravel(), (ratio[:, None] * ts[None, :] + shift[:, None]).ravel()
        small = ratio < resolution
        done.append(shift[small])
        ratio, shift = ratio[~small], shift[~small]
        if ratio.size > 5e7:
            raise DomainError("self-similar generation exceeds memory budget; raise resolution")
    return PointCloud(np.concatenate(done), resolution, (np.zeros(1), np.ones(1)))


def _spiral_cloud(spec: Spiral, resolution: float) -> PointCloud:
    xs = spiral_parameters(spec, resolution)
    mod = xs ** (-spec.p)
    pts = np.column_stack([mod * np.cos(xs), mod * np.sin(xs)])
    pts = np.vstack([pts, np.zeros((1, 2))])
    return PointCloud(pts, resolution, (-np.ones(2), np.ones(2)))


def spiral_parameters(spec: Spiral, resolution: float) -> np.ndarray:
    """Curve parameters ``x`` used by :func:`generate`, in increasing order."""
    p = spec.p
    step = resolution / 2
    x_end = (1.0 / step) ** (1.0 / p)
    xs = []
    x = 1.0
    # speed |d/dx x^-p e^{ix}| decreases in x, so a step sized by the speed at x
    # moves at most `step` in arc length
    while x < x_end:
        xs.append(x)
        x += step * x**p / math.sqrt(1.0 + (p / x) ** 2)
    return np.array(xs)


# ---------------------------------------------------------------- percolation

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps modulo 2**64
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def cell_uniforms(seed: int, level: int, coords: np.ndarray) -> np.ndarray:
    """Deterministic uniforms in ``[0, 1)`` keyed by ``(seed, level, cell coordinates)``.

    ``coords`` has shape ``(n, d)``. The value for a cell never depends on
    which other cells are evaluated, so realizations can be deepened or
    evaluated in any order.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    with np.errstate(over="ignore"):
        h = _mix64(np.full(coords.shape[0], np.uint64(seed), dtype=np.uint64) ^ _mix64(np.array([level], dtype=np.uint64)))
        for axis in range(coords.shape[1]):
            h = _mix64(h ^ coords[:, axis].astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 2**53)


@dataclass
class PercolationRealization:
    """Kept cells per level; ``kept_cells[j]`` is an ``(n_j, d)`` integer array."""

    kept_cells: list
    survived: bool
    seed: int
    spec: Percolation = field(repr=False, default=None)

    @property
    def depth(self) -> int:
        return len(self.kept_cells) - 1


def realize(spec: Percolation, depth: int) -> PercolationRealization:
    """Run the construction to ``depth`` levels.

    Level 0 is the unit cube. A level-``j`` cell is kept when its parent is
    kept and its uniform draw is below ``p``.
    """
    if not isinstance(spec, Percolation):
        raise SpecError("realize needs a percolation spec")
    if depth < 1:
        raise DomainError("depth must be a positive integer")
    d, m = spec.d, spec.m
    children = np.array(np.meshgrid(*[np.arange(m)] * d, indexing="ij")).reshape(d, -1).T
    kept = [np.zeros((1, d), dtype=np.int64)]
    for level in range(1, depth + 1):
        parents = kept[-1]
        if parents.shape[0] == 0:
            kept.append(parents)
            continue
        cand = (parents[:, None, :] * m + children[None, :, :]).reshape(-1, d)
        u = cell_uniforms(spec.seed, level, cand)
        kept.append(cand[u < spec.p])
    return PercolationRealization(kept, kept[-1].shape[0] > 0, spec.seed, spec)


def _percolation_cloud(spec: Percolation, resolution: float) -> PointCloud:
    k = math.log(1 / resolution) / math.log(spec.m)
    if abs(k - round(k)) > 1e-6 or round(k) < 1:
        raise DomainError(f"percolation resolution must be m**-k, got {resolution}")
    k = int(round(k))
    real = realize(spec, k)
    if not real.survived:
        level = next(j for j, c in enumerate(real.kept_cells) if c.shape[0] == 0)
        raise ExtinctionError(spec.seed, level)
    pts = (real.kept_cells[-1] + 0.5) / spec.m**k
    return PointCloud(pts, float(spec.m) ** (-k), (np.zeros(spec.d), np.ones(spec.d)))


def generate(spec: FractalSpec, resolution: float) -> PointCloud:
    """Sample ``spec`` as a point cloud faithful at ``resolution``.

    Raises
    ------
    DomainError
        ``resolution`` outside ``(0, 1)``, or not a power of ``1/m`` for percolation.
    ExtinctionError
        The percolation realization is empty at the required level.
    """
    if not (0 < resolution < 1):
        raise DomainError(f"resolution must lie in (0, 1), got {resolution}")
    if isinstance(spec, Countable):
        return _countable_cloud(spec, resolution)
    if isinstance(spec, Carpet):
        return _carpet_cloud(spec, resolution)
    if isinstance(spec, SelfSimilarLine):
        return _selfsimilar_cloud(spec, resolution)
    if isinstance(spec, Spiral):
        return _spiral_cloud(spec, resolution)
    if isinstance(spec, Percolation):
        return _percolation_cloud(spec, resolution)
    raise SpecError(f"unsupported spec {spec!r}")
