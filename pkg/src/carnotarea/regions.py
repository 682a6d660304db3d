"""Domains for integration: d2-boxes and coordinate boxes, and finite unions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import group
from .algebra import CarnotAlgebra
from .errors import DomainError, StructureError

BOUNDS_PAD = 0.03
BOUNDS_SAMPLES = 40_000


def padded_bounds(points: np.ndarray, pad=BOUNDS_PAD) -> tuple[np.ndarray, np.ndarray]:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    extent = np.maximum(hi - lo, 1e-12)
    return lo - pad * extent, hi + pad * extent


@dataclass(frozen=True, eq=False)
class D2Box:
    """Open box {x : d2(x, center) < radius} = center * Box(0, radius)."""

    alg: CarnotAlgebra
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (self.alg.dim,):
            raise StructureError(f"box center must have {self.alg.dim} coordinates")
        if not self.radius > 0:
            raise DomainError("box radius must be positive")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return self.alg.dim

    @property
    def volume(self) -> float:
        # left translations preserve Lebesgue measure in exponential coordinates
        return group.box_volume(self.alg, self.radius)

    def _local_bounds(self):
        half = self.radius ** self.alg.grading.degrees.astype(float)
        return -half, half

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not np.any(self.center):
            return group.homogeneous_norm(self.alg.grading, x) < self.radius
        return group.d2(self.alg, x, self.center) < self.radius

    def sample_with_rate(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, float]:
        """``n`` uniform points and the acceptance rate of the rejection sampler."""
        lo, hi = self._local_bounds()
        out = []
        have = tried = 0
        local = D2Box(self.alg, np.zeros(self.dim), self.radius)
        while have < n:
            batch = max(1024, int(1.3 * (n - have) / 0.3))
            cand = rng.uniform(lo, hi, size=(batch, self.dim))
            keep = cand[local.contains(cand)]
            tried += batch
            out.append(keep)
            have += len(keep)
        pts = np.concatenate(out)[:n]
        if np.any(self.center):
            pts = group.multiply(self.alg, self.center, pts)
        return pts, have / tried

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.sample_with_rate(rng, n)[0]

    def bounding_volume(self) -> float:
        lo, hi = self._local_bounds()
        return float(np.prod(hi - lo))

    def boundary_sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Points with every layer on its sphere of radius r^j."""
        parts = []
        for j, nj in enumerate(self.alg.grading.layer_dims, start=1):
            d = rng.standard_normal((n, nj))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            parts.append(d * self.radius ** j)
        pts = np.concatenate(parts, axis=1)
        return group.multiply(self.alg, self.center, pts) if np.any(self.center) else pts

    def within(self, other: "D2Box") -> bool:
        """Conservative test that this box lies inside ``other``."""
        if self.alg.grading != other.alg.grading:
            return False
        if np.allclose(self.center, other.center) and self.radius <= other.radius:
            return True
        edge = self.boundary_sample(np.random.default_rng(0), 2000)
        return bool(np.all(other.contains(edge)) and other.contains(self.center[None])[0])


@dataclass(frozen=True, eq=False)
class CoordBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
            raise DomainError("coordinate box needs matching lower < upper vectors")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower) & (x < self.upper), axis=-1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def boundary_sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        pts = self.sample(rng, n)
        side = rng.integers(0, self.dim, n)
        top = rng.integers(0, 2, n).astype(bool)
        rows = np.arange(n)
        pts[rows, side] = np.where(top, self.upper[side], self.lower[side])
        return pts

    def within(self, other) -> bool:
        if isinstance(other, CoordBox):
            return bool(np.all(self.lower >= other.lower) and np.all(self.upper <= other.upper))
        corners = np.array(np.meshgrid(*zip(self.lower, self.upper))).reshape(self.dim, -1).T
        return bool(np.all(other.contains(corners)))


@dataclass(frozen=True, eq=False)
class Region:
    """Finite union of pairwise disjoint pieces."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise DomainError("a region needs at least one piece")
        if len({p.dim for p in pieces}) != 1:
            raise StructureError("all pieces of a region must share a dimension")
        object.__setattr__(self, "pieces", pieces)

    @property
    def volume(self) -> float:
        return float(sum(p.volume for p in self.pieces))

    def contains(self, x) -> np.ndarray:
        return np.any([p.contains(x) for p in self.pieces], axis=0)

    def allocation(self, n: int) -> list[int]:
        """Samples per piece, proportional to volume, summing to ``n``."""
        vols = np.array([p.volume for p in self.pieces])
        raw = n * vols / vols.sum()
        counts = np.floor(raw).astype(int)
        counts[np.argsort(counts - raw)[: n - counts.sum()]] += 1
        return counts.tolist()


def image_bounds(fn, piece, rng: np.random.Generator, n=BOUNDS_SAMPLES):
    """Padded bounding box of fn(piece) from interior and boundary samples."""
    pts = np.concatenate([piece.sample(rng, n), piece.boundary_sample(rng, n)])
    return padded_bounds(fn(pts))
