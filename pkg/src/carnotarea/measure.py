"""Estimators for the spherical Hausdorff measure H^nu and both sides of the
area formula on group models.

Normalization: a cell of the anisotropic grid at scale delta (pitch delta**j in
layer j) carries weight omega_nu * delta**nu, so on full-dimensional sets the
estimates approach omega_nu times Lebesgue measure in exponential coordinates.
Every acceptance check compares two quantities built with this same constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import group, rng
from .algebra import CarnotAlgebra
from .errors import ResourceError
from .maps import GroupMap
from .regions import D2Box, Region, image_bounds

OMEGA_NU = 1.0
CELL_CAP = 400_000_000
SCAN_CHUNK = 1 << 20
SAMPLE_CHUNK = 1 << 17
LOW_OCCUPANCY = 4.0
BOUNDS_STREAM = 1 << 40


@dataclass(frozen=True)
class MeasureEstimate:
    value: float
    delta: float
    count: int
    omega_nu: float
    nu: int


@dataclass(frozen=True)
class ImageMeasure:
    """Multiplicity-weighted image measure at one grid scale."""

    value: float
    delta: float
    count: int
    omega_nu: float
    nu: int
    method: str
    multiplicity: dict = field(default_factory=dict)
    low_occupancy: bool = False


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    stderr: float
    samples: int


def grid_pitch(alg: CarnotAlgebra, delta: float) -> np.ndarray:
    return float(delta) ** alg.grading.degrees.astype(float)


def scan_grid(weight_fn, lower, upper, pitch, *, cap=CELL_CAP, workers=None) -> dict[int, int]:
    """Histogram {weight: cells} of ``weight_fn`` over all grid-cell centers in
    the box [lower, upper]; ``weight_fn`` maps centers to nonnegative ints."""
    lo = np.floor(np.asarray(lower) / pitch).astype(np.int64)
    hi = np.floor(np.asarray(upper) / pitch).astype(np.int64)
    shape = tuple(int(s) for s in hi - lo + 1)
    total = math.prod(shape)
    if total > cap:
        raise ResourceError(f"grid scan needs {total:.3e} cells, cap is {cap:.3e}")

    # innermost axis is enumerated densely, outer axes by unravelling
    inner = shape[-1]
    outer_shape = shape[:-1]
    n_outer = math.prod(outer_shape)
    rows_per_chunk = max(1, SCAN_CHUNK // inner)
    inner_centers = (lo[-1] + np.arange(inner) + 0.5) * pitch[-1]

    def task(k):
        start = k * rows_per_chunk
        stop = min(start + rows_per_chunk, n_outer)
        outer_idx = np.array(np.unravel_index(np.arange(start, stop), outer_shape)).T
        outer_centers = (lo[:-1] + outer_idx + 0.5) * pitch[:-1]
        centers = np.empty((stop - start, inner, len(shape)))
        centers[..., :-1] = outer_centers[:, None, :]
        centers[..., -1] = inner_centers[None, :]
        w = np.asarray(weight_fn(centers.reshape(-1, len(shape))), dtype=np.int64)
        return np.bincount(w)

    n_tasks = -(-n_outer // rows_per_chunk)
    hist: dict[int, int] = {}
    for part in rng.ordered_map(task, n_tasks, workers):
        for m in np.flatnonzero(part):
            if m:
                hist[int(m)] = hist.get(int(m), 0) + int(part[m])
    return hist


def occupied_cells(points: np.ndarray, pitch: np.ndarray) -> np.ndarray:
    """Integer indices (one row per cell) of the grid cells that contain ``points``."""
    return np.unique(np.floor(points / pitch).astype(np.int64), axis=0)


def hausdorff_estimate(alg: CarnotAlgebra, points, delta: float, *, nu: int | None = None,
                       lower=None, upper=None, omega_nu=OMEGA_NU, cap=CELL_CAP,
                       workers=None) -> MeasureEstimate:
    """Cover a set by grid cells at scale ``delta`` and count the cells it meets.

    ``points`` is either a membership predicate on batches of points, used with
    the bounding box ``lower``/``upper`` (a cell counts when its center is in
    the set), or an array of sample points (a cell counts when it holds one).
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    nu = group.homogeneous_dimension(alg) if nu is None else nu
    pitch = grid_pitch(alg, delta)
    if callable(points):
        if lower is None or upper is None:
            raise ValueError("a membership predicate needs a bounding box")
        hist = scan_grid(lambda c: points(c).astype(np.int64), lower, upper, pitch,
                         cap=cap, workers=workers)
        count = sum(hist.values())
    else:
        pts = np.asarray(points, dtype=float).reshape(-1, alg.dim)
        count = int(len(occupied_cells(pts, pitch))) if len(pts) else 0
    return MeasureEstimate(omega_nu * count * delta ** nu, delta, count, omega_nu, nu)


def _pieces(phi: GroupMap, region: Region):
    return [(piece, phi.restrict(piece)) for piece in region.pieces]


def area_lhs(phi: GroupMap, region: Region, samples: int, seed: int, *,
             omega_nu=OMEGA_NU, workers=None) -> IntegralEstimate:
    """Monte Carlo estimate of the integral of J^SR over ``region`` against H^nu."""
    tasks = []
    for k, (piece, n) in enumerate(zip(region.pieces, region.allocation(samples))):
        for c, (a, b) in enumerate(rng.split(n, SAMPLE_CHUNK)):
            tasks.append((k, c, b - a))

    def task(i):
        k, c, n = tasks[i]
        pts = region.pieces[k].sample(rng.stream(seed, (k << 32) | c), n)
        jac = phi.jacobian(pts)
        return k, float(jac.sum()), float((jac * jac).sum()), n

    stats = np.zeros((len(region.pieces), 3))
    for k, s, ss, n in rng.ordered_map(task, len(tasks), workers):
        stats[k] += (s, ss, n)
    value = 0.0
    var = 0.0
    for piece, (s, ss, n) in zip(region.pieces, stats):
        mean = s / n
        value += piece.volume * mean
        var += piece.volume ** 2 * max(ss / n - mean * mean, 0.0) / n
    return IntegralEstimate(omega_nu * value, omega_nu * math.sqrt(var), samples)


def area_rhs_multiplicity(phi: GroupMap, region: Region, image_delta: float, seed: int, *,
                          samples: int = 1_000_000, omega_nu=OMEGA_NU, cap=CELL_CAP,
                          workers=None) -> ImageMeasure:
    """Integral over the image of the number of preimages, at grid scale ``image_delta``.

    When every piece of the map is injective with a known inverse, each image
    cell center y gets multiplicity #{pieces k : phi_k^{-1}(y) in piece k}.
    Otherwise ``samples`` domain points are pushed forward and a cell's
    multiplicity is the number of pieces whose images occupy it; fibers of the
    catalog maps inside a convex piece are connected, so one piece contributes
    at most one preimage cluster per cell.
    """
    nu = group.homogeneous_dimension(phi.pre_alg)
    pitch = grid_pitch(phi.im_alg, image_delta)
    pieces = _pieces(phi, region)
    cell = omega_nu * image_delta ** nu

    if all(m.invertible for _, m in pieces):
        bounds = [image_bounds(m, p, rng.stream(seed, BOUNDS_STREAM + k))
                  for k, (p, m) in enumerate(pieces)]
        lower = np.min([b[0] for b in bounds], axis=0)
        upper = np.max([b[1] for b in bounds], axis=0)

        def multiplicity(y):
            out = np.zeros(len(y), dtype=np.int64)
            for piece, m in pieces:
                out += piece.contains(m.inverse(y))
            return out

        hist = scan_grid(multiplicity, lower, upper, pitch, cap=cap, workers=workers)
        total = sum(m * c for m, c in hist.items())
        return ImageMeasure(cell * total, image_delta, total, omega_nu, nu, "inverse-scan", hist)

    keys = []
    for k, ((piece, m), n) in enumerate(zip(pieces, region.allocation(samples))):
        chunks = rng.split(n, SAMPLE_CHUNK)

        def task(c, piece=piece, m=m, k=k):
            a, b = chunks[c]
            pts = piece.sample(rng.stream(seed, (k << 32) | c), b - a)
            return np.floor(m(pts) / pitch).astype(np.int64)

        idx = np.concatenate(rng.ordered_map(task, len(chunks), workers))
        keys.append(np.unique(idx, axis=0))
    merged, counts = np.unique(np.concatenate(keys), axis=0, return_counts=True)
    hist = {int(v): int(c) for v, c in zip(*np.unique(counts, return_counts=True))}
    total = int(counts.sum())
    low = samples / max(len(merged), 1) < LOW_OCCUPANCY
    return ImageMeasure(cell * total, image_delta, total, omega_nu, nu, "pushforward", hist, low)


def _hit_or_miss(phi: GroupMap, box: D2Box, samples: int, seed: int, workers) -> float:
    """Lebesgue measure of phi(box) by uniform sampling of its bounding box."""
    lower, upper = image_bounds(phi, box, rng.stream(seed, BOUNDS_STREAM))
    chunks = rng.split(samples, SAMPLE_CHUNK)

    def task(c):
        a, b = chunks[c]
        y = rng.stream(seed, c).uniform(lower, upper, size=(b - a, len(lower)))
        return int(np.count_nonzero(box.contains(phi.inverse(y))))

    hits = sum(rng.ordered_map(task, len(chunks), workers))
    return float(np.prod(upper - lower)) * hits / samples


def local_distortion(phi: GroupMap, x, t: float, *, samples: int = 1_000_000, seed: int = 0,
                     workers=None) -> float:
    """H^nu(phi(Box(x, t))) / H^nu(Box(x, t)).

    The image measure is a hit-or-miss estimate over the image's bounding box
    (membership through the inverse map); the box measure is the closed form
    omega_nu * box_volume(t). Degenerate maps are handled by cell occupancy of
    pushed-forward samples at scale t/64.
    """
    box = D2Box(phi.pre_alg, np.asarray(x, dtype=float), float(t))
    piece_map = phi.restrict(box)
    if piece_map.invertible:
        image = _hit_or_miss(piece_map, box, samples, seed, workers)
    else:
        image = area_rhs_multiplicity(piece_map, Region((box,)), t / 64, seed, samples=samples,
                                      workers=workers).value / OMEGA_NU
    return image / box.volume


def rejection_volume(box: D2Box, samples: int, seed: int) -> float:
    """Volume of a d2-box from the acceptance rate of its rejection sampler."""
    _, rate = box.sample_with_rate(rng.stream(seed, 0), samples)
    return rate * box.bounding_volume()
