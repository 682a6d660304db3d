"""Horizontal homomorphisms between Carnot algebras and their Jacobians.

A horizontal homomorphism maps layer j of the source onto layer j of the
target and commutes with brackets, so its matrix is block diagonal and is
fixed by its first (horizontal) block.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import group
from .algebra import RANK_RTOL, CarnotAlgebra, generation_ranks
from .errors import AssumptionError, EquiregularityError, NotContactError, NotExtendableError, \
    StructureError

HOMOMORPHISM_TOL = 1e-10


def _rows(alg: CarnotAlgebra, j: int) -> slice:
    """Index range of layer j, empty when j exceeds the depth."""
    if j > alg.depth:
        return slice(alg.dim, alg.dim)
    return alg.grading.layer_slice(j)


@dataclass(frozen=True, eq=False)
class HorizontalHomomorphism:
    pre_alg: CarnotAlgebra
    im_alg: CarnotAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != self.pre_alg.depth:
            raise StructureError("one block per layer of the preimage is required")
        blocks = []
        for j, (b, n) in enumerate(zip(self.blocks, self.pre_alg.grading.layer_dims), 1):
            rows = _rows(self.im_alg, j)
            b = np.array(b, dtype=float)
            if b.size == 0:
                b = b.reshape(rows.stop - rows.start, n)
            if b.shape != (rows.stop - rows.start, n):
                raise StructureError(f"block {j} has shape {b.shape}, expected "
                                     f"{(rows.stop - rows.start, n)}")
            b.setflags(write=False)
            blocks.append(b)
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def full_matrix(self) -> np.ndarray:
        f = np.zeros((self.im_alg.dim, self.pre_alg.dim))
        for j, b in enumerate(self.blocks, start=1):
            f[_rows(self.im_alg, j), self.pre_alg.grading.layer_slice(j)] = b
        return f

    def __call__(self, x) -> np.ndarray:
        """Action on (batches of) points in exponential coordinates."""
        return np.asarray(x, dtype=float) @ self.full_matrix.T

    def residual(self) -> float:
        """max_{i,j} |L[X_i, X_j] - [L X_i, L X_j]|."""
        f = self.full_matrix
        lhs = np.einsum("ijk,ak->ija", self.pre_alg.c, f)
        rhs = np.einsum("ai,bj,abk->ijk", f, f, self.im_alg.c)
        return float(np.max(np.abs(lhs - rhs), initial=0.0))

    def compose(self, inner: "HorizontalHomomorphism") -> "HorizontalHomomorphism":
        """``self`` after ``inner``."""
        if inner.im_alg.grading != self.pre_alg.grading:
            raise StructureError("gradings of the composed homomorphisms do not match")
        blocks = []
        for j in range(1, inner.pre_alg.depth + 1):
            mid = inner.blocks[j - 1]
            outer = self.blocks[j - 1] if j <= self.pre_alg.depth else np.zeros((0, mid.shape[0]))
            blocks.append(outer @ mid)
        return HorizontalHomomorphism(inner.pre_alg, self.im_alg, tuple(blocks))


def identity_homomorphism(alg: CarnotAlgebra) -> HorizontalHomomorphism:
    return HorizontalHomomorphism(alg, alg, tuple(np.eye(n) for n in alg.grading.layer_dims))


def dilation_homomorphism(alg: CarnotAlgebra, r: float) -> HorizontalHomomorphism:
    return HorizontalHomomorphism(
        alg, alg, tuple(r ** j * np.eye(n) for j, n in enumerate(alg.grading.layer_dims, 1)))


def _independent_columns(mat: np.ndarray, count: int) -> list[int]:
    """First ``count`` columns of ``mat`` (in order) that are linearly independent."""
    chosen: list[int] = []
    scale = max(float(np.max(np.abs(mat), initial=0.0)), 1.0)
    for col in range(mat.shape[1]):
        trial = mat[:, chosen + [col]]
        if np.linalg.matrix_rank(trial, tol=RANK_RTOL * scale) == len(chosen) + 1:
            chosen.append(col)
            if len(chosen) == count:
                break
    return chosen


def extend_from_horizontal(pre_alg: CarnotAlgebra, im_alg: CarnotAlgebra,
                           b1) -> HorizontalHomomorphism:
    """Extend a horizontal block to the unique graded homomorphism it induces.

    Layer j+1 is spanned by brackets [X_a, X_b] with X_a horizontal and X_b in
    layer j. Pairs (a, b) are enumerated in lexicographic order; the first
    independent ones fix B_{j+1}, the remaining ones must agree with it.
    """
    pre_g, im_g = pre_alg.grading, im_alg.grading
    b1 = np.asarray(b1, dtype=float)
    if b1.shape != (im_g.layer_dims[0], pre_g.layer_dims[0]):
        raise StructureError(
            f"horizontal block has shape {b1.shape}, expected "
            f"{(im_g.layer_dims[0], pre_g.layer_dims[0])}")
    if pre_g.layer_dims[0] > im_g.layer_dims[0]:
        raise AssumptionError("dim H_1 of the preimage exceeds dim H_1 of the image")
    if any(r < n for r, n in zip(generation_ranks(pre_alg), pre_g.layer_dims[1:])):
        raise EquiregularityError("preimage algebra is not generated by its first layer")

    full = np.zeros((im_alg.dim, pre_alg.dim))
    full[_rows(im_alg, 1), pre_g.layer_slice(1)] = b1
    blocks = [b1]
    h1 = range(pre_g.layer_slice(1).start, pre_g.layer_slice(1).stop)
    for j in range(1, pre_g.depth):
        layer_j = pre_g.layer_slice(j)
        nxt = pre_g.layer_slice(j + 1)
        target = _rows(im_alg, j + 1)
        pairs = [(a, b) for a in h1 for b in range(layer_j.start, layer_j.stop)]
        coeff = np.stack([pre_alg.c[a, b, nxt] for a, b in pairs], axis=1)
        images = np.stack([im_alg.bracket(full[:, a], full[:, b]) for a, b in pairs], axis=1)
        stray = np.delete(images, np.arange(target.start, target.stop), axis=0)
        rhs = images[target]
        cols = _independent_columns(coeff, pre_g.layer_dims[j])
        block = np.linalg.solve(coeff[:, cols].T, rhs[:, cols].T).T if rhs.size else \
            np.zeros((0, pre_g.layer_dims[j]))
        scale = max(1.0, float(np.max(np.abs(images), initial=0.0)))
        mismatch = float(np.max(np.abs(block @ coeff - rhs), initial=0.0))
        mismatch = max(mismatch, float(np.max(np.abs(stray), initial=0.0)))
        if mismatch > HOMOMORPHISM_TOL * scale:
            raise NotExtendableError(
                f"bracket expressions for layer {j + 1} disagree by {mismatch:.3e}", mismatch)
        full[target, nxt] = block
        blocks.append(block)

    hom = HorizontalHomomorphism(pre_alg, im_alg, tuple(blocks))
    res = hom.residual()
    if res > HOMOMORPHISM_TOL * max(1.0, float(np.max(np.abs(full)) ** 2)):
        raise NotExtendableError(f"homomorphism residual {res:.3e}", res)
    return hom


def rank(hom: HorizontalHomomorphism) -> int:
    sv = np.linalg.svd(hom.full_matrix, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))


def is_degenerate(hom: HorizontalHomomorphism) -> bool:
    return rank(hom) < hom.pre_alg.dim


def sr_jacobian(hom: HorizontalHomomorphism) -> float:
    """sqrt(det(F^T F)) with both bases taken orthonormal; zero on the rank drop.

    Evaluated as the product of the singular values of F, which equals the
    square root of the Gram determinant without squaring the condition number.
    """
    if is_degenerate(hom):
        return 0.0
    return float(np.prod(np.linalg.svd(hom.full_matrix, compute_uv=False)))


@dataclass(frozen=True, eq=False)
class PansuEstimate:
    homomorphism: HorizontalHomomorphism
    t: np.ndarray
    horizontal_blocks: np.ndarray
    deviation: np.ndarray
    error: np.ndarray | None


def pansu_estimate(phi: Callable[[np.ndarray], np.ndarray], u, t_schedule: Sequence[float],
                   pre_alg: CarnotAlgebra | None = None, im_alg: CarnotAlgebra | None = None,
                   reference=None) -> PansuEstimate:
    """Estimate the hc-differential of ``phi`` at ``u`` from rescaled quotients.

    For each t the quotient delta_{1/t}(phi(u)^{-1} phi(u delta_t e_i)) is taken
    along every horizontal basis vector e_i and projected to the first layer.
    ``deviation`` is |B1(t) - B1(t_min)|; ``error`` is |B1(t) - reference| when
    an analytic horizontal block is supplied.
    """
    pre_alg = pre_alg if pre_alg is not None else phi.pre_alg
    im_alg = im_alg if im_alg is not None else phi.im_alg
    t = np.asarray(t_schedule, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise ValueError("t schedule must be positive and strictly decreasing")
    u = np.asarray(u, dtype=float)
    n1 = pre_alg.grading.layer_dims[0]
    basis = np.eye(pre_alg.dim)[:n1]
    base_image = group.inverse(im_alg, phi(u))
    h1 = im_alg.grading.layer_slice(1)

    estimates = []
    for s in t:
        moved = group.multiply(pre_alg, u, group.dilate(pre_alg, s, basis))
        quot = group.dilate(im_alg, 1.0 / s, group.multiply(im_alg, base_image, phi(moved)))
        estimates.append(quot[:, h1].T)
    estimates = np.array(estimates)
    deviation = np.linalg.norm(estimates - estimates[-1], axis=(1, 2))
    error = None
    if reference is not None:
        error = np.linalg.norm(estimates - np.asarray(reference, dtype=float), axis=(1, 2))
    try:
        hom = extend_from_horizontal(pre_alg, im_alg, estimates[-1])
    except NotExtendableError as exc:
        raise NotContactError(
            f"horizontal block at t={t[-1]:g} induces no homomorphism: {exc}") from exc
    return PansuEstimate(hom, t, estimates, deviation, error)
