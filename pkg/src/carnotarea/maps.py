"""Catalog of maps between group models used by the experiments.

Each map acts on batches of points in exponential coordinates and knows its
hc-differential. Maps that are injective expose ``inverse``; piecewise maps
hand out their injective pieces through ``restrict``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import group
from .algebra import CarnotAlgebra
from .differential import (HorizontalHomomorphism, dilation_homomorphism,
                           extend_from_horizontal, identity_homomorphism, is_degenerate,
                           sr_jacobian)
from .errors import DomainError, StructureError


class GroupMap:
    pre_alg: CarnotAlgebra
    im_alg: CarnotAlgebra

    @property
    def invertible(self) -> bool:
        return False

    def inverse(self, y):
        raise NotImplementedError(f"{type(self).__name__} has no inverse")

    def differential(self, x) -> HorizontalHomomorphism:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """Sub-Riemannian Jacobian at every point of the batch ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.full(len(x), sr_jacobian(self.differential(x[0])))

    def restrict(self, piece) -> "GroupMap":
        return self


@dataclass(frozen=True, eq=False)
class Homomorphism(GroupMap):
    hom: HorizontalHomomorphism

    @classmethod
    def from_horizontal(cls, alg: CarnotAlgebra, b1, im_alg: CarnotAlgebra | None = None):
        return cls(extend_from_horizontal(alg, im_alg or alg, b1))

    @property
    def pre_alg(self):
        return self.hom.pre_alg

    @property
    def im_alg(self):
        return self.hom.im_alg

    @property
    def invertible(self) -> bool:
        return self.pre_alg.dim == self.im_alg.dim and not is_degenerate(self.hom)

    def __call__(self, x):
        return self.hom(x)

    def inverse(self, y):
        if not self.invertible:
            raise NotImplementedError("degenerate or non-square homomorphism")
        return np.linalg.solve(self.hom.full_matrix, np.asarray(y, dtype=float).T).T

    def differential(self, x=None):
        return self.hom


def identity(alg: CarnotAlgebra) -> Homomorphism:
    return Homomorphism(identity_homomorphism(alg))


@dataclass(frozen=True, eq=False)
class LeftTranslation(GroupMap):
    alg: CarnotAlgebra
    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if g.shape != (self.alg.dim,):
            raise StructureError(f"translation vector must have {self.alg.dim} coordinates")
        object.__setattr__(self, "g", g)

    pre_alg = property(lambda self: self.alg)
    im_alg = property(lambda self: self.alg)
    invertible = property(lambda self: True)

    def __call__(self, x):
        return group.multiply(self.alg, self.g, x)

    def inverse(self, y):
        return group.multiply(self.alg, group.inverse(self.alg, self.g), y)

    def differential(self, x=None):
        return identity_homomorphism(self.alg)


@dataclass(frozen=True, eq=False)
class Dilation(GroupMap):
    alg: CarnotAlgebra
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise DomainError("dilation factor must be positive")

    pre_alg = property(lambda self: self.alg)
    im_alg = property(lambda self: self.alg)
    invertible = property(lambda self: True)

    def __call__(self, x):
        return group.dilate(self.alg, self.r, x)

    def inverse(self, y):
        return group.dilate(self.alg, 1.0 / self.r, y)

    def differential(self, x=None):
        return dilation_homomorphism(self.alg, self.r)


@dataclass(frozen=True, eq=False)
class Composition(GroupMap):
    """``maps[0]`` after ``maps[1]`` after ... after ``maps[-1]``."""

    maps: tuple

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise StructureError("composition of no maps")
        for outer, inner in zip(maps, maps[1:]):
            if outer.pre_alg.grading != inner.im_alg.grading:
                raise StructureError("consecutive maps do not share a group model")
        object.__setattr__(self, "maps", maps)

    pre_alg = property(lambda self: self.maps[-1].pre_alg)
    im_alg = property(lambda self: self.maps[0].im_alg)

    @property
    def invertible(self) -> bool:
        return all(m.invertible for m in self.maps)

    def __call__(self, x):
        for m in reversed(self.maps):
            x = m(x)
        return x

    def inverse(self, y):
        for m in self.maps:
            y = m.inverse(y)
        return y

    def differential(self, x=None):
        x = None if x is None else np.asarray(x, dtype=float)
        total = None
        for m in reversed(self.maps):
            d = m.differential(x)
            total = d if total is None else d.compose(total)
            if x is not None:
                x = m(x)
        return total

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.full(len(x), sr_jacobian(self.differential(x[0])))


@dataclass(frozen=True, eq=False)
class TwoPiece(GroupMap):
    """``map_a`` on ``box_a`` and ``map_b`` on ``box_b``; undefined elsewhere."""

    map_a: GroupMap
    box_a: object
    map_b: GroupMap
    box_b: object

    pre_alg = property(lambda self: self.map_a.pre_alg)
    im_alg = property(lambda self: self.map_a.im_alg)

    def _which(self, x):
        in_a = self.box_a.contains(x)
        in_b = self.box_b.contains(x)
        if np.any(~(in_a | in_b)):
            raise DomainError("two-piece map evaluated outside both pieces")
        return in_a

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        in_a = self._which(x)
        return np.where(in_a[..., None], self.map_a(x), self.map_b(x))

    def differential(self, x):
        x = np.asarray(x, dtype=float)
        return (self.map_a if self._which(x[None])[0] else self.map_b).differential(x)

    def jacobian(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        in_a = self._which(x)
        return np.where(in_a, self.map_a.jacobian(x), self.map_b.jacobian(x))

    def restrict(self, piece) -> GroupMap:
        if piece.within(self.box_a):
            return self.map_a.restrict(piece)
        if piece.within(self.box_b):
            return self.map_b.restrict(piece)
        raise DomainError("region piece is not contained in a single piece of the map")
