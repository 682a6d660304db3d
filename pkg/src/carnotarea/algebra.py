"""Graded nilpotent Lie algebras given by structure constants.

A basis X_1..X_N is split into consecutive layers of sizes n_1..n_M; the
bracket is ``[X_i, X_j] = sum_k c[i, j, k] X_k``. Indices are 0-based in code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import EquiregularityError, StructureError

JACOBI_TOL = 1e-12
ANTISYMMETRY_TOL = 1e-12
GRADING_TOL = 1e-12
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class Grading:
    layer_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.layer_dims)
        if not dims or any(n <= 0 for n in dims):
            raise StructureError(f"layer dimensions must be positive, got {self.layer_dims}")
        object.__setattr__(self, "layer_dims", dims)

    @property
    def depth(self) -> int:
        return len(self.layer_dims)

    @property
    def dim(self) -> int:
        return sum(self.layer_dims)

    @property
    def degrees(self) -> np.ndarray:
        """Layer (1-based) of every basis index."""
        return np.repeat(np.arange(1, self.depth + 1), self.layer_dims)

    def layer_slice(self, j: int) -> slice:
        """Index range of layer ``j`` (1-based)."""
        if not 1 <= j <= self.depth:
            raise StructureError(f"layer {j} outside 1..{self.depth}")
        start = sum(self.layer_dims[: j - 1])
        return slice(start, start + self.layer_dims[j - 1])

    def layers(self, x: np.ndarray) -> list[np.ndarray]:
        return [x[..., self.layer_slice(j)] for j in range(1, self.depth + 1)]


@dataclass(frozen=True, eq=False)
class CarnotAlgebra:
    grading: Grading
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        n = self.grading.dim
        if c.shape != (n, n, n):
            raise StructureError(
                f"structure tensor has shape {c.shape}, grading needs {(n, n, n)}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_brackets(cls, layer_dims: Sequence[int],
                      brackets: Iterable[tuple[int, int, int, float]]) -> "CarnotAlgebra":
        """Build from nonzero brackets ``(i, j, k, value)`` meaning [X_i, X_j] has
        X_k-coefficient ``value``; the antisymmetric entries are filled in."""
        grading = Grading(tuple(layer_dims))
        n = grading.dim
        c = np.zeros((n, n, n))
        for i, j, k, value in brackets:
            if not all(0 <= idx < n for idx in (i, j, k)):
                raise StructureError(f"bracket index out of range in {(i, j, k)}")
            if i == j:
                raise StructureError(f"[X_{i}, X_{i}] must vanish")
            c[i, j, k] = value
            c[j, i, k] = -value
        return cls(grading, c)

    @property
    def dim(self) -> int:
        return self.grading.dim

    @property
    def depth(self) -> int:
        return self.grading.depth

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Bracket of (batches of) coordinate vectors; ``x`` and ``y`` broadcast."""
        x, y = np.broadcast_arrays(x, y)
        n = self.dim
        outer = (x[..., :, None] * y[..., None, :]).reshape(x.shape[:-1] + (n * n,))
        return outer @ self.c.reshape(n * n, n)

    def __eq__(self, other):
        if not isinstance(other, CarnotAlgebra):
            return NotImplemented
        return self.grading == other.grading and np.array_equal(self.c, other.c)

    __hash__ = None


def heisenberg() -> CarnotAlgebra:
    """First Heisenberg algebra, [X1, X2] = X3."""
    return CarnotAlgebra.from_brackets((2, 1), [(0, 1, 2, 1.0)])


def engel() -> CarnotAlgebra:
    """Engel algebra, [X1, X2] = X3 and [X1, X3] = X4."""
    return CarnotAlgebra.from_brackets((2, 1, 1), [(0, 1, 2, 1.0), (0, 2, 3, 1.0)])


def abelian(n: int) -> CarnotAlgebra:
    return CarnotAlgebra(Grading((n,)), np.zeros((n, n, n)))


BUILTIN_ALGEBRAS = {"heisenberg": heisenberg, "engel": engel}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(ch.passed for ch in self.checks)

    def __getitem__(self, name: str) -> Check:
        for ch in self.checks:
            if ch.name == name:
                return ch
        raise KeyError(name)


def generation_ranks(alg: CarnotAlgebra) -> list[int]:
    """Rank of the bracket map H_1 x H_j -> H_{j+1}, for j = 1..M-1."""
    g = alg.grading
    h1 = g.layer_slice(1)
    ranks = []
    for j in range(1, g.depth):
        coef = alg.c[h1, g.layer_slice(j), g.layer_slice(j + 1)]
        mat = coef.reshape(-1, g.layer_dims[j])
        sv = np.linalg.svd(mat, compute_uv=False)
        ranks.append(int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0)
    return ranks


def validate_algebra(alg: CarnotAlgebra) -> ValidationReport:
    c = alg.c
    g = alg.grading
    deg = g.degrees

    anti = float(np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0))

    allowed = deg[:, None, None] + deg[None, :, None] == deg[None, None, :]
    grading = float(np.max(np.abs(np.where(allowed, 0.0, c)), initial=0.0))

    # [[X_i,X_j],X_l] + [[X_j,X_l],X_i] + [[X_l,X_i],X_j]
    cyc = np.einsum("ijk,klm->ijlm", c, c)
    jac = cyc + cyc.transpose(1, 2, 0, 3) + cyc.transpose(2, 0, 1, 3)
    jacobi = float(np.max(np.abs(jac), initial=0.0))

    ranks = generation_ranks(alg)
    needed = list(g.layer_dims[1:])
    deficit = max((n - r for r, n in zip(ranks, needed)), default=0)

    checks = (
        Check("antisymmetry", anti <= ANTISYMMETRY_TOL, anti),
        Check("grading", grading <= GRADING_TOL, grading),
        Check("jacobi", jacobi <= JACOBI_TOL, jacobi),
        Check("horizontal_generation", deficit == 0, float(deficit),
              detail=f"ranks={ranks} needed={needed}"),
    )
    return ValidationReport(checks)


def graded_truncation(grading: Grading, c: np.ndarray) -> np.ndarray:
    deg = grading.degrees
    keep = deg[:, None, None] + deg[None, :, None] == deg[None, None, :]
    return np.where(keep, c, 0.0)


def nilpotentize(frame, u) -> CarnotAlgebra:
    """Freeze the frame's structure constants at ``u`` and keep the graded part."""
    u = np.asarray(u, dtype=float)
    c = graded_truncation(frame.grading, np.asarray(frame.bracket_constants(u), dtype=float))
    alg = CarnotAlgebra(frame.grading, c)
    report = validate_algebra(alg)
    if not report["horizontal_generation"].passed:
        raise EquiregularityError(
            f"bracket generation fails at u={u.tolist()}: "
            f"{report['horizontal_generation'].detail}")
    if not report.passed:
        bad = [ch.name for ch in report.checks if not ch.passed]
        raise StructureError(f"frozen constants at u={u.tolist()} fail {bad}")
    return alg
