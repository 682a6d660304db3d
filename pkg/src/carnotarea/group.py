"""Carnot groups in exponential coordinates.

A point is its own coordinate vector (the exponential chart is the identity),
so the group law is the Baker-Campbell-Hausdorff series of the algebra. In a
step-M nilpotent algebra every bracket of M+1 or more entries vanishes and the
Dynkin form of the series, cut at commutator weight M, is exact.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .algebra import CarnotAlgebra, Grading
from .errors import DomainError, StructureError


def _compositions(weight_cap: int, blocks: int):
    """Tuples ((r_1, s_1), ..., (r_n, s_n)) with r_i + s_i > 0 and total <= cap."""
    pairs = [(r, s) for r in range(weight_cap + 1) for s in range(weight_cap + 1)
             if 0 < r + s <= weight_cap]
    for combo in itertools.product(pairs, repeat=blocks):
        if sum(r + s for r, s in combo) <= weight_cap:
            yield combo


@lru_cache(maxsize=None)
def dynkin_terms(weight: int) -> tuple[tuple[str, Fraction], ...]:
    """Words over {X, Y} with their Dynkin coefficients, up to ``weight`` letters.

    A word w_1...w_m stands for the right-nested bracket [w_1, [w_2, ..., w_m]].
    """
    coeffs: dict[str, Fraction] = {}
    for n in range(1, weight + 1):
        sign = Fraction((-1) ** (n - 1), n)
        for combo in _compositions(weight, n):
            word = "".join("X" * r + "Y" * s for r, s in combo)
            # right-nested brackets ending in XX or YY vanish identically
            if len(word) > 1 and word[-1] == word[-2]:
                continue
            denom = len(word)
            for r, s in combo:
                denom *= math.factorial(r) * math.factorial(s)
            coeffs[word] = coeffs.get(word, Fraction(0)) + sign / denom
    return tuple((w, c) for w, c in sorted(coeffs.items(), key=lambda t: (len(t[0]), t[0]))
                 if c != 0)


def _check(alg: CarnotAlgebra, *points):
    n = alg.dim
    for p in points:
        if np.shape(p)[-1:] != (n,):
            raise StructureError(f"point of shape {np.shape(p)} does not fit dimension {n}")


def multiply(alg: CarnotAlgebra, a, b) -> np.ndarray:
    """Group product ``a * b``; ``a`` and ``b`` broadcast over leading axes."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check(alg, a, b)
    dtype = np.result_type(a, b, float)
    a = a.astype(dtype, copy=False)
    b = b.astype(dtype, copy=False)
    out = a + b
    if alg.depth == 1:
        return out
    memo: dict[str, np.ndarray] = {"X": a, "Y": b}
    for word, coeff in dynkin_terms(alg.depth):
        if len(word) == 1:
            continue
        # fill in right-nested brackets of the suffixes, innermost first
        for start in range(len(word) - 2, -1, -1):
            suffix = word[start:]
            if suffix not in memo:
                memo[suffix] = alg.bracket(memo[suffix[0]], memo[suffix[1:]])
        out = out + float(coeff) * memo[word]
    return out


def inverse(alg: CarnotAlgebra, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    _check(alg, a)
    return -a


def dilate(alg_or_grading, t: float, a) -> np.ndarray:
    """Anisotropic dilation: coordinate of degree k is scaled by t**k."""
    if not t > 0:
        raise DomainError(f"dilation factor must be positive, got {t}")
    grading = _grading(alg_or_grading)
    a = np.asarray(a, dtype=float)
    return a * float(t) ** grading.degrees


def layer_norms(grading: Grading, x) -> np.ndarray:
    """Euclidean norm of every layer, shape ``(..., M)``."""
    x = np.asarray(x, dtype=float)
    return np.stack([np.linalg.norm(part, axis=-1) for part in grading.layers(x)], axis=-1)


def homogeneous_norm(grading: Grading, x) -> np.ndarray:
    """max_j |layer_j|^(1/j) of a coordinate vector (the d2 gauge of ``x``)."""
    norms = layer_norms(grading, x)
    powers = 1.0 / np.arange(1, grading.depth + 1)
    return np.max(norms ** powers, axis=-1)


def d2(alg: CarnotAlgebra, x, u) -> np.ndarray:
    """Box quasidistance d2(x, u): the gauge of u^{-1} x (``u`` is the base point)."""
    return homogeneous_norm(alg.grading, multiply(alg, inverse(alg, u), x))


def d_inf(alg: CarnotAlgebra, x, u) -> np.ndarray:
    """Coordinatewise max quasidistance; diagnostic only."""
    y = multiply(alg, inverse(alg, u), x)
    return np.max(np.abs(y) ** (1.0 / alg.grading.degrees), axis=-1)


def homogeneous_dimension(alg_or_grading) -> int:
    g = _grading(alg_or_grading)
    return int(sum(j * n for j, n in enumerate(g.layer_dims, start=1)))


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def box_volume(alg_or_grading, r: float) -> float:
    """Lebesgue volume of the d2-box of radius ``r`` (a product of Euclidean balls)."""
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    g = _grading(alg_or_grading)
    vol = 1.0
    for j, n in enumerate(g.layer_dims, start=1):
        vol *= unit_ball_volume(n) * float(r) ** (j * n)
    return vol


def quasi_triangle_constant(alg: CarnotAlgebra, x, y, z) -> float:
    """max d2(x,z) / (d2(x,y) + d2(y,z)) over the given triples."""
    num = d2(alg, x, z)
    den = d2(alg, x, y) + d2(alg, y, z)
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))


def _grading(obj) -> Grading:
    return obj if isinstance(obj, Grading) else obj.grading
