"""Carnot manifolds given by a C^1 frame of vector fields on a coordinate box.

Flows of constant combinations of the frame are integrated with fixed-step
RK4; normal coordinates invert that map by damped Newton iteration. All
routines accept batches of points along leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import group
from .algebra import CarnotAlgebra, Grading, engel, heisenberg, nilpotentize
from .errors import DomainError, FlowEscapeError, InversionError, StructureError

RK4_STEPS = 256
NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
NEWTON_RESTARTS = 3


@dataclass(frozen=True, eq=False)
class FramedManifold:
    """Frame X_1..X_N on the box [lower, upper], widened by ``margin`` for flows.

    ``fields(p)`` returns an array of shape ``p.shape[:-1] + (N, N)`` whose row
    ``i`` is X_i(p); ``bracket_constants(p)`` returns c_ijk(p) for one point.
    """

    name: str
    grading: Grading
    fields: Callable[[np.ndarray], np.ndarray]
    bracket_constants: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    margin: float = 0.0

    @property
    def dim(self) -> int:
        return self.grading.dim

    def contains(self, p, margin=None) -> np.ndarray:
        m = self.margin if margin is None else margin
        p = np.asarray(p, dtype=float)
        return np.all((p > self.lower - m) & (p < self.upper + m), axis=-1)


def _velocity(frame, v, p):
    return np.einsum("...i,...ij->...j", v, frame.fields(p))


def _integrate(frame: FramedManifold, u, v, steps=RK4_STEPS):
    """RK4 endpoints and exit times (``inf`` for curves that stay inside)."""
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    p = u.copy()
    h = 1.0 / steps
    exit_time = np.full(p.shape[:-1], np.inf)
    for n in range(steps):
        k1 = _velocity(frame, v, p)
        k2 = _velocity(frame, v, p + 0.5 * h * k1)
        k3 = _velocity(frame, v, p + 0.5 * h * k2)
        k4 = _velocity(frame, v, p + h * k3)
        p = p + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out = ~frame.contains(p) & np.isinf(exit_time)
        if np.any(out):
            exit_time[out] = (n + 1) * h
    return p, exit_time


def flow(frame: FramedManifold, u, v, steps=RK4_STEPS) -> np.ndarray:
    """exp(sum v_i X_i)(u): value at time 1 of the integral curve from ``u``."""
    p, exit_time = _integrate(frame, u, v, steps)
    if np.any(np.isfinite(exit_time)):
        t = float(np.min(exit_time))
        raise FlowEscapeError(f"{frame.name}: integral curve leaves the domain at t={t:.4f}", t)
    return p


def _residual(frame, u, w, v, steps):
    p, exit_time = _integrate(frame, u, v, steps)
    r = np.max(np.abs(p - w), axis=-1)
    r[np.isfinite(exit_time)] = np.inf
    return p - w, r


def _jacobian(frame, u, v, steps):
    n = v.shape[-1]
    h = 1e-6 * np.maximum(1.0, np.max(np.abs(v), axis=-1))[:, None, None]
    e = np.eye(n)[None] * h
    vp = v[:, None, :] + e
    vm = v[:, None, :] - e
    uu = np.repeat(u[:, None, :], n, axis=1)
    fp, _ = _integrate(frame, uu, vp, steps)
    fm, _ = _integrate(frame, uu, vm, steps)
    # J[b, i, k] = d flow_i / d v_k
    return np.swapaxes((fp - fm) / (2 * h), 1, 2)


def _solve(jac, rhs):
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("bij,bj->bi", np.linalg.pinv(jac), rhs)


def _newton(frame, u, w, v, max_iter, steps):
    target = 1e-13 * np.maximum(1.0, np.max(np.abs(w), axis=-1))
    f, res = _residual(frame, u, w, v, steps)
    live = res > target
    for _ in range(max_iter):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        step = _solve(_jacobian(frame, u[idx], v[idx], steps), -f[idx])
        alpha = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(30):
            sel = np.flatnonzero(pending)
            if sel.size == 0:
                break
            rows = idx[sel]
            cand = v[rows] + alpha[sel, None] * step[sel]
            fc, rc = _residual(frame, u[rows], w[rows], cand, steps)
            better = rc < res[rows]
            good = rows[better]
            v[good], f[good], res[good] = cand[better], fc[better], rc[better]
            pending[sel[better]] = False
            alpha[sel[~better]] *= 0.5
        # no decrease along the Newton direction: stalled
        live[idx[pending]] = False
        live &= res > target
    return v, res


def normal_coords(frame: FramedManifold, u, w, *, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER,
                  restarts=NEWTON_RESTARTS, steps=RK4_STEPS) -> np.ndarray:
    """Coordinates of the first kind: ``v`` with flow(u, v) = w."""
    u, w = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(w, dtype=float))
    if u.shape[-1] != frame.dim:
        raise StructureError(f"points must have {frame.dim} coordinates")
    shape = u.shape
    u = u.reshape(-1, frame.dim)
    w = w.reshape(-1, frame.dim)
    guess = w - u
    v = guess.copy()
    rng = np.random.default_rng(0)
    for attempt in range(restarts + 1):
        v, res = _newton(frame, u, w, v, max_iter, steps)
        bad = ~(res <= tol)
        if not np.any(bad):
            return v.reshape(shape)
        if attempt < restarts:
            kick = 0.05 * (attempt + 1) * rng.standard_normal((int(bad.sum()), frame.dim))
            v[bad] = guess[bad] + kick * np.maximum(1.0, np.abs(guess[bad]))
    worst = float(np.max(res))
    raise InversionError(
        f"{frame.name}: Newton inversion left residual {worst:.3e} "
        f"on {int(bad.sum())} of {len(res)} points", worst)


def d2_frame(frame: FramedManifold, u, w) -> np.ndarray:
    """Box quasidistance from base ``u`` to ``w`` via normal coordinates at ``u``."""
    return group.homogeneous_norm(frame.grading, normal_coords(frame, u, w))


@dataclass(frozen=True, eq=False)
class TangentCone:
    """Nilpotent tangent cone of a frame at ``u``, in normal coordinates at ``u``."""

    frame: FramedManifold
    u: np.ndarray
    alg: CarnotAlgebra

    def coords(self, w) -> np.ndarray:
        return normal_coords(self.frame, self.u, w)

    def point(self, x) -> np.ndarray:
        return flow(self.frame, self.u, x)

    def multiply(self, a, b):
        return group.multiply(self.alg, a, b)

    def inverse(self, a):
        return group.inverse(self.alg, a)

    def dilate(self, t, a):
        return group.dilate(self.alg, t, a)

    def d2(self, w, v) -> np.ndarray:
        """Cone quasidistance d2^u(w, v) between manifold points (base ``v``)."""
        return group.d2(self.alg, self.coords(w), self.coords(v))


def tangent_cone(frame: FramedManifold, u) -> TangentCone:
    u = np.asarray(u, dtype=float)
    return TangentCone(frame, u, nilpotentize(frame, u))


# --- built-in frames -------------------------------------------------------

def group_frame(alg: CarnotAlgebra, half_width=4.0, margin=0.0, name=None) -> FramedManifold:
    """Left-invariant frame of the group ``alg`` in exponential coordinates."""
    n = alg.dim
    h = 1e-30

    def fields(p):
        p = np.asarray(p, dtype=float)
        # complex step is exact here: the product is polynomial in its right factor
        tangent = group.multiply(alg, p[..., None, :], 1j * h * np.eye(n))
        return tangent.imag / h

    def constants(p):
        return np.array(alg.c)

    bound = np.full(n, float(half_width))
    return FramedManifold(name or f"group{alg.grading.layer_dims}", alg.grading, fields,
                          constants, -bound, bound, margin)


def beta(x):
    return x + 0.5 * x * x


def beta_prime(x):
    return 1.0 + x


def variable_heisenberg(x_bound=0.5, half_width=2.0, margin=0.25) -> FramedManifold:
    """X1 = d/dx, X2 = d/dy + beta(x) d/dt, X3 = d/dt with beta(x) = x + x^2/2.

    [X1, X2] = beta'(x) X3 and beta' >= 1/2 on the default core |x| < 1/2.
    """
    if not 0 < x_bound:
        raise DomainError("x_bound must be positive")

    def fields(p):
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1] + (3, 3))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = 1.0
        out[..., 1, 2] = beta(p[..., 0])
        out[..., 2, 2] = 1.0
        return out

    def constants(p):
        c = np.zeros((3, 3, 3))
        c[0, 1, 2] = beta_prime(float(p[0]))
        c[1, 0, 2] = -c[0, 1, 2]
        return c

    lower = np.array([-x_bound, -half_width, -half_width])
    return FramedManifold("variable_heisenberg", Grading((2, 1)), fields, constants,
                          lower, -lower, margin)


def heisenberg_frame(**kw) -> FramedManifold:
    return group_frame(heisenberg(), name="heisenberg", **kw)


def engel_frame(**kw) -> FramedManifold:
    return group_frame(engel(), name="engel", **kw)


BUILTIN_FRAMES = {
    "heisenberg": heisenberg_frame,
    "engel": engel_frame,
    "variable_heisenberg": variable_heisenberg,
}


# --- frame diagnostics -----------------------------------------------------

def fd_brackets(frame: FramedManifold, p, h=1e-5) -> np.ndarray:
    """Lie brackets [X_i, X_j](p) by central differences, shape (N, N, N)."""
    p = np.asarray(p, dtype=float)
    n = frame.dim
    e = np.eye(n) * h
    # dX[i, a, k] = d X_i^a / d p_k
    dx = (frame.fields(p + e) - frame.fields(p - e)) / (2 * h)
    dx = np.moveaxis(dx, 0, -1)
    x = frame.fields(p)
    # [X_i, X_j]^a = sum_k X_i^k d_k X_j^a - X_j^k d_k X_i^a
    along = np.einsum("ik,jak->ija", x, dx)
    return along - along.transpose(1, 0, 2)


def frame_residuals(frame: FramedManifold, points) -> dict[str, float]:
    """Worst violation of the frame axioms over sample ``points``.

    ``span_deficit``: missing rank of span{X_1..X_dim H_i} in any layer;
    ``bracket``: |FD bracket - sum_k c_ijk X_k|; ``filtration``: largest
    c_ijk(p) with deg k > deg i + deg j.
    """
    g = frame.grading
    deg = g.degrees
    span = 0
    bracket = 0.0
    filtration = 0.0
    too_high = deg[None, None, :] > deg[:, None, None] + deg[None, :, None]
    for p in np.atleast_2d(np.asarray(points, dtype=float)):
        x = frame.fields(p)
        for j in range(1, g.depth + 1):
            k = g.layer_slice(j).stop
            span = max(span, k - np.linalg.matrix_rank(x[:k]))
        c = np.asarray(frame.bracket_constants(p))
        predicted = np.einsum("ijk,ka->ija", c, x)
        bracket = max(bracket, float(np.max(np.abs(fd_brackets(frame, p) - predicted))))
        filtration = max(filtration, float(np.max(np.abs(np.where(too_high, c, 0.0)))))
    return {"span_deficit": float(span), "bracket": bracket, "filtration": filtration}
