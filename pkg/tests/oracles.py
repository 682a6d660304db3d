"""Independent reference implementations used only by the tests."""

import math

import numpy as np


def heisenberg_matrix_product(a, b):
    """Group law through 3x3 unipotent matrices.

    exp(x E12 + y E23 + t E13) = [[1, x, t + xy/2], [0, 1, y], [0, 0, 1]],
    and the log of [[1, p, r], [0, 1, q], [0, 0, 1]] is (p, q, r - pq/2).
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    ra = a[..., 2] + a[..., 0] * a[..., 1] / 2
    rb = b[..., 2] + b[..., 0] * b[..., 1] / 2
    p = a[..., 0] + b[..., 0]
    q = a[..., 1] + b[..., 1]
    r = ra + rb + a[..., 0] * b[..., 1]
    return np.stack([p, q, r - p * q / 2], axis=-1)


# faithful representation of the Engel algebra by strictly upper triangular 4x4 matrices:
# X1 = E12 + E23 + E34, X2 = E34, X3 = E24, X4 = E14
def _e(i, j):
    m = np.zeros((4, 4))
    m[i - 1, j - 1] = 1.0
    return m


ENGEL_BASIS = np.array([_e(1, 2) + _e(2, 3) + _e(3, 4), _e(3, 4), _e(2, 4), _e(1, 4)])


def _nilpotent_exp(a):
    out = np.eye(a.shape[-1])
    term = np.eye(a.shape[-1])
    for k in range(1, a.shape[-1]):
        term = term @ a / k
        out = out + term
    return out


def _nilpotent_log(g):
    n = g - np.eye(g.shape[-1])
    out = np.zeros_like(g)
    power = np.eye(g.shape[-1])
    for k in range(1, g.shape[-1]):
        power = power @ n
        out = out + (-1) ** (k + 1) * power / k
    return out


def engel_matrix_product(a, b):
    ma = np.tensordot(a, ENGEL_BASIS, axes=1)
    mb = np.tensordot(b, ENGEL_BASIS, axes=1)
    log = _nilpotent_log(_nilpotent_exp(ma) @ _nilpotent_exp(mb))
    coeffs, *_ = np.linalg.lstsq(ENGEL_BASIS.reshape(4, -1).T, log.reshape(-1), rcond=None)
    return coeffs


def engel_matrix_bracket(i, j):
    m = ENGEL_BASIS[i] @ ENGEL_BASIS[j] - ENGEL_BASIS[j] @ ENGEL_BASIS[i]
    coeffs, *_ = np.linalg.lstsq(ENGEL_BASIS.reshape(4, -1).T, m.reshape(-1), rcond=None)
    return coeffs


def ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)
