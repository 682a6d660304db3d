import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnotarea import algebra, group, maps
from carnotarea import differential as dif
from carnotarea.errors import (AssumptionError, EquiregularityError, NotContactError,
                               NotExtendableError, StructureError)

H = algebra.heisenberg()
E = algebra.engel()
nonzero = st.floats(-5, 5).filter(lambda v: abs(v) > 1e-2)


def test_extend_diagonal_heisenberg():
    hom = dif.extend_from_horizontal(H, H, np.diag([2.0, 3.0]))
    assert np.allclose(hom.full_matrix, np.diag([2.0, 3.0, 6.0]), atol=1e-15)
    assert hom.residual() <= 1e-12


def test_extend_identity():
    hom = dif.extend_from_horizontal(E, E, np.eye(2))
    assert np.allclose(hom.full_matrix, np.eye(4))


def test_extend_rank_one_block():
    hom = dif.extend_from_horizontal(H, H, np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert np.allclose(hom.full_matrix, np.diag([1.0, 0.0, 0.0]))
    assert dif.rank(hom) == 1 and dif.is_degenerate(hom)
    assert dif.sr_jacobian(hom) == 0.0


def test_extend_engel_diagonal():
    hom = dif.extend_from_horizontal(E, E, np.diag([2.0, 3.0]))
    # X3 = [X1, X2] -> 6 X3 and X4 = [X1, X3] -> 2 * 6 X4
    assert np.allclose(hom.full_matrix, np.diag([2.0, 3.0, 6.0, 12.0]), atol=1e-14)


def test_swap_is_not_an_engel_homomorphism():
    # swapping X1 and X2 would need [X2, X3] = 0 to map to -X4
    with pytest.raises(NotExtendableError) as info:
        dif.extend_from_horizontal(E, E, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert info.value.residual > dif.HOMOMORPHISM_TOL


@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4))
def test_any_heisenberg_block_extends_with_determinant(a, b, c, d):
    b1 = np.array([[a, b], [c, d]])
    hom = dif.extend_from_horizontal(H, H, b1)
    assert hom.blocks[1][0, 0] == pytest.approx(a * d - b * c, abs=1e-12)
    assert hom.residual() <= 1e-10 * max(1.0, np.max(np.abs(hom.full_matrix)) ** 2)


def test_extension_checks_inputs():
    with pytest.raises(StructureError):
        dif.extend_from_horizontal(H, H, np.eye(3))
    # three horizontal generators cannot go into a two-dimensional first layer
    free = algebra.CarnotAlgebra.from_brackets(
        (3, 3), [(0, 1, 3, 1.0), (0, 2, 4, 1.0), (1, 2, 5, 1.0)])
    with pytest.raises(AssumptionError):
        dif.extend_from_horizontal(free, H, np.zeros((2, 3)))
    loose = algebra.CarnotAlgebra.from_brackets((2, 1), [])
    with pytest.raises(EquiregularityError):
        dif.extend_from_horizontal(loose, H, np.eye(2))


def test_heisenberg_into_free_step_two():
    free = algebra.CarnotAlgebra.from_brackets(
        (3, 3), [(0, 1, 3, 1.0), (0, 2, 4, 1.0), (1, 2, 5, 1.0)])
    b1 = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    hom = dif.extend_from_horizontal(H, free, b1)
    assert hom.full_matrix.shape == (6, 3)
    assert hom.residual() <= 1e-12
    # the vertical generator goes to [X1 + X3, X2 + X3] = X4 + X5 - X6
    assert np.allclose(hom.full_matrix[:, 2], [0, 0, 0, 1, 1, -1], atol=1e-14)
    assert dif.sr_jacobian(hom) == pytest.approx(
        np.sqrt(np.linalg.det(hom.full_matrix.T @ hom.full_matrix)))


def test_block_shapes_validated():
    with pytest.raises(StructureError):
        dif.HorizontalHomomorphism(H, H, (np.eye(2), np.eye(2)))
    with pytest.raises(StructureError):
        dif.HorizontalHomomorphism(H, H, (np.eye(2),))


def test_sr_jacobian_examples():
    assert dif.sr_jacobian(dif.identity_homomorphism(H)) == 1.0
    for r in (0.5, 2.0, 3.7):
        assert dif.sr_jacobian(dif.dilation_homomorphism(H, r)) == pytest.approx(r ** 4,
                                                                                   rel=1e-12)
    hom = dif.extend_from_horizontal(H, H, np.diag([2.0, 3.0]))
    assert abs(dif.sr_jacobian(hom) - 36.0) <= 1e-12


@given(nonzero, nonzero, nonzero, nonzero)
def test_sr_jacobian_is_abs_det_when_square(a, b, c, d):
    hom = dif.extend_from_horizontal(H, H, np.array([[a, b], [c, d]]))
    det = abs(np.linalg.det(hom.full_matrix))
    assert abs(dif.sr_jacobian(hom) - det) <= 1e-12 * max(1.0, det)


@given(st.lists(nonzero, min_size=4, max_size=4), st.lists(nonzero, min_size=4, max_size=4))
def test_composition_stays_homomorphism_and_jacobian_multiplies(p, q):
    outer = dif.extend_from_horizontal(H, H, np.reshape(p, (2, 2)))
    inner = dif.extend_from_horizontal(H, H, np.reshape(q, (2, 2)))
    both = outer.compose(inner)
    scale = max(1.0, np.max(np.abs(both.full_matrix)) ** 2)
    assert both.residual() <= 1e-10 * scale
    j = dif.sr_jacobian(outer) * dif.sr_jacobian(inner)
    assert dif.sr_jacobian(both) == pytest.approx(j, rel=1e-10, abs=1e-12)


def test_homomorphism_acts_as_group_morphism(rng):
    hom = dif.extend_from_horizontal(E, E, np.diag([1.5, -0.5]))
    a = rng.uniform(-1, 1, (50, 4))
    b = rng.uniform(-1, 1, (50, 4))
    assert np.allclose(hom(group.multiply(E, a, b)), group.multiply(E, hom(a), hom(b)),
                       atol=1e-12)


def test_pansu_exact_on_homomorphisms():
    phi = maps.Homomorphism.from_horizontal(H, np.array([[2.0, 1.0], [0.0, 3.0]]))
    est = dif.pansu_estimate(phi, np.array([0.3, -0.2, 0.5]), [1.0, 0.5, 0.25])
    assert np.allclose(est.horizontal_blocks, phi.hom.blocks[0], atol=1e-12)
    assert np.allclose(est.homomorphism.full_matrix, phi.hom.full_matrix, atol=1e-12)


def test_pansu_left_translation_and_dilation():
    g = np.array([0.7, -1.1, 0.4])
    t = [2.0 ** -k for k in range(11)]
    trans = maps.LeftTranslation(H, g)
    est = dif.pansu_estimate(trans, np.array([0.2, 0.1, -0.3]), t, reference=np.eye(2))
    assert est.error[-1] <= 1e-3
    comp = maps.Composition((maps.Dilation(H, 1.7), trans))
    est = dif.pansu_estimate(comp, np.zeros(3), t, reference=1.7 * np.eye(2))
    assert est.error[-1] <= 1e-3
    assert np.allclose(est.homomorphism.full_matrix, np.diag([1.7, 1.7, 1.7 ** 2]), atol=1e-3)


def test_pansu_quotient_error_decays_like_t():
    # (x + y^2, y, t): the quotient along e2 is (t, 1, 0), so the error is exactly t
    def phi(p):
        p = np.asarray(p, dtype=float)
        out = p.copy()
        out[..., 0] = p[..., 0] + p[..., 1] ** 2
        return out

    phi.pre_alg = phi.im_alg = H
    t = np.array([2.0 ** -k for k in range(2, 11)])
    est = dif.pansu_estimate(phi, np.zeros(3), t, reference=np.eye(2))
    assert np.allclose(est.error, t, rtol=1e-9)
    assert est.error[-1] <= 1e-3
    assert np.allclose(est.deviation, t - t[-1], rtol=1e-9, atol=1e-15)


def test_pansu_rejects_bad_schedule_and_non_contact_maps():
    phi = maps.identity(H)
    with pytest.raises(ValueError):
        dif.pansu_estimate(phi, np.zeros(3), [0.5, 1.0])
    with pytest.raises(ValueError):
        dif.pansu_estimate(phi, np.zeros(3), [1.0, 0.0])

    # swapping X1 and X2 in Engel coordinates is smooth but not contact
    def swap(p):
        p = np.asarray(p, dtype=float)
        return p[..., [1, 0, 2, 3]]

    with pytest.raises(NotContactError):
        dif.pansu_estimate(swap, np.zeros(4), [1.0, 0.5], pre_alg=E, im_alg=E)
