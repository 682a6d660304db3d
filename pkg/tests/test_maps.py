import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnotarea import algebra, group, maps
from carnotarea.differential import sr_jacobian
from carnotarea.errors import DomainError, StructureError
from carnotarea.regions import D2Box

H = algebra.heisenberg()
E = algebra.engel()


def vec(n):
    return st.lists(st.floats(-2, 2), min_size=n, max_size=n).map(np.array)


@given(vec(4), vec(4))
def test_left_translation_inverse(g, x):
    phi = maps.LeftTranslation(E, g)
    assert np.allclose(phi.inverse(phi(x)), x, atol=1e-10)


@given(st.floats(0.1, 5.0), vec(3))
def test_dilation_inverse(r, x):
    phi = maps.Dilation(H, r)
    assert np.allclose(phi.inverse(phi(x)), x, atol=1e-10)


def test_homomorphism_inverse_and_invertibility():
    phi = maps.Homomorphism.from_horizontal(H, np.array([[2.0, 1.0], [0.0, 1.0]]))
    x = np.array([[0.3, -0.4, 1.2]])
    assert phi.invertible and np.allclose(phi.inverse(phi(x)), x)
    flat = maps.Homomorphism.from_horizontal(H, np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert not flat.invertible
    with pytest.raises(NotImplementedError):
        flat.inverse(x)


def test_composition_order_and_chain_rule():
    g = np.array([0.5, -0.3, 0.2])
    hom = maps.Homomorphism.from_horizontal(H, np.diag([2.0, 1.0]))
    comp = maps.Composition((maps.LeftTranslation(H, g), hom))
    x = np.array([[0.1, 0.2, 0.3]])
    assert np.allclose(comp(x), group.multiply(H, g, hom(x)))
    assert np.allclose(comp.inverse(comp(x)), x)
    assert sr_jacobian(comp.differential(x[0])) == pytest.approx(4.0)
    assert np.all(comp.jacobian(np.zeros((3, 3))) == pytest.approx(4.0))


def test_composition_checks_models():
    with pytest.raises(StructureError):
        maps.Composition((maps.identity(H), maps.identity(E)))


def test_two_piece_dispatch():
    box_a = D2Box(H, np.array([-3.0, 0, 0]), 1.0)
    box_b = D2Box(H, np.array([3.0, 0, 0]), 1.0)
    phi = maps.TwoPiece(maps.LeftTranslation(H, np.array([3.0, 0, 0])), box_a,
                        maps.Dilation(H, 2.0), box_b)
    x = np.array([[-3.0, 0.1, 0.0], [3.0, 0.0, 0.1]])
    out = phi(x)
    assert np.allclose(out[0], group.multiply(H, np.array([3.0, 0, 0]), x[0]))
    assert np.allclose(out[1], [6.0, 0.0, 0.4])
    assert np.allclose(phi.jacobian(x), [1.0, 16.0])
    assert phi.restrict(D2Box(H, np.array([3.0, 0, 0]), 0.5)) is phi.map_b
    with pytest.raises(DomainError):
        phi(np.zeros((1, 3)))
    with pytest.raises(DomainError):
        phi.restrict(D2Box(H, np.zeros(3), 5.0))
