import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnotarea import algebra
from carnotarea.algebra import CarnotAlgebra, Grading, validate_algebra
from carnotarea.errors import EquiregularityError, StructureError
from carnotarea.frame import variable_heisenberg

BUILTINS = [algebra.heisenberg(), algebra.engel(), algebra.abelian(3)]


def test_grading_degrees_and_layers():
    g = Grading((2, 1, 1))
    assert g.dim == 4 and g.depth == 3
    assert g.degrees.tolist() == [1, 1, 2, 3]
    x = np.arange(4.0)
    assert [p.tolist() for p in g.layers(x)] == [[0.0, 1.0], [2.0], [3.0]]
    with pytest.raises(StructureError):
        Grading((2, 0))


def test_from_brackets_fills_antisymmetric_entries():
    h = algebra.heisenberg()
    assert h.c[0, 1, 2] == 1.0 and h.c[1, 0, 2] == -1.0
    assert np.count_nonzero(h.c) == 2
    with pytest.raises(StructureError):
        CarnotAlgebra.from_brackets((2, 1), [(0, 0, 2, 1.0)])
    with pytest.raises(StructureError):
        CarnotAlgebra.from_brackets((2, 1), [(0, 1, 3, 1.0)])


def test_structure_tensor_is_read_only():
    with pytest.raises(ValueError):
        algebra.heisenberg().c[0, 1, 2] = 5.0


@pytest.mark.parametrize("alg", BUILTINS, ids=["heisenberg", "engel", "abelian"])
def test_builtins_validate(alg):
    report = validate_algebra(alg)
    assert report.passed, report.checks


def test_engel_brackets_by_hand():
    e = algebra.engel()
    basis = np.eye(4)
    assert np.array_equal(e.bracket(basis[0], basis[1]), basis[2])
    assert np.array_equal(e.bracket(basis[0], basis[2]), basis[3])
    assert not np.any(e.bracket(basis[1], basis[2]))
    assert not np.any(e.bracket(basis[2], basis[3]))


def test_validator_flags_antisymmetry():
    c = np.array(algebra.heisenberg().c)
    c[1, 0, 2] = 0.5
    assert not validate_algebra(CarnotAlgebra(Grading((2, 1)), c))["antisymmetry"].passed


def test_validator_flags_grading():
    # [X1, X2] landing in the first layer breaks the grading
    alg = CarnotAlgebra.from_brackets((2, 1), [(0, 1, 2, 1.0), (0, 1, 0, 1.0)])
    assert not validate_algebra(alg)["grading"].passed


def test_validator_flags_jacobi():
    # graded, but the cyclic sum on (X1, X2, X3) equals X5
    bad = CarnotAlgebra.from_brackets(
        (2, 1, 1, 1), [(0, 1, 2, 1.0), (0, 2, 3, 1.0), (0, 3, 4, 1.0), (1, 3, 4, 1.0)])
    report = validate_algebra(bad)
    assert report["grading"].passed and report["antisymmetry"].passed
    assert not report["jacobi"].passed
    assert report["jacobi"].residual == pytest.approx(1.0)
    # adding [X2, X3] = X4 restores the identity
    good = CarnotAlgebra.from_brackets(
        (2, 1, 1, 1), [(0, 1, 2, 1.0), (0, 2, 3, 1.0), (1, 2, 3, 1.0), (0, 3, 4, 1.0),
                       (1, 3, 4, 1.0)])
    assert validate_algebra(good)["jacobi"].passed


def test_validator_flags_missing_generation():
    alg = CarnotAlgebra.from_brackets((2, 1), [])
    report = validate_algebra(alg)
    assert not report["horizontal_generation"].passed
    assert report["antisymmetry"].passed and report["jacobi"].passed


def test_custom_free_step_two_rank_three():
    # free 2-step algebra on three generators: six dimensions, nu = 3 + 2*3
    triples = [(0, 1, 3, 1.0), (0, 2, 4, 1.0), (1, 2, 5, 1.0)]
    alg = CarnotAlgebra.from_brackets((3, 3), triples)
    assert validate_algebra(alg).passed
    assert algebra.generation_ranks(alg) == [3]


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_bracket_is_antisymmetric_and_bilinear(x, y):
    e = algebra.engel()
    x, y = np.array(x), np.array(y)
    assert np.allclose(e.bracket(x, y), -e.bracket(y, x), atol=1e-12)
    assert np.allclose(e.bracket(2 * x + y, y), 2 * e.bracket(x, y), atol=1e-10)


def test_bracket_broadcasts_over_batches(rng):
    e = algebra.engel()
    x = rng.standard_normal((5, 4))
    y = rng.standard_normal(4)
    batch = e.bracket(x, y)
    for row, xi in zip(batch, x):
        assert np.allclose(row, e.bracket(xi, y), atol=1e-14)


def test_nilpotentize_variable_heisenberg():
    frm = variable_heisenberg()
    at_zero = algebra.nilpotentize(frm, np.zeros(3))
    assert at_zero.c[0, 1, 2] == pytest.approx(1.0, abs=1e-15)
    quarter = algebra.nilpotentize(frm, np.array([0.25, 0.0, 0.0]))
    assert quarter.c[0, 1, 2] == pytest.approx(1.25, abs=1e-15)
    # rescaling X3 by 5/4 makes the cone the standard Heisenberg algebra
    assert quarter.c[0, 1, 2] / 1.25 == pytest.approx(algebra.heisenberg().c[0, 1, 2])


def test_nilpotentize_reports_equiregularity_failure():
    frm = variable_heisenberg(x_bound=2.0)
    with pytest.raises(EquiregularityError):
        algebra.nilpotentize(frm, np.array([-1.0, 0.0, 0.0]))


def test_graded_truncation_drops_lower_order_terms():
    g = Grading((2, 1))
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    c[0, 1, 0] = 0.7
    c[1, 0, 0] = -0.7
    out = algebra.graded_truncation(g, c)
    assert out[0, 1, 2] == 1.0 and out[0, 1, 0] == 0.0
