import numpy as np
import pytest

from hamgeom.symplin import (
    NotSymplecticError,
    Subspace,
    SubspaceKind,
    SymplecticFormMatrix,
    annihilator,
    classify_subspace,
    darboux_basis,
    darboux_residual,
    is_symplectic_form,
    reduce,
    standard_form,
    symplectic_orthogonal,
)

J4 = standard_form(2)
# coordinates (q1, q2, p1, p2)
EQ1, EQ2, EP1, EP2 = np.eye(4)


def random_symplectic(rng, d):
    while True:
        a = rng.standard_normal((d, d))
        m = a - a.T
        if np.linalg.svd(m, compute_uv=False)[-1] > 1e-3:
            return m


def random_subspace(rng, d, k):
    return Subspace(rng.standard_normal((d, k)), d)


# -- forms ---------------------------------------------------------------------


def test_standard_form_blocks():
    np.testing.assert_array_equal(standard_form(1).matrix, [[0, 1], [-1, 0]])
    np.testing.assert_array_equal(
        standard_form(2).matrix, [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    )
    for n in range(1, 5):
        m = standard_form(n).matrix
        assert np.array_equal(m.T, -m)
        assert np.linalg.det(m) == pytest.approx(1.0)


def test_standard_form_rejects_zero():
    with pytest.raises(ValueError):
        standard_form(0)


def test_is_symplectic_form():
    assert is_symplectic_form(standard_form(3).matrix)
    assert is_symplectic_form([[0, 2], [-2, 0]])
    assert not is_symplectic_form([[0, 1, 2], [-1, 0, 3], [-2, -3, 0]])
    assert not is_symplectic_form([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        is_symplectic_form(np.zeros((2, 3)))


def test_form_matrix_stored_exactly_skew():
    f = SymplecticFormMatrix([[0, 2], [-2, 0]])
    assert np.array_equal(f.matrix.T, -f.matrix)
    assert f([1, 0], [0, 1]) == 2.0
    with pytest.raises(NotSymplecticError):
        SymplecticFormMatrix(np.zeros((2, 2)))


# -- orthogonals ------------------------------------------------------------------


def test_orthogonal_of_line():
    perp = symplectic_orthogonal(J4, Subspace.span(EQ1))
    # kernel oracle (tests/oracles): span{e_q1, e_q2, e_p2}
    assert perp.equals(Subspace.span(EQ1, EQ2, EP2))


def test_orthogonal_of_whole_space_is_zero():
    assert symplectic_orthogonal(J4, Subspace.whole(4)).dim == 0
    assert symplectic_orthogonal(J4, Subspace.span(ambient_dim=4)).dim == 4


def test_orthogonal_dimension_mismatch():
    with pytest.raises(ValueError):
        symplectic_orthogonal(J4, Subspace.whole(2))


def test_orthogonal_dimension_and_double_orthogonal():
    rng = np.random.default_rng(0)
    for _ in range(50):
        d = 2 * rng.integers(1, 5)
        om = random_symplectic(rng, d)
        k = int(rng.integers(0, d + 1))
        w = random_subspace(rng, d, k) if k else Subspace.span(ambient_dim=d)
        perp = symplectic_orthogonal(om, w)
        assert perp.dim == d - w.dim
        assert symplectic_orthogonal(om, perp).equals(w)


# -- classification ------------------------------------------------------------------


@pytest.mark.parametrize(
    "indices,kind",
    [
        ([0], SubspaceKind.ISOTROPIC),
        ([0, 1], SubspaceKind.LAGRANGIAN),
        ([0, 1, 2], SubspaceKind.COISOTROPIC),
        ([0, 2], SubspaceKind.SYMPLECTIC),
        ([0, 1, 2, 3], SubspaceKind.SYMPLECTIC),
        ([], SubspaceKind.ISOTROPIC),
    ],
)
def test_classification_fixtures(indices, kind):
    assert classify_subspace(J4, Subspace.coordinate(4, indices)) == kind


def test_generic_subspace():
    # span{e_q1, e_p1, e_q2 + e_p3}: W ∩ W^⊥ is a line, neither contained in the other
    om = standard_form(3)
    e = np.eye(6)
    w = Subspace.span(e[0], e[3], e[1] + e[5])
    assert classify_subspace(om, w) == SubspaceKind.GENERIC


@pytest.mark.parametrize("n", range(1, 7))
def test_first_coordinates_are_lagrangian(n):
    assert classify_subspace(standard_form(n), Subspace.coordinate(2 * n, range(n))) == SubspaceKind.LAGRANGIAN


def test_subspaces_of_lagrangian_are_isotropic():
    rng = np.random.default_rng(4)
    for n in (2, 3, 4):
        om = standard_form(n)
        lag = Subspace.coordinate(2 * n, range(n))
        for k in range(1, n + 1):
            z = Subspace(lag.basis @ rng.standard_normal((n, k)), 2 * n)
            assert classify_subspace(om, z) in (SubspaceKind.ISOTROPIC, SubspaceKind.LAGRANGIAN)


def test_lagrangian_has_half_dimension():
    rng = np.random.default_rng(6)
    for n in (1, 2, 3):
        om = random_symplectic(rng, 2 * n)
        b = darboux_basis(om)
        lag = Subspace(b[:, :n], 2 * n)
        assert classify_subspace(om, lag) == SubspaceKind.LAGRANGIAN
        assert lag.dim == n


# -- Darboux ----------------------------------------------------------------------------


def test_darboux_of_standard_form():
    b = darboux_basis(J4)
    assert darboux_residual(J4, b) == 0.0


def test_darboux_scaled_plane():
    om = np.array([[0.0, 2.0], [-2.0, 0.0]])
    b = darboux_basis(om)
    assert darboux_residual(om, b) <= 1e-12
    np.testing.assert_allclose(b, [[1.0, 0.0], [0.0, 0.5]])


def test_darboux_block_diagonal():
    # blockdiag([[0,1],[-1,0]], [[0,3],[-3,0]]) written in (q1, q2, p1, p2) order
    om = np.array([[0, 0, 1, 0], [0, 0, 0, 3], [-1, 0, 0, 0], [0, -3, 0, 0]], dtype=float)
    assert darboux_residual(om, darboux_basis(om)) <= 1e-10


def test_darboux_random_forms():
    rng = np.random.default_rng(42)
    for _ in range(50):
        d = 2 * int(rng.integers(1, 6))
        om = random_symplectic(rng, d)
        assert darboux_residual(om, darboux_basis(om)) < 1e-10


@pytest.mark.parametrize(
    "om",
    [np.zeros((2, 2)), [[0, 1, 2], [-1, 0, 3], [-2, -3, 0]], [[0, 1], [2, 0]], np.diag([0.0, 0.0, 0.0, 0.0])],
)
def test_darboux_rejects_degenerate(om):
    with pytest.raises(NotSymplecticError, match="not symplectic"):
        darboux_basis(np.asarray(om, dtype=float))


# -- annihilator ---------------------------------------------------------------------


def test_annihilator_examples():
    assert annihilator(Subspace.span(ambient_dim=3)).dim == 3
    ann = annihilator(Subspace.coordinate(3, [0]))
    assert ann.equals(Subspace.coordinate(3, [1, 2]))


def test_annihilator_dimension():
    rng = np.random.default_rng(8)
    for _ in range(30):
        d = int(rng.integers(1, 8))
        k = int(rng.integers(1, d + 1))
        w = random_subspace(rng, d, k)
        ann = annihilator(w)
        assert ann.dim == d - k
        assert np.max(np.abs(ann.basis.T @ w.basis), initial=0.0) < 1e-10


# -- reduction --------------------------------------------------------------------------


def test_reduction_of_coisotropic():
    red = reduce(J4, Subspace.coordinate(4, [0, 1, 2]))
    assert red.dim == 2
    assert red.kernel.equals(Subspace.span(EQ2))
    np.testing.assert_array_equal(red.form, [[0, 1], [-1, 0]])


def test_reduction_of_isotropic_and_lagrangian():
    assert reduce(J4, Subspace.coordinate(4, [0])).dim == 0
    red = reduce(J4, Subspace.coordinate(4, [0, 1]))
    assert red.dim == 0 and red.kernel.dim == 2


def test_reduction_form_always_symplectic():
    rng = np.random.default_rng(9)
    for _ in range(40):
        d = 2 * int(rng.integers(1, 5))
        om = random_symplectic(rng, d)
        w = random_subspace(rng, d, int(rng.integers(1, d + 1)))
        red = reduce(om, w)
        assert red.dim == w.dim - red.kernel.dim
        assert red.dim % 2 == 0
        if red.dim:
            assert np.array_equal(red.form.T, -red.form)
            assert is_symplectic_form(red.form, 1e-8)


def test_isotropic_iff_zero_reduction():
    rng = np.random.default_rng(10)
    om = standard_form(3)
    lag = Subspace.coordinate(6, range(3))
    for k in range(1, 4):
        z = Subspace(lag.basis @ rng.standard_normal((3, k)), 6)
        assert reduce(om, z).dim == 0
    assert reduce(om, Subspace.coordinate(6, [0, 3])).dim == 2


# -- subspace plumbing -----------------------------------------------------------------


def test_dependent_basis_rejected():
    with pytest.raises(ValueError):
        Subspace.span(EQ1, 2 * EQ1)


def test_intersection():
    a = Subspace.coordinate(4, [0, 1])
    b = Subspace.coordinate(4, [1, 2])
    assert a.intersection(b).equals(Subspace.span(EQ2))
