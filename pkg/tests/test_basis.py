import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from ionqft.basis import (
    BasisLabel,
    InvalidConfigurationError,
    boson_annihilation,
    boson_creation,
    build_space,
    is_hermitian,
    is_zero,
    jordan_wigner_operators,
    level_transition,
    number_operator,
)


def anti(a, b):
    return a @ b + b @ a


@pytest.mark.parametrize("cutoffs, dim", [([15], 64), ([5, 5], 144), ([1], 8), ([2, 3, 1], 96)])
def test_dimension(cutoffs, dim):
    assert build_space(cutoffs).dim == dim


@pytest.mark.parametrize("cutoffs", [[0], [], [3, 0], [-1], [2.5]])
def test_degenerate_space_rejected(cutoffs):
    with pytest.raises(InvalidConfigurationError):
        build_space(cutoffs)


@given(st.lists(st.integers(1, 4), min_size=1, max_size=3), st.data())
def test_index_round_trip(cutoffs, data):
    space = build_space(cutoffs)
    i = data.draw(st.integers(0, space.dim - 1))
    assert space.index(space.label(i)) == i
    label = space.label(i)
    assert BasisLabel.parse(str(label)) == label


def test_register_is_leftmost_factor():
    space = build_space([2, 3])
    assert space.label(0) == BasisLabel(1, (0, 0))
    assert space.label(1) == BasisLabel(1, (0, 1))
    assert space.label(12) == BasisLabel(2, (0, 0))
    with pytest.raises(InvalidConfigurationError):
        space.index(BasisLabel(5, (0, 0)))
    with pytest.raises(InvalidConfigurationError):
        space.index(BasisLabel(1, (3, 0)))


def test_ladder_matrix_elements():
    space = build_space([2])
    a = boson_annihilation(space, 0).toarray()
    for level in range(1, 5):
        idx = lambda n: space.index(BasisLabel(level, (n,)))
        assert a[idx(0), idx(1)] == 1
        assert a[idx(1), idx(2)] == np.sqrt(2)
    # only those two entries per level block
    assert np.count_nonzero(a) == 8


def test_annihilation_kills_vacuum():
    space = build_space([4])
    psi = space.basis_state(BasisLabel(1, (0,)))
    assert np.all(boson_annihilation(space, 0) @ psi == 0)


def test_number_operator_diagonal():
    space = build_space([6])
    a = boson_annihilation(space, 0)
    n_op = boson_creation(space, 0) @ a
    # sqrt(n)^2 is not always exactly n in floating point
    assert abs(n_op - number_operator(space, 0)).max() < 1e-14
    for n in range(7):
        i = space.index(BasisLabel(3, (n,)))
        assert n_op[i, i] == pytest.approx(n, abs=1e-14)


def test_mode_out_of_range():
    with pytest.raises(InvalidConfigurationError):
        boson_annihilation(build_space([3]), 1)


def test_level_transition_maps_labels():
    space = build_space([3])
    op = level_transition(space, 1, 4)
    out = op @ space.basis_state(BasisLabel(4, (2,)))
    assert np.array_equal(out, space.basis_state(BasisLabel(1, (2,))))
    proj = level_transition(space, 2, 2)
    assert (proj @ proj != proj).nnz == 0
    assert (op.conj().T != level_transition(space, 4, 1)).nnz == 0
    with pytest.raises(InvalidConfigurationError):
        level_transition(space, 0, 1)


@pytest.mark.parametrize("cutoffs", [[1], [3], [2, 2]])
def test_jordan_wigner_algebra_exact(cutoffs):
    space = build_space(cutoffs)
    b, b_dag, d, d_dag = jordan_wigner_operators(space)
    eye = sp.identity(space.dim, dtype=complex, format="csr")
    assert is_zero(anti(b, b_dag) - eye)
    assert is_zero(anti(d, d_dag) - eye)
    for x, y in [(b, d), (b, d_dag), (b_dag, d_dag), (b_dag, d)]:
        assert is_zero(anti(x, y))
    assert is_zero(b @ b) and is_zero(d @ d)
    assert (b.conj().T != b_dag).nnz == 0 and (d.conj().T != d_dag).nnz == 0


def test_level_signs_follow_register_convention():
    # b^dag d^dag |vac> = -|4> and d^dag |vac> = -|3>, b^dag|vac> = +|2>
    space = build_space([1])
    b, b_dag, d, d_dag = jordan_wigner_operators(space)
    vac = space.basis_state(BasisLabel(1, (0,)))
    assert np.array_equal(b_dag @ (d_dag @ vac), -space.basis_state(BasisLabel(4, (0,))))
    assert np.array_equal(d_dag @ vac, -space.basis_state(BasisLabel(3, (0,))))
    assert np.array_equal(b_dag @ vac, space.basis_state(BasisLabel(2, (0,))))


def test_pair_operators_reduce_to_level_flips():
    # the identities used to rewrite the fermionic Hamiltonian in level form
    space = build_space([1])
    b, b_dag, d, d_dag = jordan_wigner_operators(space)
    L = lambda i, j: level_transition(space, i, j)
    assert is_zero(b_dag @ d_dag + L(4, 1))
    assert is_zero(d @ b + L(1, 4))
    assert is_zero(b_dag @ b + d @ d_dag - (L(1, 1) + 2 * L(2, 2) + L(4, 4)))


def test_tensor_consistency():
    space = build_space([2, 3])
    a0, a1 = boson_annihilation(space, 0), boson_annihilation(space, 1)
    for i, j in [(1, 4), (2, 2), (3, 1)]:
        t = level_transition(space, i, j)
        assert is_zero(a0 @ t - t @ a0)
        assert is_zero(a1 @ t - t @ a1)
    assert is_zero(a0 @ a1 - a1 @ a0)
    assert is_zero(a0 @ boson_creation(space, 1) - boson_creation(space, 1) @ a0)


def test_is_hermitian_exact():
    space = build_space([2])
    a = boson_annihilation(space, 0)
    assert not is_hermitian(a)
    assert is_hermitian(a + a.conj().T)
    assert is_hermitian(number_operator(space, 0))
