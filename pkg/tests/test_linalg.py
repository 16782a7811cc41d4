import itertools

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from asymstab.linalg import diag, eye, kernel_basis, matrix, smith_normal_form, solve, zeros


def det(m):
    m = [[int(x) for x in row] for row in m]
    n = len(m)
    if n == 0:
        return 1
    return sum((-1) ** i * m[0][i] * det([r[:i] + r[i + 1:] for r in m[1:]]) for i in range(n))


small = st.integers(-9, 9)
matrices = st.integers(0, 4).flatmap(
    lambda r: st.integers(0, 4).flatmap(
        lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r).map(
            lambda rows: matrix(rows, shape=(r, c)))))


def test_snf_diag_2_3():
    assert smith_normal_form(diag([2, 3])).diagonal == [1, 6]


def test_snf_zero_matrix():
    dec = smith_normal_form(zeros(2, 3))
    assert dec.S.shape == (2, 3) and not dec.S.any()
    assert (dec.U == eye(2)).all() and (dec.V == eye(3)).all()


def test_snf_identity():
    assert (smith_normal_form(eye(3)).S == eye(3)).all()


@given(matrices)
def test_snf_reconstructs_and_is_canonical(M):
    dec = smith_normal_form(M)
    assert ((dec.U @ M @ dec.V) == dec.S).all()
    assert abs(det(dec.U)) == 1 and abs(det(dec.V)) == 1
    d = dec.diagonal
    assert all(x >= 0 for x in d)
    assert all(d[i + 1] % d[i] == 0 for i in range(len(d) - 1) if d[i])
    off = dec.S.copy()
    for i in range(min(off.shape)):
        off[i, i] = 0
    assert not off.any()


@given(matrices, st.randoms(use_true_random=False))
def test_invariant_factors_permutation_invariant(M, rnd):
    r, c = M.shape
    rows, cols = list(range(r)), list(range(c))
    rnd.shuffle(rows)
    rnd.shuffle(cols)
    P = M[rows, :][:, cols] if r and c else M
    assert smith_normal_form(M).invariant_factors == smith_normal_form(P).invariant_factors


def test_solve_examples():
    assert solve(matrix([[2]]), [4])[0, 0] == 2
    assert solve(matrix([[2]]), [3]) is None
    x = solve(matrix([[2]]), [3], modulus=5)
    assert (2 * x[0, 0] - 3) % 5 == 0


@given(st.integers(2, 6), st.integers(1, 2), st.integers(1, 2), st.data())
def test_solve_complete_against_brute_force(m, r, c, data):
    M = matrix([[data.draw(st.integers(0, m - 1)) for _ in range(c)] for _ in range(r)], shape=(r, c))
    b = [data.draw(st.integers(0, m - 1)) for _ in range(r)]
    brute = any(all((sum(int(M[i, j]) * x[j] for j in range(c)) - b[i]) % m == 0 for i in range(r))
                for x in itertools.product(range(m), repeat=c))
    x = solve(M, b, modulus=m)
    assert (x is not None) == brute
    if x is not None:
        assert all(v % m == 0 for v in (M @ x).ravel() - np.array(b, dtype=object))


def test_kernel_basis_examples():
    K = kernel_basis(matrix([[2, -1]]))
    assert K.shape == (2, 1) and sorted(abs(int(v)) for v in K.ravel()) == [1, 2]
    assert kernel_basis(eye(2)).shape[1] == 0
    K4 = kernel_basis(matrix([[2]]), modulus=4)
    assert {int(v) % 4 for v in K4.ravel()} <= {0, 2} and any(int(v) % 4 == 2 for v in K4.ravel())


@given(matrices)
def test_kernel_basis_is_kernel(M):
    K = kernel_basis(M)
    assert not (M @ K).any()
    # a basis: full column rank
    assert smith_normal_form(K).rank == K.shape[1]
