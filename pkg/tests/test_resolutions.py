import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymstab.linalg import matrix
from asymstab.modules import (
    ZZ, Ring, compose, cyclic, direct_sum, identity, is_isomorphic, make_map, zero_map,
)
from asymstab.resolutions import (
    FreeResolution, InjectiveResolution, NotExact, extend_map, horseshoe_injective, lift_map, syzygy,
)


def test_free_resolution_of_z4_over_integers():
    res = FreeResolution(cyclic(ZZ, 4))
    assert res.omega(1).describe() == "Z"
    assert res.omega(2).is_zero
    assert res.certify(3)


def test_free_module_has_zero_syzygy():
    assert syzygy(ZZ.free(2), 1).is_zero
    assert syzygy(cyclic(Ring(6), 6), 1).is_zero


def test_periodic_resolution_of_z2_over_z4():
    res = FreeResolution(cyclic(Ring(4), 2))
    for k in range(6):
        assert res.omega(k).describe() == "Z/2"
        assert res.P(k).describe() == "Z/4"
    assert res.differential(1).matrix[0, 0] % 4 == 2
    assert res.periodicity is not None and res.periodicity[1] <= 2
    assert res.certify(6)


def test_injective_resolution_of_integers():
    res = InjectiveResolution(ZZ.free(1))
    assert res.describe_injective(0) == "Q"
    assert res.sigma(2).is_zero
    assert res.certify(3)


def test_injective_resolution_of_injective():
    R = Ring(9)
    res = InjectiveResolution(cyclic(R, 9))
    assert res.eta(0).is_isomorphism
    assert res.sigma(1).is_zero


def test_injective_resolution_of_z2_over_z4_is_periodic():
    res = InjectiveResolution(cyclic(Ring(4), 2))
    for k in range(5):
        assert res.I(k).describe() == "Z/4"
        assert res.sigma(k).describe() == "Z/2"
    assert res.certify(5)


@pytest.mark.parametrize("p", [2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("d", [1, 2, 3])
def test_cyclic_resolutions_over_prime_powers_have_period_at_most_two(p, k, d):
    if d > k:
        return
    R = Ring(p ** k)
    A = cyclic(R, p ** d)
    free = FreeResolution(A)
    inj = InjectiveResolution(A)
    assert free.ensure_periodic()[1] <= 2
    assert inj.ensure_periodic()[1] <= 2
    assert free.certify(5) and inj.certify(5)


def test_lift_of_doubling():
    A = cyclic(ZZ, 4)
    res = FreeResolution(A)
    lifts = lift_map(make_map(A, A, matrix([[2]])), res, res, 2)
    assert lifts[0].matrix[0, 0] == 2 and lifts[1].matrix[0, 0] == 2


def test_lift_of_identity_and_zero():
    A = direct_sum(cyclic(ZZ, 4), cyclic(ZZ, 6))[0]
    res = FreeResolution(A)
    for f in lift_map(identity(A), res, res, 3):
        assert f.equals(identity(f.source))
    for f in lift_map(zero_map(A, A), res, res, 3):
        assert not f.matrix.any()


@given(st.sampled_from([4, 8, 9, 12]), st.integers(0, 11), st.integers(1, 4))
def test_lifted_squares_commute(m, c, length):
    R = Ring(m)
    A = direct_sum(cyclic(R, m), cyclic(R, next(d for d in range(2, m + 1) if m % d == 0)))[0]
    f = make_map(A, A, matrix([[c % m, 0], [0, 1]]))
    res = FreeResolution(A)
    lifts = lift_map(f, res, res, length)
    g = f
    for k, fk in enumerate(lifts):
        assert compose(res.eps(k), fk).equals(compose(g, res.eps(k)))
        g = make_map(res.omega(k + 1), res.omega(k + 1),
                     res.iota(k).preimage(compose(fk, res.iota(k)).matrix))


def test_extend_map_commutes():
    R = Ring(8)
    B = cyclic(R, 4)
    g = make_map(B, B, matrix([[3]]))
    res = InjectiveResolution(B)
    ext = extend_map(g, res, res, 3)
    assert compose(ext[0], res.eta(0)).equals(compose(res.eta(0), g))


def test_horseshoe_nonsplit_over_z4():
    R = Ring(4)
    Z2, Z4 = cyclic(R, 2), cyclic(R, 4)
    hs = horseshoe_injective(make_map(Z2, Z4, matrix([[2]])), make_map(Z4, Z2, matrix([[1]])))
    assert is_isomorphic(hs.middle.I(0), direct_sum(Z4, Z4)[0])
    assert hs.certify(4)


def test_horseshoe_split_is_levelwise_sum():
    R = Ring(9)
    B1, B2 = cyclic(R, 3), cyclic(R, 9)
    S, i1, i2, p1, p2 = direct_sum(B1, B2)
    hs = horseshoe_injective(i1, p2)
    for k in range(3):
        assert is_isomorphic(hs.middle.I(k), direct_sum(hs.left.I(k), hs.right.I(k))[0])
    assert hs.certify(3)


def test_horseshoe_degenerate_and_bad_input():
    R = Ring(4)
    Z4 = cyclic(R, 4)
    hs = horseshoe_injective(identity(Z4), zero_map(Z4, R.zero_module()))
    assert hs.right.I(0).is_zero and hs.certify(2)
    with pytest.raises(NotExact):
        horseshoe_injective(make_map(Z4, Z4, matrix([[2]])), identity(Z4))
