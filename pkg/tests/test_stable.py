import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymstab.injectives import MixedModule, Truncation
from asymstab.linalg import matrix
from asymstab.modules import (
    ZZ, NotWellDefined, Ring, compose, corestrict, cyclic, direct_sum, identity, induced_on_quotients,
    is_isomorphic, make_map, make_module, tensor_map,
)
from asymstab.oracle import kill_profile_from_factors, stage_profile
from asymstab.resolutions import FreeResolution, InjectiveResolution, extend_map, lift_map
from asymstab.stable import (
    ConnectingContext, StableContext, asymptotic_T, compare_satellite, connecting_omega, delta_map,
    dimension_shift_check, inj_stabilize, intertwine, second_construction_omega, structure_delta, tor,
    tor_tower, tower,
)
from asymstab.verify import nonsplit_ses, random_module

PRIMES = [2, 3, 5]


def profile(M, m):
    rank, torsion = M.invariant_factors
    assert rank == 0
    return kill_profile_from_factors(m, list(torsion))


# ---------------------------------------------------------------- examples


@pytest.mark.parametrize("p", PRIMES)
def test_torsion_against_integers(p):
    A, B = cyclic(ZZ, p), ZZ.free(1)
    s = inj_stabilize(A, B)
    assert s.module.describe() == f"Z/{p}" and s.truncation_certified
    ctx = StableContext.for_modules(A, B)
    assert ctx.stab(1, 1)[0].is_zero
    assert ctx.tor(0, 1)[0].describe() == f"Z/{p}"
    d = delta_map(ctx)
    assert d.is_isomorphism
    assert structure_delta(ctx, 1).is_zero
    it = intertwine(ctx, 0)
    assert it.ok
    assert all(tw.stages[k].is_zero for tw in (it.stab_tower, it.tor_tower) for k in tw.stages if k >= 1)


def test_free_input_stabilizes_to_zero():
    for ring in (ZZ, Ring(6)):
        A = ring.free(2)
        B = cyclic(ring, 2)
        assert inj_stabilize(A, B).module.is_zero
        ctx = StableContext.for_modules(A, B)
        assert delta_map(ctx).source.is_zero and delta_map(ctx).target.is_zero
        assert structure_delta(ctx, 1).is_zero
        assert asymptotic_T(ctx, 0).limit.is_zero
        assert all(s.is_zero for s in tor_tower(ctx, 0).stages.values())


def test_z2_over_z4():
    R = Ring(4)
    Z2 = cyclic(R, 2)
    assert inj_stabilize(Z2, Z2).module.describe() == "Z/2"
    ctx = StableContext.for_modules(Z2, Z2)
    assert structure_delta(ctx, 1).is_isomorphism
    for n in range(-3, 4):
        v = asymptotic_T(ctx, n)
        assert v.limit.describe() == "Z/2"
        assert v.tower.certificate.kind == "StabilizedAt" and v.tower.certificate.index <= 4


def test_tor_examples():
    for p in PRIMES:
        QZ = MixedModule(ZZ.zero_module(), 0, 1).realize(Truncation.from_dict({p: 3}))
        assert tor(cyclic(ZZ, p), QZ, 1).describe() == f"Z/{p}"
    assert tor(ZZ.free(2), cyclic(ZZ, 6), 1).is_zero
    R = Ring(4)
    for n in range(1, 5):
        assert tor(cyclic(R, 2), cyclic(R, 2), n).describe() == "Z/2"


def test_tor_degree_shift_on_the_nose():
    R = Ring(8)
    A, B = cyclic(R, 2), cyclic(R, 4)
    res = FreeResolution(A)
    ctx = StableContext(res, InjectiveResolution(B))
    shifted = StableContext(FreeResolution(res.omega(1)), InjectiveResolution(B))
    assert tor(A, B, 2, ctx).key == tor(res.omega(1), B, 1, shifted).key


@pytest.mark.parametrize("ds", [[4], [2, 3], [0, 6], [0, 0]])
@pytest.mark.parametrize("n", [-1, 0, 2])
def test_integers_have_vanishing_limits(ds, n):
    A = cyclic(ZZ, ds[0])
    for d in ds[1:]:
        A = direct_sum(A, cyclic(ZZ, d))[0]
    v = asymptotic_T(StableContext.for_modules(A, cyclic(ZZ, 3)), n)
    assert v.limit.is_zero and v.truncation_certified


def test_finite_flat_dimension_vanishes():
    R = Ring(4)
    v = asymptotic_T(StableContext.for_modules(cyclic(R, 4), cyclic(R, 2)), 1)
    assert v.limit.is_zero


def test_southeast_maps_are_isomorphisms_over_zm():
    R = Ring(9)
    it = intertwine(StableContext.for_modules(cyclic(R, 3), cyclic(R, 3)), 1)
    assert it.ok and all(f.is_isomorphism for f in it.southeast.values())
    assert it.limit_maps_inverse


def test_satellite_tower_examples():
    R = Ring(4)
    cmp = compare_satellite(StableContext.for_modules(cyclic(R, 2), cyclic(R, 2)), 0)
    assert cmp.ok
    assert all(s.describe() == "Z/2" for s in cmp.satellite.stages.values())
    free = compare_satellite(StableContext.for_modules(cyclic(R, 4), cyclic(R, 2)), 0)
    assert all(s.is_zero for s in free.satellite.stages.values())


def test_dimension_shift_examples():
    R = Ring(4)
    ctx = StableContext.for_modules(cyclic(R, 2), cyclic(R, 2))
    rep = dimension_shift_check(ctx, 0, 1, 1)
    assert rep.ok and "Z/2" in rep.sigma_shift[0][2]
    assert dimension_shift_check(ctx, 2, 0, 0).ok
    zctx = StableContext.for_modules(cyclic(ZZ, 3), ZZ.free(1))
    assert dimension_shift_check(zctx, 0, 1, 1).ok


def test_connecting_omega_examples():
    R = Ring(4)
    alpha, beta = nonsplit_ses(R, 2)
    cc = ConnectingContext(cyclic(R, 2), alpha, beta)
    rep = connecting_omega(cc, 1)
    assert rep.ok and rep.describe() == "Z/2 -> Z/2 (iso)"
    assert second_construction_omega(cc, 1).ok
    Z2 = cyclic(R, 2)
    S, i1, _, _, p2 = direct_sum(Z2, Z2)
    split = ConnectingContext(cyclic(R, 2), i1, p2)
    assert connecting_omega(split, 1).limit_map.is_zero
    free = ConnectingContext(cyclic(R, 4), alpha, beta)
    assert connecting_omega(free, 1).limit_map.is_zero
    assert second_construction_omega(free, 1).ok
    with pytest.raises(ValueError):
        ConnectingContext(cyclic(ZZ, 2), make_map(cyclic(ZZ, 2), cyclic(ZZ, 4), matrix([[2]])),
                          make_map(cyclic(ZZ, 4), cyclic(ZZ, 2), matrix([[1]])))


def test_relative_sign_visible_over_z9():
    R = Ring(9)
    alpha, beta = nonsplit_ses(R, 3)
    rep = second_construction_omega(ConnectingContext(cyclic(R, 3), alpha, beta), 1)
    assert rep.ok and rep.relative_sign == -1


# ---------------------------------------------------------------- oracle


@pytest.mark.parametrize("m,Af,Bf", [(4, [2], [2]), (8, [2], [4]), (9, [3], [3]), (12, [2, 6], [4]), (6, [2], [3])])
@pytest.mark.parametrize("a,b", [(0, 0), (1, 0), (1, 1), (2, 1)])
def test_stages_agree_with_enumeration(m, Af, Bf, a, b):
    R = Ring(m)
    A = make_module(R, matrix([[d if i == j else 0 for j in range(len(Af))] for i, d in enumerate(Af)]))
    B = make_module(R, matrix([[d if i == j else 0 for j in range(len(Bf))] for i, d in enumerate(Bf)]))
    ctx = StableContext.for_modules(A, B)
    assert profile(ctx.stab(a, b)[0], m) == stage_profile(m, Af, Bf, a, b)


# ---------------------------------------------------------------- invariants


rings = st.sampled_from([4, 6, 8, 9])


@given(rings, st.integers(0, 10_000))
def test_delta_epic_and_iso_over_self_injective_rings(m, seed):
    rng = random.Random(seed)
    R = Ring(m)
    ctx = StableContext.for_modules(random_module(rng, R), random_module(rng, R))
    for a, b in ((0, 0), (1, 0), (1, 1)):
        assert ctx.delta(a, b).is_isomorphism


@given(st.integers(0, 10_000))
def test_delta_epic_over_integers(seed):
    rng = random.Random(seed)
    ctx = StableContext.for_modules(random_module(rng, ZZ), random_module(rng, ZZ))
    assert ctx.delta(0, 0).is_surjective


@given(rings, st.integers(0, 10_000))
def test_vanishing_is_monotone(m, seed):
    rng = random.Random(seed)
    R = Ring(m)
    ctx = StableContext.for_modules(random_module(rng, R), random_module(rng, R))
    vals = {n: asymptotic_T(ctx, n) for n in range(-2, 3)}
    for n, v in vals.items():
        if v.tower.certificate.kind == "StabilizedAt" and v.limit.is_zero:
            assert all(vals[k].limit.is_zero for k in vals if k < n)


def omega_maps(f, resA, resA2, length):
    """Maps omega(k) -> omega2(k) induced by a lift of f."""
    lifts = lift_map(f, resA, resA2, length)
    out = [f]
    for k, fk in enumerate(lifts):
        out.append(corestrict(compose(fk, resA.iota(k)), resA2.iota(k)))
    return out


def sigma_maps(g, resB, resB2, length):
    ext = extend_map(g, resB, resB2, length)
    out = [g]
    for k, fk in enumerate(ext):
        out.append(induced_on_quotients(fk, resB.pi(k), resB2.pi(k)))
    return out


def on_stab(ctx, ctx2, fa, gb, a, b):
    K, inc = ctx.stab(a, b)
    K2, inc2 = ctx2.stab(a, b)
    t = tensor_map(fa, gb, ctx.T(a, b), ctx2.T(a, b))
    return corestrict(compose(t, inc), inc2)


def random_hom(rng, A, B):
    m = A.ring.modulus
    for _ in range(50):
        M = matrix([[rng.randrange(m) for _ in range(A.ngens)] for _ in range(B.ngens)], shape=(B.ngens, A.ngens))
        try:
            return make_map(A, B, M)
        except NotWellDefined:
            continue
    return make_map(A, B, matrix([[0] * A.ngens] * B.ngens, shape=(B.ngens, A.ngens)))


@given(rings, st.integers(0, 10_000))
def test_delta_natural_in_second_argument(m, seed):
    rng = random.Random(seed)
    R = Ring(m)
    A, B, B2 = (random_module(rng, R) for _ in range(3))
    g = random_hom(rng, B, B2)
    ctx, ctx2 = StableContext.for_modules(A, B), StableContext.for_modules(A, B2)
    sig = sigma_maps(g, ctx.resB, ctx2.resB, 3)
    for i in (0, 1):
        one = identity(ctx.resA.omega(i))
        top = on_stab(ctx, ctx2, identity(ctx.resA.omega(i + 1)), sig[i + 1], i + 1, i + 1)
        low = on_stab(ctx, ctx2, one, sig[i], i, i)
        assert compose(ctx2.Delta(i, i), top).equals(compose(low, ctx.Delta(i, i)))


@given(rings, st.integers(0, 10_000))
def test_delta_natural_in_first_argument(m, seed):
    rng = random.Random(seed)
    R = Ring(m)
    A, A2, B = (random_module(rng, R) for _ in range(3))
    f = random_hom(rng, A, A2)
    ctx = StableContext.for_modules(A, B)
    ctx2 = StableContext(FreeResolution(A2), ctx.resB)
    om = omega_maps(f, ctx.resA, ctx2.resA, 3)
    for i in (0, 1):
        top = on_stab(ctx, ctx2, om[i + 1], identity(ctx.resB.sigma(i + 1)), i + 1, i + 1)
        low = on_stab(ctx, ctx2, om[i], identity(ctx.resB.sigma(i)), i, i)
        assert compose(ctx2.Delta(i, i), top).equals(compose(low, ctx.Delta(i, i)))


@given(rings, st.integers(0, 10_000))
def test_delta_independent_of_resolutions(m, seed):
    rng = random.Random(seed)
    R = Ring(m)
    A, B = random_module(rng, R), random_module(rng, R)
    # a second presentation of A with a redundant generator, and a second envelope ordering of B
    A2 = make_module(R, matrix([[int(x) for x in row] + [0] for row in A.relations.tolist()] + [[0] * A.relations.shape[1] + [1]],
                               shape=(A.ngens + 1, A.relations.shape[1] + 1)))
    to2 = make_map(A, A2, matrix([[1 if i == j else 0 for j in range(A.ngens)] for i in range(A.ngens + 1)],
                                 shape=(A.ngens + 1, A.ngens)))
    assert to2.is_isomorphism
    perm = list(range(B.ngens))[::-1]
    B2 = make_module(R, B.relations[perm, :], B.ngens)
    swap = make_map(B, B2, matrix([[1 if perm[i] == j else 0 for j in range(B.ngens)] for i in range(B.ngens)]))
    assert swap.is_isomorphism
    ctx, ctx2 = StableContext.for_modules(A, B), StableContext.for_modules(A2, B2)
    om = omega_maps(to2, ctx.resA, ctx2.resA, 2)
    sig = sigma_maps(swap, ctx.resB, ctx2.resB, 2)
    top = on_stab(ctx, ctx2, om[1], sig[1], 1, 1)
    low = on_stab(ctx, ctx2, om[0], sig[0], 0, 0)
    assert top.is_isomorphism and low.is_isomorphism
    assert compose(ctx2.Delta(0, 0), top).equals(compose(low, ctx.Delta(0, 0)))


@pytest.mark.parametrize("m,d", [(4, 2), (8, 2), (8, 4), (9, 3), (12, 6)])
@pytest.mark.parametrize("k", [1, 2])
def test_quasi_frobenius_degree_propagation(m, d, k):
    R = Ring(m)
    A, B = cyclic(R, d), cyclic(R, m // d if m // d > 1 else d)
    # B is recovered as the k-th cosyzygy of its k-th syzygy
    sy = FreeResolution(B).omega(k)
    assert is_isomorphic(InjectiveResolution(sy).sigma(k), B)
    for n in range(-1, 2):
        base = asymptotic_T(StableContext.for_modules(A, B), n)
        shifted = asymptotic_T(StableContext.for_modules(A, sy), n + k)
        assert is_isomorphic(base.limit, shifted.limit)


def test_free_and_tor_towers_share_certificates():
    R = Ring(8)
    ctx = StableContext.for_modules(cyclic(R, 2), cyclic(R, 4))
    t = tower(ctx, 0)
    assert t.certificate.kind == "StabilizedAt"
    assert tor_tower(ctx, 0).certificate.kind == "StabilizedAt"
    assert [row["stage"] for row in t.table()] == sorted(t.stages)
