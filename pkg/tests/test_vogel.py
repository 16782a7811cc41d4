import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymstab.linalg import matrix
from asymstab.modules import Ring, cyclic
from asymstab.stable import StableContext, tower
from asymstab.verify import _random_coherent
from asymstab.vogel import (
    ZERO_TAIL, ChainMaps, CoherentSequence, VogelChain, check_cycle, coherent_from_stage, lambda_map,
    lift_surjectivity, project_kappa, theta, zero_chain,
)


def z2_over_z4(n=0):
    R = Ring(4)
    ctx = StableContext.for_modules(cyclic(R, 2), cyclic(R, 2))
    tw = tower(ctx, n)
    M = tw.stages[tw.certificate.index]
    return ctx, tw, coherent_from_stage(ctx, tw, M.gen(0))


def random_finite_chain(rng, ctx, degree, width=3):
    s = zero_chain(ctx, degree)
    comps = {}
    for j in range(s.first, s.first + width):
        V = s.space(j)
        comps[j] = V.reduce(matrix([[rng.randrange(ctx.ring.modulus)] for _ in range(V.ngens)], shape=(V.ngens, 1)))
    return VogelChain(ctx, degree, comps, ZERO_TAIL)


def test_sign_pattern():
    assert [theta(j) for j in range(8)] == [1, -1, -1, 1, 1, -1, -1, 1]


@pytest.mark.parametrize("n", [-1, 0, 1])
def test_zero_chain(n):
    ctx, _, _ = z2_over_z4()
    s = zero_chain(ctx, n)
    assert check_cycle(s) == (True, s.first)
    assert project_kappa(s).is_zero()


def test_zero_chain_confluence_index_is_one():
    ctx, _, _ = z2_over_z4()
    assert check_cycle(zero_chain(ctx, 0)) == (True, 1)


@given(st.sampled_from([4, 9]), st.integers(-1, 1), st.integers(0, 10_000))
def test_finitely_supported_chains_are_cycles_projecting_to_zero(m, n, seed):
    rng = random.Random(seed)
    R = Ring(m)
    ctx = StableContext.for_modules(cyclic(R, m // (2 if m == 4 else 3)), cyclic(R, 2 if m == 4 else 3))
    s = random_finite_chain(rng, ctx, n)
    ok, _ = check_cycle(s)
    assert ok
    assert project_kappa(s).is_zero()


@pytest.mark.parametrize("n", [-1, 0, 1, 2])
def test_round_trip_on_constant_generator(n):
    ctx, tw, phi = z2_over_z4(n)
    assert phi.is_coherent()
    rep = lift_surjectivity(phi)
    s = rep.chain
    ok, k = check_cycle(s)
    assert ok
    assert all(not s.space(j).is_zero_element(s.component(j)) for j in range(s.first, s.last + 1))
    psi = project_kappa(s)
    assert psi.agrees_with(phi, range(tw.start, tw.start + 6))
    assert not rep.fallback_steps


def test_lift_of_zero_sequence():
    ctx, tw, phi = z2_over_z4()
    zero = CoherentSequence(ctx, 0, {k: phi.stage_module(k).zero_vector() for k in phi.entries}, ZERO_TAIL)
    s = lift_surjectivity(zero).chain
    assert check_cycle(s)[0]
    assert project_kappa(s).is_zero()


@given(st.sampled_from([4, 8, 9]), st.integers(0, 10_000))
def test_round_trip_random(m, seed):
    rng = random.Random(seed)
    ctx, tw, phi = _random_coherent(rng, Ring(m))
    s = lift_surjectivity(phi, 6).chain
    assert check_cycle(s)[0]
    assert project_kappa(s).agrees_with(phi, range(tw.start, tw.start + 6))


@given(st.sampled_from([4, 9]), st.integers(0, 10_000))
def test_snake_route_gives_identical_entries(m, seed):
    rng = random.Random(seed)
    ctx, tw, phi = _random_coherent(rng, Ring(m))
    s = lift_surjectivity(phi, 6).chain
    maps = ChainMaps(ctx)
    direct = project_kappa(s, route="direct", maps=maps)
    snake = project_kappa(s, route="snake", maps=maps)
    assert direct.agrees_with(snake) and set(direct.entries) == set(snake.entries)


@given(st.sampled_from([4, 9]), st.integers(0, 10_000))
def test_projection_is_additive(m, seed):
    rng = random.Random(seed)
    ctx, tw, phi = _random_coherent(rng, Ring(m))
    M = tw.stages[tw.certificate.index]
    phi2 = coherent_from_stage(ctx, tw, M.gen(rng.randrange(M.ngens)))
    s1, s2 = lift_surjectivity(phi, 6).chain, lift_surjectivity(phi2, 6).chain
    fin = random_finite_chain(rng, ctx, phi.degree)
    total = project_kappa(s1 + s2 + fin)
    parts = project_kappa(s1) + project_kappa(s2)
    assert total.entries and total.agrees_with(parts)


def test_lambda_lands_in_tor():
    ctx, tw, phi = z2_over_z4(0)
    T, v = lambda_map(phi)
    assert T.describe() == "Z/2" and not T.is_zero_element(v)
