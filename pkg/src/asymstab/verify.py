"""Verification suite: one check per acceptance criterion, seeded and timed."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import oracle as O
from .linalg import matrix
from .modules import (
    ZZ,
    Module,
    Ring,
    cokernel,
    cyclic,
    image,
    make_map,
    make_module,
)
from .stable import (
    ConnectingContext,
    StableContext,
    asymptotic_T,
    compare_satellite,
    connecting_omega,
    dimension_shift_check,
    intertwine,
    second_construction_omega,
    tower,
)
from .chase import verify_cube_down_horizontal, verify_cube_horizontal_down
from .vogel import (
    ZERO_TAIL,
    VogelChain,
    check_cycle,
    coherent_from_stage,
    lift_surjectivity,
    project_kappa,
)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    checked: int
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    limit: Optional[float] = None

    @property
    def within_time(self) -> bool:
        return self.limit is None or self.seconds < self.limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        lim = f" (limit {self.limit:g} s)" if self.limit is not None else ""
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return f"[{status}] {self.number:>2}. {self.title}: {self.checked} checks, {self.seconds:.2f} s{lim}{extra}"

    def summary(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.ok,
                "checked": self.checked, "failures": [str(f) for f in self.failures]}


# --------------------------------------------------------------------------
# random inputs


def random_module(rng: random.Random, ring: Ring, max_gens: int = 2) -> Module:
    g = rng.randint(1, max_gens)
    if ring.is_integers:
        r = rng.randint(0, g)
        rel = [[rng.randint(-6, 6) for _ in range(r)] for _ in range(g)]
    else:
        # a random diagonal of divisors of m, disguised by elementary operations
        m = ring.modulus
        divs = [d for d in range(2, m + 1) if m % d == 0]
        r = g
        rel = [[rng.choice(divs) if i == j else 0 for j in range(r)] for i in range(g)]
        for _ in range(3):
            if g > 1:
                i, j = rng.sample(range(g), 2)
                c = rng.randrange(m)
                rel[i] = [(x + c * y) % m for x, y in zip(rel[i], rel[j])]
                i, j = rng.sample(range(r), 2)
                c = rng.randrange(m)
                for row in rel:
                    row[i] = (row[i] + c * row[j]) % m
    return make_module(ring, matrix(rel, shape=(g, r)), g)


def random_ses(rng: random.Random, ring: Ring, max_gens: int = 2):
    """``0 -> B' -> B -> B'' -> 0`` with B' generated by random elements of B."""
    B = random_module(rng, ring, max_gens)
    t = rng.randint(1, 2)
    vecs = [[rng.randrange(ring.modulus) for _ in range(t)] for _ in range(B.ngens)]
    f = make_map(ring.free(t), B, matrix(vecs, shape=(B.ngens, t)))
    Bp, alpha, _ = image(f)
    Bpp, beta = cokernel(alpha)
    return alpha, beta


def nonsplit_ses(ring: Ring, p: int):
    """``0 -> Z/p -> Z/p^2 -> Z/p -> 0`` inside Z/m."""
    S, M = cyclic(ring, p), cyclic(ring, p * p)
    return make_map(S, M, matrix([[p]])), make_map(M, S, matrix([[1]]))


# --------------------------------------------------------------------------
# criteria


def _timed(number, title, limit, body) -> CriterionResult:
    t = time.perf_counter()
    checked, failures = body()
    return CriterionResult(number, title, not failures, checked, failures, time.perf_counter() - t, limit)


def torsion_against_integers_instances():
    return [(p, StableContext.for_modules(cyclic(ZZ, p), ZZ.free(1))) for p in (2, 3, 5)]


def qf_instances():
    out = []
    for m, p in ((4, 2), (9, 3)):
        R = Ring(m)
        A = cyclic(R, p)
        out.append((m, p, StableContext.for_modules(A, A)))
    return out


def criterion_1(seed=0):
    def body():
        fails, n = [], 0
        for p, ctx in torsion_against_integers_instances():
            t = time.perf_counter()
            checks = {
                "Omega A (x~) Sigma B = 0": ctx.stab(1, 1)[0].is_zero,
                "A (x~) B = Z/p": ctx.stab(0, 0)[0].invariant_factors == (0, (p,)),
                "Tor_1(A, Sigma B) = Z/p": ctx.tor(0, 1)[0].invariant_factors == (0, (p,)),
                "delta iso": ctx.delta(0, 0).is_isomorphism,
            }
            it = intertwine(ctx, 0)
            checks["systems isomorphic"] = it.ok and it.limit_maps_inverse is not False
            checks["higher stages zero"] = all(M.is_zero for k, M in it.stab_tower.stages.items() if k >= 1) and \
                all(M.is_zero for k, M in it.tor_tower.stages.items() if k >= 1)
            checks["under 1 s"] = time.perf_counter() - t < 1.0
            for name, ok in checks.items():
                n += 1
                if not ok:
                    fails.append(f"p={p}: {name}")
        return n, fails
    return _timed(1, "Z/p over Z against Z, exact example", None, body)


def criterion_2(seed=0, pairs=50):
    def body():
        rng = random.Random(seed)
        fails, n = [], 0
        for i in range(pairs):
            A, B = random_module(rng, ZZ), random_module(rng, ZZ)
            ctx = StableContext.for_modules(A, B)
            for deg in range(-2, 3):
                v = asymptotic_T(ctx, deg)
                n += 1
                c = v.tower.certificate
                if not (v.limit is not None and v.limit.is_zero and c.kind == "StabilizedAt" and c.index <= 2
                        and v.truncation_certified):
                    fails.append(f"pair {i} ({A.describe()}, {B.describe()}), n={deg}: {v.describe()}")
        return n, fails
    return _timed(2, "vanishing over Z for random pairs", 10.0, body)


def criterion_3(seed=0):
    def body():
        fails, n = [], 0
        for m, p, ctx in qf_instances():
            for deg in range(-3, 4):
                tw = tower(ctx, deg)
                n += 1
                if not (tw.certificate.kind == "StabilizedAt" and tw.limit is not None
                        and tw.limit.invariant_factors == (0, (p,)) and all(f.is_isomorphism for f in tw.maps.values())):
                    fails.append(f"Z/{m}, n={deg}: {tw.certificate}")
                for k, M in tw.stages.items():
                    n += 1
                    if O.kill_profile_from_factors(m, M.torsion) != O.stage_profile(m, [p], [p], k + deg, k):
                        fails.append(f"Z/{m}, n={deg}, stage {k}: oracle disagrees")
                for k, f in tw.maps.items():
                    n += 1
                    if not O.bijective_by_enumeration(f):
                        fails.append(f"Z/{m}, n={deg}, map {k}: not bijective by enumeration")
        return n, fails
    return _timed(3, "quasi-Frobenius towers with oracle", 30.0, body)


def criterion_4(seed=0, count=100):
    def body():
        rng = random.Random(seed)
        fails = []
        rings = [Ring(m) for m in (4, 8, 9, 6)]
        for i in range(count):
            R = rings[i % len(rings)]
            A, B = random_module(rng, R), random_module(rng, R)
            d = StableContext.for_modules(A, B).delta(0, 0)
            if not (d.is_surjective and d.is_isomorphism):
                fails.append(f"Z/{R.modulus}: ({A.describe()}, {B.describe()})")
        return count, fails
    return _timed(4, "delta epic and iso over Z/m", None, body)


def criterion_5(seed=0, pairs=50):
    def body():
        fails, n = [], 0
        insts = [(f"Z, p={p}", ctx, (0,)) for p, ctx in torsion_against_integers_instances()]
        rng = random.Random(seed)
        for i in range(pairs):
            A, B = random_module(rng, ZZ), random_module(rng, ZZ)
            insts.append((f"Z pair {i}", StableContext.for_modules(A, B), tuple(range(-2, 3))))
        insts += [(f"Z/{m}", ctx, tuple(range(-3, 4))) for m, p, ctx in qf_instances()]
        for name, ctx, degs in insts:
            for deg in degs:
                it = intertwine(ctx, deg)
                n += 1
                if not it.ok or it.limit_maps_inverse is None:
                    fails.append(f"{name}, n={deg}")
        return n, fails
    return _timed(5, "intertwined towers and inverse limit maps", None, body)


def criterion_6(seed=0):
    def body():
        fails, n = [], 0
        for m, p, ctx in qf_instances():
            for deg in range(-3, 4):
                sc = compare_satellite(ctx, deg)
                n += 1
                if not sc.ok:
                    fails.append(f"Z/{m}, n={deg}")
        return n, fails
    return _timed(6, "satellite tower isomorphic to the stabilized tower", None, body)


def random_cubes(rng: random.Random, ring: Ring, count: int):
    made = 0
    while made < count:
        A = random_module(rng, ring)
        alpha, beta = random_ses(rng, ring)
        cc = ConnectingContext(A, alpha, beta)
        yield cc.ses_cube(rng.randint(0, 1), rng.randint(0, 1))
        made += 1


def criterion_7(seed=0, count=25):
    def body():
        rng = random.Random(seed)
        fails, n = [], 0
        for m in (4, 8, 6):
            for cube in random_cubes(rng, Ring(m), count):
                for lemma in (verify_cube_down_horizontal, verify_cube_horizontal_down):
                    rep = lemma(cube)
                    n += 1
                    if not rep.passed:
                        fails.append(f"Z/{m} {cube.label}: {rep.lemma}")
        return n, fails
    return _timed(7, "cube lemmas on random tensored sequences", None, body)


def criterion_8(seed=0, count=20):
    def body():
        rng = random.Random(seed)
        R = Ring(4)
        fails, n = [], 0
        cases = [("nonsplit", cyclic(R, 2), *nonsplit_ses(R, 2))]
        for i in range(count):
            cases.append((f"random {i}", random_module(rng, R), *random_ses(rng, R)))
        signs = set()
        for name, A, alpha, beta in cases:
            cc = ConnectingContext(A, alpha, beta)
            for deg in (0, 1):
                om = connecting_omega(cc, deg)
                rho = second_construction_omega(cc, deg)
                n += 1
                if not (om.ok and rho.ok):
                    fails.append(f"{name}, n={deg}")
                if rho.relative_sign is not None:
                    signs.add(rho.relative_sign)
        # a ring where signs are visible
        R9 = Ring(9)
        cc = ConnectingContext(cyclic(R9, 3), *nonsplit_ses(R9, 3))
        for deg in (0, 1):
            rho = second_construction_omega(cc, deg)
            n += 1
            if not rho.ok:
                fails.append(f"Z/9 nonsplit, n={deg}")
            if rho.relative_sign is not None:
                signs.add(rho.relative_sign)
        if len(signs) > 1:
            fails.append(f"inconsistent global sign {sorted(signs)}")
        return n, fails
    return _timed(8, "connected-sequence axioms and the two constructions", None, body)


def _random_coherent(rng, R, tries=40):
    for _ in range(tries):
        A, B = random_module(rng, R), random_module(rng, R)
        ctx = StableContext.for_modules(A, B)
        deg = rng.randint(-2, 2)
        tw = tower(ctx, deg)
        if tw.certificate.kind != "StabilizedAt" or tw.limit is None or tw.limit.is_zero:
            continue
        M = tw.stages[tw.certificate.index]
        x = sum((rng.randrange(R.modulus) * M.gen(i) for i in range(M.ngens)), M.zero_vector())
        if M.is_zero_element(x):
            x = M.gen(0)
        return ctx, tw, coherent_from_stage(ctx, tw, x)
    raise RuntimeError("no nonzero stable tower found")


def criterion_9(seed=0, count=20, horizon=6):
    def body():
        rng = random.Random(seed)
        fails, n = [], 0
        for m in (4, 9):
            R = Ring(m)
            for i in range(count):
                ctx, tw, phi = _random_coherent(rng, R)
                rep = lift_surjectivity(phi, horizon)
                s = rep.chain
                ok, _ = check_cycle(s)
                psi = project_kappa(s)
                n += 1
                if not (ok and phi.is_coherent() and psi.agrees_with(phi, range(tw.start, tw.start + horizon))):
                    fails.append(f"Z/{m} round trip {i}")
                # finitely supported chain projects to zero
                lo = s.first
                fin = VogelChain(ctx, s.degree, {j: s.space(j).reduce(
                    matrix([[rng.randrange(m)] for _ in range(s.space(j).ngens)], shape=(s.space(j).ngens, 1)))
                    for j in range(lo, lo + 3)}, ZERO_TAIL)
                n += 1
                if not (check_cycle(fin)[0] and project_kappa(fin).is_zero()):
                    fails.append(f"Z/{m} finite support {i}")
                # additivity
                x2 = tw.stages[tw.certificate.index].gen(0)
                phi2 = coherent_from_stage(ctx, tw, x2)
                s2 = lift_surjectivity(phi2, horizon).chain
                lhs = project_kappa(s + s2)
                rhs = project_kappa(s) + project_kappa(s2)
                n += 1
                if not lhs.agrees_with(rhs) or not lhs.entries:
                    fails.append(f"Z/{m} additivity {i}")
        return n, fails
    return _timed(9, "Vogel lift and projection round trip", None, body)


def criterion_10(seed=0):
    def body():
        fails, n = [], 0
        for m, p, ctx in qf_instances():
            for deg in (-1, 0, 1):
                for k in range(3):
                    for j in range(3):
                        rep = dimension_shift_check(ctx, deg, k, j)
                        n += 1
                        if not rep.ok:
                            fails.append(f"Z/{m}, n={deg}, k={k}, j={j}")
        return n, fails
    return _timed(10, "dimension shifting", None, body)


def presentation_module(R: Ring, p: "O.Presentation") -> Module:
    if not p.relations:
        return R.free(p.ngens)
    rel = matrix([list(c) for c in zip(*p.relations)], shape=(p.ngens, len(p.relations)))
    return make_module(R, rel, p.ngens)


def criterion_11(seed=0):
    def body():
        from .stable import inj_stabilize

        fails, n = [], 0
        for m in (4, 6, 8, 9):
            R = Ring(m)
            C = O.corpus(m)
            mods = [presentation_module(R, p) for p in C]
            for a, A in zip(C, mods):
                for b, B in zip(C, mods):
                    n += 1
                    mine = O.kill_profile_from_factors(m, inj_stabilize(A, B).module.torsion)
                    if mine != O.stabilized_profile(a, b):
                        fails.append(f"Z/{m}: {a.relations} vs {b.relations}")
        return n, fails
    return _timed(11, "oracle equivalence on the module corpus", 60.0, body)


CRITERIA: dict[int, Callable] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
    7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11,
}


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    return [CRITERIA[i](seed) for i in sorted(CRITERIA) if only is None or i in only]
