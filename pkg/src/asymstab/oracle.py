"""Brute-force reference computations over Z/m by exhaustive enumeration.

Nothing here uses Smith normal form.  Modules are presentations
``(Z/m)^g / span(relations)`` and subgroups are boolean masks over all
``m^g`` vectors.  A finite Z/m-module is pinned down up to isomorphism by
its *kill profile*: for each divisor d of m, the number of elements killed
by d.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_SPACE = 200_000


def divisors(m: int) -> list[int]:
    return [d for d in range(1, m + 1) if m % d == 0]


def _space(m: int, n: int) -> np.ndarray:
    """All vectors of (Z/m)^n, row i encoding the base-m digits of i."""
    if m ** n > MAX_SPACE:
        raise ValueError(f"(Z/{m})^{n} is too large to enumerate")
    idx = np.arange(m ** n, dtype=np.int64)
    out = np.empty((m ** n, n), dtype=np.int64)
    for i in range(n):
        out[:, i] = idx % m
        idx //= m
    return out


def _codes(vecs: np.ndarray, m: int) -> np.ndarray:
    n = vecs.shape[1]
    w = m ** np.arange(n, dtype=np.int64)
    return (vecs % m) @ w


def span_mask(m: int, n: int, gens: Sequence[Sequence[int]]) -> np.ndarray:
    """Indicator of the subgroup of (Z/m)^n generated by ``gens``."""
    members = np.zeros((1, n), dtype=np.int64)
    for g in gens:
        g = np.asarray([int(x) % m for x in g], dtype=np.int64)
        if not g.any():
            continue
        shifted = (members[None, :, :] + np.arange(m, dtype=np.int64)[:, None, None] * g) % m
        members = np.unique(shifted.reshape(-1, n), axis=0)
    mask = np.zeros(m ** n, dtype=bool)
    mask[_codes(members, m)] = True
    return mask


@dataclass(frozen=True)
class Presentation:
    m: int
    ngens: int
    relations: tuple  # tuple of relation vectors

    def mask(self) -> np.ndarray:
        return span_mask(self.m, self.ngens, self.relations)

    def order(self) -> int:
        return self.m ** self.ngens // int(self.mask().sum())


def diagonal(m: int, factors: Sequence[int]) -> Presentation:
    """``(+) Z/d_i`` with d_i dividing m."""
    g = len(factors)
    rels = tuple(tuple(d if j == i else 0 for j in range(g)) for i, d in enumerate(factors))
    return Presentation(m, g, rels)


def kill_profile_of_quotient(m: int, n: int, sub: np.ndarray, ambient: np.ndarray | None = None) -> dict:
    """Kill profile of ``ambient / sub`` (ambient defaults to everything)."""
    V = _space(m, n)
    if ambient is None:
        ambient = np.ones(m ** n, dtype=bool)
    X = V[ambient]
    size = int(sub.sum())
    prof = {}
    for d in divisors(m):
        killed = sub[_codes(d * X, m)]
        prof[d] = int(killed.sum()) // size
    return prof


def kill_profile(p: Presentation) -> dict:
    return kill_profile_of_quotient(p.m, p.ngens, p.mask())


def kill_profile_from_factors(m: int, factors: Sequence[int]) -> dict:
    return {d: math.prod(math.gcd(d, f) for f in factors) for d in divisors(m)}


def factors_from_profile(m: int, prof: dict) -> list[int]:
    """Cyclic decomposition (as a list of orders) of a Z/m-module with the given profile."""
    out = []
    by_prime: dict[int, list[int]] = {}
    x = m
    p = 2
    primes = []
    while x > 1:
        if x % p == 0:
            primes.append(p)
            while x % p == 0:
                x //= p
        p += 1
    for p in primes:
        e = 0
        while m % p ** (e + 1) == 0:
            e += 1
        # log_p(#killed by p^k) = sum_i min(k, e_i)
        logs = [0]
        for k in range(1, e + 1):
            c, t = prof[p ** k], 0
            while c > 1:
                c //= p
                t += 1
            logs.append(t)
        counts = [logs[k] - logs[k - 1] for k in range(1, e + 1)]  # #summands with exponent >= k
        exps = []
        for k in range(e, 0, -1):
            more = counts[k - 1] - (counts[k] if k < e else 0)
            exps += [k] * more
        by_prime[p] = sorted(exps, reverse=True)
    width = max((len(v) for v in by_prime.values()), default=0)
    for i in range(width):
        out.append(math.prod(p ** v[i] for p, v in by_prime.items() if i < len(v)))
    return sorted((f for f in out if f > 1))


def characters(p: Presentation) -> list[tuple]:
    """All homomorphisms to Z/m, as generator images."""
    V = _space(p.m, p.ngens)
    ok = np.ones(len(V), dtype=bool)
    for r in p.relations:
        ok &= (V @ np.asarray(r, dtype=np.int64)) % p.m == 0
    return [tuple(int(x) for x in row) for row in V[ok]]


def separating_characters(p: Presentation) -> list[tuple]:
    """A small family of characters whose joint kernel is exactly the relation subgroup."""
    V = _space(p.m, p.ngens)
    R = p.mask()
    alive = np.ones(len(V), dtype=bool)
    chosen = []
    for chi in characters(p):
        if (alive == R).all():
            break
        new = alive & ((V @ np.asarray(chi, dtype=np.int64)) % p.m == 0)
        if new.sum() < alive.sum():
            alive = new
            chosen.append(chi)
    if not (alive == R).all():
        raise AssertionError("characters fail to separate points")
    return chosen


def stabilized_profile(A: Presentation, B: Presentation) -> dict:
    """Kill profile of ``ker(A x B -> A x (Z/m)^r)`` for a character embedding of B."""
    m = A.m
    gA, gB = A.ngens, B.ngens
    chis = separating_characters(B)
    r = len(chis)
    N = gA * gB
    rels = []
    for a in A.relations:
        for j in range(gB):
            v = [0] * N
            for i in range(gA):
                v[i * gB + j] = a[i]
            rels.append(v)
    for b in B.relations:
        for i in range(gA):
            v = [0] * N
            for j in range(gB):
                v[i * gB + j] = b[j]
            rels.append(v)
    RT = span_mask(m, N, rels)
    if r == 0:
        return kill_profile_of_quotient(m, N, RT)
    # e_i (x) e_j  ->  sum_t chi_t(e_j) e_i in copy t
    phi = np.zeros((N, gA * r), dtype=np.int64)
    for i in range(gA):
        for j in range(gB):
            for t, chi in enumerate(chis):
                phi[i * gB + j, t * gA + i] = chi[j]
    Rtarget = span_mask(m, gA * r, [
        [a[i] if t == s else 0 for s in range(r) for i in range(gA)] for a in A.relations for t in range(r)])
    V = _space(m, N)
    X = Rtarget[_codes(V @ phi, m)]
    return kill_profile_of_quotient(m, N, RT, X)


def syzygy_factors(m: int, factors: Sequence[int]) -> list[int]:
    """Omega of ``(+) Z/d_i`` from the cover (Z/m)^g, enumerated."""
    g = len(factors)
    if g == 0:
        return []
    V = _space(m, g)
    ker = np.all(V % np.asarray(factors, dtype=np.int64) == 0, axis=1)
    zero = np.zeros(m ** g, dtype=bool)
    zero[0] = True
    # kernel as a module: profile of ker / 0
    prof = {}
    K = V[ker]
    for d in divisors(m):
        prof[d] = int(zero[_codes(d * K, m)].sum())
    return [f for f in factors_from_profile(m, prof) if f != m]


def cosyzygy_factors(m: int, factors: Sequence[int]) -> list[int]:
    """Sigma of ``(+) Z/d_i`` via the embedding into (Z/m)^g, enumerated."""
    g = len(factors)
    if g == 0:
        return []
    gens = [[(m // d) if j == i else 0 for j in range(g)] for i, d in enumerate(factors)]
    prof = kill_profile_of_quotient(m, g, span_mask(m, g, gens))
    return [f for f in factors_from_profile(m, prof) if f != m]


def stage_profile(m: int, A_factors, B_factors, a: int, b: int) -> dict:
    """Kill profile of ``Omega^a A (x~) Sigma^b B`` computed by enumeration only."""
    fa, fb = list(A_factors), list(B_factors)
    for _ in range(a):
        fa = syzygy_factors(m, fa)
    for _ in range(b):
        fb = cosyzygy_factors(m, fb)
    return stabilized_profile(diagonal(m, fa), diagonal(m, fb))


def bijective_by_enumeration(f) -> bool:
    """Whether a ModuleMap between finite modules is a bijection, by listing images."""
    from .modules import enumerate_elements

    src = list(enumerate_elements(f.source))
    tgt_order = f.target.order()
    if len(src) != tgt_order:
        return False
    seen = {tuple(int(x) for x in f.target.reduce(f(e.coords)).ravel()) for e in src}
    return len(seen) == tgt_order


def corpus(m: int, max_order: int = 64, max_gens: int = 2) -> list[Presentation]:
    """Diagonal modules of bounded order plus a few non-diagonal presentations."""
    divs = [d for d in divisors(m) if d > 1]
    out = []

    def rec(start, acc):
        if acc:
            out.append(diagonal(m, acc))
        if len(acc) == max_gens:
            return
        for i in range(start, len(divs)):
            if math.prod(acc) * divs[i] <= max_order:
                rec(i, acc + [divs[i]])

    rec(0, [])
    # mixed relations: (Z/m)^2 / <(a, b)>, and the same with one more diagonal relation
    for a in divs:
        for b in divs:
            if a < m and b < m:
                p = Presentation(m, 2, ((a, b),))
                if p.order() <= max_order:
                    out.append(p)
                q = Presentation(m, 2, ((a, b), (0, b)))
                if q.order() <= max_order and q.order() > 1:
                    out.append(q)
    return out
