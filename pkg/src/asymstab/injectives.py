"""Injective envelopes, cosyzygies and the divisible modules needed over Z.

Over Z/m every envelope is finitely presented: a cyclic summand Z/p^j
sits inside Z/p^k where p^k exactly divides m.

Over Z the envelope of Z^r + (torsion) is Q^r + sum of Pruefer groups.
These are not finitely generated, so every computation happens inside a
finitely generated subgroup chosen by a :class:`Truncation`:

* Q is replaced by the cyclic group generated by 1/L,
* Q/Z by its L-torsion, Z/L,
* Pruefer(p) by its p^N-torsion, Z/p^N,

where L is the product of p^N over the support primes.  Working in a
subgroup is exact as long as every element the computation touches lies
in it; tensoring with free modules keeps subgroups subgroups.  The
level is chosen from the torsion exponents of the inputs and the result
is re-certified one level higher.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .linalg import IntMatrix, as_int_matrix, hcat, vcat, zeros
from .modules import (
    ZZ,
    Module,
    ModuleMap,
    NotInImage,
    cokernel,
    factorize,
    kernel,
    make_map,
)


def p_valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class Truncation:
    """Per-prime levels N_p; realizes Pruefer(p) as Z/p^N_p."""

    levels: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_dict(cls, levels: dict[int, int]) -> "Truncation":
        return cls(tuple(sorted((int(p), int(n)) for p, n in levels.items())))

    @classmethod
    def for_modules(cls, *modules: Module, slack: int = 2, override: Optional[int] = None) -> "Truncation":
        """Level sum of torsion valuations plus ``slack`` on every support prime."""
        levels: dict[int, int] = {}
        for M in modules:
            e = M.exponent()
            for p in factorize(e):
                levels.setdefault(p, 0)
        for p in levels:
            levels[p] = sum(p_valuation(M.exponent(), p) for M in modules) + slack
            if override is not None:
                levels[p] = override
        return cls.from_dict(levels)

    def level(self, p: int) -> int:
        return dict(self.levels).get(p, 0)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.levels)

    @property
    def q_scale(self) -> int:
        """L: Q is realized on the generator 1/L."""
        return math.prod(p ** n for p, n in self.levels)

    def bumped(self, by: int = 1) -> "Truncation":
        return Truncation(tuple((p, n + by) for p, n in self.levels))

    def covering(self, denominators: Sequence[int]) -> "Truncation":
        """Raise levels so that every given denominator divides the realization."""
        lv = dict(self.levels)
        for d in denominators:
            for p, k in factorize(d).items():
                lv[p] = max(lv.get(p, 0), k)
        return Truncation.from_dict(lv)

    def describe(self) -> str:
        return ",".join(f"{p}^{n}" for p, n in self.levels) or "none"


# --------------------------------------------------------------------------
# symbolic mixed modules (Z only)

@dataclass(frozen=True, eq=False)
class MixedModule:
    """``fg_part + Q^q_rank + (Q/Z)^qmodz_rank + sum_p Pruefer(p)^count``.

    Coordinates are ordered: fg generators, Q, Q/Z, then Pruefer blocks by
    increasing prime.
    """

    fg_part: Module
    q_rank: int = 0
    qmodz_rank: int = 0
    pruefer: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_fp(cls, M: Module) -> "MixedModule":
        return cls(M)

    @property
    def divisible_rank(self) -> int:
        return self.q_rank + self.qmodz_rank + sum(c for _, c in self.pruefer)

    @property
    def is_divisible(self) -> bool:
        return self.fg_part.is_zero

    @property
    def is_injective(self) -> bool:
        if self.fg_part.ring.is_integers:
            return self.fg_part.is_zero
        return True

    def coordinate_kinds(self) -> list[tuple[str, int]]:
        kinds = [("Q", 0)] * self.q_rank + [("Q/Z", 0)] * self.qmodz_rank
        for p, c in self.pruefer:
            kinds += [("P", p)] * c
        return kinds

    def describe(self) -> str:
        parts = []
        if not self.fg_part.is_zero:
            parts.append(self.fg_part.describe())
        for name, r in (("Q", self.q_rank), ("Q/Z", self.qmodz_rank)):
            if r == 1:
                parts.append(name)
            elif r > 1:
                parts.append(f"{name}^{r}")
        for p, c in self.pruefer:
            parts.append(f"Pruefer({p})" + (f"^{c}" if c > 1 else ""))
        return " + ".join(parts) if parts else "0"

    def realize(self, trunc: Truncation) -> Module:
        """Finitely generated subgroup selected by ``trunc``."""
        L = trunc.q_scale
        g = self.fg_part.ngens
        kinds = self.coordinate_kinds()
        n = g + len(kinds)
        R = zeros(n, self.fg_part.relations.shape[1])
        R[:g, :] = self.fg_part.relations
        extra = []
        for i, (kind, p) in enumerate(kinds):
            order = {"Q": 0, "Q/Z": L, "P": p ** trunc.level(p) if p else 0}[kind]
            if order:
                col = zeros(n, 1)
                col[g + i, 0] = order
                extra.append(col)
        return Module(ZZ, n, hcat(R, *extra, rows=n))

    def realize_element(self, x: "MixedElement", trunc: Truncation) -> IntMatrix:
        L = trunc.q_scale
        out = [int(v) for v in x.fg]
        for (kind, p), q in zip(self.coordinate_kinds(), x.divisible):
            q = Fraction(q)
            if kind == "Q" or kind == "Q/Z":
                scaled = q * L
            else:
                scaled = q * p ** trunc.level(p)
            if scaled.denominator != 1:
                raise NotInImage(f"coordinate {q} not visible at truncation {trunc.describe()}")
            out.append(int(scaled))
        return as_int_matrix([[v] for v in out]) if out else zeros(0, 1)


@dataclass(frozen=True)
class MixedElement:
    """Integer fg coordinates plus exact rational divisible coordinates.

    Q/Z and Pruefer coordinates are meaningful modulo 1; ``canonical``
    picks representatives in [0, 1).
    """

    fg: tuple[int, ...]
    divisible: tuple[Fraction, ...]

    def canonical(self, M: MixedModule) -> "MixedElement":
        div = []
        for (kind, p), q in zip(M.coordinate_kinds(), self.divisible):
            q = Fraction(q)
            if kind != "Q":
                q = q - math.floor(q)
            if kind == "P" and factorize(q.denominator).keys() - {p}:
                raise ValueError(f"{q} is not a p-power fraction for p={p}")
            div.append(q)
        return MixedElement(self.fg, tuple(div))


@dataclass(frozen=True, eq=False)
class MixedMap:
    """Homomorphism from a finitely presented module into a mixed module."""

    source: Module
    target: MixedModule
    images: tuple[MixedElement, ...]

    def denominators(self) -> list[int]:
        return [Fraction(q).denominator for x in self.images for q in x.divisible]

    def realize(self, trunc: Truncation) -> ModuleMap:
        T = self.target.realize(trunc)
        cols = [self.target.realize_element(x, trunc) for x in self.images]
        M = hcat(*cols, rows=T.ngens) if cols else zeros(T.ngens, 0)
        return make_map(self.source, T, M)


# --------------------------------------------------------------------------
# envelopes

@dataclass(frozen=True, eq=False)
class Envelope:
    """An injective envelope realized as a finitely presented module."""

    module: Module
    embedding: ModuleMap
    mixed: MixedModule
    truncation: Optional[Truncation] = None


def _cyclic_decomposition(B: Module):
    dec = B._dec
    d = dec.diagonal + [0] * (B.ngens - len(dec.diagonal))
    return dec, d


def injective_envelope(B: Module, trunc: Optional[Truncation] = None) -> Envelope:
    """Envelope with its embedding.

    Over Z the result is the realization of Q^r + Pruefer groups at
    ``trunc`` (defaulting to the level needed by B alone).
    """
    ring = B.ring
    dec, d = _cyclic_decomposition(B)
    rows = []
    orders = []
    if ring.modulus:
        pp = ring.prime_powers
        for i, di in enumerate(d):
            if di == 1:
                continue
            for p, k in pp.items():
                j = p_valuation(di, p)
                if j:
                    rows.append(p ** (k - j) * dec.U[i, :])
                    orders.append(p ** k)
        n = len(rows)
        emb = vcat(*rows, cols=B.ngens) if rows else zeros(0, B.ngens)
        # each summand Z/p^k is a direct summand of Z/m
        R = zeros(n, n)
        for i, o in enumerate(orders):
            R[i, i] = o
        E = Module(ring, n, R)
        return Envelope(E, make_map(B, E, emb), MixedModule(E))

    trunc = trunc if trunc is not None else Truncation.for_modules(B)
    L = trunc.q_scale
    q_rows, p_rows, pruefer = [], [], {}
    for i, di in enumerate(d):
        if di == 0:
            q_rows.append(L * dec.U[i, :])
        elif di > 1:
            for p in sorted(factorize(di)):
                N = trunc.level(p)
                j = p_valuation(di, p)
                if N < j:
                    raise ValueError(f"truncation {trunc.describe()} too low for Z/{di}")
                p_rows.append((p, p ** (N - j) * dec.U[i, :]))
                pruefer[p] = pruefer.get(p, 0) + 1
    p_rows.sort(key=lambda t: t[0])
    mixed = MixedModule(ZZ.zero_module(), len(q_rows), 0, tuple(sorted(pruefer.items())))
    E = mixed.realize(trunc)
    all_rows = q_rows + [r for _, r in p_rows]
    emb = vcat(*all_rows, cols=B.ngens) if all_rows else zeros(0, B.ngens)
    return Envelope(E, make_map(B, E, emb), mixed, trunc)


def cosyzygy_step(B: Module, trunc: Optional[Truncation] = None) -> tuple[Envelope, Module, ModuleMap]:
    """``(envelope, Sigma B, projection envelope -> Sigma B)``."""
    env = injective_envelope(B, trunc)
    S, q = cokernel(env.embedding)
    return env, S, q


def cosyzygy(B: Module, k: int, trunc: Optional[Truncation] = None) -> Module:
    """Sigma^k B.  Over Z, Sigma^k B = 0 for k >= 2 (divisible groups are injective)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if B.ring.is_integers and k >= 2:
        return ZZ.zero_module()
    S = B
    for _ in range(k):
        _, S, _ = cosyzygy_step(S, trunc)
    return S


def cosyzygy_descriptor(B: Module) -> MixedModule:
    """Symbolic Sigma B over Z: (Q/Z)^r plus one Pruefer(p) per p-primary cyclic summand."""
    if not B.ring.is_integers:
        raise ValueError("descriptors are only needed over Z")
    _, d = _cyclic_decomposition(B)
    r = sum(1 for x in d if x == 0)
    pr: dict[int, int] = {}
    for x in d:
        if x > 1:
            for p in factorize(x):
                pr[p] = pr.get(p, 0) + 1
    return MixedModule(ZZ.zero_module(), 0, r, tuple(sorted(pr.items())))


def tensor_mixed(A: Module, M: MixedModule) -> MixedModule:
    """``A (x) M`` over Z by the rank rules; torsion of A dies against divisible parts."""
    from .modules import tensor

    r = A.free_rank
    return MixedModule(
        tensor(A, M.fg_part),
        r * M.q_rank,
        r * M.qmodz_rank,
        tuple((p, r * c) for p, c in M.pruefer if r * c),
    )


@dataclass(frozen=True, eq=False)
class MixedKernel:
    module: Module
    inclusion: ModuleMap
    truncation: Truncation
    certified: bool


def kernel_into_mixed(f: MixedMap, trunc: Optional[Truncation] = None) -> MixedKernel:
    """Exact kernel of a map from a finitely presented module into a mixed one."""
    base = trunc if trunc is not None else Truncation.for_modules(f.source)
    base = base.covering(f.denominators())
    K, inc = kernel(f.realize(base))
    K2, _ = kernel(f.realize(base.bumped()))
    return MixedKernel(K, inc, base, K.invariant_factors == K2.invariant_factors)


def lift_through_quotient(q: Union[ModuleMap, MixedModule], y):
    """Deterministic preimage under a library quotient map.

    For a realized quotient (a ModuleMap) this is the solve-based preimage.
    Passing a MixedModule means the coordinate-wise reduction of rationals
    modulo 1 onto its divisible torsion coordinates; the lift is the
    canonical representative in [0, 1).
    """
    if isinstance(q, ModuleMap):
        return q.lift(y)
    if not isinstance(y, MixedElement):
        raise TypeError("mixed quotients lift MixedElements")
    return y.canonical(q)
