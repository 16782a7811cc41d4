"""Finite-horizon Vogel chains and their projection to coherent sequences.

A degree-l chain has components ``s_j`` in ``P(j) x I(j-l-1)``.  Its
differential has components

    D_j = d_P(s_{j+1}) + (-1)^j d_I(s_j)   in  P(j) x I(j-l).

Sign convention: with ``c_j`` the image of ``s_j`` in
``omega(j) x sigma(j-l)``, the coherent entry at stage ``j-l`` is
``theta_j * c_j`` where ``theta_j = (-1)^(j(j+1)/2)``.  Equivalently it is
``theta_{j+1} * w_j`` with ``w_j`` the pull-back/push-down of
``d_P(s_{j+1})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .chase import ChaseFailure
from .linalg import zeros
from .modules import ModuleMap, compose, direct_sum, identity, inverse, tensor_map
from .stable import StableContext, Tower, first_stage


def theta(j: int) -> int:
    return -1 if (j * (j + 1) // 2) % 2 else 1


@dataclass(frozen=True)
class Tail:
    kind: str  # zero | periodic | open
    start: int = 0
    period: int = 0
    sign: int = 1

    def __str__(self) -> str:
        if self.kind == "periodic":
            return f"Periodic({self.start}, {self.period}, {'+' if self.sign > 0 else '-'})"
        return self.kind.capitalize()


ZERO_TAIL = Tail("zero")
OPEN_TAIL = Tail("open")


class ChainMaps:
    """Element-level maps on ``P(j) x I(b)`` for one stable context."""

    def __init__(self, ctx: StableContext):
        self.ctx = ctx
        self._cache: dict = {}

    def _memo(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def _k(self, name, j, b):
        return (name, self.ctx.resA.slot(j), self.ctx.resB.slot(b))

    def space(self, j, b):
        return self.ctx.PI(j, b)

    def d_P(self, j, b) -> ModuleMap:
        """``P(j) x I(b) -> P(j-1) x I(b)``."""
        r = self.ctx.resA
        key = ("dP", self.ctx.resA.slot(j), self.ctx.resA.slot(j - 1), self.ctx.resB.slot(b))
        return self._memo(key, lambda: tensor_map(
            r.differential(j), identity(self.ctx.resB.I(b)), self.ctx.PI(j, b), self.ctx.PI(j - 1, b)))

    def d_I(self, j, b) -> ModuleMap:
        """``P(j) x I(b) -> P(j) x I(b+1)``."""
        return self._memo(self._k("dI", j, b), lambda: compose(self.ctx.P_eta(j, b + 1), self.ctx.P_pi(j, b)))

    def to_stage(self, j, b) -> ModuleMap:
        """``P(j) x I(b) -> omega(j) x sigma(b+1)``."""
        return self._memo(self._k("epi", j, b), lambda: compose(self.ctx.eps_one(j, b + 1), self.ctx.P_pi(j, b)))


@dataclass(eq=False)
class VogelChain:
    ctx: StableContext
    degree: int
    components: dict  # j -> column vector in P(j) x I(j-degree-1)
    tail: Tail = ZERO_TAIL

    @property
    def first(self) -> int:
        return max(0, self.degree + 1)

    @property
    def last(self) -> int:
        return max(self.components) if self.components else self.first - 1

    def space(self, j):
        return self.ctx.PI(j, j - self.degree - 1)

    def component(self, j):
        if j < self.first:
            return None
        if j in self.components:
            return self.components[j]
        t = self.tail
        if t.kind == "periodic" and j >= t.start:
            q, r = divmod(j - t.start, t.period)
            base = self.components[t.start + r]
            return base * (t.sign ** q)
        if t.kind == "zero" or j < min(self.components, default=j + 1):
            return self.space(j).zero_vector()
        raise KeyError(f"component {j} lies beyond an open window")

    def known(self, j) -> bool:
        if self.tail.kind == "open":
            return j <= self.last
        return True

    def __add__(self, other: "VogelChain") -> "VogelChain":
        if self.degree != other.degree:
            raise ValueError("degrees differ")
        # a zero tail is known everywhere, so only the other summand bounds the window
        hints = [c.horizon_hint() for c in (self, other) if c.tail.kind != "zero"]
        hi = min(hints) if hints else max(self.last, other.last)
        if any(c.tail.kind == "zero" and c.last > hi for c in (self, other)):
            raise ValueError("finite support extends past the computed window")
        comps = {j: self.component(j) + other.component(j) for j in range(self.first, hi + 1)}
        return VogelChain(self.ctx, self.degree, comps, ZERO_TAIL if not hints else OPEN_TAIL)

    def horizon_hint(self) -> int:
        t = self.tail
        if t.kind == "periodic":
            return max(self.last, t.start + 2 * t.period)
        return self.last


def zero_chain(ctx: StableContext, degree: int) -> VogelChain:
    return VogelChain(ctx, degree, {}, ZERO_TAIL)


def differential_component(s: VogelChain, maps: ChainMaps, j: int):
    """``D_j`` in ``P(j) x I(j-l)``."""
    l = s.degree
    b = j - l
    out = maps.space(j, b).zero_vector()
    nxt = s.component(j + 1)
    if nxt is not None and j + 1 >= s.first:
        out = out + maps.d_P(j + 1, b)(nxt)
    cur = s.component(j)
    if cur is not None and b - 1 >= 0:
        out = out + (1 if j % 2 == 0 else -1) * maps.d_I(j, b - 1)(cur)
    return maps.space(j, b).reduce(out)


def _check_range(s: VogelChain) -> int:
    t = s.tail
    if t.kind == "open":
        return s.last - 1
    if t.kind == "periodic":
        return max(s.last, t.start + t.period)
    return s.last


def check_cycle(s: VogelChain, maps: Optional[ChainMaps] = None) -> tuple[bool, int]:
    """Whether D(s) is finitely supported, and the confluence index.

    Zero and periodic tails are certified (D repeats with the tail when the
    period is even); an open tail is only checked inside the window.
    """
    maps = maps or ChainMaps(s.ctx)
    t = s.tail
    if t.kind == "periodic" and t.period % 2:
        raise ValueError("periodic tails need an even period")
    hi = _check_range(s)
    k = hi + 1
    for j in range(hi, s.first - 1, -1):
        if not maps.space(j, j - s.degree).is_zero_element(differential_component(s, maps, j)):
            break
        k = j
    k = max(k, s.first)
    if t.kind == "periodic" and k > t.start + t.period - 1:
        return False, k
    return True, k


# --------------------------------------------------------------------------


@dataclass(eq=False)
class CoherentSequence:
    ctx: StableContext
    degree: int
    entries: dict  # stage k -> column in stab(k+degree, k)
    tail: Tail = OPEN_TAIL

    def stage_module(self, k):
        return self.ctx.stab(k + self.degree, k)[0]

    def entry(self, k):
        if k in self.entries:
            return self.entries[k]
        t = self.tail
        if t.kind == "zero":
            return self.stage_module(k).zero_vector()
        if t.kind == "periodic" and k >= t.start:
            q, r = divmod(k - t.start, t.period)
            return self.entries[t.start + r] * (t.sign ** q)
        raise KeyError(f"stage {k} outside the computed window")

    @property
    def window(self) -> range:
        return range(min(self.entries), max(self.entries) + 1)

    def is_coherent(self) -> bool:
        for k in self.window:
            if k - 1 in self.entries:
                D = self.ctx.Delta(k - 1 + self.degree, k - 1)
                if not D.target.equal(D(self.entries[k]), self.entries[k - 1]):
                    return False
        t = self.tail
        if t.kind == "periodic":
            s, p = t.start, t.period
            if not self.stage_module(s).equal(self.entry(s + p), t.sign * self.entries[s]):
                return False
        return True

    def agrees_with(self, other: "CoherentSequence", stages=None) -> bool:
        ks = stages if stages is not None else sorted(set(self.entries) & set(other.entries))
        return all(self.stage_module(k).equal(self.entry(k), other.entry(k)) for k in ks)

    def is_zero(self) -> bool:
        return all(self.stage_module(k).is_zero_element(v) for k, v in self.entries.items())

    def __add__(self, other):
        ks = sorted(set(self.entries) & set(other.entries))
        return CoherentSequence(self.ctx, self.degree, {k: self.entries[k] + other.entries[k] for k in ks}, OPEN_TAIL)


def _stage_coords(ctx, degree, k, v_in_T):
    """Coordinates in ``stab(k+degree, k)`` of a vector of ``T(k+degree, k)``."""
    inc = ctx.stab(k + degree, k)[1]
    x = inc.preimage(v_in_T)
    if x is None:
        raise ChaseFailure(f"element at stage {k} is not stable")
    return x


def omega_direct(s: VogelChain, maps: ChainMaps, j: int):
    """Pull ``d_P(s_{j+1})`` back along ``P(j) x eta`` and push down to ``omega(j) x sigma(j-l)``."""
    ctx, l = s.ctx, s.degree
    b = j - l
    bullet = maps.d_P(j + 1, b)(s.component(j + 1))
    box = ctx.P_eta(j, b).preimage(bullet)
    if box is None:
        raise ChaseFailure(f"d_P(s_{j + 1}) does not pull back")
    return _stage_coords(ctx, l, b, ctx.eps_one(j, b)(box))


def omega_snake(s: VogelChain, maps: ChainMaps, j: int):
    """Same element via the structure map applied to the image of ``s_{j+1}``."""
    ctx, l = s.ctx, s.degree
    b = j - l
    c = _stage_coords(ctx, l, b + 1, maps.to_stage(j + 1, b)(s.component(j + 1)))
    return ctx.Delta(j, b)(c)


def project_kappa(s: VogelChain, window: Optional[int] = None, route: str = "direct",
                  maps: Optional[ChainMaps] = None) -> CoherentSequence:
    """Coherent sequence of a Vogel cycle, extended downwards by the structure maps."""
    maps = maps or ChainMaps(s.ctx)
    ok, k = check_cycle(s, maps)
    if not ok:
        raise ChaseFailure("chain is not a cycle")
    ctx, l = s.ctx, s.degree
    k0 = first_stage(l)
    t = s.tail
    if t.kind == "open":
        top_j = s.last - 1
    elif t.kind == "periodic":
        top_j = max(k, t.start + 2 * t.period, s.last)
    else:
        top_j = max(k, s.last)
    if window is not None:
        top_j = max(top_j, window + l) if t.kind != "open" else min(top_j, window + l)
    k = max(k, k0 + l)
    entries = {}
    fn = omega_direct if route == "direct" else omega_snake
    for j in range(k, top_j + 1):
        entries[j - l] = theta(j + 1) * fn(s, maps, j)
    if not entries:
        return CoherentSequence(ctx, l, {}, ZERO_TAIL if t.kind == "zero" else OPEN_TAIL)
    lo = min(entries)
    for stage in range(lo, k0, -1):
        entries[stage - 1] = ctx.Delta(stage - 1 + l, stage - 1)(entries[stage])
    entries = {st: ctx.stab(st + l, st)[0].reduce(v) for st, v in entries.items()}
    if t.kind == "zero":
        tail = ZERO_TAIL
    elif t.kind == "periodic":
        # entries at j+p pick up sign * theta(j+p+1)/theta(j+1) = sign * (-1)^(p/2)
        tail = Tail("periodic", max(k, t.start) - l, t.period, t.sign * (-1) ** (t.period // 2))
    else:
        tail = OPEN_TAIL
    return CoherentSequence(ctx, l, entries, tail)


# --------------------------------------------------------------------------


MAX_TAIL_MULTIPLE = 64


def coherent_from_stage(ctx: StableContext, tower: Tower, x, extra: int = 0) -> CoherentSequence:
    """Coherent sequence through ``x`` at the stable stage of a stabilized tower."""
    if tower.certificate.kind != "StabilizedAt":
        raise ValueError("tower is not certified stable")
    n = tower.degree
    K = tower.certificate.index
    k0 = tower.start
    entries = {K: ctx.stab(K + n, K)[0].reduce(x)}
    s = tower.periodic_from if tower.periodic_from is not None else K
    p = tower.period or 1
    top = max(K, s) + 2 * p + extra
    for k in range(K + 1, top + 1):
        D = ctx.Delta(k - 1 + n, k - 1)
        entries[k] = D.source.reduce(inverse(D)(entries[k - 1]))
    for k in range(K, k0, -1):
        entries[k - 1] = ctx.Delta(k - 1 + n, k - 1)(entries[k])
    start = max(K, s)
    M = ctx.stab(start + n, start)[0]
    tail = OPEN_TAIL
    # the stable structure map may act by an automorphism other than +-1; its order bounds the search
    for q in range(p, p * (MAX_TAIL_MULTIPLE + 1), p):
        for k in range(max(entries) + 1, start + q + 1):
            D = ctx.Delta(k - 1 + n, k - 1)
            entries[k] = D.source.reduce(inverse(D)(entries[k - 1]))
        if M.equal(entries[start + q], entries[start]):
            tail = Tail("periodic", start, q, 1)
        elif M.equal(entries[start + q], -entries[start]):
            tail = Tail("periodic", start, q, -1)
        if tail.kind == "periodic":
            break
    return CoherentSequence(ctx, n, entries, tail)


@dataclass(eq=False)
class LiftReport:
    chain: VogelChain
    corrections_solved: int
    fallback_steps: list = field(default_factory=list)


def lift_surjectivity(phi: CoherentSequence, horizon: int = 8, maps: Optional[ChainMaps] = None) -> LiftReport:
    """A Vogel cycle projecting onto ``phi``.

    Each step picks ``t_j`` over the target entry and corrects it by
    ``d_I(y_j)`` so that the cycle relation with ``s_{j-1}`` holds.  When
    the correction equation has no solution for the chosen ``t_j`` the step
    is solved jointly; such steps are listed in ``fallback_steps``.
    """
    ctx, l = phi.ctx, phi.degree
    maps = maps or ChainMaps(ctx)
    j0 = max(0, l + 1)
    k_top = max(phi.entries) if phi.tail.kind == "open" else j0 - l + horizon
    if phi.tail.kind == "zero":
        k_top = max(phi.entries, default=j0 - l)
    period = None
    if phi.tail.kind == "periodic":
        (a0, pA), (b0, pB) = ctx.periodicity()
        period = math.lcm(phi.tail.period, pA, pB, 2)
        eps = phi.tail.sign ** (period // phi.tail.period) * (-1) ** (period // 2)
    comps = {}
    solved = 0
    fallback = []
    j_hi = k_top + l
    j = j0
    tail = OPEN_TAIL
    while j <= j_hi + (4 * period if period else 0):
        stage = j - l
        b = j - l - 1
        target = theta(j) * ctx.stab(j, stage)[1](phi.entry(stage))
        epi = maps.to_stage(j, b)
        t = epi.preimage(target)
        if t is None:
            raise ChaseFailure(f"no element of P({j}) x I({b}) over the entry at stage {stage}")
        if j == j0:
            s_j = t
        else:
            prev = comps[j - 1]
            rhs = (-1 if (j - 1) % 2 == 0 else 1) * maps.d_I(j - 1, b - 1)(prev) if b - 1 >= 0 else maps.space(j - 1, b).zero_vector()
            diff = maps.d_P(j, b)(t) - rhs
            if b - 1 >= 0:
                dd = compose(maps.d_P(j, b), maps.d_I(j, b - 1))
                y = dd.preimage(diff)
            else:
                y = None if not maps.space(j - 1, b).is_zero_element(diff) else zeros(0, 1)
            if y is not None:
                s_j = t - (maps.d_I(j, b - 1)(y) if b - 1 >= 0 else 0)
                solved += 1
            else:
                s_j = _joint_solve(maps, j, b, target, rhs)
                fallback.append(j)
        comps[j] = maps.space(j, b).reduce(s_j)
        if period and j - period >= j0 + 1 and j > j_hi and ctx.resA.slot(j) == ctx.resA.slot(j - period) \
                and ctx.resB.slot(b) == ctx.resB.slot(b - period):
            if maps.space(j, b).equal(comps[j], eps * comps[j - period]):
                del comps[j]
                tail = Tail("periodic", j - period, period, eps)
                break
        j += 1
    if phi.tail.kind == "zero" and tail.kind == "open":
        tail = OPEN_TAIL
    return LiftReport(VogelChain(ctx, l, comps, tail), solved, fallback)


def _joint_solve(maps: ChainMaps, j, b, target, rhs):
    """Solve ``to_stage(s) = target`` and ``d_P(s) = rhs`` simultaneously."""
    epi, dP = maps.to_stage(j, b), maps.d_P(j, b)
    S, i1, i2, _, _ = direct_sum(epi.target, dP.target)
    both = i1 @ epi + i2 @ dP
    x = both.preimage(i1(target) + i2(rhs))
    if x is None:
        raise ChaseFailure(f"lifting step {j} is unsolvable")
    return x


def lambda_map(phi: CoherentSequence):
    """Bottom-stage evaluation followed by the inclusion into Tor_1."""
    ctx, n = phi.ctx, phi.degree
    k0 = first_stage(n)
    ne = ctx.northeast(k0 + n, k0)
    return ne.target, ne(phi.entry(k0 + 1))
