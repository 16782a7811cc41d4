"""Free and injective resolutions, built lazily.

Both kinds are indexed by the module being resolved at each step: a free
resolution stores the syzygies ``omega(k)`` and an injective resolution
the cosyzygies ``sigma(k)``.  Pruned presentations are canonical, so as
soon as a syzygy (or cosyzygy) repeats an earlier presentation the rest
of the resolution repeats as well.  From then on the earlier objects are
handed out again, which keeps later maps composable by identity.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from .injectives import Truncation, injective_envelope
from .linalg import eye, hcat, mat_key, solve, vcat, zeros
from .modules import (
    Module,
    ModuleError,
    ModuleMap,
    cokernel,
    compose,
    corestrict,
    direct_sum,
    identity,
    induced_on_quotients,
    is_exact,
    kernel,
    make_map,
)


class NotExact(ModuleError):
    pass


class ExtensionFailure(ModuleError):
    pass


class _Periodic:
    """Index bookkeeping shared by the lazy resolutions."""

    def __init__(self):
        self._lock = threading.RLock()
        self._cycle: Optional[tuple[int, int]] = None
        self._built = 0

    def _extend(self) -> None:
        raise NotImplementedError

    def _slot(self, k: int) -> int:
        if k < 0:
            raise IndexError(f"negative resolution index {k}")
        with self._lock:
            while self._cycle is None and k >= self._built:
                self._extend()
            if self._cycle is not None and k >= self._cycle[0]:
                start, period = self._cycle
                return start + (k - start) % period
            return k

    @property
    def periodicity(self) -> Optional[tuple[int, int]]:
        """``(start, period)`` once a repetition has been seen."""
        return self._cycle

    def ensure_periodic(self, cap: int = 256) -> tuple[int, int]:
        k = 0
        while self._cycle is None:
            if k > cap:
                raise RuntimeError("no periodicity within cap")
            self._slot(k)
            k += 1
        return self._cycle


class FreeResolution(_Periodic):
    """``... -> P(1) -> P(0) -> A`` through the syzygies ``omega(k)``.

    ``eps(k) : P(k) -> omega(k)`` is the free cover on the generators of
    ``omega(k)`` and ``iota(k) : omega(k+1) -> P(k)`` the kernel inclusion.
    """

    def __init__(self, A: Module):
        super().__init__()
        self.module = A
        self.ring = A.ring
        self._omega = [A]
        self._P: list[Module] = []
        self._eps: list[ModuleMap] = []
        self._iota: list[ModuleMap] = []

    def _extend(self) -> None:
        j = self._built
        M = self._omega[j]
        P = self.ring.free(M.ngens)
        eps = ModuleMap(P, M, eye(M.ngens))
        K, inc = kernel(eps)
        for i, old in enumerate(self._omega):
            if old.key == K.key:
                K = old
                self._cycle = (i, j + 1 - i)
                break
        else:
            self._omega.append(K)
        self._P.append(P)
        self._eps.append(eps)
        self._iota.append(ModuleMap(K, P, inc.matrix))
        self._built += 1

    def omega(self, k: int) -> Module:
        if k == 0:
            return self.module
        return self._iota[self._slot(k - 1)].source

    def P(self, k: int) -> Module:
        return self._P[self._slot(k)]

    def eps(self, k: int) -> ModuleMap:
        return self._eps[self._slot(k)]

    def iota(self, k: int) -> ModuleMap:
        return self._iota[self._slot(k)]

    def differential(self, k: int) -> ModuleMap:
        """``P(k) -> P(k-1)`` for k >= 1."""
        return compose(self.iota(k - 1), self.eps(k))

    def slot(self, k: int) -> int:
        """Canonical index of level k (levels with the same slot are identical)."""
        return self._slot(k)

    def omega_slot(self, k: int) -> int:
        return 0 if k == 0 else self._slot(k - 1) + 1

    def certify(self, upto: int) -> bool:
        """Exactness ``P(k+1) -> P(k) -> P(k-1)`` and surjectivity onto A."""
        if not self.eps(0).is_surjective:
            return False
        for k in range(upto):
            if not self.iota(k).is_injective:
                return False
            if not is_exact(self.iota(k), self.eps(k)):
                return False
        return True


def syzygy(A: Module, k: int) -> Module:
    return FreeResolution(A).omega(k)


class InjectiveResolution(_Periodic):
    """``B -> I(0) -> I(1) -> ...`` through the cosyzygies ``sigma(k)``.

    ``eta(k) : sigma(k) -> I(k)`` is the envelope embedding and
    ``pi(k) : I(k) -> sigma(k+1)`` the cokernel projection.  Over Z the
    divisible modules are realized at ``trunc``; since quotients of
    divisible groups are divisible, ``I(1) = sigma(1)`` with ``eta(1)`` the
    identity and everything from level 2 on is zero.
    """

    def __init__(self, B: Module, trunc: Optional[Truncation] = None):
        super().__init__()
        self.module = B
        self.ring = B.ring
        if self.ring.is_integers and trunc is None:
            trunc = Truncation.for_modules(B)
        self.truncation = trunc
        self._sigma = [B]
        self._I: list[Module] = []
        self._eta: list[ModuleMap] = []
        self._pi: list[ModuleMap] = []
        self._mixed = []

    def _envelope(self, j: int, S: Module):
        if self.ring.is_integers and j >= 1:
            return S, identity(S), None
        env = injective_envelope(S, self.truncation)
        return env.module, env.embedding, env.mixed

    def _extend(self) -> None:
        j = self._built
        S = self._sigma[j]
        I, eta, mixed = self._envelope(j, S)
        C, q = cokernel(eta)
        for i, old in enumerate(self._sigma):
            if old.key == C.key and (not self.ring.is_integers or i >= 1):
                C = old
                self._cycle = (i, j + 1 - i)
                break
        else:
            self._sigma.append(C)
        self._I.append(I)
        self._eta.append(eta)
        self._pi.append(ModuleMap(I, C, q.matrix))
        self._mixed.append(mixed)
        self._built += 1

    def sigma(self, k: int) -> Module:
        if k == 0:
            return self.module
        return self._pi[self._slot(k - 1)].target

    def I(self, k: int) -> Module:
        return self._I[self._slot(k)]

    def eta(self, k: int) -> ModuleMap:
        return self._eta[self._slot(k)]

    def pi(self, k: int) -> ModuleMap:
        return self._pi[self._slot(k)]

    def differential(self, k: int) -> ModuleMap:
        """``I(k) -> I(k+1)``."""
        return compose(self.eta(k + 1), self.pi(k))

    def describe_injective(self, k: int) -> str:
        m = self._mixed[self._slot(k)]
        if m is None:
            return "Sigma^1 (divisible)"
        return m.describe()

    def slot(self, k: int) -> int:
        return self._slot(k)

    def sigma_slot(self, k: int) -> int:
        return 0 if k == 0 else self._slot(k - 1) + 1

    def certify(self, upto: int) -> bool:
        for k in range(upto):
            if not self.eta(k).is_injective or not self.pi(k).is_surjective:
                return False
            if not is_exact(self.eta(k), self.pi(k)):
                return False
        return True


# --------------------------------------------------------------------------
# maps between resolutions

def extend_into_injective(f: ModuleMap, inclusion: ModuleMap, target_lattice_module: Optional[Module] = None) -> ModuleMap:
    """Some ``g : inclusion.target -> f.target`` with ``g o inclusion = f``.

    Exists whenever ``f.target`` is injective and ``inclusion`` is monic.
    Solved as one integer linear system in the entries of g.
    """
    X = inclusion.target
    E = f.target
    e, s = E.ngens, X.ngens
    L = E.lattice
    constraints = []  # (column c in X-coordinates, required image column)
    for j in range(inclusion.source.ngens):
        constraints.append((inclusion.matrix[:, j], f.matrix[:, j]))
    zero = zeros(e, 1)
    for j in range(X.lattice.shape[1]):
        constraints.append((X.lattice[:, j], zero[:, 0]))
    nvar = e * s
    nslack = L.shape[1]
    ncon = len(constraints)
    if ncon == 0 or e == 0:
        return ModuleMap(X, E, zeros(e, s))
    M = zeros(e * ncon, nvar + nslack * ncon)
    rhs = zeros(e * ncon, 1)
    for c, (col, target) in enumerate(constraints):
        for r in range(e):
            row = c * e + r
            for t in range(s):
                M[row, r * s + t] = col[t]
            for u in range(nslack):
                M[row, nvar + c * nslack + u] = -L[r, u]
            rhs[row, 0] = target[r]
    x = solve(M, rhs)
    if x is None:
        raise ExtensionFailure("no extension exists (target not injective or source map not monic)")
    G = zeros(e, s)
    for r in range(e):
        for t in range(s):
            G[r, t] = x[r * s + t, 0]
    return make_map(X, E, G)


def lift_map(f: ModuleMap, resA: FreeResolution, resA2: FreeResolution, length: int) -> list[ModuleMap]:
    """Chain map ``P(k) -> P2(k)`` over f for k < length."""
    if f.source is not resA.module or f.target is not resA2.module:
        raise ValueError("resolutions do not match the map")
    out = []
    g = f
    for k in range(length):
        P, P2 = resA.P(k), resA2.P(k)
        target = compose(g, resA.eps(k))
        cols = [resA2.eps(k).lift(target.matrix[:, [j]]) for j in range(P.ngens)]
        F = hcat(*cols, rows=P2.ngens) if cols else zeros(P2.ngens, 0)
        fk = make_map(P, P2, F)
        out.append(fk)
        g = corestrict(compose(fk, resA.iota(k)), resA2.iota(k))
    return out


def extend_map(g: ModuleMap, resB: InjectiveResolution, resB2: InjectiveResolution, length: int) -> list[ModuleMap]:
    """Chain map ``I(k) -> I2(k)`` extending g, for k < length."""
    out = []
    h = g
    for k in range(length):
        fk = extend_into_injective(compose(resB2.eta(k), h), resB.eta(k))
        out.append(fk)
        h = induced_on_quotients(fk, resB.pi(k), resB2.pi(k))
    return out


# --------------------------------------------------------------------------
# horseshoe

@dataclass(frozen=True, eq=False)
class _HorseshoeLevel:
    alpha: ModuleMap  # sigma'(k) -> sigma(k)
    beta: ModuleMap  # sigma(k) -> sigma''(k)
    I: Module
    inj: ModuleMap  # I'(k) -> I(k)
    proj: ModuleMap  # I(k) -> I''(k)
    eta: ModuleMap
    pi: ModuleMap


class HorseshoeResolution(InjectiveResolution):
    """Middle column of a horseshoe: ``I(k) = I'(k) + I''(k)`` at every level."""

    def __init__(self, data: "HorseshoeData"):
        _Periodic.__init__(self)
        self._data = data
        self.module = data.alpha0.target
        self.ring = self.module.ring
        self.truncation = data.left.truncation
        self._sigma = [self.module]
        self._I, self._eta, self._pi, self._mixed = [], [], [], []
        self._levels: list[_HorseshoeLevel] = []

    def _extend(self) -> None:
        j = self._built
        d = self._data
        left, right = d.left, d.right
        S = self._sigma[j]
        if j == 0:
            self._levels_ab = [(d.alpha0, d.beta0)]
            self._keys = [None]
        alpha, beta = self._levels_ab[j]
        I, i1, i2, p1, p2 = direct_sum(left.I(j), right.I(j))
        lam = extend_into_injective(left.eta(j), alpha)
        eta = make_map(S, I, vcat(lam.matrix, compose(right.eta(j), beta).matrix, cols=S.ngens))
        C, q = cokernel(eta)
        pi = ModuleMap(I, C, q.matrix)
        a_next = induced_on_quotients(i1, left.pi(j), pi)
        b_next = induced_on_quotients(p2, pi, right.pi(j))
        key = (left.slot(j + 1), right.slot(j + 1), C.key, mat_key(a_next.matrix), mat_key(b_next.matrix))
        for i in range(1, j + 1):
            if self._keys[i] == key:
                C = self._sigma[i]
                pi = ModuleMap(I, C, q.matrix)
                self._cycle = (i, j + 1 - i)
                break
        else:
            self._sigma.append(C)
            self._keys.append(key)
            self._levels_ab.append((ModuleMap(left.sigma(j + 1), C, a_next.matrix),
                                    ModuleMap(C, right.sigma(j + 1), b_next.matrix)))
        self._levels.append(_HorseshoeLevel(alpha, beta, I, i1, p2, eta, pi))
        self._I.append(I)
        self._eta.append(eta)
        self._pi.append(pi)
        self._mixed.append(None)
        self._built += 1

    def sigma(self, k: int) -> Module:
        if k == 0:
            return self.module
        return self._pi[self._slot(k - 1)].target

    def alpha(self, k: int) -> ModuleMap:
        return self._levels[self._slot(k)].alpha

    def beta(self, k: int) -> ModuleMap:
        return self._levels[self._slot(k)].beta

    def inj(self, k: int) -> ModuleMap:
        return self._levels[self._slot(k)].inj

    def proj(self, k: int) -> ModuleMap:
        return self._levels[self._slot(k)].proj


@dataclass(eq=False)
class HorseshoeData:
    """Resolutions of B', B, B'' compatible with ``0 -> B' -> B -> B'' -> 0``."""

    left: InjectiveResolution
    right: InjectiveResolution
    alpha0: ModuleMap
    beta0: ModuleMap
    middle: Optional[HorseshoeResolution] = None

    def alpha(self, k: int) -> ModuleMap:
        return self.middle.alpha(k)

    def beta(self, k: int) -> ModuleMap:
        return self.middle.beta(k)

    def certify(self, upto: int) -> bool:
        """Levelwise exactness of sigma and I rows and commutativity of every square."""
        m = self.middle
        for k in range(upto):
            a, b = self.alpha(k), self.beta(k)
            if not (a.is_injective and b.is_surjective and is_exact(a, b)):
                return False
            if not compose(m.eta(k), a).equals(compose(m.inj(k), self.left.eta(k))):
                return False
            if not compose(self.right.eta(k), b).equals(compose(m.proj(k), m.eta(k))):
                return False
            if not is_exact(m.inj(k), m.proj(k)):
                return False
        return m.certify(upto)


def certify_ses(alpha: ModuleMap, beta: ModuleMap) -> None:
    if alpha.target is not beta.source:
        raise NotExact("maps are not composable")
    if not alpha.is_injective:
        raise NotExact("first map is not injective")
    if not beta.is_surjective:
        raise NotExact("second map is not surjective")
    if not is_exact(alpha, beta):
        raise NotExact("sequence is not exact in the middle")


def horseshoe_injective(alpha: ModuleMap, beta: ModuleMap, trunc: Optional[Truncation] = None,
                        left: Optional[InjectiveResolution] = None,
                        right: Optional[InjectiveResolution] = None) -> HorseshoeData:
    """Horseshoe resolution of the middle term of a certified short exact sequence."""
    certify_ses(alpha, beta)
    left = left if left is not None else InjectiveResolution(alpha.source, trunc)
    right = right if right is not None else InjectiveResolution(beta.target, trunc)
    data = HorseshoeData(left, right, alpha, beta)
    data.middle = HorseshoeResolution(data)
    return data
