"""Finitely presented modules over Z and Z/m.

A module is ``Z^g / L`` where ``L`` is spanned by the columns of its
relation matrix, plus ``m * Z^g`` over ``Z/m``.  Both rings are
commutative, so every module is handled as an abelian group carrying a
ring tag; tensor products over ``Z/m`` and over ``Z`` agree for
``Z/m``-modules.

Elements are integer coordinate columns.  Equality of elements is
decided by membership of the difference in the relation lattice.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from .linalg import (
    IntMatrix,
    SmithDecomposition,
    as_int_matrix,
    eye,
    hcat,
    kron,
    lattice_kernel,
    mat_key,
    matrix,
    smith_normal_form,
    solve_with,
    zeros,
)


class ModuleError(Exception):
    pass


class BadRing(ModuleError):
    pass


class NotWellDefined(ModuleError):
    pass


class InfiniteModule(ModuleError):
    pass


class NotInImage(ModuleError):
    pass


@dataclass(frozen=True)
class Ring:
    """``modulus == 0`` is Z, otherwise Z/modulus."""

    modulus: int = 0

    def __post_init__(self):
        if self.modulus < 0 or self.modulus == 1:
            raise BadRing(f"Z/{self.modulus} is not allowed (need m >= 2)")

    @classmethod
    def integers(cls) -> "Ring":
        return cls(0)

    @classmethod
    def mod(cls, m: int) -> "Ring":
        return cls(m)

    @property
    def is_integers(self) -> bool:
        return self.modulus == 0

    @property
    def prime_powers(self) -> dict[int, int]:
        """Prime factorisation of the modulus (empty over Z)."""
        return factorize(self.modulus) if self.modulus else {}

    def free(self, rank: int) -> "Module":
        return Module(self, rank, zeros(rank, 0))

    def zero_module(self) -> "Module":
        return Module(self, 0, zeros(0, 0))

    def __str__(self) -> str:
        return "Z" if self.modulus == 0 else f"Z/{self.modulus}"


ZZ = Ring(0)


def factorize(n: int) -> dict[int, int]:
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def describe_factors(free_rank: int, torsion: Sequence[int]) -> str:
    parts = []
    if free_rank == 1:
        parts.append("Z")
    elif free_rank > 1:
        parts.append(f"Z^{free_rank}")
    parts.extend(f"Z/{d}" for d in torsion)
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True, eq=False)
class Module:
    ring: Ring
    ngens: int
    relations: IntMatrix

    def __post_init__(self):
        rel = self.relations
        if rel.ndim != 2:
            rel = zeros(self.ngens, 0)
        elif rel.size:
            rel = as_int_matrix(rel)
        if rel.shape[0] != self.ngens:
            raise ValueError(f"relation matrix has {rel.shape[0]} rows, expected {self.ngens}")
        object.__setattr__(self, "relations", rel)

    @cached_property
    def lattice(self) -> IntMatrix:
        if self.ring.modulus:
            return hcat(self.relations, self.ring.modulus * eye(self.ngens), rows=self.ngens)
        return self.relations

    @cached_property
    def _dec(self) -> SmithDecomposition:
        return smith_normal_form(self.lattice)

    @cached_property
    def key(self) -> tuple:
        """Presentation identity (used for periodicity detection)."""
        return (self.ring.modulus, self.ngens, mat_key(self.relations))

    @cached_property
    def invariant_factors(self) -> tuple[int, tuple[int, ...]]:
        """``(free_rank, torsion)`` with torsion a divisibility chain of factors > 1."""
        d = self._dec.diagonal
        torsion = tuple(x for x in d if x > 1)
        free_rank = self.ngens - self._dec.rank
        return free_rank, torsion

    @property
    def free_rank(self) -> int:
        return self.invariant_factors[0]

    @property
    def torsion(self) -> tuple[int, ...]:
        return self.invariant_factors[1]

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def is_zero(self) -> bool:
        return self.invariant_factors == (0, ())

    def order(self) -> Optional[int]:
        if not self.is_finite:
            return None
        return math.prod(self.torsion)

    def exponent(self) -> int:
        """Exponent of the torsion subgroup (1 when torsion-free)."""
        return self.torsion[-1] if self.torsion else 1

    def describe(self) -> str:
        return describe_factors(*self.invariant_factors)

    def __repr__(self) -> str:
        return f"Module({self.ring}, {self.describe()}, gens={self.ngens})"

    # elements -------------------------------------------------------------
    def contains(self, v) -> bool:
        """Whether the coordinate column ``v`` lies in the relation lattice (is zero)."""
        v = as_int_matrix(v)
        return solve_with(self._dec, v) is not None

    def is_zero_element(self, v) -> bool:
        return self.contains(v)

    def equal(self, u, v) -> bool:
        return self.contains(as_int_matrix(u) - as_int_matrix(v))

    def element(self, coords: Sequence[int]) -> "Element":
        return Element(self, as_int_matrix(np.array(list(coords), dtype=object).reshape(-1, 1)) if self.ngens else zeros(0, 1))

    def gen(self, i: int) -> IntMatrix:
        v = zeros(self.ngens, 1)
        v[i, 0] = 1
        return v

    def zero_vector(self) -> IntMatrix:
        return zeros(self.ngens, 1)

    def reduce(self, v) -> IntMatrix:
        """Deterministic representative of ``v`` (for reporting only)."""
        v = as_int_matrix(v)
        dec = self._dec
        y = dec.U @ v if self.ngens else zeros(0, 1)
        d = dec.diagonal
        for i in range(self.ngens):
            di = d[i] if i < len(d) else 0
            if di:
                y[i, 0] %= di
        return dec.U_inv @ y if self.ngens else zeros(0, 1)

    def same_presentation(self, other: "Module") -> bool:
        return self.key == other.key


@dataclass(frozen=True, eq=False)
class Element:
    module: Module
    coords: IntMatrix

    def __eq__(self, other) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self.module is other.module and self.module.equal(self.coords, other.coords)

    def __hash__(self):
        return hash((id(self.module), tuple(self.module.reduce(self.coords).flat)))

    def __add__(self, other: "Element") -> "Element":
        return Element(self.module, self.coords + other.coords)

    def __sub__(self, other: "Element") -> "Element":
        return Element(self.module, self.coords - other.coords)

    def __neg__(self) -> "Element":
        return Element(self.module, -self.coords)

    def __rmul__(self, k: int) -> "Element":
        return Element(self.module, k * self.coords)

    @property
    def is_zero(self) -> bool:
        return self.module.contains(self.coords)

    def __repr__(self) -> str:
        return f"Element({list(self.module.reduce(self.coords).flat)} in {self.module.describe()})"


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """Homomorphism given by the target coordinates of each source generator (columns)."""

    source: Module
    target: Module
    matrix: IntMatrix

    @cached_property
    def _preimage_dec(self) -> SmithDecomposition:
        return smith_normal_form(hcat(self.matrix, self.target.lattice, rows=self.target.ngens))

    def __call__(self, v) -> IntMatrix:
        if isinstance(v, Element):
            return self.matrix @ v.coords
        return self.matrix @ as_int_matrix(v)

    def apply(self, x: Element) -> Element:
        return Element(self.target, self.matrix @ x.coords)

    def preimage(self, y) -> Optional[IntMatrix]:
        """Some source vector mapping to ``y``, or None."""
        y = as_int_matrix(y)
        sol = solve_with(self._preimage_dec, y)
        if sol is None:
            return None
        return sol[: self.source.ngens, :]

    def lift(self, y) -> IntMatrix:
        x = self.preimage(y)
        if x is None:
            raise NotInImage("element is not in the image")
        return x

    def then(self, other: "ModuleMap") -> "ModuleMap":
        """``other o self``."""
        return compose(other, self)

    def __matmul__(self, other: "ModuleMap") -> "ModuleMap":
        return compose(self, other)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        _same_ends(self, other)
        return ModuleMap(self.source, self.target, self.matrix + other.matrix)

    def __sub__(self, other: "ModuleMap") -> "ModuleMap":
        _same_ends(self, other)
        return ModuleMap(self.source, self.target, self.matrix - other.matrix)

    def __neg__(self) -> "ModuleMap":
        return ModuleMap(self.source, self.target, -self.matrix)

    def scaled(self, k: int) -> "ModuleMap":
        return ModuleMap(self.source, self.target, k * self.matrix)

    @property
    def is_zero(self) -> bool:
        return all(self.target.contains(self.matrix[:, [j]]) for j in range(self.source.ngens))

    def equals(self, other: "ModuleMap") -> bool:
        _same_ends(self, other)
        return (self - other).is_zero

    @cached_property
    def is_injective(self) -> bool:
        return kernel(self)[0].is_zero

    @cached_property
    def is_surjective(self) -> bool:
        return cokernel(self)[0].is_zero

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective

    def rank_data(self) -> dict:
        return {
            "kernel": kernel(self)[0].describe(),
            "image": image(self)[0].describe(),
            "cokernel": cokernel(self)[0].describe(),
        }

    def __repr__(self) -> str:
        return f"ModuleMap({self.source.describe()} -> {self.target.describe()})"


def _same_ends(f: ModuleMap, g: ModuleMap) -> None:
    if f.source is not g.source or f.target is not g.target:
        raise ValueError("maps have different source or target")


def make_module(ring: Ring, relations, ngens: Optional[int] = None) -> Module:
    rel = as_int_matrix(relations) if np.size(relations) else zeros(ngens or 0, 0)
    if ngens is None:
        ngens = rel.shape[0]
    if rel.shape[0] != ngens:
        raise ValueError(f"relation matrix has {rel.shape[0]} rows but {ngens} generators")
    return Module(ring, ngens, rel)


def make_map(source: Module, target: Module, mat) -> ModuleMap:
    """Certified homomorphism; raises NotWellDefined if a relation escapes."""
    if source.ring != target.ring:
        raise ValueError("modules over different rings")
    F = as_int_matrix(mat) if np.size(mat) else zeros(target.ngens, source.ngens)
    if F.shape != (target.ngens, source.ngens):
        raise ValueError(f"map matrix is {F.shape}, expected {(target.ngens, source.ngens)}")
    images = F @ source.relations if source.relations.shape[1] else zeros(target.ngens, 0)
    for j in range(images.shape[1]):
        if not target.contains(images[:, [j]]):
            raise NotWellDefined(f"relation {j} of the source maps to a nonzero element")
    return ModuleMap(source, target, F)


def identity(M: Module) -> ModuleMap:
    return ModuleMap(M, M, eye(M.ngens))


def zero_map(A: Module, B: Module) -> ModuleMap:
    return ModuleMap(A, B, zeros(B.ngens, A.ngens))


def compose(g: ModuleMap, f: ModuleMap) -> ModuleMap:
    """``g o f``."""
    if f.target is not g.source:
        if not f.target.same_presentation(g.source):
            raise ValueError("maps are not composable")
    return ModuleMap(f.source, g.target, g.matrix @ f.matrix)


# presentation pruning ------------------------------------------------------

def _prune(ring: Ring, ngens: int, lattice: IntMatrix) -> tuple[Module, IntMatrix, IntMatrix]:
    """Rewrite ``Z^g / lattice`` as a sum of cyclic modules.

    Returns ``(M, to_new, from_new)``: ``to_new`` sends old coordinates to
    the new ones and ``from_new`` expresses each new generator in old
    coordinates.
    """
    if ring.modulus:
        lattice = hcat(lattice, ring.modulus * eye(ngens), rows=ngens)
    dec = smith_normal_form(lattice)
    d = dec.diagonal + [0] * (ngens - len(dec.diagonal))
    keep = [i for i in range(ngens) if d[i] != 1]
    rels = [d[i] for i in keep]
    nz = [j for j, r in enumerate(rels) if r != 0 and r != ring.modulus]
    R = zeros(len(keep), len(nz))
    for c, j in enumerate(nz):
        R[j, c] = rels[j]
    to_new = dec.U[keep, :] if keep else zeros(0, ngens)
    from_new = dec.U_inv[:, keep] if keep else zeros(ngens, 0)
    return Module(ring, len(keep), R), to_new, from_new


def kernel(f: ModuleMap) -> tuple[Module, ModuleMap]:
    A, B = f.source, f.target
    a = A.ngens
    pre = lattice_kernel(hcat(f.matrix, B.lattice, rows=B.ngens))[:a, :]
    k = pre.shape[1]
    rel = lattice_kernel(hcat(pre, A.lattice, rows=a))[:k, :]
    K, _, from_new = _prune(A.ring, k, rel)
    return K, ModuleMap(K, A, pre @ from_new)


def cokernel(f: ModuleMap) -> tuple[Module, ModuleMap]:
    B = f.target
    C, to_new, _ = _prune(B.ring, B.ngens, hcat(B.relations, f.matrix, rows=B.ngens))
    return C, ModuleMap(B, C, to_new)


def image(f: ModuleMap) -> tuple[Module, ModuleMap, ModuleMap]:
    """``(I, inclusion I -> target, corestriction source -> I)``."""
    A, B = f.source, f.target
    pre = lattice_kernel(hcat(f.matrix, B.lattice, rows=B.ngens))[: A.ngens, :]
    I, to_new, from_new = _prune(A.ring, A.ngens, pre)
    return I, ModuleMap(I, B, f.matrix @ from_new), ModuleMap(A, I, to_new)


def corestrict(f: ModuleMap, incl: ModuleMap) -> ModuleMap:
    """Factor ``f`` through the monomorphism ``incl``; raises NotInImage."""
    cols = [incl.lift(f.matrix[:, [j]]) for j in range(f.source.ngens)]
    M = hcat(*cols, rows=incl.source.ngens) if cols else zeros(incl.source.ngens, 0)
    return make_map(f.source, incl.source, M)


def induced_on_quotients(f: ModuleMap, q_src: ModuleMap, q_tgt: ModuleMap) -> ModuleMap:
    """The map ``coker -> coker`` induced by ``f`` given the two quotient maps."""
    lifts = [q_src.lift(q_src.target.gen(i)) for i in range(q_src.target.ngens)]
    S = hcat(*lifts, rows=q_src.source.ngens) if lifts else zeros(q_src.source.ngens, 0)
    return make_map(q_src.target, q_tgt.target, q_tgt.matrix @ f.matrix @ S)


def inverse(f: ModuleMap) -> ModuleMap:
    if not f.is_isomorphism:
        raise ValueError("map is not an isomorphism")
    cols = [f.lift(f.target.gen(i)) for i in range(f.target.ngens)]
    M = hcat(*cols, rows=f.source.ngens) if cols else zeros(f.source.ngens, 0)
    return make_map(f.target, f.source, M)


# constructions -------------------------------------------------------------

def direct_sum(A: Module, B: Module) -> tuple[Module, ModuleMap, ModuleMap, ModuleMap, ModuleMap]:
    """``(A+B, inj_A, inj_B, proj_A, proj_B)``."""
    if A.ring != B.ring:
        raise ValueError("modules over different rings")
    a, b = A.ngens, B.ngens
    R = zeros(a + b, A.relations.shape[1] + B.relations.shape[1])
    R[:a, : A.relations.shape[1]] = A.relations
    R[a:, A.relations.shape[1]:] = B.relations
    S = Module(A.ring, a + b, R)
    I = eye(a + b)
    return (
        S,
        ModuleMap(A, S, I[:, :a]),
        ModuleMap(B, S, I[:, a:]),
        ModuleMap(S, A, I[:a, :]),
        ModuleMap(S, B, I[a:, :]),
    )


def tensor(A: Module, B: Module) -> Module:
    """``A (x) B`` on generators ``a_i (x) b_j`` (index ``i * gB + j``)."""
    if A.ring != B.ring:
        raise ValueError("modules over different rings")
    R = hcat(kron(A.relations, eye(B.ngens)), kron(eye(A.ngens), B.relations), rows=A.ngens * B.ngens)
    return Module(A.ring, A.ngens * B.ngens, R)


def tensor_map(f: ModuleMap, g: ModuleMap, source: Optional[Module] = None, target: Optional[Module] = None) -> ModuleMap:
    source = source if source is not None else tensor(f.source, g.source)
    target = target if target is not None else tensor(f.target, g.target)
    return ModuleMap(source, target, kron(f.matrix, g.matrix))


def is_isomorphic(A: Module, B: Module) -> bool:
    return A.invariant_factors == B.invariant_factors


def enumerate_elements(M: Module) -> Iterator[Element]:
    """Each element of a finite module exactly once."""
    if not M.is_finite:
        raise InfiniteModule(f"{M.describe()} is infinite")
    dec = M._dec
    d = dec.diagonal + [0] * (M.ngens - len(dec.diagonal))
    ranges = [range(x) for x in d]
    for ys in itertools.product(*ranges):
        y = as_int_matrix(np.array(ys, dtype=object).reshape(-1, 1)) if M.ngens else zeros(0, 1)
        yield Element(M, dec.U_inv @ y if M.ngens else zeros(0, 1))


def cyclic(ring: Ring, d: int) -> Module:
    """``Z/d`` (``d = 0`` gives the free module of rank one)."""
    if d == 0:
        return ring.free(1)
    return Module(ring, 1, matrix([[d]]))


def is_exact(f: ModuleMap, g: ModuleMap) -> bool:
    """Exactness of ``. -f-> M -g-> .`` at the middle."""
    if not compose(g, f).is_zero:
        return False
    K, inc = kernel(g)
    return all(f.preimage(inc.matrix[:, [j]]) is not None for j in range(K.ngens))
