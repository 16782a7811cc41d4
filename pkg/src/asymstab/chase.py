"""Element-level snake lemma and the two cube lemmas.

A ladder is two three-term rows ``X1 -> X2 -> X3`` over ``Y1 -> Y2 -> Y3``
joined by three vertical maps.  The connecting map takes ``x`` in the
kernel of the right vertical, lifts it to X2, pushes it down to Y2, pulls
it back to Y1 and finally sends it wherever the caller wants (by default
the cokernel of the left vertical).  This staircase is the only sign
convention used anywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .linalg import hcat, vcat, zeros
from .modules import (
    Module,
    ModuleError,
    ModuleMap,
    NotWellDefined,
    cokernel,
    compose,
    direct_sum,
    is_exact,
    kernel,
    make_map,
    tensor,
    tensor_map,
)


class ChaseFailure(ModuleError):
    pass


class PreconditionFailure(ModuleError):
    pass


@dataclass(frozen=True, eq=False)
class SnakeInput:
    top: tuple[ModuleMap, ModuleMap]
    bottom: tuple[ModuleMap, ModuleMap]
    verticals: tuple[ModuleMap, ModuleMap, ModuleMap]

    def certify(self, need_top_epi: bool = True, need_bottom_mono: bool = True) -> None:
        a, b = self.top
        c, d = self.bottom
        f1, f2, f3 = self.verticals
        if not compose(f2, a).equals(compose(c, f1)):
            raise PreconditionFailure("left square does not commute")
        if not compose(f3, b).equals(compose(d, f2)):
            raise PreconditionFailure("right square does not commute")
        if not is_exact(a, b):
            raise PreconditionFailure("top row not exact")
        if not is_exact(c, d):
            raise PreconditionFailure("bottom row not exact")
        if need_top_epi and not b.is_surjective:
            raise PreconditionFailure("top right map not epic")
        if need_bottom_mono and not c.is_injective:
            raise PreconditionFailure("bottom left map not monic")


def connecting_hom(s: SnakeInput, source: Optional[ModuleMap] = None, push: Optional[ModuleMap] = None,
                   corestrict_to: Optional[ModuleMap] = None, certify: bool = False) -> ModuleMap:
    """The staircase map ``ker(f3) -> coker(f1)``.

    ``source`` replaces the kernel inclusion by any map into X3 whose image
    lies in ``ker f3``; ``push`` replaces the cokernel projection by any map
    out of Y1 killing ``im f1``; ``corestrict_to`` is a monomorphism the
    result is factored through.
    """
    if certify:
        s.certify()
    a, b = s.top
    c, d = s.bottom
    f1, f2, f3 = s.verticals
    if source is None:
        _, source = kernel(f3)
    if push is None:
        _, push = cokernel(f1)
    out_mod = corestrict_to.source if corestrict_to is not None else push.target
    cols = []
    for j in range(source.source.ngens):
        x3 = source.matrix[:, [j]]
        x2 = b.preimage(x3)
        if x2 is None:
            raise ChaseFailure(f"generator {j}: no lift through the top right map")
        y2 = f2.matrix @ x2
        y1 = c.preimage(y2)
        if y1 is None:
            raise ChaseFailure(f"generator {j}: image does not come from the bottom left term")
        z = push.matrix @ y1
        if corestrict_to is not None:
            w = corestrict_to.preimage(z)
            if w is None:
                raise ChaseFailure(f"generator {j}: value escapes the requested submodule")
            z = w
        cols.append(z)
    M = hcat(*cols, rows=out_mod.ngens) if cols else zeros(out_mod.ngens, 0)
    try:
        return make_map(source.source, out_mod, M)
    except NotWellDefined as e:
        raise ChaseFailure(f"chase is not well defined: {e}") from e


# --------------------------------------------------------------------------
# cubes
#
# Nodes are indexed (h, v, d) in {0,1,2}^3.  ``maps[axis][(h, v, d)]`` is the
# arrow leaving that node along the axis (only for coordinate 0 or 1).

AXES = ("h", "v", "d")


@dataclass(eq=False)
class Cube:
    nodes: dict
    maps: dict
    label: str = ""

    def node(self, h, v, d) -> Module:
        return self.nodes[(h, v, d)]

    def arrow(self, axis: str, h, v, d) -> ModuleMap:
        return self.maps[axis][(h, v, d)]

    def line(self, axis: str, fixed: dict) -> tuple[ModuleMap, ModuleMap]:
        """The two arrows of the three-term line along ``axis``."""
        out = []
        for t in (0, 1):
            pos = dict(fixed)
            pos[axis] = t
            out.append(self.arrow(axis, pos["h"], pos["v"], pos["d"]))
        return out[0], out[1]

    def face(self, x_axis: str, y_axis: str, fixed_axis: str, value: int) -> "Face":
        grid = [[None] * 3 for _ in range(3)]
        hx = [[None] * 2 for _ in range(3)]
        vy = [[None] * 3 for _ in range(2)]
        for y in range(3):
            for x in range(3):
                pos = {x_axis: x, y_axis: y, fixed_axis: value}
                grid[y][x] = self.node(pos["h"], pos["v"], pos["d"])
                if x < 2:
                    hx[y][x] = self.arrow(x_axis, pos["h"], pos["v"], pos["d"])
                if y < 2:
                    vy[y][x] = self.arrow(y_axis, pos["h"], pos["v"], pos["d"])
        return Face(grid, hx, vy)

    def certify_commutes(self) -> None:
        for a1 in AXES:
            for a2 in AXES:
                if a1 >= a2:
                    continue
                for pos in _positions():
                    if pos[a1] == 2 or pos[a2] == 2:
                        continue
                    p = dict(pos)
                    m1 = self.arrow(a1, p["h"], p["v"], p["d"])
                    q = dict(p); q[a1] += 1
                    m2 = self.arrow(a2, q["h"], q["v"], q["d"])
                    n1 = self.arrow(a2, p["h"], p["v"], p["d"])
                    r = dict(p); r[a2] += 1
                    n2 = self.arrow(a1, r["h"], r["v"], r["d"])
                    if not compose(m2, m1).equals(compose(n2, n1)):
                        raise PreconditionFailure(f"square {a1}{a2} at {pos} does not commute")

    def certify_lines(self) -> None:
        """Condition 1 (exact lines) and condition 2 (second arrows epic)."""
        for axis in AXES:
            others = [a for a in AXES if a != axis]
            for i in range(3):
                for j in range(3):
                    f, g = self.line(axis, {others[0]: i, others[1]: j})
                    if not is_exact(f, g):
                        raise PreconditionFailure(f"line along {axis} at {others[0]}={i},{others[1]}={j} not exact")
                    if not g.is_surjective:
                        raise PreconditionFailure(f"line along {axis} at {others[0]}={i},{others[1]}={j}: second arrow not epic")

    def certify_short_exact(self, axis: str, fixed: dict) -> None:
        f, g = self.line(axis, fixed)
        if not f.is_injective:
            raise PreconditionFailure(f"line along {axis} at {fixed}: first arrow not monic")


def _positions():
    for h in range(3):
        for v in range(3):
            for d in range(3):
                yield {"h": h, "v": v, "d": d}


@dataclass(eq=False)
class Face:
    """Grid ``grid[y][x]``; ``hx[y][x]`` goes right, ``vy[y][x]`` goes down."""

    grid: list
    hx: list
    vy: list

    def snake(self) -> SnakeInput:
        return SnakeInput((self.hx[0][0], self.hx[0][1]), (self.hx[1][0], self.hx[1][1]),
                          (self.vy[0][0], self.vy[0][1], self.vy[0][2]))

    @property
    def right_vertical(self) -> ModuleMap:
        return self.vy[0][2]

    @property
    def lower_left(self) -> ModuleMap:
        return self.vy[1][0]

    def connecting(self, source: Optional[ModuleMap] = None, corestrict_to: Optional[ModuleMap] = None) -> ModuleMap:
        """Connecting map into the bottom-left corner ``grid[2][0]``."""
        return connecting_hom(self.snake(), source=source, push=self.lower_left, corestrict_to=corestrict_to)


@dataclass
class CubeReport:
    lemma: str
    passed: bool
    checked: int
    witnesses: list = field(default_factory=list)

    def __str__(self) -> str:
        status = "OK" if self.passed else "FAILED"
        return f"{self.lemma}: {status} on {self.checked} generators"


def _witnesses(f: ModuleMap, g: ModuleMap) -> list:
    out = []
    for j in range(f.source.ngens):
        diff = (f.matrix[:, [j]] - g.matrix[:, [j]])
        if not f.target.contains(diff):
            out.append({"generator": j, "lhs": [int(v) for v in f.matrix[:, j]], "rhs": [int(v) for v in g.matrix[:, j]]})
    return out


def _front(c):
    return c.face("h", "v", "d", 2)


def _bottom(c):
    return c.face("d", "h", "v", 2)


def _right(c):
    return c.face("d", "v", "h", 2)


def _top(c):
    return c.face("d", "h", "v", 0)


def _back(c):
    return c.face("h", "v", "d", 0)


def _left(c):
    return c.face("d", "v", "h", 0)


def certify_down_horizontal(c: Cube) -> None:
    c.certify_commutes()
    c.certify_lines()
    c.certify_short_exact("h", {"v": 1, "d": 2})
    c.certify_short_exact("d", {"h": 1, "v": 2})
    c.certify_short_exact("d", {"h": 2, "v": 1})


def certify_horizontal_down(c: Cube) -> None:
    c.certify_commutes()
    c.certify_lines()
    c.certify_short_exact("d", {"h": 1, "v": 0})
    c.certify_short_exact("h", {"v": 1, "d": 0})
    c.certify_short_exact("d", {"h": 0, "v": 1})
    c.certify_short_exact("h", {"v": 1, "d": 1})
    c.certify_short_exact("d", {"h": 1, "v": 1})


def down_horizontal_maps(c: Cube):
    """``(front, bottom, right)`` connecting maps; front is corestricted into ker of the bottom's map."""
    front, bottom, right = _front(c), _bottom(c), _right(c)
    _, ker_alpha = kernel(front.right_vertical)
    _, ker_beta = kernel(bottom.right_vertical)
    f = front.connecting(source=ker_alpha, corestrict_to=ker_beta)
    g = bottom.connecting(source=ker_beta)
    r = right.connecting(source=ker_alpha)
    return f, g, r


def verify_cube_down_horizontal(c: Cube, certify: bool = True) -> CubeReport:
    """bottom o front == -right on ker(alpha)."""
    if certify:
        certify_down_horizontal(c)
    try:
        f, g, r = down_horizontal_maps(c)
    except ChaseFailure as e:
        return CubeReport("down-horizontal", False, 0, [{"chase": str(e)}])
    lhs = compose(g, f)
    w = _witnesses(lhs, -r)
    return CubeReport("down-horizontal", not w, f.source.ngens, w)


def horizontal_down_maps(c: Cube):
    top, back, left = _top(c), _back(c), _left(c)
    alpha = top.right_vertical
    gamma = left.right_vertical
    if alpha.source is not gamma.source:
        raise PreconditionFailure("top and left faces do not share their corner")
    S, i1, i2, _, _ = direct_sum(alpha.target, gamma.target)
    both = ModuleMap(alpha.source, S, vcat(alpha.matrix, gamma.matrix, cols=alpha.source.ngens))
    _, inter = kernel(both)
    _, ker_beta = kernel(back.right_vertical)
    t = top.connecting(source=inter, corestrict_to=ker_beta)
    b = back.connecting(source=ker_beta)
    l = left.connecting(source=inter)
    return t, b, l


def verify_cube_horizontal_down(c: Cube, certify: bool = True) -> CubeReport:
    """back o top == left on ker(alpha) & ker(gamma)."""
    if certify:
        certify_horizontal_down(c)
    try:
        t, b, l = horizontal_down_maps(c)
    except ChaseFailure as e:
        return CubeReport("horizontal-down", False, 0, [{"chase": str(e)}])
    w = _witnesses(compose(b, t), l)
    return CubeReport("horizontal-down", not w, t.source.ngens, w)


def tensor_cube(ses: tuple[ModuleMap, ModuleMap], grid_h: list, grid_d: list, label: str = "") -> Cube:
    """Cube ``S_v (x) D[d][h]`` from a three-term sequence and a 3x3 diagram.

    ``grid_h[d][h]`` is the arrow ``D[d][h] -> D[d][h+1]`` and
    ``grid_d[d][h]`` the arrow ``D[d][h] -> D[d+1][h]``.
    """
    s1, s2 = ses
    S = [s1.source, s1.target, s2.target]
    smaps = [s1, s2]
    D = [[grid_h[d][0].source, grid_h[d][1].source, grid_h[d][1].target] for d in range(3)]
    nodes = {}
    for h in range(3):
        for v in range(3):
            for d in range(3):
                nodes[(h, v, d)] = tensor(S[v], D[d][h])
    from .modules import identity

    maps = {"h": {}, "v": {}, "d": {}}
    for h in range(3):
        for v in range(3):
            for d in range(3):
                src = nodes[(h, v, d)]
                if h < 2:
                    maps["h"][(h, v, d)] = tensor_map(identity(S[v]), grid_h[d][h], src, nodes[(h + 1, v, d)])
                if v < 2:
                    maps["v"][(h, v, d)] = tensor_map(smaps[v], identity(D[d][h]), src, nodes[(h, v + 1, d)])
                if d < 2:
                    maps["d"][(h, v, d)] = tensor_map(identity(S[v]), grid_d[d][h], src, nodes[(h, v, d + 1)])
    return Cube(nodes, maps, label)
