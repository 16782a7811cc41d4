"""Command-line front end.

Job files are line oriented (``;`` also separates statements)::

    ring Z/4
    module A gens 1 rel [[2]]
    map f A A [[1]]
    ses S f g
    cmd asymptotic A A n=0

Relations are listed one per inner bracket as coefficient vectors on the
generators; map matrices list the image of each source generator.  The
names ``Z`` and ``R`` denote the ring as a free module of rank one.
"""
from __future__ import annotations

import argparse
import json
import random
import re
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .injectives import Truncation
from .linalg import matrix, zeros
from .modules import Module, ModuleError, NotWellDefined, Ring, is_exact, make_map, make_module
from . import stable as S
from . import verify as V
from .vogel import check_cycle, coherent_from_stage, lift_surjectivity, project_kappa

COMMANDS = ("stabilize", "tor", "tower", "asymptotic", "intertwine", "satellite", "omega",
            "vogel-roundtrip", "verify-cubes", "verify-all")


class JobError(Exception):
    pass


class ParseError(JobError):
    def __init__(self, msg, line, column):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line, self.column = line, column


class UnknownName(JobError):
    pass


class BadMatrix(JobError):
    pass


@dataclass
class JobSpec:
    ring: Ring
    modules: dict
    maps: dict
    sequences: dict
    command: str
    args: list
    params: dict = field(default_factory=dict)

    def module(self, name: str) -> Module:
        if name in self.modules:
            return self.modules[name]
        if name in ("Z", "R"):
            return self.ring.free(1)
        raise UnknownName(f"unknown module '{name}'")


_RING = re.compile(r"^Z(?:/(-?\d+))?$")


def _parse_matrix(text: str, line: int, col: int) -> list:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed matrix: {e.msg}", line, col + e.pos) from None
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise BadMatrix(f"line {line}: expected a list of lists")
    if any(not isinstance(x, int) or isinstance(x, bool) for r in value for x in r):
        raise BadMatrix(f"line {line}: entries must be integers")
    if value and len({len(r) for r in value}) != 1:
        raise BadMatrix(f"line {line}: ragged matrix")
    return value


def _statements(text: str):
    """Yield (line number, column offset, statement) for each non-empty statement."""
    for ln, raw in enumerate(text.splitlines(), start=1):
        raw = raw.split("#", 1)[0]
        col = 0
        for part in raw.split(";"):
            stripped = part.strip()
            if stripped:
                yield ln, col + (len(part) - len(part.lstrip())) + 1, stripped
            col += len(part) + 1


def _value(v: str):
    try:
        return int(v)
    except ValueError:
        return v


def parse_jobspec(text: str) -> JobSpec:
    ring = None
    modules, maps, seqs = {}, {}, {}
    command = None
    for ln, col, st in _statements(text):
        head, _, rest = st.partition(" ")
        rest = rest.strip()
        if head == "ring":
            m = _RING.match(rest)
            if not m:
                raise ParseError(f"unknown ring '{rest}'", ln, col + 5)
            ring = Ring(0) if m.group(1) is None else Ring(int(m.group(1)))
            continue
        if ring is None:
            raise ParseError("the ring must be declared first", ln, col)
        if head == "module":
            mm = re.match(r"^(\w+)(?:\s+gens\s+(\d+))?(?:\s+rel\s+(.*))?$", rest)
            if not mm:
                raise ParseError("expected: module <name> [gens <g>] [rel [[...]]]", ln, col)
            name, gens, rel = mm.group(1), mm.group(2), mm.group(3)
            rels = _parse_matrix(rel, ln, col + st.index(rel)) if rel else []
            g = int(gens) if gens is not None else (len(rels[0]) if rels else None)
            if g is None:
                raise ParseError("module needs gens or rel", ln, col)
            if any(len(r) != g for r in rels):
                raise BadMatrix(f"line {ln}: relations must have {g} entries")
            relm = matrix([list(c) for c in zip(*rels)], shape=(g, len(rels))) if rels else zeros(g, 0)
            modules[name] = make_module(ring, relm, g)
        elif head == "map":
            mm = re.match(r"^(\w+)\s+(\w+)\s+(\w+)\s+(.*)$", rest)
            if not mm:
                raise ParseError("expected: map <name> <src> <dst> [[...]]", ln, col)
            name, src, dst, body = mm.groups()
            spec = JobSpec(ring, modules, maps, seqs, "", [])
            A, B = spec.module(src), spec.module(dst)
            imgs = _parse_matrix(body, ln, col + st.index(body))
            if len(imgs) != A.ngens or any(len(r) != B.ngens for r in imgs):
                raise BadMatrix(f"line {ln}: map needs {A.ngens} images of length {B.ngens}")
            mat = matrix([list(c) for c in zip(*imgs)], shape=(B.ngens, A.ngens)) if imgs else zeros(B.ngens, 0)
            try:
                maps[name] = make_map(A, B, mat)
            except NotWellDefined as e:
                raise BadMatrix(f"line {ln}: {e}") from None
        elif head == "ses":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError("expected: ses <name> <f> <g>", ln, col)
            for nm in parts[1:]:
                if nm not in maps:
                    raise UnknownName(f"unknown map '{nm}'")
            seqs[parts[0]] = (maps[parts[1]], maps[parts[2]])
        elif head == "cmd":
            parts = rest.split()
            if not parts or parts[0] not in COMMANDS:
                raise ParseError(f"unknown command '{parts[0] if parts else ''}'", ln, col + 4)
            args = [p for p in parts[1:] if "=" not in p]
            params = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
            command = (parts[0], args, {k: _value(v) for k, v in params.items()})
        else:
            raise ParseError(f"unknown statement '{head}'", ln, col)
    if ring is None:
        raise ParseError("no ring declared", 1, 1)
    if command is None:
        raise ParseError("no cmd statement", 1, 1)
    job = JobSpec(ring, modules, maps, seqs, command[0], command[1], command[2])
    _validate(job)
    return job


_ARITY = {"stabilize": 2, "tor": 2, "tower": 2, "asymptotic": 2, "intertwine": 2, "satellite": 2,
          "omega": 2, "vogel-roundtrip": 2, "verify-cubes": 0, "verify-all": 0}


def _validate(job: JobSpec) -> None:
    need = _ARITY[job.command]
    if len(job.args) != need:
        raise JobError(f"{job.command} takes {need} names, got {len(job.args)}")
    if job.command == "omega":
        job.module(job.args[0])
        if job.args[1] not in job.sequences:
            raise UnknownName(f"unknown sequence '{job.args[1]}'")
    else:
        for a in job.args:
            job.module(a)


# --------------------------------------------------------------------------


@dataclass
class Report:
    data: dict
    ok: bool
    seconds: float = 0.0

    def machine(self) -> str:
        return json.dumps({"ok": self.ok, **self.data}, sort_keys=True, indent=2)

    def text(self) -> str:
        lines = []

        def walk(d, indent=""):
            for k in sorted(d):
                v = d[k]
                if isinstance(v, dict):
                    lines.append(f"{indent}{k}:")
                    walk(v, indent + "  ")
                elif isinstance(v, list) and v and isinstance(v[0], dict):
                    lines.append(f"{indent}{k}:")
                    for row in v:
                        lines.append(indent + "  - " + ", ".join(f"{a}={row[a]}" for a in row))
                else:
                    lines.append(f"{indent}{k}: {v}")

        lines.append(f"result: {self.data.get('result', '')}")
        walk({k: v for k, v in self.data.items() if k != "result"})
        lines.append(f"status: {'OK' if self.ok else 'FAILED'}")
        lines.append(f"time: {self.seconds:.3f} s")
        return "\n".join(lines)


def _trunc(job: JobSpec, *mods, override=None) -> Optional[Truncation]:
    if not job.ring.is_integers:
        return None
    return Truncation.for_modules(*mods, override=override)


def _tower_data(t: S.Tower) -> dict:
    return {"degree": t.degree, "certificate": str(t.certificate), "stages": t.table(),
            "limit": t.limit.describe() if t.limit is not None else "Undetermined"}


def run(job: JobSpec, seed: int = 0, horizon: int = S.DEFAULT_HORIZON, truncation: Optional[int] = None) -> Report:
    t0 = time.perf_counter()
    p = job.params
    seed = int(p.get("seed", seed))
    horizon = int(p.get("horizon", horizon))
    n = int(p.get("n", 0))
    data: dict = {"command": job.command, "ring": str(job.ring)}
    ok = True
    cmd = job.command
    if cmd in ("stabilize", "tor", "tower", "asymptotic", "intertwine", "satellite", "vogel-roundtrip"):
        A, B = job.module(job.args[0]), job.module(job.args[1])
        tr = _trunc(job, A, B, override=truncation)
        ctx = S.StableContext.for_modules(A, B, tr)
        data["truncation"] = tr.describe() if tr is not None else "none"
        data["certificate"] = "Exact"
        if cmd == "stabilize":
            st = S.inj_stabilize(A, B, tr)
            data["result"] = st.module.describe()
            data["truncation_certified"] = st.truncation_certified
            ok = st.truncation_certified
        elif cmd == "tor":
            deg = int(p.get("n", 1))
            if deg < 0:
                raise JobError("tor needs n >= 0")
            data["result"] = S.tor(A, B, deg, ctx).describe()
        elif cmd == "tower":
            t = S.tower(ctx, n, horizon)
            data.update(_tower_data(t))
            data["result"] = data["limit"]
        elif cmd == "asymptotic":
            v = S.asymptotic_T(ctx, n, horizon)
            data.update(_tower_data(v.tower))
            data["result"] = v.describe()
            data["truncation_certified"] = v.truncation_certified
            ok = v.truncation_certified
        elif cmd == "intertwine":
            it = S.intertwine(ctx, n, horizon)
            data["stabilized_tower"] = _tower_data(it.stab_tower)
            data["tor_tower"] = _tower_data(it.tor_tower)
            data["certificate"] = str(it.stab_tower.certificate)
            data["checks"] = {"southeast_epi": it.southeast_epi, "northeast_mono": it.northeast_mono,
                              "factorization": it.factorization_ok, "squares_commute": it.squares_commute,
                              "limit_maps_inverse": str(it.limit_maps_inverse)}
            ok = it.ok
            data["result"] = "isomorphic systems" if ok else "comparison failed"
        elif cmd == "satellite":
            sc = S.compare_satellite(ctx, n, horizon)
            data["satellite_tower"] = _tower_data(sc.satellite)
            data["certificate"] = str(sc.satellite.certificate)
            data["checks"] = {"stagewise_iso": sc.stagewise_iso, "squares_commute": sc.squares_commute}
            ok = sc.ok
            data["result"] = data["satellite_tower"]["limit"]
        else:
            data.update(_vogel_roundtrip(ctx, n, horizon, seed))
            ok = data.pop("_ok")
    elif cmd == "omega":
        A = job.module(job.args[0])
        alpha, beta = job.sequences[job.args[1]]
        if not (alpha.is_injective and beta.is_surjective and is_exact(alpha, beta)):
            raise JobError(f"sequence '{job.args[1]}' is not short exact")
        if job.ring.is_integers:
            data["result"] = "0"
            data["certificate"] = "StabilizedAt(0)"
            data["truncation"] = _trunc(job, A, alpha.target, override=truncation).describe()
            data["note"] = "all asymptotic groups vanish over Z"
        else:
            cc = S.ConnectingContext(A, alpha, beta)
            om = S.connecting_omega(cc, n, horizon)
            rho = S.second_construction_omega(cc, n, horizon)
            data["result"] = om.describe()
            data["truncation"] = "none"
            data["certificate"] = f"source {om.source_value.tower.certificate}, target {om.target_value.tower.certificate}"
            data["checks"] = {"sign_square": om.sign_square_ok, "alpha_after_omega_zero": om.alpha_omega_zero,
                              "omega_after_beta_zero": om.omega_beta_zero, "rho_consistent": rho.consistent,
                              "rho_relative_sign": str(rho.relative_sign),
                              "anticommuting_squares": rho.tor_stab_anticommutes and rho.tor_tor_anticommutes and rho.stab_stab_anticommutes,
                              "cube_lemmas": rho.cubes_ok}
            ok = om.ok and rho.ok
    elif cmd == "verify-cubes":
        count = int(p.get("count", 25))
        rng = random.Random(seed)
        if job.ring.is_integers:
            raise JobError("verify-cubes runs over Z/m")
        good = 0
        fails = []
        for cube in V.random_cubes(rng, job.ring, count):
            dh = V.verify_cube_down_horizontal(cube)
            hd = V.verify_cube_horizontal_down(cube)
            if dh.passed and hd.passed:
                good += 1
            else:
                fails.append(cube.label)
        ok = good == count
        data.update({"result": f"{good}/{count} anticommutation {'OK' if ok else 'FAILED'}",
                     "seed": seed, "certificate": "Exact", "truncation": "none", "failures": fails})
    elif cmd == "verify-all":
        results = V.run_all(seed)
        ok = all(r.ok for r in results)
        data.update({"result": f"{sum(r.ok for r in results)}/{len(results)} criteria passed",
                     "seed": seed, "certificate": "Exact", "truncation": "per instance",
                     "criteria": [r.summary() for r in results]})
        data["_lines"] = [r.line() for r in results]
    return Report(data, ok, time.perf_counter() - t0)


def _vogel_roundtrip(ctx, n, horizon, seed) -> dict:
    t = S.tower(ctx, n, horizon)
    out = {"certificate": str(t.certificate), "limit": t.limit.describe() if t.limit is not None else "Undetermined"}
    if t.certificate.kind != "StabilizedAt" or t.limit is None or t.limit.is_zero:
        out.update({"result": "zero or uncertified limit; nothing to lift", "_ok": t.certificate.kind != "Inconclusive"})
        return out
    rng = random.Random(seed)
    M = t.stages[t.certificate.index]
    x = M.zero_vector()
    for i in range(M.ngens):
        x = x + rng.randrange(1, max(2, M.exponent())) * M.gen(i)
    if M.is_zero_element(x):
        x = M.gen(0)
    phi = coherent_from_stage(ctx, t, x)
    rep = lift_surjectivity(phi, horizon)
    cyc, k = check_cycle(rep.chain)
    psi = project_kappa(rep.chain)
    agree = psi.agrees_with(phi, range(t.start, t.start + horizon))
    out.update({"result": "round trip exact" if (agree and cyc) else "round trip failed",
                "chain_tail": str(rep.chain.tail), "confluence_index": k,
                "correction_steps": rep.corrections_solved, "fallback_steps": rep.fallback_steps,
                "_ok": bool(agree and cyc)})
    return out


# --------------------------------------------------------------------------


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="asymstab", description="Asymptotic stabilization of the tensor product.")
    ap.add_argument("--job", required=True, help="job file, or - for standard input")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--horizon", type=int, default=S.DEFAULT_HORIZON)
    ap.add_argument("--emit", choices=("text", "machine"), default="text")
    ap.add_argument("--truncation", type=int, default=None, help="override the level for every prime (Z only)")
    args = ap.parse_args(argv)
    if args.horizon < 1:
        ap.error("--horizon must be at least 1")
    try:
        text = sys.stdin.read() if args.job == "-" else open(args.job, encoding="utf-8").read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        job = parse_jobspec(text)
        rep = run(job, args.seed, args.horizon, args.truncation)
    except (JobError, ModuleError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    lines = rep.data.pop("_lines", None)
    if args.emit == "machine":
        print(rep.machine())
    else:
        if lines:
            print("\n".join(lines))
        print(rep.text())
    return 0 if rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
