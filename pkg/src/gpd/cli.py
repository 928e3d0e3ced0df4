"""Command-line front end.  Exit codes: 0 success, 1 a check failed, 2 parse or usage error."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bundle import GroupoidBundle, InvalidBundle, ParseError, format_scalar, parse_bundle, serialize_text
from .convolution import (
    check_star_algebra,
    convolve,
    default_seed,
    i_norm,
    matrix_representation,
    structure_constants,
    delta,
)
from .covers import chain_pseudometric, verify_sandwich
from .errors import BundleError, CongruenceRejected, GroupoidError, GuardExceeded, HaarError, NotSurjective
from .groupoid import structural_predicates
from .haar import is_haar_preserving, pushforward_haar
from .limits import algebra_direct_system, congruence_lattice, inverse_limit, validate_inverse_system
from .quotient import build_quotient, check_congruence, congruence

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class Report:
    lines: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    code: int = OK

    def add(self, key, value, text=None):
        self.data[key] = value
        self.lines.append(text if text is not None else f"{key}: {_plain(value)}")


def _plain(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (Fraction, complex)):
        return format_scalar(v) if not isinstance(v, Fraction) else str(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _load(path) -> GroupoidBundle:
    return parse_bundle(path)


def _need(bundle: GroupoidBundle, attr: str, path: str):
    value = getattr(bundle, attr)
    if value is None:
        raise UsageError(f"{path}: no '{attr}' field")
    return value


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> Report:
    b = _load(args.file)
    r = Report()
    if b.groupoid is not None:
        G = b.groupoid
        r.add("groupoid", "valid", f"groupoid: valid ({len(G.arrows)} arrows, {len(G.units)} units)")
        r.data["arrows"], r.data["units"] = len(G.arrows), len(G.units)
    for part in ("haar", "cocycle", "partition", "covers", "coefficients", "system"):
        if getattr(b, part) is not None:
            r.add(part, "valid")
    if b.arrow_map is not None:
        r.add("morphism", "valid")
    if b.system is not None:
        validate_inverse_system(b.system)
    return r


def cmd_predicates(args) -> Report:
    b = _load(args.file)
    G = _need(b, "groupoid", args.file)
    rep = structural_predicates(G, b.partition)
    r = Report()
    r.add("transitive", rep.transitive)
    r.add("principal", rep.principal)
    r.add("units_separated_from_nonunits", rep.units_separated_from_nonunits)
    return r


def cmd_haar_check(args) -> Report:
    b = _load(args.file)
    w = _need(b, "haar", args.file)
    r = Report()
    r.add("haar", "valid")
    for x in b.groupoid.units:
        r.add(f"mu^{x}", str(w.fiber_measure(x)), f"fiber mass over {x}: {w.fiber_measure(x)}")
    return r


def cmd_cocycle_check(args) -> Report:
    b = _load(args.file)
    sigma = _need(b, "cocycle", args.file)
    r = Report()
    r.add("cocycle", "valid")
    r.add("trivial", sigma.is_trivial)
    return r


def cmd_quotient(args) -> Report:
    b = _load(args.file)
    G = _need(b, "groupoid", args.file)
    if args.partition:
        blocks = _need(_load(args.partition), "partition", args.partition)
    else:
        blocks = _need(b, "partition", args.file)
    unknown = {g for blk in blocks for g in blk} - set(G.arrows)
    if unknown:
        raise UsageError(f"partition names undeclared arrows {sorted(unknown)}")
    ctx = b.context()
    P = congruence(G, blocks)
    r = Report()
    report = check_congruence(G, P, ctx.haar, ctx.cocycle)
    r.data["conditions"] = {c.name: c.passed for c in report.conditions.values() if c.applicable}
    r.lines.extend(report.lines())
    if not report.passed:
        r.data["failed"] = report.failed()
        r.lines.append("congruence rejected: " + ", ".join(report.failed()))
        r.code = FAILED
        return r
    q = build_quotient(G, P, ctx.haar, ctx.cocycle)
    out = GroupoidBundle(q.groupoid, q.haar, q.cocycle)
    text = serialize_text(out)
    r.data["quotient"] = json.loads(text)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        r.lines.append(f"quotient written to {args.output}")
    else:
        r.lines.append(text.rstrip("\n"))
    return r


def _element(path, ctx):
    b = _load(path)
    return b.element(ctx) if b.coefficients is not None else _need(b, "coefficients", path)


def _element_lines(r: Report, f, key: str):
    coeffs = {g: v for g, v in f.items() if v != 0}
    r.data[key] = {g: _jsonable(v) for g, v in coeffs.items()}
    if not coeffs:
        r.lines.append(f"{key}: 0")
    for g, v in coeffs.items():
        r.lines.append(f"{key}[{g}] = {_fmt(v)}")


def _fmt(v):
    if isinstance(v, complex):
        if v.imag == 0:
            return f"{v.real:.12g}"
        return f"{v.real:.12g}{v.imag:+.12g}i"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def cmd_convolve(args) -> Report:
    ctx = _load(args.file).context()
    f, g = _element(args.f, ctx), _element(args.g, ctx)
    r = Report()
    _element_lines(r, convolve(f, g), "f*g")
    return r


def cmd_norm(args) -> Report:
    ctx = _load(args.file).context()
    f = _element(args.f, ctx)
    r = Report()
    n = i_norm(f)
    r.add("i_norm", _jsonable(n) if isinstance(n, Fraction) else n, f"||f||_I = {_fmt(n)}")
    return r


def cmd_algebra(args) -> Report:
    b = _load(args.file)
    ctx = b.context()
    G = ctx.groupoid
    r = Report()
    if args.matrix:
        try:
            mats = {g: matrix_representation(delta(ctx, g)) for g in G.arrows}
        except GroupoidError as exc:
            raise UsageError(str(exc)) from exc
        r.data["matrices"] = {}
        for g, M in mats.items():
            real = np.real_if_close(M)
            r.data["matrices"][g] = _jsonable(real.tolist())
            rows = ["[" + " ".join(_fmt(x) for x in row) + "]" for row in real.tolist()]
            r.lines.append(f"{g} -> " + " ".join(rows))
    if args.structure_constants or not (args.matrix or args.axioms):
        sc = structure_constants(ctx)
        r.data["structure_constants"] = [[i, j, k, _jsonable(c)] for (i, j), (k, c) in sc.table.items()]
        for (i, j), (k, c) in sc.table.items():
            r.lines.append(f"d[{i}] * d[{j}] = {_fmt(c)} d[{k}]")
    if args.axioms:
        seed = default_seed() if args.seed is None else args.seed
        rep = check_star_algebra(ctx, trials=args.trials, seed=seed)
        r.data["axioms"] = {"passed": rep.passed, "seed": seed}
        r.lines.append(f"seed: {seed}")
        r.lines.extend(rep.lines())
        r.lines.append("star-algebra laws: " + ("pass" if rep.passed else "FAIL"))
        if not rep.passed:
            r.code = FAILED
    return r


def cmd_pushforward(args) -> Report:
    b = _load(args.file)
    ctx = b.context()
    mb = _load(args.morphism)
    if mb.codomain is None:
        raise UsageError(f"{args.morphism}: no 'codomain'/'map' fields")
    q = mb.morphism(ctx.groupoid)
    r = Report()
    try:
        nu = pushforward_haar(q, ctx.haar)
    except (HaarError, NotSurjective) as exc:
        r.add("pushforward", "undefined", f"pushforward failed: {exc}")
        r.code = FAILED
        return r
    r.data["pushforward"] = {h: str(nu[h]) for h in q.codomain.arrows}
    for h in q.codomain.arrows:
        r.lines.append(f"nu[{h}] = {nu[h]}")
    if mb.codomain.haar is not None:
        hp = is_haar_preserving(q, ctx.haar, mb.codomain.haar)
        r.add("haar_preserving", bool(hp))
        if not hp:
            r.lines.append(f"witness: {hp.witness!r} {hp.detail}")
            r.code = FAILED
    return r


def cmd_limit(args) -> Report:
    b = _load(args.file)
    sys_ = _need(b, "system", args.file)
    r = Report()
    try:
        lim = inverse_limit(sys_)
    except (GroupoidError, AssertionError) as exc:
        r.add("system", "invalid", f"system invalid: {exc}")
        r.code = FAILED
        return r
    G = lim.groupoid
    r.add("top", lim.top)
    r.add("limit", {"arrows": len(G.arrows), "units": len(G.units)},
          f"limit: {len(G.arrows)} arrows, {len(G.units)} units")
    r.data["nodes"] = {}
    for a, (hp, cp) in lim.checks.items():
        r.data["nodes"][a] = {"haar": bool(hp), "cocycle": bool(cp)}
        r.lines.append(f"projection to {a}: haar {'pass' if hp else 'FAIL'}, cocycle {'pass' if cp else 'FAIL'}")
    ds = algebra_direct_system(sys_)
    r.add("direct_system_exact", ds.exact)
    r.add("direct_system_worst_residual", float(ds.worst()))
    if not ds.exact and ds.worst() > 1e-9:
        r.code = FAILED
    return r


def cmd_lattice(args) -> Report:
    b = _load(args.file)
    ctx = b.context()
    try:
        lat = congruence_lattice(ctx.groupoid, ctx.haar, ctx.cocycle, guard=args.guard)
    except GuardExceeded as exc:
        raise UsageError(str(exc)) from exc
    r = Report()
    r.add("congruences", len(lat.congruences))
    names = list(lat.quotients)
    r.data["nodes"] = {}
    for n in names:
        P = lat.quotients[n].congruence
        blocks = [sorted(blk, key=ctx.groupoid.index.__getitem__) for blk in P.arrow_partition if len(blk) > 1]
        r.data["nodes"][n] = blocks
        r.lines.append(f"{n}: " + (" ".join("{" + ",".join(blk) + "}" for blk in blocks) or "identity"))
    pairs = lat.system.comparable_pairs()
    r.data["order"] = [list(p) for p in pairs]
    r.lines.append("order: " + (", ".join(f"{a}>={b}" for a, b in pairs) or "none"))
    r.add("identity_is_maximum", lat.identity_is_maximum)
    r.add("limit_isomorphic", lat.limit_isomorphic)
    if not (lat.identity_is_maximum and lat.limit_isomorphic):
        r.code = FAILED
    return r


def cmd_metric(args) -> Report:
    b = _load(args.file)
    covers = _need(b, "covers", args.file)
    if "sequence" not in covers:
        raise UsageError(f"{args.file}: 'covers' must hold a single 'sequence'")
    seq = covers["sequence"]
    pm = chain_pseudometric(seq)
    r = Report()
    pts = list(pm.ground)
    r.data["points"] = pts
    r.data["d"] = [[str(v) for v in row] for row in pm.dist]
    width = max(len(str(v)) for row in pm.dist for v in row)
    r.lines.append("d: " + " ".join(str(p) for p in pts))
    for p, row in zip(pts, pm.dist):
        r.lines.append(f"  {p}: " + " ".join(str(v).rjust(width) for v in row))
    bad = [(x, n) for x in pts for n in range(len(seq)) if not verify_sandwich(seq, x, n, pm)]
    r.add("sandwich", not bad, "sandwich: " + ("pass" if not bad else f"FAIL at {bad}"))
    if bad:
        r.code = FAILED
    return r


COMMANDS = {
    "validate": cmd_validate,
    "predicates": cmd_predicates,
    "haar-check": cmd_haar_check,
    "cocycle-check": cmd_cocycle_check,
    "quotient": cmd_quotient,
    "convolve": cmd_convolve,
    "norm": cmd_norm,
    "algebra": cmd_algebra,
    "pushforward": cmd_pushforward,
    "limit": cmd_limit,
    "lattice": cmd_lattice,
    "metric": cmd_metric,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    p = _Parser(prog="gpd", description="Finite groupoids, Haar systems, cocycles and convolution algebras.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, help_, target="file"):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument(target if target != "file" else "file", metavar=target.upper())
        return sp

    add("validate", "parse and validate a bundle")
    add("predicates", "transitivity, principality, unit separation")
    add("haar-check", "validate the Haar weights")
    add("cocycle-check", "validate the cocycle")
    sp = add("quotient", "quotient by an arrow partition")
    sp.add_argument("--partition", help="file with a 'partition' field (default: the bundle's own)")
    sp.add_argument("-o", "--output", help="write the quotient bundle here")
    sp = add("convolve", "convolution product of two elements")
    sp.add_argument("--f", required=True)
    sp.add_argument("--g", required=True)
    sp = add("norm", "I-norm of an element")
    sp.add_argument("--f", required=True)
    sp = add("algebra", "structure constants, matrix picture, or randomized law checks")
    sp.add_argument("--structure-constants", action="store_true")
    sp.add_argument("--matrix", action="store_true")
    sp.add_argument("--axioms", action="store_true", help="randomized *-algebra law harness (seed from GPD_SEED)")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int)
    sp = add("pushforward", "push the Haar system along a morphism")
    sp.add_argument("--morphism", required=True)
    add("limit", "inverse limit and dual direct system of a system file")
    sp = add("lattice", "all valid congruences and the limit of their quotients")
    sp.add_argument("--guard", type=int, default=10)
    add("metric", "pseudo-metric of a normal cover sequence")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    try:
        report = COMMANDS[args.command](args)
    except InvalidBundle as exc:
        report = Report([f"invalid: {exc}"], {"error": str(exc)}, FAILED)
    except (ParseError, UsageError, BundleError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"gpd: error: {exc}", file=sys.stderr)
        return USAGE
    except (GroupoidError, CongruenceRejected) as exc:
        report = Report([f"check failed: {exc}"], {"error": str(exc)}, FAILED)
    if args.json:
        payload = dict(_jsonable(report.data), command=args.command, exit_code=report.code)
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(report.lines))
    return report.code


if __name__ == "__main__":
    raise SystemExit(main())
