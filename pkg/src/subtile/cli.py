"""Command-line workbench: ``subtile <command> SYSTEM [options]``.

Exit codes: 0 when every requested check passes, 1 on a failed verification,
2 on bad input, 3 when a search or precision budget runs out.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import algebra, catalog, field, rokhlin, symmetry, system, tower
from .cache import attach_cache
from .errors import InputError, ResourceError, SubtileError, VerificationError
from .field import format_rational, parse_rational
from .render import render_layers, render_svg

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3


def rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def symmetry_arg(text: str) -> system.GroupSpec:
    """'10' (rotations only) or '10,f5' (with the reflection x -> zeta^5 conj x)."""
    parts = text.split(",")
    try:
        rot = int(parts[0])
        if len(parts) == 1:
            return system.GroupSpec(rot, False, 0)
        if len(parts) == 2 and parts[1].startswith("f"):
            return system.GroupSpec(rot, True, int(parts[1][1:] or 0))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"bad symmetry spec {text!r}; use N or N,fK")


def load(args) -> system.TilingSystem:
    src = args.system
    path = Path(src)
    if path.exists():
        raw = path.read_bytes()
    elif src in catalog.BUILDERS:
        raw = catalog.bundled_bytes(src)
    else:
        raise InputError(f"no such system file or bundled system: {src}")
    sys_ = system.load_system(raw, source=raw)
    if args.symmetry is not None:
        sys_ = sys_.with_group(args.symmetry)
    if not args.no_cache:
        attach_cache(sys_, args.cache_dir)
    return sys_


def s(z) -> list[str] | str:
    """Exact JSON form of a field element or rational."""
    if isinstance(z, Fraction):
        return format_rational(z)
    return z.to_strings()


def tile_json(t) -> dict:
    return {"id": t.proto, "x": t.x.to_strings()}


def fmt_approx(z) -> str:
    c = z.approx()
    return f"{c.real:.6f}" if abs(c.imag) < 1e-12 else f"({c.real:.6f}, {c.imag:.6f})"


# ---------------------------------------------------------------------------
# commands; each returns (lines, json object, ok)


def cmd_validate(args, S):
    lines = []
    doc: dict = {"name": S.name, "prototiles": len(S.ids)}
    ok = True
    sup = system.check_support(S)
    lines += sup.lines()
    doc["support"] = {"ok": sup.ok, "problems": sup.problems}
    ok &= sup.ok
    prim = system.check_primitivity(S)
    lines.append(f"primitivity: {'ok, exponent ' + str(prim.exponent) if prim.primitive else 'FAILS'} (Wielandt bound {prim.bound})")
    doc["primitivity"] = {"ok": prim.primitive, "exponent": prim.exponent}
    ok &= prim.primitive
    if prim.primitive:
        st = system.find_self_tile(S)
        lines.append(f"self tile: t = {st.tile.proto} + {fmt_approx(st.tile.x)} in omega^{st.level}(t): {st.verified}")
        doc["self_tile"] = {"proto": st.proto, "level": st.level, "tile": tile_json(st.tile), "verified": st.verified}
        ok &= st.verified
    e2 = algebra.enumerate_E2(S, args.flc_depth)
    lines.append(f"finite local complexity: {len(e2.generators)} edge-adjacent pair classes at depth {e2.depth}, stabilised: {e2.stabilized}")
    doc["flc"] = {"edge_pairs": len(e2.generators), "depth": e2.depth, "stabilized": e2.stabilized}
    lines.append("injectivity of omega on the hull: assumed (no finite test)")
    if args.border:
        n, K = args.border
        bf = system.check_border_forcing(S, n, K)
        lines.append(f"border forcing at n = {n} (occurrences up to depth {K}): {'forced' if bf.forced else 'not forced'}; max collars {max(bf.collar_counts.values())}")
        doc["border_forcing"] = {"n": n, "depth": K, "forced": bf.forced, "collars": {str(p): c for p, c in bf.collar_counts.items()}}
    G = symmetry.attach_group(S)
    com = symmetry.check_commutation(S)
    lines += com.lines()
    free = symmetry.check_freeness(S)
    lines.append(f"group: order {len(G)}, free on prototiles: {free}")
    std = [o[0] for o in symmetry.orbits(S)]
    lines.append("standard position S_G = {" + ", ".join(map(str, std)) + "}")
    doc["group"] = {"order": len(G), "commutation": com.ok, "free": free, "standard_position": std}
    ok &= com.ok and (free or args.allow_nonfree)
    return lines, doc, ok


def cmd_expand(args, S):
    if args.proto not in S.prototiles:
        raise InputError(f"unknown prototile {args.proto}")
    if args.level < 0:
        raise InputError("level must be nonnegative")
    tiles = S.supertile(args.proto, args.level)
    ordered = system.canonical_order(tiles)
    lines = [f"omega^{args.level}({args.proto}): {len(tiles)} tiles"]
    if args.list:
        lines += [f"  {t.proto:>4}  {fmt_approx(t.x)}" for t in ordered]
    if args.svg:
        Path(args.svg).write_text(render_svg(S, ordered, title=f"omega^{args.level}({args.proto})"), encoding="utf-8")
        lines.append(f"wrote {args.svg}")
    doc = {"proto": args.proto, "level": args.level, "count": len(tiles), "tiles": [tile_json(t) for t in ordered]}
    return lines, doc, True


def cmd_matrix(args, S):
    M = tower.equivariant_incidence_matrix(S) if args.group else tower.incidence_matrix(S)
    pd = tower.equivariant_perron(S) if args.group else tower.system_perron(S)
    lines = [("M^G" if args.group else "M") + f" ({len(M)} x {len(M)}), rows/columns {list(M.labels)}"]
    lines += ["  " + " ".join(f"{v:>2}" for v in row) for row in M.as_lists()]
    lines.append("row sums: " + " ".join(map(str, M.row_sums())))
    ev = pd.eigenvalue
    lines.append(f"Perron eigenvalue: {ev} ~ {fmt_approx(ev)}; interval [{float(pd.eigen_interval[0]):.15f}, {float(pd.eigen_interval[1]):.15f}]")
    lines.append("v_L (sum 1): " + ", ".join(f"{p}: {fmt_approx(v)}" for p, v in zip(pd.labels, pd.v_left)))
    doc = {
        "labels": list(M.labels),
        "matrix": M.as_lists(),
        "row_sums": M.row_sums(),
        "eigenvalue": s(ev),
        "eigen_interval": [format_rational(pd.eigen_interval[0]), format_rational(pd.eigen_interval[1])],
        "v_left": {str(p): s(v) for p, v in zip(pd.labels, pd.v_left)},
        "v_right": {str(p): s(v) for p, v in zip(pd.labels, pd.v_right)},
        "mode": pd.mode,
    }
    return lines, doc, True


def cmd_trace(args, S):
    pd = tower.system_perron(S)
    n = args.level
    F = S.field
    total = F.zero()
    lines = [f"tau(e^{n}_p(x,x)) = lambda^(-2n) v_L(p):"]
    doc: dict = {"level": n, "basis_traces": {}}
    for p in S.ids:
        tp = pd.vl(p) * pd.scale(n)
        total = total + tp * len(S.supertile(p, n))
        doc["basis_traces"][str(p)] = s(tp)
        if args.verbose:
            lines.append(f"  {p:>4}: {fmt_approx(tp)}")
    residual = total - F.one()
    lines.append(f"sum_p #Punc({n},p) tau_p - 1 = {residual}")
    doc["normalisation_residual"] = s(residual)
    return lines, doc, residual.is_zero()


def cmd_k0(args, S):
    if args.no_group:
        M, pd = tower.incidence_matrix(S), tower.system_perron(S)
    else:
        M, pd = tower.equivariant_incidence_matrix(S), tower.equivariant_perron(S)
    img = tower.k0_trace_image(M, pd, args.levels)
    lines = [
        "trace image of K0: Z-span of {" + ", ".join(str(b) for b in img.basis) + "}",
        "  ~ {" + ", ".join(fmt_approx(b) for b in img.basis) + "}",
        f"stabilised at level {img.stabilization_level}: {img.stabilized}",
    ]
    doc = {"basis": [s(b) for b in img.basis], "stabilized": img.stabilized, "stabilization_level": img.stabilization_level}
    return lines, doc, img.stabilized


def cmd_generators(args, S):
    inv = algebra.enumerate_E2(S, args.depth)
    closed = algebra.e2_closed_under_group(S, inv)
    lines = [
        f"E2: {len(inv.generators)} ordered edge-adjacent pairs at depth {inv.depth} (counts by depth {inv.counts})",
        f"stabilised: {inv.stabilized}; closed under the group: {closed}",
    ]
    if args.list:
        lines += [f"  e({g.t1.proto} -> {g.t2.proto} at {fmt_approx(g.t2.x)})" for g in inv.generators]
    doc = {
        "depth": inv.depth,
        "count": len(inv.generators),
        "stabilized": inv.stabilized,
        "closed_under_group": closed,
        "generators": [{"t1": g.t1.proto, "t2": tile_json(g.t2)} for g in inv.generators],
    }
    return lines, doc, inv.stabilized and closed


def cmd_factor(args, S):
    base = system.canonical_order(S.supertile(args.proto, args.level))
    rng = random.Random(args.seed)
    jobs = []
    if args.tiles:
        idx = [int(v) for v in args.tiles.split(",")]
        if any(not 0 <= i < len(base) for i in idx):
            raise InputError(f"tile indices must lie in 0..{len(base) - 1}")
        chosen = [base[i] for i in idx]
        t1 = base[args.t1] if args.t1 is not None else chosen[0]
        t2 = base[args.t2] if args.t2 is not None else chosen[-1]
        jobs.append(algebra.PatchGenerator(chosen, t1, t2))
    else:
        adj = algebra.edge_graph(S, base)
        for _ in range(args.random):
            sub = algebra.random_connected_subpatch(S, base, rng.randint(2, args.max_size), rng, adj)
            jobs.append(algebra.PatchGenerator(sub, sub[rng.randrange(len(sub))], sub[rng.randrange(len(sub))]))
    lines = []
    out = []
    ok = True
    for g in jobs:
        word = algebra.factor(g, S)
        good = algebra.evaluate_word(word, S) == g
        ok &= good
        lines.append(f"{len(g)}-tile patch, t1 = {g.t1.proto}, t2 = {g.t2.proto}: word of length {len(word)}, product verified: {good}")
        if args.verbose:
            lines += [f"    e({w.t1.proto} -> {w.t2.proto} at {fmt_approx(w.t2.x)})" for w in word]
        out.append({"tiles": len(g), "word": [{"t1": w.t1.proto, "t2": tile_json(w.t2)} for w in word], "verified": good})
    return lines, {"factorizations": out, "ok": ok}, ok


def cmd_layers(args, S):
    T = rokhlin.layer_decomposition(S, args.level, args.proto)
    chk = rokhlin.check_layers(S, args.level) if args.check else None
    lines = [f"layers of omega^{args.level}({args.proto}): {len(T)} punctures, {T.depth + 1} layers"]
    lines.append("  #rho^k: " + " ".join(map(str, T.counts())))
    doc = {"proto": args.proto, "level": args.level, "counts": T.counts()}
    ok = True
    if chk is not None:
        lines.append(f"partition: {chk.partition_ok}; adjacent layers differ by <= 1: {chk.adjacent_ok} ({chk.pairs_checked} pairs)")
        lines.append(f"cross-supertile pairs in layer 0: {chk.cross_ok} ({chk.cross_pairs} pairs)")
        doc["check"] = {"partition": chk.partition_ok, "adjacent": chk.adjacent_ok, "cross": chk.cross_ok}
        ok = chk.partition_ok and chk.adjacent_ok and chk.cross_ok
    if args.svg:
        Path(args.svg).write_text(render_layers(S, T), encoding="utf-8")
        lines.append(f"wrote {args.svg}")
    return lines, doc, ok


def cmd_punc_stats(args, S):
    lo, hi = args.levels
    rows = []
    lines = [f"fraction of punctures with D(x) < {format_rational(args.radius)}:", "  s   max over p"]
    for lv in range(lo, hi + 1):
        bf = rokhlin.boundary_fraction(S, lv, args.radius)
        rows.append(bf)
        lines.append(f"  {lv:<3} {format_rational(bf.worst)} ~ {float(bf.worst):.6f}")
    mono = all(b.worst <= a.worst for a, b in zip(rows, rows[1:]))
    lines.append(f"non-increasing: {mono}")
    doc = {
        "R": format_rational(args.radius),
        "levels": [{"s": b.level, "max": format_rational(b.worst), "per_proto": {str(p): format_rational(v) for p, v in b.per_proto.items()}} for b in rows],
        "non_increasing": mono,
    }
    return lines, doc, True


def cmd_rokhlin(args, S):
    _, rep = rokhlin.build_rokhlin_family(S, args.eps, args.max_level)
    return rep.lines(), rep.to_json(), rep.ok


def cmd_brown(args, S):
    rep = rokhlin.brown_check(S, args.eps, max_level=args.max_level)
    return rep.lines(), rep.to_json(), rep.ok


# ---------------------------------------------------------------------------


def level_range(text: str) -> tuple[int, int]:
    a, _, b = text.partition("..")
    try:
        lo, hi = int(a), int(b or a)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad level range {text!r}") from exc
    return lo, hi


def pair_arg(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    try:
        return int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected N:K, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("system", help="system definition (JSON file) or a bundled name: penrose, chair, square")
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--precision-bits", type=int, help="interval precision budget (overrides SUBTILE_PRECISION_BITS)")
    common.add_argument("--cache-dir", default=os.environ.get("SUBTILE_CACHE_DIR"), help="expansion cache directory")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--symmetry", type=symmetry_arg, help="override the group: N or N,fK")

    p = argparse.ArgumentParser(prog="subtile", description="Exact workbench for substitution tilings and their AF algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("validate", parents=[common], help="check the standing assumptions and the group action")
    c.add_argument("--border", type=pair_arg, metavar="N:K", help="also test border forcing at level N up to depth K")
    c.add_argument("--flc-depth", type=int, default=4)
    c.add_argument("--allow-nonfree", action="store_true", help="do not fail when the action is not free")
    c.set_defaults(func=cmd_validate)

    c = sub.add_parser("expand", parents=[common], help="expand a supertile")
    c.add_argument("-p", "--proto", type=int, required=True)
    c.add_argument("-n", "--level", type=int, required=True)
    c.add_argument("--svg")
    c.add_argument("--list", action="store_true")
    c.set_defaults(func=cmd_expand)

    c = sub.add_parser("matrix", parents=[common], help="incidence matrix and Perron data")
    c.add_argument("--group", action="store_true", help="equivariant matrix M^G")
    c.set_defaults(func=cmd_matrix)

    c = sub.add_parser("trace", parents=[common], help="trace on the AF tower")
    c.add_argument("-n", "--level", type=int, default=0)
    c.add_argument("-v", "--verbose", action="store_true")
    c.set_defaults(func=cmd_trace)

    c = sub.add_parser("k0", parents=[common], help="image of K0 under the trace")
    c.add_argument("--levels", type=int, default=6)
    c.add_argument("--no-group", action="store_true", help="use M instead of M^G")
    c.set_defaults(func=cmd_k0)

    c = sub.add_parser("generators", parents=[common], help="E2 inventory")
    c.add_argument("--depth", type=int, default=4)
    c.add_argument("--list", action="store_true")
    c.set_defaults(func=cmd_generators)

    c = sub.add_parser("factor", parents=[common], help="factor patch isometries into E2 words")
    c.add_argument("-p", "--proto", type=int, required=True)
    c.add_argument("-n", "--level", type=int, default=3)
    c.add_argument("--tiles", help="comma-separated indices into the canonical order of omega^n(p)")
    c.add_argument("--t1", type=int)
    c.add_argument("--t2", type=int)
    c.add_argument("--random", type=int, default=1, help="number of random connected sub-patches")
    c.add_argument("--max-size", type=int, default=8)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("-v", "--verbose", action="store_true")
    c.set_defaults(func=cmd_factor)

    c = sub.add_parser("layers", parents=[common], help="layer decomposition of a supertile")
    c.add_argument("-p", "--proto", type=int, required=True)
    c.add_argument("-s", "--level", type=int, required=True)
    c.add_argument("--svg")
    c.add_argument("--check", action="store_true", help="verify the layer properties for every prototile")
    c.set_defaults(func=cmd_layers)

    c = sub.add_parser("punc-stats", parents=[common], help="boundary fraction table")
    c.add_argument("-R", "--radius", type=rational_arg, required=True)
    c.add_argument("--levels", type=level_range, default=(1, 6), metavar="A..B")
    c.set_defaults(func=cmd_punc_stats)

    for name, func, helptext in (
        ("rokhlin", cmd_rokhlin, "build and verify the Rokhlin family"),
        ("brown", cmd_brown, "Brown-criterion conditions for a = sum_g a_g"),
    ):
        c = sub.add_parser(name, parents=[common], help=helptext)
        c.add_argument("--eps", type=rational_arg, required=True)
        c.add_argument("--max-level", type=int, default=rokhlin.MAX_LEVEL)
        c.set_defaults(func=func)
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.precision_bits is not None:
            try:
                field.set_precision_budget(args.precision_bits)
            except ValueError as exc:
                raise InputError(str(exc)) from exc
        S = load(args)
        lines, doc, ok = args.func(args, S)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        if exc.best is not None:
            print(f"best found: {exc.best}", file=sys.stderr)
        return EXIT_RESOURCE
    except SubtileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.json:
        doc = dict(doc)
        doc["ok"] = bool(ok)
        stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
