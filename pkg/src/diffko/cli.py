"""Command-line interface.

Exit status: 0 success, 2 invalid input, 3 a requested result depends on an
operation the engine cannot evaluate, 1 an internal invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .errors import InvariantViolation, PresentationError, UnsupportedOperation

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION, EXIT_UNSUPPORTED = 0, 1, 2, 3
GOLDEN_ENV = "DIFFKO_GOLDEN_DIR"


class ValidationError(ValueError):
    pass


@dataclass
class Output:
    data: object
    rows: list[dict] | None = None
    text: str | None = None
    status: int = EXIT_OK
    diagnostics: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class CommandRequest:
    subcommand: str
    options: dict
    fmt: str = "text"


# --- option parsing helpers -----------------------------------------------------

def parse_range(text: str) -> tuple[int, int]:
    """``LO..HI`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
        else:
            lo_i = hi_i = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo_i, hi_i


def _bounded_int(lo: int, hi: int | None = None) -> Callable[[str], int]:
    def conv(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo or (hi is not None and v > hi):
            bound = f">= {lo}" if hi is None else f"in {lo}..{hi}"
            raise argparse.ArgumentTypeError(f"{v} is not {bound}")
        return v
    return conv


def _load_space(spec: str):
    from .presentation import BUILTIN_NAMES, builtin, load_presentation

    if spec in BUILTIN_NAMES:
        return builtin(spec)
    path = Path(spec)
    if not path.exists():
        raise ValidationError(f"unknown space {spec!r}: not a built-in name or an existing file")
    try:
        return load_presentation(str(path))
    except InvariantViolation as exc:
        # an inconsistent input file is a user error, not an engine failure
        raise ValidationError(f"{path}: {exc}") from None


def _periods(items: Sequence[str]) -> dict[int, tuple[Fraction, ...]]:
    out = {}
    for item in items:
        try:
            deg, vals = item.split("=", 1)
            out[int(deg)] = tuple(Fraction(v) for v in vals.split(","))
        except ValueError:
            raise ValidationError(f"periods must look like DEG=a,b,... not {item!r}") from None
    return out


# --- handlers -----------------------------------------------------------------------

def cmd_coeff(opts) -> Output:
    from .coefficients import (check_bott_identities, coefficient_table, flat_coefficient_group, ko_mul,
                               parse_ko)

    if opts.multiply:
        a, b = (parse_ko(x) for x in opts.multiply)
        prod = ko_mul(a, b)
        return Output({"left": str(a), "right": str(b), "product": str(prod)}, text=str(prod))
    if opts.bott_check is not None:
        ok = check_bott_identities(opts.bott_check)
        return Output({"bott_identities": ok, "range": opts.bott_check},
                      text=f"r∘c = 2 and c∘r = 1 + τ on |k| <= {opts.bott_check}: {'pass' if ok else 'FAIL'}",
                      status=EXIT_OK if ok else EXIT_INTERNAL)
    lo, hi = opts.range
    if opts.table == "ko":
        rows = coefficient_table(lo, hi)
    else:
        rows = []
        for i in range(lo, hi + 1):
            g = flat_coefficient_group(i)
            rows.append({"i": i, "group": str(g), "generators": " ".join(g.labels)})
    return Output({"table": opts.table, "rows": rows}, rows=rows)


def cmd_ph(opts) -> Output:
    from .genera import pontrjagin_character

    poly = pontrjagin_character(opts.max_degree, rank=opts.rank)
    rows = [{"degree": d, "component": str(poly.component(d))}
            for d in range(0, opts.max_degree + 1, 4) if not poly.component(d).is_zero()]
    return Output({"max_degree": opts.max_degree, "rank": opts.rank, "ph": str(poly), "components": rows},
                  rows=rows, text=str(poly))


def _generator_scheme(spec: str):
    from .polynomial import GeneratorScheme

    try:
        prefix, deg = spec.split(":")
        return GeneratorScheme.single(prefix, int(deg), constant=True)
    except ValueError:
        raise ValidationError(f"--generator expects PREFIX:DEGREE, got {spec!r}") from None


def cmd_genus(opts) -> Output:
    from .genera import MissingPairing, a_hat, a_hat_inverse, evaluate_genus
    from .polynomial import parse_polynomial

    genus = (a_hat if opts.name == "a-hat" else a_hat_inverse)(opts.max_degree)
    if opts.total_p is None:
        rows = [{"degree": d, "component": str(genus.component(d))}
                for d in range(0, opts.max_degree + 1, 4)]
        return Output({"genus": opts.name, "value": str(genus), "components": rows}, rows=rows, text=str(genus))
    scheme = _generator_scheme(opts.generator)
    total = parse_polynomial(opts.total_p, scheme)
    pairing = {}
    for item in opts.pairing:
        mono, _, val = item.partition("=")
        pairing[mono] = Fraction(val)
    top = opts.top_degree or opts.max_degree
    try:
        value = evaluate_genus(genus, total, top, pairing)
    except MissingPairing as exc:
        raise ValidationError(exc.args[0]) from None
    return Output({"genus": opts.name, "total_p": str(total), "top_degree": top, "value": str(value)},
                  text=str(value))


def cmd_ahss(opts) -> Output:
    from .ahss import FormSlot, converge, e2_differential, e2_topological, run, slot_summary

    pres = _load_space(opts.space)
    totals = opts.totals
    if opts.variant == "topological":
        first = e2_topological(pres, totals, reduced=opts.reduced)
    else:
        slot = FormSlot(_periods(opts.periods)) if opts.periods else None
        first = e2_differential(pres, totals, reduced=opts.reduced, slot=slot)
    pages = run(first)
    final = pages[-1]

    def page_rows(page):
        rows = []
        for (s, t), e in sorted(page.entries.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            if not page.in_report_range(s, t):
                continue
            group = "forms" if e.kind == "forms" else str(e.descriptor())
            rows.append({"page": page.r, "s": s, "t": t, "group": group,
                         "tainted": e.tainted})
        return rows

    rows = page_rows(pages[0]) + page_rows(final)
    conv = converge(pages)
    log = [d.to_json() for d in final.log]
    data = {
        "space": pres.name, "variant": opts.variant, "reduced": opts.reduced, "totals": list(totals),
        "e2": page_rows(pages[0]), "e_infinity_page": final.r, "e_infinity": page_rows(final),
        "differentials": log, "convergence": [c.to_json() for c in conv.values()],
    }
    if opts.variant == "differential":
        data["form_slot"] = slot_summary(final)
        data["slot_values"] = [{"degree": d, "values": [str(v) for v in val.values], "context": val.context}
                               for d, val in final.slot_values]
    lines = [f"{pres.name}  {opts.variant} AHSS, total degrees {totals[0]}..{totals[1]}"]
    for label, page in (("E_2", pages[0]), (f"E_{final.r} = E_inf", final)):
        lines.append(f"{label}:")
        for row in page_rows(page):
            mark = "  [tainted]" if row["tainted"] else ""
            lines.append(f"  ({row['s']:>2},{row['t']:>3})  {row['group']}{mark}")
    lines.append("differentials:")
    for d in final.log:
        if d.status != "zero-by-lacunarity" or opts.verbose:
            lines.append(f"  d{d.r} {d.source} -> {d.target}: {d.rule} [{d.status}{', ' + d.note if d.note else ''}]")
    lines.append("convergence:")
    for c in conv.values():
        group = str(c.group) if c.group is not None else " | ".join(str(g) for *_, g in c.pieces)
        lines.append(f"  degree {c.total}: {c.status}: {group}")
        if c.forms is not None:
            for d, lat in c.forms["period_lattices"].items():
                mult = lat["multiplier"]
                cond = "unconstrained" if mult is None else f"periods in {mult}Z"
                lines.append(f"    forms, degree {d}: rank {lat['rank']}, {cond}")
            if c.forms["exact_summands"]:
                lines.append("    exact summands: " + ", ".join(f"dΩ^{d}" for d in c.forms["exact_summands"]))
    status = EXIT_UNSUPPORTED if any(c.status == "refused" for c in conv.values()) else EXIT_OK
    diags = [f"degree {c.total}: blocked by {len(c.blockers)} unsupported differential(s)"
             for c in conv.values() if c.status == "refused"]
    return Output(data, rows=rows, text="\n".join(lines), status=status, diagnostics=diags)


def cmd_sphere(opts) -> Output:
    from .ahss import ko_hat_of_sphere, ko_of_sphere

    n = opts.n
    if opts.variant == "topological":
        if n > 32:
            raise ValidationError("the topological sphere computation covers 1 <= n <= 32")
        g = ko_of_sphere(n)
        return Output({"n": n, "variant": "topological", "group": str(g), "detail": g.to_json()},
                      rows=[{"n": n, "group": str(g)}], text=f"KO~(S^{n}) = {g}")
    res = ko_hat_of_sphere(n, opts.metric)
    return Output(res.to_json(), rows=[{"n": n, "structure": str(res)}], text=f"KO^~(S^{n}) = {res}")


def cmd_denominator(opts) -> Output:
    from .integrality import ph_denominator

    lo, hi = opts.k_range
    if lo < 1:
        raise ValidationError("k must be >= 1")
    rows = [ph_denominator(k).to_row() for k in range(lo, hi + 1)]
    text = "\n".join(f"k={r['k']:>2}  {r['odd_part_factored']:>14} · Ph_{r['degree']} ∈ Z[1/2]" for r in rows)
    return Output({"rows": rows, "note": "powers of 2 are absorbed into Z[1/2]"}, rows=rows, text=text)


def _parse_roots(text: str):
    from .adams import FormalBundle

    try:
        roots = [tuple(int(x) for x in part.split(",")) for part in text.split(";") if part.strip()]
    except ValueError:
        raise ValidationError(f"roots must look like '1,0;0,1', got {text!r}") from None
    return FormalBundle.from_roots(roots)


def cmd_adams(opts) -> Output:
    from .adams import adams_newton_recursion, adams_root_model, divergence_table

    if opts.divergence_table:
        rows = divergence_table(opts.max_r, opts.max_rank)
        return Output({"rows": rows}, rows=rows)
    if opts.element is not None:
        from .coefficients import adams_coefficient, parse_ko

        a = parse_ko(opts.element)
        res = adams_coefficient(opts.r, a)
        return Output({"r": opts.r, "element": str(a), "psi": str(res)}, text=str(res))
    if opts.roots is None:
        raise ValidationError("adams needs --element, --roots or --divergence-table")
    bundle = _parse_roots(opts.roots)
    if opts.variant == "root":
        out = adams_root_model(opts.r, bundle).klass()
    else:
        out = adams_newton_recursion(opts.r, bundle, opts.variant)
    return Output({"r": opts.r, "variant": opts.variant, "class": str(out)}, text=str(out))


def cmd_wu(opts) -> Output:
    from .steenrod import render_total, sw_from_wu, wu_classes

    pres = _load_space(opts.space)
    v = wu_classes(pres)
    w = sw_from_wu(v, pres)
    data = {"space": pres.name, "wu": render_total(v, pres), "stiefel_whitney": render_total(w, pres),
            "wu_components": {str(d): c.render(pres) for d, c in v.items()},
            "sw_components": {str(d): c.render(pres) for d, c in w.items()}}
    rows = [{"degree": d, "v": v[d].render(pres) if d in v else "0", "w": w[d].render(pres) if d in w else "0"}
            for d in range(0, pres.top_degree + 1)]
    return Output(data, rows=rows, text=f"v = {data['wu']}\nw = {data['stiefel_whitney']}")


def verification_suite() -> list[dict]:
    from .adams import FormalBundle, NEWTON, adams_newton_recursion, adams_root_model
    from .coefficients import check_bott_identities
    from .genera import newton_convert, verify_thom_genus_identity
    from .polynomial import PONTRYAGIN, GradedPolynomial

    results = []
    results.append({"check": "thom-genus identity, 4 root pairs, degree 16",
                    "ok": verify_thom_genus_identity(4, 16)})
    results.append({"check": "Bott identities on |k| <= 4", "ok": check_bott_identities(4)})
    e = [GradedPolynomial.generator(PONTRYAGIN, i) for i in range(1, 7)]
    s = newton_convert(e, "e_to_s", 6, PONTRYAGIN)
    back = newton_convert(s, "s_to_e", 6, PONTRYAGIN)
    results.append({"check": "Newton round trip e -> s -> e, n = 6", "ok": list(back) == e})
    ok = all(adams_newton_recursion(r, FormalBundle.generic(n), NEWTON)
             == adams_root_model(r, FormalBundle.generic(n)).klass()
             for r in range(1, 7) for n in range(1, 5))
    results.append({"check": "Newton recursion equals root model, r <= 6, rank <= 4", "ok": ok})
    return results


# --- golden files ------------------------------------------------------------------------

GOLDEN_CASES: dict[str, list[str]] = {
    "ph_12.txt": ["ph", "--max-degree", "12"],
    "denominator_1_12.csv": ["denominator", "--k-range", "1..12", "--format", "csv"],
    "coeff_flat.csv": ["coeff", "--table", "flat", "--range=-16..16", "--format", "csv"],
    "coeff_ko.csv": ["coeff", "--table", "ko", "--range=-8..8", "--format", "csv"],
    "sphere_9_differential.json": ["sphere", "--n", "9", "--variant", "differential", "--format", "json"],
    "sphere_4_differential.json": ["sphere", "--n", "4", "--variant", "differential", "--format", "json"],
    "adams_divergence.csv": ["adams", "--divergence-table", "--format", "csv"],
    "ahss_RP4.json": ["ahss", "--space", "RP4", "--totals=-1..1", "--reduced", "--format", "json"],
    "wu_CP3.txt": ["wu", "--space", "CP3"],
}


def golden_dir(default: Path | None = None) -> Path:
    env = os.environ.get(GOLDEN_ENV)
    if env:
        return Path(env)
    return default or Path.cwd() / "tests" / "golden"


def render_case(argv: list[str]) -> str:
    buf = io.StringIO()
    status = main(argv, stdout=buf, stderr=io.StringIO())
    if status != EXIT_OK:
        raise InvariantViolation(f"golden case {' '.join(argv)} exited with {status}")
    return buf.getvalue()


def cmd_verify(opts) -> Output:
    results = verification_suite()
    if opts.golden or opts.write_golden:
        base = golden_dir()
        for name, argv in GOLDEN_CASES.items():
            text = render_case(argv)
            path = base / name
            if opts.write_golden:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text)
                results.append({"check": f"golden {name} written", "ok": True})
            else:
                ok = path.exists() and path.read_text() == text
                results.append({"check": f"golden {name} regenerates unchanged", "ok": ok})
    ok = all(r["ok"] for r in results)
    text = "\n".join(f"{'pass' if r['ok'] else 'FAIL'}  {r['check']}" for r in results)
    return Output({"results": results, "ok": ok}, rows=results, text=text,
                  status=EXIT_OK if ok else EXIT_INTERNAL)


# --- parser and dispatch -----------------------------------------------------------------

HANDLERS = {"coeff": cmd_coeff, "ph": cmd_ph, "genus": cmd_genus, "ahss": cmd_ahss, "sphere": cmd_sphere,
            "denominator": cmd_denominator, "adams": cmd_adams, "wu": cmd_wu, "verify": cmd_verify}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit status 2 with a structured line
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p = _Parser(prog="diffko", description="Exact computations in differential KO-theory.")
    p.add_argument("--version", action="version", version=f"diffko {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    c = sub.add_parser("coeff", parents=[common], help="coefficient tables and products")
    c.add_argument("--table", choices=("ko", "flat"), default="ko")
    c.add_argument("--range", type=parse_range, default=(0, 7),
                   help="LO..HI; write --range=-8..8 when LO is negative")
    c.add_argument("--bott-check", type=_bounded_int(0, 64), metavar="K")
    c.add_argument("--multiply", nargs=2, metavar=("A", "B"))

    ph = sub.add_parser("ph", parents=[common], help="Pontrjagin character expansion")
    ph.add_argument("--max-degree", type=_bounded_int(0, 96), default=8)
    ph.add_argument("--rank", type=_bounded_int(0), default=0)

    g = sub.add_parser("genus", parents=[common], help="A-hat genus, its inverse, evaluation")
    g.add_argument("--name", choices=("a-hat", "a-hat-inverse"), default="a-hat")
    g.add_argument("--max-degree", type=_bounded_int(0, 96), default=8)
    g.add_argument("--total-p", help="total Pontrjagin class, e.g. '1 + 2*x1 + 7*x1^2'")
    g.add_argument("--generator", default="x:4", help="PREFIX:DEGREE of the evaluation generators")
    g.add_argument("--pairing", action="append", default=[], help="MONOMIAL=VALUE on the top degree")
    g.add_argument("--top-degree", type=_bounded_int(0, 96))

    a = sub.add_parser("ahss", parents=[common], help="spectral sequence pages and differential log")
    a.add_argument("--space", required=True, help="built-in name or presentation file")
    a.add_argument("--variant", choices=("topological", "differential"), default="topological")
    a.add_argument("--totals", type=parse_range, default=(0, 0))
    a.add_argument("--reduced", action="store_true")
    a.add_argument("--periods", action="append", default=[], help="DEG=a,b,... for the form slot")
    a.add_argument("--verbose", action="store_true")

    s = sub.add_parser("sphere", parents=[common], help="KO and differential KO of spheres")
    s.add_argument("--n", type=_bounded_int(1, 64), required=True)
    s.add_argument("--variant", choices=("topological", "differential"), default="topological")
    s.add_argument("--metric", default="round")

    d = sub.add_parser("denominator", parents=[common], help="denominator bounds for Ph")
    d.add_argument("--k-range", type=parse_range, default=(1, 12))

    ad = sub.add_parser("adams", parents=[common], help="Adams operations")
    ad.add_argument("--r", type=_bounded_int(1, 64), default=2)
    ad.add_argument("--element", help="coefficient element, e.g. 'alpha*beta'")
    ad.add_argument("--roots", help="root exponent vectors, e.g. '1,0;0,1'")
    ad.add_argument("--variant", choices=("root", "newton", "printed"), default="root")
    ad.add_argument("--divergence-table", action="store_true")
    ad.add_argument("--max-r", type=_bounded_int(1, 12), default=6)
    ad.add_argument("--max-rank", type=_bounded_int(1, 6), default=4)

    w = sub.add_parser("wu", parents=[common], help="Wu and Stiefel-Whitney classes")
    w.add_argument("--space", required=True)

    v = sub.add_parser("verify", parents=[common], help="identity suites and golden files")
    v.add_argument("--golden", action="store_true", help="compare golden files")
    v.add_argument("--write-golden", action="store_true", help="rewrite golden files")
    return p


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
    return buf.getvalue()


def _to_text(out: Output) -> str:
    if out.text is not None:
        return out.text + "\n"
    rows = out.rows or []
    if not rows:
        return json.dumps(out.data, indent=2, ensure_ascii=False) + "\n"
    cols = list(rows[0])
    widths = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols).rstrip()]
    lines += ["  ".join(str(r[c]).ljust(widths[c]) for c in cols).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def emit(out: Output, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(out.data, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        if out.rows is None:
            raise ValidationError("this result has no tabular form; use --format text or json")
        return _to_csv(out.rows)
    return _to_text(out)


def run(request: CommandRequest) -> tuple[int, str]:
    opts = argparse.Namespace(**request.options)
    out = HANDLERS[request.subcommand](opts)
    return out.status, emit(out, request.fmt)


def _diagnostic(kind: str, message: str) -> str:
    return json.dumps({"error": kind, "message": message}, ensure_ascii=False)


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(list(sys.argv[1:] if argv is None else argv))
        opts = vars(args).copy()
        sub, fmt = opts.pop("subcommand"), opts.pop("format")
        out = HANDLERS[sub](argparse.Namespace(**opts))
        stdout.write(emit(out, fmt))
        for line in out.diagnostics:
            stderr.write(_diagnostic("unsupported", line) + "\n")
        return out.status
    except InvariantViolation as exc:  # before ValueError: it is a subclass
        stderr.write(_diagnostic("invariant", str(exc)) + "\n")
        return EXIT_INTERNAL
    except UnsupportedOperation as exc:
        stderr.write(_diagnostic("unsupported", str(exc)) + "\n")
        return EXIT_UNSUPPORTED
    except (ValidationError, PresentationError, ValueError) as exc:
        stderr.write(_diagnostic("validation", str(exc)) + "\n")
        return EXIT_VALIDATION

if __name__ == "__main__":
    sys.exit(main())
