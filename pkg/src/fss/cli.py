"""``fss`` command-line interface.

Commands::

    fss check  INPUT [--set t=1/2] [--weight-window N] [--weights full|none]
    fss pages  INPUT [...] [--max-page R]
    fss hodge  INPUT [...]
    fss sweep  INPUT [--samples 0,1/2,1,i/3]
    fss builtin-list

``INPUT`` is a ``.fss`` file or the name of a builtin model.  Exit codes:
0 success, 1 internal consistency failure, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .bicomplex import Bicomplex, BicomplexError, StructurePresentation, expand
from .dsl import ParseError, parse, roundtrip
from .hodge import HodgeError, build_hodge, ker_lapt_dims, three_space_decomposition
from .models import catalog
from .scalars import Scalar, ScalarParseError
from .spectral import ConsistencyError, einf_and_degeneration, pageset_to_dict, table_order

__all__ = ["main", "RunConfig", "Report", "render", "DEFAULT_SWEEP"]

EXIT_OK = 0
EXIT_CONSISTENCY = 1
EXIT_INPUT = 2
DEFAULT_SWEEP = ("0", "1/2", "1", "i/3")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    input: str
    assignments: Dict[str, Scalar] = field(default_factory=dict)
    weight_window: Optional[int] = None
    weights: str = "full"
    max_page: Optional[int] = None
    fmt: str = "markdown"
    out: Optional[str] = None


@dataclass
class Report:
    command: str
    title: str
    columns: List[str]
    rows: List[List[Any]]
    notes: List[str] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = EXIT_OK


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _cell(x) -> str:
    if isinstance(x, bool):
        return "yes" if x else "no"
    return str(x)


def render(rep: Report, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "schema": 1,
            "command": rep.command,
            "title": rep.title,
            "columns": rep.columns,
            "rows": rep.rows,
            "notes": rep.notes,
        }
        doc.update(rep.extra)
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rep.columns)
        for row in rep.rows:
            w.writerow([_cell(x) for x in row])
        for note in rep.notes:
            buf.write(f"# {note}\n")
        return buf.getvalue()
    if fmt == "markdown":
        cells = [[_cell(x) for x in row] for row in rep.rows]
        widths = [len(c) for c in rep.columns]
        for row in cells:
            for i, c in enumerate(row):
                widths[i] = max(widths[i], len(c))
        lines = [f"## {rep.title}", ""]
        lines.append("| " + " | ".join(c.ljust(w) for c, w in zip(rep.columns, widths)) + " |")
        lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
        for row in cells:
            lines.append("| " + " | ".join(c.ljust(w) for c, w in zip(row, widths)) + " |")
        if rep.notes:
            lines.append("")
            lines.extend(rep.notes)
        return "\n".join(lines) + "\n"
    raise InputError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# input handling
# --------------------------------------------------------------------------


def load_presentation(target: str) -> Tuple[StructurePresentation, str, str]:
    """Return ``(presentation, canonical source, display name)``."""
    if os.path.exists(target):
        try:
            with open(target, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {target}: {exc.strerror}") from exc
        pres = parse(data, target)
        return pres, roundtrip(pres), target
    cat = catalog()
    if target in cat:
        fam = cat[target]
        return fam.presentation, fam.source(), target
    raise InputError(f"no such file or builtin model: {target!r} (see `fss builtin-list`)")


def _values(pres: StructurePresentation, assignments: Dict[str, Scalar]) -> Dict[str, Scalar]:
    for name in assignments:
        if name not in pres.params:
            declared = ", ".join(pres.params) or "none"
            raise InputError(f"--set {name}: not a declared parameter (declared: {declared})")
    return {p: assignments.get(p, Scalar(0)) for p in pres.params}


def _expand(pres: StructurePresentation, values, cfg: RunConfig, name: str) -> Bicomplex:
    return expand(pres, values, weight_cutoff=cfg.weight_window, weights=cfg.weights, name=name)


def _setting_note(values: Dict[str, Scalar]) -> List[str]:
    return [f"{k} = {v}" for k, v in values.items()]


def _truncation_notes(B: Bicomplex, cfg: RunConfig, pres: StructurePresentation) -> List[str]:
    if cfg.weights == "none" or not B.truncated_rule_terms:
        return []
    W = pres.weight_cutoff if cfg.weight_window is None else cfg.weight_window
    return [f"warning: weight window {W} truncates {t}" for t in B.truncated_rule_terms]


def _bd(bd) -> str:
    return f"({bd[0]},{bd[1]})"


# --------------------------------------------------------------------------
# analysis shared by pages / hodge / sweep
# --------------------------------------------------------------------------


def analyze(source: str, name: str, values: Dict[str, str], weight_window, weights, want_hodge: bool) -> dict:
    """Pure per-sample computation; arguments are plain data so it pickles."""
    pres = parse(source, name)
    vals = {k: Scalar.parse(v) for k, v in values.items()}
    B = expand(pres, vals, weight_cutoff=weight_window, weights=weights, name=name)
    ps = einf_and_degeneration(B)
    order = table_order(B.n)
    out = {
        "order": order,
        "dims": [B.dim(*bd) for bd in order],
        "h": ps.profile(1),
        "e2": ps.profile(2) if ps.r_max >= 2 else ps.profile(1),
        "pages": [ps.profile(r) for r in range(1, ps.r_max + 1)],
        "einf": [ps.einf_dims.get(bd, 0) for bd in order],
        "betti": ps.betti,
        "step": ps.degeneration_step,
        "truncated": list(B.truncated_rule_terms),
    }
    if want_hodge:
        H = build_hodge(B)
        k = ker_lapt_dims(H)
        out["ht"] = [k[bd] for bd in order]
        out["harmonic"] = [H.harmonic_dims(*bd) for bd in order]
        out["decomp"] = [list(three_space_decomposition(H, *bd).dims) for bd in order]
    return out


def _parallel() -> bool:
    return os.environ.get("FSS_NO_PARALLEL", "") not in ("1", "true", "yes")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_check(cfg: RunConfig) -> Report:
    pres, _, name = load_presentation(cfg.input)
    values = _values(pres, cfg.assignments)
    B = _expand(pres, values, cfg, name)
    rows = [[_bd(bd), B.dim(*bd)] for bd in table_order(B.n)]
    notes = _setting_note(values) + [
        f"generators: {len(pres.odd_generators)}",
        f"weight symbol: {pres.weight_symbol or 'none'}",
        "validation: d^2 = 0, del^2 = 0, delbar^2 = 0, anticommutation hold",
    ]
    notes += _truncation_notes(B, cfg, pres)
    return Report("check", f"check {name}", ["bidegree", "dim"], rows, notes)


def cmd_pages(cfg: RunConfig) -> Report:
    pres, source, name = load_presentation(cfg.input)
    values = _values(pres, cfg.assignments)
    B = _expand(pres, values, cfg, name)
    ps = einf_and_degeneration(B)
    R = ps.r_max if cfg.max_page is None else max(1, min(cfg.max_page, ps.r_max))
    order = table_order(B.n)
    cols = ["bidegree", "b_k"] + [f"E{r}" for r in range(1, R + 1)] + ["Einf"]
    rows = []
    for bd in order:
        k = bd[0] + bd[1]
        rows.append([_bd(bd), ps.betti[k]] + [ps.page(r).dim(*bd) for r in range(1, R + 1)] + [ps.einf_dims[bd]])
    notes = _setting_note(values)
    notes.append("betti: " + ", ".join(str(b) for b in ps.betti))
    if ps.r_max >= 2:
        for k, b in enumerate(ps.betti):
            s = sum(ps.page(2).dim(p, k - p) for p in range(k + 1) if B.in_range(p, k - p))
            if s != b:
                notes.append(f"degree {k}: sum of e2 = {s} != b_{k} = {b}")
    notes.append(f"degeneration step: {ps.degeneration_step}")
    notes += _truncation_notes(B, cfg, pres)
    extra = {"pageset": pageset_to_dict(ps, B, R)}
    return Report("pages", f"pages {name}", cols, rows, notes, extra)


def cmd_hodge(cfg: RunConfig) -> Report:
    pres, source, name = load_presentation(cfg.input)
    values = _values(pres, cfg.assignments)
    B = _expand(pres, values, cfg, name)
    res = analyze(source, name, {k: str(v) for k, v in values.items()}, cfg.weight_window, cfg.weights, True)
    cols = ["bidegree", "h", "e2", "ker_lapt", "match", "decomposition"]
    rows = []
    mismatch = []
    for i, bd in enumerate(res["order"]):
        ok = res["ht"][i] == res["e2"][i]
        if not ok:
            mismatch.append(bd)
        rows.append([_bd(bd), res["h"][i], res["e2"][i], res["ht"][i], ok, "+".join(str(x) for x in res["decomp"][i])])
    notes = _setting_note(values)
    notes.append("operator identities: lapt self-adjoint, lapt = sum M*M, three-space decomposition verified")
    if mismatch:
        notes.append("FAIL: dim ker lapt != dim E2 at " + ", ".join(_bd(b) for b in mismatch))
    else:
        notes.append("dim ker lapt = dim E2 at every bidegree")
    notes += _truncation_notes(B, cfg, pres)
    rep = Report("hodge", f"hodge {name}", cols, rows, notes)
    if mismatch:
        rep.exit_code = EXIT_CONSISTENCY
    return rep


def classify(base, generic_values: Sequence[int]) -> str:
    """Compare the value at the base point with the common value elsewhere."""
    if not generic_values:
        return "constant"
    if len(set(generic_values)) > 1:
        return "genericity violation"
    g = generic_values[0]
    if base > g:
        return "upper"
    if base < g:
        return "lower"
    return "constant"


def cmd_sweep(cfg: RunConfig, samples: Sequence[str]) -> Report:
    if not samples:
        raise InputError("--samples must list at least one value")
    pres, source, name = load_presentation(cfg.input)
    if not pres.params:
        param = None
    else:
        param = pres.params[0]
    parsed = []
    for s in samples:
        try:
            parsed.append(Scalar.parse(s))
        except ScalarParseError as exc:
            raise InputError(f"bad sample {s!r}: {exc}") from exc
    base_values = _values(pres, cfg.assignments)
    jobs = []
    for v in parsed:
        vals = {k: str(x) for k, x in base_values.items()}
        if param is not None:
            vals[param] = str(v)
        jobs.append((source, name, vals, cfg.weight_window, cfg.weights, True))
    if _parallel() and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(len(jobs), os.cpu_count() or 1)) as ex:
            results = list(ex.map(analyze, *zip(*jobs)))
    else:
        results = [analyze(*j) for j in jobs]
    order = results[0]["order"]
    cols = ["sample", "bidegree", "h", "e2", "ker_lapt", "step"]
    rows = []
    for v, res in zip(parsed, results):
        for i, bd in enumerate(order):
            rows.append([str(v), _bd(bd), res["h"][i], res["e2"][i], res["ht"][i], res["step"]])
    notes = [f"parameter: {param or 'none'}; base point {parsed[0]}"]
    summary = []
    h_varies = []
    for i, bd in enumerate(order):
        e2 = [r["e2"][i] for r in results]
        h = [r["h"][i] for r in results]
        cls = classify(e2[0], e2[1:])
        summary.append({"bidegree": list(bd), "e2": e2, "h": h, "e2_class": cls, "h_class": classify(h[0], h[1:])})
        if cls != "constant":
            tail = " -> ".join(str(x) for x in sorted(set(e2[1:]))) if e2[1:] else ""
            notes.append(f"e2{_bd(bd)}: {cls} ({e2[0]} -> {tail})")
        if len(set(h)) > 1:
            h_varies.append(f"h{_bd(bd)}: " + ", ".join(str(x) for x in h))
    if h_varies:
        notes.append("HODGE NUMBERS VARY: constant-h assumption fails across the samples")
        notes.extend("  " + s for s in h_varies)
    mism = [str(v) for v, r in zip(parsed, results) if r["ht"] != r["e2"]]
    exit_code = EXIT_OK
    if mism:
        notes.append("FAIL: dim ker lapt != dim E2 at samples " + ", ".join(mism))
        exit_code = EXIT_CONSISTENCY
    steps = ", ".join(f"{v}: {r['step']}" for v, r in zip(parsed, results))
    notes.append(f"degeneration steps: {steps}")
    betti = {tuple(r["betti"]) for r in results}
    if len(betti) > 1:
        notes.append("FAIL: Betti numbers vary across samples")
        exit_code = EXIT_CONSISTENCY
    extra = {"summary": summary, "samples": [str(v) for v in parsed]}
    rep = Report("sweep", f"sweep {name}", cols, rows, notes, extra, exit_code)
    return rep


def cmd_builtin_list() -> Report:
    rows = []
    for name, fam in catalog().items():
        rows.append([name, fam.param or "-", ", ".join(str(s) for s in fam.samples), fam.doc])
    return Report("builtin-list", "builtin models", ["name", "param", "samples", "description"], rows)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _assignment(text: str) -> Tuple[str, Scalar]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    name, value = text.split("=", 1)
    try:
        return name.strip(), Scalar.parse(value.strip())
    except ScalarParseError as exc:
        raise argparse.ArgumentTypeError(f"bad value in {text!r}: {exc}") from exc


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fss", description="Frölicher spectral sequences of finite double complexes.")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help=".fss file or builtin model name")
    common.add_argument("--set", dest="assignments", action="append", type=_assignment, default=[], metavar="NAME=VALUE")
    common.add_argument("--weight-window", type=_nonneg, default=None, metavar="N")
    common.add_argument("--weights", choices=("full", "none"), default="full")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "markdown"), default="markdown")
    common.add_argument("--out", default=None, metavar="PATH")

    sub.add_parser("check", parents=[common], help="expand and validate a model")
    p = sub.add_parser("pages", parents=[common], help="page dimensions, Betti numbers, degeneration step")
    p.add_argument("--max-page", type=_nonneg, default=None, metavar="R")
    sub.add_parser("hodge", parents=[common], help="kernel of the modified Laplacian vs E2")
    s = sub.add_parser("sweep", parents=[common], help="run over parameter samples and classify jumps")
    s.add_argument("--samples", default=",".join(DEFAULT_SWEEP), help="comma-separated values (first is the base point)")
    b = sub.add_parser("builtin-list", help="list builtin models")
    b.add_argument("--format", dest="fmt", choices=("json", "csv", "markdown"), default="markdown")
    b.add_argument("--out", default=None, metavar="PATH")
    return ap


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "builtin-list":
            rep = cmd_builtin_list()
        else:
            cfg = RunConfig(
                input=args.input,
                assignments=dict(args.assignments),
                weight_window=args.weight_window,
                weights=args.weights,
                max_page=getattr(args, "max_page", None),
                fmt=args.fmt,
                out=args.out,
            )
            if args.command == "check":
                rep = cmd_check(cfg)
            elif args.command == "pages":
                rep = cmd_pages(cfg)
            elif args.command == "hodge":
                rep = cmd_hodge(cfg)
            else:
                samples = [s.strip() for s in args.samples.split(",") if s.strip()]
                rep = cmd_sweep(cfg, samples)
    except ParseError as exc:
        for d in exc.diagnostics:
            print(f"{exc.path}:{d}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, BicomplexError, ScalarParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConsistencyError, HodgeError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    for note in rep.notes:
        if note.startswith("warning:"):
            print(note, file=sys.stderr)
    try:
        _emit(render(rep, args.fmt), args.out)
    except BrokenPipeError:
        # reader went away (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return rep.exit_code
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    if rep.exit_code == EXIT_CONSISTENCY:
        # show both tables side by side on failure
        print(render(rep, "markdown"), file=sys.stderr, end="")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
