"""Command-line front end: flat key=value configs, subcommand dispatch,
certificate and sweep emission.

Exit status is 0 when the emitted report passes, 1 on a failed or
undecided certificate, 2 on usage or config errors.  Rationals are
written "a/b" everywhere; decimal columns are explicitly approximate.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from fractions import Fraction

from .certificate import Certificate
from .exact import PrecisionExhausted, parse_scalar
from .groups import FreeGroup, SearchExhausted, folner_search, translation_action
from .jsstab import standard_model, stability_report
from .repalg import alternating_wedderburn
from .verify import (
    McDuffParams,
    free_example_check,
    mcduff_certificate,
    recheck_items_float,
    shift_certificate,
)

__all__ = ["main"]

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

GRID_POINT_CAP = 10**4
MAX_GRIDS = 2

CERT_COMMANDS = ("mcduff", "shift", "wreath-js", "free-example")
LIST_COMMANDS = ("wedderburn", "folner")

# sweepable parameter names per target, and which of them are integers
SWEEPABLE = {
    "mcduff": ("epsilon", "delta", "T", "D"),
    "shift": ("epsilon",),
    "wreath-js": ("samples", "seed"),
    "free-example": ("n",),
}
INT_DESTS = ("T", "D", "samples", "seed", "n")

THEOREM_TAGS = {
    "mcduff": "alternating-mcduff",
    "shift": "shift-crossed-product",
    "wreath-js": "wreath-js-stability",
    "free-example": "free-group-markers",
}


class ConfigError(Exception):
    pass


# -- option value parsers ------------------------------------------------


def _rational(text: str) -> Fraction:
    s = text.strip()
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"expected a rational 'a/b' or integer, got {text!r}"
        ) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return v


def _uint64(text: str) -> int:
    v = _nonneg_int(text)
    if v >= 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _displacement(text: str) -> tuple:
    label, sep, raw = text.partition("=")
    if not sep:
        label, raw = None, text
    try:
        moved = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'count' or 'label=count', got {text!r}"
        ) from None
    if moved < 0:
        raise argparse.ArgumentTypeError("displacement counts are nonnegative")
    return (label.strip() if label is not None else None, moved)


def _parse_action(text: str):
    kind, _, rank_text = text.partition(":")
    if kind != "translation":
        raise ConfigError(f"unknown action {text!r}; use translation:RANK")
    try:
        rank = int(rank_text or "1")
    except ValueError:
        raise ConfigError(f"bad action rank in {text!r}") from None
    if rank < 1:
        raise ConfigError("action rank must be positive")
    return translation_action(rank)


def _parse_point(text: str, rank: int):
    parts = text.split(",")
    if len(parts) != rank:
        raise ConfigError(f"point {text!r} does not have {rank} coordinates")
    try:
        coords = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad coordinate in {text!r}") from None
    return coords[0] if rank == 1 else tuple(coords)


def _parse_points(text: str, rank: int) -> list:
    s = text.strip()
    if not s:
        return []
    return [_parse_point(p, rank) for p in s.split(";")]


_LETTERS = {"a": (1,), "b": (2,), "A": (-1,), "B": (-2,)}


def _parse_word(text: str) -> tuple:
    s = text.strip()
    if s in ("", "e"):
        return ()
    f2 = FreeGroup(2)
    word = ()
    for ch in s:
        if ch not in _LETTERS:
            raise ConfigError(f"word letter {ch!r} not in a/b/A/B")
        word = f2.multiply(word, _LETTERS[ch])
    return word


def _parse_support(text: str) -> tuple:
    word, sep, coord = text.rpartition("@")
    if not sep:
        raise ConfigError(f"support {text!r} must look like word@coord")
    try:
        k = int(coord)
    except ValueError:
        raise ConfigError(f"bad support coordinate in {text!r}") from None
    return (_parse_word(word), k)


def _parse_member(text: str) -> tuple:
    base, _, twists = text.partition("|")
    out = {}
    for entry in filter(None, (t.strip() for t in twists.split(","))):
        coord, sep, word = entry.partition(":")
        if not sep:
            raise ConfigError(f"twist {entry!r} must look like coord:word")
        try:
            k = int(coord)
        except ValueError:
            raise ConfigError(f"bad twist coordinate in {entry!r}") from None
        out[k] = _parse_word(word)
    return (_parse_word(base), out)


# -- parser construction -------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="flat key=value file; command-line flags override")
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--precision-bits", type=_positive_int, default=256,
                   help="precision of the independent floating recheck")


def _add_mcduff(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--T", type=_positive_int, required=True, help="window size")
    p.add_argument("--D", type=_positive_int, required=True, help="alternating degree")
    p.add_argument("--mode", choices=("enumerated", "bounded"), default="enumerated")
    p.add_argument("--displacement", type=_displacement, action="append", default=[],
                   metavar="COUNT|LABEL=COUNT", help="repeatable; labels default h0, h1, ...")


def _add_shift(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=_rational, required=True)
    p.add_argument("--action", default="translation:1", metavar="translation:RANK")
    p.add_argument("--F", default="0;1;-1", metavar="POINTS",
                   help="semicolon-separated group elements, identity included")
    p.add_argument("--Y", default="", metavar="POINTS",
                   help="support coordinates the window must avoid")
    p.add_argument("--size-cap", type=_positive_int, default=10**6)


def _add_wreath(p: argparse.ArgumentParser) -> None:
    p.add_argument("--f-size", type=_positive_int, default=3)
    p.add_argument("--h", type=int, default=1, help="acting element of the fiber group")
    p.add_argument("--h-order", type=_nonneg_int, default=0,
                   help="fiber modulus; 0 means infinite order")
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=_uint64, default=1)
    p.add_argument("--size-cap", type=_positive_int, default=100_000)


def _add_wedderburn(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--mode", choices=("enumerated", "bounded"), default="enumerated")


def _add_folner(p: argparse.ArgumentParser) -> None:
    p.add_argument("--action", default="translation:1", metavar="translation:RANK")
    p.add_argument("--K", required=True, metavar="POINTS",
                   help="semicolon-separated group elements to be invariant under")
    p.add_argument("--delta", type=_rational, required=True)
    p.add_argument("--size-cap", type=_positive_int, default=10**6)
    p.add_argument("--disjoint-from", default="", metavar="POINTS")


def _add_free(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_nonneg_int, required=True, help="fresh marker coordinate")
    p.add_argument("--support", action="append", default=[], metavar="WORD@COORD",
                   help="repeatable; words over a/b/A/B, e for the identity")
    p.add_argument("--member", action="append", default=[], metavar="BASE|K:WORD,...",
                   help="repeatable family element: base word plus coordinate twists")


_BUILDERS = {
    "mcduff": _add_mcduff,
    "shift": _add_shift,
    "wreath-js": _add_wreath,
    "wedderburn": _add_wedderburn,
    "folner": _add_folner,
    "free-example": _add_free,
}


def _target_parser(command: str, prog: str | None = None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=prog or f"centcert {command}")
    _BUILDERS[command](p)
    _add_common(p)
    return p


# -- config files --------------------------------------------------------


def _read_config(path: str) -> list:
    try:
        lines = open(path).read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from None
    out = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out += [f"--{key.strip().replace('_', '-')}", value.strip()]
    return out


def _expand_config(args: list) -> list:
    """Pull out --config FILE and splice the file's pairs in front, so
    explicit flags win for single-valued options."""
    rest, path = [], None
    i = 0
    while i < len(args):
        arg = args[i]
        if arg == "--config":
            if i + 1 >= len(args):
                raise ConfigError("--config needs a file argument")
            if path is not None:
                raise ConfigError("--config given twice")
            path = args[i + 1]
            i += 2
        elif arg.startswith("--config="):
            if path is not None:
                raise ConfigError("--config given twice")
            path = arg.split("=", 1)[1]
            i += 1
        else:
            rest.append(arg)
            i += 1
    if path is None:
        return rest
    return _read_config(path) + rest


# -- dispatch ------------------------------------------------------------


def _resolve_displacements(pairs: list) -> dict:
    out = {}
    for i, (label, moved) in enumerate(pairs):
        key = label if label is not None else f"h{i}"
        if key in out:
            raise ConfigError(f"duplicate displacement label {key!r}")
        out[key] = moved
    return out


def _run_mcduff(ns) -> Certificate:
    params = McDuffParams(
        eps=ns.epsilon,
        delta=ns.delta,
        T_size=ns.T,
        D_size=ns.D,
        mode=ns.mode,
        displacements=_resolve_displacements(ns.displacement),
    )
    return mcduff_certificate(params)


def _run_shift(ns) -> Certificate:
    action = _parse_action(ns.action)
    F = _parse_points(ns.F, action.box_rank)
    Y = _parse_points(ns.Y, action.box_rank)
    return shift_certificate(action, Y, F, ns.epsilon, size_cap=ns.size_cap)


def _run_wreath(ns) -> Certificate:
    model = standard_model(ns.f_size, h_modulus=ns.h_order, h=ns.h)
    return stability_report(
        model, samples=ns.samples, seed=ns.seed, size_cap=ns.size_cap
    )


def _run_free(ns) -> Certificate:
    supports = [_parse_support(s) for s in ns.support]
    family = [_parse_member(m) for m in ns.member]
    return free_example_check(ns.n, supports, family)


def _run_wedderburn(ns) -> dict:
    W = alternating_wedderburn(ns.n, mode=ns.mode)
    # past 1000! the exact decimal order stops being printable
    order = W.order if ns.n <= 1000 else f"{ns.n}!/2"
    doc = {"n": W.n, "order": order, "mode": W.mode, "k_min": W.k_min}
    if W.blocks is not None:
        blocks = [(1, W.trivial_weight)] + list(W.blocks)
        doc["degrees"] = [k for k, _ in blocks]
        doc["weights"] = [_frac_text(w) for _, w in blocks]
    return doc


def _run_folner(ns) -> dict:
    action = _parse_action(ns.action)
    K = _parse_points(ns.K, action.box_rank)
    disjoint = _parse_points(ns.disjoint_from, action.box_rank)
    fol = folner_search(action, K, ns.delta, ns.size_cap, disjoint_from=disjoint)
    return {
        "action": action.name,
        "K": [_point_doc(k) for k in fol.K],
        "delta": _frac_text(ns.delta),
        "defect": _frac_text(fol.defect),
        "T_size": len(fol.T),
        "core_size": len(fol.core),
        "T": [_point_doc(t) for t in fol.T],
        "core": [_point_doc(t) for t in fol.core],
        "pass": True,
    }


_CERT_RUNNERS = {
    "mcduff": _run_mcduff,
    "shift": _run_shift,
    "wreath-js": _run_wreath,
    "free-example": _run_free,
}
_LIST_RUNNERS = {"wedderburn": _run_wedderburn, "folner": _run_folner}


def _undecided(command: str, exc: Exception) -> Certificate:
    cert = Certificate(
        theorem=THEOREM_TAGS.get(command, command),
        params={},
        items=[],
        engine={"mode": "undecided"},
    )
    kind = "precision" if isinstance(exc, PrecisionExhausted) else "search"
    cert.add(kind, "undecided", "true", True, False, note=str(exc))
    return cert


# -- emission ------------------------------------------------------------


def _frac_text(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _point_doc(point):
    return list(point) if isinstance(point, tuple) else point


def _approx12(text: str) -> str:
    """12-digit decimal for a canonical value, empty when non-numeric."""
    try:
        return f"{float(Fraction(text)):.12g}"
    except (ValueError, ZeroDivisionError, OverflowError):
        pass
    try:
        return f"{float(parse_scalar(text).approx(96)):.12g}"
    except Exception:
        return ""


def _cert_csv(cert: Certificate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value", "value_approx", "relation", "bound", "pass", "note"])
    for it in cert.items:
        writer.writerow(
            [it.name, it.value, _approx12(it.value), it.relation, it.bound,
             "true" if it.passed else "false", it.note]
        )
    return buf.getvalue()


def _doc_cell(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, list):
        return ";".join(str(v) for v in val)
    return str(val)


def _doc_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(doc))
    writer.writerow([_doc_cell(v) for v in doc.values()])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_certificate(cert: Certificate, ns) -> int:
    checked, failures = recheck_items_float(cert, bits=ns.precision_bits)
    if failures:
        print(
            f"warning: floating recheck at {ns.precision_bits} bits disagrees "
            f"on {', '.join(failures)}",
            file=sys.stderr,
        )
    text = cert.to_json() if ns.format == "json" else _cert_csv(cert)
    _emit(text, ns.output)
    return EXIT_PASS if cert.passed else EXIT_FAIL


def _emit_doc(doc: dict, ns) -> int:
    if ns.format == "json":
        _emit(json.dumps(doc, indent=2) + "\n", ns.output)
    else:
        _emit(_doc_csv(doc), ns.output)
    return EXIT_PASS


# -- sweeps --------------------------------------------------------------


def _parse_grid(text: str, target: str) -> tuple:
    name, sep, span = text.partition("=")
    if not sep:
        raise ConfigError(f"grid {text!r} must look like name=start:stop:step")
    dest = name.strip().replace("-", "_")
    allowed = {s.replace("-", "_") for s in SWEEPABLE[target]}
    if dest not in allowed:
        raise ConfigError(
            f"cannot sweep {name.strip()!r} for {target}; "
            f"choose from {', '.join(sorted(allowed))}"
        )
    parts = span.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} must look like name=start:stop:step")
    try:
        start, stop, step = (_rational(p) for p in parts)
    except argparse.ArgumentTypeError as e:
        raise ConfigError(f"grid {text!r}: {e}") from None
    if step <= 0:
        raise ConfigError("grid step must be positive")
    values = []
    v = start
    while v <= stop:
        values.append(v)
        v += step
        if len(values) > GRID_POINT_CAP:
            break
    if dest in INT_DESTS:
        for v in values:
            if v.denominator != 1:
                raise ConfigError(f"{name.strip()} takes integer values")
        values = [int(v) for v in values]
    return dest, values


def _run_sweep(argv: list) -> int:
    if not argv:
        print("usage: centcert sweep TARGET [options] --grid name=start:stop:step",
              file=sys.stderr)
        return EXIT_USAGE
    target = argv[0]
    if target not in SWEEPABLE:
        print(
            f"centcert sweep: target {target!r} is not sweepable; "
            f"choose from {', '.join(SWEEPABLE)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    parser = _target_parser(target, prog=f"centcert sweep {target}")
    parser.add_argument("--grid", action="append", default=[],
                        metavar="NAME=START:STOP:STEP")
    try:
        ns = parser.parse_args(_expand_config(argv[1:]))
    except SystemExit as exc:
        return EXIT_PASS if exc.code in (0, None) else EXIT_USAGE

    grids = [_parse_grid(g, target) for g in ns.grid]
    if not grids:
        raise ConfigError("sweep needs at least one --grid")
    if len(grids) > MAX_GRIDS:
        raise ConfigError(f"at most {MAX_GRIDS} grid parameters")
    total = 1
    for _, values in grids:
        total *= len(values)
    if total > GRID_POINT_CAP:
        raise ConfigError(f"grid has {total} points, cap is {GRID_POINT_CAP}")

    points = [()]
    for dest, values in grids:
        points = [p + ((dest, v),) for p in points for v in values]
    if not all(values for _, values in grids):
        points = []

    rows, item_names, all_pass = [], [], True
    for assignment in points:
        case = copy.copy(ns)
        for dest, v in assignment:
            setattr(case, dest, v)
        cert = _dispatch_certificate(target, case)
        all_pass = all_pass and cert.passed
        for it in cert.items:
            if it.name not in item_names:
                item_names.append(it.name)
        rows.append((assignment, cert))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [dest for dest, _ in grids] + ["pass"]
    for name in item_names:
        header += [name, f"{name}.approx", f"{name}.pass"]
    writer.writerow(header)
    for assignment, cert in rows:
        row = [_grid_cell(v) for _, v in assignment]
        row.append("true" if cert.passed else "false")
        by_name = {it.name: it for it in cert.items}
        for name in item_names:
            it = by_name.get(name)
            if it is None:
                row += ["", "", ""]
            else:
                row += [it.value, _approx12(it.value),
                        "true" if it.passed else "false"]
        writer.writerow(row)
    _emit(buf.getvalue(), ns.output)
    return EXIT_PASS if all_pass else EXIT_FAIL


def _grid_cell(v) -> str:
    return _frac_text(v) if isinstance(v, Fraction) else str(v)


def _dispatch_certificate(target: str, ns) -> Certificate:
    try:
        return _CERT_RUNNERS[target](ns)
    except (SearchExhausted, PrecisionExhausted) as exc:
        return _undecided(target, exc)


# -- entry ---------------------------------------------------------------


def _usage() -> str:
    return (
        "usage: centcert COMMAND [options]\n"
        f"certificate commands: {', '.join(CERT_COMMANDS)}\n"
        f"listing commands: {', '.join(LIST_COMMANDS)}\n"
        "batch: sweep TARGET [options] --grid name=start:stop:step\n"
        "run 'centcert COMMAND --help' for options\n"
    )


def main(argv: list | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if not args or args[0] in ("-h", "--help"):
        stream = sys.stderr if not args else sys.stdout
        stream.write(_usage())
        return EXIT_USAGE if not args else EXIT_PASS
    command, rest = args[0], args[1:]
    try:
        if command == "sweep":
            return _run_sweep(rest)
        if command not in _BUILDERS:
            print(f"centcert: unknown command {command!r}", file=sys.stderr)
            print(_usage(), end="", file=sys.stderr)
            return EXIT_USAGE
        parser = _target_parser(command)
        try:
            ns = parser.parse_args(_expand_config(rest))
        except SystemExit as exc:
            return EXIT_PASS if exc.code in (0, None) else EXIT_USAGE
        if command in _LIST_RUNNERS:
            try:
                doc = _LIST_RUNNERS[command](ns)
            except SearchExhausted as exc:
                _emit_doc({"pass": False, "undecided": str(exc)}, ns)
                return EXIT_FAIL
            return _emit_doc(doc, ns)
        try:
            cert = _CERT_RUNNERS[command](ns)
        except (SearchExhausted, PrecisionExhausted) as exc:
            return _emit_certificate(_undecided(command, exc), ns)
        return _emit_certificate(cert, ns)
    except ConfigError as exc:
        print(f"centcert: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"centcert: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
