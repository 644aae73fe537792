"""Command-line front end.

Subcommands: box, distill, comm, distance, survey3, reproduce-example,
sample.  Reports print to stdout as JSON (default) or CSV; rationals are
always "p/q" strings and bitstring keys put party 1 leftmost.

Exit codes: 0 success, 1 invariant or reproduction failure, 2 usage or
parse error.
"""

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .anf import BooleanFunctionANF, monomial_structure
from .boxes import is_nonsignaling, subset_outputs_uniform
from .comm import (
    channels_distill_bound,
    channels_scratch,
    corollary_holds,
    make_isolation_plan,
    survey_three_party,
)
from .distill import DistillationTrace, distill_to, t_map
from .encoding import format_bits, format_rational, index_to_bits, parse_bits, parse_rational
from .localdist import CertificateError, DEFAULT_PARTY_CAP, l1_distance_to_local
from .reproduce import run_reproduction
from .specdoc import SpecDocumentError, load_box_document, parse_box_document
from .wiring import sample_many


def _read_spec(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecDocumentError("", f"cannot read {path}: {exc.strerror}") from exc
    return load_box_document(text)


def _emit(args, payload: dict, csv_rows):
    """Print one report: JSON as-is, CSV from (header, rows) pairs."""
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return
    out = io.StringIO()
    writer = csv.writer(out)
    for header, rows in csv_rows:
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    sys.stdout.write(out.getvalue())


# -- box ---------------------------------------------------------------


def cmd_box(args) -> int:
    box = _read_spec(args.spec)
    ns = is_nonsignaling(box)
    uniform = subset_outputs_uniform(box, box.n - 1) if box.n >= 2 else True
    support = {
        format_bits(index_to_bits(xi, box.n)): len(box.support(xi))
        for xi in range(1 << box.n)
    }
    payload = {
        "n": box.n,
        "support_sizes": support,
        "nonsignaling": bool(ns),
        "subset_outputs_uniform": uniform,
    }
    if not ns:
        payload["signaling_witness"] = {
            "subset": list(ns.subset),
            "x": format_bits(index_to_bits(ns.x_index, box.n)),
            "x_alt": format_bits(index_to_bits(ns.x_alt_index, box.n)),
        }
    rows = [
        (("field", "value"),
         [("n", box.n), ("nonsignaling", ns.ok), ("subset_outputs_uniform", uniform)]),
        (("input", "support_size"), sorted(support.items())),
    ]
    _emit(args, payload, rows)
    if args.check and not (ns.ok and uniform):
        return 1
    return 0


# -- distill -----------------------------------------------------------


def cmd_distill(args) -> int:
    eps0 = parse_rational(args.epsilon)
    if args.rounds is not None:
        eps = eps0
        if not 0 < eps < 1:
            raise ValueError(f"epsilon={eps} outside (0, 1)")
        seq = [eps]
        for _ in range(args.rounds):
            seq.append(t_map(args.n, seq[-1]))
        trace = DistillationTrace(args.n, tuple(seq))
    else:
        trace = distill_to(
            args.n, eps0, parse_rational(args.delta),
            audit_boxlevel=args.audit_boxlevel,
        )
    trace.verify()
    payload = {
        "n": trace.n,
        "rounds": trace.rounds,
        "copies_used": trace.copies_used,
        "epsilons": [format_rational(e) for e in trace.epsilons],
    }
    if trace.delta is not None:
        payload["delta"] = format_rational(trace.delta)
        payload["final_lower_bound"] = format_rational(trace.final_lower_bound())
    if trace.tail_bounds:
        payload["tail_bounds"] = [
            [format_rational(lo), format_rational(hi)] for lo, hi in trace.tail_bounds
        ]
    rows = [(("round", "kind", "lo", "hi"), [])]
    for k, e in enumerate(trace.epsilons):
        rows[0][1].append((k, "exact", format_rational(e), format_rational(e)))
    for k, (lo, hi) in enumerate(trace.tail_bounds, start=len(trace.epsilons)):
        rows[0][1].append((k, "enclosure", format_rational(lo), format_rational(hi)))
    _emit(args, payload, rows)
    return 0


# -- comm --------------------------------------------------------------


def _comm_function(path: str) -> BooleanFunctionANF:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecDocumentError("", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise SpecDocumentError(
            "", f"not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from exc
    if not isinstance(doc, dict) or doc.get("kind") != "full_correlation":
        raise SpecDocumentError(
            "kind", "channel accounting needs a full_correlation box spec"
        )
    parse_box_document(doc)  # full strict validation
    return BooleanFunctionANF.from_terms(
        doc["n"], [list(t) for t in doc["anf"]]
    )


def cmd_comm(args) -> int:
    f = _comm_function(args.spec)
    s = monomial_structure(f)
    n = f.n
    payload = {
        "n": n,
        "anf": f.serialize(),
        "j": sorted(sorted(m) for m in s.j_set),
        "components": [
            sorted(sorted(m) for m in comp) for comp in s.components
        ],
        "n_j": s.n_j,
        "m": [[sorted(mono), cnt] for mono, cnt in
              sorted(s.m.items(), key=lambda kv: sorted(kv[0]))],
        "support": sorted(s.support),
    }
    if not s.j_set:
        payload["notice"] = "no degree >= 2 monomials; the box is local"
    elif s.n_j != 1:
        payload["notice"] = f"theorem hypothesis not met (n_J = {s.n_j}, needs 1)"
    else:
        payload["scratch_channels"] = channels_scratch(s)
        payload["distill_channel_bound"] = channels_distill_bound(s, n)
        payload["corollary_holds"] = corollary_holds(s, n)
        try:
            payload["plan"] = make_isolation_plan(s, n).as_dict()
        except ValueError as exc:
            payload["plan_unavailable"] = str(exc)
    rows = [(("field", "value"), [(k, json.dumps(v)) for k, v in payload.items()])]
    _emit(args, payload, rows)
    return 0


# -- distance ----------------------------------------------------------


def cmd_distance(args) -> int:
    box = _read_spec(args.spec)
    cert = l1_distance_to_local(
        box,
        method=args.method,
        use_symmetry=args.use_symmetry,
        party_cap=args.party_cap,
    )
    cert.verify(box)
    payload = cert.as_dict()
    rows = [
        (("field", "value"),
         [("n", payload["n"]), ("distance", payload["distance"]),
          ("method", payload["method"]), ("backend", payload["backend"]),
          ("pivots", payload["pivots"])]),
        (("vertex", "weight"), payload["weights"]),
    ]
    _emit(args, payload, rows)
    return 0


# -- survey3 -----------------------------------------------------------


def cmd_survey3(args) -> int:
    report = survey_three_party()
    orbits = [
        {
            "representative": o.representative,
            "size": o.size,
            "is_nonlocal": o.is_nonlocal,
            "n_j": o.n_j,
            "scratch": o.scratch,
            "max_m_range": list(o.max_m_range),
            "corollary_true": o.corollary_true,
            "corollary_false": o.corollary_false,
        }
        for o in report.orbits
    ]
    payload = {
        "total": report.total,
        "nonlocal_count": report.nonlocal_count,
        "orbits": orbits,
        "precondition_failures": list(report.precondition_failures),
        "all_nonlocal_satisfy_precondition":
            report.all_nonlocal_satisfy_precondition,
    }
    if report.precondition_failures:
        payload["notice"] = (
            "some non-local three-party functions fail the precondition, "
            "so the blanket claim that every one admits the certified "
            "channel saving does not follow from the corollary"
        )
    rows = [
        (("total", "nonlocal", "all_nonlocal_satisfy_precondition"),
         [(report.total, report.nonlocal_count,
           report.all_nonlocal_satisfy_precondition)]),
        (("representative", "size", "is_nonlocal", "n_j", "scratch",
          "max_m_lo", "max_m_hi", "corollary_true", "corollary_false"),
         [(o.representative, o.size, o.is_nonlocal, o.n_j,
           "" if o.scratch is None else o.scratch,
           o.max_m_range[0], o.max_m_range[1],
           o.corollary_true, o.corollary_false) for o in report.orbits]),
    ]
    _emit(args, payload, rows)
    return 0


# -- reproduce-example ---------------------------------------------------


def cmd_reproduce_example(args) -> int:
    report = run_reproduction()
    payload = report.as_dict()
    rows = [
        (("name", "tag", "expected", "computed", "ok"),
         [(it.name, it.tag, it.expected, it.computed, it.ok)
          for it in report.items]),
    ]
    _emit(args, payload, rows)
    for line in report.lines():
        print(line, file=sys.stderr)
    return 0 if report.ok else 1


# -- sample ------------------------------------------------------------


def cmd_sample(args) -> int:
    box = _read_spec(args.spec)
    bits = parse_bits(args.input, box.n)
    freq = sample_many(box, bits, args.count, args.seed)
    xi = sum(b << i for i, b in enumerate(bits))
    entries = []
    ok = True
    for ai in range(1 << box.n):
        p = box.prob_index(xi, ai)
        count = freq.get(index_to_bits(ai, box.n), 0)
        if p == 0:
            if count:
                ok = False
                entries.append({
                    "output": format_bits(index_to_bits(ai, box.n)),
                    "probability": "0/1",
                    "count": count,
                    "within_3_sigma": False,
                })
            continue
        # binomial sigma; the 3-sigma band is the acceptance contract
        sigma2 = p * (1 - p) / args.count
        dev = Fraction(count, args.count) - p
        within = dev * dev <= 9 * sigma2
        ok = ok and within
        entries.append({
            "output": format_bits(index_to_bits(ai, box.n)),
            "probability": format_rational(p),
            "count": count,
            "within_3_sigma": within,
        })
    payload = {
        "input": args.input,
        "samples": args.count,
        "seed": args.seed,
        "outputs": entries,
        "ok": ok,
    }
    rows = [
        (("output", "probability", "count", "within_3_sigma"),
         [(e["output"], e["probability"], e["count"], e["within_3_sigma"])
          for e in entries]),
    ]
    _emit(args, payload, rows)
    return 0 if ok else 1


# -- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("json", "csv"), default="json",
                     help="report format (default json)")

    parser = argparse.ArgumentParser(
        prog="nsboxes",
        description="Exact algebra for n-party non-signaling boxes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("box", parents=[fmt], help="summarize a box spec")
    p.add_argument("spec", help="path to a box specification document")
    p.add_argument("--check", action="store_true",
                   help="exit nonzero if an invariant fails")
    p.set_defaults(func=cmd_box)

    p = sub.add_parser("distill", parents=[fmt],
                       help="iterate the distillation round map")
    p.add_argument("--n", type=int, required=True, help="party count")
    p.add_argument("--epsilon", required=True, help='starting weight "p/q"')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", help='target gap "p/q": stop once 1 - eps < delta')
    group.add_argument("--rounds", type=int, help="fixed number of rounds")
    p.add_argument("--audit-boxlevel", action="store_true",
                   help="recompute the first rounds through full box composition")
    p.set_defaults(func=cmd_distill)

    p = sub.add_parser("comm", parents=[fmt],
                       help="channel accounting for a full-correlation box")
    p.add_argument("spec", help="path to a full_correlation box spec")
    p.set_defaults(func=cmd_comm)

    p = sub.add_parser("distance", parents=[fmt],
                       help="exact distance to the local polytope")
    p.add_argument("spec", help="path to a box specification document")
    p.add_argument("--method", choices=("exact", "presolve"), default="exact")
    p.add_argument("--use-symmetry", action="store_true",
                   help="quotient by even output flips (box must be invariant)")
    p.add_argument("--party-cap", type=int, default=DEFAULT_PARTY_CAP,
                   help=f"refuse larger boxes (default {DEFAULT_PARTY_CAP})")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("survey3", parents=[fmt],
                       help="channel accounting across all 3-party functions")
    p.set_defaults(func=cmd_survey3)

    p = sub.add_parser("reproduce-example", parents=[fmt],
                       help="run the worked five-party example end to end")
    p.set_defaults(func=cmd_reproduce_example)

    p = sub.add_parser("sample", parents=[fmt],
                       help="Monte Carlo frequency check at one input")
    p.add_argument("spec", help="path to a box specification document")
    p.add_argument("--input", required=True, help="input bits, party 1 leftmost")
    p.add_argument("--count", type=int, default=100_000, help="number of draws")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.set_defaults(func=cmd_sample)

    return parser


def main(argv=None) -> int:
    # exact epsilons can run to tens of thousands of digits; lift the
    # interpreter's int-to-str guard so they serialize
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SpecDocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CertificateError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AssertionError, RuntimeError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
