"""``qdm`` command-line entry point.

Exit status: 0 success, 1 usage error, 2 verification failure,
3 resource guard triggered.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from qdm import analysis, bench, multiplier
from qdm.noise import GAUSSIAN, LOGNORMAL, NoiseSpec, run_hadamard_decay

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_GUARD = 3

MAX_GATE_QUBITS = 26
MAX_DENSE_BYTES = 2 << 30
REFERENCE_NAME = "reference"


class UsageError(Exception):
    pass


class VerificationFailure(Exception):
    pass


class ResourceGuard(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _sidecar(out, suffix: str):
    """``results.csv`` -> ``results.<suffix>.csv``; stdout stays stdout."""
    if out is None or str(out) == "-":
        return None
    p = Path(out)
    return p.with_name(f"{p.stem}.{suffix}{p.suffix or '.csv'}")


def _complex_json(z: complex) -> dict:
    return {"real": z.real, "imag": z.imag}


# ---------------------------------------------------------------- commands


def cmd_bench_gates(args) -> int:
    if args.max_n > MAX_GATE_QUBITS and not args.allow_large:
        raise ResourceGuard(
            f"n={args.max_n} exceeds {MAX_GATE_QUBITS} qubits; pass --allow-large to override"
        )
    rows = bench.bench_gates(args.min_n, args.max_n, args.reps)
    header = ["n", "target", "algorithm", "reps", "seconds", "nnz"]
    if args.format == "json":
        doc = {"command": "bench-gates", "rows": [dict(zip(header, _row(r))) for r in rows]}
        _emit(_json_text(doc), args.out)
    else:
        _emit(_csv_text(header, [_row(r) for r in rows]), args.out)
    return EXIT_OK


def _row(r: bench.GateBenchRow):
    return (r.n, r.target, r.algorithm, r.reps, r.seconds, r.nnz)


def cmd_bench_swap(args) -> int:
    dense_bytes = 16 * 4**args.n
    if dense_bytes > MAX_DENSE_BYTES and not args.allow_large:
        raise ResourceGuard(
            f"n={args.n} needs {dense_bytes >> 20} MiB per matrix; pass --allow-large to override"
        )
    try:
        rows, same = bench.bench_swap_vs_mult(
            args.n, args.ops, args.control, args.target, seed=args.seed
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not same:
        raise VerificationFailure("swap and multiply paths produced different matrices")
    header = ["n", "control", "target", "algorithm", "ops", "seconds"]
    table = [(r.n, r.control, r.target, r.algorithm, r.ops, r.seconds) for r in rows]
    if args.format == "json":
        doc = {
            "command": "bench-swap",
            "identical": same,
            "rows": [dict(zip(header, t)) for t in table],
        }
        _emit(_json_text(doc), args.out)
    else:
        _emit(_csv_text(header, table), args.out)
    return EXIT_OK


def _decay_specs(args) -> dict:
    families = [GAUSSIAN, LOGNORMAL] if args.dist == "both" else [args.dist]
    return {f: NoiseSpec.from_name(f, args.variance) for f in families}


def cmd_hadamard_decay(args) -> int:
    if args.trials < 1 or args.apps < 2 or args.apps % 2:
        raise UsageError("--trials must be >= 1 and --apps a positive even number")
    seeds = np.random.SeedSequence(args.seed).spawn(2)
    results = {}
    for family, spec in _decay_specs(args).items():
        seed = seeds[0 if family == GAUSSIAN else 1]
        results[family] = run_hadamard_decay(
            args.n, args.apps, args.trials, spec, seed=seed, threads=args.threads
        )

    series = []
    for family, res in results.items():
        for step, mean, imag in zip(res.steps, res.means, res.imag_max):
            series.append((family, int(step), float(mean), float(imag)))

    tests = []
    if len(results) == 2 and args.trials >= 30:
        g, l = results[GAUSSIAN], results[LOGNORMAL]
        for step in g.steps:
            t = analysis.ztest_one_sided(g.at(step), l.at(step), alpha=args.alpha)
            tests.append((int(step), t.statistic, t.p_value, t.power))

    header = ["dist", "step", "mean_real", "mean_imag_max"]
    test_header = ["step", "statistic", "p_value", "power"]
    if args.format == "json":
        doc = {
            "command": "hadamard-decay",
            "n": args.n,
            "trials": args.trials,
            "applications": args.apps,
            "variance": args.variance,
            "seed": args.seed,
            "series": [dict(zip(header, s)) for s in series],
            "ztest": [dict(zip(test_header, t)) for t in tests],
        }
        _emit(_json_text(doc), args.out)
    else:
        _emit(_csv_text(header, series), args.out)
        if tests:
            side = _sidecar(args.out, "ztest")
            text = _csv_text(test_header, tests)
            if side is None:
                sys.stdout.write("\n" + text)
            else:
                _emit(text, side)
    return EXIT_OK


def _load_circuits(paths):
    if not paths:
        raise UsageError("--circuit is required")
    circuits = []
    for p in paths:
        if p == REFERENCE_NAME:
            circuits.append((REFERENCE_NAME, multiplier.REFERENCE_CIRCUIT))
            continue
        try:
            circuits.append((Path(p).stem, multiplier.read_circuit(p)))
        except multiplier.CircuitFormatError as exc:
            raise UsageError(f"{p}: {exc}") from exc
        except OSError as exc:
            raise UsageError(f"{p}: {exc.strerror}") from exc
    return circuits


def cmd_multiplier(args) -> int:
    return {"search": _mult_search, "verify": _mult_verify, "noisy": _mult_noisy}[args.action](args)


def _mult_search(args) -> int:
    found = multiplier.search_circuits(args.max_gates)
    names = [f"soln{k}" for k in range(1, len(found) + 1)]
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, c in zip(names, found):
            multiplier.write_circuit(outdir / f"{name}.txt", c, comment=name)
    header = ["name", "gates", "circuit"]
    rows = [(name, len(c), "; ".join(map(str, c))) for name, c in zip(names, found)]
    if args.format == "json":
        doc = {
            "command": "multiplier-search",
            "max_gates": args.max_gates,
            "circuits": [dict(zip(header, r)) for r in rows],
        }
        text = _json_text(doc)
    else:
        text = _csv_text(header, rows)
    if args.out is not None:
        (Path(args.out) / ("index.json" if args.format == "json" else "index.csv")).write_text(
            text, encoding="utf-8"
        )
    else:
        sys.stdout.write(text)
    print(f"found {len(found)} circuit(s)", file=sys.stderr)
    return EXIT_OK


def _truth_rows(circuit):
    rows = []
    for (x, y, w, z), product in multiplier.multiplier_truth_table().items():
        out = multiplier.simulate_classical(circuit, (x, y, z, w, 0, 0, 0, 0))
        ok = out == (x, y, z, w) + product
        rows.append((x, y, z, w) + tuple(out[4:]) + (ok,))
    return rows


def _mult_verify(args) -> int:
    header = ["circuit", "x", "y", "z", "w", "a0", "a1", "a2", "a3", "ok"]
    table, verdicts = [], {}
    for name, circuit in _load_circuits(args.circuit):
        valid = multiplier.verify_multiplier(circuit)
        verdicts[name] = valid
        print(f"{name}: {'valid' if valid else 'INVALID'}", file=sys.stderr)
        for row in _truth_rows(circuit):
            table.append((name,) + row[:-1] + (int(row[-1]),))
    if args.format == "json":
        doc = {
            "command": "multiplier-verify",
            "circuits": [
                {
                    "name": name,
                    "valid": ok,
                    "rows": [dict(zip(header[1:], r[1:])) for r in table if r[0] == name],
                }
                for name, ok in verdicts.items()
            ],
        }
        _emit(_json_text(doc), args.out)
    else:
        _emit(_csv_text(header, table), args.out)
    if not all(verdicts.values()):
        raise VerificationFailure("circuit does not implement the multiplier")
    return EXIT_OK


def _entry_label(r: int, c: int) -> str:
    return f"({r},{c})"


def _mult_noisy(args) -> int:
    circuits = _load_circuits(args.circuit)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    spec = NoiseSpec.from_name(args.dist, args.variance)
    seeds = np.random.SeedSequence(args.seed).spawn(len(circuits))
    results = {}
    for (name, circuit), seed in zip(circuits, seeds):
        try:
            results[name] = multiplier.run_noisy_multiplier(
                circuit, spec, args.samples, seed=seed, threads=args.threads
            )
        except multiplier.UnverifiedCircuitError as exc:
            raise VerificationFailure(f"{name}: {exc}") from exc

    first = next(iter(results.values()))
    support = first.support
    anova = None
    if len(results) >= 2 and args.samples >= 2:
        groups = [r.target_samples for r in results.values()]
        anova = analysis.anova_one_way(groups)

    names = list(results)
    header = ["entry"] + names + ["ideal"]
    rows = []
    for c in support:
        for r in support:
            ideal = 1.0 if r == c == first.ideal_index else 0.0
            rows.append(
                [_entry_label(r, c)]
                + [results[n].entry(r, c).real for n in names]
                + [ideal]
            )
    rows.append(["trace_distance"] + [results[n].report.trace_distance for n in names] + [0.0])
    rows.append(["fidelity"] + [results[n].report.fidelity for n in names] + [1.0])

    if args.format == "json":
        doc = {
            "command": "multiplier-noisy",
            "samples": args.samples,
            "variance": args.variance,
            "dist": args.dist,
            "seed": args.seed,
            "circuits": [
                {
                    "name": n,
                    "input_index": results[n].input_index,
                    "ideal_index": results[n].ideal_index,
                    "support": list(results[n].support),
                    "entries": [
                        {"row": r, "col": c, **_complex_json(v)}
                        for r, c, v in results[n].report.support
                    ],
                    "trace_distance": results[n].report.trace_distance,
                    "fidelity": results[n].report.fidelity,
                }
                for n in names
            ],
            "anova": None
            if anova is None
            else {"statistic": anova.statistic, "p_value": anova.p_value},
        }
        _emit(_json_text(doc), args.out)
    else:
        _emit(_csv_text(header, rows), args.out)
        if anova is not None:
            text = _csv_text(["statistic", "p_value", "groups"], [(anova.statistic, anova.p_value, len(names))])
            side = _sidecar(args.out, "anova")
            if side is None:
                sys.stdout.write("\n" + text)
            else:
                _emit(text, side)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _global_options(parser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    parser.add_argument("--threads", type=int, default=default(1), help="worker threads for Monte-Carlo runs")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdm", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bench-gates", parents=[common], help="time both gate constructions")
    p.add_argument("--min-n", type=int, default=8)
    p.add_argument("--max-n", type=int, default=14)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_gates)

    p = sub.add_parser("bench-swap", parents=[common], help="time swap vs multiply CNOTs")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--ops", type=int, default=1000)
    p.add_argument("--control", type=int, default=2)
    p.add_argument("--target", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench_swap)

    p = sub.add_parser("hadamard-decay", parents=[common], help="noisy Hadamard degradation")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--apps", type=int, default=40)
    p.add_argument("--variance", type=float, default=0.1)
    p.add_argument("--dist", choices=(GAUSSIAN, LOGNORMAL, "both"), default="both")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hadamard_decay)

    p = sub.add_parser("multiplier", parents=[common], help="2-bit multiplier circuits")
    p.add_argument("action", choices=("search", "verify", "noisy"))
    p.add_argument(
        "--circuit",
        nargs="+",
        help=f"circuit file(s); '{REFERENCE_NAME}' names the built-in reference circuit",
    )
    p.add_argument("--max-gates", type=int, default=6)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--variance", type=float, default=0.1)
    p.add_argument("--dist", choices=(GAUSSIAN, LOGNORMAL), default=GAUSSIAN)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (search: output directory)")
    p.set_defaults(func=cmd_multiplier)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"qdm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (VerificationFailure, bench.EquivalenceError) as exc:
        print(f"qdm: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ResourceGuard as exc:
        print(f"qdm: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
