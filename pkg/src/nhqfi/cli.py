"""Command-line driver.

``nhqfi <command> --config <file> [--out <dir>] [--format csv,json,svg]``

The config file is flat ``key=value`` lines or a JSON object.  Chain keys
(n, t, delta, mu, phi, g, gamma, kind) populate the spec; remaining keys
are command options.  Exit codes: 0 ok, 1 validation failure, 2 bad input.

Heavy imports happen inside the command functions so that the bench
command can pin the BLAS thread count before numpy loads.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

_SPEC_KEYS = {"n", "t", "delta", "mu", "phi", "g", "gamma", "kind"}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    data = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        data[key] = val
    return data


def _split_config(config: dict):
    spec_part = {k: v for k, v in config.items() if k in _SPEC_KEYS}
    opts = {k: v for k, v in config.items() if k not in _SPEC_KEYS}
    return spec_part, opts


def _spec_from(config: dict):
    from .model import ChainSpec

    spec_part, opts = _split_config(config)
    if "n" not in spec_part:
        raise ValueError("config must provide at least 'n' (and usually 'kind')")
    return ChainSpec.from_dict(spec_part), opts


def _write_rows(path: str, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([row[c] for c in columns])
    return path


def _floats(val, default):
    if val is None:
        return default
    if isinstance(val, (list, tuple)):
        return [float(x) for x in val]
    return [float(x) for x in str(val).split(",") if x.strip()]


def cmd_spectrum(args, config) -> int:
    from .spectral import eig_biorthogonal, ep_proximity
    from .model import build_chain, pt_residual

    spec, opts = _spec_from(config)
    es = eig_biorthogonal(build_chain(spec))
    payload = es.to_json_dict(include_vectors=_truthy(opts.get("vectors", False)))
    payload["spec"] = spec.to_dict()
    op = build_chain(spec)
    if op.dim == spec.n:
        payload["pt_residual"] = pt_residual(op)
    payload["ep_pairs"] = [r.__dict__ for r in ep_proximity(es)]
    out = os.path.join(args.out, "spectrum.json")
    with open(out, "w") as fh:
        json.dump(payload, fh, indent=2)
    print(out)
    return 0


def cmd_sweep(args, config) -> int:
    from concurrent.futures import ThreadPoolExecutor

    from .model import ChainSpec
    from .qfi import SWEEP_COLUMNS, qfi_finite_diff, qfi_pert_sum, sweep_rows

    spec, opts = _spec_from(config)
    parameter = opts.get("parameter", "g")
    values = _floats(opts.get("values"), [float(getattr(spec, parameter))])
    methods = str(opts.get("methods", "finite_diff,pert_sum")).split(",")
    specs, ests = [], []

    def evaluate(v):
        s = spec.with_(**{parameter: v})
        results = []
        for m in methods:
            fn = qfi_finite_diff if m == "finite_diff" else qfi_pert_sum
            results.append((fn(s, parameter), s))
        return results

    workers = int(opts.get("workers", 1))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(evaluate, values))
    else:
        chunks = [evaluate(v) for v in values]
    for chunk in chunks:
        for est, s in chunk:
            ests.append(est)
            specs.append(s)
    rows = sweep_rows(ests, specs)
    out = _write_rows(os.path.join(args.out, "sweep.csv"), SWEEP_COLUMNS, rows)
    print(out)
    return 0


def cmd_multiparam(args, config) -> int:
    from .multiparam import qfi_matrix_closed_form, qfi_matrix_mode_sum

    spec, opts = _spec_from(config)
    method = opts.get("method", "mode_sum")
    nu = int(opts.get("nu", 1))
    fn = {"mode_sum": qfi_matrix_mode_sum, "closed_form": qfi_matrix_closed_form}[method]
    res = fn(spec, nu=nu)
    out = os.path.join(args.out, "qfi_matrix.json")
    with open(out, "w") as fh:
        json.dump(res.to_json_dict(spec), fh, indent=2)
    print(out)
    return 0


def cmd_phasediagram(args, config) -> int:
    from .ptphase import phase_diagram

    _, opts = _split_config(config)
    n_values = [int(x) for x in _floats(opts.get("n_values"), [4, 8, 12, 16, 20])]
    ratios = _floats(opts.get("ratios"), [0.1 * i for i in range(1, 26)])
    rows = phase_diagram(n_values, ratios)
    cols = ("n", "gamma_over_t", "kind", "regime", "g_c", "max_im", "qfi_log10")
    out = _write_rows(os.path.join(args.out, "phase_diagram.csv"), cols, rows)
    print(out)
    return 0


def cmd_quench(args, config) -> int:
    import numpy as np

    from .protocols import quench_survival

    spec, opts = _spec_from(config)
    g_i = float(opts.get("g_initial", spec.g))
    g_f = float(opts["g_final"])
    t_max = float(opts.get("t_max", 20.0))
    steps = int(opts.get("steps", 400))
    times = np.linspace(0.0, t_max, steps)
    q = quench_survival(spec, g_i, g_f, times)
    out = _write_rows(
        os.path.join(args.out, "quench.csv"),
        ("time", "survival"),
        [{"time": repr(float(t)), "survival": repr(float(s))}
         for t, s in zip(q.times, q.survival)],
    )
    meta = {
        "gamma_fit": q.gamma_fit, "omega_fit": q.omega_fit,
        "r_squared": q.r_squared, "fit_ok": q.fit_ok,
    }
    with open(os.path.join(args.out, "quench_fit.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
    print(out)
    return 0


def cmd_braid(args, config) -> int:
    from .protocols import braid, braid_result_json

    spec, opts = _spec_from(config)
    res = braid(
        spec,
        eps=float(opts.get("eps", 1e-2)),
        period=float(opts.get("period", 10.0)),
        steps=int(opts.get("steps", 512)),
        loops=int(opts.get("loops", 1)),
        enclose=_truthy(opts.get("enclose", True)),
    )
    out = os.path.join(args.out, "braid.json")
    with open(out, "w") as fh:
        json.dump(braid_result_json(res), fh, indent=2)
    print(out)
    return 0


def cmd_bench(args, config) -> int:
    from .bench import BENCH_COLUMNS, bench_rows, kernel_bench, run_bench, scaling_fit

    _, opts = _split_config(config)
    sizes = [int(x) for x in _floats(opts.get("sizes"), [100, 200, 400, 800])]
    repeats = int(opts.get("repeats", 5))
    out_data = run_bench(sizes, repeats=repeats)
    rows = bench_rows(out_data["records"])
    out = _write_rows(os.path.join(args.out, "bench.csv"), BENCH_COLUMNS, rows)
    meta = {
        "agreement": out_data["agreement"],
        "scaling": scaling_fit(out_data["records"]) if len(sizes) >= 4 else None,
        "kernel_vs_fallback": kernel_bench(int(opts.get("kernel_n", 400))),
    }
    with open(os.path.join(args.out, "bench_summary.json"), "w") as fh:
        json.dump(meta, fh, indent=2)
    print(out)
    return 0


def cmd_fig(name):
    def run(args, config) -> int:
        from .figures import emit_figure

        _, opts = _split_config(config)
        formats = tuple(args.format.split(","))
        paths = emit_figure(name, args.out, formats=formats)
        for p in paths.values():
            print(p)
        return 0

    return run


def cmd_validate(args, config) -> int:
    from .validate import format_report, report_json, run_all

    _, opts = _split_config(config)
    results = run_all(quick=_truthy(opts.get("quick", args.quick)))
    print(format_report(results))
    with open(os.path.join(args.out, "validation_report.json"), "w") as fh:
        fh.write(report_json(results))
    return 0 if all(r.passed for r in results) else 1


def _truthy(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


COMMANDS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "multiparam": cmd_multiparam,
    "phasediagram": cmd_phasediagram,
    "quench": cmd_quench,
    "braid": cmd_braid,
    "bench": cmd_bench,
    "fig1": cmd_fig("fig1"),
    "fig2": cmd_fig("fig2"),
    "figS1": cmd_fig("figS1"),
    "figS2": cmd_fig("figS2"),
    "figS3": cmd_fig("figS3"),
    "figS4": cmd_fig("figS4"),
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nhqfi", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="key=value or JSON file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", default="csv", help="csv,json,svg")
    parser.add_argument("--quick", action="store_true", help="shrink the validate bench")
    args = parser.parse_args(argv)

    if args.command == "bench":
        # stabilize timings: pin BLAS threads before numpy loads
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")

    try:
        config = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](args, config)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
