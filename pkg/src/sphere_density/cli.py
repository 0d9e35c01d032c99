"""``sphere-density`` command line interface.

Every command writes a JSON manifest next to its primary output. The
manifest records the argument vector and SHA-256 hashes of the outputs
that do not contain timings, so ``sphere-density replay`` can re-run the
command and confirm identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import shlex
import sys
import time
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import bench, fibers, greedy, sampler, validation
from ._compute import set_threads
from .estimators import DenseKde, SparseDensity, upper_bound
from .kernel import KernelParams
from .sphere import UnitVector, pole, read_points, write_points

log = logging.getLogger("sphere_density")

EXIT_RUNTIME = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _params(d: int, h: float) -> KernelParams:
    try:
        return KernelParams(d, h)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _center(args, d: int) -> UnitVector:
    if args.center is None:
        return pole(d)
    try:
        return UnitVector.from_array(args.center, normalize=True)
    except ValueError as exc:
        raise InputError(f"invalid center: {exc}") from exc


def _load_points(path, header: bool, d=None, normalize: bool = False) -> np.ndarray:
    try:
        return read_points(path, header=header, d=d, normalize=normalize)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_model(path) -> SparseDensity:
    try:
        return SparseDensity.load(path)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: malformed model file ({exc})") from exc


class Manifest:
    def __init__(self, args, argv):
        self.data = {
            "command": args.command,
            "argv": list(argv),
            "parameters": {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in vars(args).items() if k != "func"},
            "seed": getattr(args, "seed", None),
            "inputs": {},
            "outputs": {},
            "timed_outputs": [],
            "version": _version(),
            "host": f"{platform.node()} {platform.platform()} python {platform.python_version()}",
        }
        self._t0 = time.perf_counter()
        self._c0 = time.process_time()

    def input(self, path) -> None:
        self.data["inputs"][str(path)] = _sha256(path)

    def output(self, path, timed: bool = False) -> None:
        if timed:
            self.data["timed_outputs"].append(str(path))
        else:
            self.data["outputs"][str(path)] = _sha256(path)

    def write(self, path) -> None:
        self.data["wall_seconds"] = time.perf_counter() - self._t0
        self.data["cpu_seconds"] = time.process_time() - self._c0
        with open(path, "w") as fh:
            json.dump(self.data, fh, indent=1)
            fh.write("\n")


def _manifest_path(args, primary) -> str:
    return args.manifest or f"{primary}.manifest.json"


def _save_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


# -- commands -----------------------------------------------------------------


def cmd_synthesize(args, man: Manifest) -> None:
    params = _params(args.dimension, args.h)
    center = _center(args, args.dimension)
    if center.dimension != args.dimension:
        raise InputError("center dimension does not match --dimension")
    truth = SparseDensity.single(params, center.coords)
    bound = upper_bound(truth, "grid", args.grid_size, args.safety)
    pts, stats = sampler.sample(truth, bound, args.count, args.seed)
    write_points(args.out, pts, header=args.header)
    man.output(args.out)
    if args.stats:
        stats.save(args.stats)
        man.output(args.stats, timed=True)
    log.info("wrote %d points to %s (%.3f evaluations/sample)", len(pts), args.out, stats.eval_per_sample if len(pts) else 0.0)


def _truth_from_args(args, d: int):
    if args.truth_h is None:
        return None
    params = _params(d, args.truth_h)
    center = pole(d) if args.truth_center is None else UnitVector.from_array(args.truth_center, normalize=True)
    return SparseDensity.single(params, center.coords)


def cmd_fit(args, man: Manifest) -> None:
    data = _load_points(args.input, args.header, normalize=args.normalize)
    man.input(args.input)
    if len(data) == 0:
        raise InputError("input contains no points")
    d = data.shape[1]
    cfg = greedy.GreedyConfig(
        _params(d, args.h),
        args.iterations,
        normalized_dictionary=not args.raw_dictionary,
        initial=args.initial,
        min_abs_alpha=args.min_abs_alpha,
        progress_every=args.progress_every,
    )
    truth = _truth_from_args(args, d)
    model, trace = greedy.fit(data, cfg, truth=truth)
    model.save(args.out)
    man.output(args.out)
    if args.trace:
        trace.write_csv(args.trace)
        man.output(args.trace, timed=True)
    final = trace.records[-1] if trace.records else None
    log.info(
        "fit: %d iterations, %d distinct terms, precompute %.2fs, iterations %.2fs%s",
        len(trace),
        len(model),
        trace.precompute_seconds,
        trace.iterate_seconds,
        "" if final is None or final.rel_l2_error is None else f", final relative L2 error {final.rel_l2_error:.4e}",
    )


def _estimator(args):
    if args.model:
        man_in = args.model
        return _load_model(args.model), man_in
    data = _load_points(args.kde_data, args.header, normalize=args.normalize)
    if len(data) == 0:
        raise InputError("KDE data contains no points")
    return DenseKde(_params(data.shape[1], args.h), data), args.kde_data


def cmd_sample(args, man: Manifest) -> None:
    est, source = _estimator(args)
    man.input(source)
    bound = upper_bound(est, args.bound, args.grid_size, args.safety)
    pts, stats = sampler.sample(est, bound, args.count, args.seed)
    write_points(args.out, pts, header=args.header)
    man.output(args.out)
    stats_path = args.stats or f"{args.out}.stats.json"
    stats.save(stats_path)
    man.output(stats_path, timed=True)
    log.info("%d samples, %.3f evaluations/sample, %d bound violations", len(pts), stats.eval_per_sample if len(pts) else 0.0, stats.bound_violations)


def cmd_simulate(args, man: Manifest) -> None:
    est, source = _estimator(args)
    man.input(source)
    bound = upper_bound(est, args.bound, args.grid_size, args.safety)
    box = None
    if args.start == "box":
        if args.box_lower is None or args.box_upper is None:
            raise InputError("--start box needs --box-lower and --box-upper")
        box = (args.box_lower, args.box_upper)
    try:
        webs, stats = fibers.simulate_web(est, bound, args.fibers, args.segments, args.start, args.step, args.seed, box=box, threads=args.threads)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    fibers.write_fibers(args.out, webs)
    man.output(args.out)
    stats_path = args.stats or f"{args.out}.stats.json"
    stats.save(stats_path)
    man.output(stats_path, timed=True)
    log.info("%d fibers x %d segments, %.3f evaluations/sample", args.fibers, args.segments, stats.eval_per_sample if stats.samples_produced else 0.0)


def cmd_bench(args, man: Manifest) -> None:
    data = _load_points(args.data, args.header, normalize=args.normalize)
    man.input(args.data)
    if len(data) == 0:
        raise InputError("bench data contains no points")
    params = _params(data.shape[1], args.h)
    scenarios = [s.strip() for s in args.scenarios.split(",") if s.strip()]
    known = {"kde-triangle", "kde-grid", "sparse-triangle", "sparse-grid"}
    if not scenarios or set(scenarios) - known:
        raise InputError(f"scenarios must be a subset of {sorted(known)}")
    kde = DenseKde(params, data)
    model = None
    if any(s.startswith("sparse") for s in scenarios):
        if args.model:
            model = _load_model(args.model)
            man.input(args.model)
        else:
            cfg = greedy.GreedyConfig(params, args.iterations, progress_every=args.progress_every)
            model, _ = greedy.fit(data, cfg)
    counts = {
        "kde-triangle": args.kde_triangle_samples,
        "kde-grid": args.kde_samples,
        "sparse-triangle": args.samples,
        "sparse-grid": args.samples,
    }
    rows = []
    for i, name in enumerate(scenarios):
        est = kde if name.startswith("kde") else model
        method = name.split("-")[1]
        row = bench.bench_scenario(name, est, method, counts[name], np.random.SeedSequence([args.seed, i]), args.grid_size, args.safety)
        log.info("%s: %.3f eval/sample, %.3e s/sample, %.4g h/nonwoven", name, row.eval_per_sample, row.cpu_seconds_per_sample, row.cpu_hours_per_nonwoven)
        rows.append(row)
    bench.write_table(args.out, rows)
    man.output(args.out, timed=True)


def cmd_validate(args, man: Manifest) -> None:
    ct = _load_points(args.ct, args.header, d=3, normalize=args.normalize)
    sim = _load_points(args.sim, args.header, d=2, normalize=args.normalize)
    man.input(args.ct)
    man.input(args.sim)
    projected, proj = validation.project_to_circle(ct, args.drop_threshold)
    if not args.no_symmetrize:
        projected = validation.symmetrize(projected)
        sim = validation.symmetrize(sim)
    if len(projected) == 0 or len(sim) == 0:
        raise InputError("nothing left to fit after projection")
    cfg = greedy.GreedyConfig(_params(2, args.h), args.iterations, progress_every=args.progress_every)
    model_ct, _ = greedy.fit(projected, cfg)
    model_sim, _ = greedy.fit(sim, cfg)
    report = validation.compare_densities(model_ct, model_sim, args.grid_size)
    summary = {
        "projection": {
            "input_count": proj.input_count,
            "projected_count": proj.projected_count,
            "dropped_count": proj.dropped_count,
            "symmetrized": not args.no_symmetrize,
        },
        "comparison": report.summary(),
    }
    _save_json(args.out, summary)
    man.output(args.out)
    if args.table:
        report.write_table(args.table)
        man.output(args.table)
    log.info("relative L2 discrepancy %.4f", report.discrepancy)


def cmd_convergence(args, man: Manifest) -> None:
    """Synthetic experiment: sample from a known kernel, fit, track the exact error."""
    n, iters = (1_000_000, 10_000) if args.full else (args.count, args.iterations)
    truth_params = _params(3, args.truth_h)
    truth = SparseDensity.single(truth_params, pole(3).coords)
    bound = upper_bound(truth, "grid")
    data, _ = sampler.sample(truth, bound, n, args.seed)
    cfg = greedy.GreedyConfig(_params(3, args.h), iters, progress_every=args.progress_every)
    model, trace = greedy.fit(data, cfg, truth=truth)
    trace.write_csv(args.out)
    man.output(args.out, timed=True)
    if args.model_out:
        model.save(args.model_out)
        man.output(args.model_out)
    log.info("N=%d, %d iterations: relative L2 error %.4e -> %.4e", n, iters, trace.records[0].rel_l2_error, trace.records[-1].rel_l2_error)


def cmd_replay(args, man) -> int:
    with open(args.manifest_file) as fh:
        old = json.load(fh)
    argv = old["argv"]
    log.info("replaying: sphere-density %s", shlex.join(argv))
    code = main(argv)
    if code != 0:
        return code
    bad = [p for p, digest in old["outputs"].items() if not os.path.exists(p) or _sha256(p) != digest]
    for p in bad:
        log.error("output differs from manifest: %s", p)
    if not bad:
        log.info("all %d outputs reproduced byte-identically", len(old["outputs"]))
    return EXIT_RUNTIME if bad else 0


# -- argument parsing -----------------------------------------------------------


def _add_bound_args(p) -> None:
    p.add_argument("--bound", choices=("triangle", "grid"), default="grid")
    p.add_argument("--grid-size", type=int, default=10000)
    p.add_argument("--safety", type=float, default=1.1)


def _add_estimator_args(p) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="sparse model JSON")
    src.add_argument("--kde-data", help="point CSV to use as a dense KDE")
    p.add_argument("--h", type=float, default=0.9, help="KDE concentration (with --kde-data)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--header", action="store_true", help="point CSVs carry a header row")
    common.add_argument("--normalize", action="store_true", help="rescale input rows to unit length")
    common.add_argument("--threads", type=int, default=1, help="worker cap; never changes results")
    common.add_argument("--manifest", help="manifest path (default: <output>.manifest.json)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--progress-every", type=int, default=100, help="heartbeat interval for greedy fits")

    parser = argparse.ArgumentParser(prog="sphere-density", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", parents=[common], help="sample points from one Abel-Poisson kernel")
    p.add_argument("--h", type=float, default=0.6)
    p.add_argument("--dimension", type=int, choices=(2, 3), default=3)
    p.add_argument("--center", type=_vector, help="kernel center (default: last basis vector)")
    p.add_argument("--count", type=int, default=1_000_000)
    p.add_argument("--grid-size", type=int, default=10000)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--stats")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("fit", parents=[common], help="greedy sparse fit of a point set")
    p.add_argument("--input", required=True)
    p.add_argument("--h", type=float, default=0.9)
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--raw-dictionary", action="store_true", help="do not unit-normalize the kernels")
    p.add_argument("--initial", choices=("zero", "uniform-density"), default="zero")
    p.add_argument("--min-abs-alpha", type=float)
    p.add_argument("--truth-h", type=float, help="known generating kernel, enables exact errors in the trace")
    p.add_argument("--truth-center", type=_vector)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--trace", help="trace CSV")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", parents=[common], help="acceptance-rejection sampling")
    _add_estimator_args(p)
    _add_bound_args(p)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("simulate", parents=[common], help="simulate fibers")
    _add_estimator_args(p)
    _add_bound_args(p)
    p.add_argument("--fibers", type=int, default=1)
    p.add_argument("--segments", type=int, default=1000)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--start", choices=("origin", "box"), default="origin")
    p.add_argument("--box-lower", type=_vector)
    p.add_argument("--box-upper", type=_vector)
    p.add_argument("--out", required=True)
    p.add_argument("--stats")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", parents=[common], help="sampling cost table for KDE vs sparse model")
    p.add_argument("--data", required=True)
    p.add_argument("--h", type=float, default=0.9)
    p.add_argument("--model", help="sparse model JSON (default: fit one)")
    p.add_argument("--iterations", type=int, default=1000, help="greedy iterations when fitting")
    p.add_argument("--scenarios", default="kde-triangle,kde-grid,sparse-triangle,sparse-grid")
    p.add_argument("--samples", type=int, default=100_000, help="samples for sparse scenarios")
    p.add_argument("--kde-samples", type=int, default=1000)
    p.add_argument("--kde-triangle-samples", type=int, default=50)
    p.add_argument("--grid-size", type=int, default=10000)
    p.add_argument("--safety", type=float, default=1.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", parents=[common], help="compare 3D and 2D direction data on the circle")
    p.add_argument("--ct", required=True, help="3D direction CSV")
    p.add_argument("--sim", required=True, help="2D direction CSV")
    p.add_argument("--h", type=float, default=0.9)
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--drop-threshold", type=float, default=1e-8)
    p.add_argument("--no-symmetrize", action="store_true")
    p.add_argument("--grid-size", type=int, default=1000)
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--table", help="plot table CSV")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convergence", parents=[common], help="synthetic convergence experiment")
    p.add_argument("--truth-h", type=float, default=0.6)
    p.add_argument("--h", type=float, default=0.9)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--full", action="store_true", help="10^6 points, 10^4 iterations")
    p.add_argument("--model-out")
    p.add_argument("--out", required=True, help="trace CSV")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("replay", help="re-run a manifest and compare output hashes")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "replay":
        try:
            return cmd_replay(args, None)
        except (OSError, KeyError, ValueError) as exc:
            log.error("cannot replay: %s", exc)
            return EXIT_INPUT
    set_threads(args.threads)
    man = Manifest(args, argv)
    try:
        args.func(args, man)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("failed: %s", exc)
        return EXIT_RUNTIME
    man.write(_manifest_path(args, args.out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
