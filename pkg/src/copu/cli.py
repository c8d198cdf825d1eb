"""Command-line interface: analyze, sample, boundary, verify, plot.

Exit codes: 0 success, 2 input error, 3 channel not completely positive,
4 verification failure. Seed, worker count and tolerance come from flags,
then ``COPU_SEED`` / ``COPU_JOBS`` / ``COPU_TOL``, then defaults.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path


from . import explorer, formats, verify
from .channels import (
    AffineChannel,
    KrausChannel,
    affine_to_choi,
    diagonal_affine,
    kraus_to_affine,
    kraus_to_choi,
)
from .classify import (
    is_coherence_breaking,
    is_cp,
    is_entanglement_breaking,
    is_incoherent_kraus,
    is_strictly_incoherent_kraus,
    is_unital,
)
from .errors import CopuError, NotCompletelyPositiveError
from .families import FamilySpec, check_params, construct, param_row, predict_row, resolve
from .linalg import DEFAULT_TOL, Tolerance
from .metrics import channel_report

EXIT_OK, EXIT_INPUT, EXIT_NOT_CP, EXIT_VERIFY = 0, 2, 3, 4

log = logging.getLogger("copu")


class InputError(Exception):
    pass


# ---------------------------------------------------------------- configuration


def _env(name, cast):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return cast(raw)
    except ValueError as exc:
        raise InputError(f"{name}={raw!r} is not valid") from exc


def _settings(args):
    seed = args.seed if args.seed is not None else _env("COPU_SEED", int)
    jobs = args.jobs if args.jobs is not None else _env("COPU_JOBS", int)
    tol = args.tol if args.tol is not None else _env("COPU_TOL", float)
    seed = 0 if seed is None else seed
    jobs = 1 if jobs is None else jobs
    if seed < 0:
        raise InputError("seed must be nonnegative")
    if jobs < 1:
        raise InputError("jobs must be at least 1")
    if tol is None:
        tolerance = DEFAULT_TOL
    else:
        if not (math.isfinite(tol) and tol > 0):
            raise InputError("tol must be a positive number")
        tolerance = Tolerance(eps_herm=DEFAULT_TOL.eps_herm, eps_psd=tol, eps_tp=tol)
    return seed, jobs, tolerance


def _params(pairs):
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise InputError(f"--param {key}: {value!r} is not a number") from exc
    return out


def _write(path, text):
    try:
        formats.write_atomic(path, text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------- analyze


def _kraus_summary(ch: KrausChannel, tol):
    choi = kraus_to_choi(ch)
    general = kraus_to_affine(ch)
    out = {"unital": is_unital(ch, tol), "cp": True, "coherence_breaking": is_coherence_breaking(general),
           "incoherent": is_incoherent_kraus(ch), "strictly_incoherent": is_strictly_incoherent_kraus(ch)}
    affine = None
    if general.is_diagonal():
        affine = diagonal_affine(general)
    return choi, out, affine, general


def _affine_summary(ch: AffineChannel, tol):
    choi = affine_to_choi(ch)
    out = {"unital": ch.is_unital, "cp": is_cp(ch, tol), "coherence_breaking": is_coherence_breaking(ch),
           "incoherent": None, "strictly_incoherent": None}
    return choi, out, ch, None


def _family_channel(spec, tol):
    try:
        return construct(spec)
    except NotCompletelyPositiveError:
        fam, params = resolve(spec)
        row = param_row(fam, params)
        check_params(fam, row[None])
        lam, tau = fam.build(row[None])
        return AffineChannel(lam[0], tau[0]), predict_row(fam, row)


def analyze(kind, value, tol):
    prediction = None
    if kind == "kraus":
        value = KrausChannel(tuple(value), tol=tol)
    elif kind == "family":
        spec = value
        value, prediction = _family_channel(spec, tol)
    if isinstance(value, KrausChannel):
        choi, verdicts, affine, general = _kraus_summary(value, tol)
    else:
        choi, verdicts, affine, general = _affine_summary(value, tol)
    verdicts["entanglement_breaking"] = is_entanglement_breaking(choi, tol) if verdicts["cp"] else None
    rep = channel_report(choi, tol)
    report = {
        "input": kind,
        "tolerance": {"eps_herm": tol.eps_herm, "eps_psd": tol.eps_psd, "eps_tp": tol.eps_tp},
        "affine": None if affine is None else {"lambda": affine.lam.tolist(), "tau": affine.tau.tolist()},
        "coherence": {"c_l1": rep.c_l1, "c_rel": None if math.isnan(rep.c_rel) else rep.c_rel,
                      "purity": rep.purity, "c_subsystem": rep.c_subsystem},
        "classification": verdicts,
    }
    if affine is None and general is not None:
        report["general_affine"] = {"M": general.M.tolist(), "tau": general.tau.tolist()}
    if prediction is not None:
        pred = {"family": prediction.label, "c_l1": prediction.c_l1, "purity": prediction.purity}
        if prediction.c_l1 is not None:
            pred["delta_c_l1"] = rep.c_l1 - prediction.c_l1
        if prediction.purity is not None:
            pred["delta_purity"] = rep.purity - prediction.purity
        if prediction.stated is not None:
            pred["published"] = {"c_l1": prediction.stated[0], "purity": prediction.stated[1]}
        report["prediction"] = pred
    return report


def _print_report(report, out):
    def emit(prefix, obj):
        for k, v in obj.items():
            if isinstance(v, dict):
                emit(f"{prefix}{k}.", v)
            else:
                out.write(f"{prefix}{k}: {_show(v)}\n")

    emit("", report)


def _show(v):
    if isinstance(v, float):
        return formats.fmt(v)
    if isinstance(v, list):
        return json.dumps(v)
    if v is None:
        return "n/a"
    return str(v).lower() if isinstance(v, bool) else str(v)


def cmd_analyze(args):
    _, _, tol = _settings(args)
    kind, value = formats.load_spec(args.spec)
    report = analyze(kind, value, tol)
    if args.json:
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        _print_report(report, sys.stdout)
    return EXIT_OK if report["classification"]["cp"] else EXIT_NOT_CP


# ---------------------------------------------------------------- sample / boundary


def cmd_sample(args):
    seed, jobs, _ = _settings(args)
    if args.n < 1:
        raise InputError("--n must be at least 1")
    spec = FamilySpec(args.family, _params(args.param))
    samples = explorer.sample_family(spec, args.n, seed, jobs, with_rel=not args.no_rel)
    _write(args.out, formats.samples_csv(samples))
    log.info("wrote %d samples to %s", len(samples), args.out)
    return EXIT_OK


def cmd_boundary(args):
    seed, jobs, _ = _settings(args)
    if args.bins < 1:
        raise InputError("--bins must be at least 1")
    spec = FamilySpec(args.family, _params(args.param))
    rows = explorer.boundary(spec, args.bins, args.n, seed, jobs)
    _write(args.out, formats.boundary_csv(rows))
    log.info("wrote %d boundary rows to %s", len(rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- verify / plot


def cmd_verify(args):
    seed, _, _ = _settings(args)
    try:
        results = verify.run(args.suites or ["all"], seed=seed, scale=args.scale)
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc
    out = sys.stdout
    for res in results:
        out.write(f"{res.name:<12} {'PASS' if res.passed else 'FAIL'}\n")
        for label, ok, detail in res.checks:
            out.write(f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}\n")
        for finding in res.findings:
            out.write(f"    FINDING {finding}\n")
    failed = [r.name for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} suites passed"
              + (f"; failed: {', '.join(failed)}\n" if failed else "\n"))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_plot(args):
    series = []
    for path in args.inputs:
        kind, data = formats.read_series(path)
        series.append((Path(path).stem, kind, data))
    _write(args.out, formats.svg_plot(series, args.title or ""))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="RNG seed (env COPU_SEED, default 0)")
    common.add_argument("--jobs", type=int, help="worker threads (env COPU_JOBS, default 1)")
    common.add_argument("--tol", type=float, help="PSD and trace-preservation tolerance (env COPU_TOL)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="copu", description="Coherence and purity of qubit channels.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="report on one channel-spec JSON file")
    a.add_argument("spec")
    a.add_argument("--json", action="store_true", help="structured output")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sample", parents=[common], help="sample a family to CSV")
    s.add_argument("family")
    s.add_argument("--n", type=int, default=10_000)
    s.add_argument("--out", required=True)
    s.add_argument("--param", action="append", metavar="KEY=VALUE", help="hold a parameter fixed")
    s.add_argument("--no-rel", action="store_true", help="skip relative-entropy coherence")
    s.set_defaults(func=cmd_sample)

    b = sub.add_parser("boundary", parents=[common], help="write a family's CoPu boundary to CSV")
    b.add_argument("family")
    b.add_argument("--out", required=True)
    b.add_argument("--bins", type=int, default=explorer.DEFAULT_BINS)
    b.add_argument("--n", type=int, default=100_000, help="samples for sampled envelopes")
    b.add_argument("--param", action="append", metavar="KEY=VALUE")
    b.set_defaults(func=cmd_boundary)

    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suites", nargs="*", help=f"suite names or 'all' ({', '.join(verify.SUITES)})")
    v.add_argument("--scale", type=float, default=1.0, help="multiply sample counts (for quick runs)")
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", parents=[common], help="render CSV files to an SVG CoPu diagram")
    pl.add_argument("inputs", nargs="+")
    pl.add_argument("--out", required=True)
    pl.add_argument("--title")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, CopuError) as exc:
        print(f"copu: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
