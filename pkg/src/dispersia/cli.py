"""Command-line front end: analyze / simulate / spectrum / fit.

Exit codes:
  0 success
  1 parse or usage error
  2 class-K certification failure
  3 passivity failure
  4 unsupported kernel type for the requested command
  5 inconclusive decay fit
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import decay, dispersion, io, kernels, modal

log = logging.getLogger("dispersia")

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CERT = 2
EXIT_PASSIVITY = 3
EXIT_UNSUPPORTED = 4
EXIT_INCONCLUSIVE = 5


def _configure_logging() -> None:
    # DISPERSIA_LOG controls verbosity only; outputs never depend on it
    level_name = os.environ.get("DISPERSIA_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise io.ParseError("--window", f"expected 'a,b', got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise io.ParseError("--window", f"expected two numbers, got {text!r}") from None
    if b <= a:
        raise io.ParseError("--window", "window end must exceed window start")
    return a, b


def _emit(doc: dict, out: str | None) -> None:
    text = io.write_report(out, doc)
    if out is None:
        sys.stdout.write(text)


def _analyze_kernels(doc: dict, base_dir: Path) -> tuple[kernels.Kernel, kernels.Kernel]:
    """Analyze configs carry either a full medium block or bare kernel fields."""
    if "medium" in doc:
        medium = io.parse_medium(doc["medium"], base_dir)
        return medium.nu_e, medium.nu_h
    if "nu_e" not in doc and "nu_h" not in doc:
        raise io.ParseError("config", "expected 'medium' or 'nu_e'/'nu_h' fields")
    zero = {"type": "exp_poly", "terms": []}
    nu_e = io._resolve_kernel(doc.get("nu_e", zero), "nu_e", base_dir)
    nu_h = io._resolve_kernel(doc.get("nu_h", zero), "nu_h", base_dir)
    return nu_e, nu_h


def cmd_analyze(args: argparse.Namespace) -> int:
    doc, base_dir = io.load_config(args.config)
    nu_e, nu_h = _analyze_kernels(doc, base_dir)
    try:
        for which, kernel in (("nu_e", nu_e), ("nu_h", nu_h)):
            if isinstance(kernel, kernels.ExpPolyKernel) and kernel.is_zero:
                continue
            cert = kernels.certify_class_K(kernel)
            log.info("%s certified: C=%.6g delta=%.6g", which, cert.C, cert.delta)
    except kernels.KernelError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERT
    report = dispersion.analyze(nu_e, nu_h)
    _emit(io.passivity_report_to_doc(report), args.out)
    if not report.passive:
        return EXIT_PASSIVITY
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    doc, base_dir = io.load_config(args.config)
    config = io.parse_simulate_config(doc, base_dir)
    for which, kernel in (("nu_e", config.medium.nu_e), ("nu_h", config.medium.nu_h)):
        if not isinstance(kernel, kernels.ExpPolyKernel):
            print(f"medium.{which}: simulation requires an exp_poly kernel",
                  file=sys.stderr)
            return EXIT_UNSUPPORTED
    trace = modal.run_multimode(
        config.medium,
        list(config.modes),
        dt=config.dt,
        T=config.T,
        output_stride=config.output_stride,
        threads=args.threads,
    )
    if args.out is None:
        sys.stdout.write(io.format_trace(trace))
    else:
        io.write_trace(args.out, trace)
    return EXIT_OK


def cmd_spectrum(args: argparse.Namespace) -> int:
    doc, base_dir = io.load_config(args.config)
    config = io.parse_spectrum_config(doc, base_dir)
    for which, kernel in (("nu_e", config.medium.nu_e), ("nu_h", config.medium.nu_h)):
        if not isinstance(kernel, kernels.ExpPolyKernel):
            print(f"medium.{which}: spectrum requires an exp_poly kernel",
                  file=sys.stderr)
            return EXIT_UNSUPPORTED
    lines = ["k,abscissa,n_eigs"]
    for k in config.k_values:
        system = modal.build_mode(config.medium, k)
        abscissa, eigs = modal.spectral_abscissa(system)
        lines.append(f"{k:.17g},{abscissa:.17g},{eigs.size}")
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        io._atomic_write(args.out, text)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    trace = io.read_trace(args.trace)
    window = _parse_window(args.window)
    try:
        report = decay.fit_decay(trace, window)
    except decay.UnusableTrace as exc:
        print(f"unusable trace: {exc}", file=sys.stderr)
        return EXIT_PARSE
    _emit(io.decay_report_to_doc(report), args.out)
    if report.kind == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispersia",
        description="Passivity analysis and modal energy-decay simulation "
                    "for dispersive media",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="certify kernels and report passivity")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="integrate the modal system, write a trace")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="spectral abscissa over a wavenumber grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", help="classify the decay of an energy trace")
    p.add_argument("trace", help="path to a trace file")
    p.add_argument("--window", required=True, metavar="a,b")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except io.ParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except kernels.KernelError as exc:
        print(f"kernel error: {exc}", file=sys.stderr)
        return EXIT_CERT
    except modal.ModalError as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
