"""Command-line front end: ``planckdecomp {spectrum,sample,decompose,verify}``.

Exit codes: 0 success, 1 verification failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import distributions as dist
from . import sampling as smp
from . import spectra as spc
from . import verify as ver
from .constants import constants_by_name
from .params import DARK, GAUSS, PLANCK, DomainError, ModeParams, binary, multiplet

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# 1 erg cm^-3 = 1e-7 J / 1e-6 m^3
CGS_TO_SI_ENERGY_DENSITY = 0.1
DEFAULT_REPORT = "verify_report.json"

FAMILIES = ("gauss", "dark", "planck", "binary", "multiplet", "binary-sum", "multiplet-sum")


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planckdecomp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--constants", choices=("paper", "modern"), default="modern",
                        help="physical constant set (default: modern)")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="tabulate spectral energy densities")
    sp.add_argument("--t", type=float, required=True, help="temperature in kelvin")
    sp.add_argument("--nu-min", type=float, required=True, help="lowest frequency (Hz)")
    sp.add_argument("--nu-max", type=float, required=True, help="highest frequency (Hz)")
    sp.add_argument("--points", type=int, default=1000, help="grid points, at least 2")
    sp.add_argument("--laws", default="planck,rj,wien,schweikert",
                    help="comma-separated subset of planck, rj, wien, schweikert")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--units", choices=("cgs", "si"), default="cgs",
                    help="erg cm^-3 Hz^-1 (cgs) or J m^-3 Hz^-1 (si)")
    sp.add_argument("--output", help="output file (default: standard output)")

    sa = sub.add_parser("sample", help="draw a seeded batch from one family")
    sa.add_argument("--family", required=True, help="one of " + ", ".join(FAMILIES))
    sa.add_argument("--s", type=int, help="binary component index")
    sa.add_argument("--m", type=int, help="multiplet order")
    _add_mode_flags(sa)
    sa.add_argument("--count", type=_positive_int, default=100_000)
    sa.add_argument("--seed", type=_seed, default=ver.DEFAULT_SEED)
    sa.add_argument("--s-max", type=int, help="largest binary component for binary-sum")
    sa.add_argument("--m-max", type=int, help="largest multiplet order for multiplet-sum")
    sa.add_argument("--output", help="CSV file for the draws")

    de = sub.add_parser("decompose", help="show eta = xi + zeta and the bits of xi")
    _add_mode_flags(de)
    de.add_argument("--n-samples", type=_positive_int, default=10)
    de.add_argument("--seed", type=_seed, default=ver.DEFAULT_SEED)
    de.add_argument("--s-max", type=int, help="bit columns shown in the footer (default: automatic)")
    de.add_argument("--output", help="CSV file for the rows")

    ve = sub.add_parser("verify", help="run the identity checks and write a JSON report")
    ve.add_argument("--beta", type=float, nargs="+", default=list(ver.DEFAULT_BETAS))
    ve.add_argument("--tol", action="append", default=[], metavar="[NAME=]VALUE",
                    help="tolerance override; bare VALUE applies to every deterministic identity, "
                         "NAME=VALUE to identities starting with NAME (repeatable)")
    ve.add_argument("--seed", type=_seed, default=ver.DEFAULT_SEED)
    ve.add_argument("--mc-count", type=_positive_int, default=1_000_000)
    ve.add_argument("--kinetic-moves", type=_positive_int, default=1_000_000)
    ve.add_argument("--only", action="append", default=[], metavar="PREFIX",
                    help="run only identities starting with PREFIX (repeatable)")
    ve.add_argument("--report", default=DEFAULT_REPORT,
                    help=f"JSON report path, written whether or not checks pass (default {DEFAULT_REPORT})")
    return parser


def _add_mode_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--beta", type=float, help="h nu / k T")
    p.add_argument("--nu", type=float, help="frequency in Hz (with --t)")
    p.add_argument("--t", type=float, help="temperature in kelvin (with --nu)")


def _mode_params(args, consts) -> ModeParams:
    if args.beta is not None:
        if args.nu is not None or args.t is not None:
            raise UsageError("give either --beta or --nu with --t, not both")
        return ModeParams(args.beta)
    if args.nu is None or args.t is None:
        raise UsageError("need --beta, or both --nu and --t")
    return ModeParams.from_physical(args.nu, args.t, consts)


def _open_output(path: Optional[str]):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _fmt(v) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# Commands


def cmd_spectrum(args, consts) -> int:
    if not (math.isfinite(args.t) and args.t > 0):
        raise UsageError("--t must be a positive temperature")
    if not (0 < args.nu_min < args.nu_max and math.isfinite(args.nu_max)):
        raise UsageError("need 0 < --nu-min < --nu-max")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    try:
        laws = tuple(spc.SpectralLaw(name.strip().lower()) for name in args.laws.split(",") if name.strip())
    except ValueError as exc:
        raise UsageError(f"unknown law in --laws: {exc}")
    if not laws:
        raise UsageError("--laws selects no law")
    nu = np.linspace(args.nu_min, args.nu_max, args.points)
    table = spc.spectrum_table(args.t, nu, laws, consts)
    if args.units == "si":
        table = {c: v if c == "nu_Hz" else v * CGS_TO_SI_ENERGY_DENSITY for c, v in table.items()}
    columns = list(table)
    fh, close = _open_output(args.output)
    try:
        if args.format == "json":
            rows = [{c: float(table[c][i]) for c in columns} for i in range(args.points)]
            json.dump(rows, fh, indent=1)
            fh.write("\n")
        else:
            fh.write(f"# T_kelvin: {_fmt(args.t)}\n# constants: {consts.provenance}\n# units: {args.units}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for i in range(args.points):
                writer.writerow([_fmt(table[c][i]) for c in columns])
    finally:
        if close:
            fh.close()
    if args.output is not None:
        peak = nu[np.argmax(table["u_planck"])] if "u_planck" in table else None
        msg = f"wrote {args.points} rows to {args.output}"
        if peak is not None:
            msg += f"; Planck grid maximum at {peak:.6g} Hz (displacement law: {spc.wien_peak(args.t, consts):.6g} Hz)"
        print(msg)
    return EXIT_OK


def _family_for(args):
    name = args.family
    if name not in FAMILIES:
        raise UsageError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    if name == "binary":
        if args.s is None:
            raise UsageError("--family binary needs --s")
        return binary(args.s)
    if name == "multiplet":
        if args.m is None:
            raise UsageError("--family multiplet needs --m")
        return multiplet(args.m)
    return {"gauss": GAUSS, "dark": DARK}.get(name, PLANCK)


def cmd_sample(args, consts) -> int:
    f = _family_for(args)
    p = _mode_params(args, consts)
    rs = smp.RandomStream(args.seed)
    if args.family == "binary-sum":
        batch = smp.sample_binary_sum(p, args.count, rs, args.s_max)
    elif args.family == "multiplet-sum":
        batch = smp.sample_multiplet_sum(p, args.count, rs, args.m_max)
    else:
        batch = smp.sample_family(f, p, args.count, rs)
    if args.output is not None:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            smp.write_batch_csv(batch, fh)
    mean, var = dist.mean_and_variance(f, p)
    values = np.asarray(batch.values, dtype=float)
    emp_mean = float(values.mean())
    emp_var = float(values.var(ddof=1)) if len(values) > 1 else 0.0
    band = 5.0 * math.sqrt(var / len(values))
    inside = abs(emp_mean - mean) <= band
    print(f"family={batch.label} beta={p.beta:.10g} seed={args.seed} count={len(values)}")
    print(f"mean     empirical {emp_mean:.7g}  exact {mean:.7g}  5-sigma band [{mean - band:.7g}, {mean + band:.7g}]"
          f"  {'inside' if inside else 'OUTSIDE'}")
    print(f"variance empirical {emp_var:.7g}  exact {var:.7g}")
    for note in batch.warnings:
        print(f"warning: {note}")
    return EXIT_OK


def cmd_decompose(args, consts) -> int:
    p = _mode_params(args, consts)
    s_max = args.s_max if args.s_max is not None else smp.default_s_max(p)
    if s_max < 0:
        raise UsageError("--s-max must be >= 0")
    rs = smp.RandomStream(args.seed)
    batch = smp.sample_coupled(p, args.n_samples, rs, s_max)
    if args.output is not None:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            smp.write_batch_csv(batch, fh)
    print(f"beta={p.beta:.10g} seed={args.seed} n_samples={len(batch)}")
    print(f"{'#':>6}  {'eta':>22}  {'xi':>8}  {'zeta':>20}  bits")
    for i, (eta, xi, zeta) in enumerate(zip(batch.values.tolist(), batch.integer_part.tolist(),
                                            batch.fraction.tolist())):
        print(f"{i:>6}  {eta:>22.17g}  {xi:>8d}  {zeta:>20.17g}  {smp.bit_positions(xi)}")
    n = len(batch)
    freq = batch.bits.mean(axis=0)
    print()
    print(f"{'s':>4}  {'empirical':>12}  {'exact':>12}  {'z':>8}")
    for s in range(s_max + 1):
        exact = float(dist.binary_occupation(s, p)[1])
        sigma = math.sqrt(exact * (1.0 - exact) / n)
        z = (freq[s] - exact) / sigma if sigma > 0 else 0.0
        print(f"{s:>4}  {freq[s]:>12.6g}  {exact:>12.6g}  {z:>8.2f}")
    return EXIT_OK


def parse_tolerances(items: Sequence[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in items:
        name, sep, value = item.rpartition("=")
        key = name.strip() if sep else "*"
        try:
            tol = float(value)
        except ValueError:
            raise UsageError(f"bad tolerance {item!r}")
        if not (tol > 0 and math.isfinite(tol)) or (sep and not key):
            raise UsageError(f"bad tolerance {item!r}")
        out[key] = tol
    return out


def cmd_verify(args, consts) -> int:
    if not args.beta:
        raise UsageError("--beta list is empty")
    for beta in args.beta:
        ModeParams(beta)
    cfg = ver.SuiteConfig(
        betas=tuple(args.beta),
        seed=args.seed,
        mc_count=args.mc_count,
        kinetic_moves=args.kinetic_moves,
        consts=consts,
        tolerances=parse_tolerances(args.tol),
        only=tuple(args.only),
    )
    report = ver.run_suite(cfg)
    if not report.records:
        raise UsageError("--only matched no identity")
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
    for r in report.sorted_records():
        status = "info" if r.informational else ("PASS" if r.passed else "FAIL")
        params = " ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in r.parameters.items())
        residual = "nan" if r.residual is None or not math.isfinite(r.residual) else f"{r.residual:.3e}"
        print(f"{status:4}  {r.identity:45}  {residual:>10}  tol {r.tolerance:.1e}  {params}")
    print(f"seed={cfg.seed} overall: {'PASS' if report.overall_pass else 'FAIL'}")
    return EXIT_OK if report.overall_pass else EXIT_FAIL


COMMANDS = {"spectrum": cmd_spectrum, "sample": cmd_sample, "decompose": cmd_decompose, "verify": cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    consts = constants_by_name(args.constants)
    try:
        return COMMANDS[args.command](args, consts)
    except (UsageError, DomainError) as exc:
        print(f"planckdecomp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"planckdecomp {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
