"""Command-line entry point ``zerofree``.

Exit codes: 0 zero-free evidence (or plain success), 1 zeros found,
2 configuration or evaluation error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .argprinciple import DEFAULT_TOL, count_zeros_detailed, locate_zeros
from .boundary import DEFAULT_SAMPLES_PER_UNIT, Part, StripRegion
from .certify import (
    INCONCLUSIVE,
    ZERO_FREE,
    ZEROS_FOUND,
    CertifyConfig,
    certify_sequence,
    certify_strip,
    check_document,
    dumps,
    loads,
)
from .errors import RegionError, UnknownFunction, ZeroFreeError
from .specialfns import get_function

EXIT_OK = 0
EXIT_ZEROS = 1
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3

VERDICT_EXIT = {ZERO_FREE: EXIT_OK, ZEROS_FOUND: EXIT_ZEROS, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    function: str
    region: dict = field(default_factory=dict)
    part: str = "im"
    tolerances: dict = field(default_factory=dict)
    sampling: dict = field(default_factory=dict)
    output: str = "-"
    output_format: str = "table"

    def echo(self) -> str:
        bits = [f"subcommand={self.subcommand}", f"function={self.function}"]
        bits += [f"{k}={v}" for k, v in self.region.items()]
        bits += [f"part={self.part}"]
        bits += [f"{k}={v}" for k, v in {**self.tolerances, **self.sampling}.items()]
        bits += [f"output={self.output}", f"format={self.output_format}"]
        return "# zerofree " + __version__ + " " + " ".join(bits)


def fmt17(x: float) -> str:
    """17 significant digits, plain zero for exact zeros."""
    x = float(x)
    if x == 0:
        return "0"
    if not math.isfinite(x):
        return str(x)
    return format(x, "#.17g") if 1e-5 <= abs(x) < 1e17 else format(x, ".16e")


def _function(name):
    try:
        return get_function(name)
    except UnknownFunction as exc:
        raise ConfigError(str(exc)) from exc


def _region(args, need_finite=True) -> StripRegion:
    pos = getattr(args, "region", None) or []
    if pos and len(pos) != 4:
        raise ConfigError("region needs exactly four numbers: a b tmin tmax")
    vals = dict(zip(("a", "b", "tmin", "tmax"), pos))
    for key in ("a", "b", "tmin", "tmax"):
        flag = getattr(args, key, None)
        if flag is not None:
            vals[key] = flag
    if "a" not in vals:
        raise ConfigError("missing region parameter a")
    try:
        region = StripRegion(float(vals["a"]), float(vals.get("b", math.inf)),
                             float(vals.get("tmin", 0.0)), float(vals.get("tmax", math.inf)))
    except (RegionError, ValueError) as exc:
        raise ConfigError(f"bad region: {exc}") from exc
    if need_finite and not math.isfinite(region.t_max):
        raise ConfigError("tmax must be finite")
    return region


def _part(text) -> Part:
    try:
        return Part.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _certify_config(args) -> CertifyConfig:
    heights = tuple(float(h) for h in args.limit_heights.split(",")) if args.limit_heights else ()
    return CertifyConfig(
        tol=args.tol,
        samples_per_unit=args.samples_per_unit,
        zero_tolerance=args.zero_tolerance,
        decay_model=args.decay_model,
        sigma_cap=args.sigma_cap,
        uniform_limit=args.uniform_limit,
        limit_heights=heights,
        locate_resolution=args.resolution,
        shift=args.shift,
    )


def _write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        return
    tmp = path + ".partial"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# -- subcommands ---------------------------------------------------------------------


def cmd_eval(args) -> int:
    f = _function(args.function)
    s = complex(args.re, args.im)
    try:
        value = f(s)
    except ZeroFreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{fmt17(value.real)} {fmt17(value.imag)}")
    return EXIT_OK


def figure_grid(sigma_min: float, sigma_max: float, step: float) -> np.ndarray:
    if step <= 0:
        raise ConfigError("step must be positive")
    if sigma_max < sigma_min:
        raise ConfigError("sigma-max must not be below sigma-min")
    n = int(math.floor((sigma_max - sigma_min) / step + 1e-9)) + 1
    return sigma_min + step * np.arange(n)


def cmd_figure(args) -> int:
    f = _function(args.function)
    sig = figure_grid(args.sigma_min, args.sigma_max, args.step)
    cfg = RunConfig("figure", f.name, {"t": args.t, "sigma_min": args.sigma_min, "sigma_max": args.sigma_max},
                    sampling={"step": args.step}, output=args.output, output_format="csv")
    print(cfg.echo(), file=sys.stderr)
    try:
        values = f(sig + 1j * args.t)
    except ZeroFreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    rows = [("sigma", "t", "re", "im")]
    rows += [(repr(float(x)), repr(float(args.t)), repr(float(v.real)), repr(float(v.imag))) for x, v in zip(sig, values)]
    if args.output == "-":
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
        return EXIT_OK
    tmp = args.output + ".partial"
    try:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        os.replace(tmp, args.output)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
    print(f"wrote {len(rows) - 1} rows to {args.output}", file=sys.stderr)
    return EXIT_OK


def _summary(cert) -> str:
    v = cert.verdict
    lines = [f"verdict: {v.kind}"]
    if v.count is not None:
        lines.append(f"count: {v.count}")
    if v.reason:
        lines.append(f"reason: {v.reason}")
    if v.flags:
        lines.append("flags: " + ", ".join(v.flags))
    if cert.sign is not None:
        lines.append("sign: " + cert.sign.classification.value + " ("
                     + ", ".join(f"{s.name}={s.classification.value}" for s in cert.sign.per_segment) + ")")
    for b in v.boxes:
        lines.append(_box_line(b))
    return "\n".join(lines)


def _box_line(b) -> str:
    return f"{fmt17(b.corner.real)} {fmt17(b.corner.imag)} {fmt17(b.width)} {fmt17(b.height)} {b.contained_count}"


def cmd_certify(args) -> int:
    f = _function(args.function)
    region = _region(args)
    part = _part(args.part)
    config = _certify_config(args)
    if not math.isfinite(region.b) and config.sigma_cap is None:
        raise ConfigError("b = inf needs --sigma-cap")
    run = RunConfig("certify", f.name, region.to_dict(), part.value, {"tol": config.tol},
                    {"samples_per_unit": config.samples_per_unit}, args.output, "certificate")
    print(run.echo(), file=sys.stderr)
    cert = certify_strip(f, region, part, config)
    if args.output:
        _write_text(args.output, cert.dumps())
    print(_summary(cert))
    return VERDICT_EXIT[cert.verdict.kind]


def cmd_certify_seq(args) -> int:
    f = _function(args.function)
    region = _region(args, need_finite=False)
    part = _part(args.part)
    config = _certify_config(args)
    try:
        heights = [float(h) for h in args.tmax_list.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --tmax-list: {exc}") from exc
    run = RunConfig("certify-seq", f.name, region.to_dict(), part.value, {"tol": config.tol},
                    {"samples_per_unit": config.samples_per_unit, "tmax_list": heights}, args.output, "certificate")
    print(run.echo(), file=sys.stderr)
    try:
        seq = certify_sequence(f, region, heights, part, config)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.output:
        _write_text(args.output, dumps(seq.to_document()))
    for h, sup, cert in zip(seq.heights, seq.top_sups, seq.certificates):
        print(f"tmax={fmt17(h)} verdict={cert.verdict.kind} top_sup={fmt17(sup)}")
    print(f"top-edge trend: {seq.trend}")
    kinds = set(seq.verdicts)
    if ZEROS_FOUND in kinds:
        return EXIT_ZEROS
    if INCONCLUSIVE in kinds:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_count(args) -> int:
    f = _function(args.function)
    region = _region(args)
    try:
        result = count_zeros_detailed(f, region, args.tol, args.samples_per_unit)
    except ZeroFreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(result.count)
    if args.verbose:
        w = result.winding
        print(f"raw {fmt17(w.raw_integral.real)} {fmt17(w.raw_integral.imag)} residual {fmt17(w.residual)}",
              file=sys.stderr)
    return EXIT_OK


def cmd_locate(args) -> int:
    f = _function(args.function)
    region = _region(args)
    if args.resolution <= 0:
        raise ConfigError("resolution must be positive")
    try:
        boxes = locate_zeros(f, region, args.resolution, args.tol)
    except ZeroFreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for b in boxes:
        print(_box_line(b))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            doc = loads(fh.read())
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    problems = check_document(doc)
    for p in problems:
        print(p)
    if problems:
        return EXIT_ERROR
    print(f"verdict {doc['verdict']['kind']} reproduced from stored evidence")
    return VERDICT_EXIT[doc["verdict"]["kind"]]


def selftest_checks():
    """Small fast checks with known answers: (name, passed, detail)."""
    out = []
    g = get_function("gamma")(0.5)
    out.append(("gamma(1/2) = sqrt(pi)", abs(g - math.sqrt(math.pi)) < 1e-13, fmt17(g.real)))
    z = get_function("zeta")(2.0)
    out.append(("zeta(2) = pi^2/6", abs(z - math.pi ** 2 / 6) < 1e-13, fmt17(z.real)))
    x = get_function("xi")(0.5 + 14j)
    out.append(("xi real on the critical line", abs(x.imag) <= 1e-10 * abs(x), fmt17(x.imag)))
    n = count_zeros_detailed(get_function("poly:1,0,1"), StripRegion(-2, 2, 0.5, 2)).count
    out.append(("one root of z^2+1 in the upper box", n == 1, str(n)))
    n = count_zeros_detailed(get_function("zeta"), StripRegion(0, 1, 1, 30)).count
    out.append(("three zeta zeros below height 30", n == 3, str(n)))
    return out


def cmd_selftest(args) -> int:
    ok = True
    for name, passed, detail in selftest_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
    return EXIT_OK if ok else EXIT_ERROR


# -- parser ----------------------------------------------------------------------------


def _add_region(p, positional=True):
    if positional:
        p.add_argument("region", nargs="*", type=float, metavar="A B TMIN TMAX",
                       help="region corners; the --a/--b/--tmin/--tmax flags override")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float, help="right edge (omit for b = inf)")
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)


def _add_certify_options(p):
    p.add_argument("--part", default="im", help="im or re (default im)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="winding quadrature tolerance")
    p.add_argument("--samples-per-unit", type=float, default=DEFAULT_SAMPLES_PER_UNIT)
    p.add_argument("--zero-tolerance", type=float, default=None,
                   help="sign band; default 1e-9 * (1 + max |f| on the boundary)")
    p.add_argument("--decay-model", choices=["C_over_t", "C_over_t_plus_abs_sigma"], default=None)
    p.add_argument("--sigma-cap", type=float, default=None, help="truncation for b = inf")
    p.add_argument("--uniform-limit", action="store_true", help="also record sup |f| on horizontal cuts")
    p.add_argument("--limit-heights", default="", help="comma-separated cut heights")
    p.add_argument("--resolution", type=float, default=0.1, help="box size when zeros are found")
    p.add_argument("--shift", type=float, default=0.0, help="also integrate f'/(f + i*shift)")
    p.add_argument("--output", "-o", default=None, help="certificate document path ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerofree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None, help="cap worker threads (sets ZEROFREE_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a catalog function at one point")
    p.add_argument("function")
    p.add_argument("re", type=float)
    p.add_argument("im", type=float, nargs="?", default=0.0)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("figure", help="CSV of f(sigma + i t) on a sigma grid")
    p.add_argument("function")
    p.add_argument("--t", type=float, default=10.0)
    p.add_argument("--sigma-min", type=float, default=0.5)
    p.add_argument("--sigma-max", type=float, default=40.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(handler=cmd_figure)

    p = sub.add_parser("certify", help="zero-free certificate for one truncated region")
    p.add_argument("function")
    _add_region(p)
    _add_certify_options(p)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("certify-seq", help="certificates for increasing truncation heights")
    p.add_argument("function")
    _add_region(p, positional=False)
    p.add_argument("--tmax-list", required=True, help="comma-separated increasing heights")
    _add_certify_options(p)
    p.set_defaults(handler=cmd_certify_seq)

    p = sub.add_parser("count", help="argument-principle zero count")
    p.add_argument("function")
    _add_region(p)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--samples-per-unit", type=float, default=DEFAULT_SAMPLES_PER_UNIT)
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(handler=cmd_count)

    p = sub.add_parser("locate", help="boxes around the zeros, one per line: corner re, corner im, width, height, count")
    p.add_argument("function")
    _add_region(p)
    p.add_argument("--resolution", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(handler=cmd_locate)

    p = sub.add_parser("verify", help="re-derive the verdict of a stored certificate")
    p.add_argument("path")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("selftest", help="quick known-answer checks")
    p.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    if args.threads is not None:
        os.environ["ZEROFREE_THREADS"] = str(max(1, args.threads))
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ZeroFreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
