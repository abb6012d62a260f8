"""Command-line front end.

Subcommands: plan, verify, complexity, simulate.  Network parameters come
from flags or from a ``--config`` key=value file (flags win); the seed can
additionally be overridden by the CYCACHE_SEED environment variable, which
takes precedence over both.  Exit statuses: 0 success, 1 verification
failure, 2 validation error, 3 I/O or parse error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import planio
from .delivery import verify_plan
from .errors import ParameterError, PlanFormatError, SolverError
from .grouping import SLOT_POLICIES
from .params import Scheme, SchemeParams, complexity_report, validate
from .simulator import BEAMFORMERS, SIM_SCHEMES, SimConfig, build_sim_plan, rate_points_csv, simulate

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_SOLVER = 4

TABLE_SCHEMES = (Scheme.MS, Scheme.LIN, Scheme.RED, Scheme.LE, Scheme.MB)

_CONFIG_KEYS = {
    "K": int,
    "t": int,
    "L": int,
    "alpha": int,
    "K_f": int,
    "scheme": str,
    "beamformer": str,
    "snr_db": str,
    "draws": int,
    "seed": int,
    "output": str,
    "phantom_slot_policy": str,
    "fast_fading": lambda s: s.lower() in ("1", "true", "yes"),
}


def load_config_file(path: str) -> dict:
    """Parse a key=value file (``#`` comments, blank lines ignored)."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, val = line.partition(sep)
                    break
            else:
                raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key = key.strip().replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ParameterError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _CONFIG_KEYS[key](val.strip())
    return values


def _add_param_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value config file; flags override it")
    sub.add_argument("--K", type=int, help="number of users")
    sub.add_argument("--t", type=int, help="coded caching gain")
    sub.add_argument("--L", type=int, help="transmit antennas")
    sub.add_argument("--alpha", type=int, help="spatial multiplexing gain")
    sub.add_argument("--K-f", dest="K_f", type=int, help="phantom users (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycache",
        description="Cyclic multi-antenna coded caching: plans, verification, "
        "complexity tables and rate simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="generate and export a delivery plan")
    _add_param_flags(p_plan)
    p_plan.add_argument("--scheme", choices=["LIN", "RED"], help="plan scheme (default LIN)")
    p_plan.add_argument(
        "--phantom-slot-policy", choices=list(SLOT_POLICIES), dest="phantom_slot_policy"
    )
    p_plan.add_argument("-o", "--output", help="output path (default: stdout)")

    p_verify = sub.add_parser("verify", help="check a plan file for completeness")
    p_verify.add_argument("plan_file")

    p_cx = sub.add_parser("complexity", help="subpacketization/transmission table")
    _add_param_flags(p_cx)
    p_cx.add_argument("--format", choices=["table", "csv"], default="table")
    p_cx.add_argument("-o", "--output", help="output path (default: stdout)")

    p_sim = sub.add_parser("simulate", help="Monte-Carlo symmetric-rate sweep")
    _add_param_flags(p_sim)
    p_sim.add_argument("--scheme", choices=list(SIM_SCHEMES))
    p_sim.add_argument("--beamformer", choices=list(BEAMFORMERS))
    p_sim.add_argument("--snr-db", dest="snr_db", help="comma-separated SNR grid in dB")
    p_sim.add_argument("--draws", type=int, help="channel realizations per point")
    p_sim.add_argument("--seed", type=int, help="RNG seed (env CYCACHE_SEED overrides)")
    p_sim.add_argument("--fast-fading", action="store_true", default=None, dest="fast_fading")
    p_sim.add_argument(
        "--phantom-slot-policy", choices=list(SLOT_POLICIES), dest="phantom_slot_policy"
    )
    p_sim.add_argument("-o", "--output", help="CSV output path (default: stdout)")
    return parser


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags < CYCACHE_SEED."""
    values = dict(defaults)
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for key in defaults:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    env_seed = os.environ.get("CYCACHE_SEED")
    if "seed" in defaults and env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ParameterError(f"CYCACHE_SEED is not an integer: {env_seed!r}")
    return values


def _params_from(values: dict) -> SchemeParams:
    for key in ("K", "t", "L", "alpha"):
        if values.get(key) is None:
            raise ParameterError(f"missing required parameter --{key}")
    return validate(
        SchemeParams(
            K=values["K"],
            t=values["t"],
            L=values["L"],
            alpha=values["alpha"],
            K_f=values.get("K_f") or 0,
        )
    )


def _write_out(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_plan(args: argparse.Namespace) -> int:
    values = _merged(
        args,
        dict(K=None, t=None, L=None, alpha=None, K_f=0, scheme="LIN",
             phantom_slot_policy="skip", output=None),
    )
    params = _params_from(values)
    config = SimConfig(
        params=params,
        scheme=values["scheme"],
        phantom_slot_policy=values["phantom_slot_policy"],
    )
    plan = build_sim_plan(config)
    text = "\n".join(planio.plan_lines(plan)) + "\n"
    _write_out(text, values.get("output"))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    with open(args.plan_file, encoding="utf-8") as fh:
        plan = planio.read_plan(fh)
    report = verify_plan(plan)
    if report.passed:
        print(f"plan OK: {len(plan.transmissions)} transmissions verified")
        return EXIT_OK
    for violation in report.violations:
        print(f"violation: {violation}", file=sys.stderr)
    return EXIT_VERIFY


def cmd_complexity(args: argparse.Namespace) -> int:
    values = _merged(
        args, dict(K=None, t=None, L=None, alpha=None, K_f=0, output=None)
    )
    params = _params_from(values)
    rows = []
    for scheme in TABLE_SCHEMES:
        rep = complexity_report(params, scheme)
        rows.append(
            (
                scheme.value,
                "-" if rep.subpacketization is None else str(rep.subpacketization),
                "-" if rep.transmission_count is None else str(rep.transmission_count),
            )
        )
    if args.format == "csv":
        lines = ["scheme,subpacketization,transmissions"]
        lines += [",".join(row) for row in rows]
    else:
        widths = [
            max(len(r[i]) for r in rows + [("scheme", "subpacketization", "transmissions")])
            for i in range(3)
        ]
        header = ("scheme", "subpacketization", "transmissions")
        lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
        lines += [
            "  ".join(r[i].ljust(widths[i]) for i in range(3)).rstrip() for r in rows
        ]
    _write_out("\n".join(lines) + "\n", values.get("output"))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    values = _merged(
        args,
        dict(K=None, t=None, L=None, alpha=None, K_f=0, scheme="LIN",
             beamformer="maxmin_duality", snr_db="0,10,20,30", draws=100,
             seed=0, fast_fading=False, phantom_slot_policy="skip", output=None),
    )
    params = _params_from(values)
    snr_raw = str(values["snr_db"]).strip()
    if not snr_raw:
        raise ParameterError("SNR list must not be empty")
    try:
        snr_points = tuple(float(tok) for tok in snr_raw.split(",") if tok.strip())
    except ValueError:
        raise ParameterError(f"bad SNR list: {snr_raw!r}")
    if not snr_points:
        raise ParameterError("SNR list must not be empty")
    config = SimConfig(
        params=params,
        scheme=values["scheme"],
        beamformer=values["beamformer"],
        snr_points_db=snr_points,
        draws=values["draws"],
        seed=values["seed"],
        fast_fading=bool(values["fast_fading"]),
        phantom_slot_policy=values["phantom_slot_policy"],
    )
    points = simulate(config)
    _write_out(rate_points_csv(config, points), values.get("output"))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "plan": cmd_plan,
        "verify": cmd_verify,
        "complexity": cmd_complexity,
        "simulate": cmd_simulate,
    }[args.command]
    try:
        return handler(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PlanFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
