"""Command-line entry point.

Subcommands: ``simulate``, ``rate``, ``scan``, ``attack-bench`` and
``code-check``. Every option may also come from a flat ``key=value`` config
file given with ``--config``; command-line flags take precedence.

Exit codes: 0 success, 1 validation error, 2 aborted protocol run.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import attacks, coding, protocol, rates
from .channel import ChannelParams

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORTED = 2
SEED_ENV = "QSDC_SEED"


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


# (flag, type, default, help) per subcommand. Defaults are applied after the
# config file is merged so that unset flags fall through to config values.
OPTIONS: dict[str, list[tuple[str, Callable, object, str]]] = {
    "simulate": [
        ("ne", int, 10_000, "block size N_e"),
        ("c", float, 0.25, "check fraction C in (0, 1/2]"),
        ("p0", float, 0.5, "probability of message bit 0"),
        ("eta-f", float, 1.0, "forward transmission probability"),
        ("eta-b", float, None, "backward transmission probability (default: eta-f)"),
        ("p-flip", float, 0.0, "Pauli error probability on both passes"),
        ("p-flip-f", float, None, "forward Pauli error probability (overrides p-flip)"),
        ("p-flip-b", float, None, "backward Pauli error probability (overrides p-flip)"),
        ("pa", float, 0.0, "Alice encoding-error probability"),
        ("threshold", float, rates.THRESHOLD, "control-mode abort threshold"),
        ("attack", str, "none", "none | identity | cnot | phase_covariant"),
        ("theta", float, None, "phase_covariant angle in [0, pi/2]"),
        ("seed", int, None, f"master seed (default: ${SEED_ENV} or 0)"),
        ("out", str, None, "write the summary record to this file"),
    ],
    "rate": [
        ("p0", float, 0.5, "probability of message bit 0"),
        ("xi", float, 0.0, "conjugate-basis disturbance"),
        ("e", float, 0.0, "control-mode error rate"),
        ("eta-b", float, 0.0, "backward loss term"),
        ("out", str, None, "write the record to this file"),
    ],
    "scan": [
        ("pa", float, 0.01, "Alice encoding error p_A"),
        ("pc", float, 0.03, "channel error p_c"),
        ("steps", int, 100, "grid steps per axis"),
        ("out", str, None, "CSV path; the boundary goes to <stem>.boundary.csv"),
    ],
    "attack-bench": [
        ("p0", float, 0.5, "probability of message bit 0"),
        ("thetas", _float_list, [0.25 * math.pi, 0.5 * math.pi], "phase_covariant angles"),
        ("random", int, 0, "number of Haar-random attacks to add"),
        ("d-e", int, 2, "ancilla dimension of random attacks"),
        ("seed", int, None, f"seed for random attacks (default: ${SEED_ENV} or 0)"),
        ("out", str, None, "CSV path"),
    ],
    "code-check": [
        ("experiment", str, "shannon", "shannon | sphere | eve"),
        ("n", int, 15, "block length"),
        ("p1", float, 0.05, "flip probability (shannon)"),
        ("eta", float, 0.0, "erasure probability (shannon)"),
        ("rates", _float_list, [0.1, 0.3, 0.5, 0.7, 0.9], "code rates (shannon)"),
        ("ns", _int_list, [10, 20, 40, 64], "block lengths (sphere)"),
        ("ps", _float_list, [0.1, 0.25], "flip probabilities (sphere)"),
        ("pa", float, 0.01, "Alice encoding error (eve)"),
        ("pc", float, 0.03, "channel error (eve)"),
        ("eta-b", float, 0.0, "Bob erasure rate (eve)"),
        ("eta-es", _float_list, [0.0, 0.25, 0.5, 0.75, 1.0], "Eve erasure rates (eve)"),
        ("trials", int, 5000, "Monte Carlo trials"),
        ("seed", int, None, f"seed (default: ${SEED_ENV} or 0)"),
        ("out", str, None, "CSV path"),
    ],
}


def read_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("_", "-").lower()] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsdc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value config file")
        for flag, typ, _, help_ in opts:
            p.add_argument(f"--{flag}", type=typ, default=None, help=help_)
    return parser


def resolve(command: str, ns: argparse.Namespace) -> dict[str, object]:
    """Merge flags over config-file values over defaults."""
    opts = {flag: (typ, default) for flag, typ, default, _ in OPTIONS[command]}
    file_vals = read_config(ns.config) if ns.config else {}
    unknown = sorted(set(file_vals) - set(opts))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    merged = {}
    for flag, (typ, default) in opts.items():
        value = getattr(ns, flag.replace("-", "_"))
        if value is None and flag in file_vals:
            try:
                value = typ(file_vals[flag])
            except ValueError as exc:
                raise ConfigError(f"bad value for {flag}: {exc}") from exc
        merged[flag.replace("-", "_")] = default if value is None else value
    if "seed" in merged and merged["seed"] is None:
        merged["seed"] = int(os.environ.get(SEED_ENV, "0"))
    return merged


def _fmt(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        text = f"{v:.6f}"
        return "0.000000" if text == "-0.000000" else text
    return str(v)


def format_record(record: dict[str, object]) -> str:
    return "".join(f"{k}={_fmt(v)}\n" for k, v in record.items())


def format_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _attack_from(name: str, theta: Optional[float]) -> Optional[attacks.AttackUnitary]:
    if name == "none":
        return None
    return attacks.standard_attack(name, theta)


def cmd_simulate(o: dict) -> int:
    p_f = o["p_flip"] if o["p_flip_f"] is None else o["p_flip_f"]
    p_b = o["p_flip"] if o["p_flip_b"] is None else o["p_flip_b"]
    eta_b = o["eta_f"] if o["eta_b"] is None else o["eta_b"]
    cfg = protocol.ProtocolConfig(
        N_e=o["ne"],
        C=o["c"],
        P0=o["p0"],
        e_threshold=o["threshold"],
        forward=ChannelParams(o["eta_f"], p_f),
        backward=ChannelParams(eta_b, p_b),
        p_A=o["pa"],
        attack=_attack_from(o["attack"], o["theta"]),
        seed=o["seed"],
    )
    stats = protocol.run_protocol(cfg).stats
    _emit(format_record(stats.summary()), o["out"])
    return EXIT_ABORTED if stats.aborted else EXIT_OK


def cmd_rate(o: dict) -> int:
    inp = rates.RateInputs(P0=o["p0"], xi=o["xi"], e=o["e"], eta_b=o["eta_b"])
    r_s, I_AB, I_AE = rates.secure_qubit_rate(inp)
    record = {
        "r_s": r_s,
        "I_AB": I_AB,
        "I_AE": I_AE,
        "r_s_no_noise": attacks.secure_rate_closed_form(inp.P0, inp.xi),
        "threshold_ok": rates.threshold_check(inp.e),
    }
    _emit(format_record(record), o["out"])
    return EXIT_OK


def boundary_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".boundary.csv")


def scan_csv(scan: rates.BoundaryScan) -> tuple[str, str]:
    grid = format_csv(("eta_E", "eta_B", "r"), scan.rows())
    curve = format_csv(("eta_B", "eta_E_star"), zip(map(float, scan.axis), map(float, scan.eta_E_star)))
    return grid, curve


def cmd_scan(o: dict) -> int:
    scan = rates.boundary_scan(o["steps"], o["pa"], o["pc"])
    grid, curve = scan_csv(scan)
    i, j = np.unravel_index(np.argmax(scan.r), scan.r.shape)
    summary = {
        "max_r": float(scan.r[i, j]),
        "argmax_eta_E": float(scan.axis[j]),
        "argmax_eta_B": float(scan.axis[i]),
        "eta_E_star_at_0": float(scan.eta_E_star[0]),
    }
    if o["out"]:
        for path, text in ((Path(o["out"]), grid), (boundary_path(o["out"]), curve)):
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        sys.stdout.write(format_record(summary))
    else:
        sys.stdout.write(grid)
    return EXIT_OK


def cmd_attack_bench(o: dict) -> int:
    fixtures = [attacks.standard_attack("identity"), attacks.standard_attack("cnot")]
    fixtures += [attacks.standard_attack("phase_covariant", t) for t in o["thetas"]]
    rng = np.random.default_rng(o["seed"])
    fixtures += [attacks.random_attack(o["d_e"], rng) for _ in range(o["random"])]
    rows = []
    for a in fixtures:
        b = attacks.bench_attack(a, o["p0"])
        rows.append((b.name, b.e, b.xi, b.r_numeric, b.r_closed, b.gap))
    _emit(format_csv(("attack", "e", "xi", "r_numeric", "r_closed", "gap"), rows), o["out"])
    return EXIT_OK


def cmd_code_check(o: dict) -> int:
    exp = o["experiment"]
    if exp == "shannon":
        rows = []
        for R in o["rates"]:
            s = coding.shannon_experiment(o["n"], R, o["p1"], o["eta"], o["trials"], o["seed"])
            rows.append((R, math.ceil(R * o["n"] - 1e-12), s))
        text = format_csv(("R", "k", "success_rate"), rows)
    elif exp == "sphere":
        rows = []
        for p in o["ps"]:
            for n in o["ns"]:
                t = math.floor(p * n)
                v = coding.sphere_volume(n, t)
                rows.append((n, p, t, v, math.log2(v) / n, rates.binary_entropy(p)))
        text = format_csv(("n", "p", "t", "volume", "exponent", "h_p"), rows)
    elif exp == "eve":
        rows = []
        for eta_E in o["eta_es"]:
            f = rates.FecInputs(eta_E=eta_E, eta_B=o["eta_b"], p_A=o["pa"], p_c=o["pc"])
            res = coding.eve_ambiguity_experiment(o["n"], f, o["trials"], o["seed"])
            rows.append((eta_E, res.k, res.bob_success, res.eve_list_exponent, rates.secure_efficiency(f)))
        text = format_csv(("eta_E", "k", "bob_success", "eve_list_exponent", "secure_efficiency"), rows)
    else:
        raise ConfigError(f"unknown experiment {exp!r}")
    _emit(text, o["out"])
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "rate": cmd_rate,
    "scan": cmd_scan,
    "attack-bench": cmd_attack_bench,
    "code-check": cmd_code_check,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[ns.command](resolve(ns.command, ns))
    except (ValueError, OSError) as exc:
        print(f"qsdc {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(dispatch())
