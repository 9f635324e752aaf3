"""Command-line front end: sweeps, bipartite witnesses, covariance reports.

Every subcommand writes either CSV (fixed column order, %.12g floats) or
a JSON object with sorted keys, so repeated runs are byte identical for
the same settings, including the parallelism degree.  Diagnostics go to
stderr.  Exit codes: 0 on success, 2 when the quadrature engine cannot
reach tolerance or a per-row bound check fails (the offending grid point
is named on stderr), 3 on bad arguments or unreadable inputs.

Settings resolve in three layers: an explicit flag wins, then the
--config JSON file, then the command's built-in default (parallelism
additionally reads WEHRLKIT_PARALLELISM between config and default).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from .entropies import (
    quantum_mutual_information_noon,
    quantum_mutual_information_tmss,
    wehrl_mutual_information,
)
from .errors import ToleranceNotReached, ToolkitError
from .eur import bbm_lhs_asymptotic, eur_report, mixture_crossover, wl_lhs_stirling
from .eur import _mixture_state as mixture01_state
from .gaussian import (
    CovarianceModel,
    ModePartition,
    gaussian_witness,
    ppt_reflect,
    symplectic_eigenvalues,
    tmss_covariance,
    von_neumann_gaussian,
    wehrl_gaussian_joint,
    wehrl_gaussian_local,
)
from .husimi import NoonMarginalHusimi
from .quadrature import QuadratureSpec, entropy_functional
from .states import FockState, NoonState, ThermalState, TwoModeSqueezedState, state_to_dict

_EUR_COLUMNS = (
    "grid_param",
    "wl_lhs",
    "bbm_lhs",
    "fl_lhs",
    "bound",
    "wl_deficit",
    "bbm_deficit",
    "fl_deficit",
    "cross_check_delta",
)

_ASYMPTOTIC_COLUMNS = ("wl_lhs_asymptotic", "bbm_lhs_asymptotic")

# Keys accepted in a --config file; mirrors the flag names.
_CONFIG_KEYS = {
    "format", "output", "parallelism", "strategy", "abs_tol", "rel_tol",
    "radial_nodes", "angular_nodes", "cartesian_nodes", "radial_cutoff",
    "max_escalations",
}

_SPEC_DEFAULTS = {
    "strategy": "auto",
    "radial_nodes": 400,
    "angular_nodes": 128,
    "cartesian_nodes": 24,
    "radial_cutoff": None,
    "abs_tol": 1e-8,
    "rel_tol": 1e-8,
    "max_escalations": 3,
}

# The three-dimensional reduced grids converge more slowly; a looser
# default keeps the excitation sweep responsive.
_COMMAND_TOL = {"bipartite-noon": 1e-6}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings for one invocation."""

    command: str
    fmt: str
    output: str | None
    spec: QuadratureSpec


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits with status 3 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _bounded_int(low: int, high: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        if not low <= value <= high:
            raise argparse.ArgumentTypeError(f"must be between {low} and {high}")
        return value

    return parse


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return value


def _lambda_grid(text: str):
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            value = float(piece)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{piece!r} is not a number")
        if not 0.0 <= value < 1.0:
            raise argparse.ArgumentTypeError("each lambda must lie in [0, 1)")
        out.append(value)
    if not out:
        raise argparse.ArgumentTypeError("grid is empty")
    return out


def _add_common_args(sub):
    sub.add_argument("--format", choices=("csv", "json"), default=None)
    sub.add_argument("--output", default=None, metavar="FILE",
                     help="write the table there instead of stdout")
    sub.add_argument("--config", default=None, metavar="FILE",
                     help="JSON file of default settings; explicit flags win")
    group = sub.add_argument_group("quadrature")
    group.add_argument("--strategy", default=None,
                       choices=("auto", "radial-1d", "polar-2d",
                                "polar-reduced-3d", "tensor-cartesian"))
    group.add_argument("--abs-tol", type=_positive_float, default=None)
    group.add_argument("--rel-tol", type=_positive_float, default=None)
    group.add_argument("--radial-nodes", type=_bounded_int(16, 100_000), default=None)
    group.add_argument("--angular-nodes", type=_bounded_int(4, 8192), default=None)
    group.add_argument("--cartesian-nodes", type=_bounded_int(2, 256), default=None)
    group.add_argument("--radial-cutoff", type=_positive_float, default=None)
    group.add_argument("--max-escalations", type=_bounded_int(0, 8), default=None)
    group.add_argument("--parallelism", type=_bounded_int(1, 64), default=None,
                       help="worker threads for independent chunks; results "
                       "do not depend on this")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ToolkitError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ToolkitError(f"{path} is not valid JSON: {exc}")
    if not isinstance(payload, dict):
        raise ToolkitError(f"{path} must hold a JSON object")
    unknown = set(payload) - _CONFIG_KEYS
    if unknown:
        raise ToolkitError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return payload


def _resolve(args, config: dict, key: str, fallback):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config and config[key] is not None:
        return config[key]
    return fallback


def _run_config(args) -> RunConfig:
    config = _load_config(args.config) if args.config else {}
    tol = _COMMAND_TOL.get(args.command, 1e-8)
    env_par = os.environ.get("WEHRLKIT_PARALLELISM")
    parallelism = _resolve(args, config, "parallelism",
                           int(env_par) if env_par else 1)
    defaults = dict(_SPEC_DEFAULTS, abs_tol=tol, rel_tol=tol)
    kwargs = {key: _resolve(args, config, key, fallback)
              for key, fallback in defaults.items()}
    kwargs["cartesian_nodes_per_dim"] = kwargs.pop("cartesian_nodes")
    try:
        spec = QuadratureSpec(parallelism=int(parallelism), **kwargs)
    except ValueError as exc:
        raise ToolkitError(str(exc))
    fmt = _resolve(args, config, "format", "csv")
    if fmt not in ("csv", "json"):
        raise ToolkitError(f"unknown format {fmt!r}")
    return RunConfig(
        command=args.command,
        fmt=fmt,
        output=_resolve(args, config, "output", None),
        spec=spec,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wehrlkit",
        description="Phase-space entropy sweeps, uncertainty sums, and "
        "bipartite mutual-information witnesses.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("eur-fock", help="uncertainty sums over number states")
    p.add_argument("--n-max", type=_bounded_int(0, 50), default=10)
    p.add_argument("--asymptotics", action="store_true",
                   help="append large-n asymptote columns")
    _add_common_args(p)

    p = subs.add_parser("eur-mixture",
                        help="uncertainty sums along q|0><0| + (1-q)|1><1|")
    p.add_argument("--steps", type=_bounded_int(2, 2001), default=51)
    _add_common_args(p)

    p = subs.add_parser("eur-thermal", help="uncertainty sums over thermal states")
    p.add_argument("--beta-min", type=_positive_float, default=0.05)
    p.add_argument("--beta-max", type=_positive_float, default=20.0)
    p.add_argument("--points", type=_bounded_int(2, 2001), default=60)
    _add_common_args(p)

    p = subs.add_parser("bipartite-tmss",
                        help="mutual-information witness for two-mode squeezing")
    p.add_argument("--lambda-grid", type=_lambda_grid,
                   default=[0.0, 0.1, 0.3, 0.5, 0.7, 0.9])
    _add_common_args(p)

    p = subs.add_parser("bipartite-noon",
                        help="mutual-information witness for two-mode "
                        "excitation superpositions")
    p.add_argument("--n-max", type=_bounded_int(0, 10), default=5)
    _add_common_args(p)

    p = subs.add_parser("gaussian",
                        help="entropy and witness report for a covariance "
                        "matrix read from JSON")
    p.add_argument("--cov", required=True, metavar="FILE",
                   help='JSON file: either a matrix or {"v": ..., '
                   '"modes_a": ..., "modes_b": ...}')
    p.add_argument("--partition", default=None, metavar="NA,NB",
                   help="override the A,B mode split")
    _add_common_args(p)

    return parser


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _write_out(run: RunConfig, text: str):
    if run.output is None:
        sys.stdout.write(text)
        return
    with open(run.output, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _emit(run: RunConfig, columns, rows, extras=None):
    if run.fmt == "json":
        payload = {"command": run.command, "rows": rows}
        if extras:
            payload.update(extras)
        _write_out(run, json.dumps(payload, sort_keys=True) + "\n")
        return
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_cell(row.get(c)) for c in columns))
    _write_out(run, "\n".join(lines) + "\n")


def _eur_row(param, report) -> dict:
    return {
        "grid_param": param,
        "state": state_to_dict(report.state),
        "wl_lhs": report.wl_lhs,
        "bbm_lhs": report.bbm_lhs,
        "fl_lhs": report.fl_lhs,
        "bound": report.bound,
        "wl_deficit": report.wl_deficit,
        "bbm_deficit": report.bbm_deficit,
        "fl_deficit": report.fl_deficit,
        "cross_check_delta": report.cross_check_delta,
    }


def _named_point(what: str):
    """Re-raise a tolerance failure with the grid point spelled out."""

    class _Context:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if isinstance(exc, ToleranceNotReached):
                raise ToleranceNotReached(f"{what}: {exc}", result=exc.result)
            return False

    return _Context()


def cmd_eur_fock(args, run: RunConfig) -> int:
    columns = _EUR_COLUMNS + (_ASYMPTOTIC_COLUMNS if args.asymptotics else ())
    rows = []
    for n in range(args.n_max + 1):
        with _named_point(f"n={n}"):
            row = _eur_row(n, eur_report(FockState(n), run.spec))
        if args.asymptotics:
            row["wl_lhs_asymptotic"] = wl_lhs_stirling(n) if n >= 1 else None
            row["bbm_lhs_asymptotic"] = bbm_lhs_asymptotic(n) if n >= 1 else None
        rows.append(row)
    _emit(run, columns, rows)
    return 0


def cmd_eur_mixture(args, run: RunConfig) -> int:
    rows = []
    for i in range(args.steps):
        q = i / (args.steps - 1)
        with _named_point(f"q={q:.6g}"):
            rows.append(_eur_row(q, eur_report(mixture01_state(q), run.spec)))
    crossover = mixture_crossover(run.spec)
    if crossover is None:
        sys.stderr.write("no ordering crossover inside the sampled bracket\n")
    else:
        sys.stderr.write(
            f"homodyne and phase-space sums cross at q = {crossover:.6g}\n"
        )
    _emit(run, _EUR_COLUMNS, rows, extras={"crossover_q": crossover})
    return 0


def cmd_eur_thermal(args, run: RunConfig) -> int:
    if args.beta_min >= args.beta_max:
        raise ToolkitError("--beta-min must be below --beta-max")
    ratio = (args.beta_max / args.beta_min) ** (1.0 / (args.points - 1))
    rows = []
    for i in range(args.points):
        b = args.beta_min * ratio**i
        with _named_point(f"beta_omega={b:.6g}"):
            rows.append(_eur_row(b, eur_report(ThermalState(b), run.spec)))
    _emit(run, _EUR_COLUMNS, rows)
    return 0


def cmd_bipartite_tmss(args, run: RunConfig) -> int:
    columns = (
        "lam",
        "mutual_information",
        "mutual_quadrature",
        "cross_check_delta",
        "quadrature_error",
        "conditional_entropy",
        "quantum_mutual_information",
        "entangled",
    )
    rows = []
    for lam in args.lambda_grid:
        cov = tmss_covariance(lam)
        conditional, mutual = gaussian_witness(cov)
        with _named_point(f"lambda={lam:.6g}"):
            cross = wehrl_mutual_information(TwoModeSqueezedState(lam), run.spec)
        qmi = quantum_mutual_information_tmss(lam)
        tol = max(1e-9, 10.0 * cross.error_estimate)
        if mutual > qmi + tol:
            sys.stderr.write(
                f"lambda={lam:.6g}: mutual information {mutual:.9g} exceeds "
                f"the quantum mutual information {qmi:.9g}\n"
            )
            return 2
        rows.append({
            "lam": lam,
            "mutual_information": mutual,
            "mutual_quadrature": cross.value,
            "cross_check_delta": abs(mutual - cross.value),
            "quadrature_error": cross.error_estimate,
            "conditional_entropy": conditional,
            "quantum_mutual_information": qmi,
            "entangled": bool(mutual > tol),
        })
    _emit(run, columns, rows)
    return 0


def cmd_bipartite_noon(args, run: RunConfig) -> int:
    columns = (
        "n",
        "marginal_entropy",
        "mutual_information",
        "conditional_entropy",
        "quadrature_error",
        "quantum_mutual_information",
        "entangled",
    )
    rows = []
    for n in range(args.n_max + 1):
        with _named_point(f"n={n}"):
            marginal = entropy_functional(NoonMarginalHusimi(n), run.spec)
            mutual = wehrl_mutual_information(NoonState(n), run.spec)
        err = mutual.error_estimate + marginal.error_estimate
        tol = max(1e-9, 10.0 * mutual.error_estimate)
        rows.append({
            "n": n,
            "marginal_entropy": marginal.value,
            "mutual_information": mutual.value,
            "conditional_entropy": marginal.value - mutual.value,
            "quadrature_error": err,
            "quantum_mutual_information": quantum_mutual_information_noon(n),
            "entangled": bool(mutual.value > tol),
        })
    _emit(run, columns, rows)
    return 0


def _load_covariance(path: str, partition_text) -> CovarianceModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ToolkitError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ToolkitError(f"{path} is not valid JSON: {exc}")
    if isinstance(payload, dict):
        matrix = np.asarray(payload.get("v"), dtype=float)
        n_a = int(payload.get("modes_a", 0))
        n_b = int(payload.get("modes_b", 0))
    else:
        matrix = np.asarray(payload, dtype=float)
        n_a, n_b = 0, 0
    if partition_text is not None:
        pieces = partition_text.split(",")
        if len(pieces) != 2:
            raise ToolkitError("--partition expects NA,NB")
        n_a, n_b = int(pieces[0]), int(pieces[1])
    if n_a == 0 and n_b == 0:
        if matrix.ndim != 2 or matrix.shape[0] % 2:
            raise ToolkitError("covariance must be square with even size")
        n_a, n_b = matrix.shape[0] // 2, 0
    return CovarianceModel.from_v(matrix, ModePartition(n_a, n_b))


def cmd_gaussian(args, run: RunConfig) -> int:
    cov = _load_covariance(args.cov, args.partition)
    nus = cov.symplectic_eigenvalues()
    det_c = float(np.linalg.det(cov.c))
    report = {
        "modes_a": cov.partition.n_a,
        "modes_b": cov.partition.n_b,
        "symplectic_eigenvalues": [float(v) for v in nus],
        "pure": bool(np.all(nus <= 0.5 + 1e-7)),
        "von_neumann_entropy": von_neumann_gaussian(cov),
        "wehrl_joint": wehrl_gaussian_joint(cov),
        "det_c": det_c,
        "det_v_plus_half": float(np.linalg.det(cov.v + 0.5 * np.eye(cov.dim))),
        "det_c_at_most_one": bool(det_c <= 1.0 + 1e-10),
    }
    if cov.partition.bipartite:
        conditional, mutual = gaussian_witness(cov)
        report["wehrl_local_a"] = wehrl_gaussian_local(cov, keep="a")
        report["wehrl_local_b"] = wehrl_gaussian_local(cov, keep="b")
        report["conditional_entropy"] = conditional
        report["mutual_information"] = mutual
        if report["pure"]:
            report["entangled"] = bool(mutual > 1e-9)
        if cov.partition.n_a == 1 and cov.partition.n_b == 1:
            reflected = ppt_reflect(cov.v, cov.partition)
            nu_min = float(np.min(symplectic_eigenvalues(reflected)))
            report["ppt_min_symplectic"] = nu_min
            report["ppt_verdict"] = (
                "entangled" if nu_min < 0.5 - 1e-9 else "no-violation"
            )
    _write_out(run, json.dumps(report, sort_keys=True) + "\n")
    return 0


_COMMANDS = {
    "eur-fock": cmd_eur_fock,
    "eur-mixture": cmd_eur_mixture,
    "eur-thermal": cmd_eur_thermal,
    "bipartite-tmss": cmd_bipartite_tmss,
    "bipartite-noon": cmd_bipartite_noon,
    "gaussian": cmd_gaussian,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = _run_config(args)
        return _COMMANDS[args.command](args, run)
    except ToleranceNotReached as exc:
        sys.stderr.write(f"quadrature did not converge: {exc}\n")
        return 2
    except ToolkitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
