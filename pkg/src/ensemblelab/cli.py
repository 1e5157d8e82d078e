"""Command-line front end: ``ensemblelab <subcommand> [flags]``.

Exit status is 0 on success, 1 on usage errors and 2 on domain errors (a JSON
object ``{"error": ..., "message": ...}`` is written to stderr).
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import distill, gpmaps, macrolimit, maxent, spectra, transitions
from .config import ToleranceConfig
from .errors import EnsembleError

SUBCOMMANDS = ("fit", "reach", "work", "ergotropy", "swap", "trivialize",
               "gpmap", "breakdown", "distill", "clt")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    mem_budget: int = distill.DEFAULT_MEM_BUDGET
    out: str = None
    fmt: str = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        flags = sorted({o for a in self._actions for o in a.option_strings})
        sys.stderr.write(f"{self.prog}: error: {message}\n"
                         f"valid flags: {' '.join(flags)}\n")
        raise SystemExit(1)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = _Parser(prog="ensemblelab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--spectrum", metavar="FILE", help="observables JSON file")
    parser.add_argument("--spectrum2", metavar="FILE",
                        help="second bath spectrum (trivialize; defaults to --spectrum)")
    parser.add_argument("--beta", type=_floats, help="inverse temperature(s)")
    parser.add_argument("--energy", type=float, help="macrostate mean energy")
    parser.add_argument("--values", type=_floats, help="macrostate mean values")
    parser.add_argument("--p", type=_floats, help="diagonal state populations")
    parser.add_argument("--copies", type=_ints, help="copy numbers")
    parser.add_argument("--grid", type=int, default=41, help="energy grid points")
    parser.add_argument("--max-denominator", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--compat-tol", type=float, default=1e-10)
    parser.add_argument("--decision-tol", type=float, default=1e-9)
    parser.add_argument("--out", metavar="FILE")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"))
    return parser


def _num(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dumps(obj):
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}"
                               for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None:
        return "null"
    return json.dumps(obj)


def _csv(header, rows, footer=()):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_num(v) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    lines.extend(footer)
    return "\n".join(lines) + "\n"


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"{args.command} requires --{name.replace('_', '-')}")


def _load_spectrum(path):
    with open(path) as fh:
        data = json.load(fh)
    return spectra.ObservableSet.from_dict(data), data.get("values")


def _macrostate(args, obs, file_values):
    if args.energy is not None:
        values = [args.energy]
    elif args.values is not None:
        values = args.values
    elif file_values is not None:
        values = file_values
    else:
        raise UsageError(f"{args.command} requires --energy or --values")
    return spectra.Macrostate(obs, values)


def _single_beta(args):
    _need(args, "beta")
    return args.beta[0]


def cmd_fit(args, cfg):
    obs, vals = _load_spectrum(args.spectrum)
    m = _macrostate(args, obs, vals)
    if obs.n == 1:
        sol = maxent.fit_canonical(obs, m.e, cfg.tolerance)
    else:
        sol = maxent.fit_gge(obs, m.values, cfg.tolerance)
    return "json", sol.to_dict()


def cmd_reach(args, cfg):
    _need(args, "p", "beta")
    obs, vals = _load_spectrum(args.spectrum)
    m = _macrostate(args, obs, vals)
    target = spectra.DiagonalState(args.p)
    if obs.n == 1:
        verdict = transitions.reachable_canonical(m, target, args.beta[0], cfg.tolerance)
    else:
        verdict = transitions.reachable_gge(m, target, args.beta, cfg.tolerance)
    return "json", verdict.to_dict()


def cmd_work(args, cfg):
    obs, vals = _load_spectrum(args.spectrum)
    m = _macrostate(args, obs, vals)
    return "json", transitions.work_bound(m, _single_beta(args), cfg.tolerance).to_dict()


def cmd_ergotropy(args, cfg):
    _need(args, "p")
    obs, _ = _load_spectrum(args.spectrum)
    return "json", {"ergotropy": transitions.ergotropy(spectra.DiagonalState(args.p), obs)}


def cmd_swap(args, cfg):
    obs, vals = _load_spectrum(args.spectrum)
    m = _macrostate(args, obs, vals)
    beta = _single_beta(args)
    if args.p is not None:
        state = spectra.DiagonalState(args.p)
    else:
        state = spectra.sample_compatible(m, 1, cfg.seed, cfg.tolerance)[0]
    res = transitions.rescaled_swap(state, m, beta, cfg.tolerance)
    return "json", {"system_in": state.p, "new_system": res.new_system.p,
                    "new_env": res.new_env.p, "env_spectrum": res.env_spectrum.h,
                    "delta_mean_energy": res.delta_mean_energy}


def cmd_trivialize(args, cfg):
    _need(args, "beta")
    if len(args.beta) != 2:
        raise UsageError("trivialize takes --beta b1,b2")
    obs1, _ = _load_spectrum(args.spectrum)
    obs2 = _load_spectrum(args.spectrum2)[0] if args.spectrum2 else obs1
    copies = args.copies or [1, 2, 3, 4, 5]
    rows = [(n, transitions.trivialization_witness(obs1, args.beta[0], obs2,
                                                   args.beta[1], n, n))
            for n in copies]
    return "csv", (("n", "witness"), rows, ())


def cmd_gpmap(args, cfg):
    obs, vals = _load_spectrum(args.spectrum)
    beta = _single_beta(args)
    const = gpmaps.lp_constants(obs, beta)
    out = {"f_const": const.f_const, "k_const": const.k_const,
           "sum_h2": float(obs.h @ obs.h), "t": gpmaps.t_matrix(obs),
           "e_beta": float(maxent.thermal_energy(obs, [beta])[0])}
    if args.energy is not None or vals is not None:
        e = _macrostate(args, obs, vals).e
        lo, hi = gpmaps.gp_energy_bounds(e, obs, beta, const)
        out.update({"e": e, "gp_min": lo, "gp_max": hi})
    return "json", out


def cmd_breakdown(args, cfg):
    obs, _ = _load_spectrum(args.spectrum)
    beta = _single_beta(args)
    res = gpmaps.breakdown_scan(obs, beta, gpmaps.interior_grid(obs, args.grid))
    if (args.fmt or "csv") == "json":
        return "json", {"rows": res.rows, "strict_gap": res.strict_gap,
                        "f_const": res.constants.f_const,
                        "k_const": res.constants.k_const}
    rows = [[r[c] for c in res.columns] for r in res.rows]
    footer = (f"# strict_gap={'true' if res.strict_gap else 'false'}",)
    return "csv", (res.columns, rows, footer)


def cmd_distill(args, cfg):
    _need(args, "p", "copies")
    obs, _ = _load_spectrum(args.spectrum)
    # distill works in the caller's level order
    table = np.empty_like(obs.eigenvalues)
    table[:, obs.order] = obs.eigenvalues
    ispec = distill.integerize(spectra.ObservableSet(table), args.max_denominator)
    initial = spectra.DiagonalState(args.p)
    res = distill.distillation_curve(ispec, initial, args.copies, cfg.mem_budget)
    rows = [(r.copies, r.tv_to_target, r.log_dim_max, r.n_eigenspaces) for r in res]
    return "csv", (("copies", "tv_to_target", "log_dim_max", "n_eigenspaces"), rows, ())


def cmd_clt(args, cfg):
    _need(args, "p", "beta")
    obs, _ = _load_spectrum(args.spectrum)
    beta = args.beta[0]
    dist = macrolimit.subsystem_energy_change(
        spectra.DiagonalState(args.p), maxent.gibbs_state(obs, [beta]), obs)
    rows = []
    for N in args.copies or [16, 64, 256]:
        rep = macrolimit.iid_moments(dist, N, max_order=4)
        rows.append((N, rep.moment(2), rep.moment(3), rep.moment(4),
                     rep.gaussian(2), rep.gaussian(4), rep.lyapunov_ratio))
    header = ("N", "mu2", "mu3", "mu4", "gauss2", "gauss4", "lyapunov_ratio")
    return "csv", (header, rows, ())


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def _render(kind, payload, fmt):
    if kind == "json":
        return dumps(payload) + "\n"
    header, rows, footer = payload
    if fmt == "json":
        return dumps({"columns": list(header),
                      "rows": [list(r) for r in rows]}) + "\n"
    return _csv(header, rows, footer)


def run(argv=None):
    """Execute one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        if args.spectrum is None:
            raise UsageError(f"{args.command} requires --spectrum")
        cfg = RunConfig(
            seed=args.seed,
            tolerance=ToleranceConfig(compatibility=args.compat_tol,
                                      decision=args.decision_tol),
            mem_budget=distill.mem_budget(), out=args.out, fmt=args.fmt)
        kind, payload = COMMANDS[args.command](args, cfg)
        text = _render(kind, payload, args.fmt)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"ensemblelab: error: {exc}\n")
        return 1
    except (EnsembleError, ValueError, OSError) as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())
