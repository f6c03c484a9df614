"""Batch front-end.

    fracgm <command> [--config-file FILE] [flags]

Commands: green, ground-state, reduce, minimize, solve, verify, sweep.
A config file holds flat ``key = value`` lines (lists comma separated);
command-line flags override it.  Exit status is 0 on success, 1 on a
numerical failure and 2 on invalid input; failures also leave a JSON error
record in the output directory and on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import read_columns, to_json, write_columns, write_json, write_svg, write_table
from .errors import (ConvergenceError, DomainError, FGMError, InvalidFieldError, InvalidInputError,
                     InvalidParameterError, NumericalError)
from .green import far_field_constant, green_constants, green_eval
from .ground_state import cached_ground_state
from .multibump import (SpikeConfig, build_context, error_term_forms, inhibitor_at_spikes, project_error,
                        reduced_force, weighted_norm)
from .params import FracParams
from .reduced import calibrate_constants, minimize_xi, rescale_config, scalar_model, scalar_model_coefficient
from .solver import (NonlocalProblem, local_maxima, lyapunov_schmidt_solve, newton_full, refined_residuals,
                     verify_solution)
from .spectral import Field, Grid1D

COMMANDS = ("green", "ground-state", "reduce", "minimize", "solve", "verify", "sweep")
EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2
AUTO_SPACING = 0.0625

SCHEMA_FOR = {
    "green_constants.json": "green_constants",
    "ground_state.json": "ground_state",
    "reduce.json": "reduce",
    "minimize.json": "minimize",
    "solution.json": "solution",
    "verify.json": "verify",
    "sweep.json": "sweep",
    "error.json": "error",
    "metadata.json": "metadata",
}


def load_schema(name: str) -> dict:
    text = resources.files("fracgm").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


@dataclass
class ExperimentConfig:
    command: str
    s: list = field(default_factory=lambda: [0.75])
    eps: list = field(default_factory=lambda: [0.02])
    m: int = 1
    eta: float = 0.1
    n: int = 2 ** 14
    L: float = 200.0
    auto_grid: bool = False
    output_dir: Path = Path("fgm_out")
    emit_plots: bool = False
    odd: bool = False
    positions: list | None = None
    input: Path | None = None
    x_min: float = 1e-3
    x_max: float = 100.0
    n_x: int = 61

    def __post_init__(self):
        self.s = [float(v) for v in _as_list(self.s)]
        self.eps = [float(v) for v in _as_list(self.eps)]
        if self.positions is not None:
            self.positions = [float(v) for v in _as_list(self.positions)]
        self.output_dir = Path(self.output_dir)
        if self.input is not None:
            self.input = Path(self.input)
        self.validate()

    def validate(self):
        def bad(msg):
            raise InvalidParameterError(msg)

        if self.command not in COMMANDS:
            bad(f"unknown command {self.command!r}")
        if not self.s or not self.eps:
            bad("s and eps lists must be non-empty")
        lo = 0.0 if self.command == "ground-state" else 0.5
        for s in self.s:
            if not (lo < s < 1.0 or (lo == 0.5 and s == 0.5)):
                raise DomainError(f"s = {s} outside {'(0, 1)' if lo == 0 else '[1/2, 1)'}")
        for e in self.eps:
            if not 0.0 < e < 1.0:
                bad(f"eps = {e} outside (0, 1)")
        if int(self.m) != self.m or self.m < 1:
            bad(f"m must be a positive integer, got {self.m}")
        self.m = int(self.m)
        if not 0.0 < self.eta < 1.0:
            bad(f"eta = {self.eta} outside (0, 1)")
        if int(self.n) != self.n or self.n < 16 or int(self.n) & (int(self.n) - 1):
            bad(f"n must be a power of two >= 16, got {self.n}")
        self.n = int(self.n)
        if not self.L > 0:
            bad(f"L must be positive, got {self.L}")
        if self.command != "sweep" and (len(self.s) > 1 or len(self.eps) > 1):
            bad(f"{self.command} takes a single s and eps; use sweep for lists")
        if self.command == "reduce" and not self.positions:
            bad("reduce needs --positions")
        if self.command == "verify" and self.input is None:
            bad("verify needs --input (a profile.csv written by solve)")
        if not 0.0 < self.x_min < self.x_max or self.n_x < 2:
            bad("green range needs 0 < x_min < x_max and n_x >= 2")

    @property
    def parity(self) -> str:
        return "odd_k" if self.odd else "even_k"

    @property
    def k(self) -> int:
        return 2 * self.m + int(self.odd)

    def grid_for(self, eps: float) -> Grid1D:
        if not self.auto_grid:
            return Grid1D(self.n, self.L)
        L = max(self.L, 10.0 / eps)
        n = max(self.n, 1 << math.ceil(math.log2(2.0 * L / AUTO_SPACING)))
        return Grid1D(n, L)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("output_dir", "input"):
            out[key] = None if out[key] is None else str(out[key])
        return out


def _as_list(v):
    if v is None:
        return []
    if isinstance(v, str):
        return [p for p in (x.strip() for x in v.split(",")) if p]
    if isinstance(v, (list, tuple)):
        out = []
        for item in v:
            out.extend(_as_list(item) if isinstance(item, str) else [item])
        return out
    return [v]


# --- config parsing ------------------------------------------------------------

_BOOL_KEYS = {"auto_grid", "emit_plots", "odd"}
_FIELD_NAMES = {f.name for f in dataclasses.fields(ExperimentConfig)}


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_NAMES or key == "command":
            raise InvalidParameterError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key, value: str):
    if key in _BOOL_KEYS:
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise InvalidParameterError(f"{key}: expected a boolean, got {value!r}")
    if key in ("output_dir", "input"):
        return value
    try:
        if key in ("s", "eps", "positions"):
            return [float(v) for v in _as_list(value)]
        if key in ("m", "n", "n_x"):
            return int(value)
        return float(value)
    except ValueError:
        raise InvalidParameterError(f"{key}: cannot parse {value!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracgm", description="Fractional Gierer-Meinhardt spike lab")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config-file", type=Path)
        p.add_argument("--s", nargs="+")
        p.add_argument("--eps", nargs="+")
        p.add_argument("--m", type=int)
        p.add_argument("--eta", type=float)
        p.add_argument("--n", type=int)
        p.add_argument("--L", type=float)
        p.add_argument("--auto-grid", action="store_const", const=True)
        p.add_argument("--output-dir", "-o")
        p.add_argument("--plots", dest="emit_plots", action="store_const", const=True)
        p.add_argument("--odd", action="store_const", const=True)
        p.add_argument("--positions", nargs="+")
        p.add_argument("--input")
        p.add_argument("--x-min", type=float)
        p.add_argument("--x-max", type=float)
        p.add_argument("--n-x", type=int)
    return parser


def config_from_args(argv) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    values = parse_config_file(args.config_file) if args.config_file else {}
    for key, value in vars(args).items():
        if key in ("command", "config_file") or value is None:
            continue
        if key in ("s", "eps", "positions"):
            try:
                value = [float(v) for v in _as_list(value)]
            except ValueError:
                raise InvalidParameterError(f"--{key}: cannot parse {value!r}") from None
        values[key] = value
    return ExperimentConfig(command=args.command, **values)


# --- pipeline pieces -------------------------------------------------------------

def _setup(cfg: ExperimentConfig, s: float, eps: float, k: int):
    grid = cfg.grid_for(eps)
    gs = cached_ground_state(s, grid.n_points, grid.half_length)
    return gs, FracParams.from_ground_state(gs, eps, k)


def _calibration(gs, params):
    # odd k lattices calibrate like any other; a lone spike borrows the k=2 fit
    p = params if params.k >= 2 else FracParams(params.s, params.eps, 2, params.mass_u2)
    consts = calibrate_constants(gs, p)
    rep = consts.calibration_report
    return consts, {
        "alpha": consts.alpha, "beta": consts.beta, "gamma": consts.gamma,
        "residual_alpha": rep["residual_alpha"], "residual_beta": rep["residual_beta"],
        "separations": rep["separations"],
    }


def _grid_dict(grid: Grid1D) -> dict:
    return {"n": grid.n_points, "L": grid.half_length}


def run_green(cfg: ExperimentConfig, out: Path) -> dict:
    s = cfg.s[0]
    consts = green_constants(s).as_dict()
    consts["gamma_far"] = far_field_constant(s)
    exp = green_constants(s)
    xs = np.geomspace(cfg.x_min, cfg.x_max, cfg.n_x)
    G = np.array([green_eval(s, x) for x in xs])
    approx = exp.evaluate(xs)
    write_columns(out / "green.csv", {"x": xs, "G": G, "expansion": approx, "abs_diff": np.abs(G - approx)})
    write_json(out / "green_constants.json", consts)
    if cfg.emit_plots:
        write_svg(out / "green.svg", {"G": (xs, G), "expansion": (xs, np.abs(approx))},
                  title=f"Green function, s={s}", ylabel="G", logx=True, logy=True)
    return consts


def run_ground_state(cfg: ExperimentConfig, out: Path) -> dict:
    s = cfg.s[0]
    grid = Grid1D(cfg.n, cfg.L)
    gs = cached_ground_state(s, grid.n_points, grid.half_length)
    summary = gs.summary()
    summary.update(grid=_grid_dict(grid), iterations=gs.iterations, multiplier=gs.multiplier)
    write_columns(out / "profile.csv", {"x": grid.x, "u": gs.field.values})
    write_json(out / "ground_state.json", summary)
    if cfg.emit_plots:
        x = grid.x[grid.n_points // 2 + 1:]
        u = gs.field.values[grid.n_points // 2 + 1:]
        write_svg(out / "tail.svg", {"U": (x, u), "tail fit": (x, gs.tail_coeff * x ** -gs.decay_exponent)},
                  title=f"Ground state tail, s={s}", ylabel="U", logx=True, logy=True)
    return summary


def run_reduce(cfg: ExperimentConfig, out: Path) -> dict:
    s, eps = cfg.s[0], cfg.eps[0]
    config = SpikeConfig.from_unsorted(cfg.positions, cfg.parity)
    gs, params = _setup(cfg, s, eps, config.k)
    consts, cal = _calibration(gs, params)
    ctx = build_context(params, gs, config, grid=cfg.grid_for(eps))
    S, _, gap = error_term_forms(ctx)
    report = {
        "s": s, "eps": eps, "grid": _grid_dict(ctx.grid),
        "positions": config.positions,
        "projections": project_error(ctx, S),
        "reduced_forces": reduced_force(config, params, consts),
        "weighted_error_norm": weighted_norm(S, config, ctx.mu),
        "V_at_spikes": inhibitor_at_spikes(ctx),
        "error_form_discrepancy": gap,
        "constants": cal,
    }
    write_columns(out / "reduce.csv", {"x": ctx.grid.x, "W": ctx.W.values, "V": ctx.V.values, "S": S.values})
    write_json(out / "reduce.json", report)
    if cfg.emit_plots:
        write_svg(out / "reduce.svg", {"W": (ctx.grid.x, ctx.W.values), "V": (ctx.grid.x, ctx.V.values)},
                  title="ansatz and inhibitor")
    return report


def _minimize(cfg, s, eps):
    gs, params = _setup(cfg, s, eps, cfg.k)
    consts, cal = _calibration(gs, params)
    config, rep = minimize_xi(params, consts, cfg.m, cfg.eta, parity=cfg.parity)
    return gs, params, consts, cal, config, rep


def _minimize_report(s, eps, params, consts, cal, config, rep) -> dict:
    out = {
        "s": s, "eps": eps, "m": config.m, "k": config.k, "parity": config.parity,
        "positions": config.positions,
        "half_positions": list(config.half_positions),
        "rescaled": rescale_config(config, params),
        "scale": params.scale,
        "constants": cal,
    }
    out.update(rep.as_dict())
    if s == 0.5 and config.m == 1 and config.parity == "even_k":
        gamma_eff = scalar_model_coefficient(consts)
        out["scalar_model"] = {"gamma_eff": gamma_eff, "two_d_predicted": scalar_model(gamma_eff)[0],
                               "two_d": 2.0 * float(rescale_config(config, params)[0])}
    return out


def run_minimize(cfg: ExperimentConfig, out: Path) -> dict:
    s, eps = cfg.s[0], cfg.eps[0]
    gs, params, consts, cal, config, rep = _minimize(cfg, s, eps)
    report = _minimize_report(s, eps, params, consts, cal, config, rep)
    header = ["start", "barrier", "value"] + [f"d{i + 1}" for i in range(cfg.m)]
    rows = [[t["start"], t["barrier"], t["value"], *t["d"]] for t in rep.trace]
    write_table(out / "trace.csv", header, rows)
    write_json(out / "minimize.json", report)
    return report


def _solve(cfg, s, eps, out: Path) -> tuple[dict, bool]:
    gs, params, consts, cal, config, rep = _minimize(cfg, s, eps)
    ctx = build_context(params, gs, config)
    S, _, _ = error_term_forms(ctx)
    ls = lyapunov_schmidt_solve(ctx)
    pair = newton_full(ctx, seed=Field(ctx.grid, ctx.W.values + ls.phi.values))
    check = verify_solution(pair, ctx)
    g = ctx.grid
    write_columns(out / "profile.csv", {"x": g.x, "u": pair.u.values, "v": pair.v.values,
                                        "W": ctx.W.values, "u_minus_W": pair.u.values - ctx.W.values})
    trace = [["projected", i + 1, v] for i, v in enumerate(ls.history)]
    trace += [["newton", i, v] for i, v in enumerate(pair.history)]
    write_table(out / "trace.csv", ["stage", "iteration", "value"], trace)
    metrics = {
        "s": s, "eps": eps, "m": config.m, "k": config.k, "parity": config.parity,
        "grid": _grid_dict(g),
        "tau_eps": params.tau_eps, "omega": params.omega,
        "minimizer": _minimize_report(s, eps, params, consts, cal, config, rep),
        "error_star_norm": weighted_norm(S, config, ctx.mu),
        "projected": {
            "method": ls.method, "iterations": ls.iterations, "residual": ls.residual,
            "star_norm_phi": ls.star_norm_phi, "c": ls.c,
            "projected_multipliers": ls.projected_multipliers(ctx),
            "reduced_forces": reduced_force(config, params, consts),
        },
        "newton": {"iterations": pair.newton_iterations, "converged": pair.converged,
                   "residual_u": pair.residual_u, "residual_v": pair.residual_v},
        "verification": check,
    }
    write_json(out / "solution.json", metrics)
    if cfg.emit_plots:
        write_svg(out / "profile.svg", {"u": (g.x, pair.u.values), "v": (g.x, pair.v.values),
                                        "W": (g.x, ctx.W.values)}, title=f"steady state s={s} eps={eps}")
    return metrics, pair.converged


def run_solve(cfg: ExperimentConfig, out: Path) -> dict:
    metrics, converged = _solve(cfg, cfg.s[0], cfg.eps[0], out)
    if not converged:
        raise ConvergenceError(
            f"Newton stopped at residuals u {metrics['newton']['residual_u']:.3e}, "
            f"v {metrics['newton']['residual_v']:.3e}; best iterate written to {out}")
    return metrics


def run_verify(cfg: ExperimentConfig, out: Path) -> dict:
    try:
        cols = read_columns(cfg.input)
    except (OSError, ValueError) as exc:
        raise InvalidFieldError(f"{cfg.input}: {exc}") from None
    if "x" not in cols or "u" not in cols:
        raise InvalidParameterError(f"{cfg.input}: expected columns x and u")
    x, u = cols["x"], cols["u"]
    n = x.size
    if n < 16 or n & (n - 1):
        raise InvalidParameterError(f"{cfg.input}: {n} rows is not a power-of-two grid")
    grid = Grid1D(n, float(-x[0]))
    if np.max(np.abs(grid.x - x)) > 1e-9 * grid.half_length:
        raise InvalidParameterError(f"{cfg.input}: abscissae are not a periodic grid")
    s, eps = cfg.s[0], cfg.eps[0]
    gs = cached_ground_state(s, grid.n_points, grid.half_length)
    params = FracParams.from_ground_state(gs, eps, cfg.k)
    _, r_u, r_v = NonlocalProblem(params, grid).residuals(u)
    fu, fv = refined_residuals(Field(grid, u), params, factor=2)
    report = {
        "input": str(cfg.input), "s": s, "eps": eps, "k": cfg.k, "grid": _grid_dict(grid),
        "residual_u": r_u, "residual_v": r_v,
        "refined_factor": 2, "refined_residual_u": fu, "refined_residual_v": fv,
        "n_local_maxima": int(len(local_maxima(u))),
        "min_u": float(np.min(u)),
        "even_symmetry_error": float(np.max(np.abs(u - u[grid.mirror]))),
    }
    write_json(out / "verify.json", report)
    return report


def _sweep_entry(cfg, s, eps, out: Path) -> dict:
    try:
        metrics, converged = _solve(cfg, s, eps, out)
    except FGMError as exc:
        write_json(out / "error.json", exc.record())
        return {"s": s, "eps": eps, "status": exc.kind}
    ver = metrics["verification"]
    return {
        "s": s, "eps": eps, "status": "ok" if converged else "not-converged",
        "q1": metrics["minimizer"]["half_positions"][0],
        "d1": metrics["minimizer"]["rescaled"][0],
        "error_star_norm": metrics["error_star_norm"],
        "phi_star_norm": metrics["projected"]["star_norm_phi"],
        "sup_u_deviation": ver["sup_u_deviation"],
        "v_plateau_deviation": ver["v_plateau_deviation"],
        "position_relative_error": ver["position_relative_error"],
    }


SWEEP_METRICS = ("q1", "error_star_norm", "phi_star_norm", "sup_u_deviation", "v_plateau_deviation")


def _threads() -> int:
    raw = os.environ.get("FGM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameterError(f"FGM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InvalidParameterError("FGM_THREADS must be at least 1")
    return n


def run_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    jobs = [(s, e) for s in cfg.s for e in cfg.eps]
    dirs = [out / f"s{s:g}_eps{e:g}" for s, e in jobs]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        entries = list(pool.map(lambda job: _sweep_entry(cfg, job[0][0], job[0][1], job[1]),
                                zip(jobs, dirs)))
    cols = ["s", "eps", "status", "q1", "d1", *SWEEP_METRICS[1:], "position_relative_error"]
    write_table(out / "entries.csv", cols, [[e.get(c) for c in cols] for e in entries])
    exponents = []
    for s in cfg.s:
        ok = [e for e in entries if e["s"] == s and e["status"] == "ok"]
        row = {"s": s, "n_eps": len(ok)}
        for key in SWEEP_METRICS:
            vals = [(e["eps"], e[key]) for e in ok if e.get(key) and e[key] > 0]
            if len(vals) >= 2:
                le = np.log([v[0] for v in vals])
                lv = np.log([v[1] for v in vals])
                row[key] = float(np.polyfit(le, lv, 1)[0])
            else:
                row[key] = None
        exponents.append(row)
    write_table(out / "summary.csv", ["s", "n_eps", *SWEEP_METRICS],
                [[r[c] for c in ["s", "n_eps", *SWEEP_METRICS]] for r in exponents])
    report = {"entries": entries, "exponents": exponents}
    write_json(out / "sweep.json", report)
    failed = [e for e in entries if e["status"] != "ok"]
    if failed:
        raise NumericalError(f"{len(failed)} of {len(entries)} sweep entries failed; see entries.csv")
    return report


RUNNERS = {
    "green": run_green, "ground-state": run_ground_state, "reduce": run_reduce,
    "minimize": run_minimize, "solve": run_solve, "verify": run_verify, "sweep": run_sweep,
}


def run(cfg: ExperimentConfig) -> int:
    """Execute one configured command; returns the process exit status."""
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.datetime.now(datetime.timezone.utc)
    t0 = time.perf_counter()
    status, record, result = EXIT_OK, None, None
    try:
        result = RUNNERS[cfg.command](cfg, out)
    except InvalidInputError as exc:
        status, record = EXIT_INPUT, exc.record()
    except FGMError as exc:
        status, record = EXIT_NUMERICAL, exc.record()
    if record is not None:
        record["command"] = cfg.command
        write_json(out / "error.json", record)
        sys.stderr.write(to_json(record))
    elif cfg.command == "green":
        sys.stdout.write(to_json(result))
    write_json(out / "metadata.json", {
        "version": __version__, "command": cfg.command, "config": cfg.as_dict(),
        "started_utc": started.isoformat(), "elapsed_s": time.perf_counter() - t0, "exit_status": status,
    })
    return status


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = config_from_args(argv)
    except InvalidInputError as exc:
        sys.stderr.write(to_json(exc.record()))
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(to_json({"error": "invalid-input", "message": str(exc)}))
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
