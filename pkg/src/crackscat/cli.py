"""Command-line entry points.

    crackscat synth         --config C --out DIR    far-field data (+ noise)
    crackscat invert        --config C --out DIR    Newton reconstruction
    crackscat dsm           --config C --out DIR    sampling indicator + segments
    crackscat lowfreq-check --config C --out DIR    small-k expansion table
    crackscat gradcheck     --config C --out DIR    analytic vs FD Jacobian

Exit codes: 0 success, 1 bad input or failed run, 2 target missed (invert)
or derivative check above tolerance (gradcheck).
"""

from __future__ import annotations

import argparse
import copy
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .forward import FarFieldSet, ForwardSystem, add_noise, observation_directions, synthesize
from .frechet import fd_jacobian, jacobian
from .geometry import CrackSet, GeometryError
from .inversion import NewtonConfig, StepRejected, run_multi_freq, run_single_freq
from .lowfreq import asymptotic_check, eval_v, solve_profile
from .sampling import dsm_indicator, extract_initial_cracks, grid_axis

log = logging.getLogger("crackscat")

DEFAULTS = {
    "frequencies": [3.0],
    "directions": [[1.0, 0.0]],
    "n_nodes": 64,
    "observations": 32,
    "d_min": 0.05,
    "noise": {"delta": 0.0, "seed": 0},
    "newton": {},
    "dsm": {"bounds": [-4.0, 4.0, -4.0, 4.0], "spacing": 0.05, "threshold": 0.7},
    "lowfreq": {"ks": [1e-2, 1e-4, 1e-8],
                "points": [[0.0, 1.0], [2.5, 0.5], [-2.5, 1.5], [0.0, -2.5], [3.0, 3.0]],
                "grid": {"bounds": [-3.0, 3.0, -2.5, 4.5], "spacing": 0.1}},
    "gradcheck": {"k": 3.0, "d": [1.0, 0.0], "p": 3, "eps": 1e-5, "geometry": "truth", "tol": 1e-4},
}

NEWTON_KEYS = {"p0", "m_p", "eps_stop", "eps_target", "tikhonov_lambda", "max_inner", "step_clamp",
               "damping_retries", "monotone"}


class Run:
    """Parsed configuration plus derived objects shared by the subcommands."""

    def __init__(self, raw: dict, args):
        if not isinstance(raw, dict):
            raise io.ConfigError("config must be a JSON object")
        cfg = copy.deepcopy(DEFAULTS)
        for key, val in raw.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict):
                cfg[key] = {**cfg[key], **val}
            else:
                cfg[key] = val
        if args.seed is not None:
            cfg["noise"]["seed"] = int(args.seed)
        self.cfg = cfg
        self.hash = io.config_hash(cfg)
        self.out = Path(args.out)
        self.args = args
        try:
            self.ks = [float(k) for k in cfg["frequencies"]]
            self.dirs = [np.asarray(d, dtype=float) for d in cfg["directions"]]
            self.n = int(cfg["n_nodes"])
            self.d_min = float(cfg["d_min"])
            self.delta = float(cfg["noise"]["delta"])
            self.seed = int(cfg["noise"]["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise io.ConfigError(f"bad config field: {exc}") from exc
        if not self.ks or any(k <= 0 for k in self.ks):
            raise io.ConfigError("frequencies must be a non-empty list of positive numbers")
        if sorted(set(self.ks)) != self.ks:
            raise io.ConfigError("frequencies must be strictly increasing")
        if any(d.shape != (2,) or np.linalg.norm(d) == 0 for d in self.dirs):
            raise io.ConfigError("directions must be non-zero 2-vectors")
        self.observations = observation_directions(int(cfg["observations"]))
        self.truth = io.cracks_from_list(cfg["truth"], self.d_min) if cfg.get("truth") else None
        self.initial = io.cracks_from_list(cfg["initial"], self.d_min) if cfg.get("initial") else None

    def newton(self) -> NewtonConfig:
        raw = dict(self.cfg["newton"])
        unknown = set(raw) - NEWTON_KEYS
        if unknown:
            raise io.ConfigError(f"unknown newton settings: {sorted(unknown)}")
        if isinstance(raw.get("m_p"), dict):
            raw["m_p"] = {float(k): int(v) for k, v in raw["m_p"].items()}
        target = raw.get("eps_target", 1e-3)
        if isinstance(target, dict):
            raw["eps_target"] = {float(k): self._target_value(v) for k, v in target.items()}
        try:
            return NewtonConfig(n=self.n, fd_jacobian=bool(self.args.fd_jacobian), **raw)
        except (TypeError, ValueError) as exc:
            raise io.ConfigError(f"bad newton settings: {exc}") from exc

    def _target_value(self, v):
        # {"floor": a, "noise_fraction": b} means max(a, b * delta)
        if isinstance(v, dict):
            return max(float(v.get("floor", 0.0)), float(v.get("noise_fraction", 0.0)) * self.delta)
        return float(v)

    def synthesize_all(self) -> list[FarFieldSet]:
        if self.truth is None:
            raise io.ConfigError("config has no 'truth' cracks")
        sets = []
        idx = 0
        for k in self.ks:
            for d in self.dirs:
                clean = synthesize(self.truth, k, d, self.n, self.observations)
                sets.append(add_noise(clean, self.delta, self.seed + idx))
                idx += 1
        return sets

    def load_data(self) -> list[FarFieldSet]:
        """Data files from --data, else the synth manifest in --out, else synthesize."""
        paths = list(self.args.data or [])
        manifest = self.out / "manifest.json"
        if not paths and manifest.exists():
            body = io.read_json(manifest)
            paths = [self.out / f["file"] for f in body.get("files", [])]
        if paths:
            return [io.read_farfield(p) for p in paths]
        return self.synthesize_all()


def _bundles(data: list[FarFieldSet]):
    ks = sorted({d.k for d in data})
    return [[d for d in data if d.k == k] for k in ks]


def cmd_synth(run: Run) -> int:
    files = []
    for i, dset in enumerate(run.synthesize_all()):
        name = f"farfield_{i:02d}.csv"
        io.write_farfield(run.out / name, dset, run.hash)
        files.append({"file": name, "k": dset.k, "d": list(dset.d), "delta": dset.delta, "seed": dset.seed})
    io.write_json(run.out / "manifest.json", {"files": files, "n_nodes": run.n}, run.hash)
    print(f"wrote {len(files)} far-field file(s) to {run.out}")
    return 0


def _dsm_initial(run: Run, data: list[FarFieldSet]):
    opts = run.cfg["dsm"]
    n_cracks = int(opts.get("n_cracks", len(run.truth) if run.truth is not None else 1))
    grid = dsm_indicator(data[0], opts["bounds"], float(opts["spacing"]))
    ext = extract_initial_cracks(grid, n_cracks, float(opts.get("threshold", 0.7)))
    return grid, ext


def cmd_invert(run: Run) -> int:
    data = run.load_data()
    initial = run.initial
    if initial is None:
        if not run.args.init_from_dsm:
            raise io.ConfigError("no initial guess in config (use --init-from-dsm)")
        _, ext = _dsm_initial(run, data)
        if not ext.cracks:
            raise io.ConfigError("sampling produced no initial cracks")
        if ext.shortage:
            log.warning("sampling found fewer components than requested")
        initial = CrackSet(ext.cracks, run.d_min)
    config = run.newton()
    bundles = _bundles(data)
    if len(bundles) == 1:
        state = run_single_freq(initial, bundles[0], config, d_min=run.d_min)
    else:
        state = run_multi_freq(initial, bundles, config, d_min=run.d_min)
    rows = [(r.stage_k, r.p, r.iter, r.J_r, r.step_norm, r.damped) for r in state.history]
    io.write_csv(run.out / "iterations.csv", ("stage_k", "p", "iter", "J_r", "step_norm", "damped_flag"),
                 rows, run.hash)
    io.write_json(run.out / "reconstruction.json", io.reconstruction_dict(state), run.hash)
    io.write_polyline(run.out / "reconstruction_polyline.csv", state.cracks, run.hash)
    print(f"J_r = {state.J_r:.6g} at p = {state.p}" + ("  (target missed)" if state.target_missed else ""))
    return 2 if state.target_missed else 0


def cmd_dsm(run: Run) -> int:
    data = run.load_data()
    grid, ext = _dsm_initial(run, data)
    yy, xx = np.meshgrid(grid.y, grid.x, indexing="ij")
    rows = zip(xx.ravel(), yy.ravel(), grid.values.ravel())
    io.write_csv(run.out / "indicator.csv", ("x", "y", "I"), rows, run.hash)
    io.write_gnuplot(run.out / "indicator.gp", "indicator.csv", f"sampling indicator, k = {grid.k:g}", "I",
                     run.hash)
    body = {"cracks": [{"d0": c.d0, "d1": c.d1, "c": list(c.c)} for c in ext.cracks],
            "p": 0, "J_r": None, "target_missed": False,
            "shortage": ext.shortage, "components": ext.components,
            "argmax": list(grid.argmax_point())}
    io.write_json(run.out / "dsm_initial.json", body, run.hash)
    print(f"indicator maximum at {grid.argmax_point()}, {ext.components} component(s)")
    return 0


def cmd_lowfreq_check(run: Run) -> int:
    if run.truth is None:
        raise io.ConfigError("config has no 'truth' cracks")
    opts = run.cfg["lowfreq"]
    points = np.asarray(opts["points"], dtype=float)
    table = asymptotic_check(run.truth, opts["ks"], points, run.n, run.dirs[0])
    io.write_csv(run.out / "asymptotic.csv", ("k", "ln_k", "e_k"),
                 [(k, np.log(k), e) for k, e in table], run.hash)
    prof = solve_profile(run.truth, run.n)
    g = opts["grid"]
    x = grid_axis(g["bounds"][0], g["bounds"][1], float(g["spacing"]))
    y = grid_axis(g["bounds"][2], g["bounds"][3], float(g["spacing"]))
    yy, xx = np.meshgrid(y, x, indexing="ij")
    v = eval_v(prof, np.stack([xx, yy], axis=-1))
    io.write_csv(run.out / "v_grid.csv", ("x", "y", "v"), zip(xx.ravel(), yy.ravel(), v.ravel()), run.hash)
    io.write_gnuplot(run.out / "v_grid.gp", "v_grid.csv", "harmonic profile v", "v", run.hash)
    for k, e in table:
        print(f"k = {k:.0e}  e(k) = {e:.6g}")
    return 0


def cmd_gradcheck(run: Run) -> int:
    opts = run.cfg["gradcheck"]
    cracks = run.truth if opts.get("geometry", "truth") == "truth" else run.initial
    if cracks is None:
        raise io.ConfigError(f"gradcheck geometry {opts.get('geometry')!r} missing from config")
    k = float(opts["k"])
    d = np.asarray(opts["d"], dtype=float)
    p = int(opts["p"])
    sol = ForwardSystem(cracks, run.n, k).solve(d)
    ana = jacobian(sol, p, True, run.observations)
    num = fd_jacobian(cracks, run.n, k, d, p, True, float(opts["eps"]), run.observations)
    rows = []
    worst = 0.0
    for i in range(ana.shape[1]):
        an = np.linalg.norm(ana.matrix[:, i])
        fn = np.linalg.norm(num.matrix[:, i])
        rel = np.linalg.norm(ana.matrix[:, i] - num.matrix[:, i]) / max(fn, 1e-300)
        worst = max(worst, rel)
        rows.append((i, an, fn, rel))
    io.write_csv(run.out / "gradcheck.csv", ("basis_index", "analytic_norm", "fd_norm", "rel_err"), rows,
                 run.hash)
    print(f"{len(rows)} basis columns, worst relative error {worst:.3e}")
    return 0 if worst <= float(opts.get("tol", 1e-4)) else 2


COMMANDS = {
    "synth": cmd_synth,
    "invert": cmd_invert,
    "dsm": cmd_dsm,
    "lowfreq-check": cmd_lowfreq_check,
    "gradcheck": cmd_gradcheck,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (created if missing)")
    common.add_argument("--seed", type=int, help="override the base noise seed")
    common.add_argument("--data", nargs="+", help="far-field CSV files (default: synth manifest in --out)")
    common.add_argument("--fd-jacobian", action="store_true", help="use finite-difference Jacobians")
    common.add_argument("--init-from-dsm", action="store_true",
                        help="seed the inversion from the sampling indicator when no initial guess is given")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="crackscat", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run = Run(io.read_json(args.config), args)
        run.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](run)
    except (io.ConfigError, GeometryError, StepRejected, OSError, KeyError) as exc:
        print(f"crackscat {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
