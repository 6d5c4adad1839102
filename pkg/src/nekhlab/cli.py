"""Command-line front end.

    nekhlab {bounds,normalform,geometry,drift,confine} [--config PATH] [--seed N]
            [--out DIR] [--emit-plots] [--jobs N]

The config file is INI with one section per command; keys override the
defaults below.  Tables are comma separated with 17 significant digits.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import ActionAngleState, DomainSpec, FrequencyMap, make_rng
from .errors import LabError, ParameterError

COMMANDS = ("bounds", "normalform", "geometry", "drift", "confine")

DEFAULTS = {
    "bounds": {"n": "2", "m": "1.0", "M": "1.0", "sigma1": "0.2", "sigma2": "1.0", "epsilon": "1e-12"},
    "normalform": {"problem": "nf1", "eps": "5e-9", "samples": "400"},
    "geometry": {"n": "2", "K": "3", "schedule": "stability", "M": "1.0", "sigma1": "0.2",
                 "alpha1": "0.05", "beta": "", "mu": "1.0", "omega_scale": "1.0",
                 "box_lo": "0.0", "box_hi": "6.5", "grid": "200", "samples": "2000"},
    "drift": {"system": "quartic1", "method": "stormer-verlet", "h": "0.2, 0.1, 0.05, 0.025",
              "steps": "1000000", "actions": "1.0", "angles": "0.3",
              "m": "1.0", "M": "1.0", "sigma1": "0.2", "sigma2": "1.0", "epsilon": "1e-12"},
    "confine": {"eps": "1e-4", "steps": "100000", "K": "3", "alpha1": "0.05", "beta": "1.0",
                "x0": "2.5", "y0": "0.4"},
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict
    out: str
    seed: int = 0
    emit_plots: bool = False
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def get(self, key, kind=float):
        raw = self.params[key]
        try:
            if kind is list:
                return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
            if kind is int:
                return int(raw)
            if kind is str:
                return raw.strip()
            return float(raw)
        except ValueError:
            raise ParameterError(f"{self.command}.{key}: cannot parse {raw!r}") from None


def load_config(command, path=None, **kw) -> RunConfig:
    if command not in COMMANDS:
        raise ParameterError(f"unknown command {command!r}")
    params = dict(DEFAULTS[command])
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ParameterError(f"config: {exc}") from None
        if cp.has_section(command):
            for key, val in cp.items(command):
                if key not in params:
                    raise ParameterError(f"{command}.{key}: unknown key")
                params[key] = val
    return RunConfig(command, params, **kw)


# ---------------------------------------------------------------------------------
# table writing

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _plot(path, draw):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------------
# commands

def cmd_bounds(cfg, out):
    from .lab import theorem1_bounds

    n = cfg.get("n", int)
    b = theorem1_bounds(n, cfg.get("m"), cfg.get("M"), cfg.get("sigma1"), cfg.get("sigma2"), cfg.get("epsilon"))
    rows = [(k, getattr(b, k)) for k in
            ("n", "b", "epsilon", "epsilon0", "c0", "Delta", "T0", "c1", "T", "log_T", "admissible")]
    write_table(os.path.join(out, "summary.csv"), ["name", "value"], rows)
    return rows


def cmd_normalform(cfg, out):
    from .normalform import normal_form
    from .problems import nf_problem_1d, nf_problem_2d

    name = cfg.get("problem", str)
    makers = {"nf1": nf_problem_1d, "nf2": nf_problem_2d}
    if name not in makers:
        raise ParameterError(f"normalform.problem: unknown problem {name!r}")
    P = makers[name](eps=cfg.get("eps"))
    res = normal_form(P.F, P.params, samples=P.samples(cfg.seed, cfg.get("samples", int)))
    write_table(os.path.join(out, "steplog.csv"), ["step", "norm_DZ", "norm_DR", "bound", "pass"],
                res.step_table())
    summ = [("norm_Df", res.norm_f), ("norm_DZ", res.norm_Z), ("bound_DZ", res.bound_Z),
            ("norm_DR", res.norm_R), ("bound_DR", res.bound_R),
            ("displacement", res.displacement), ("bound_displacement", res.bound_displacement)]
    summ += [(k, v) for k, v in res.conclusions().items()]
    write_table(os.path.join(out, "summary.csv"), ["name", "value"], summ)
    with open(os.path.join(out, "Z.txt"), "w", newline="\n") as fh:
        fh.write(res.Z.to_text())
    with open(os.path.join(out, "R.txt"), "w", newline="\n") as fh:
        fh.write(res.R.to_text())
    if cfg.emit_plots:
        norms = [res.norm_f] + [s.norm_R_new for s in res.step_log]
        _plot(os.path.join(out, "steplog.png"), lambda ax: (
            ax.semilogy(range(len(norms)), norms, "o-"), ax.set_xlabel("step"), ax.set_ylabel("||DR||")))
    return res


def _geometry_setup(cfg):
    from .geometry import Schedule

    n, K = cfg.get("n", int), cfg.get("K", int)
    if n not in (1, 2, 3):
        raise ParameterError("geometry.n: must be 1, 2 or 3")
    if K < 1:
        raise ParameterError("geometry.K: must be >= 1")
    mode = cfg.get("schedule", str)
    mu = cfg.get("mu")
    if mode == "stability":
        M, s1 = cfg.get("M"), cfg.get("sigma1")
        if not 0 < s1 < 1 / (4 * M):
            raise ParameterError("geometry.sigma1: need 0 < sigma1 < 1/(4M)")
        S = Schedule.from_stability(n, K, M, s1, mu)
    elif mode == "alpha1":
        beta = cfg.params["beta"].strip()
        S = Schedule.from_alpha1(cfg.get("alpha1"), n, K, float(beta) if beta else None, mu)
    else:
        raise ParameterError("geometry.schedule: 'stability' or 'alpha1'")
    scale = cfg.get("omega_scale")
    if not scale > 0:
        raise ParameterError("geometry.omega_scale: must be > 0")
    return S, FrequencyMap.affine(scale * np.eye(n))


def cmd_geometry(cfg, out):
    from .geometry import atlas, covering_check, prop_i_violations, write_atlas, zones_disjoint, l_bound
    from .lattice import enumerate_k_lattices

    S, om = _geometry_setup(cfg)
    n, K = S.n, S.K
    lo, hi, g = cfg.get("box_lo"), cfg.get("box_hi"), cfg.get("grid", int)
    if not hi > lo or g < 1:
        raise ParameterError("geometry.box_lo/box_hi/grid: need box_lo < box_hi and grid >= 1")
    dom = DomainSpec(((lo, hi),) * n)
    X = dom.grid(g)
    cover = covering_check(X, om, S)
    rng = make_rng(cfg.seed)
    Xs = dom.sample(rng, cfg.get("samples", int))
    viol = prop_i_violations(Xs, om, S)
    lmax = l_bound(K, cfg.get("omega_scale") * max(abs(lo), abs(hi)) * n)
    disjoint = all(zones_disjoint(L, Xs, om, S.a(r), lmax)
                   for r in range(1, n + 1) for L in enumerate_k_lattices(n, min(K, 6), r))
    rows = atlas(X, om, S)
    write_atlas(os.path.join(out, "atlas.csv"), rows)
    summ = [("covering", cover), ("prop_i_violations", viol), ("zones_disjoint", disjoint)]
    summ += [(f"alpha_{r}", S.a(r)) for r in range(1, n + 1)]
    summ += [(f"nonoverlap_{r}", ok) for r, _, _, ok in S.nonoverlap()]
    write_table(os.path.join(out, "summary.csv"), ["name", "value"], summ)
    if cfg.emit_plots and n <= 2:
        rr = np.array([row["r"] for row in rows])
        if n == 1:
            _plot(os.path.join(out, "atlas.png"), lambda ax: ax.plot(X[:, 0], rr, "."))
        else:
            _plot(os.path.join(out, "atlas.png"),
                  lambda ax: ax.scatter(X[:, 0], X[:, 1], c=rr, s=1, cmap="viridis"))
    return summ


def _drift_one(args):
    from .lab import drift_experiment
    from .problems import system

    sysname, method, h, steps, I, th = args
    S = system(sysname)
    return drift_experiment(S, method, h, steps, ActionAngleState(I, th))


def cmd_drift(cfg, out):
    from .lab import METHODS, scaling_fit, theorem1_bounds
    from .problems import SYSTEMS

    sysname, method = cfg.get("system", str), cfg.get("method", str)
    if sysname not in SYSTEMS:
        raise ParameterError(f"drift.system: unknown system {sysname!r}")
    if method not in METHODS:
        raise ParameterError(f"drift.method: unknown method {method!r}")
    hs, steps = cfg.get("h", list), cfg.get("steps", int)
    if not hs or min(hs) <= 0:
        raise ParameterError("drift.h: need positive step sizes")
    if steps < 0:
        raise ParameterError("drift.steps: must be >= 0")
    I, th = cfg.get("actions", list), cfg.get("angles", list)
    n = SYSTEMS[sysname]().n
    if len(I) != n or len(th) != n:
        raise ParameterError(f"drift.actions/angles: need {n} values")
    if min(I) < 0.05:
        raise ParameterError("drift.actions: must be >= 0.05 (polar chart margin)")
    jobs = [(sysname, method, h, steps, I, th) for h in hs]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_drift_one, jobs))
    else:
        results = [_drift_one(j) for j in jobs]
    recs = [r for res in results for r in res]
    write_table(os.path.join(out, "drift.csv"),
                ["system", "method", "r", "h", "step", "max_dev", "dev_now", "energy_err"],
                [(r.system, r.method, r.r, r.h, r.steps, r.max_dev, r.dev_now, r.energy_err) for r in recs])
    summ = []
    if len(hs) >= 3 and steps > 0 and all(r.max_dev > 0 for r in recs if r.steps == steps):
        b = theorem1_bounds(n, cfg.get("m"), cfg.get("M"), cfg.get("sigma1"), cfg.get("sigma2"),
                            cfg.get("epsilon"))
        fit = scaling_fit(recs, b)
        summ = [("slope", fit.slope), ("intercept", fit.intercept), ("residual", fit.residual),
                ("envelope_c0_h^(r/b)", fit.envelope_ok)]
    write_table(os.path.join(out, "summary.csv"), ["name", "value"], summ)
    if cfg.emit_plots and steps > 0:
        def draw(ax):
            for res in results:
                ax.loglog([r.steps for r in res], [max(r.max_dev, 1e-300) for r in res], "o-",
                          label=f"h={res[0].h:g}")
            ax.set_xlabel("steps")
            ax.set_ylabel("max |I - I0|")
            ax.legend()
        _plot(os.path.join(out, "drift.png"), draw)
    return recs


def cmd_confine(cfg, out):
    from .geometry import Schedule
    from .lab import confinement_diagnostic, max_jump, orbit
    from .problems import standard_map

    eps, steps, K = cfg.get("eps"), cfg.get("steps", int), cfg.get("K", int)
    if steps < 0:
        raise ParameterError("confine.steps: must be >= 0")
    if K < 1:
        raise ParameterError("confine.K: must be >= 1")
    S = Schedule.from_alpha1(cfg.get("alpha1"), 1, K, cfg.get("beta"))
    m = standard_map(eps)
    xs, _ = orbit(m, [cfg.get("x0")], [cfg.get("y0")], steps)
    events = confinement_diagnostic(xs, FrequencyMap.affine([[1.0]]), S)
    write_table(os.path.join(out, "events.csv"),
                ["step", "old_r", "old_basis", "old_l", "new_r", "new_basis", "new_l", "jump", "budget", "flagged"],
                [(e.step, e.old.r, e.old.basis, e.old.l, e.new.r, e.new.basis, e.new.l, e.jump, e.budget,
                  e.flagged) for e in events])
    mj = max_jump(xs)
    summ = [("events", len(events)), ("max_jump", mj), ("eps_bound", eps), ("within_bound", mj <= eps)]
    write_table(os.path.join(out, "summary.csv"), ["name", "value"], summ)
    if cfg.emit_plots:
        _plot(os.path.join(out, "actions.png"), lambda ax: ax.plot(xs[:, 0], lw=0.5))
    return events


RUNNERS = {"bounds": cmd_bounds, "normalform": cmd_normalform, "geometry": cmd_geometry,
           "drift": cmd_drift, "confine": cmd_confine}


def run(cfg: RunConfig):
    out = os.path.join(cfg.out, cfg.command)
    os.makedirs(out, exist_ok=True)
    return RUNNERS[cfg.command](cfg, out)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nekhlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs")
    ap.add_argument("--emit-plots", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args(argv)
    try:
        if a.seed < 0 or a.seed >= 2 ** 64:
            raise ParameterError("--seed: must be an unsigned 64-bit integer")
        if a.jobs < 1:
            raise ParameterError("--jobs: must be >= 1")
        cfg = load_config(a.command, a.config, out=a.out, seed=a.seed, emit_plots=a.emit_plots, jobs=a.jobs)
        run(cfg)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
