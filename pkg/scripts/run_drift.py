"""Integrator drift sweep: max |I(t) - I(0)| against step size for each method.

    python3 scripts/run_drift.py --steps 1000000 --system quartic1
"""
import argparse
from dataclasses import dataclass

from nekhlab.domain import ActionAngleState
from nekhlab.lab import drift_experiment, scaling_fit, theorem1_bounds
from nekhlab.problems import system


@dataclass
class DriftSweep:
    system: str = "quartic1"
    methods: tuple = ("symplectic-euler", "stormer-verlet", "yoshida4")
    hs: tuple = (0.2, 0.1, 0.05, 0.025)
    steps: int = 100_000
    action: float = 1.0
    angle: float = 0.3


def sweep(cfg: DriftSweep):
    S = system(cfg.system)
    init = ActionAngleState([cfg.action] * S.n, [cfg.angle] * S.n)
    B = theorem1_bounds(S.n, 1.0, 1.0, 0.2, 1.0, 1e-12)
    for method in cfg.methods:
        recs = []
        for h in cfg.hs:
            recs += drift_experiment(S, method, h, cfg.steps, init)
        fit = scaling_fit(recs, B)
        last = {r.h: r.max_dev for r in recs if r.steps == cfg.steps}
        print(f"{method:18s} slope {fit.slope:6.3f}  envelope {fit.envelope_ok}  "
              + "  ".join(f"h={h:g}:{d:.3e}" for h, d in sorted(last.items())))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--system", default=DriftSweep.system)
    ap.add_argument("--steps", type=int, default=DriftSweep.steps)
    a = ap.parse_args()
    sweep(DriftSweep(system=a.system, steps=a.steps))
