"""Normal-form construction on the shipped test problems, printing the step log.

    python3 scripts/run_normalform.py nf2 --eps 5e-9
"""
import argparse

from nekhlab.normalform import normal_form
from nekhlab.problems import nf_problem_1d, nf_problem_2d

PROBLEMS = {"nf1": nf_problem_1d, "nf2": nf_problem_2d}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("problem", choices=sorted(PROBLEMS))
    ap.add_argument("--eps", type=float, default=5e-9)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    P = PROBLEMS[a.problem](eps=a.eps)
    res = normal_form(P.F, P.params, samples=P.samples(a.seed))
    print(f"||Df|| = {res.norm_f:.3e}   N = {P.params.N_steps}")
    print("step  ||DZ||      ||DR||      bound(b)    pass")
    for i, nz, nr, bnd, ok in res.step_table():
        print(f"{i:4d}  {nz:.3e}  {nr:.3e}  {bnd:.3e}  {ok}")
    for k, v in res.conclusions().items():
        print(f"{k:12s} {'pass' if v else 'fail'}")


if __name__ == "__main__":
    main()
