"""Stand-alone calculator for the stability constants.

Uses 50-digit decimal arithmetic and shares no code with the package, so
it serves as a cross-check of ``nekhlab.lab.theorem1_bounds``.

    python3 scripts/constants_calc.py 2 1 1 0.2 1 1e-12
"""
import sys
from decimal import Decimal, getcontext
from math import factorial

getcontext().prec = 50
PI = Decimal("3.14159265358979323846264338327950288419716939937510")


def constants(n, m, M, sigma1, sigma2, epsilon):
    n = int(n)
    m, M, s1, s2, eps = (Decimal(str(v)) for v in (m, M, sigma1, sigma2, epsilon))
    nf = Decimal(factorial(n))
    b = 2 * (n * n + n + 2)
    c0 = Decimal(8 * n) * M / (3 * m) * (3 * n + 2) * s1
    c1 = s2 / 24
    T0 = (m / (2 * M)) ** n * s1 * s2 / (Decimal(2) ** 7 * nf)
    eps0 = M ** 2 * s1 ** 4 / (PI ** 2 * Decimal(21 * n + 30) ** 2 * ((2 * M / m) ** n * nf) ** 4)
    root = eps ** (Decimal(1) / b)
    Delta = c0 * root
    log_T = T0.ln() - Decimal("0.75") * eps.ln() + c1 / root
    return {"b": b, "c0": c0, "c1": c1, "T0": T0, "epsilon0": eps0, "Delta": Delta, "log_T": log_T,
            "admissible": eps <= min(eps0, s2 ** b)}


if __name__ == "__main__":
    args = sys.argv[1:] or ["2", "1", "1", "0.2", "1", "1e-12"]
    for k, v in constants(*args).items():
        print(f"{k} = {v}")
