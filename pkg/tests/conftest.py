import hypothesis
import pytest

from nekhlab.domain import DomainSpec, make_rng
from nekhlab.fourier import FourierGenFunction
from nekhlab.poly import PolyCoeff

hypothesis.settings.register_profile("default", max_examples=25, deadline=None)
hypothesis.settings.load_profile("default")


def random_fourier(seed, n=1, modes=6, K=4, degree=3, scale=1e-3, dom=None):
    """Real trigonometric sum with random polynomial amplitudes."""
    rng = make_rng(seed)
    dom = DomainSpec(((0.5, 1.5),) * n, 0.1, 1.0) if dom is None else dom
    terms = []
    seen = set()
    while len(terms) < modes:
        k = tuple(int(v) for v in rng.integers(-K, K + 1, size=n))
        if not any(k) or k in seen or tuple(-v for v in k) in seen or sum(map(abs, k)) > K:
            continue
        seen.add(k)
        amp = {(0,) * n: scale * rng.normal()}
        e = [0] * n
        e[int(rng.integers(n))] = 1
        amp[tuple(e)] = scale * rng.normal()
        terms.append((k, PolyCoeff.from_terms(amp, dom.center, degree), rng.choice(["cos", "sin"])))
    return FourierGenFunction.trig(dom, degree, terms, K_rep=K)


@pytest.fixture
def rng():
    return make_rng(1234)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
