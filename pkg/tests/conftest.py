import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

UP = np.array([1.0, 0.0], dtype=complex)
DOWN = np.array([0.0, 1.0], dtype=complex)


def ket(*factors):
    out = np.array([1.0 + 0j])
    for f in factors:
        out = np.kron(out, f)
    return out


def proj(v):
    return np.outer(v, v.conj())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


EXAMPLE_STATES = {
    "rho1": ("classical", (0.1, 0.2, 0.3, 0.4)),
    "rho2": ("bell_mix", ()),
    "rho3_46": ("vw_mix", (0.4, 0.6)),
    "rho3_28": ("vw_mix", (0.2, 0.8)),
}


@pytest.fixture(scope="session")
def example_curves():
    """Default-budget 19-point curves for the four example states, with wall times."""
    import time

    from qbottleneck import SolverConfig
    from qbottleneck.presets import preset_state
    from qbottleneck.qib import build_instance, default_grid, rate_curve

    out = {}
    for key, (name, params) in EXAMPLE_STATES.items():
        inst = build_instance(preset_state(name, params))
        t0 = time.perf_counter()
        curve = rate_curve(inst, default_grid(), SolverConfig())
        out[key] = (inst, curve, time.perf_counter() - t0)
    return out


_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(criterion, ok: bool, detail: str) -> None:
    line = (str(criterion), ok, detail)
    _ACCEPTANCE.append(line)
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}: {detail}")
