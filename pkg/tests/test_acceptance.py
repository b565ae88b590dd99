"""
Acceptance gates, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line (also collected in
the terminal summary). Statistical gates use fixed seeds.
"""

import csv
import time
import warnings

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, haar_unitary, random_spec, random_state
from qwalk_mc import (
    SYMMETRIC_INIT,
    HADAMARD,
    HADAMARD_SPEC,
    CoinSpec,
    LatticeGenerator,
    ScalarState,
    VarianceAdvisory,
    bessel_propagator,
    coin_from_euler,
    convergence_study,
    distribution,
    estimate_continuous,
    estimate_discrete,
    euler_decompose,
    evolve_coined,
    evolve_continuous,
    nstep_bruteforce,
    point_mass_state,
    sigma3_closed_form,
    step_coined,
    step_general_series,
    total_variation,
    within_std_errors,
)
from qwalk_mc.cli import main

SEED = 7


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _max_diff(a, b):
    lo, hi = min(a.x_min, b.x_min), max(a.x_max, b.x_max)
    return float(np.max(np.abs(a.padded(lo, hi).to_vector() - b.padded(lo, hi).to_vector())))


def test_criterion_01_series_equals_matrix_step():
    rng = np.random.default_rng(1)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        spec = random_spec(rng)
        state = random_state(rng, sites=11)
        worst = max(worst, _max_diff(step_general_series(state, spec), step_coined(state, coin_from_euler(spec))))
    elapsed = time.perf_counter() - started
    report(1, worst <= 1e-12 and elapsed < 1.0, f"max error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_sigma3_closed_form():
    rng = np.random.default_rng(2)
    started = time.perf_counter()
    worst = 0.0
    for lam in rng.uniform(0, 2 * np.pi, 10):
        coin = coin_from_euler(CoinSpec(0, lam, 0, 0))
        init = point_mass_state(SYMMETRIC_INIT)
        state = init
        for n in range(21):
            worst = max(worst, _max_diff(sigma3_closed_form(init, lam, n), state))
            state = evolve_coined(state, coin, 1)
    elapsed = time.perf_counter() - started
    report(2, worst <= 1e-12 and elapsed < 1.0, f"max error {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_bruteforce_equals_unitary():
    rng = np.random.default_rng(3)
    specs = [HADAMARD_SPEC] + [random_spec(rng) for _ in range(5)]
    started = time.perf_counter()
    worst = 0.0
    for spec in specs:
        for n in range(1, 4):
            ref = evolve_coined(point_mass_state(SYMMETRIC_INIT), coin_from_euler(spec), n)
            worst = max(worst, _max_diff(nstep_bruteforce(SYMMETRIC_INIT, spec, n), ref))
    elapsed = time.perf_counter() - started
    report(3, worst <= 1e-10 and elapsed < 10.0, f"max error {worst:.2e}, {elapsed:.2f}s")


def _compare(out_dir, workers=4):
    args = ["compare", "--coin", "hadamard", "--steps", "6", "--samples", "1e8", "--seed", str(SEED),
            "--workers", str(workers), "--out", str(out_dir), "--format", "csv", "--format", "json"]
    started = time.perf_counter()
    code = main(args)
    return code, time.perf_counter() - started


@pytest.fixture(scope="module")
def figure_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("compare")
    first = _compare(base / "a")
    second = _compare(base / "b")
    return base, first, second


def test_criterion_04_hadamard_desk_scale(figure_runs):
    base, (code, elapsed), _ = figure_runs
    with open(base / "a" / "compare.csv") as fh:
        rows = [[float(v) for v in r] for r in list(csv.reader(fh))[1:]]
    x = [int(r[0]) for r in rows]
    p_ref = np.array([r[1] for r in rows])
    p_mc = np.array([r[2] for r in rows])
    se = np.array([r[3] for r in rows])
    tvd = total_variation(dict(zip(x, p_ref)), dict(zip(x, p_mc)), renormalize=True)
    within = np.abs(p_ref - p_mc) <= np.maximum(5 * se, 1e-12)
    ok = code == 0 and tvd <= 0.05 and bool(within.all())
    report(4, ok, f"tvd {tvd:.4f}, {int(within.sum())}/{within.size} sites within 5 se, {elapsed:.1f}s")


def test_criterion_05_continuous_bessel():
    gen = LatticeGenerator(1.0)
    started = time.perf_counter()
    est = estimate_continuous(gen, ScalarState.delta(0), 2.0, 10_000_000, seed=SEED)
    elapsed = time.perf_counter() - started
    bessel = bessel_propagator(est.state.positions, 2.0)
    # one sample's contribution bounds what unvisited sites can resolve
    within = within_std_errors(est.state.amps, bessel, est.std_err, 4, resolution=est.max_weight / est.samples)
    ref = evolve_continuous(ScalarState.delta(0), gen, 2.0)
    tvd = total_variation(distribution(ref), distribution(est.state), renormalize=True)
    ok = bool(within.all()) and tvd <= 0.02 and elapsed < 30
    report(5, ok, f"{int(within.sum())}/{within.size} amplitudes within 4 se, tvd {tvd:.4f}, {elapsed:.1f}s")


def test_criterion_06_continuous_reference():
    started = time.perf_counter()
    worst, drift = 0.0, 0.0
    x = np.arange(-10, 11)
    for scale in np.linspace(0.25, 8.0, 32):
        s = evolve_continuous(ScalarState.delta(0), LatticeGenerator(1.0), scale)
        got = np.array([s.amplitude(int(v)) for v in x])
        worst = max(worst, float(np.max(np.abs(got - bessel_propagator(x, scale)))))
        drift = max(drift, abs(s.norm_sq - 1))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-10 and drift <= 1e-10 and elapsed < 1.0
    report(6, ok, f"bessel error {worst:.2e}, norm drift {drift:.2e}, {elapsed:.2f}s")


def test_criterion_07_convergence_rate():
    started = time.perf_counter()
    study = convergence_study(HADAMARD_SPEC, SYMMETRIC_INIT, 4, [10**4, 10**5, 10**6, 10**7], seed=SEED)
    elapsed = time.perf_counter() - started
    ok = -0.65 <= study.slope <= -0.35 and elapsed < 60
    report(7, ok, f"slope {study.slope:.3f}, {elapsed:.1f}s")


def test_criterion_08_reproducibility(figure_runs):
    base, (code_a, _), (code_b, _) = figure_runs
    identical = (base / "a" / "compare.csv").read_bytes() == (base / "b" / "compare.csv").read_bytes()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", VarianceAdvisory)
        one = estimate_discrete(HADAMARD_SPEC, SYMMETRIC_INIT, 6, 10**8, seed=SEED, workers=1)
        four = estimate_discrete(HADAMARD_SPEC, SYMMETRIC_INIT, 6, 10**8, seed=SEED, workers=4)
    diff = float(np.max(np.abs(one.state.to_vector() - four.state.to_vector())))
    ok = code_a == 0 and code_b == 0 and identical and diff <= 1e-12
    report(8, ok, f"csv byte-identical: {identical}, workers 1 vs 4 max diff {diff:.2e}")


def test_criterion_09_euler_round_trip():
    rng = np.random.default_rng(9)
    started = time.perf_counter()
    worst = max(float(np.max(np.abs(coin_from_euler(euler_decompose(u)) - u))) for u in
                (haar_unitary(rng) for _ in range(100)))
    had = float(np.max(np.abs(coin_from_euler(HADAMARD_SPEC) - HADAMARD)))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-10 and had <= 1e-14 and elapsed < 1.0
    report(9, ok, f"round trip {worst:.2e}, hadamard {had:.2e}, {elapsed:.2f}s")


def test_criterion_10_normalization():
    s = evolve_coined(point_mass_state(SYMMETRIC_INIT), HADAMARD, 50)
    drift = abs(sum(distribution(s).values()) - 1)
    report(10, drift <= 1e-12, f"norm drift after 50 steps {drift:.2e}")


@pytest.mark.slow
def test_criterion_04_full_scale():
    """n = 10 with 5e9 samples; hours of CPU, select with ``-m slow``."""
    est = estimate_discrete(HADAMARD_SPEC, SYMMETRIC_INIT, 10, 5 * 10**9, seed=SEED)
    ref = evolve_coined(point_mass_state(SYMMETRIC_INIT), HADAMARD, 10)
    tvd = total_variation(distribution(ref), distribution(est.state), renormalize=True)
    report(4, tvd <= 0.05, f"full scale n=10, M=5e9: tvd {tvd:.4f}")
