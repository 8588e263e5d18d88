"""Acceptance suite: one recorded PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the summary section
"acceptance criteria" lists every line.
"""

import time

import numpy as np
import pytest

from pndm.analysis import (
    estimate_order,
    global_error,
    probe,
    probe_grid,
    reference_solution,
    toy_problem,
)
from pndm.cli import main
from pndm.predictor import ConstantPredictor, ExactOracle, forward_diffuse
from pndm.schedule import Cosine, Exponential, LinearBeta, ToyLinear
from pndm.solvers import SamplerSpec, expected_eval_count, sample, steps_for_budget
from pndm.transfer import phi

ORDER_STEPS = (20, 40, 80, 160, 320)
ORDER_METHODS = ("DDIM", "S-PNDM", "F-PNDM", "FON-RK4")


def test_c1_transfer_identity(criterion, rng):
    tic = time.perf_counter()
    scheds = [ToyLinear(), LinearBeta(), Cosine(), Exponential(0.0, -1.0)]
    bad = 0
    for k in range(10_000):
        dim = int(rng.integers(1, 17))
        x = rng.standard_normal(dim) * 10.0 ** rng.uniform(-3, 3)
        eps = rng.standard_normal(dim)
        t = float(rng.uniform(0.0, 0.999))
        bad += phi(x, eps, t, t, scheds[k % 4]).tobytes() != x.tobytes()
    elapsed = time.perf_counter() - tic
    ok = bad == 0 and elapsed < 1.0
    criterion(1, "transfer identity", ok, f"mismatches={bad} time={elapsed:.2f}s")
    assert ok


def test_c2_manifold_preservation(criterion, rng):
    tic = time.perf_counter()
    scheds = [ToyLinear(), LinearBeta(), Cosine()]
    worst = 0.0
    for k in range(100):
        sched = scheds[k % 3]
        dim = int(rng.integers(2, 65))
        steps = (5, 10, 50)[(k // 3) % 3]
        x0, eps = rng.standard_normal(dim), rng.standard_normal(dim)
        t_start = 0.99
        for method in ("DDIM", "S-PNDM", "F-PNDM"):
            spec = SamplerSpec.uniform(method, steps, t_start, 0.0, sched, ExactOracle(x0, sched))
            traj = sample(spec, forward_diffuse(x0, eps, sched, t_start))
            for t, x in traj.states:
                target = forward_diffuse(x0, eps, sched, t)
                worst = max(worst, np.linalg.norm(x - target) / np.linalg.norm(target))
    elapsed = time.perf_counter() - tic
    ok = worst <= 1e-10 and elapsed < 10.0
    criterion(2, "manifold preservation", ok, f"max_rel={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_c3_constant_predictor_reduction(criterion, rng):
    tic = time.perf_counter()
    mismatches = 0
    for sched in (ToyLinear(), LinearBeta(), Cosine()):
        for steps in (4, 9, 30):
            dim = int(rng.integers(2, 9))
            pred = ConstantPredictor(rng.standard_normal(dim))
            x = rng.standard_normal(dim)
            ddim = sample(SamplerSpec.uniform("DDIM", steps, 0.9, 0.05, sched, pred), x).xs
            for method in ("S-PNDM", "F-PNDM"):
                got = sample(SamplerSpec.uniform(method, steps, 0.9, 0.05, sched, pred), x).xs
                mismatches += got.tobytes() != ddim.tobytes()
    elapsed = time.perf_counter() - tic
    ok = mismatches == 0 and elapsed < 1.0
    criterion(3, "constant-predictor reduction", ok, f"mismatches={mismatches} time={elapsed:.2f}s")
    assert ok


@pytest.fixture(scope="module")
def order_study():
    tic = time.perf_counter()
    problem = toy_problem()
    reference = reference_solution(problem, 100 * max(ORDER_STEPS), "FON-RK4")
    deltas = [problem.span / s for s in ORDER_STEPS]
    reports = {m: estimate_order(m, deltas, problem, reference) for m in ORDER_METHODS}
    return reports, time.perf_counter() - tic


def test_c4_convergence_order(criterion, order_study):
    reports, elapsed = order_study
    deltas = reports["DDIM"].deltas
    spans_decade = max(deltas) / min(deltas) >= 10 and len(deltas) >= 5
    ok = spans_decade and elapsed < 60.0
    parts = []
    for m, r in reports.items():
        ok &= r.in_window() and len(r.points) >= 5
        parts.append(f"{m}={r.slope:.3f}")
    criterion(4, "convergence order", ok, " ".join(parts) + f" time={elapsed:.1f}s")
    assert ok


def test_c5_ratio_check(criterion, order_study):
    reports, _ = order_study
    ok = all(r.ratios_consistent(2.0) for r in reports.values())
    worst = max(max(o / p, p / o) for r in reports.values() for o, p in r.ratio_factors())
    criterion(5, "halving ratio within x2", ok, f"worst_factor={worst:.2f}")
    assert ok


def test_c6_singularity(criterion):
    tic = time.perf_counter()
    blowup = probe(Exponential(0.0, -1.0), probe_grid(1e-6, 1e-2, 25))
    tame = probe(Exponential(-1.0, 0.0), probe_grid(1e-6, 1e-2, 25))
    elapsed = time.perf_counter() - tic
    at_small = tame.points[0][1]
    ok = abs(blowup.slope + 0.5) <= 0.1 and tame.bounded and np.isfinite(at_small) and elapsed < 1.0
    criterion(
        6,
        "singularity",
        ok,
        f"slope(b=-1)={blowup.slope:.3f} magnitude(a=-1,t=1e-6)={at_small:.2e} time={elapsed:.2f}s",
    )
    assert ok


def test_c7_comparative_accuracy(criterion):
    tic = time.perf_counter()
    ok = True
    parts = []
    problem = toy_problem(t_start=0.95, t_end=0.05)
    reference = reference_solution(problem, 20_000, "FON-RK4")
    for budget in (20, 50, 100):
        e_ddim = global_error("DDIM", steps_for_budget("DDIM", budget), problem, reference)
        e_f = global_error("F-PNDM", steps_for_budget("F-PNDM", budget), problem, reference)
        ok &= e_f < e_ddim
        parts.append(f"B{budget}: F-PNDM={e_f:.1e}<DDIM={e_ddim:.1e}")

    near_zero = toy_problem(t_start=0.95, t_end=1e-3)
    reference = reference_solution(near_zero, 10_000, "F-PNDM")
    for steps in (25, 50, 100):
        e_rk4 = global_error("FON-RK4", steps, near_zero, reference)
        e_f = global_error("F-PNDM", steps, near_zero, reference)
        ok &= e_rk4 > e_f
        parts.append(f"S{steps}@1e-3: RK4={e_rk4:.1e}>F-PNDM={e_f:.1e}")
    elapsed = time.perf_counter() - tic
    ok &= elapsed < 30.0
    criterion(7, "comparative accuracy", ok, " ".join(parts) + f" time={elapsed:.1f}s")
    assert ok


def test_c8_eval_counts(criterion):
    expected = {"DDIM": lambda s: s, "S-PNDM": lambda s: s + 1, "F-PNDM": lambda s: s + 9, "FON-RK4": lambda s: 4 * s}
    problem = toy_problem()
    wrong = []
    for method, count in expected.items():
        for steps in (4, 10, 33):
            traj = problem.solve(method, steps)
            if not (traj.predictor_eval_count == count(steps) == expected_eval_count(method, steps)):
                wrong.append(f"{method}/S={steps}:{traj.predictor_eval_count}")
            if len(traj.eps_log) != traj.predictor_eval_count:
                wrong.append(f"{method}/S={steps}:log")
    ok = not wrong
    criterion(8, "eval counts", ok, "all exact" if ok else " ".join(wrong))
    assert ok


def test_c9_replay(criterion, tmp_path, monkeypatch):
    monkeypatch.delenv("PNDM_SEED", raising=False)
    configs = {
        "sample": "sampler.method=F-PNDM\nsampler.steps=40\nsampler.seed=3\nsampler.init=normal\n",
        "converge": "converge.methods=DDIM,S-PNDM\nconverge.steps=10,20,40,80\nconverge.ref_factor=20\n",
        "probe": "schedule.kind=exponential\nschedule.params.a=0\nschedule.params.b=-1\n",
        "stats": "sampler.method=S-PNDM\nsampler.steps=20\nstats.n_samples=300\n",
    }
    differing, codes = [], []
    for command, text in configs.items():
        cfg = tmp_path / f"{command}.cfg"
        cfg.write_text(text)
        runs = []
        for k in range(2):
            out = tmp_path / f"{command}{k}"
            codes.append(main([command, "--config", str(cfg), "--out", str(out), "--emit-eps"]))
            runs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
        if not runs[0] or runs[0] != runs[1]:
            differing.append(command)
    ok = not differing and set(codes) == {0}
    criterion(9, "byte-identical replay", ok, f"commands={len(configs)} differing={differing}")
    assert ok
