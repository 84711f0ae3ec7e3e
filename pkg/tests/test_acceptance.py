"""Exit criteria for the package, one test per criterion.

Each test prints a ``[criterion N] PASS|FAIL ...`` line; the lines are also
repeated in the pytest terminal summary (see conftest.py).
"""

import math
import time

import numpy as np
import pytest

from treatdur import TreatmentModel, constant, piecewise
from treatdur.cli import main
from treatdur.competing_risks import Cause, identify_minima
from treatdur.experiments import closed_form_table
from treatdur.model import (
    density_f_w,
    density_f_y_given_w,
    subdensity_w_first,
    subdensity_y_first,
    subsurvival_y_first_quadrature,
)
from treatdur.quadrature import integrate
from treatdur.sampling import coupled_sample, sample_batch
from treatdur.stats import gof_subsurvival, h0_contrast_test, h1_invariance_test

RESULTS = []

BASE = TreatmentModel(constant(1.0), constant(0.5), constant(2.0))
N_LARGE = 10**6
N_MEDIUM = 10**5
SEED = 42


def report(criterion, ok, detail):
    line = f"[criterion {criterion}] {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def test_criterion_1_dgp2_subdensities():
    start = time.perf_counter()
    mins = identify_minima(sample_batch(BASE, N_LARGE, SEED, "correct"))
    reports = [gof_subsurvival(mins, BASE, c) for c in (Cause.Y_FIRST, Cause.W_FIRST)]
    elapsed = time.perf_counter() - start
    threshold = 1.63 / math.sqrt(N_LARGE)
    ok = all(r.statistic <= threshold for r in reports) and elapsed < 10.0
    stats = ", ".join(f"{r.cause}={r.statistic:.6f}" for r in reports)
    assert report(1, ok, f"DGP2 sup-distance {stats} <= {threshold:.5f}; {elapsed:.2f}s < 10s")


def test_criterion_2_dgp1_falsified():
    start = time.perf_counter()
    flawed = sample_batch(BASE, N_LARGE, SEED, "flawed")
    r = gof_subsurvival(flawed.select(~flawed.absurd), BASE, Cause.Y_FIRST)
    table = {row[0]: row for row in closed_form_table(1.0, 2.0, 0.5, n=N_LARGE, seed=SEED)}
    elapsed = time.perf_counter() - start
    _, _, predicted, observed, gap, _ = table["dgp1_absurd_rate"]
    three_se = 3 * math.sqrt(predicted * (1 - predicted) / N_LARGE)
    ok = r.statistic > 10 * r.threshold and gap <= three_se and elapsed < 10.0
    assert report(
        2,
        ok,
        f"DGP1 Y_FIRST statistic {r.statistic:.4f} > 10x{r.threshold:.5f}; absurd rate {observed:.6f} "
        f"vs predicted {predicted:.6f} (|diff| {gap:.2e} <= 3 SE {three_se:.2e}); {elapsed:.2f}s < 10s",
    )


@pytest.mark.parametrize(
    "h0, h1",
    [
        (constant(0.5), constant(0.5)),
        (piecewise([0.8, 2.0], [0.4, 1.1, 0.6]), piecewise([0.8, 2.0], [0.4, 1.1, 0.6])),
        # same function spelled differently: exercises the general flawed formula
        (constant(0.5), piecewise([1.0, 2.5], [0.5, 0.5, 0.5])),
    ],
    ids=["constant", "piecewise", "respelled"],
)
def test_criterion_3_mode_collapse(h0, h1):
    m = TreatmentModel(constant(1.0), h0, h1)
    correct, flawed = coupled_sample(m, m, N_MEDIUM, SEED, "correct", "flawed")
    gap = max(float(np.max(np.abs(correct.w - flawed.w))), float(np.max(np.abs(correct.y - flawed.y))))
    ok = gap <= 1e-12 and not flawed.absurd.any()
    assert report(3, ok, f"h0 == h1 ({h0.family}/{h1.family}): max |DGP1 - DGP2| = {gap:.1e} <= 1e-12 over n={N_MEDIUM}")


def test_criterion_4_h1_invariance():
    m = TreatmentModel(constant(1.0), constant(0.5), constant(2.0))
    start = time.perf_counter()
    same = h1_invariance_test(m, m.with_h1(constant(5.0)), N_MEDIUM, SEED)
    contrast = h0_contrast_test(m, m.with_h0(constant(1.0)), N_MEDIUM, SEED)
    elapsed = time.perf_counter() - start
    ok = same.passed and not contrast.passed and elapsed < 5.0
    assert report(
        4,
        ok,
        f"h1 2.0 vs 5.0 statistic {same.statistic:.5f} <= {same.threshold:.5f}; "
        f"h0 0.5 vs 1.0 statistic {contrast.statistic:.4f} > threshold; {elapsed:.2f}s < 5s",
    )


def test_criterion_5_derivation_check():
    models = {
        "constant": BASE,
        "piecewise": TreatmentModel(
            piecewise([0.75, 1.85], [1.0, 0.4, 1.5]), piecewise([1.25, 2.45], [0.5, 1.2, 0.3]), constant(2.0)
        ),
    }
    grid = [round(0.1 * k, 10) for k in range(1, 31)]
    h = 1e-4
    start = time.perf_counter()
    worst = 0.0
    for m in models.values():
        for y in grid:
            fd = (subsurvival_y_first_quadrature(m, y + h) - subsurvival_y_first_quadrature(m, y - h)) / (2 * h)
            target = subdensity_y_first(m, y)
            worst = max(worst, abs(-fd - target) / target)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 1.0
    assert report(5, ok, f"max relative error {worst:.2e} <= 1e-6 on t=0.1..3.0 (constant, piecewise); {elapsed:.2f}s < 1s")


@pytest.mark.parametrize("rates", [(1.0, 0.5, 2.0), (1.0, 1.0, 1.0), (2.0, 0.5, 0.5)])
def test_criterion_6_closed_form_share(rates):
    lw, l0, l1 = rates
    m = TreatmentModel(constant(lw), constant(l0), constant(l1))
    b = sample_batch(m, N_LARGE, SEED)
    empirical = float(np.mean(b.y < b.w))
    expected = l0 / (l0 + lw)
    gap = abs(empirical - expected)
    assert report(6, gap <= 0.002, f"rates {rates}: Pr(Y<W) {empirical:.5f} vs {expected:.5f} (|diff| {gap:.5f} <= 0.002)")


@pytest.mark.parametrize(
    "m",
    [BASE, TreatmentModel(piecewise([0.6], [1.4, 0.7]), piecewise([1.5], [0.5, 1.3]), piecewise([2.2], [2.0, 0.9]))],
    ids=["constant", "piecewise"],
)
def test_criterion_7_normalisation(m):
    def total(f, extra=()):
        return integrate(f, 0.0, math.inf, points=m.kinks() + tuple(extra), epsabs=1e-12)

    masses = {"f_W": total(lambda w: density_f_w(m, w))}
    for w in (0.5, 1.0, 3.0):
        masses[f"f_Y|W={w}"] = total(lambda y: density_f_y_given_w(m, w, y), (w,))
    masses["subdensities"] = total(lambda t: subdensity_y_first(m, t)) + total(lambda t: subdensity_w_first(m, t))
    worst = max(abs(v - 1.0) for v in masses.values())
    assert report(7, worst <= 1e-8, f"{len(masses)} masses, max |mass - 1| = {worst:.1e} <= 1e-8")


def test_criterion_8_determinism(tmp_path):
    runs = {"a": ["--workers", "1"], "b": ["--workers", "1"], "c": ["--workers", "8"]}
    codes = {k: main(["run", "rebuttal.cfg", "--out", str(tmp_path / k), *v]) for k, v in runs.items()}
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    mismatched = [
        f"{k}/{name}"
        for k in ("b", "c")
        for name in names
        if (tmp_path / "a" / name).read_bytes() != (tmp_path / k / name).read_bytes()
    ]
    same_listing = all(sorted(p.name for p in (tmp_path / k).iterdir()) == names for k in ("b", "c"))
    ok = all(c == 0 for c in codes.values()) and not mismatched and same_listing
    assert report(
        8, ok, f"rebuttal.cfg: {len(names)} files byte-identical across 2 runs and 1 vs 8 workers; exit codes {codes}"
    )
