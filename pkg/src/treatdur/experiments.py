"""End-to-end experiment runner and the constant-hazard reference table."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from treatdur.competing_risks import Cause, identify_minima
from treatdur.config import ExperimentConfig
from treatdur.hazards import DomainError, constant
from treatdur.model import TreatmentModel, predicted_absurd_rate
from treatdur.sampling import DurationBatch, Mode, sample_batch
from treatdur.stats import (
    REPORT_COLUMNS,
    GofReport,
    gof_subsurvival,
    h0_contrast_test,
    h1_invariance_test,
    naive_selected_regression,
    two_sample_gof,
)

log = logging.getLogger(__name__)

PASS, FAIL, EXPECTED_FAIL, UNEXPECTED_PASS, INFO = "PASS", "FAIL", "EXPECTED-FAIL", "UNEXPECTED-PASS", "INFO"
BINOMIAL_SIGMAS = 3.0
REGRESSION_Z = 4.0
TABLE_GRID = tuple(round(0.25 * k, 2) for k in range(13))
SUBSURVIVAL_COLUMNS = "t,empirical,analytic,abs_diff"
TABLE_COLUMNS = "quantity,t,analytic,monte_carlo,abs_diff,tolerance"


def _g(x: float) -> str:
    return f"{x:.17g}"


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def closed_form_table(
    lw: float, l0: float, l1: float, n: int = 100_000, seed: int = 0, grid=TABLE_GRID
) -> list[tuple]:
    """Constant-hazard reference values next to their Monte Carlo counterparts.

    Rows are ``(quantity, t, analytic, monte_carlo, abs_diff, tolerance)``;
    ``tolerance`` is three binomial standard errors at the analytic value.
    The DGP1 absurd-rate prediction comes from quadrature over the law of W.
    """
    for name, rate in (("lw", lw), ("l0", l0), ("l1", l1)):
        if not (math.isfinite(rate) and rate > 0):
            raise DomainError(f"{name} must be a positive rate, got {rate!r}")
    m = TreatmentModel(constant(lw), constant(l0), constant(l1))
    correct = sample_batch(m, n, seed, Mode.CORRECT)
    flawed = sample_batch(m, n, seed, Mode.FLAWED)
    mins = identify_minima(correct)
    total = l0 + lw
    rows = []

    def add(quantity, t, analytic, mc, k):
        rows.append((quantity, t, analytic, mc, abs(mc - analytic), BINOMIAL_SIGMAS * _binomial_se(analytic, k)))

    add("pr_y_first", "", l0 / total, mins.share(Cause.Y_FIRST), mins.n_effective)
    add("pr_w_first", "", lw / total, mins.share(Cause.W_FIRST), mins.n_effective)
    for cause, rate, label in ((Cause.Y_FIRST, l0, "subsurvival_y_first"), (Cause.W_FIRST, lw, "subsurvival_w_first")):
        times = mins.times(cause)
        for t in grid:
            analytic = rate / total * math.exp(-total * t)
            add(label, t, analytic, np.count_nonzero(times > t) / mins.n_effective, mins.n_effective)
    add("dgp1_absurd_rate", "", predicted_absurd_rate(m), flawed.absurd_rate, n)
    return rows


def format_table(rows) -> str:
    lines = [TABLE_COLUMNS]
    for q, t, a, mc, d, tol in rows:
        lines.append(",".join([q, "" if t == "" else _g(t), _g(a), _g(mc), _g(d), _g(tol)]))
    return "\n".join(lines) + "\n"


@dataclass
class Outcome:
    report: GofReport
    expect_pass: bool | None  # None: informational, not gated

    @property
    def status(self) -> str:
        if self.expect_pass is None:
            return INFO
        if self.expect_pass:
            return PASS if self.report.passed else FAIL
        return UNEXPECTED_PASS if self.report.passed else EXPECTED_FAIL

    @property
    def ok(self) -> bool:
        return self.status in (PASS, EXPECTED_FAIL, INFO)


class Runner:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.m = cfg.model
        self.out = Path(cfg.out_dir)
        self.outcomes: list[Outcome] = []
        self.notes: list[str] = []
        self._batches: dict[Mode, DurationBatch] = {}

    def batch(self, mode: Mode) -> DurationBatch:
        if mode not in self._batches:
            log.info("sampling %d pairs, mode=%s", self.cfg.n, mode.value)
            b = sample_batch(self.m, self.cfg.n, self.cfg.seed, mode, workers=self.cfg.workers)
            self._batches[mode] = b
            with open(self.out / f"samples_{mode.value}.csv", "w", newline="") as fh:
                b.write_csv(fh, self.cfg.sample_rows)
        return self._batches[mode]

    def record(self, report: GofReport, expect_pass: bool | None):
        self.outcomes.append(Outcome(report, expect_pass))

    def _write_curve(self, name: str, report: GofReport):
        d = report.details
        with open(self.out / f"subsurvival_{name}.csv", "w", newline="") as fh:
            fh.write(SUBSURVIVAL_COLUMNS + "\n")
            fh.writelines(
                f"{_g(t)},{_g(e)},{_g(a)},{_g(abs(e - a))}\n"
                for t, e, a in zip(d["grid"].tolist(), d["empirical"].tolist(), d["analytic"].tolist())
            )

    def gof(self):
        absurd_possible = predicted_absurd_rate(self.m) > 0
        for mode_name in self.cfg.modes:
            mode = Mode(mode_name)
            b = self.batch(mode)
            rate = b.absurd_rate
            clean = b.select(~b.absurd)
            label = "dgp2" if mode is Mode.CORRECT else "dgp1"
            for cause in (Cause.Y_FIRST, Cause.W_FIRST):
                r = gof_subsurvival(clean, self.m, cause, experiment=f"gof-{label}")
                r.absurd_rate = rate
                self._write_curve(f"{mode.value}_{cause.value}", r)
                if mode is Mode.CORRECT:
                    expect = True
                elif cause is Cause.Y_FIRST:
                    expect = self.m.no_effect
                else:
                    # W-first events are untouched by the flawed inversion unless
                    # dropped absurd draws distort the denominator
                    expect = None if absurd_possible else True
                self.record(r, expect)

    def invariance(self):
        n = self.cfg.invariance_n or self.cfg.n
        alt = self.m.with_h1(self.cfg.h1_alt)
        r = h1_invariance_test(self.m, alt, n, self.cfg.seed, workers=self.cfg.workers)
        self.record(r, True)
        if self.cfg.h0_alt is not None:
            r = h0_contrast_test(self.m, self.m.with_h0(self.cfg.h0_alt), n, self.cfg.seed, self.cfg.workers)
            self.record(r, self.cfg.h0_alt == self.m.h0)

    def dgp_compare(self):
        correct, flawed = self.batch(Mode.CORRECT), self.batch(Mode.FLAWED)
        n = len(flawed)
        predicted = predicted_absurd_rate(self.m)
        observed = flawed.absurd_rate
        tol = BINOMIAL_SIGMAS * _binomial_se(predicted, n)
        self.record(
            GofReport("dgp1-absurd-rate", "NA", abs(observed - predicted), n, tol, observed,
                      details={"predicted": predicted}),
            True,
        )
        if self.m.no_effect:
            gap = float(np.max(np.abs(correct.y - flawed.y)))
            self.record(GofReport("mode-collapse", "NA", gap, n, 1e-12, observed), True)
        else:
            r = two_sample_gof(correct, flawed.select(~flawed.absurd), "dgp1-vs-dgp2")
            r.absurd_rate = observed
            self.record(r, False)

    def closed_form(self):
        lw, l0, l1 = (h.rates[0] for h in (self.m.hW, self.m.h0, self.m.h1))
        rows = closed_form_table(lw, l0, l1, self.cfg.n, self.cfg.seed)
        (self.out / "closed_form.csv").write_text(format_table(rows))
        for q, t, a, mc, d, tol in rows:
            if q in ("pr_y_first", "dgp1_absurd_rate"):
                cause = "Y_FIRST" if q == "pr_y_first" else "NA"
                self.record(GofReport(f"closed-form-{q.replace('_', '-')}", cause, d, self.cfg.n, tol), True)

    def regression_demo(self):
        res = naive_selected_regression(self.batch(Mode.CORRECT))
        lines = ["quantity,estimate,std_error,oracle"]
        if self.m.all_constant:
            # constant hazards: Y - W given Y > W is exponential(l1), independent of W
            oracle_slope, oracle_int = 1.0, 1.0 / self.m.h1.rates[0]
            z = max(abs(res.slope - oracle_slope) / res.slope_se, abs(res.intercept - oracle_int) / res.intercept_se)
            expect = True
        else:
            oracle_slope = oracle_int = float("nan")
            z, expect = 0.0, None
        lines.append(f"slope,{_g(res.slope)},{_g(res.slope_se)},{_g(oracle_slope)}")
        lines.append(f"intercept,{_g(res.intercept)},{_g(res.intercept_se)},{_g(oracle_int)}")
        lines.append(f"n_selected,{res.n_selected},,")
        (self.out / "regression.csv").write_text("\n".join(lines) + "\n")
        self.record(GofReport("regression-demo", "NA", z, res.n_selected, REGRESSION_Z), expect)
        self.notes.append(
            f"selected-sample OLS of y on w: slope={res.slope:.6f} intercept={res.intercept:.6f} "
            f"(n_selected={res.n_selected}); a selection artefact, not a treatment effect"
        )

    def run(self) -> int:
        self.out.mkdir(parents=True, exist_ok=True)
        steps = {
            "gof": self.gof,
            "invariance": self.invariance,
            "dgp-compare": self.dgp_compare,
            "closed-form": self.closed_form,
            "regression-demo": self.regression_demo,
        }
        for name in self.cfg.experiments:
            log.info("experiment %s", name)
            steps[name]()
        if self.outcomes:
            rows = [REPORT_COLUMNS] + [o.report.csv_row() for o in self.outcomes]
            (self.out / "report.csv").write_text("\n".join(rows) + "\n")
        (self.out / "summary.txt").write_text(self.summary())
        return 0 if all(o.ok for o in self.outcomes) else 1

    def summary(self) -> str:
        cfg = self.cfg
        lines = [
            f"model: hW={cfg.model.hW.to_dict()} h0={cfg.model.h0.to_dict()} h1={cfg.model.h1.to_dict()}",
            f"n={cfg.n} seed={cfg.seed} modes={','.join(cfg.modes)}",
            f"experiments: {', '.join(cfg.experiments) if cfg.experiments else '(none)'}",
            "",
        ]
        for o in self.outcomes:
            r = o.report
            lines.append(
                f"{o.status:<16} {r.experiment} [{r.cause}] n={r.n} statistic={r.statistic:.6g} "
                f"threshold={r.threshold:.6g} absurd_rate={r.absurd_rate:.6g}"
            )
        lines.extend(self.notes)
        ok = all(o.ok for o in self.outcomes)
        lines.append("")
        lines.append(f"overall: {'OK' if ok else 'FAILED'} ({len(self.outcomes)} checks)")
        return "\n".join(lines) + "\n"


def run(cfg: ExperimentConfig) -> int:
    return Runner(cfg).run()
