"""Acceptance criteria, one test per criterion.

Every test records a PASS/FAIL/SKIPPED line with its run time; the terminal
summary hook in ``conftest.py`` prints them together at the end of the session.
"""

import contextlib
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

import oracles
from reference_tables import ENTROPY_ORDERS, ENTROPY_ROWS, IRREGULAR_ENTROPY_ROW, MOMENT_ROWS
from gmopg import properties as P
from gmopg.baseline import Exponential, Weibull
from gmopg.cli import InputError, read_lifetimes
from gmopg.errors import DatasetValidationError
from gmopg.family import GMOPG, asymptotic_hazard, asymptotic_pdf, genesis_sample, likelihood_ratio
from gmopg.inference import ModelConfig, compare_models, fit, observed_information, validate_table3
from gmopg.simulation import _replicate, mc_study, simulation_config

RESULTS: dict[int, str] = {}

DATA_ENV = "GMOPG_GUINEA_PIG_DATA"
DATA_FILE = Path(__file__).parent / "data" / "guinea_pigs.csv"


@contextlib.contextmanager
def criterion(number: int, title: str, budget: float):
    """Run a criterion body and record its outcome, detail lines and timing."""
    notes: list[str] = []
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield notes
        status = "PASS"
    except pytest.skip.Exception as exc:
        status = "SKIPPED"
        notes.append(str(exc))
        raise
    except AssertionError as exc:
        notes.append(str(exc).splitlines()[0] if str(exc) else "assertion failed")
        raise
    except Exception as exc:
        notes.append(f"{type(exc).__name__}: {exc}")
        raise
    finally:
        elapsed = time.perf_counter() - start
        if status == "PASS" and elapsed > budget:
            notes.append(f"over the {budget:.0f} s budget")
        detail = "; ".join(notes)
        RESULTS[number] = f"criterion {number:2d} {status:7s} {title} ({elapsed:.1f} s){': ' + detail if detail else ''}"


def _random_member(rng, lam=None):
    theta, alpha = rng.uniform(0.1, 20, 2)
    if lam is None:
        lam = rng.choice([-1.0, 1.0]) * rng.uniform(1e-8, 6)
    if rng.random() < 0.5:
        base = Exponential(rng.uniform(0.2, 3))
    else:
        base = Weibull(rng.uniform(0.2, 3), rng.uniform(0.5, 3))
    return GMOPG(theta, alpha, lam, base)


def _total_mass(m):
    # integrate between model quantiles so each piece holds a known share of the mass
    cuts = m.quantile(np.array([1e-12, 1e-6, 1e-3, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999, 1 - 1e-6, 1 - 1e-12]))
    edges = np.concatenate(([0.0], cuts, [np.inf]))
    return sum(
        integrate.quad(m.pdf, a, b, limit=200, epsabs=1e-14, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:])
    )


# -- 1 ---------------------------------------------------------------------------------


def test_criterion_01_normalization_and_inversion():
    with criterion(1, "normalization, quantile round-trip, cdf monotone", 60) as notes:
        rng = np.random.default_rng(101)
        members = [_random_member(rng) for _ in range(48)]
        members += [_random_member(rng, lam=0.0) for _ in range(2)]
        p = np.concatenate((np.geomspace(1e-10, 1e-3, 50), np.linspace(1e-3, 1 - 1e-3, 199)))
        worst_mass = worst_trip = 0.0
        for m in members:
            worst_mass = max(worst_mass, abs(_total_mass(m) - 1.0))
            worst_trip = max(worst_trip, np.max(np.abs(m.cdf(m.quantile(p)) - p)))
            t = np.sort(np.concatenate((m.quantile(p), np.geomspace(1e-6, 1e3, 400))))
            assert np.all(np.diff(m.cdf(t)) >= 0), f"cdf not monotone for {m}"
        notes.append(f"max |mass-1| = {worst_mass:.1e}, max round-trip = {worst_trip:.1e}")
        assert worst_mass < 1e-8, f"max |mass-1| = {worst_mass:.2e}"
        assert worst_trip < 1e-10, f"max round-trip error = {worst_trip:.2e}"


# -- 2 ---------------------------------------------------------------------------------


def test_criterion_02_special_case_reductions():
    with criterion(2, "special-case reductions against independent formulas", 10) as notes:
        t = np.geomspace(1e-3, 12, 200)
        worst = 0.0
        for lam, alpha, theta, beta, delta in [(-1.7, 2.6, 0.45, 0.6, 1.4), (2.3, 0.3, 3.5, 1.2, 1.0)]:
            base = Weibull(beta, delta)
            Gbar = np.exp(-beta * t**delta)
            g = oracles.g_weibull(t, beta, delta)
            S, s = oracles.pg_sf(t, lam, beta, delta), oracles.pg_pdf(t, lam, beta, delta)
            cases = {
                "P-G": (GMOPG(1.0, 1.0, lam, base), S, s),
                "MO": (GMOPG(1.0, alpha, 0.0, base), oracles.gmo_sf(Gbar, 1.0, alpha), oracles.gmo_pdf(g, Gbar, 1.0, alpha)),
                "GMO": (GMOPG(theta, alpha, 0.0, base), oracles.gmo_sf(Gbar, theta, alpha), oracles.gmo_pdf(g, Gbar, theta, alpha)),
                "MOP-G": (GMOPG(1.0, alpha, lam, base), oracles.gmo_sf(S, 1.0, alpha), oracles.gmo_pdf(s, S, 1.0, alpha)),
            }
            for name, (model, sf_ref, pdf_ref) in cases.items():
                err = max(np.max(np.abs(model.sf(t) - sf_ref)), np.max(np.abs(model.pdf(t) - pdf_ref)))
                assert err < 1e-10, f"{name} differs by {err:.2e}"
                worst = max(worst, err)
        notes.append(f"max sup distance = {worst:.1e}")


# -- 3 ---------------------------------------------------------------------------------


def test_criterion_03_series_equivalence():
    with criterion(3, "truncated mixtures match closed forms", 30) as notes:
        rng = np.random.default_rng(303)
        worst = worst_weights = 0.0
        for _ in range(10):
            theta, alpha = rng.uniform(0.3, 6), rng.uniform(0.1, 0.9)
            lam = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 5)
            m = GMOPG(theta, alpha, lam, Exponential(rng.uniform(0.3, 3)))
            t = m.quantile(np.linspace(1e-4, 1 - 1e-4, 300))
            coef = P.series_coefficients(theta, alpha)
            worst_weights = max(worst_weights, abs(coef.eta_prime.sum() + coef.tail_mass - 1.0), coef.tail_mass)
            worst = max(
                worst,
                np.max(np.abs(P.truncated_mixture_sf(m, t) - m.sf(t))),
                np.max(np.abs(P.truncated_mixture_pdf(m, t) - m.pdf(t))),
            )
        notes.append(f"sup error = {worst:.1e}, weight defect = {worst_weights:.1e}")
        assert worst < 1e-6
        assert worst_weights < 1e-10


# -- 4 ---------------------------------------------------------------------------------


def test_criterion_04_moment_table():
    with criterion(4, "moment table: >= 18 of 22 rows within tolerance", 120) as notes:
        failing = []
        for i, (th, a, lam, b, mean, var, skew, kurt) in enumerate(MOMENT_ROWS, start=1):
            s = P.moment_summary(GMOPG(th, a, lam, Exponential(b)))
            ok = abs(s.mean - mean) <= 0.002 and abs(s.variance - var) <= 0.002
            ok &= abs(s.skewness - skew) <= 0.02 and abs(s.kurtosis - kurt) <= 0.02
            if not ok:
                failing.append(
                    f"row {i} computed ({s.mean:.4f}, {s.variance:.5f}, {s.skewness:.4f}, {s.kurtosis:.4f})"
                    f" vs printed ({mean}, {var}, {skew}, {kurt})"
                )
        passed = len(MOMENT_ROWS) - len(failing)
        notes.append(f"{passed}/22 rows pass")
        notes.extend(failing)
        assert passed >= 18, f"only {passed} rows pass"


# -- 5 ---------------------------------------------------------------------------------


def test_criterion_05_entropy_table():
    with criterion(5, "entropy table: first row and monotone rows", 60) as notes:
        params, printed = ENTROPY_ROWS[0]
        m = GMOPG(*params[:3], Exponential(params[3]))
        first = np.array([P.renyi_entropy(m, d) for d in ENTROPY_ORDERS])
        err = np.max(np.abs(first - np.array(printed)))
        notes.append(f"first row max error = {err:.1e}")
        assert err <= 0.02, f"first row max error {err:.3f}"
        for i, (params, _) in enumerate(ENTROPY_ROWS):
            m = GMOPG(*params[:3], Exponential(params[3]))
            values = np.array([P.renyi_entropy(m, d) for d in ENTROPY_ORDERS])
            if i == IRREGULAR_ENTROPY_ROW:
                notes.append("irregular row computed " + ", ".join(f"{v:.4f}" for v in values))
            assert np.all(np.diff(values) <= 1e-12), f"row {i + 1} is not nonincreasing"


# -- 6 ---------------------------------------------------------------------------------


def test_criterion_06_likelihood_ratio_order():
    with criterion(6, "likelihood ratio strictly decreasing for alpha1 < alpha2", 5):
        rng = np.random.default_rng(606)
        for _ in range(20):
            x = _random_member(rng)
            a1, a2 = np.sort(rng.uniform(0.1, 20, 2))
            x, y = x.replace(alpha=a1), x.replace(alpha=a2)
            t = np.linspace(x.quantile(1e-3), x.quantile(1 - 1e-3), 200)
            assert np.all(np.diff(likelihood_ratio(x, y, t)) < 0), f"ratio not decreasing for {x} vs alpha {a2}"


# -- 7 ---------------------------------------------------------------------------------


def test_criterion_07_asymptotes():
    with criterion(7, "density and hazard match their tail asymptotes", 5) as notes:
        rng = np.random.default_rng(707)
        worst = 0.0
        for _ in range(10):
            m = _random_member(rng)
            lo = m.quantile(1e-10)
            hi = m.baseline.isf(1e-10)
            assert m.cdf(lo) < 1e-6 and m.cdf(hi) > 1 - 1e-6
            for t, regime in ((lo, "small"), (hi, "large")):
                for exact, approx in ((m.pdf, asymptotic_pdf), (m.hazard, asymptotic_hazard)):
                    ratio = exact(t) / approx(m, t, regime)
                    worst = max(worst, abs(ratio - 1.0))
                    assert abs(ratio - 1.0) < 1e-3, f"{regime} ratio {ratio:.6f} for {m}"
        notes.append(f"max |ratio-1| = {worst:.1e}")


# -- 8 ---------------------------------------------------------------------------------


def test_criterion_08_geometric_construction():
    with criterion(8, "min/max geometric construction passes KS at 1%", 30) as notes:
        for theta, alpha in [(2, 0.4), (3, 0.7), (2, 2.5)]:
            m = GMOPG(theta, alpha, 1.5, Exponential(0.8))
            pvalue = stats.kstest(genesis_sample(m, 10_000, seed=808), m.cdf).pvalue
            notes.append(f"({theta}, {alpha}) p = {pvalue:.3f}")
            assert pvalue > 0.01, f"KS p-value {pvalue:.4f} for theta={theta}, alpha={alpha}"


# -- 9 ---------------------------------------------------------------------------------


def test_criterion_09_estimator_study():
    with criterion(9, "Monte Carlo bias and MSE shrink from n=20 to n=80", 600) as notes:
        truth = GMOPG(2.0, 8.0, 5.0, Exponential(0.5))
        seed = 2024
        report = mc_study(truth, (20, 80), N=500, seed=seed)
        shrinking = report.shrinking_parameters(20, 80)
        for name in report.truth:
            a, b = report.cell(name, 20), report.cell(name, 80)
            notes.append(f"{name}: |bias| {abs(a.bias):.3g}->{abs(b.bias):.3g}, MSE {a.mse:.3g}->{b.mse:.3g}")
        for n in (20, 80):
            c = report.cell("beta", n)
            notes.append(f"n={n}: {c.converged}/500 converged, {c.boundary} at the box edge")
        assert len(shrinking) >= 3, f"only {shrinking} shrink"
        # replicates depend only on (seed, n, r): refitting a few must give identical estimates
        config = simulation_config(truth)
        for n, r in ((20, 0), (20, 257), (80, 499)):
            _, _, est, _, _ = _replicate((truth, config, seed, n, r, False))
            np.testing.assert_array_equal(est, report.estimates[n][r])


# -- 10 --------------------------------------------------------------------------------


def _guinea_pig_data():
    path = os.environ.get(DATA_ENV) or (DATA_FILE if DATA_FILE.exists() else None)
    if path is None:
        pytest.skip(f"no data file; set {DATA_ENV} or add tests/data/guinea_pigs.csv")
    try:
        data, _ = read_lifetimes(path)
        validate_table3(data)
    except (InputError, DatasetValidationError) as err:
        pytest.skip(f"data file rejected: {err}")
    return data


def test_criterion_10_guinea_pig_fits():
    with criterion(10, "guinea-pig model comparison", 120) as notes:
        data = _guinea_pig_data()
        results = compare_models(data, ["exp", "me", "p-e", "mo-e", "gmo-e", "mop-e", "gmop-e"])
        by_tag = {r.tag.value: r for r in results}
        best, exp = by_tag["gmop-e"], by_tag["exp"]
        notes.append(f"GMOP-E AIC {best.criteria.aic:.2f}, Exp AIC {exp.criteria.aic:.2f}")
        assert abs(best.criteria.aic - 204.24) <= 1.5
        assert best.gof.ks <= 0.08 and best.gof.anderson_darling <= 0.55 and best.gof.cramer_von_mises <= 0.07
        assert abs(exp.estimates["beta"] - 0.540) <= 0.005
        assert abs(exp.criteria.aic - 234.63) <= 0.05
        assert results[0].tag.value == "gmop-e", f"best by AIC is {results[0].tag.value}"


# -- 11 --------------------------------------------------------------------------------


def test_criterion_11_oracle_cross_checks():
    with criterion(11, "exponential information and PWM moments", 60) as notes:
        data = GMOPG(1.0, 1.0, 0.0, Exponential(0.7)).sample(250, seed=1111)
        res = fit(data, ModelConfig(tag="exp"))
        beta = res.estimates["beta"]
        info = observed_information(res.distribution, data, tag="exp")[0, 0]
        rel = abs(info / (data.size / beta**2) - 1.0)
        notes.append(f"information relative error {rel:.1e}")
        assert rel < 1e-3
        for params in [(2.0, 0.5, 1.0, 1.0), (3.5, 0.3, -2.0, 0.8)]:
            m = GMOPG(*params[:3], Exponential(params[3]))
            for s in (1, 2):
                assert abs(P.moment_via_pwm(m, s) - P.raw_moment(m, s)) < 1e-6, f"order {s} for {params}"
