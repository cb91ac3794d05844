"""Acceptance criteria, one pytest test (and one summary line) per criterion.

Each criterion collects named items; the criterion passes only if every
non-supplementary item passes.  Supplementary items report the scheme-exact
values next to the published ones and never change the verdict.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest,
which prints the lines in its terminal summary.
"""

from __future__ import annotations

import subprocess
import sys
import time
from dataclasses import dataclass

import acceptance_log
import pytest

from enum_oracle import expected_tally, phase_law, run_law
from mgregion import analytic as an
from mgregion import checks
from mgregion.montecarlo import compare, estimate
from mgregion.netmodel import build_hex, build_wyner
from mgregion.scheduler import ADAPTIVE, EMBB_ONLY, NONADAPTIVE
from mgregion.traffic import (
    MODEL1,
    MODEL2,
    RXONLY,
    TXRX,
    ScenarioParams,
    embb_subnet_prob_rx,
    embb_subnet_prob_rx_exact,
    subnet_prob_m1,
    subnet_prob_m2,
    subnet_prob_m2_phase,
)


@dataclass
class Item:
    label: str
    ok: bool
    detail: str
    supplementary: bool = False


def _report(number: int, title: str, items: list[Item]) -> bool:
    verdict = all(i.ok for i in items if not i.supplementary)
    failing = [i.label for i in items if not i.ok and not i.supplementary]
    head = f"CRITERION {number} [{'PASS' if verdict else 'FAIL'}] {title}"
    if failing:
        head += f" (failing: {'; '.join(failing)})"
    lines = [head]
    for i in items:
        tag = "pass" if i.ok else "FAIL"
        sup = " (supplementary)" if i.supplementary else ""
        lines.append(f"    [{tag}] {i.label}{sup}: {i.detail}")
    acceptance_log.LINES.extend(lines)
    print("\n".join(lines))
    return verdict


def _close(label, value, target, tol, supplementary=False):
    return Item(label, abs(value - target) <= tol, f"{value:.10g} vs {target:.10g} (tol {tol:g})", supplementary)


def _timed(label, seconds, limit):
    return Item(label, seconds < limit, f"{seconds:.2f} s (limit {limit:g} s)")


# ---------------------------------------------------------------------------
# 1. closed-form figure values


def criterion_1() -> bool:
    items = []
    t0 = time.perf_counter()
    P = ScenarioParams
    items.append(_close("largest eMBB MG, model 1, rho=0.8, D=10", an.se_max(P(0.8, 0.6, 10)), 0.785243, 5e-5))
    items.append(_close("largest eMBB MG, model 2, (0.8, 0.6, 10)", an.se_max(P(0.8, 0.6, 10, MODEL2)),
                        0.319999216012473, 1e-9))
    items.append(_close("largest eMBB MG, model 1, rho=0.4, D=4", an.se_max(P(0.4, 0.3, 4)), 0.3975, 5e-4))
    items.append(_close("largest eMBB MG, model 2, (0.4, 0.3, 4)", an.se_max(P(0.4, 0.3, 4, MODEL2)),
                        0.279652871703360, 1e-9))
    items.append(_close("Rx-only model 1 non-adaptive slope, D=10, rho_f=0.6",
                        an.m_rx1_nonadaptive(0.6, 10), 2.39, 0.005))
    items.append(_close("Rx-only model 2 non-adaptive slope, D=10, rho_f=0.6",
                        an.m_rx2_nonadaptive(0.6, 10), 1.22, 0.005))
    items.append(_close("hex Rx-only model 1 non-adaptive slope, rho_f=0.6", an.l_rx1_nonadaptive_hex(0.6), 4.33, 0.04))
    items.append(_close("hex Rx-only model 1 adaptive slope, (0.8, 0.6)", an.l_rx1_adaptive_hex(0.8, 0.6), 3.86, 0.07))
    items.append(_close("hex Rx-only model 2 adaptive slope, (0.8, 0.6)", an.l_rx2_adaptive_hex(0.8, 0.6), 1.15, 0.005))
    items.append(_close("hex Rx-only model 1 non-adaptive slope, rho_f=0.1", an.l_rx1_nonadaptive_hex(0.1), 21, 0.01))
    items.append(_close("hex Rx-only model 1 adaptive slope, (0.8, 0.1)", an.l_rx1_adaptive_hex(0.8, 0.1), 5.42, 0.01))
    items.append(_close("hex Rx-only model 2 non-adaptive slope, rho_f=0.1", an.l_rx2_nonadaptive_hex(0.1), 18, 0.01))
    items.append(_close("hex Rx-only model 2 adaptive slope, (0.8, 0.1)", an.l_rx2_adaptive_hex(0.8, 0.1), 3.98, 0.01))
    outer = an.outer_region(P(0.8, 0.6, 10, MODEL1, RXONLY))
    se_cap = min(c.rhs - c.coeff_u * 0.24 for c in outer if c.coeff_e == 1)
    items.append(_close("Rx-only model 1 outer bound at S^U=0.24", se_cap, 0.368, 1e-6))
    items.append(_timed("runtime of all closed-form values", time.perf_counter() - t0, 1.0))
    return _report(1, "closed-form figure values", items)


# ---------------------------------------------------------------------------
# 2. series against closed forms, identity grid


def criterion_2() -> bool:
    t0 = time.perf_counter()
    items = []
    for r in checks.check_series(tol=1e-6):
        detail = f"max |series - closed| = {r.worst:.3g} over {r.cases} grid points"
        if r.failures:
            f = r.failures[0]
            detail += f"; e.g. rho={f['rho']}, rho_f={f['rho_f']}, D={f['D']}: {f['series']:.6f} vs {f['closed']:.6f}"
        # the model-1 Tx+Rx pair is an extra consistency check
        sup = r.name.startswith("Tx+Rx model 1")
        items.append(Item(r.name, r.ok, detail, sup))
    ids = checks.check_identities(tol=1e-8, tail=1e-12)
    worst = max(r.worst for r in ids)
    bad = [r.name for r in ids if not r.ok]
    items.append(Item("summation identity grid", not bad,
                      f"{sum(r.cases for r in ids)} cases, max error {worst:.3g} (tol 1e-8)"
                      + (f"; failing {bad}" if bad else "")))
    items.append(_timed("runtime", time.perf_counter() - t0, 30.0))
    return _report(2, "series match closed forms; identity grid", items)


# ---------------------------------------------------------------------------
# 3. Monte Carlo against analytic values


def criterion_3() -> bool:
    items = []
    P = ScenarioParams

    t0 = time.perf_counter()
    p = P(0.8, 0.6, 10, MODEL1, TXRX)
    est = estimate(p, ADAPTIVE, build_wyner(5000), 200, seed=11)
    target = 0.24 + an.sslast(0.8, 0.6, 10)
    items.append(_close("adaptive Tx+Rx model 1 sum MG, K=5000, 200 trials", est.sum_mean, target, 0.01))
    rep = compare(est, 0.24, "su", k_sigma=4.0, bias=0.0)
    items.append(Item("adaptive Tx+Rx model 1 URLLC MG within 4 sigma of 0.24", rep.passed,
                      f"{rep.mean:.6f} vs 0.24, stderr {rep.stderr:.2g}, deviation {rep.deviation:.2g}"))
    items.append(_timed("runtime (adaptive Tx+Rx)", time.perf_counter() - t0, 60.0))

    t0 = time.perf_counter()
    p = P(0.8, 0.0, 10, MODEL1, TXRX)
    est = estimate(p, NONADAPTIVE, build_wyner(5000), 100, seed=12)
    items.append(_close("non-adaptive sum MG at rho_f=0", est.sum_mean, 0.8 * 11 / 12, 0.01))
    items.append(_timed("runtime (non-adaptive)", time.perf_counter() - t0, 60.0))

    for model in (MODEL1, MODEL2):
        t0 = time.perf_counter()
        p = P(0.8, 0.6, 10, model, RXONLY)
        est = estimate(p, ADAPTIVE, build_wyner(5000), 100, seed=13 + model)
        su_pub, se_pub = an.boundary_point(p, ADAPTIVE)
        items.append(_close(f"adaptive Rx-only model {model} eMBB MG vs published corner", est.se_mean, se_pub, 0.01))
        items.append(_close(f"adaptive Rx-only model {model} URLLC MG vs published corner", est.su_mean, su_pub, 0.01))
        exact = an.corner_values(p, ADAPTIVE, exact=True)["se"]
        items.append(_close(f"adaptive Rx-only model {model} eMBB MG vs scheme-exact corner",
                            est.se_mean, exact, 0.01, supplementary=True))
        items.append(_timed(f"runtime (Rx-only model {model})", time.perf_counter() - t0, 60.0))

    topo = build_hex(60, 60)
    for model in (MODEL1, MODEL2):
        t0 = time.perf_counter()
        p = P(0.8, 0.6, None, model, RXONLY)
        est = estimate(p, ADAPTIVE, topo, 20, seed=21 + model)
        target = 0.8 * (1 - 0.8 * 0.6) ** 3 * (1 if model == MODEL1 else 0.4)
        items.append(_close(f"hex 60x60 Rx-only model {model} off-color eMBB share", est.offcolor_fraction, target, 0.01))
        items.append(_timed(f"runtime (hex model {model})", time.perf_counter() - t0, 60.0))
    return _report(3, "Monte Carlo against analytic values", items)


# ---------------------------------------------------------------------------
# 4. exhaustive small-K oracle

LAW_K = (1, 2, 3, 4, 5, 6, 7, 8)
TALLY_K = (1, 2, 3, 4, 5, 8)
TOL4 = 1e-10


def _law_item(label, K_list, law_fn, oracle_fn, supplementary=False):
    worst, where = 0.0, None
    for K in K_list:
        dist = oracle_fn(K)
        for k in range(1, K + 1):
            for ell in range(1, K - k + 2):
                err = abs(dist.get((k, ell), 0.0) - law_fn(ell, k, K))
                if err > worst:
                    worst, where = err, (K, k, ell)
    detail = f"max error {worst:.3g} over K in {K_list[0]}..{K_list[-1]}"
    if where:
        detail += f" (worst at K={where[0]}, k={where[1]}, l={where[2]})"
    return Item(label, worst <= TOL4, detail, supplementary)


def criterion_4() -> bool:
    t0 = time.perf_counter()
    rho, rho_f = 0.7, 0.4
    items = [
        _law_item("active-run law", LAW_K, lambda l, k, K: subnet_prob_m1(rho, l, k, K),
                  lambda K: run_law(K, rho, rho_f, lambda r: r.active)),
        _law_item("model 2 eMBB-run law", LAW_K, lambda l, k, K: subnet_prob_m2(rho, rho_f, l, k, K),
                  lambda K: run_law(K, rho, rho_f, lambda r: r.active & ~r.urllc)),
    ]
    for phase in (1, 2):
        p = ScenarioParams(rho, rho_f, 4, MODEL2, TXRX)
        items.append(_law_item(f"model 2 Tx+Rx phase-{phase} law", LAW_K,
                               lambda l, k, K, ph=phase: subnet_prob_m2_phase(rho, rho_f, l, k, K, ph),
                               lambda K, ph=phase, p=p: phase_law(K, p, ph)))
    for model in (MODEL1, MODEL2):
        p = ScenarioParams(rho, rho_f, 4, model, RXONLY)
        for phase in (1, 2):
            items.append(_law_item(
                f"Rx-only model {model} phase-{phase} eMBB-run law (published)", LAW_K,
                lambda l, k, K, ph=phase, m=model: embb_subnet_prob_rx(rho, rho_f, l, k, K, ph, m),
                lambda K, ph=phase, p=p: phase_law(K, p, ph)))
            items.append(_law_item(
                f"Rx-only model {model} phase-{phase} eMBB-run law (scheme-exact)", LAW_K,
                lambda l, k, K, ph=phase, m=model: embb_subnet_prob_rx_exact(rho, rho_f, l, k, K, ph, m),
                lambda K, ph=phase, p=p: phase_law(K, p, ph), supplementary=True))

    configs = [
        (EMBB_ONLY, ScenarioParams(rho, rho_f, 4, MODEL1, TXRX)),
        (EMBB_ONLY, ScenarioParams(rho, rho_f, 2, MODEL2, TXRX)),
        (NONADAPTIVE, ScenarioParams(rho, rho_f, 2, MODEL1, TXRX)),
        (NONADAPTIVE, ScenarioParams(rho, rho_f, 4, MODEL2, TXRX)),
        (NONADAPTIVE, ScenarioParams(rho, rho_f, 4, MODEL1, RXONLY)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 2, MODEL1, TXRX)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 4, MODEL1, TXRX)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 2, MODEL2, TXRX)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 4, MODEL2, TXRX)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 2, MODEL1, RXONLY)),
        (ADAPTIVE, ScenarioParams(rho, rho_f, 4, MODEL2, RXONLY)),
    ]
    for scheme, p in configs:
        Ks = TALLY_K + ((10,) if (scheme, p.coop, p.model, p.D) == (ADAPTIVE, TXRX, MODEL1, 4) else ())
        w_pub = w_ex = w_su = 0.0
        for K in Ks:
            su, tot = expected_tally(p, K, scheme)
            pub = an.finite_expected(p, K, scheme, "published")
            ex = an.finite_expected(p, K, scheme, "exact")
            w_pub = max(w_pub, abs(tot - pub["sum"]))
            w_ex = max(w_ex, abs(tot - ex["sum"]))
            w_su = max(w_su, abs(su - pub["su"]))
        name = f"{scheme} {p.coop} model {p.model} D={p.D}"
        ks = ",".join(map(str, Ks))
        items.append(Item(f"{name}: expected sum vs published finite-K sum", w_pub <= TOL4,
                          f"max error {w_pub:.3g} over K in {{{ks}}}"))
        items.append(Item(f"{name}: expected URLLC MG vs nominal", w_su <= TOL4,
                          f"max error {w_su:.3g}"))
        items.append(Item(f"{name}: expected sum vs scheme-exact finite-K sum", w_ex <= TOL4,
                          f"max error {w_ex:.3g}", supplementary=True))
    items.append(_timed("runtime", time.perf_counter() - t0, 60.0))
    return _report(4, "exhaustive small-K oracle", items)


# ---------------------------------------------------------------------------
# 5. property suites


def _cli_bytes(workers: int) -> bytes:
    cmd = [sys.executable, "-m", "mgregion", "simulate", "--K", "600", "--trials", "24", "--seed", "5",
           "--coop", "rx", "--model", "2", "--workers", str(workers)]
    return subprocess.run(cmd, capture_output=True, check=False).stdout


def criterion_5() -> bool:
    items = []
    v = checks.check_validity(draws=1000, seed=2024)[0]
    items.append(Item("1000-draw schedule validity (C1/C2/C3)", v.ok,
                      f"{v.cases} draws, {int(v.worst)} violations"))
    nest = checks.check_nesting(tol=1e-9)
    for r in nest:
        if r.name.startswith("adaptive contains"):
            continue
        sup = r.name.startswith("scheme-exact")
        detail = f"max violation {r.worst:.3g} over {r.cases} grid points"
        if r.failures:
            f = r.failures[0]
            detail += f"; e.g. rho={f['rho']}, rho_f={f['rho_f']}, D={f['D']}"
        items.append(Item(r.name, r.ok, detail, sup))
    for r in checks.check_limits(tol=1e-6):
        items.append(Item(r.name, r.ok, f"max vertex gap {r.worst:.3g} over {r.cases} cases"))
    a, b = _cli_bytes(1), _cli_bytes(3)
    items.append(Item("simulate output identical for 1 and 3 workers", bool(a) and a == b, f"{len(a)} bytes"))
    return _report(5, "property suites", items)


# ---------------------------------------------------------------------------

CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    assert CRITERIA[number](), f"criterion {number} failed; see the acceptance summary"


if __name__ == "__main__":
    results = {n: fn() for n, fn in CRITERIA.items()}
    sys.exit(0 if all(results.values()) else 1)
