"""Verification suites shared by the ``verify`` command and the tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import analytic as an
from .netmodel import HEX, build_hex, build_wyner, hex_color_partition
from .region import is_subset, polygon_from_constraints, vertices_match
from .scheduler import ADAPTIVE, EMBB_ONLY, NONADAPTIVE, run_scheme, validate_schedule
from .traffic import MODEL1, MODEL2, RXONLY, TXRX, ScenarioParams, sample_activity, substream

GRID_RHO = (0.2, 0.4, 0.6, 0.8)
GRID_RHO_F = (0.1, 0.3, 0.6, 0.9)
GRID_D = (2, 4, 10)

ID_C = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
ID_D = (0.0, 0.3, 0.7, 1.0)
ID_A = (2, 3, 4, 6, 8, 12)


@dataclass
class CheckResult:
    name: str
    ok: bool
    worst: float = 0.0
    tol: float = 0.0
    cases: int = 0
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "worst": self.worst, "tol": self.tol,
                "cases": self.cases, "failures": self.failures[:20]}


def _grid():
    return itertools.product(GRID_RHO, GRID_RHO_F, GRID_D)


def check_identities(tol: float = 1e-8, tail: float = 1e-12, closed=None) -> list[CheckResult]:
    """Closed form vs truncated sum for every identity on a parameter grid.

    ``closed`` may map identity ids to replacement closed forms (used to
    confirm that a corrupted formula is caught).
    """
    closed = closed or {}
    out = []
    for ident in an.IdentityId:
        if ident is an.IdentityId.EllCeil:
            continue
        res = CheckResult(f"identity {ident.value}", True, tol=tol)
        for c, d, A in itertools.product(ID_C, ID_D, ID_A):
            for B in sorted({1, 2, 3, A}):
                try:
                    an.identity_domain(ident, c, d, A, B)
                except an.DomainError:
                    continue
                ref = an.identity_truncated(ident, c, d, A, B, tol=tail)
                fn = closed.get(ident)
                val = fn(c, d, A, B) if fn else an.identity_closed(ident, c, d, A, B)
                err = abs(val - ref)
                res.cases += 1
                res.worst = max(res.worst, err)
                if not err <= tol:
                    res.ok = False
                    res.failures.append({"c": c, "d": d, "A": A, "B": B, "closed": val, "truncated": ref})
        out.append(res)
    return out


def _series_pairs(rho, rho_f, D):
    su = rho * rho_f / 2
    return {
        "Tx+Rx model 1 series vs corner": (an.txrx_m1_sum_series(rho, rho_f, D), an.sslast(rho, rho_f, D) + su),
        "Tx+Rx model 2 six-term series vs corner": (
            an.txrx_m2_sum_series(rho, rho_f, D) - su, an.txrx_m2_embb_closed(rho, rho_f, D)),
        "Rx-only model 1 four-term series vs corner": (
            an.rx_embb_series(rho, rho_f, D, MODEL1), an.rx_m1_embb_closed(rho, rho_f, D)),
        "Rx-only model 1 combined series vs corner": (
            an.rx_embb_series(rho, rho_f, D, MODEL1, form="211"), an.rx_m1_embb_closed(rho, rho_f, D)),
        "Rx-only model 2 series vs corner": (
            an.rx_embb_series(rho, rho_f, D, MODEL2), an.rx_m2_embb_closed(rho, rho_f, D)),
    }


def check_series(tol: float = 1e-6) -> list[CheckResult]:
    """Truncated subnet series against the published corner closed forms."""
    results: dict[str, CheckResult] = {}
    for rho, rho_f, D in _grid():
        for name, (series, closed) in _series_pairs(rho, rho_f, D).items():
            res = results.setdefault(name, CheckResult(name, True, tol=tol))
            err = abs(series - closed)
            res.cases += 1
            res.worst = max(res.worst, err)
            if not err <= tol:
                res.ok = False
                res.failures.append({"rho": rho, "rho_f": rho_f, "D": D, "series": series, "closed": closed})
    return list(results.values())


def random_setup(rng: np.random.Generator):
    """Random (params, topology, scheme) covering every defined combination."""
    coop = (TXRX, RXONLY)[rng.integers(2)]
    model = (MODEL1, MODEL2)[rng.integers(2)]
    rho, rho_f = float(rng.random()), float(rng.random())
    if rng.random() < 0.2:
        W, H = 3 * int(rng.integers(1, 5)), 3 * int(rng.integers(1, 5))
        params = ScenarioParams(rho, rho_f, None, model, coop)
        scheme = (ADAPTIVE, NONADAPTIVE)[rng.integers(2)]
        return params, build_hex(W, H), scheme
    D = (0, 2, 4, 6, 10, None)[rng.integers(6)]
    params = ScenarioParams(rho, rho_f, D, model, coop)
    scheme = (ADAPTIVE, NONADAPTIVE, EMBB_ONLY)[rng.integers(3)]
    return params, build_wyner(int(rng.integers(1, 80))), scheme


def check_validity(draws: int = 1000, seed: int = 2024) -> list[CheckResult]:
    res = CheckResult("schedule validity (C1/C2/C3)", True, tol=0.0)
    rng = np.random.default_rng(seed)
    for i in range(draws):
        params, topo, scheme = random_setup(rng)
        real = sample_activity(params, topo, substream(seed, i))
        part = hex_color_partition(topo) if topo.kind == HEX else None
        sched, _ = run_scheme(params, real, topo, scheme, part)
        rep = validate_schedule(topo, sched, params, real)
        res.cases += 1
        if not rep.ok:
            res.ok = False
            res.worst += len(rep.violations)
            res.failures.append({"params": params.as_dict(), "K": topo.K, "scheme": scheme,
                                 "violations": rep.to_json()[:5]})
    return [res]


_SETUPS = [(coop, model) for coop in (TXRX, RXONLY) for model in (MODEL1, MODEL2)]


def check_nesting(tol: float = 1e-9) -> list[CheckResult]:
    """Inner bounds inside the outer bound, and adaptive containing non-adaptive."""
    inner = {}
    for coop, model in _SETUPS:
        for scheme in (ADAPTIVE, NONADAPTIVE):
            inner[(coop, model, scheme)] = CheckResult(
                f"{scheme} inner within outer ({coop}, model {model})", True, tol=tol)
        inner[(coop, model, "dom")] = CheckResult(
            f"adaptive contains non-adaptive ({coop}, model {model})", True, tol=tol)
        inner[(coop, model, "exact")] = CheckResult(
            f"scheme-exact adaptive inner within outer ({coop}, model {model})", True, tol=tol)
    for rho, rho_f, D in _grid():
        for coop, model in _SETUPS:
            p = ScenarioParams(rho, rho_f, D, model, coop)
            outer = polygon_from_constraints(an.outer_region(p))
            regs = {}
            for scheme in (ADAPTIVE, NONADAPTIVE):
                regs[scheme] = polygon_from_constraints(an.inner_region(p, scheme))
                ok, v = is_subset(regs[scheme], outer, tol=tol)
                _record(inner[(coop, model, scheme)], ok, v, p)
            ok, v = is_subset(regs[NONADAPTIVE], regs[ADAPTIVE], tol=tol)
            _record(inner[(coop, model, "dom")], ok, v, p)
            exact = polygon_from_constraints(an.exact_inner_region(p, ADAPTIVE))
            ok, v = is_subset(exact, outer, tol=tol)
            _record(inner[(coop, model, "exact")], ok, v, p)
    return list(inner.values())


def _record(res: CheckResult, ok: bool, v: float, p: ScenarioParams):
    res.cases += 1
    res.worst = max(res.worst, v)
    if not ok:
        res.ok = False
        res.failures.append({**p.as_dict(), "violation": v})


def check_limits(tol: float = 1e-6, big_D: int = 10**6) -> list[CheckResult]:
    """Inner and outer polygons coincide at rho=1 and for very many rounds.

    For model 2 the matching inner bound is the non-adaptive one; the
    adaptive model-2 region is covered by :func:`check_nesting`.
    """
    a = CheckResult("model 1 Tx+Rx inner equals outer at rho=1", True, tol=tol)
    for rho_f, D in itertools.product(GRID_RHO_F, GRID_D):
        p = ScenarioParams(1.0, rho_f, D, MODEL1, TXRX)
        for scheme in (ADAPTIVE, NONADAPTIVE):
            ok, v = vertices_match(polygon_from_constraints(an.inner_region(p, scheme)),
                                   polygon_from_constraints(an.outer_region(p)), tol)
            _record(a, ok, v, p)
    b = CheckResult("Tx+Rx inner equals outer for large D", True, tol=tol)
    for rho, rho_f in itertools.product(GRID_RHO, GRID_RHO_F):
        for model, schemes in ((MODEL1, (ADAPTIVE, NONADAPTIVE)), (MODEL2, (NONADAPTIVE,))):
            p = ScenarioParams(rho, rho_f, big_D, model, TXRX)
            outer = polygon_from_constraints(an.outer_region(p))
            for scheme in schemes:
                ok, v = vertices_match(polygon_from_constraints(an.inner_region(p, scheme)), outer, tol)
                _record(b, ok, v, p)
    return [a, b]


SUITES = {
    "identities": check_identities,
    "series": check_series,
    "validity": check_validity,
    "nesting": check_nesting,
    "limits": check_limits,
}
