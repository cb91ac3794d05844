"""Closed-form MG bounds, slope coefficients, series and summation identities.

Every region is described by two kinds of linear constraints on the pair
(S^U, S^e): a cap on the URLLC MG and a weighted cap ``S^e + slope*S^U <=
rhs``.  Slopes and intercepts are evaluated exactly as published; where the
published closed form and the scheme disagree, the scheme's true value is
available through the ``*_exact`` series so both can be compared.

``D=None`` means unlimited cooperation rounds and is handled by dedicated
branches rather than by large-D limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .netmodel import HEX, WYNER
from .scheduler import ADAPTIVE, EMBB_ONLY, NONADAPTIVE, lset, msum_full, msum_red
from .traffic import (
    MODEL1,
    RXONLY,
    TXRX,
    ParamError,
    ScenarioParams,
    embb_subnet_prob_rx,
    embb_subnet_prob_rx_exact,
    in_phase,
    subnet_prob_m1,
    subnet_prob_m2,
    subnet_prob_m2_phase,
)


class DomainError(ValueError):
    pass


# ---------------------------------------------------------------------------
# summation identities


class IdentityId(str, Enum):
    GeomFloor = "GeomFloor"
    GeomFloorShiftDiff = "GeomFloorShiftDiff"
    FloorSimple = "FloorSimple"
    FloorSimpleDiff = "FloorSimpleDiff"
    CeilVariant = "CeilVariant"
    CeilShiftDiff = "CeilShiftDiff"
    EllFloor = "EllFloor"
    EvenFloor = "EvenFloor"
    EvenEllFloor = "EvenEllFloor"
    EvenShiftDiff = "EvenShiftDiff"
    CeilHalfFloor = "CeilHalfFloor"
    CeilHalfEll = "CeilHalfEll"
    CeilHalfShiftDiff = "CeilHalfShiftDiff"
    GeomBasic = "GeomBasic"
    EllGeom = "EllGeom"
    EllSqGeom = "EllSqGeom"
    EllCeil = "EllCeil"  # no closed form exported


def _fl(a, b):
    return a // b


def _ce(a, b):
    return -((-a) // b)


def _even(l):
    return (l % 2 == 0).astype(float)


# summand(l, c, d, A, B) on an integer array l
_SUMMANDS: dict[IdentityId, Callable] = {
    IdentityId.GeomFloor: lambda l, c, d, A, B: c**l * _fl(l, A) * d ** _fl(l, B),
    IdentityId.GeomFloorShiftDiff: lambda l, c, d, A, B: c**l * (_fl(l + 1, A) - _fl(l, A)) * d ** _fl(l, B),
    IdentityId.FloorSimple: lambda l, c, d, A, B: c**l * _fl(l, A),
    IdentityId.FloorSimpleDiff: lambda l, c, d, A, B: c**l * (_fl(l + 1, A) - _fl(l, A)),
    IdentityId.CeilVariant: lambda l, c, d, A, B: c**l * _fl(l, A) * d ** _ce(l, B),
    IdentityId.CeilShiftDiff: lambda l, c, d, A, B: c**l * (_fl(l + 1, A) - _fl(l, A)) * d ** _ce(l, B),
    IdentityId.EllFloor: lambda l, c, d, A, B: c**l * l * d ** _fl(l, B),
    IdentityId.EvenFloor: lambda l, c, d, A, B: c**l * _fl(l, A) * d ** _fl(l, B) * _even(l),
    IdentityId.EvenEllFloor: lambda l, c, d, A, B: c**l * l * d ** _fl(l, B) * _even(l),
    IdentityId.EvenShiftDiff: lambda l, c, d, A, B: c**l * (_fl(l + 1, A) - _fl(l, A)) * d ** _fl(l, B) * _even(l),
    IdentityId.CeilHalfFloor: lambda l, c, d, A, B: c**l * _fl(l, A) * d ** _ce(l, 2),
    IdentityId.CeilHalfEll: lambda l, c, d, A, B: c**l * l * d ** _ce(l, 2),
    IdentityId.CeilHalfShiftDiff: lambda l, c, d, A, B: c**l * (_fl(l + 1, A) - _fl(l, A)) * d ** _ce(l, 2),
    IdentityId.GeomBasic: lambda l, c, d, A, B: c**l * (l <= A),
    IdentityId.EllGeom: lambda l, c, d, A, B: l * c**l,
    IdentityId.EllSqGeom: lambda l, c, d, A, B: l * l * c**l,
    IdentityId.EllCeil: lambda l, c, d, A, B: c**l * l * d ** _ce(l, B),
}


def _geom_floor(c, d, A, B):
    g = c**A * d ** (A // B)
    return g / ((1 - g) * (1 - c**B * d)) * (1 - c**B) / (1 - c)


def _ell_floor(c, d, A, B):
    h = c**B * d
    return B * h / (1 - h) ** 2 * (1 - c**B) / (1 - c) + ((B - 1) * c ** (B + 1) - B * c**B + c) / ((1 - h) * (c - 1) ** 2)


def _even_ell_floor(c, d, A, B):
    # the published second term carries an extra factor 1/2 that only
    # cancels for B = 2; this form holds for every even B
    h = c**B * d
    return B * h / (1 - h) ** 2 * (1 - c**B) / (1 - c * c) + ((B - 2) * c ** (B + 2) - B * c**B + 2 * c * c) / ((1 - h) * (c * c - 1) ** 2)


_CLOSED: dict[IdentityId, Callable] = {
    IdentityId.GeomFloor: _geom_floor,
    IdentityId.GeomFloorShiftDiff: lambda c, d, A, B: c ** (A - 1) * d ** (A // B - 1) / (1 - c**A * d ** (A // B)),
    IdentityId.FloorSimple: lambda c, d, A, B: c**A / ((1 - c**A) * (1 - c)),
    IdentityId.FloorSimpleDiff: lambda c, d, A, B: c ** (A - 1) / (1 - c**A),
    IdentityId.CeilVariant: lambda c, d, A, B: (
        c**A * d ** (A // B) / (1 - c**A * d ** (A // B)) * (1 + c * d / (1 - c**B * d) * (1 - c**B) / (1 - c))
    ),
    IdentityId.CeilShiftDiff: lambda c, d, A, B: c ** (A - 1) * d ** (A // B) / (1 - c**A * d ** (A // B)),
    IdentityId.EllFloor: _ell_floor,
    IdentityId.EvenFloor: lambda c, d, A, B: (
        c**A * d ** (A // B) / ((1 - c**A * d ** (A // B)) * (1 - c**B * d)) * (1 - c**B) / (1 - c * c)
    ),
    IdentityId.EvenEllFloor: _even_ell_floor,
    IdentityId.EvenShiftDiff: lambda c, d, A, B: 0.0,
    IdentityId.CeilHalfFloor: lambda c, d, A, B: (
        c**A * d ** (A // 2) * (1 + c * d) / ((1 - c**A * d ** (A // 2)) * (1 - c * c * d))
    ),
    IdentityId.CeilHalfEll: lambda c, d, A, B: c * d * (2 * c + c * c * d + 1) / (1 - c * c * d) ** 2,
    IdentityId.CeilHalfShiftDiff: lambda c, d, A, B: c ** (A - 1) * d ** (A // 2) / (1 - c**A * d ** (A // 2)),
    IdentityId.GeomBasic: lambda c, d, A, B: (1 - c ** (A + 1)) / (1 - c),
    IdentityId.EllGeom: lambda c, d, A, B: c / (1 - c) ** 2,
    IdentityId.EllSqGeom: lambda c, d, A, B: c * (c + 1) / (1 - c) ** 3,
}

_DIVIDES = {
    IdentityId.GeomFloor, IdentityId.GeomFloorShiftDiff, IdentityId.CeilVariant,
    IdentityId.CeilShiftDiff, IdentityId.EvenFloor, IdentityId.EvenShiftDiff,
}
_SHIFT = {
    IdentityId.GeomFloorShiftDiff, IdentityId.FloorSimpleDiff, IdentityId.CeilShiftDiff,
    IdentityId.CeilHalfShiftDiff,
}


def identity_domain(ident: IdentityId, c: float, d: float, A: int, B: int) -> None:
    """Raise :class:`DomainError` naming the first violated precondition."""
    ident = IdentityId(ident)
    if not 0 <= c < 1:
        raise DomainError(f"{ident.value}: c must lie in [0, 1), got {c}")
    if not 0 <= d <= 1:
        raise DomainError(f"{ident.value}: d must lie in [0, 1], got {d}")
    if int(A) != A or int(B) != B or A < 1 or B < 1:
        raise DomainError(f"{ident.value}: A and B must be positive integers")
    if ident in _DIVIDES and A % B:
        raise DomainError(f"{ident.value}: B={B} must divide A={A}")
    if ident in _SHIFT and A < 2:
        raise DomainError(f"{ident.value}: A must be at least 2")
    if ident is IdentityId.CeilVariant and (A <= 2 or B < 2):
        raise DomainError(f"{ident.value}: needs A > 2 and B >= 2")
    if ident is IdentityId.CeilShiftDiff and B < 2:
        raise DomainError(f"{ident.value}: needs B >= 2")
    if ident in (IdentityId.EvenFloor, IdentityId.EvenEllFloor) and B % 2:
        raise DomainError(f"{ident.value}: B must be even")
    if ident is IdentityId.EvenShiftDiff and A % 2:
        raise DomainError(f"{ident.value}: A must be even")
    if ident in (IdentityId.CeilHalfFloor, IdentityId.CeilHalfShiftDiff) and A % 2:
        raise DomainError(f"{ident.value}: A must be even")
    if ident is IdentityId.EllCeil and B < 2:
        raise DomainError(f"{ident.value}: needs B >= 2")


def identity_closed(ident: IdentityId, c: float, d: float = 1.0, A: int = 1, B: int = 1) -> float:
    ident = IdentityId(ident)
    identity_domain(ident, c, d, A, B)
    if ident not in _CLOSED:
        raise DomainError(f"{ident.value}: no closed form is available, use identity_truncated")
    return float(_CLOSED[ident](c, d, A, B))


def terms_for_tail(c: float, tol: float = 1e-12) -> int:
    """Smallest N whose tail sum_{l>N} l^2 c^l is below ``tol``.

    Every identity summand is bounded by ``l^2 c^l``, so this N truncates
    any of them with an error below ``tol``.
    """
    if c <= 0:
        return 1
    N = 1
    while True:
        q = c * ((N + 2) / (N + 1)) ** 2
        if q < 1:
            tail = (N + 1) ** 2 * c ** (N + 1) / (1 - q)
            if tail <= tol:
                return N
        N += 1


def identity_truncated(ident: IdentityId, c: float, d: float = 1.0, A: int = 1, B: int = 1,
                       N: int | None = None, tol: float = 1e-12) -> float:
    """Partial sum of the identity's summand up to ``N`` (chosen from ``tol`` if omitted)."""
    ident = IdentityId(ident)
    identity_domain(ident, c, d, A, B)
    if N is None:
        N = terms_for_tail(c, tol)
    if N < 1:
        raise DomainError("N must be at least 1")
    lo = 0 if ident is IdentityId.GeomBasic else 1
    l = np.arange(lo, N + 1, dtype=np.int64)
    vals = _SUMMANDS[ident](l, np.float64(c), np.float64(d), A, B)
    return float(np.sum(vals))


# ---------------------------------------------------------------------------
# extremes of the region


def _geom_tail(r: float, D: int | None) -> float:
    """(1-r) r^(D+2) / (1-r^(D+2)): MG lost to silenced users in eMBB-only runs."""
    if D is None or r == 0:
        return 0.0
    if r == 1:
        return 1.0 / (D + 2)
    n = D + 2
    # expm1 keeps 1 - r^n accurate as r approaches 1
    return (1 - r) * r**n / -math.expm1(n * math.log(r))


def _se_max_line(r: float, D: int | None) -> float:
    if r == 1 and D is not None:
        return (D + 1) / (D + 2)
    return r - _geom_tail(r, D)


def se_max(params: ScenarioParams) -> float:
    """Largest eMBB per-user MG (no URLLC traffic served)."""
    r = params.rho if params.model == MODEL1 else params.rho * (1 - params.rho_f)
    return _se_max_line(r, params.D)


def su_max(params: ScenarioParams, topo_kind: str = WYNER) -> float:
    """Largest URLLC per-user MG: every URLLC user served in its parity (or color) phase."""
    return params.rho * params.rho_f / (2 if topo_kind == WYNER else 3)


def _nonadaptive_fraction(D):
    return 1.0 if D is None else (D + 1) / (D + 2)


# ---------------------------------------------------------------------------
# slope coefficients (as published)


def _pD(base: float, D: int | None, shift: float = 0.0, scale: float = 1.0) -> float:
    """base**(scale*D + shift), read as 0 for unlimited D (base < 1)."""
    if D is None:
        return 0.0
    return base ** (scale * D + shift)


def m_both1_adaptive(rho, rho_f, D):
    if D is None or rho == 1:
        return 1.0
    q = 1 - rho_f
    t = (1 - rho) ** 2 * rho**D
    return 1 + t / (rho_f * (1 - rho ** (D + 2))) - t * q**2 / (rho_f * (1 - rho ** (D + 2) * q**2))


def m_both2_adaptive(rho, rho_f, D):
    q = 1 - rho_f
    u = 1 - rho * q
    y = rho**2 * q
    bigD = _pD(rho, D, 2) * _pD(q, D, 2)
    out = 1 + 2 * q / rho_f
    out -= 2 * u * _pD(rho, D, 1) * _pD(q, D, 2) / (rho_f * (1 - bigD))
    out -= 2 * q / (rho_f * (1 - y) ** 2) * ((1 + rho) * u**2 - rho**3 * rho_f**2)
    out -= (u**2 + (1 - rho) ** 2 * q * (2 * rho + 2 * rho**2 * q + 1)) / (rho_f * (1 - y))
    h6 = _pD(rho, D, 2) * _pD(q, D, 3, 0.5)
    out -= (1 - rho) ** 2 * _pD(rho, D, 1) * _pD(q, D, 3, 0.5) / (2 * (1 - h6))
    h2 = _pD(rho, D, 2) * _pD(q, D, 1, 0.5)
    out += h2 / (2 * (1 - y) * (1 - h2)) * ((1 + rho) * (u**2 + (1 - rho) ** 2 / rho))
    return out


def m_rx1_nonadaptive(rho_f, D):
    return _nonadaptive_fraction(D) * 2 / rho_f - (1 - rho_f) / rho_f


def m_rx1_adaptive(rho, rho_f, D):
    q = 1 - rho_f
    u = 1 - rho * q
    y = rho**2 * q
    den = 1 - _pD(rho, D, 2) * _pD(q, D, 1, 0.5)
    out = 2 / rho_f
    if D is not None:
        out -= 2 * (1 - rho) * rho ** (D + 1) / (rho_f * (1 - rho ** (D + 2)))
    out += rho**3 * rho_f * q / (1 - y) * (2 / (1 - y) - _pD(rho, D) * _pD(q, D, 0, 0.5) / den)
    out -= q * u**2 / (rho_f * (1 - y)) * (
        2 * rho + 2 * rho**2 * q + 1 - _pD(rho, D, 1) * _pD(q, D, 0, 0.5) * (1 + rho * q) / den
    )
    out -= (1 - rho) ** 2 / (rho_f * (1 - y)) * (
        2 * rho * q / (1 - y) + 1 - _pD(rho, D, 1) * _pD(q, D, 1, 0.5) * (1 + rho) / den
    )
    return out


def m_rx2_nonadaptive(rho_f, D):
    return (1 - rho_f) / rho_f * 2 * _nonadaptive_fraction(D)


def m_rx2_adaptive(rho, rho_f, D):
    q = 1 - rho_f
    x = rho * q
    den = 1 - _pD(x, D, 2)
    out = 2 * q / rho_f
    out -= 2 * (1 - x) * _pD(rho, D, 1) * _pD(q, D, 2) / (rho_f * den)
    out += rho**3 * rho_f * q**2 / (1 - x**2) * (2 / (1 - x**2) - _pD(x, D) / den)
    out -= q * ((1 - x) ** 2 + (1 - rho) ** 2) / (rho_f * (1 - x)) * (1 / (1 - x) - _pD(x, D, 1) / den)
    return out


def l_rx1_nonadaptive_hex(rho_f):
    return (2 + rho_f) / rho_f


def l_rx1_adaptive_hex(rho, rho_f):
    return (2 + rho_f - 2 * (1 - rho * rho_f) ** 3) / rho_f


def l_rx2_nonadaptive_hex(rho_f):
    return 2 * (1 - rho_f) / rho_f


def l_rx2_adaptive_hex(rho, rho_f):
    return 2 * (1 - rho_f) * (1 - (1 - rho * rho_f) ** 3) / rho_f


def _result_name(params: ScenarioParams, scheme: str, topo_kind: str) -> str:
    """Human-readable name of the bound a (setup, scheme) pair refers to."""
    coop = "Tx+Rx" if params.coop == TXRX else "Rx-only"
    where = "Wyner line" if topo_kind == WYNER else "hex torus"
    return f"{scheme} inner bound, {coop} cooperation, model {params.model}, {where}"


def slope_coefficient(params: ScenarioParams, scheme: str, topo_kind: str = WYNER) -> float:
    """Weight of S^U in the sloped constraint of the named inner bound."""
    rho, rho_f, D = params.rho, params.rho_f, params.D
    name = _result_name(params, scheme, topo_kind)
    if scheme not in (ADAPTIVE, NONADAPTIVE):
        raise DomainError(f"{name}: unknown scheme")
    if rho_f == 0:
        raise DomainError(f"{name}: the slope is undefined at rho_f = 0 (the region has no URLLC side)")
    if topo_kind == HEX:
        if D is not None:
            raise DomainError(f"{name}: hex results assume unlimited cooperation rounds")
        if params.coop == TXRX:
            return 1.0 if params.model == MODEL1 else 0.0
        if params.model == MODEL1:
            return l_rx1_nonadaptive_hex(rho_f) if scheme == NONADAPTIVE else l_rx1_adaptive_hex(rho, rho_f)
        return l_rx2_nonadaptive_hex(rho_f) if scheme == NONADAPTIVE else l_rx2_adaptive_hex(rho, rho_f)
    if scheme == ADAPTIVE and not 0 < rho < 1 and not (params.coop == TXRX and params.model == MODEL1 and rho == 1):
        raise DomainError(f"{name}: needs 0 < rho < 1, got {rho}")
    if params.coop == TXRX:
        if params.model == MODEL1:
            return 1.0 if scheme == NONADAPTIVE else m_both1_adaptive(rho, rho_f, D)
        return 0.0 if scheme == NONADAPTIVE else m_both2_adaptive(rho, rho_f, D)
    if params.model == MODEL1:
        return m_rx1_nonadaptive(rho_f, D) if scheme == NONADAPTIVE else m_rx1_adaptive(rho, rho_f, D)
    return m_rx2_nonadaptive(rho_f, D) if scheme == NONADAPTIVE else m_rx2_adaptive(rho, rho_f, D)


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class LinearConstraint:
    """``coeff_u * S^U + coeff_e * S^e <= rhs``."""

    coeff_u: float
    coeff_e: float
    rhs: float
    label: str = ""

    def slack(self, su: float, se: float) -> float:
        return self.rhs - (self.coeff_u * su + self.coeff_e * se)

    def to_json(self) -> dict:
        return {"coeff_u": self.coeff_u, "coeff_e": self.coeff_e, "rhs": self.rhs, "label": self.label}


def _sloped_rhs(params: ScenarioParams, scheme: str, topo_kind: str) -> float:
    if topo_kind == HEX:
        return params.rho if params.model == MODEL1 else params.rho * (1 - params.rho_f)
    if scheme == NONADAPTIVE:
        base = params.rho if params.model == MODEL1 else params.rho * (1 - params.rho_f)
        return base * _nonadaptive_fraction(params.D)
    return se_max(params)


def inner_region(params: ScenarioParams, scheme: str, topo_kind: str = WYNER) -> list[LinearConstraint]:
    """Achievable region of a scheme: URLLC cap plus one sloped constraint."""
    if topo_kind not in (WYNER, HEX):
        raise DomainError(f"unknown topology kind {topo_kind!r}")
    if scheme not in (ADAPTIVE, NONADAPTIVE):
        raise DomainError(f"{_result_name(params, scheme, topo_kind)}: no such inner bound")
    if topo_kind == HEX and params.D is not None:
        raise DomainError(f"{_result_name(params, scheme, topo_kind)}: hex results assume unlimited cooperation rounds")
    rhs = _sloped_rhs(params, scheme, topo_kind)
    cap = LinearConstraint(1.0, 0.0, su_max(params, topo_kind), "urllc cap")
    if params.rho_f == 0:
        return [cap, LinearConstraint(0.0, 1.0, rhs, "embb cap")]
    slope = slope_coefficient(params, scheme, topo_kind)
    return [cap, LinearConstraint(float(slope), 1.0, float(rhs), "sloped")]


def outer_region(params: ScenarioParams, topo_kind: str = WYNER) -> list[LinearConstraint]:
    """Converse region: no scheme can leave it."""
    if topo_kind != WYNER:
        raise DomainError("outer bounds are only known for the Wyner line")
    rho, rho_f = params.rho, params.rho_f
    out = [LinearConstraint(1.0, 0.0, su_max(params), "urllc cap")]
    smax = se_max(params)
    if params.model == MODEL1:
        out.append(LinearConstraint(1.0, 1.0, smax, "sum cap"))
        if params.coop == RXONLY:
            out.append(LinearConstraint(1 + rho, 1.0, rho, "rx-only sum cap"))
    else:
        out.append(LinearConstraint(0.0, 1.0, smax, "embb cap"))
        if params.coop == RXONLY:
            x = rho * (1 - rho_f)
            out.append(LinearConstraint(x, 1.0, x, "rx-only embb cap"))
    return out


def boundary_point(params: ScenarioParams, scheme: str, topo_kind: str = WYNER) -> tuple[float, float]:
    """(S^U, S^e) of the inner bound at the largest URLLC MG."""
    cons = inner_region(params, scheme, topo_kind)
    su = cons[0].rhs
    se = cons[1].rhs - cons[1].coeff_u * su
    return su, se


# ---------------------------------------------------------------------------
# published closed forms of the corner points


def sslast(rho, rho_f, D):
    """eMBB MG of the adaptive Tx+Rx model-1 scheme at the largest URLLC MG."""
    if D is None:
        return rho - rho * rho_f / 2
    q2 = (1 - rho_f) ** 2
    return (rho - rho * rho_f / 2 - (1 - rho**2) * rho ** (D + 1) / (2 * (1 - rho ** (D + 2)))
            + (1 - rho) ** 2 * rho ** (D + 1) * q2 / (2 * (1 - rho ** (D + 2) * q2)))


def txrx_m2_embb_closed(rho, rho_f, D):
    """Published closed form of the adaptive Tx+Rx model-2 eMBB MG at the URLLC corner."""
    q = 1 - rho_f
    u = 1 - rho * q
    y = rho**2 * q
    out = rho * q / (1 - y) ** 2 * ((1 + rho) * u**2 - rho**3 * rho_f**2)
    out += rho * (u**2 + (1 - rho) ** 2 * q * (2 * rho + 2 * rho**2 * q + 1)) / (2 * (1 - y))
    h2 = _pD(rho, D, 2) * _pD(q, D, 1, 0.5)
    out -= h2 / (2 * (1 - y) * (1 - h2)) * ((1 + rho) * (u**2 + (1 - rho) ** 2 / rho))
    h6 = _pD(rho, D, 2) * _pD(q, D, 3, 0.5)
    out += (1 - rho) ** 2 * _pD(rho, D, 1) * _pD(q, D, 3, 0.5) / (2 * (1 - h6))
    return out - rho * rho_f / 2


def rx_m1_embb_closed(rho, rho_f, D):
    """Published closed form of the adaptive Rx-only model-1 eMBB MG at the URLLC corner."""
    q = 1 - rho_f
    u = 1 - rho * q
    y = rho**2 * q
    den = 1 - _pD(rho, D, 2) * _pD(q, D, 1, 0.5)
    t1 = -rho**4 * rho_f**2 * q / (2 * (1 - y)) * (2 / (1 - y) - _pD(rho, D) * _pD(q, D, 0, 0.5) / den)
    t2 = rho * q * u**2 / (2 * (1 - y)) * (
        2 * rho + 2 * rho**2 * q + 1 - _pD(rho, D, 1) * _pD(q, D, 0, 0.5) * (1 + rho * q) / den)
    t3 = rho * (1 - rho) ** 2 / (2 * (1 - y)) * (
        2 * rho * q / (1 - y) + 1 - _pD(rho, D, 1) * _pD(q, D, 1, 0.5) * (1 + rho) / den)
    return t1 + t2 + t3


def rx_m2_embb_closed(rho, rho_f, D):
    """Published closed form of the adaptive Rx-only model-2 eMBB MG at the URLLC corner."""
    q = 1 - rho_f
    x = rho * q
    den = 1 - _pD(x, D, 2)
    t1 = -rho**4 * rho_f**2 * q**2 / (2 * (1 - x**2)) * (2 / (1 - x**2) - _pD(x, D) / den)
    t2 = x * ((1 - x) ** 2 + (1 - rho) ** 2) / (2 * (1 - x)) * (1 / (1 - x) - _pD(x, D, 1) / den)
    return t1 + t2


def hex_rx_embb(rho, rho_f, model, adaptive=True):
    """eMBB MG of the hex Rx-only color scheme with every URLLC user served."""
    own = rho * (1 - rho_f) / 3
    if not adaptive:
        return own
    off = 2 * rho * (1 - rho * rho_f) ** 3 / 3
    return own + (off if model == MODEL1 else off * (1 - rho_f))


# ---------------------------------------------------------------------------
# truncated series


def _ells(rho: float, N: int | None, tol: float = 1e-13) -> np.ndarray:
    if N is None:
        N = terms_for_tail(rho, tol)
    return np.arange(1, N + 1, dtype=np.int64)


def _mfull(l, D):
    return l if D is None else l - l // (D + 2)


def _mred(l, D):
    return l if D is None else l - (l + 1) // (D + 2)


def lset_size_exact(l, D):
    """Size of the blocking set, counting coinciding positions once."""
    if D is None:
        return np.zeros_like(l)
    P = D + 2
    first = np.where(l >= 2, (l - 2) // P + 1, 0)
    if P <= 4:
        return first  # both per-block positions fall on the same residue
    second = np.where(l >= P - 2, (l - (P - 2)) // P + 1, 0)
    return first + second


def lset_size_published(l, D):
    if D is None:
        return np.zeros_like(l)
    P = D + 2
    r = l % P
    ceil = -(-l // P)
    return np.where(np.isin(r, (0, D, D + 1)), 2 * ceil, np.where(r == 1, 2 * (l // P), 2 * (l // P) + 1))


def txrx_m1_mbar(l, rho_f, D, lsize="published"):
    """Phase-averaged subnet MG of the adaptive Tx+Rx model-1 scheme."""
    L = lset_size_published(l, D) if lsize == "published" else lset_size_exact(l, D)
    z = (1 - rho_f) ** L
    return _mfull(l, D) * (0.5 + z / 2) + _mred(l, D) * (0.5 - z / 2)


def txrx_m1_sum_series(rho, rho_f, D, N=None, lsize="published"):
    """Expected sum MG of the adaptive Tx+Rx model-1 scheme as a subnet series."""
    l = _ells(rho, N)
    return float(np.sum(rho**l * (1 - rho) ** 2 * txrx_m1_mbar(l, rho_f, D, lsize)))


def txrx_m2_sum_series(rho, rho_f, D, N=None):
    """The published six-term series for the adaptive Tx+Rx model-2 sum MG."""
    l = _ells(rho, N)
    q = 1 - rho_f
    u = 1 - rho * q
    ev = (l % 2 == 0)
    fl2, ce2 = l // 2, -(-l // 2)
    mf, mr = _mfull(l, D), _mred(l, D)
    z = q ** (2 * (-(-l // (D + 2)))) if D is not None else np.ones_like(l, dtype=float)
    rl = rho**l
    s = -0.5 * np.sum(rl * q**fl2 * mf * u * rho * rho_f * ev)
    s += 0.5 * np.sum(rl * q**fl2 * mf * u**2)
    s += 0.5 * np.sum(rl * q**ce2 * (1 - rho) * rho * rho_f * (1 - z) * mr * ev)
    s += 0.5 * np.sum(rl * q**ce2 * (1 - rho) ** 2 * (1 - z) * mr)
    s += 0.5 * np.sum(rl * q**ce2 * (1 - rho) * rho * rho_f * z * mf * ev)
    s += 0.5 * np.sum(rl * q**ce2 * (1 - rho) ** 2 * z * mf)
    return float(s)


def txrx_m2_sum_exact(rho, rho_f, D, N=None):
    """Adaptive Tx+Rx model-2 sum MG from the per-subnet laws with the true blocking-set size."""
    l = _ells(rho, N)
    q = 1 - rho_f
    u = 1 - rho * q
    odd = (l % 2 == 1)
    mf, mr = _mfull(l, D), _mred(l, D)
    z = q ** lset_size_exact(l, D)
    rl = rho**l
    own = rl * q ** (l // 2) * u * (1 - rho + odd * rho * rho_f) * mf
    off = rl * q ** (-(-l // 2)) * (1 - rho + (~odd) * rho * rho_f) * (1 - rho) * (mf * z + mr * (1 - z))
    return float(0.5 * np.sum(own + off))


def rx_embb_series(rho, rho_f, D, model, N=None, form="210"):
    """Published Rx-only eMBB series (four-term form, or the combined form)."""
    l = _ells(rho, N)
    q = 1 - rho_f
    u = 1 - rho * q
    ev = (l % 2 == 0)
    mf = _mfull(l, D)
    rl = rho**l
    if model == MODEL1:
        ea, eb = -(-l // 2), l // 2
    else:
        ea = eb = l
    if form == "210":
        s = -np.sum(rl * q**ea * mf * u * rho * rho_f * ev)
        s += np.sum(rl * q**ea * mf * u**2)
        s += np.sum(rl * q**eb * (1 - rho) * rho * rho_f * mf * ev)
        s += np.sum(rl * q**eb * (1 - rho) ** 2 * mf)
        return float(0.5 * s)
    # combined form: the two even-only terms merge when both exponents agree on even l
    s = -rho**2 * rho_f**2 * np.sum(rl * q**eb * mf * ev)
    s += np.sum(rl * q**ea * mf * u**2)
    s += np.sum(rl * q**eb * (1 - rho) ** 2 * mf)
    return float(0.5 * s)


def rx_embb_exact(rho, rho_f, D, model, N=None):
    """Rx-only eMBB MG of the neighbour-silencing scheme (exact interior subnet laws)."""
    l = _ells(rho, N)
    q = 1 - rho_f
    odd = (l % 2 == 1)
    if model == MODEL1:
        w = 1 - rho + rho**2 * rho_f
        ea, eb = -(-l // 2), l // 2
    else:
        w = 1 - rho + rho * rho_f + rho**2 * rho_f * (1 - rho_f)
        ea = eb = l
    rl = rho**l
    pa = rl * q**ea * np.where(odd, w * w, w * (1 - rho))
    pb = rl * q**eb * np.where(odd, (1 - rho) ** 2, (1 - rho) * w)
    return float(0.5 * np.sum((pa + pb) * _mfull(l, D)))


def embb_only_series(rho, D, N=None):
    """eMBB-only scheme as a series: sum_l rho^l (1-rho)^2 M_full(l)."""
    l = _ells(rho, N)
    return float(np.sum(rho**l * (1 - rho) ** 2 * _mfull(l, D)))


def corner_values(params: ScenarioParams, scheme: str, topo_kind: str = WYNER, exact: bool = True) -> dict:
    """Expected (S^U, S^e, sum) of a scheme's URLLC corner.

    With ``exact`` the values come from the scheme's own subnet laws;
    otherwise from the published boundary of the matching inner bound.
    """
    rho, rho_f, D, model = params.rho, params.rho_f, params.D, params.model
    if scheme == EMBB_ONLY:
        return {"su": 0.0, "se": se_max(params), "sum": se_max(params)}
    if not exact:
        su, se = boundary_point(params, scheme, topo_kind)
        return {"su": su, "se": se, "sum": su + se}
    su = su_max(params, topo_kind)
    if topo_kind == HEX:
        if params.coop == TXRX:
            se = rho if model == MODEL1 else rho * (1 - rho_f)
            se = se - su if model == MODEL1 else se
        else:
            se = hex_rx_embb(rho, rho_f, model, scheme == ADAPTIVE)
        return {"su": su, "se": se, "sum": su + se}
    if scheme == NONADAPTIVE:
        if params.coop == RXONLY:
            se = rho * (1 - rho_f) / 2
        elif model == MODEL1:
            se = rho * _nonadaptive_fraction(D) - su
        else:
            se = rho * (1 - rho_f) * _nonadaptive_fraction(D)
        return {"su": su, "se": se, "sum": su + se}
    if params.coop == TXRX:
        if model == MODEL1:
            total = txrx_m1_sum_series(rho, rho_f, D, lsize="exact")
        else:
            total = txrx_m2_sum_exact(rho, rho_f, D)
        return {"su": su, "se": total - su, "sum": total}
    se = rx_embb_exact(rho, rho_f, D, model)
    return {"su": su, "se": se, "sum": su + se}


def exact_inner_region(params: ScenarioParams, scheme: str, topo_kind: str = WYNER) -> list[LinearConstraint]:
    """Inner bound rebuilt from the scheme's own corner point.

    Same shape as :func:`inner_region` (URLLC cap plus a line through the
    eMBB-axis intercept), but the line passes through the exact expected
    corner instead of the published closed form.
    """
    rhs = _sloped_rhs(params, scheme, topo_kind)
    su = su_max(params, topo_kind)
    cap = LinearConstraint(1.0, 0.0, su, "urllc cap")
    if params.rho_f == 0 or su == 0:
        return [cap, LinearConstraint(0.0, 1.0, rhs, "embb cap")]
    corner = corner_values(params, scheme, topo_kind, exact=True)
    slope = (rhs - corner["se"]) / su
    return [cap, LinearConstraint(float(slope), 1.0, float(rhs), "sloped (scheme-exact corner)")]


# ---------------------------------------------------------------------------
# finite-K expectations


def _k_range(K, rho=1.0):
    # runs longer than the tail cut carry less than 1e-16 per-user MG in total
    cut = K if rho >= 1 else terms_for_tail(rho, 1e-16)
    for k in range(1, K + 1):
        for ell in range(1, min(K - k + 1, cut) + 1):
            yield k, ell


def finite_expected(params: ScenarioParams, K: int, scheme: str, law: str = "exact") -> dict:
    """Per-user expected (S^U, sum) of a Wyner scheme on K users.

    ``law="published"`` uses the published subnet laws and blocking-set
    sizes; ``law="exact"`` uses the laws that match the schemes.  For the
    adaptive Tx+Rx schemes the URLLC entry is the nominal value (users that
    fall on a silenced position are not accounted for).
    """
    rho, rho_f, D, model = params.rho, params.rho_f, params.D, params.model
    if law not in ("exact", "published"):
        raise ParamError("law must be 'exact' or 'published'")
    q = 1 - rho_f
    su = rho * rho_f / 2
    if scheme == EMBB_ONLY:
        tot = 0.0
        for k, ell in _k_range(K, rho):
            p = subnet_prob_m1(rho, ell, k, K) if model == MODEL1 else subnet_prob_m2(rho, rho_f, ell, k, K)
            tot += p * msum_full(ell, D)
        return {"su": 0.0, "sum": float(tot / K)}
    if scheme == NONADAPTIVE:
        tot = 0.0
        for phase in (1, 2):
            for k in range(1, K + 1):
                own = in_phase(k, phase)
                if params.coop == RXONLY:
                    tot += 0.5 * rho * own
                    continue
                silent = D is not None and (k - (phase - 1)) % (D + 2) == 0
                if silent:
                    continue
                if model == MODEL1:
                    tot += 0.5 * rho
                else:
                    tot += 0.5 * (rho * q + rho * rho_f * own)
        return {"su": su, "sum": float(tot / K)}
    if params.coop == TXRX and model == MODEL1:
        tot = 0.0
        for k, ell in _k_range(K, rho):
            l = np.array([ell])
            mbar = txrx_m1_mbar(l, rho_f, D, "published" if law == "published" else "exact")[0]
            tot += subnet_prob_m1(rho, ell, k, K) * mbar
        return {"su": su, "sum": float(tot / K)}
    if params.coop == TXRX:
        tot = 0.0
        for phase in (1, 2):
            for k, ell in _k_range(K, rho):
                p = subnet_prob_m2_phase(rho, rho_f, ell, k, K, phase)
                if in_phase(k, phase) or D is None:
                    m = msum_full(ell, D)
                else:
                    if law == "published":
                        L = 2 * (-(-ell // (D + 2)))
                    else:
                        L = len(lset(k, ell, D)[0])
                    m = msum_full(ell, D) * q**L + msum_red(ell, D) * (1 - q**L)
                tot += 0.5 * p * m
        return {"su": su, "sum": float(tot / K)}
    law_fn = embb_subnet_prob_rx if law == "published" else embb_subnet_prob_rx_exact
    tot = 0.0
    for phase in (1, 2):
        for k, ell in _k_range(K, rho):
            tot += 0.5 * law_fn(rho, rho_f, ell, k, K, phase, model) * msum_full(ell, D)
    return {"su": su, "sum": float(su + tot / K)}
