"""Random user activity, subnet decomposition and subnet-start probability laws.

Activity follows two arrival models.  Under model 1 every active user holds
an eMBB message and, with probability ``rho_f``, also a URLLC message.  Under
model 2 every active user holds exactly one message, URLLC with probability
``rho_f``.  On the Wyner line, inactive (or otherwise idle) users cut the
network into independent subnets whose start/length distribution has the
closed forms implemented below.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .netmodel import Topology

MODEL1 = 1
MODEL2 = 2
TXRX = "both"
RXONLY = "rx"


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioParams:
    """Activity probability, URLLC probability, cooperation rounds and setup.

    ``D=None`` stands for an unlimited number of cooperation rounds.
    """

    rho: float
    rho_f: float
    D: int | None = 10
    model: int = MODEL1
    coop: str = TXRX

    def __post_init__(self):
        for name in ("rho", "rho_f"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ParamError(f"{name} must lie in [0, 1], got {v!r}")
        if self.D is not None:
            if int(self.D) != self.D or self.D < 0 or self.D % 2:
                raise ParamError(f"D must be an even nonnegative integer, got {self.D!r}")
            object.__setattr__(self, "D", int(self.D))
        if self.model not in (MODEL1, MODEL2):
            raise ParamError(f"model must be 1 or 2, got {self.model!r}")
        if self.coop not in (TXRX, RXONLY):
            raise ParamError(f"coop must be '{TXRX}' or '{RXONLY}', got {self.coop!r}")

    def as_dict(self) -> dict:
        return {"rho": self.rho, "rho_f": self.rho_f, "D": self.D, "model": self.model, "coop": self.coop}


@dataclass(frozen=True)
class ActivityRealization:
    """Per-user activity bits ``active`` and URLLC bits ``urllc`` (0 where inactive)."""

    active: np.ndarray
    urllc: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.active, dtype=bool)
        b = np.asarray(self.urllc, dtype=bool)
        if a.shape != b.shape or a.ndim != 1:
            raise ParamError("activity and URLLC bit arrays must be 1-D of equal length")
        if np.any(b & ~a):
            raise ParamError("a URLLC bit is set on an inactive user")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "active", a)
        object.__setattr__(self, "urllc", b)

    @property
    def K(self) -> int:
        return self.active.size

    def embb(self, model: int) -> np.ndarray:
        """Users holding an eMBB message."""
        if model == MODEL1:
            return self.active
        return self.active & ~self.urllc

    def to_json(self) -> dict:
        return {"active": self.active.astype(int).tolist(), "urllc": self.urllc.astype(int).tolist()}

    @classmethod
    def from_json(cls, obj) -> "ActivityRealization":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(np.array(obj["active"], dtype=bool), np.array(obj["urllc"], dtype=bool))


@dataclass(frozen=True)
class Subnet:
    start: int  # 1-based first user
    length: int

    @property
    def stop(self) -> int:
        """Last user of the run (inclusive)."""
        return self.start + self.length - 1


def substream(seed: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial of a seeded experiment."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


def sample_activity(params: ScenarioParams, topo: Topology | int, rng: np.random.Generator) -> ActivityRealization:
    K = topo if isinstance(topo, int) else topo.K
    # both uniforms are always drawn so the stream layout does not depend on rho
    ua = rng.random(K)
    ub = rng.random(K)
    active = ua < params.rho
    return ActivityRealization(active, active & (ub < params.rho_f))


def runs(mask) -> list[Subnet]:
    """Maximal runs of ``True`` in a boolean array, as 1-based subnets."""
    x = np.concatenate(([0], np.asarray(mask, dtype=np.int8), [0]))
    d = np.diff(x)
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1)
    return [Subnet(int(s) + 1, int(e - s)) for s, e in zip(starts, stops)]


def phase_mask(K: int, phase: int) -> np.ndarray:
    """Users allowed to send URLLC in a phase: odd users in phase 1, even ones in phase 2."""
    if phase not in (1, 2):
        raise ParamError(f"phase must be 1 or 2, got {phase!r}")
    idx = np.arange(K)
    return (idx % 2) == (phase - 1)


def in_phase(k: int, phase: int) -> bool:
    if phase not in (1, 2):
        raise ParamError(f"phase must be 1 or 2, got {phase!r}")
    return (k % 2 == 1) == (phase == 1)


def _line_neighbors_of(mask: np.ndarray) -> np.ndarray:
    out = np.zeros_like(mask)
    out[1:] |= mask[:-1]
    out[:-1] |= mask[1:]
    return out


def participation_mask(real: ActivityRealization, phase: int, params: ScenarioParams) -> np.ndarray:
    """Users taking part in eMBB subnets of a phase on the line."""
    own = phase_mask(real.K, phase)
    if params.coop == RXONLY:
        sched = real.urllc & own
        part = real.active & ~sched & ~_line_neighbors_of(sched)
        if params.model == MODEL2:
            part &= ~real.urllc
        return part
    if params.model == MODEL2:
        return real.active & ~(real.urllc & ~own)
    return real.active.copy()


def decompose_active_subnets(real: ActivityRealization, K: int | None = None) -> list[Subnet]:
    return runs(real.active)


def decompose_embb_subnets(real: ActivityRealization, K: int | None, phase: int, params: ScenarioParams) -> list[Subnet]:
    return runs(participation_mask(real, phase, params))


# ---------------------------------------------------------------------------
# probability laws


def _check_range(ell: int, k: int, K: int):
    if not (1 <= k <= K and 1 <= ell <= K - k + 1):
        raise ParamError(f"no subnet of length {ell} can start at user {k} when K={K}")


def _position(ell: int, k: int, K: int) -> str:
    if k == 1:
        return "whole" if ell == K else "left"
    return "right" if ell == K - k + 1 else "interior"


def subnet_prob_m1(rho: float, ell: int, k: int, K: int) -> float:
    """P(a run of active users starts at ``k`` and has length ``ell``)."""
    _check_range(ell, k, K)
    pos = _position(ell, k, K)
    edge = {"interior": (1 - rho) ** 2, "left": 1 - rho, "right": 1 - rho, "whole": 1.0}[pos]
    return rho**ell * edge


def subnet_prob_m2(rho: float, rho_f: float, ell: int, k: int, K: int) -> float:
    """Run law of eMBB holders under model 2 (each user is one with prob. rho(1-rho_f))."""
    return subnet_prob_m1(rho * (1 - rho_f), ell, k, K)


def _table(pos: str, ell: int, odd_in: float, even_in: float, end: float, left_even: float) -> float:
    if pos == "whole":
        return 1.0
    if pos == "right":
        return end
    if pos == "left":
        return end if ell % 2 else left_even
    return odd_in if ell % 2 else even_in


def _a_coeff(rho, rho_f, ell, k, K):
    u = 1 - rho * (1 - rho_f)
    return _table(_position(ell, k, K), ell, u * u, u * (1 - rho), u, 1 - rho)


def _b_coeff(rho, rho_f, ell, k, K):
    u = 1 - rho * (1 - rho_f)
    return _table(_position(ell, k, K), ell, (1 - rho) ** 2, u * (1 - rho), 1 - rho, u)


def subnet_prob_m2_phase(rho: float, rho_f: float, ell: int, k: int, K: int, phase: int) -> float:
    """Model 2, Tx+Rx cooperation: subnet law in a phase.

    Subnets are cut by inactive users and by URLLC users whose parity does
    not match the phase.
    """
    _check_range(ell, k, K)
    if in_phase(k, phase):
        return rho**ell * (1 - rho_f) ** (ell // 2) * _a_coeff(rho, rho_f, ell, k, K)
    return rho**ell * (1 - rho_f) ** ((ell + 1) // 2) * _b_coeff(rho, rho_f, ell, k, K)


def embb_subnet_prob_rx(rho: float, rho_f: float, ell: int, k: int, K: int, phase: int, model: int) -> float:
    """Rx-only cooperation: eMBB-subnet law with the published boundary coefficients.

    The exhaustive oracle shows this law does not describe the neighbour-
    silencing scheme (see :func:`embb_subnet_prob_rx_exact`); it is kept so
    the published expressions can be evaluated and compared.
    """
    _check_range(ell, k, K)
    if model not in (MODEL1, MODEL2):
        raise ParamError(f"model must be 1 or 2, got {model!r}")
    own = in_phase(k, phase)
    if model == MODEL2:
        expo = ell
    else:
        expo = (ell + 1) // 2 if own else ell // 2
    coeff = _a_coeff(rho, rho_f, ell, k, K) if own else _b_coeff(rho, rho_f, ell, k, K)
    return rho**ell * (1 - rho_f) ** expo * coeff


def _idle_off_parity(rho: float, rho_f: float, model: int, has_next: bool) -> float:
    """P(an off-phase boundary user does not join the eMBB subnet)."""
    s = rho * rho_f if has_next else 0.0  # its far neighbour is a scheduled URLLC user
    if model == MODEL1:
        return (1 - rho) + rho * s
    return (1 - rho) + rho * rho_f + rho * (1 - rho_f) * s


def embb_subnet_prob_rx_exact(rho: float, rho_f: float, ell: int, k: int, K: int, phase: int, model: int) -> float:
    """Rx-only cooperation: exact eMBB-subnet law of the neighbour-silencing scheme.

    A boundary user of the phase's own parity must be inactive (an active
    one either joins the subnet or, holding URLLC, silences the edge user).
    A boundary user of the other parity stays out when inactive, when it is
    silenced by a scheduled URLLC user two hops away, or (model 2) when it
    holds URLLC.
    """
    _check_range(ell, k, K)
    if model not in (MODEL1, MODEL2):
        raise ParamError(f"model must be 1 or 2, got {model!r}")
    stop = k + ell - 1
    if k == 1:
        left = 1.0
    elif in_phase(k, phase):
        left = _idle_off_parity(rho, rho_f, model, k - 2 >= 1)
    else:
        left = 1 - rho
    if stop == K:
        right = 1.0
    elif in_phase(stop, phase):
        right = _idle_off_parity(rho, rho_f, model, stop + 2 <= K)
    else:
        right = 1 - rho
    if model == MODEL2:
        expo = ell
    else:
        own_first = in_phase(k, phase)
        expo = (ell + 1) // 2 if own_first else ell // 2
    return rho**ell * (1 - rho_f) ** expo * left * right
