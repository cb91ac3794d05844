"""Per-realization schedules, validity checks and MG accounting.

A schedule assigns every user one role per phase.  Phases are time-shared
with fixed weights, so the realized MG of a schedule is the weighted count
of transmitting users.  Users labelled ``ACTS`` carry eMBB data with the
URLLC coding (no cooperation), which lets them close cooperation blocks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .netmodel import HEX, WYNER, HexPartition, Topology
from .traffic import (
    MODEL2,
    RXONLY,
    TXRX,
    ActivityRealization,
    ParamError,
    ScenarioParams,
    participation_mask,
    phase_mask,
    runs,
)

ADAPTIVE = "adaptive"
NONADAPTIVE = "nonadaptive"
EMBB_ONLY = "embb_only"
SCHEMES = (ADAPTIVE, NONADAPTIVE, EMBB_ONLY)


class Role(IntEnum):
    SILENT = 0
    URLLC = 1
    EMBB = 2
    ACTS = 3  # eMBB data sent like a URLLC message


TRANSMITTING = (Role.URLLC, Role.EMBB, Role.ACTS)


@dataclass(frozen=True)
class PhasedSchedule:
    roles: np.ndarray  # (phases, K) of Role values
    weights: tuple[float, ...]

    def __post_init__(self):
        r = np.asarray(self.roles, dtype=np.int8)
        if r.ndim != 2 or r.shape[0] != len(self.weights):
            raise ValueError("one role row per phase weight is required")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("phase weights must sum to 1")
        r.setflags(write=False)
        object.__setattr__(self, "roles", r)

    @property
    def phases(self) -> int:
        return self.roles.shape[0]

    def to_json(self, topo: Topology | None = None) -> list:
        out = []
        for p in range(self.phases):
            label = (lambda i: i + 1) if topo is None else topo.label
            out.append({
                "weight": self.weights[p],
                "roles": [{"user": label(i), "role": Role(int(v)).name} for i, v in enumerate(self.roles[p])],
            })
        return out


@dataclass(frozen=True)
class MGTally:
    weights: tuple[float, ...]
    urllc_phase: tuple[int, ...]
    sum_phase: tuple[int, ...]

    @property
    def urllc_total(self) -> float:
        return float(sum(w * u for w, u in zip(self.weights, self.urllc_phase)))

    @property
    def sum_total(self) -> float:
        return float(sum(w * s for w, s in zip(self.weights, self.sum_phase)))

    @property
    def embb_total(self) -> float:
        return self.sum_total - self.urllc_total


def tally(schedule: PhasedSchedule) -> MGTally:
    r = schedule.roles
    urllc = tuple(int(v) for v in (r == Role.URLLC).sum(axis=1))
    total = tuple(int(v) for v in np.isin(r, TRANSMITTING).sum(axis=1))
    return MGTally(schedule.weights, urllc, total)


# ---------------------------------------------------------------------------
# subnet MG helpers


def msum_full(ell: int, D: int | None) -> int:
    """MG of a subnet when every (D+2)-th user is silenced."""
    if D is None:
        return ell
    return ell - ell // (D + 2)


def msum_red(ell: int, D: int | None) -> int:
    """MG of a subnet whose first silenced user is moved one position earlier."""
    if D is None:
        return ell
    return ell - (ell + 1) // (D + 2)


def lset(k: int, ell: int, D: int) -> tuple[frozenset, int]:
    """Users of a subnet that must not hold URLLC for the full scheme to apply off-phase.

    Returns the set (absolute labels, restricted to the subnet) and its size.
    """
    if D is None:
        return frozenset(), 0
    P = D + 2
    blocks = -(-ell // P)
    members = set()
    for c in range(1, blocks + 1):
        for u in (k + (c - 1) * P + 1, k + c * P - 3):
            if k <= u <= k + ell - 1:
                members.add(u)
    s = frozenset(members)
    return s, len(s)


def lset_size_formula(ell: int, D: int) -> int:
    """Closed-form count of the blocking set, valid when its two per-block positions differ."""
    P = D + 2
    r = ell % P
    if r in (0, D, D + 1):
        return 2 * (-(-ell // P))
    if r == 1:
        return 2 * (ell // P)
    return 2 * (ell // P) + 1


# ---------------------------------------------------------------------------
# Wyner-line schemes


def _full_block_roles(roles, urllc, s, ell, D, acts):
    """Silence every (D+2)-th user of the run starting at 0-based index ``s``.

    With ``acts`` the users opening and closing each block switch from eMBB
    to ACTS so every block has its eMBB users within reach of a master Rx.
    """
    if D is None:
        return
    P = D + 2
    for r in range(P, ell + 1, P):
        roles[s + r - 1] = Role.SILENT
    if not acts:
        return
    for r in range(1, ell + 1):
        if r % P in (1 % P, (D + 1) % P) and roles[s + r - 1] == Role.EMBB:
            roles[s + r - 1] = Role.ACTS


def _red_block_roles(roles, s, m, D):
    """First block of an off-phase subnet, at most ``D`` users long."""
    if D is None or m < D or m == 0:
        return
    # m == D: the outermost eMBB users must be within D-2 of each other
    if m >= 2 and roles[s + 1] != Role.URLLC and roles[s] == Role.EMBB:
        roles[s] = Role.ACTS
    elif roles[s + m - 1] == Role.EMBB:
        roles[s + m - 1] = Role.ACTS


def _txrx_phase(params: ScenarioParams, real: ActivityRealization, phase: int) -> np.ndarray:
    K, D = real.K, params.D
    own = phase_mask(K, phase)
    part = participation_mask(real, phase, params)
    roles = np.full(K, Role.SILENT, dtype=np.int8)
    roles[part] = Role.EMBB
    roles[part & real.urllc & own] = Role.URLLC
    for sub in runs(part):
        s, ell = sub.start - 1, sub.length
        if D is None:
            continue
        starts_own = bool(own[s])
        blockers, _ = lset(sub.start, ell, D)
        clean = not any(real.urllc[u - 1] for u in blockers)
        if starts_own or clean:
            _full_block_roles(roles, real.urllc, s, ell, D, acts=True)
        elif ell <= D:
            _red_block_roles(roles, s, ell, D)
        else:
            roles[s + D] = Role.SILENT
            _red_block_roles(roles, s, D, D)
            _full_block_roles(roles, real.urllc, s + D + 1, ell - D - 1, D, acts=True)
    return roles


def schedule_adaptive_wyner_txrx(params: ScenarioParams, real: ActivityRealization, K: int | None = None):
    """Two-phase scheme with Tx+Rx cooperation that adapts silences to each subnet."""
    if params.coop != TXRX:
        raise ParamError("this scheme needs Tx and Rx cooperation")
    sched = PhasedSchedule(np.stack([_txrx_phase(params, real, i) for i in (1, 2)]), (0.5, 0.5))
    return sched, tally(sched)


def _rx_phase(params: ScenarioParams, real: ActivityRealization, phase: int) -> np.ndarray:
    K = real.K
    own = phase_mask(K, phase)
    roles = np.full(K, Role.SILENT, dtype=np.int8)
    part = participation_mask(real, phase, params)
    roles[part] = Role.EMBB
    roles[real.urllc & own] = Role.URLLC
    for sub in runs(part):
        _full_block_roles(roles, real.urllc, sub.start - 1, sub.length, params.D, acts=False)
    return roles


def schedule_adaptive_wyner_rxonly(params: ScenarioParams, real: ActivityRealization, K: int | None = None):
    """Two-phase Rx-only scheme: URLLC users of the phase run interference-free."""
    if params.coop != RXONLY:
        raise ParamError("this scheme assumes Rx-only cooperation")
    sched = PhasedSchedule(np.stack([_rx_phase(params, real, i) for i in (1, 2)]), (0.5, 0.5))
    return sched, tally(sched)


def _static_silent(K: int, D: int | None, phase: int) -> np.ndarray:
    silent = np.zeros(K, dtype=bool)
    if D is None:
        return silent
    users = np.arange(1, K + 1)
    offset = 0 if phase == 1 else 1
    silent[(users - offset) % (D + 2) == 0] = True
    return silent


def schedule_nonadaptive_wyner(params: ScenarioParams, real: ActivityRealization, K: int | None = None):
    """Activity-agnostic two-phase scheme.

    With Tx+Rx cooperation the silenced users sit at fixed positions (every
    (D+2)-th user, shifted by one in phase 2).  With Rx-only cooperation only
    users of the phase's parity transmit.
    """
    K = real.K
    rows = []
    for phase in (1, 2):
        own = phase_mask(K, phase)
        roles = np.full(K, Role.SILENT, dtype=np.int8)
        if params.coop == RXONLY:
            roles[real.active & own] = Role.EMBB
            roles[real.urllc & own] = Role.URLLC
            rows.append(roles)
            continue
        on = real.active & ~_static_silent(K, params.D, phase)
        roles[on] = Role.EMBB
        if params.model == MODEL2:
            roles[on & real.urllc & ~own] = Role.SILENT
        roles[on & real.urllc & own] = Role.URLLC
        if params.D is not None:
            # block edges carry the phase's parity; they close each block
            silent = _static_silent(K, params.D, phase)
            edge = np.zeros(K, dtype=bool)
            edge[1:] |= silent[:-1]
            edge[:-1] |= silent[1:]
            edge[0] = edge[-1] = True
            edge &= own
            roles[edge & (roles == Role.EMBB)] = Role.ACTS
        rows.append(roles)
    sched = PhasedSchedule(np.stack(rows), (0.5, 0.5))
    return sched, tally(sched)


def schedule_embb_only_wyner(params: ScenarioParams, real: ActivityRealization, K: int | None = None):
    """Single-phase scheme sending eMBB messages only (largest eMBB MG)."""
    K = real.K
    holders = real.embb(params.model)
    roles = np.full(K, Role.SILENT, dtype=np.int8)
    roles[holders] = Role.EMBB
    for sub in runs(holders):
        _full_block_roles(roles, real.urllc, sub.start - 1, sub.length, params.D, acts=params.coop == TXRX)
    sched = PhasedSchedule(roles[None, :], (1.0,))
    return sched, tally(sched)


# ---------------------------------------------------------------------------
# hexagonal torus


def schedule_hex(params: ScenarioParams, real: ActivityRealization, topo: Topology,
                 partition: HexPartition, scheme: str = ADAPTIVE):
    """Three-phase color scheme on the hex torus (unlimited cooperation rounds)."""
    if topo.kind != HEX:
        raise ParamError("schedule_hex needs a hex torus")
    nbr = topo.neighbor_matrix()
    rows = []
    for c in (1, 2, 3):
        own = partition.color == c
        roles = np.full(topo.K, Role.SILENT, dtype=np.int8)
        if params.coop == RXONLY and scheme == NONADAPTIVE:
            roles[real.active & own] = Role.EMBB
            roles[real.urllc & own] = Role.URLLC
        elif params.coop == RXONLY:
            sched = real.urllc & own
            silenced = sched[nbr].any(axis=1)
            on = real.embb(params.model) & ~sched & ~silenced
            roles[on] = Role.EMBB
            roles[sched] = Role.URLLC
        else:
            roles[real.embb(params.model)] = Role.EMBB
            roles[real.urllc & own] = Role.URLLC
        rows.append(roles)
    sched = PhasedSchedule(np.stack(rows), (1 / 3, 1 / 3, 1 / 3))
    return sched, tally(sched)


def offcolor_embb_fraction(schedule: PhasedSchedule, partition: HexPartition) -> float:
    """Share of off-color users scheduled for eMBB, averaged over the color phases."""
    fr = []
    for p in range(schedule.phases):
        off = partition.color != p + 1
        fr.append(float(np.isin(schedule.roles[p][off], (Role.EMBB, Role.ACTS)).mean()))
    return float(np.mean(fr))


# ---------------------------------------------------------------------------
# dispatch


def run_scheme(params: ScenarioParams, real: ActivityRealization, topo: Topology,
               scheme: str = ADAPTIVE, partition: HexPartition | None = None):
    if scheme not in SCHEMES:
        raise ParamError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")
    if topo.kind == HEX:
        if scheme == EMBB_ONLY:
            raise ParamError("the hex torus has no separate eMBB-only scheme")
        if params.D is not None:
            raise ParamError("hex schemes assume unlimited cooperation rounds (use D=None)")
        if partition is None:
            from .netmodel import hex_color_partition
            partition = hex_color_partition(topo)
        return schedule_hex(params, real, topo, partition, scheme)
    if scheme == EMBB_ONLY:
        return schedule_embb_only_wyner(params, real)
    if scheme == NONADAPTIVE:
        return schedule_nonadaptive_wyner(params, real)
    if params.coop == TXRX:
        return schedule_adaptive_wyner_txrx(params, real)
    return schedule_adaptive_wyner_rxonly(params, real)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    condition: str
    phase: int
    users: tuple

    def to_json(self) -> dict:
        return {"condition": self.condition, "phase": self.phase, "users": list(self.users)}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> list:
        return [v.to_json() for v in self.violations]


def master_radius(params: ScenarioParams) -> int | None:
    """Hops from the master Rx that eMBB users of a subnet may be away."""
    if params.D is None:
        return None
    # Tx+Rx schemes spend one round on Tx cooperation
    return params.D // 2 - (1 if params.coop == TXRX else 0)


def _components(topo: Topology, mask: np.ndarray) -> list[list[int]]:
    seen = np.zeros(topo.K, dtype=bool)
    comps = []
    for i in np.flatnonzero(mask):
        if seen[i]:
            continue
        comp, queue = [], deque([int(i)])
        seen[i] = True
        while queue:
            u = queue.popleft()
            comp.append(u)
            for v in topo.adjacency[u]:
                if mask[v] and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        comps.append(comp)
    return comps


def _eccentric_ok(topo: Topology, comp: list[int], targets: set[int], radius: int) -> bool:
    inside = set(comp)
    for m in comp:
        dist = {m: 0}
        queue = deque([m])
        while queue:
            u = queue.popleft()
            if dist[u] == radius:
                continue
            for v in topo.adjacency[u]:
                if v in inside and v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        if targets <= dist.keys():
            return True
    return False


def validate_schedule(topo: Topology, schedule: PhasedSchedule, params: ScenarioParams,
                      real: ActivityRealization | None = None) -> ValidationReport:
    """Check C1 (URLLC isolation), C2 (master Rx reach) and, for Rx-only, C3.

    ACTS users are held to the URLLC rules: no two URLLC-like users may be
    adjacent, and they end cooperation groups.  When the realization is
    given, role/message consistency is checked as well.
    """
    rep = ValidationReport()
    edges = topo.edge_array()
    radius = master_radius(params)
    for p in range(schedule.phases):
        r = schedule.roles[p]
        ph = p + 1
        lab = topo.label
        urllc_like = np.isin(r, (Role.URLLC, Role.ACTS))
        if edges.size:
            bad = urllc_like[edges[:, 0]] & urllc_like[edges[:, 1]]
            for i, j in edges[bad]:
                rep.violations.append(Violation("C1", ph, (lab(int(i)), lab(int(j)))))
            if params.coop == RXONLY:
                e_, u_ = np.isin(r, (Role.EMBB, Role.ACTS)), r == Role.URLLC
                bad = (e_[edges[:, 0]] & u_[edges[:, 1]]) | (u_[edges[:, 0]] & e_[edges[:, 1]])
                for i, j in edges[bad]:
                    rep.violations.append(Violation("C3", ph, (lab(int(i)), lab(int(j)))))
        if radius is not None:
            tx = np.isin(r, TRANSMITTING)
            embb = r == Role.EMBB
            if topo.kind == WYNER:
                for sub in runs(tx):
                    seg = np.flatnonzero(embb[sub.start - 1:sub.stop]) + sub.start
                    if seg.size and (radius < 0 or seg[-1] - seg[0] > 2 * radius):
                        rep.violations.append(Violation("C2", ph, tuple(int(u) for u in seg)))
            else:
                for comp in _components(topo, tx):
                    targets = {u for u in comp if embb[u]}
                    if targets and (radius < 0 or not _eccentric_ok(topo, comp, targets, radius)):
                        rep.violations.append(Violation("C2", ph, tuple(lab(u) for u in sorted(targets))))
        if real is not None:
            lab = topo.label
            bad = np.flatnonzero((r == Role.URLLC) & ~real.urllc)
            bad = np.union1d(bad, np.flatnonzero(np.isin(r, TRANSMITTING) & ~real.active))
            holders = real.embb(params.model)
            bad = np.union1d(bad, np.flatnonzero(np.isin(r, (Role.EMBB, Role.ACTS)) & ~holders))
            if bad.size:
                rep.violations.append(Violation("roles", ph, tuple(lab(int(u)) for u in bad)))
    return rep


def urllc_coverage_gaps(schedule: PhasedSchedule, real: ActivityRealization) -> np.ndarray:
    """0-based users holding URLLC that are not served exactly once."""
    served = (schedule.roles == Role.URLLC).sum(axis=0)
    return np.flatnonzero(real.urllc & (served != 1))
