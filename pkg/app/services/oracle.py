"""
Brute-force ordering relations for small traces.

Relations are dense n×n boolean matrices where bits[i, j] means event i is
ordered before event j. HB is a transitive closure; the CP and WCP strict
relations are least fixpoints of their rules, closed under composition with HB
on both sides.
"""
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set, Tuple

import numpy as np
import structlog

from app.core.config import settings
from app.core.errors import BoundExceeded
from app.models.report import OracleReport
from app.models.trace import EventKind, Trace, conflicting

logger = structlog.get_logger(__name__)


class RelationKind(str, Enum):
    HB = "HB"
    CP_PREC = "CPprec"
    WCP_PREC = "WCPprec"
    CP_LE = "CPle"
    WCP_LE = "WCPle"


PARTIAL_ORDERS = {RelationKind.HB, RelationKind.CP_LE, RelationKind.WCP_LE}


@dataclass
class OrderRelation:
    n: int
    bits: np.ndarray
    kind: RelationKind

    def __contains__(self, pair: Tuple[int, int]) -> bool:
        i, j = pair
        return bool(self.bits[i, j])

    def pairs(self) -> List[Tuple[int, int]]:
        """Ordered pairs (i, j) with i ≠ j, row-major"""
        rows, cols = np.nonzero(self.bits)
        return [(int(i), int(j)) for i, j in zip(rows, cols) if i != j]

    def issubset(self, other: "OrderRelation") -> bool:
        return bool(np.all(~self.bits | other.bits))

    def unordered(self, i: int, j: int) -> bool:
        return not self.bits[i, j] and not self.bits[j, i]

    def __len__(self) -> int:
        return len(self.pairs())


def _check_bound(trace: Trace, bound: Optional[int]) -> int:
    n = trace.n_events
    limit = settings.oracle_bound if bound is None else bound
    if n > limit:
        raise BoundExceeded(n, limit)
    return n


def _compose(hb: np.ndarray, rel: np.ndarray) -> np.ndarray:
    """≤HB ∘ rel ∘ ≤HB"""
    hb_f = hb.astype(np.float32)
    return (hb_f @ rel.astype(np.float32) @ hb_f) > 0


def thread_order(trace: Trace, reflexive: bool = True) -> np.ndarray:
    tids = np.array([e.tid for e in trace.events], dtype=np.int64)
    same = tids[:, None] == tids[None, :]
    order = np.triu(same, k=0 if reflexive else 1)
    return order


def hb_closure(trace: Trace, bound: Optional[int] = None) -> OrderRelation:
    """≤HB: closure of thread order, release→later acquire and fork/join edges"""
    n = _check_bound(trace, bound)
    succ: List[Set[int]] = [set() for _ in range(n)]

    last_of_thread: dict = {}
    first_of_thread: dict = {}
    releases: dict = {}
    for e in trace.events:
        prev = last_of_thread.get(e.tid)
        if prev is not None:
            succ[prev].add(e.idx)
        else:
            first_of_thread[e.tid] = e.idx
        last_of_thread[e.tid] = e.idx
        if e.kind == EventKind.RELEASE:
            releases.setdefault(e.operand, []).append(e.idx)
        elif e.kind == EventKind.ACQUIRE:
            for r in releases.get(e.operand, []):
                succ[r].add(e.idx)

    for e in trace.events:
        if e.kind == EventKind.FORK:
            child_first = first_of_thread.get(e.operand)
            if child_first is not None and child_first > e.idx:
                succ[e.idx].add(child_first)
        elif e.kind == EventKind.JOIN:
            child_last = last_of_thread.get(e.operand)
            if child_last is not None and child_last < e.idx:
                succ[child_last].add(e.idx)
            elif child_last is None:
                for f in trace.events[: e.idx]:
                    if f.kind == EventKind.FORK and f.operand == e.operand:
                        succ[f.idx].add(e.idx)

    bits = np.zeros((n, n), dtype=bool)
    # every edge points forward, so rows can be filled back to front
    for i in range(n - 1, -1, -1):
        if succ[i]:
            targets = np.fromiter(succ[i], dtype=np.int64)
            row = bits[targets].any(axis=0)
            row[targets] = True
            bits[i] = row
    np.fill_diagonal(bits, True)
    return OrderRelation(n=n, bits=bits, kind=RelationKind.HB)


class _SectionTables:
    """Per-section membership and access masks"""

    def __init__(self, trace: Trace):
        n, n_vars = trace.n_events, max(trace.n_vars, 1)
        self.sections = trace.sections
        k = len(self.sections)
        self.members = np.zeros((k, n), dtype=bool)
        self.reads = np.zeros((k, n_vars), dtype=bool)
        self.writes = np.zeros((k, n_vars), dtype=bool)
        for s, cs in enumerate(self.sections):
            self.members[s, cs.members] = True
            for idx in cs.members:
                e = trace.events[idx]
                if e.kind == EventKind.READ:
                    self.reads[s, e.operand] = True
                elif e.kind == EventKind.WRITE:
                    self.writes[s, e.operand] = True
        self.locks = np.array([cs.lock for cs in self.sections], dtype=np.int64)
        self.tids = np.array([cs.tid for cs in self.sections], dtype=np.int64)
        self.acquires = np.array([cs.acquire for cs in self.sections], dtype=np.int64)
        self.releases = np.array(
            [cs.release if cs.release is not None else -1 for cs in self.sections], dtype=np.int64
        )

    def __len__(self) -> int:
        return len(self.sections)

    def conflict_matrix(self) -> np.ndarray:
        """[s1, s2] iff the two sections hold conflicting accesses"""
        reads = self.reads.astype(np.float32)
        writes = self.writes.astype(np.float32)
        touches = np.maximum(reads, writes)
        conflict = (writes @ touches.T + reads @ writes.T) > 0
        return conflict & (self.tids[:, None] != self.tids[None, :])

    def contain_ordered(self, rel: np.ndarray) -> np.ndarray:
        """[s1, s2] iff some x ∈ s1, y ∈ s2 with rel[x, y]"""
        m = self.members.astype(np.float32)
        return (m @ rel.astype(np.float32) @ m.T) > 0


def _fixpoint(
    hb: np.ndarray,
    seed: np.ndarray,
    rule_b_pairs: List[Tuple[int, int, int, int]],
    tables: _SectionTables,
) -> Tuple[np.ndarray, int]:
    """Iterate rule (b) and rule (c) from `seed` until nothing changes.

    `rule_b_pairs` lists (s1, s2, source, target): when sections s1, s2 hold
    ordered events, add (source, target).
    """
    rel = _compose(hb, seed)
    rounds = 0
    while True:
        rounds += 1
        before = int(rel.sum())
        if rule_b_pairs:
            ordered = tables.contain_ordered(rel)
            for s1, s2, source, target in rule_b_pairs:
                if ordered[s1, s2]:
                    rel[source, target] = True
        rel = _compose(hb, rel)
        if int(rel.sum()) == before:
            return rel, rounds


def wcp_prec_closure(
    trace: Trace, bound: Optional[int] = None, hb: Optional[OrderRelation] = None
) -> OrderRelation:
    """≺WCP as the least relation closed under its three rules"""
    n = _check_bound(trace, bound)
    hb_bits = (hb or hb_closure(trace, bound=n)).bits
    tables = _SectionTables(trace)
    seed = np.zeros((n, n), dtype=bool)

    if n and len(tables):
        kinds = [e.kind for e in trace.events]
        is_read = np.array([k == EventKind.READ for k in kinds])
        is_write = np.array([k == EventKind.WRITE for k in kinds])
        var = np.array([e.operand if k.is_access else 0 for e, k in zip(trace.events, kinds)], dtype=np.int64)
        tids = np.array([e.tid for e in trace.events], dtype=np.int64)
        positions = np.arange(n)
        in_lock = np.zeros((max(trace.n_locks, 1), n), dtype=bool)
        for cs in tables.sections:
            in_lock[cs.lock, cs.members] = True

        # rule (a): release r before an access e ∈ ℓ conflicting with CS(r)
        for s, cs in enumerate(tables.sections):
            if cs.release is None:
                continue
            touched = tables.reads[s] | tables.writes[s]
            conflict = (is_write & touched[var]) | (is_read & tables.writes[s][var])
            targets = in_lock[cs.lock] & (positions > cs.release) & (tids != cs.tid) & conflict
            seed[cs.release, targets] = True

    rule_b: List[Tuple[int, int, int, int]] = []
    closed = [s for s, cs in enumerate(tables.sections) if cs.release is not None]
    for a in closed:
        for b in closed:
            ra, rb = int(tables.releases[a]), int(tables.releases[b])
            if tables.locks[a] == tables.locks[b] and ra < rb:
                rule_b.append((a, b, ra, rb))

    bits, rounds = _fixpoint(hb_bits, seed, rule_b, tables)
    logger.debug("WCP fixpoint reached", events=n, rounds=rounds)
    return OrderRelation(n=n, bits=bits, kind=RelationKind.WCP_PREC)


def cp_prec_closure(
    trace: Trace, bound: Optional[int] = None, hb: Optional[OrderRelation] = None
) -> OrderRelation:
    """≺CP: release→acquire rules over whole critical sections"""
    n = _check_bound(trace, bound)
    hb_bits = (hb or hb_closure(trace, bound=n)).bits
    tables = _SectionTables(trace)
    seed = np.zeros((n, n), dtype=bool)

    pairs: List[Tuple[int, int, int, int]] = []
    if len(tables):
        conflict = tables.conflict_matrix()
        for r_sec, r_cs in enumerate(tables.sections):
            if r_cs.release is None:
                continue
            for a_sec, a_cs in enumerate(tables.sections):
                if a_cs.lock != r_cs.lock or a_cs.acquire <= r_cs.release:
                    continue
                # rule (a)
                if conflict[r_sec, a_sec]:
                    seed[r_cs.release, a_cs.acquire] = True
                pairs.append((r_sec, a_sec, r_cs.release, a_cs.acquire))

    bits, rounds = _fixpoint(hb_bits, seed, pairs, tables)
    logger.debug("CP fixpoint reached", events=n, rounds=rounds)
    return OrderRelation(n=n, bits=bits, kind=RelationKind.CP_PREC)


def with_thread_order(trace: Trace, prec: OrderRelation) -> OrderRelation:
    """≤X = ≺X ∪ ≤TO"""
    kind = RelationKind.WCP_LE if prec.kind == RelationKind.WCP_PREC else RelationKind.CP_LE
    return OrderRelation(n=prec.n, bits=prec.bits | thread_order(trace), kind=kind)


def wcp_order(trace: Trace, bound: Optional[int] = None) -> OrderRelation:
    return with_thread_order(trace, wcp_prec_closure(trace, bound=bound))


def cp_order(trace: Trace, bound: Optional[int] = None) -> OrderRelation:
    return with_thread_order(trace, cp_prec_closure(trace, bound=bound))


def races_of(trace: Trace, rel: OrderRelation) -> Set[Tuple[int, int]]:
    """Conflicting pairs i < j left unordered by a partial order"""
    if rel.kind not in PARTIAL_ORDERS:
        raise ValueError(f"races are defined over partial orders, not {rel.kind.value}")
    accesses = [e for e in trace.events if e.kind.is_access]
    races: Set[Tuple[int, int]] = set()
    for pos, e2 in enumerate(accesses):
        for e1 in accesses[:pos]:
            if conflicting(e1, e2) and rel.unordered(e1.idx, e2.idx):
                races.add((e1.idx, e2.idx))
    return races


def oracle_report(trace: Trace, bound: Optional[int] = None) -> OracleReport:
    """All three relations plus the races each one leaves"""
    hb = hb_closure(trace, bound=bound)
    cp = cp_prec_closure(trace, bound=bound, hb=hb)
    wcp = wcp_prec_closure(trace, bound=bound, hb=hb)
    cp_le, wcp_le = with_thread_order(trace, cp), with_thread_order(trace, wcp)
    return OracleReport(
        events=trace.n_events,
        prec={rel.kind.value: rel.pairs() for rel in (hb, cp, wcp)},
        races={
            rel.kind.value: sorted(races_of(trace, rel)) for rel in (hb, cp_le, wcp_le)
        },
    )
