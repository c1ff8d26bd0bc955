"""Counting and enumeration of graceful permutations.

Three independent routes produce counts:

* ``brute_force_count`` filters all n! permutations (small n only),
* ``dfs_count`` walks the search tree node by node,
* ``count`` runs the production level-synchronous BFS that folds
  complement-equivalent states into classes and carries exact
  multiplicities, split by orientation so endpoint constraints stay
  correct after folding.

A class stored under key K holds ``direct`` tree nodes whose encoding is
K itself and ``reflected`` nodes whose complemented encoding is K.  The
final answer is read off the terminal level: an unconstrained graceful
permutation is a terminal tree node read in either direction, while a
required start label picks the reading direction, so no doubling applies
to constrained counts.
"""

from __future__ import annotations

import multiprocessing
import time
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .state import (
    SENTINEL,
    PartialState,
    add_edge,
    can_add_edge,
    candidate_pairs,
    complement_key,
    encode,
    new_root,
)

__all__ = [
    "OneEndpoint",
    "TwoEndpoints",
    "Constraint",
    "MultiplicityPair",
    "ClassMap",
    "LevelStats",
    "CountResult",
    "GracefulPermutation",
    "EnumerationResult",
    "ComputationRefused",
    "is_graceful",
    "brute_force_count",
    "dfs_count",
    "enumerate_graceful",
    "root_map",
    "expand_level",
    "finalize",
    "count",
]

#: Largest n accepted by the brute-force oracle (11! is already 4*10^7).
BRUTE_FORCE_LIMIT = 11

#: Below this many classes the pure-Python expansion beats the vectorized one.
_NUMPY_MIN_ROWS = 192

#: Levels smaller than this are never worth farming out to worker processes.
_PARALLEL_MIN_ROWS = 4096


class ComputationRefused(Exception):
    """A structurally valid request was declined as too expensive."""


@dataclass(frozen=True)
class OneEndpoint:
    """Count permutations whose first label is ``a``."""

    a: int


@dataclass(frozen=True)
class TwoEndpoints:
    """Count permutations starting at ``a`` and ending at ``b``."""

    a: int
    b: int


Constraint = Union[None, OneEndpoint, TwoEndpoints]


class MultiplicityPair(NamedTuple):
    """Exact class-member counts, split by stored orientation.

    Arbitrary-precision integers, so in-memory accumulation can never
    wrap; the checkpoint writer enforces its fixed 128-bit record field.
    """

    direct: int
    reflected: int


@dataclass
class ClassMap:
    """All equivalence classes on one level, keyed by canonical encoding.

    ``level`` is the label of the next edge to place; 0 means terminal.
    """

    n: int
    level: int
    entries: dict[bytes, MultiplicityPair]

    def node_sum(self) -> int:
        return sum(d + r for d, r in self.entries.values())


@dataclass(frozen=True)
class LevelStats:
    level: int
    class_count: int
    node_sum: int
    wall_time: float


@dataclass(frozen=True)
class CountResult:
    n: int
    constraint: Constraint
    count: int
    levels: tuple[LevelStats, ...]
    elapsed: float


@dataclass(frozen=True)
class GracefulPermutation:
    """A validated label sequence whose adjacent differences are 1..n-1."""

    seq: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "seq", tuple(self.seq))
        if not is_graceful(self.seq):
            raise ValueError(f"not a graceful permutation: {list(self.seq)}")

    def __len__(self) -> int:
        return len(self.seq)

    def __iter__(self):
        return iter(self.seq)

    def __getitem__(self, i):
        return self.seq[i]

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.seq)) + "]"


@dataclass
class EnumerationResult:
    permutations: list[GracefulPermutation]
    truncated: bool = False


def is_graceful(seq: Sequence[int]) -> bool:
    """True iff seq is a permutation of 0..n-1 with differences 1..n-1."""
    n = len(seq)
    if n == 0:
        return False
    labels_seen = 0
    for x in seq:
        if not isinstance(x, int) or not 0 <= x < n:
            return False
        bit = 1 << x
        if labels_seen & bit:
            return False
        labels_seen |= bit
    diffs_seen = 0
    prev = seq[0]
    for i in range(1, n):
        cur = seq[i]
        d = cur - prev
        if d < 0:
            d = -d
        bit = 1 << d
        if diffs_seen & bit:
            return False
        diffs_seen |= bit
        prev = cur
    return True


def _check_constraint(n: int, constraint: Constraint) -> None:
    if constraint is None:
        return
    if isinstance(constraint, OneEndpoint):
        labels = (constraint.a,)
    elif isinstance(constraint, TwoEndpoints):
        labels = (constraint.a, constraint.b)
    else:
        raise TypeError(f"not a constraint: {constraint!r}")
    for a in labels:
        if not 0 <= a < n:
            raise ValueError(f"endpoint label {a} out of range 0..{n - 1}")


def _single_vertex_count(constraint: Constraint) -> int:
    # The only 1-permutation is [0]; both its ends are the label 0.
    if constraint is None or constraint == OneEndpoint(0) or constraint == TwoEndpoints(0, 0):
        return 1
    return 0


def _matches_endpoints(seq: Sequence[int], constraint: Constraint) -> bool:
    if constraint is None:
        return True
    if isinstance(constraint, OneEndpoint):
        return seq[0] == constraint.a
    return seq[0] == constraint.a and seq[-1] == constraint.b


# ---------------------------------------------------------------------------
# Oracle 1: brute force over all n! permutations
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _all_graceful_brute(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(p for p in permutations(range(n)) if is_graceful(p))


def brute_force_count(n: int, constraint: Constraint = None) -> int:
    """Count by filtering every permutation; refuses n past the guard."""
    if n < 1:
        raise ValueError(f"label count must be >= 1, got {n}")
    if n > BRUTE_FORCE_LIMIT:
        raise ComputationRefused(
            f"brute force refused for n={n}: guard is n <= {BRUTE_FORCE_LIMIT}"
        )
    _check_constraint(n, constraint)
    return sum(1 for p in _all_graceful_brute(n) if _matches_endpoints(p, constraint))


# ---------------------------------------------------------------------------
# Oracle 2: plain recursive tree search (no folding)
# ---------------------------------------------------------------------------


def _state_dead(s: PartialState, constraint: Constraint) -> bool:
    """True when no descendant of this concrete node can satisfy the
    constraint: a required endpoint already interior, or the two required
    endpoints pair up before the path is complete."""
    if constraint is None:
        return False
    if isinstance(constraint, OneEndpoint):
        return s.free[constraint.a] == 0
    a, b = constraint.a, constraint.b
    if a == b:
        return True  # a path of >= 2 labels has two distinct ends
    if s.free[a] == 0 or s.free[b] == 0:
        return True
    return s.forb[a] == b and s.next_edge_label > 0


def _terminal_value(s: PartialState, constraint: Constraint) -> int:
    ends = s.endpoints()
    if constraint is None:
        return 2  # the path can be read from either end
    if isinstance(constraint, OneEndpoint):
        return 1 if constraint.a in ends else 0
    return 1 if ends == {constraint.a, constraint.b} else 0


def dfs_count(n: int, constraint: Constraint = None, *, prune: bool = True) -> int:
    """Count by expanding the search tree node by node.

    Exercises ``can_add_edge``/``add_edge`` directly and applies the same
    terminal constraint semantics as ``finalize``; no equivalence folding.
    """
    if n < 1:
        raise ValueError(f"label count must be >= 1, got {n}")
    _check_constraint(n, constraint)
    if n == 1:
        return _single_vertex_count(constraint)
    pairs = [candidate_pairs(n, k) for k in range(n)]

    def rec(s: PartialState) -> int:
        k = s.next_edge_label
        if k == 0:
            return _terminal_value(s, constraint)
        total = 0
        for u, v in pairs[k]:
            if can_add_edge(s, u, v):
                child = add_edge(s, u, v)
                if prune and _state_dead(child, constraint):
                    continue
                total += rec(child)
        return total

    return rec(new_root(n))


# ---------------------------------------------------------------------------
# Enumeration (materializes the actual label sequences)
# ---------------------------------------------------------------------------


class _Truncated(Exception):
    pass


def enumerate_graceful(
    n: int, constraint: Constraint = None, limit: Optional[int] = None
) -> EnumerationResult:
    """All graceful permutations under the constraint, each exactly once,
    in a deterministic order; stops with ``truncated`` set once ``limit``
    permutations have been collected."""
    if n < 1:
        raise ValueError(f"label count must be >= 1, got {n}")
    _check_constraint(n, constraint)
    if limit is not None and limit < 0:
        raise ValueError("limit must be >= 0")
    out: list[GracefulPermutation] = []
    result = EnumerationResult(out)
    if n == 1:
        if _single_vertex_count(constraint):
            if limit == 0:
                result.truncated = True
            else:
                out.append(GracefulPermutation((0,)))
        return result

    free = [2] * n
    forb = list(range(n))
    adj: list[list[int]] = [[] for _ in range(n)]

    def read_path(start: int) -> tuple[int, ...]:
        seq = [start]
        prev = -1
        cur = start
        for _ in range(n - 1):
            nxt = adj[cur][0] if adj[cur][0] != prev else adj[cur][1]
            seq.append(nxt)
            prev, cur = cur, nxt
        return tuple(seq)

    def emit(seq: tuple[int, ...]) -> None:
        if limit is not None and len(out) >= limit:
            result.truncated = True
            raise _Truncated
        out.append(GracefulPermutation(seq))

    def emit_terminal() -> None:
        ends = sorted(u for u in range(n) if free[u] == 1)
        if constraint is None:
            seq = read_path(ends[0])
            emit(seq)
            emit(seq[::-1])
        elif isinstance(constraint, OneEndpoint):
            if constraint.a in ends:
                emit(read_path(constraint.a))
        else:
            if {constraint.a, constraint.b} == set(ends):
                emit(read_path(constraint.a))

    def dead(remaining: int) -> bool:
        if constraint is None:
            return False
        if isinstance(constraint, OneEndpoint):
            return free[constraint.a] == 0
        a, b = constraint.a, constraint.b
        if a == b or free[a] == 0 or free[b] == 0:
            return True
        return forb[a] == b and remaining > 0

    def rec(k: int) -> None:
        if k == 0:
            emit_terminal()
            return
        for u in range(n - k):
            v = u + k
            if free[u] == 0 or free[v] == 0 or forb[u] == v:
                continue
            pu, pv = forb[u], forb[v]
            free[u] -= 1
            free[v] -= 1
            forb[pu], forb[pv] = pv, pu
            if free[u] == 0:
                forb[u] = u
            if free[v] == 0:
                forb[v] = v
            adj[u].append(v)
            adj[v].append(u)
            if not dead(k - 1):
                rec(k - 1)
            adj[u].pop()
            adj[v].pop()
            free[u] += 1
            free[v] += 1
            # forb[pu] was u and forb[pv] was v before the edge, in both
            # the unused and the endpoint case.
            forb[u] = pu
            forb[v] = pv
            forb[pu] = u
            forb[pv] = v

    try:
        rec(n - 1)
    except _Truncated:
        pass
    return result


# ---------------------------------------------------------------------------
# Production route: multiplicity BFS over folded classes
# ---------------------------------------------------------------------------


def root_map(n: int) -> ClassMap:
    """Level-(n-1) map holding the single empty state."""
    key = encode(new_root(n))
    return ClassMap(n, n - 1, {key: MultiplicityPair(1, 0)})


def _dead_columns(n: int, child_level: int, constraint: Constraint):
    """Byte positions to test for orientation-aware pruning, or None.

    Returns (a, b, pair_check) for the direct slot and the same for the
    reflected slot, expressed in representative coordinates.  ``b`` is
    None for single-endpoint constraints; ``pair_check`` is true when the
    forb[a]==b dead end applies (two endpoints, path not yet complete).
    """
    if constraint is None:
        return None
    last = n - 1
    if isinstance(constraint, OneEndpoint):
        return (constraint.a, None, False), (last - constraint.a, None, False)
    a, b = constraint.a, constraint.b
    pair_check = child_level > 0
    return (a, b, pair_check), (last - a, last - b, pair_check)


def _slot_dead(key: bytes, spec) -> bool:
    a, b, pair_check = spec
    if key[2 * a] == 0:
        return True
    if b is None:
        return False
    if key[2 * b] == 0:
        return True
    return pair_check and key[2 * a + 1] == b


def _expand_items_python(n, k, items, dead):
    acc: dict[bytes, list[int]] = {}
    get = acc.get
    dir_spec = ref_spec = None
    if dead is not None:
        dir_spec, ref_spec = dead
    for key, d, r in items:
        frees = key[0::2]
        parts = key[1::2]
        for u in range(n - k):
            v = u + k
            fu = frees[u]
            fv = frees[v]
            if fu == 0 or fv == 0 or parts[u] == v:
                continue
            ba = bytearray(key)
            pu = parts[u] if fu == 1 else u
            pv = parts[v] if fv == 1 else v
            ba[2 * u] = fu - 1
            ba[2 * v] = fv - 1
            ba[2 * pu + 1] = pv
            ba[2 * pv + 1] = pu
            if fu == 1:
                ba[2 * u + 1] = SENTINEL
            if fv == 1:
                ba[2 * v + 1] = SENTINEL
            kd = bytes(ba)
            kc = complement_key(kd)
            if kd < kc:
                ckey, dd, rr = kd, d, r
            elif kc < kd:
                ckey, dd, rr = kc, r, d
            else:
                ckey, dd, rr = kd, d + r, 0
            if dead is not None:
                if _slot_dead(ckey, dir_spec):
                    dd = 0
                if _slot_dead(ckey, ref_spec):
                    rr = 0
                if dd == 0 and rr == 0:
                    continue
            cur = get(ckey)
            if cur is None:
                acc[ckey] = [dd, rr]
            else:
                cur[0] += dd
                cur[1] += rr
    return acc


def _expand_items_numpy(n, k, items, dead):
    w = 2 * n
    keys = b"".join(item[0] for item in items)
    mult_d = [item[1] for item in items]
    mult_r = [item[2] for item in items]
    K = np.frombuffer(keys, dtype=np.uint8).reshape(len(items), w)
    F = K[:, 0::2]
    P = K[:, 1::2]
    last = np.uint8(n - 1)
    acc: dict[bytes, list[int]] = {}
    get = acc.get
    for u in range(n - k):
        v = u + k
        valid = (F[:, u] != 0) & (F[:, v] != 0) & (P[:, u] != v)
        idx = np.flatnonzero(valid)
        if idx.size == 0:
            continue
        child = K[idx].copy()
        fu = F[idx, u]
        fv = F[idx, v]
        pu = np.where(fu == 1, P[idx, u], u).astype(np.intp)
        pv = np.where(fv == 1, P[idx, v], v).astype(np.intp)
        child[:, 2 * u] = fu - 1
        child[:, 2 * v] = fv - 1
        rows = np.arange(idx.size)
        child[rows, 2 * pu + 1] = pv.astype(np.uint8)
        child[rows, 2 * pv + 1] = pu.astype(np.uint8)
        child[fu == 1, 2 * u + 1] = SENTINEL
        child[fv == 1, 2 * v + 1] = SENTINEL
        # Complemented encodings of every child, then a rowwise
        # lexicographic comparison at the first differing byte.
        comp = np.empty_like(child)
        comp[:, 0::2] = child[:, 0::2][:, ::-1]
        pc = child[:, 1::2][:, ::-1]
        comp[:, 1::2] = np.where(pc == SENTINEL, pc, last - pc)
        neq = child != comp
        anyd = neq.any(axis=1)
        first = neq.argmax(axis=1)
        reflected = anyd & (comp[rows, first] < child[rows, first])
        canon = np.where(reflected[:, None], comp, child)
        blob = canon.tobytes()
        src = idx.tolist()
        refl = reflected.tolist()
        selfc = (~anyd).tolist()
        if dead is not None:
            dir_spec, ref_spec = dead
            dead_d = _dead_mask(canon, dir_spec)
            dead_r = _dead_mask(canon, ref_spec)
        off = 0
        for j in range(idx.size):
            row = src[j]
            d = mult_d[row]
            r = mult_r[row]
            if selfc[j]:
                dd, rr = d + r, 0
            elif refl[j]:
                dd, rr = r, d
            else:
                dd, rr = d, r
            if dead is not None:
                if dead_d[j]:
                    dd = 0
                if dead_r[j]:
                    rr = 0
                if dd == 0 and rr == 0:
                    off += w
                    continue
            ckey = blob[off : off + w]
            off += w
            cur = get(ckey)
            if cur is None:
                acc[ckey] = [dd, rr]
            else:
                cur[0] += dd
                cur[1] += rr
    return acc


def _dead_mask(canon, spec):
    a, b, pair_check = spec
    mask = canon[:, 2 * a] == 0
    if b is not None:
        mask = mask | (canon[:, 2 * b] == 0)
        if pair_check:
            mask = mask | (canon[:, 2 * a + 1] == b)
    return mask.tolist()


def _expand_items(n, k, items, constraint, prune, engine):
    dead = _dead_columns(n, k - 1, constraint) if prune else None
    if engine == "python" or (engine == "auto" and len(items) < _NUMPY_MIN_ROWS):
        return _expand_items_python(n, k, items, dead)
    return _expand_items_numpy(n, k, items, dead)


def _expand_chunk(args):
    n, k, items, constraint, prune, engine = args
    return _expand_items(n, k, items, constraint, prune, engine)


def _merge_into(acc: dict[bytes, list[int]], part: dict[bytes, list[int]]) -> None:
    get = acc.get
    for key, dr in part.items():
        cur = get(key)
        if cur is None:
            acc[key] = dr
        else:
            cur[0] += dr[0]
            cur[1] += dr[1]


def expand_level(
    cmap: ClassMap,
    constraint: Constraint = None,
    *,
    prune: bool = True,
    engine: str = "auto",
) -> ClassMap:
    """One BFS step: place the edge labelled ``cmap.level`` everywhere.

    Children are regrouped by canonical key; a parent's direct count
    flows into the slot named by the child's orientation flag and its
    reflected count into the opposite slot, collapsing into the direct
    slot for self-complementary children.  With ``prune`` set, slots
    whose orientation can no longer satisfy the constraint are zeroed
    and entries with both slots zero are dropped.
    """
    if cmap.level < 1:
        raise ValueError(f"cannot expand a terminal map (level {cmap.level})")
    items = [(key, p[0], p[1]) for key, p in cmap.entries.items()]
    acc = _expand_items(cmap.n, cmap.level, items, constraint, prune, engine)
    entries = {key: MultiplicityPair(dr[0], dr[1]) for key, dr in acc.items()}
    return ClassMap(cmap.n, cmap.level - 1, entries)


def finalize(cmap: ClassMap, constraint: Constraint = None) -> int:
    """Read the count off a terminal map.

    Unconstrained, every terminal node is doubled (a path is read from
    either end); with a start label fixed, each matching node is read in
    exactly one direction.
    """
    if cmap.level != 0:
        raise ValueError(f"finalize needs a terminal map, got level {cmap.level}")
    if constraint is None:
        return 2 * cmap.node_sum()
    n = cmap.n
    last = n - 1
    total = 0
    if isinstance(constraint, OneEndpoint):
        a = constraint.a
        ar = last - a
        for key, (d, r) in cmap.entries.items():
            if d and key[2 * a] == 1:
                total += d
            if r and key[2 * ar] == 1:
                total += r
        return total
    a, b = constraint.a, constraint.b
    ar, br = last - a, last - b
    for key, (d, r) in cmap.entries.items():
        # A terminal key has exactly two endpoint labels, so checking
        # membership of both required labels checks set equality.
        if d and a != b and key[2 * a] == 1 and key[2 * b] == 1:
            total += d
        if r and ar != br and key[2 * ar] == 1 and key[2 * br] == 1:
            total += r
    return total


def count(
    n: int,
    constraint: Constraint = None,
    *,
    workers: int = 1,
    prune: bool = True,
    engine: str = "auto",
    initial: Optional[ClassMap] = None,
    on_level: Optional[Callable[[ClassMap], None]] = None,
) -> CountResult:
    """Exact count of graceful permutations satisfying the constraint.

    ``workers`` > 1 splits each level across processes; results are
    bit-identical to the single-worker run because the per-class merge is
    associative and commutative.  ``initial`` resumes from a previously
    saved map; ``on_level`` is called after every completed level.
    """
    t0 = time.perf_counter()
    if n < 1:
        raise ValueError(f"label count must be >= 1, got {n}")
    _check_constraint(n, constraint)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if n == 1:
        value = _single_vertex_count(constraint)
        stats = (LevelStats(0, 1, 1, 0.0),)
        return CountResult(n, constraint, value, stats, time.perf_counter() - t0)

    if initial is not None:
        if initial.n != n:
            raise ValueError(f"initial map is for n={initial.n}, not n={n}")
        cmap = initial
    else:
        cmap = root_map(n)
    stats = [LevelStats(cmap.level, len(cmap.entries), cmap.node_sum(), 0.0)]

    pool = None
    try:
        if workers > 1:
            pool = multiprocessing.get_context("fork").Pool(workers)
        while cmap.level > 0:
            t1 = time.perf_counter()
            if pool is not None and len(cmap.entries) >= _PARALLEL_MIN_ROWS:
                cmap = _expand_parallel(cmap, constraint, prune, engine, pool, workers)
            else:
                cmap = expand_level(cmap, constraint, prune=prune, engine=engine)
            stats.append(
                LevelStats(
                    cmap.level,
                    len(cmap.entries),
                    cmap.node_sum(),
                    time.perf_counter() - t1,
                )
            )
            if on_level is not None:
                on_level(cmap)
    finally:
        if pool is not None:
            pool.close()
            pool.join()

    value = finalize(cmap, constraint)
    return CountResult(n, constraint, value, tuple(stats), time.perf_counter() - t0)


def _expand_parallel(cmap, constraint, prune, engine, pool, workers) -> ClassMap:
    items = [(key, p[0], p[1]) for key, p in cmap.entries.items()]
    step = (len(items) + workers - 1) // workers
    chunks = [items[i : i + step] for i in range(0, len(items), step)]
    jobs = [(cmap.n, cmap.level, chunk, constraint, prune, engine) for chunk in chunks]
    parts = pool.map(_expand_chunk, jobs)
    acc = parts[0]
    for part in parts[1:]:
        _merge_into(acc, part)
    entries = {key: MultiplicityPair(dr[0], dr[1]) for key, dr in acc.items()}
    return ClassMap(cmap.n, cmap.level - 1, entries)
