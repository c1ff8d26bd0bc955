"""Partial-permutation states of the path search tree.

A partial permutation is a disjoint collection of label paths obtained by
placing the largest absolute differences first.  Per label we keep the
remaining degree capacity (``free``, 0..2) and, for labels that currently
end a partial path, the label at the opposite end of that path (``forb``):
joining those two would close a cycle.  Labels that are unused or interior
are self-paired, which makes plain tuple equality coincide with the
identity clause of the state equivalence.

States are immutable values; ``add_edge`` returns a new state.  The byte
encoding below is both the folding key (after taking the lexicographic
minimum with the complemented encoding) and the checkpoint record layout.
"""

from __future__ import annotations

from dataclasses import dataclass

#: Partner byte for labels that are not path endpoints.
SENTINEL = 0xFF

#: The two-byte-per-label encoding reserves 0xFF, so labels fit in 0..253.
MAX_LABELS = 254

__all__ = [
    "SENTINEL",
    "MAX_LABELS",
    "PartialState",
    "new_root",
    "candidate_pairs",
    "can_add_edge",
    "add_edge",
    "complement",
    "encode",
    "decode",
    "complement_key",
    "canonicalize",
    "validate_state",
]


@dataclass(frozen=True, slots=True)
class PartialState:
    """One node of the search tree: slot counts and endpoint pairing."""

    n: int
    next_edge_label: int
    free: tuple[int, ...]
    forb: tuple[int, ...]

    @property
    def edges_placed(self) -> int:
        return self.n - 1 - self.next_edge_label

    @property
    def is_terminal(self) -> bool:
        return self.next_edge_label == 0

    def endpoints(self) -> frozenset[int]:
        """Labels that currently end a partial path."""
        return frozenset(u for u in range(self.n) if self.free[u] == 1)


def new_root(n: int) -> PartialState:
    """Empty partial permutation on ``n`` labels: no edges placed yet."""
    if n < 1:
        raise ValueError(f"label count must be >= 1, got {n}")
    if n > MAX_LABELS:
        raise ValueError(f"label count must be <= {MAX_LABELS}, got {n}")
    return PartialState(n, n - 1, (2,) * n, tuple(range(n)))


def candidate_pairs(n: int, k: int) -> list[tuple[int, int]]:
    """All label pairs whose difference is ``k``: (i, i+k) for rising i."""
    return [(i, i + k) for i in range(n - k)]


def can_add_edge(s: PartialState, u: int, v: int) -> bool:
    """An edge may join u and v iff both have a free slot and are not
    opposite ends of the same partial path."""
    return s.free[u] != 0 and s.free[v] != 0 and s.forb[u] != v


def add_edge(s: PartialState, u: int, v: int) -> PartialState:
    """Return the state with the edge u-v placed.

    Caller must ensure ``|u - v| == s.next_edge_label`` and
    ``can_add_edge(s, u, v)``; both are asserted here rather than checked
    unconditionally because this sits on the search hot path.
    """
    assert u != v and abs(u - v) == s.next_edge_label, "wrong edge label"
    assert can_add_edge(s, u, v), "edge addition precondition violated"
    free = list(s.free)
    forb = list(s.forb)
    # Both right-hand sides are read from the pre-state (simultaneous
    # assignment); pu == u / pv == v exactly when the label was unused.
    pu, pv = forb[u], forb[v]
    free[u] -= 1
    free[v] -= 1
    forb[pu] = pv
    forb[pv] = pu
    if free[u] == 0:
        forb[u] = u
    if free[v] == 0:
        forb[v] = v
    return PartialState(s.n, s.next_edge_label - 1, tuple(free), tuple(forb))


def complement(s: PartialState) -> PartialState:
    """Relabel every label u as n-1-u; gracefulness is preserved."""
    n = s.n
    last = n - 1
    free = tuple(s.free[last - u] for u in range(n))
    forb = tuple(
        last - s.forb[last - u] if free[u] == 1 else u for u in range(n)
    )
    return PartialState(n, s.next_edge_label, free, forb)


def encode(s: PartialState) -> bytes:
    """Two bytes per label: free count, then partner or the sentinel."""
    out = bytearray(2 * s.n)
    for u in range(s.n):
        f = s.free[u]
        out[2 * u] = f
        out[2 * u + 1] = s.forb[u] if f == 1 else SENTINEL
    return bytes(out)


def decode(key: bytes) -> PartialState:
    """Rebuild a state from its byte encoding, validating all invariants."""
    if len(key) % 2 != 0 or len(key) == 0:
        raise ValueError(f"state key must have even positive length, got {len(key)}")
    n = len(key) // 2
    free = tuple(key[0::2])
    forb = tuple(key[2 * u + 1] if free[u] == 1 else u for u in range(n))
    slots_used = sum(2 - f for f in free)
    if slots_used % 2 != 0:
        raise ValueError("odd slot sum: key does not describe a valid state")
    level = n - 1 - slots_used // 2
    s = PartialState(n, level, free, forb)
    validate_state(s)
    return s


def complement_key(key: bytes) -> bytes:
    """Encoding of the complemented state, computed directly on the bytes."""
    n = len(key) // 2
    last = n - 1
    out = bytearray(2 * n)
    for u in range(n):
        src = 2 * (last - u)
        out[2 * u] = key[src]
        p = key[src + 1]
        out[2 * u + 1] = p if p == SENTINEL else last - p
    return bytes(out)


def canonicalize(s: PartialState) -> tuple[bytes, bool]:
    """Class representative key and orientation of ``s`` within the class.

    The key is the lexicographic minimum of the encodings of the state and
    its complement.  The flag is True ("reflected") only when the
    complement's encoding is strictly smaller; self-complementary
    encodings tie and count as direct.
    """
    direct = encode(s)
    reflected = complement_key(direct)
    if reflected < direct:
        return reflected, True
    return direct, False


def validate_state(s: PartialState) -> None:
    """Raise ValueError if any structural invariant is broken."""
    n = s.n
    if n < 1 or n > MAX_LABELS:
        raise ValueError(f"label count {n} out of range")
    if len(s.free) != n or len(s.forb) != n:
        raise ValueError("free/forb arrays must have length n")
    if not 0 <= s.next_edge_label <= n - 1:
        raise ValueError(f"next edge label {s.next_edge_label} out of range for n={n}")
    slots_used = 0
    for u in range(n):
        f = s.free[u]
        if f not in (0, 1, 2):
            raise ValueError(f"free[{u}]={f} outside 0..2")
        slots_used += 2 - f
        p = s.forb[u]
        if f == 1:
            if not 0 <= p < n or p == u:
                raise ValueError(f"endpoint {u} paired with invalid label {p}")
            if s.free[p] != 1 or s.forb[p] != u:
                raise ValueError(f"forb is not an involution at {u}<->{p}")
        elif p != u:
            raise ValueError(f"non-endpoint {u} must be self-paired, got {p}")
    if slots_used != 2 * s.edges_placed:
        raise ValueError(
            f"slot sum {slots_used} does not match {s.edges_placed} placed edges"
        )
    if s.is_terminal and n >= 2:
        ends = [u for u in range(n) if s.free[u] == 1]
        if len(ends) != 2:
            raise ValueError("terminal state must have exactly two endpoints")
