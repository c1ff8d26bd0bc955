"""State representation: edge addition, complementation, canonical keys.

The exhaustive sweeps enumerate every reachable search-tree node for
small n and check the structural invariants on all of them, including
that canonical-key equality coincides exactly with the two-clause state
equivalence (identical, or identical after complementing one side).
"""

from __future__ import annotations

import pytest

from gracefulperms.state import (
    MAX_LABELS,
    SENTINEL,
    PartialState,
    add_edge,
    can_add_edge,
    candidate_pairs,
    canonicalize,
    complement,
    complement_key,
    decode,
    encode,
    new_root,
    validate_state,
)


def _all_reachable(n):
    """Every node of the search tree, grouped by next edge label."""
    by_level = {}

    def rec(s):
        by_level.setdefault(s.next_edge_label, []).append(s)
        if s.next_edge_label == 0:
            return
        for u, v in candidate_pairs(n, s.next_edge_label):
            if can_add_edge(s, u, v):
                rec(add_edge(s, u, v))

    rec(new_root(n))
    return by_level


def _path_state(n, *edges):
    s = new_root(n)
    for u, v in edges:
        s = add_edge(s, u, v)
    return s


def _clause_one(s1, s2):
    return s1.free == s2.free and all(
        s1.forb[u] == s2.forb[u] for u in range(s1.n) if s1.free[u] == 1
    )


def _equivalent(s1, s2):
    return _clause_one(s1, s2) or _clause_one(s1, complement(s2))


# -- construction -----------------------------------------------------------


def test_new_root_n2():
    s = new_root(2)
    assert s.free == (2, 2)
    assert s.forb == (0, 1)
    assert s.next_edge_label == 1


def test_new_root_n7():
    s = new_root(7)
    assert s.free == (2,) * 7
    assert s.forb == tuple(range(7))
    assert s.next_edge_label == 6


def test_new_root_single_label_is_terminal():
    s = new_root(1)
    assert s.next_edge_label == 0
    assert s.is_terminal


def test_new_root_rejects_zero():
    with pytest.raises(ValueError):
        new_root(0)


def test_new_root_rejects_oversize():
    with pytest.raises(ValueError):
        new_root(MAX_LABELS + 1)


@pytest.mark.parametrize(
    "n,k,expected",
    [
        (7, 6, [(0, 6)]),
        (7, 5, [(0, 5), (1, 6)]),
        (4, 1, [(0, 1), (1, 2), (2, 3)]),
    ],
)
def test_candidate_pairs(n, k, expected):
    assert candidate_pairs(n, k) == expected


# -- edge addition ----------------------------------------------------------


def test_can_add_after_first_edge():
    s = _path_state(7, (0, 6))
    assert can_add_edge(s, 0, 5)
    assert can_add_edge(s, 1, 6)


def test_can_add_rejects_cycle_and_full_label():
    # path 2-0-3 on four labels: 0 is interior, ends 2 and 3 are paired
    s = _path_state(4, (0, 3), (0, 2))
    assert s.free == (0, 2, 1, 1)
    assert not can_add_edge(s, 2, 3)  # would close the cycle 2-0-3-2
    assert not can_add_edge(s, 0, 1)  # 0 has no free slot left
    assert can_add_edge(s, 1, 2)


def test_add_edge_two_unused():
    s = add_edge(new_root(7), 0, 6)
    assert s.next_edge_label == 5
    assert s.free[0] == s.free[6] == 1
    assert s.forb[0] == 6 and s.forb[6] == 0


def test_add_edge_extends_path():
    s = _path_state(7, (0, 6), (0, 5))  # path 5-0-6
    assert s.free[0] == 0
    assert s.forb[5] == 6 and s.forb[6] == 5
    assert s.forb[0] == 0  # interior labels are self-paired


def test_add_edge_joins_two_paths():
    # build the two paths 4-0-6-1 and 2-5, then join their ends 2 and 4
    s = _path_state(7, (0, 6), (1, 6), (0, 4), (2, 5))
    assert s.forb[4] == 1 and s.forb[2] == 5
    s = add_edge(s, 2, 4)
    assert s.forb[5] == 1 and s.forb[1] == 5  # merged path runs 5-2-4-0-6-1
    assert s.free[2] == s.free[4] == 0


def test_add_edge_join_rule_on_detached_paths():
    # paths 1-6 and 0-5 joined by the edge 5-6; such a state cannot arise
    # from consecutive edge labels, so it is built directly to exercise
    # the endpoints-of-different-paths branch of the update rule alone.
    s = PartialState(7, 1, (1, 1, 2, 2, 2, 1, 1), (5, 6, 2, 3, 4, 0, 1))
    assert s.forb[1] == 6 and s.forb[0] == 5
    s = add_edge(s, 5, 6)
    assert s.forb[1] == 0 and s.forb[0] == 1
    assert s.free[5] == s.free[6] == 0


def test_add_edge_precondition_is_asserted():
    s = _path_state(4, (0, 3), (0, 2))
    with pytest.raises(AssertionError):
        add_edge(s, 2, 3)  # forb-paired
    with pytest.raises(AssertionError):
        add_edge(s, 1, 3)  # wrong difference for the next edge label


# -- complementation --------------------------------------------------------


def test_complement_fixes_symmetric_path():
    s = _path_state(7, (0, 6))
    assert complement(s) == s


def test_complement_maps_path_5_0_6():
    s = _path_state(7, (0, 6), (0, 5))  # path 5-0-6, ends {5, 6}
    c = complement(s)
    # relabeled through u -> 6-u the path becomes 1-6-0, ends {0, 1}
    assert c.endpoints() == frozenset({0, 1})
    assert c.free[6] == 0
    assert c.forb[0] == 1 and c.forb[1] == 0


@pytest.mark.parametrize("n", range(1, 8))
def test_complement_is_involution(n):
    for states in _all_reachable(n).values():
        for s in states:
            assert complement(complement(s)) == s


# -- canonical keys ---------------------------------------------------------


def test_canonicalize_complement_pair():
    s1 = _path_state(7, (0, 6), (0, 5))  # path 5-0-6
    s2 = _path_state(7, (0, 6), (1, 6))  # path 0-6-1, its complement
    k1, r1 = canonicalize(s1)
    k2, r2 = canonicalize(s2)
    assert k1 == k2
    assert (r1, r2) == (False, True)


def test_canonicalize_self_complementary_is_direct():
    key, reflected = canonicalize(_path_state(7, (0, 6)))
    assert not reflected
    assert complement_key(key) == key


@pytest.mark.parametrize("n", range(2, 8))
def test_key_equality_is_exactly_state_equivalence(n):
    for states in _all_reachable(n).values():
        keys = [canonicalize(s)[0] for s in states]
        for i, s in enumerate(states):
            for j, t in enumerate(states):
                assert (keys[i] == keys[j]) == _equivalent(s, t)


@pytest.mark.parametrize("n", range(1, 8))
def test_canonical_key_invariant_under_complement(n):
    for states in _all_reachable(n).values():
        for s in states:
            assert canonicalize(s)[0] == canonicalize(complement(s))[0]


# -- encoding ---------------------------------------------------------------


def test_encoding_layout():
    s = _path_state(7, (0, 6), (0, 5))  # path 5-0-6
    key = encode(s)
    assert len(key) == 14
    assert key[0] == 0 and key[1] == SENTINEL  # interior label 0
    assert key[2] == 2 and key[3] == SENTINEL  # unused label 1
    assert key[10] == 1 and key[11] == 6  # endpoint 5 paired with 6
    assert key[12] == 1 and key[13] == 5


@pytest.mark.parametrize("n", range(1, 8))
def test_encode_decode_round_trip(n):
    for states in _all_reachable(n).values():
        for s in states:
            back = decode(encode(s))
            assert back == s  # forb is normalized, so equality is clause one


def test_decode_rejects_bad_keys():
    with pytest.raises(ValueError):
        decode(b"")
    with pytest.raises(ValueError):
        decode(b"\x02\xff\x01")  # odd length
    with pytest.raises(ValueError):
        decode(b"\x01\x01\x02\xff")  # endpoint paired with an unused label
    with pytest.raises(ValueError):
        decode(b"\x03\xff\x02\xff")  # free count out of range
    with pytest.raises(ValueError):
        decode(b"\x01\xff\x02\xff")  # endpoint with sentinel partner


# -- structural invariants over every reachable state ------------------------


@pytest.mark.parametrize("n", range(1, 8))
def test_reachable_states_satisfy_invariants(n):
    for level, states in _all_reachable(n).items():
        for s in states:
            validate_state(s)
            assert s.next_edge_label == level
            assert sum(2 - f for f in s.free) == 2 * s.edges_placed


@pytest.mark.parametrize("n", range(2, 9))
def test_terminal_states_are_single_paths(n):
    """Every leaf is one simple path over all labels: two mutually paired
    endpoints, everything else interior, and the tracked edge set is
    connected and acyclic."""
    leaves = []

    def rec(s, edges):
        if s.next_edge_label == 0:
            leaves.append((s, edges))
            return
        for u, v in candidate_pairs(n, s.next_edge_label):
            if can_add_edge(s, u, v):
                rec(add_edge(s, u, v), edges + [(u, v)])

    rec(new_root(n), [])
    assert leaves
    for s, edges in leaves:
        ends = s.endpoints()
        assert len(ends) == 2
        a, b = sorted(ends)
        assert s.forb[a] == b and s.forb[b] == a
        assert all(s.free[u] == 0 for u in range(n) if u not in ends)
        # walk the edge set from one endpoint and confirm a spanning path
        adj = {u: [] for u in range(n)}
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        seq = [a]
        prev = None
        while len(seq) < n:
            nxt = [w for w in adj[seq[-1]] if w != prev]
            assert len(nxt) == 1
            prev = seq[-1]
            seq.append(nxt[0])
        assert seq[-1] == b
        assert sorted(seq) == list(range(n))
