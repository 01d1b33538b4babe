"""Adaptive k-query reduction protocols and their affine win-probability family.

A deterministic k-query protocol queries a target box k times, each query a
function of the party's own input and the responses seen so far, then emits
an output.  Response prefixes index map tables as base-|A2| integers with
the most recent response least significant.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .boxes import NORM_TOL, CorrelationBox, local_box, mix, tv_closeness

ENUMERATION_CAP = 10 ** 8
DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class Alphabets:
    """Outer and inner alphabet sizes of a protocol."""

    x1: int
    y1: int
    a1: int
    b1: int
    x2: int
    y2: int
    a2: int
    b2: int

    def __post_init__(self):
        if min(self.x1, self.y1, self.a1, self.b1,
               self.x2, self.y2, self.a2, self.b2) < 1:
            raise ValueError("alphabet sizes must be positive")


BINARY = Alphabets(2, 2, 2, 2, 2, 2, 2, 2)


@dataclass(frozen=True)
class DeterministicProtocol:
    """Flat-table form of a deterministic k-query protocol.

    ``q_maps[i]`` has length x1 * a2**i, indexed x * a2**i + prefix;
    ``s_map`` has length x1 * a2**k, same indexing.  Bob's maps mirror these.
    """

    alphabets: Alphabets
    k: int
    q_maps: tuple         # k tuples of ints in range(x2)
    r_maps: tuple         # k tuples of ints in range(y2)
    s_map: tuple          # ints in range(a1)
    t_map: tuple          # ints in range(b1)

    def __post_init__(self):
        al = self.alphabets
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if len(self.q_maps) != self.k or len(self.r_maps) != self.k:
            raise ValueError("need one query map per query")
        for i in range(self.k):
            if len(self.q_maps[i]) != al.x1 * al.a2 ** i:
                raise ValueError("q_maps[%d] has wrong length" % i)
            if len(self.r_maps[i]) != al.y1 * al.b2 ** i:
                raise ValueError("r_maps[%d] has wrong length" % i)
            if any(not 0 <= v < al.x2 for v in self.q_maps[i]):
                raise ValueError("query value out of range")
            if any(not 0 <= v < al.y2 for v in self.r_maps[i]):
                raise ValueError("query value out of range")
        if len(self.s_map) != al.x1 * al.a2 ** self.k:
            raise ValueError("s_map has wrong length")
        if len(self.t_map) != al.y1 * al.b2 ** self.k:
            raise ValueError("t_map has wrong length")
        if any(not 0 <= v < al.a1 for v in self.s_map):
            raise ValueError("output value out of range")
        if any(not 0 <= v < al.b1 for v in self.t_map):
            raise ValueError("output value out of range")


@dataclass(frozen=True)
class RandomizedProtocol:
    """Finite mixture of deterministic protocols; models shared randomness."""

    protocols: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.protocols) == 0 or len(self.protocols) != len(self.weights):
            raise ValueError("need one weight per protocol")
        if any(w < -NORM_TOL for w in self.weights):
            raise ValueError("negative weight")
        if abs(sum(self.weights) - 1.0) > NORM_TOL:
            raise ValueError("weights do not sum to 1 within %g" % NORM_TOL)
        first = self.protocols[0].alphabets
        if any(pi.alphabets != first for pi in self.protocols):
            raise ValueError("alphabet mismatch among protocols")


@dataclass(frozen=True)
class AffineFunction:
    """ell(p) = intercept + slope * p."""

    intercept: float
    slope: float

    def __post_init__(self):
        if not (np.isfinite(self.intercept) and np.isfinite(self.slope)):
            raise ValueError("coefficients must be finite")

    def __call__(self, p):
        return self.intercept + self.slope * np.asarray(p, dtype=np.float64)

    def key(self, tol: float = DEDUP_TOL):
        scale = 1.0 / tol
        return (round(self.intercept * scale), round(self.slope * scale))


def _check_target(protocol: DeterministicProtocol, target: CorrelationBox) -> None:
    al = protocol.alphabets
    if target.table.shape != (al.x2, al.y2, al.a2, al.b2):
        raise ValueError("target alphabets do not match the protocol")


def identity_protocol(al: Alphabets = BINARY) -> DeterministicProtocol:
    """1-query pass-through: query your own input, output the response."""
    if (al.x1, al.y1) != (al.x2, al.y2) or (al.a1, al.b1) != (al.a2, al.b2):
        raise ValueError("pass-through needs matching outer and inner alphabets")
    q = tuple(x for x in range(al.x1) for _ in range(1))
    r = tuple(y for y in range(al.y1) for _ in range(1))
    s = tuple(a for _ in range(al.x1) for a in range(al.a2))
    t = tuple(b for _ in range(al.y1) for b in range(al.b2))
    return DeterministicProtocol(al, 1, (q,), (r,), s, t)


def induced_box(protocol: DeterministicProtocol,
                target: CorrelationBox) -> CorrelationBox:
    """Exact box the protocol induces by summing over all response paths."""
    _check_target(protocol, target)
    al = protocol.alphabets
    k = protocol.k
    if (al.a2 * al.b2) ** k > ENUMERATION_CAP:
        raise ValueError("response-path count exceeds the enumeration cap")
    table = np.zeros((al.x1, al.y1, al.a1, al.b1))
    t_table = target.table
    for x in range(al.x1):
        for y in range(al.y1):
            out = table[x, y]
            # depth-first over joint response paths, O(1) state per level
            stack = [(0, 0, 0, 1.0)]  # (depth, a_prefix, b_prefix, weight)
            while stack:
                depth, a_prefix, b_prefix, weight = stack.pop()
                if depth == k:
                    out[protocol.s_map[x * al.a2 ** k + a_prefix],
                        protocol.t_map[y * al.b2 ** k + b_prefix]] += weight
                    continue
                xi = protocol.q_maps[depth][x * al.a2 ** depth + a_prefix]
                yi = protocol.r_maps[depth][y * al.b2 ** depth + b_prefix]
                row = t_table[xi, yi]
                for ai in range(al.a2):
                    for bi in range(al.b2):
                        w = weight * row[ai, bi]
                        if w > 0.0:
                            stack.append((depth + 1,
                                          a_prefix * al.a2 + ai,
                                          b_prefix * al.b2 + bi, w))
    return CorrelationBox(table)


def induced_box_randomized(protocol: RandomizedProtocol,
                           target: CorrelationBox) -> CorrelationBox:
    boxes = [induced_box(pi, target) for pi in protocol.protocols]
    return mix(boxes, protocol.weights)


def check_reduction(protocol, target: CorrelationBox, source: CorrelationBox,
                    epsilon: float) -> tuple[bool, float]:
    """Is the induced box epsilon-close to the source?  Returns (ok, achieved TV)."""
    if isinstance(protocol, RandomizedProtocol):
        induced = induced_box_randomized(protocol, target)
    else:
        induced = induced_box(protocol, target)
    achieved = tv_closeness(induced, source)
    return achieved <= epsilon, achieved


def count_protocols(al: Alphabets, k: int) -> int:
    """Exact number of deterministic k-query protocols over the given alphabets."""
    n = 1
    for i in range(k):
        n *= al.x2 ** (al.x1 * al.a2 ** i)
        n *= al.y2 ** (al.y1 * al.b2 ** i)
    n *= al.a1 ** (al.x1 * al.a2 ** k)
    n *= al.b1 ** (al.y1 * al.b2 ** k)
    return n


def counting_bound(al: Alphabets, k: int) -> int:
    """(2|X|)^(2|A|^k) * (2|Y|)^(2|B|^k), valid for binary outer alphabets."""
    return (2 * al.x2) ** (2 * al.a2 ** k) * (2 * al.y2) ** (2 * al.b2 ** k)


def enumerate_protocols(al: Alphabets, k: int, cap: int = ENUMERATION_CAP):
    """Yield every deterministic k-query protocol exactly once."""
    total = count_protocols(al, k)
    if total > cap:
        raise ValueError("protocol count %d exceeds cap %d" % (total, cap))
    q_spaces = [itertools.product(range(al.x2), repeat=al.x1 * al.a2 ** i)
                for i in range(k)]
    r_spaces = [itertools.product(range(al.y2), repeat=al.y1 * al.b2 ** i)
                for i in range(k)]
    s_space = itertools.product(range(al.a1), repeat=al.x1 * al.a2 ** k)
    t_space = itertools.product(range(al.b1), repeat=al.y1 * al.b2 ** k)
    for parts in itertools.product(*q_spaces, *r_spaces, s_space, t_space):
        q_maps = parts[:k]
        r_maps = parts[k:2 * k]
        s_map, t_map = parts[2 * k], parts[2 * k + 1]
        yield DeterministicProtocol(al, k, q_maps, r_maps, s_map, t_map)


def _parity_win_probs(protocol: DeterministicProtocol,
                      target: CorrelationBox) -> np.ndarray:
    """P[x, y] = Pr[a xor b = x*y] of the induced box; binary outer alphabets."""
    al = protocol.alphabets
    if (al.x1, al.y1, al.a1, al.b1) != (2, 2, 2, 2):
        raise ValueError("parity win probabilities need binary outer alphabets")
    t_table = target.table
    k = protocol.k
    out = np.zeros((2, 2))
    for x in range(2):
        for y in range(2):
            want = x * y
            win = 0.0
            stack = [(0, 0, 0, 1.0)]
            while stack:
                depth, a_prefix, b_prefix, weight = stack.pop()
                if depth == k:
                    a = protocol.s_map[x * al.a2 ** k + a_prefix]
                    b = protocol.t_map[y * al.b2 ** k + b_prefix]
                    if (a ^ b) == want:
                        win += weight
                    continue
                xi = protocol.q_maps[depth][x * al.a2 ** depth + a_prefix]
                yi = protocol.r_maps[depth][y * al.b2 ** depth + b_prefix]
                row = t_table[xi, yi]
                for ai in range(al.a2):
                    for bi in range(al.b2):
                        w = weight * row[ai, bi]
                        if w > 0.0:
                            stack.append((depth + 1,
                                          a_prefix * al.a2 + ai,
                                          b_prefix * al.b2 + bi, w))
            out[x, y] = win
    return out


def affine_of(protocol: DeterministicProtocol,
              target: CorrelationBox) -> AffineFunction:
    """Win probability of the protocol in CHSH[p, 1/2], as a function of p."""
    p = _parity_win_probs(protocol, target)
    intercept = 0.5 * (p[0, 0] + p[0, 1])
    slope = 0.5 * (p[1, 0] + p[1, 1] - p[0, 0] - p[0, 1])
    return AffineFunction(intercept, slope)


def _family_coefficients(target: CorrelationBox, k: int, cap: int):
    """Set of (intercept, slope) pairs over all deterministic k-query
    protocols, computed on raw map tuples (no protocol objects) for speed."""
    al = Alphabets(2, 2, 2, 2, target.x_size, target.y_size,
                   target.a_size, target.b_size)
    total = count_protocols(al, k)
    if total > cap:
        raise ValueError("protocol count %d exceeds cap %d" % (total, cap))
    rows = [[target.table[xi, yi].ravel().tolist() for yi in range(al.y2)]
            for xi in range(al.x2)]
    a2, b2 = al.a2, al.b2
    a_pow, b_pow = a2 ** k, b2 ** k
    q_spaces = [list(itertools.product(range(al.x2), repeat=2 * a2 ** i))
                for i in range(k)]
    r_spaces = [list(itertools.product(range(al.y2), repeat=2 * b2 ** i))
                for i in range(k)]
    s_space = list(itertools.product(range(2), repeat=2 * a_pow))
    t_space = list(itertools.product(range(2), repeat=2 * b_pow))
    pairs = set()
    for parts in itertools.product(*q_spaces, *r_spaces, s_space, t_space):
        q_maps, r_maps = parts[:k], parts[k:2 * k]
        s_map, t_map = parts[2 * k], parts[2 * k + 1]
        wins = [0.0, 0.0, 0.0, 0.0]          # P_00, P_01, P_10, P_11
        for x in (0, 1):
            for y in (0, 1):
                want = x & y
                win = 0.0
                stack = [(0, 0, 0, 1.0)]
                while stack:
                    depth, ap, bp, weight = stack.pop()
                    if depth == k:
                        if (s_map[x * a_pow + ap] ^ t_map[y * b_pow + bp]) == want:
                            win += weight
                        continue
                    row = rows[q_maps[depth][x * a2 ** depth + ap]][
                        r_maps[depth][y * b2 ** depth + bp]]
                    base = 0
                    for ai in range(a2):
                        for bi in range(b2):
                            w = weight * row[base + bi]
                            if w > 0.0:
                                stack.append((depth + 1, ap * a2 + ai,
                                              bp * b2 + bi, w))
                        base += b2
                    continue
                wins[2 * x + y] = win
        intercept = 0.5 * (wins[0] + wins[1])
        slope = 0.5 * (wins[2] + wins[3]) - intercept
        pairs.add((intercept, slope))
    return pairs


def affine_family(target: CorrelationBox, k: int, *, up_to_k: bool = False,
                  tol: float = DEDUP_TOL,
                  cap: int = ENUMERATION_CAP) -> list[AffineFunction]:
    """All distinct win-probability lines of deterministic k-query protocols.

    With ``up_to_k`` the union over query counts 0..k is returned; the
    default is exactly k queries.  Lines are deduplicated with tolerance
    ``tol`` on the coefficient pair.
    """
    ks = range(k + 1) if up_to_k else (k,)
    seen: dict = {}
    for kk in ks:
        for intercept, slope in _family_coefficients(target, kk, cap):
            ell = AffineFunction(intercept, slope)
            seen.setdefault(ell.key(tol), ell)
    return list(seen.values())


def local_deterministic_boxes():
    """All 16 deterministic local binary boxes (a = f(x), b = g(y))."""
    out = []
    for f in itertools.product(range(2), repeat=2):
        for g in itertools.product(range(2), repeat=2):
            out.append(local_box(f, g, a_size=2, b_size=2))
    return out


def protocol_to_json(protocol: DeterministicProtocol) -> str:
    al = protocol.alphabets
    payload = {
        "alphabets": [al.x1, al.y1, al.a1, al.b1, al.x2, al.y2, al.a2, al.b2],
        "k": protocol.k,
        "q_maps": [list(m) for m in protocol.q_maps],
        "r_maps": [list(m) for m in protocol.r_maps],
        "s_map": list(protocol.s_map),
        "t_map": list(protocol.t_map),
    }
    return json.dumps(payload)


def protocol_from_json(text: str) -> DeterministicProtocol:
    payload = json.loads(text)
    al = Alphabets(*payload["alphabets"])
    return DeterministicProtocol(
        al, int(payload["k"]),
        tuple(tuple(m) for m in payload["q_maps"]),
        tuple(tuple(m) for m in payload["r_maps"]),
        tuple(payload["s_map"]), tuple(payload["t_map"]),
    )
