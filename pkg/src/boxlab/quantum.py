"""Two-qubit machinery: unitaries, Bloch geometry, and BELL-member boxes.

Bloch convention used throughout:
    |0> -> (0, 0, +1),  |1> -> (0, 0, -1),  |+> -> (1, 0, 0),  |+i> -> (0, 1, 0).

The two maximally entangled states are stored explicitly:
``PHI_PLUS`` = (|00> + |11>)/sqrt(2) and ``SINGLET`` = (|01> - |10>)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boxes import CorrelationBox, JointDistribution

UNITARY_TOL = 1e-10

PHI_PLUS = np.array([1.0, 0.0, 0.0, 1.0], dtype=np.complex128) / np.sqrt(2.0)
SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / np.sqrt(2.0)
KET0 = np.array([1.0, 0.0], dtype=np.complex128)
KET1 = np.array([0.0, 1.0], dtype=np.complex128)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2):
        return False
    return bool(np.abs(u.conj().T @ u - np.eye(2)).max() <= tol)


def _require_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if not is_unitary(u):
        raise ValueError("matrix is not unitary within %g" % UNITARY_TOL)
    return u


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 2x2 unitary (QR of a complex Gaussian, phase-fixed)."""
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    # make the distribution Haar by absorbing the phases of diag(r)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q


def bloch_of(psi: np.ndarray) -> np.ndarray:
    """Bloch vector of a normalized single-qubit pure state."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (2,):
        raise ValueError("expected a single-qubit state")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > UNITARY_TOL:
        raise ValueError("state is not normalized")
    alpha, beta = psi
    cross = np.conj(alpha) * beta
    return np.array([2.0 * cross.real, 2.0 * cross.imag,
                     abs(alpha) ** 2 - abs(beta) ** 2])


def state_from_bloch(c: np.ndarray) -> np.ndarray:
    """A pure state whose Bloch vector is the given unit vector."""
    c = _require_unit_vector(c)
    cx, cy, cz = c
    theta = np.arccos(np.clip(cz, -1.0, 1.0))
    phi = np.arctan2(cy, cx)
    return np.array([np.cos(theta / 2.0),
                     np.exp(1j * phi) * np.sin(theta / 2.0)], dtype=np.complex128)


def _require_unit_vector(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (3,):
        raise ValueError("expected a 3-vector")
    norm = np.linalg.norm(c)
    if norm < 1e-12:
        raise ValueError("zero vector has no direction")
    if abs(norm - 1.0) > UNITARY_TOL:
        raise ValueError("vector is not unit length")
    return c


def unitary_for_point(c: np.ndarray) -> np.ndarray:
    """A unitary U with bloch_of(U^-1 |1>) = c, phase-fixed for determinism.

    The global phase is chosen so that the largest-magnitude entry of the
    first column of U is real positive.
    """
    psi = state_from_bloch(c)
    # U^-1 has columns [psi_perp, psi]; then U^-1 |1> = psi.
    psi_perp = np.array([-np.conj(psi[1]), np.conj(psi[0])], dtype=np.complex128)
    u = np.column_stack([psi_perp, psi]).conj().T
    col = u[:, 0]
    pivot = col[np.argmax(np.abs(col))]
    u = u * (np.conj(pivot) / abs(pivot))
    return u


@dataclass(frozen=True)
class BellBoxSpec:
    """One pre-mixture BELL member: per-input unitaries plus postprocessing.

    ``alice_post[x]`` and ``bob_post[y]`` map the measured bit to the output
    alphabet.  Per-input postprocessing is needed so that direct sums can
    route each block to its own output labels; a spec with all rows equal is
    the plain single-(f, g) form.
    """

    alice_unitaries: tuple  # one 2x2 unitary per x
    bob_unitaries: tuple    # one 2x2 unitary per y
    alice_post: np.ndarray  # shape (x_size, 2), values in range(a_size)
    bob_post: np.ndarray    # shape (y_size, 2), values in range(b_size)
    a_size: int
    b_size: int

    def __post_init__(self):
        us = tuple(_require_unitary(u) for u in self.alice_unitaries)
        vs = tuple(_require_unitary(v) for v in self.bob_unitaries)
        f = np.asarray(self.alice_post, dtype=np.int64)
        g = np.asarray(self.bob_post, dtype=np.int64)
        if f.shape != (len(us), 2) or g.shape != (len(vs), 2):
            raise ValueError("postprocessing shape must be (inputs, 2)")
        if f.min() < 0 or f.max() >= self.a_size:
            raise ValueError("alice_post value out of range")
        if g.min() < 0 or g.max() >= self.b_size:
            raise ValueError("bob_post value out of range")
        f = f.copy(); f.flags.writeable = False
        g = g.copy(); g.flags.writeable = False
        object.__setattr__(self, "alice_unitaries", us)
        object.__setattr__(self, "bob_unitaries", vs)
        object.__setattr__(self, "alice_post", f)
        object.__setattr__(self, "bob_post", g)

    @property
    def x_size(self) -> int:
        return len(self.alice_unitaries)

    @property
    def y_size(self) -> int:
        return len(self.bob_unitaries)


def simple_bell_spec(alice_unitaries, bob_unitaries, f=(0, 1), g=(0, 1),
                     a_size: int = 2, b_size: int = 2) -> BellBoxSpec:
    """Spec with a single global (f, g) postprocessing pair."""
    f = np.tile(np.asarray(f, dtype=np.int64), (len(alice_unitaries), 1))
    g = np.tile(np.asarray(g, dtype=np.int64), (len(bob_unitaries), 1))
    return BellBoxSpec(tuple(alice_unitaries), tuple(bob_unitaries),
                       f, g, a_size, b_size)


def measurement_probs(u: np.ndarray, v: np.ndarray, state: np.ndarray) -> np.ndarray:
    """Pr[(s, t)] = |<st| U (x) V |state>|^2 as a 2x2 array indexed [s, t]."""
    u = _require_unitary(u)
    v = _require_unitary(v)
    state = np.asarray(state, dtype=np.complex128)
    if state.shape != (4,):
        raise ValueError("expected a two-qubit state")
    if abs(np.linalg.norm(state) - 1.0) > UNITARY_TOL:
        raise ValueError("state is not normalized")
    amps = (np.kron(u, v) @ state).reshape(2, 2)
    return np.abs(amps) ** 2


def bell_box(spec: BellBoxSpec, state: np.ndarray = PHI_PLUS) -> CorrelationBox:
    """Exact correlation box from measuring ``state`` as ``spec`` prescribes."""
    table = np.zeros((spec.x_size, spec.y_size, spec.a_size, spec.b_size))
    for x, u in enumerate(spec.alice_unitaries):
        for y, v in enumerate(spec.bob_unitaries):
            p = measurement_probs(u, v, state)
            for s in range(2):
                for t in range(2):
                    table[x, y, spec.alice_post[x, s], spec.bob_post[y, t]] += p[s, t]
    return CorrelationBox(table)


def singlet_prob_equal(x: np.ndarray, y: np.ndarray) -> float:
    """Pr[a = b] when the singlet is measured along Bloch directions x, y."""
    x = _require_unit_vector(x)
    y = _require_unit_vector(y)
    return float(np.clip(0.5 - 0.5 * np.dot(x, y), 0.0, 1.0))


def singlet_measure_box(u: np.ndarray, v: np.ndarray) -> JointDistribution:
    """Exact joint output distribution of measuring (U (x) V) |singlet>."""
    return JointDistribution(measurement_probs(u, v, SINGLET))


def singlet_invariance_defect(v: np.ndarray) -> float:
    """1 - |<singlet| (V (x) V) |singlet>|; zero for every unitary V."""
    v = _require_unitary(v)
    overlap = np.vdot(SINGLET, np.kron(v, v) @ SINGLET)
    return float(1.0 - abs(overlap))


def direct_sum_bell(spec1: BellBoxSpec, spec2: BellBoxSpec) -> BellBoxSpec:
    """Disjoint-union spec: block-i inputs use block-i unitaries and outputs.

    Input, output alphabets are concatenated with block-2 labels offset by
    block-1 sizes.  Restricting to either block reproduces that block's box
    exactly; cross-block rows follow from the measurement semantics.
    """
    us = spec1.alice_unitaries + spec2.alice_unitaries
    vs = spec1.bob_unitaries + spec2.bob_unitaries
    f = np.vstack([spec1.alice_post, spec2.alice_post + spec1.a_size])
    g = np.vstack([spec1.bob_post, spec2.bob_post + spec1.b_size])
    return BellBoxSpec(us, vs, f, g,
                       spec1.a_size + spec2.a_size,
                       spec1.b_size + spec2.b_size)


def restrict_box(box: CorrelationBox, xs, ys, as_, bs) -> CorrelationBox:
    """Sub-box on the given input labels, projected onto the given outputs."""
    sub = box.table[np.ix_(list(xs), list(ys), list(as_), list(bs))]
    return CorrelationBox(sub)


def spec_to_payload(spec: BellBoxSpec) -> dict:
    """JSON-friendly form: 8 reals per unitary, row-major, re/im interleaved."""
    def flat(u):
        out = []
        for entry in np.asarray(u).ravel():
            out.extend([entry.real, entry.imag])
        return out

    return {
        "alice_unitaries": [flat(u) for u in spec.alice_unitaries],
        "bob_unitaries": [flat(v) for v in spec.bob_unitaries],
        "alice_post": spec.alice_post.tolist(),
        "bob_post": spec.bob_post.tolist(),
        "a_size": spec.a_size,
        "b_size": spec.b_size,
    }


def spec_from_payload(payload: dict) -> BellBoxSpec:
    def unflat(vals):
        vals = np.asarray(vals, dtype=np.float64)
        if vals.shape != (8,):
            raise ValueError("unitary payload must have 8 reals")
        c = vals[0::2] + 1j * vals[1::2]
        return c.reshape(2, 2)

    return BellBoxSpec(
        tuple(unflat(u) for u in payload["alice_unitaries"]),
        tuple(unflat(v) for v in payload["bob_unitaries"]),
        np.asarray(payload["alice_post"], dtype=np.int64),
        np.asarray(payload["bob_post"], dtype=np.int64),
        int(payload["a_size"]),
        int(payload["b_size"]),
    )
