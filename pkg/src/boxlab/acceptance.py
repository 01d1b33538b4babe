"""Desk-scale acceptance battery.

Each criterion returns a CriterionResult; run_all executes the whole list.
All numeric tolerances are pinned here, next to the checks they gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import boxes, games, protocols, analysis, sphere, quantum

# golden value, recorded on first computation of the octahedron k=1 pipeline
OCTAHEDRON_GAP = 0.10355339059327373
OCTAHEDRON_P_STAR = 0.5


@dataclass
class CriterionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return "%s %s" % ("PASS" if self.passed else "FAIL", self.name)


def criterion_tsirelson_anchor() -> CriterionResult:
    """Optimized strategies hit omega(p) within 1e-6 and never beat it."""
    ps = np.round(np.arange(0.5, 1.0001, 0.05), 10)
    worst_short = 0.0
    worst_over = 0.0
    values = {}
    for p in ps:
        achieved = games.achieved_win_prob(float(p))
        target = games.omega(float(p))
        worst_short = max(worst_short, target - achieved)
        worst_over = max(worst_over, achieved - target)
        values[float(p)] = achieved
    passed = worst_short <= 1e-6 and worst_over <= 1e-9
    return CriterionResult("tsirelson_omega_anchor", passed,
                           {"worst_shortfall": worst_short,
                            "worst_overshoot": worst_over,
                            "achieved": values})


def criterion_classical_chsh() -> CriterionResult:
    """Local deterministic maximum is exactly 3/4; PR wins with certainty."""
    local_max = max(games.win_prob(b, 0.5, 0.5)
                    for b in protocols.local_deterministic_boxes())
    pr = boxes.pr_box()
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]    # dyadic, so the sum is exact
    pr_ok = all(games.win_prob(pr, p, q) == 1.0 for p in grid for q in grid)
    passed = local_max == 0.75 and pr_ok
    return CriterionResult("classical_chsh_bound", passed,
                           {"local_max": local_max, "pr_wins_grid": pr_ok})


def criterion_counting_bound() -> CriterionResult:
    """1-query binary protocol count matches the product formula and bound.

    The product formula |X|^2 |Y|^2 2^4 2^4 evaluates to 4*4*16*16 = 4096
    for all-binary alphabets (not 16384; see the enumeration oracle), and is
    at most (2|X|)^(2|A|) * (2|Y|)^(2|B|) = 65536.
    """
    al = protocols.BINARY
    enumerated = sum(1 for _ in protocols.enumerate_protocols(al, 1))
    formula = protocols.count_protocols(al, 1)
    bound = protocols.counting_bound(al, 1)
    passed = enumerated == formula == 4 * 4 * 16 * 16 and formula <= bound == 65536
    return CriterionResult("protocol_counting_bound", passed,
                           {"enumerated": enumerated, "formula": formula,
                            "bound": bound})


def criterion_affine_consistency() -> CriterionResult:
    """affine_of agrees with win_prob of the induced box at 3 p-values."""
    rng = np.random.default_rng(20240)
    al = protocols.BINARY
    worst = 0.0
    for _ in range(100):
        table = rng.random((2, 2, 2, 2))
        table /= table.sum(axis=(2, 3), keepdims=True)
        target = boxes.CorrelationBox(table)
        protocol = _random_protocol(rng, al, k=1)
        ell = protocols.affine_of(protocol, target)
        induced = protocols.induced_box(protocol, target)
        for p in (0.5, 0.7, 1.0):
            worst = max(worst, abs(float(ell(p))
                                   - games.win_prob(induced, p, 0.5)))
    return CriterionResult("affine_consistency", worst <= 1e-12,
                           {"worst_deviation": worst})


def _random_protocol(rng, al, k):
    q_maps = tuple(tuple(rng.integers(0, al.x2, al.x1 * al.a2 ** i).tolist())
                   for i in range(k))
    r_maps = tuple(tuple(rng.integers(0, al.y2, al.y1 * al.b2 ** i).tolist())
                   for i in range(k))
    s_map = tuple(rng.integers(0, al.a1, al.x1 * al.a2 ** k).tolist())
    t_map = tuple(rng.integers(0, al.b1, al.y1 * al.b2 ** k).tolist())
    return protocols.DeterministicProtocol(al, k, q_maps, r_maps, s_map, t_map)


def criterion_intersections() -> CriterionResult:
    """10^4 random lines each meet omega at most twice, residuals <= 1e-10."""
    rng = np.random.default_rng(5)
    worst_residual = 0.0
    max_roots = 0
    for _ in range(10 ** 4):
        ell = protocols.AffineFunction(float(rng.normal(0.8, 0.4)),
                                       float(rng.normal(0.0, 0.6)))
        roots = analysis.line_intersections(ell)
        max_roots = max(max_roots, len(roots))
        for p in roots:
            worst_residual = max(worst_residual,
                                 abs(float(ell(p)) - games.omega(p)))
    passed = max_roots <= 2 and worst_residual <= 1e-10
    return CriterionResult("line_intersections", passed,
                           {"max_roots": max_roots,
                            "worst_residual": worst_residual})


def criterion_sqrt_eps_measure() -> CriterionResult:
    """measure_near <= 8*sqrt(eps); tangent-line log-log slope is 0.5 +- 0.05."""
    tangent_points = (0.55, 0.6, 0.7, 0.75, 0.8)
    lines = [analysis.tangent_line(p0) for p0 in tangent_points]
    lines.append(analysis.best_affine_fit())
    bound_ok = all(analysis.measure_near(ell, eps) <= 8.0 * np.sqrt(eps)
                   for ell in lines for eps in (1e-2, 1e-3, 1e-4))
    slopes = []
    eps_grid = np.array([1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    for ell in lines[:-1]:
        measures = np.array([analysis.measure_near(ell, e) for e in eps_grid])
        slope = np.polyfit(np.log(eps_grid), np.log(measures), 1)[0]
        slopes.append(float(slope))
    slope_ok = all(abs(s - 0.5) <= 0.05 for s in slopes)
    return CriterionResult("sqrt_eps_measure_law", bound_ok and slope_ok,
                           {"bound_ok": bound_ok, "slopes": slopes})


def criterion_gap_certificate() -> CriterionResult:
    """Octahedron-box k=1 pipeline emits a self-verifying gap > 1e-4."""
    box = sphere.discretized_box(sphere.octahedron_cover())
    family = protocols.affine_family(box, 1)
    cert = analysis.find_hard_p(family, description="octahedron cover box, k=1",
                                k=1)
    passed = (cert.gap > 1e-4 and cert.verify(1e-12)
              and abs(cert.gap - OCTAHEDRON_GAP) <= 1e-9
              and abs(cert.p_star - OCTAHEDRON_P_STAR) <= 1e-9)
    return CriterionResult("gap_certificate", passed,
                           {"p_star": cert.p_star, "gap": cert.gap,
                            "family_size": len(family)})


def criterion_epsilon_schedule() -> CriterionResult:
    """k^4 * bound_k^2 * eps_k = c^2 exactly, for binary alphabets, k <= 3."""
    sched = analysis.epsilon_schedule(2, 2, 2, 2, 3, 0.01)
    identity_ok = sched.verify_identity()
    # the asymptotic lower-bound inequality, with the constant c^2 that the
    # exact identity implies
    ineq_ok = all((k + 1) ** 4 * b * b >= sched.c * sched.c * (1 / e)
                  for k, (b, e) in enumerate(zip(sched.bounds, sched.eps_exact)))
    passed = identity_ok and ineq_ok and sched.bounds[0] == 65536
    return CriterionResult("epsilon_schedule", passed,
                           {"bounds": [str(b) for b in sched.bounds],
                            "eps": list(sched.eps)})


def criterion_sphere_cover() -> CriterionResult:
    """Audited covers, the 1-query reduction error, and the 1/eps^2 scaling."""
    cover = sphere.build_cover(0.2)
    max_tv, mean_tv = sphere.verify_reduction(cover, 1000, seed=7)
    box = sphere.discretized_box(cover)
    bell = quantum.bell_box(sphere.cover_bell_spec(cover), quantum.SINGLET)
    recon_dev = float(np.abs(box.table - bell.table).max())
    scaling_ok = all(sphere.build_cover(e).size * e * e <= 10.0
                     for e in (0.5, 0.1, 0.05))
    passed = (cover.size <= 250 and cover.covering_radius <= 0.2
              and max_tv <= 0.2 and mean_tv < max_tv
              and recon_dev <= 1e-10
              and cover.size * 0.04 <= 10.0 and scaling_ok)
    return CriterionResult("sphere_cover_positive_result", passed,
                           {"T": cover.size, "radius": cover.covering_radius,
                            "max_tv": max_tv, "mean_tv": mean_tv,
                            "bell_reconstruction_dev": recon_dev})


def criterion_property_suite() -> CriterionResult:
    """Normalization, non-signaling, singlet invariance, dot-product law,
    convexity of omega, direct-sum restriction fidelity."""
    rng = np.random.default_rng(77)
    details: dict = {}

    defect = max(quantum.singlet_invariance_defect(quantum.random_unitary(rng))
                 for _ in range(1000))
    details["max_singlet_defect"] = defect

    dot_dev = 0.0
    for _ in range(1000):
        u, v = quantum.random_unitary(rng), quantum.random_unitary(rng)
        row = quantum.singlet_measure_box(u, v)
        amp_path = float(row.probs[0, 0] + row.probs[1, 1])
        x = quantum.bloch_of(np.linalg.inv(u) @ quantum.KET1)
        y = quantum.bloch_of(np.linalg.inv(v) @ quantum.KET1)
        dot_dev = max(dot_dev, abs(amp_path - quantum.singlet_prob_equal(x, y)))
    details["max_dot_product_dev"] = dot_dev

    xs = np.linspace(0.5, 1.0, 101)
    second = np.array([analysis.omega_second_derivative(x) for x in xs])
    h = 1e-4
    fd_dev = max(abs((games.omega(x + h) - 2 * games.omega(x)
                      + games.omega(x - h)) / (h * h)
                     - analysis.omega_second_derivative(x))
                 for x in xs[1:-1])
    details["omega_dd_min"] = float(second.min())
    details["omega_dd_fd_dev"] = fd_dev

    spec1 = games.optimal_strategy(0.5).to_bell_spec()
    spec2 = games.optimal_strategy(0.75).to_bell_spec()
    combined = quantum.direct_sum_bell(spec1, spec2)
    big = quantum.bell_box(combined, quantum.SINGLET)
    block1 = quantum.restrict_box(big, (0, 1), (0, 1), (0, 1), (0, 1))
    restrict_tv = boxes.tv_closeness(block1,
                                     quantum.bell_box(spec1, quantum.SINGLET))
    details["direct_sum_restriction_tv"] = restrict_tv

    ns_ok = all(boxes.is_nonsignaling(b, 1e-10) for b in
                [boxes.pr_box(), big,
                 boxes.mix([boxes.pr_box(), boxes.local_box([0, 1], [0, 1])],
                           [0.5, 0.5]),
                 protocols.induced_box(protocols.identity_protocol(),
                                       boxes.pr_box())])
    details["nonsignaling_ok"] = ns_ok

    passed = (defect <= 1e-10 and dot_dev <= 1e-10 and second.min() >= 0.5
              and fd_dev <= 1e-6 and restrict_tv == 0.0 and ns_ok)
    return CriterionResult("property_suites", passed, details)


CRITERIA = [
    criterion_tsirelson_anchor,
    criterion_classical_chsh,
    criterion_counting_bound,
    criterion_affine_consistency,
    criterion_intersections,
    criterion_sqrt_eps_measure,
    criterion_gap_certificate,
    criterion_epsilon_schedule,
    criterion_sphere_cover,
    criterion_property_suite,
]


def run_all() -> list[CriterionResult]:
    return [fn() for fn in CRITERIA]
