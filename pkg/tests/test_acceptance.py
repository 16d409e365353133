"""Acceptance criteria 1-10, one pass/fail line each.

Run under pytest (lines are echoed in the terminal summary) or directly:
``python3 tests/test_acceptance.py``.
"""
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ssgforms import engine, experiments
from ssgforms import mp_sequence as mps
from ssgforms import topology as tp
from ssgforms.functions import clamp, compose_symmetry, pullback_sg, random_function, sg_harmonic, tent_on_segment
from ssgforms.mp_sequence import Constant, Geometric
from ssgforms.network import DiscretizedFunction, SegmentNode, build_ssg, energy, form_components, line_energies

from conftest import ACCEPTANCE_LINES, BUILTIN, random_sequences

GEOM = Geometric(0.5, 0.5)
# Frozen from an exact-fraction product over 60 terms (see test_mp_sequence).
R_STAR_HALF = 0.2887880950866024
SEEDS = range(100)


def all_sequences():
    return list(BUILTIN.values()) + random_sequences(20)


def criterion_1():
    t0 = time.perf_counter()
    worst = max(engine.compatibility_residual(s, m) for s in all_sequences() for m in range(5))
    ctl = engine.pairs_compatibility_residual([experiments.BROKEN_PAIR], 0)
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and ctl > 1e-3 and dt < 30
    return ok, f"max residual {worst:.2e} (< 1e-9), control {ctl:.4f} (> 1e-3), {dt:.1f} s (< 30 s)"


def criterion_2():
    worst = max(
        abs(engine.effective_resistance(build_ssg(s, m), tp.p(1), tp.p(2)) - 2 / 3)
        for s in all_sequences()
        for m in range(7)
    )
    return worst <= 1e-10, f"max |R(p1,p2) - 2/3| = {worst:.2e} over 23 sequences, m <= 6"


def criterion_3():
    worst = max(engine.resistance_diameter(build_ssg(s, m)) for s in BUILTIN.values() for m in range(5))
    return worst <= 4, f"max diameter {worst:.6f} (<= 4) over built-ins, m <= 4"


def criterion_4():
    exact = engine.delta_wye(1, 1, 1) == (1 / 3, 1 / 3, 1 / 3)
    rng = np.random.default_rng(4)
    worst = 0.0
    for tri in rng.uniform(0.01, 100.0, (100, 3)):
        R = engine.delta_wye(*tri)
        tf = engine.trace(engine.star_network(*R), [1, 2, 3])
        back = np.array([1 / tf.conductance(1, 2), 1 / tf.conductance(2, 3), 1 / tf.conductance(3, 1)])
        worst = max(worst, float(np.max(np.abs(back - tri) / tri)))
    return exact and worst <= 1e-12, f"(1,1,1) exact: {exact}; 100 triples max rel error {worst:.2e}"


def criterion_5():
    P = mps.partial_products(GEOM, 60)
    net_err = max(abs(experiments.sg_part_value(GEOM, (1, 0, 0), m) - 2 / P[m]) for m in range(7))
    two_c = 2 / R_STAR_HALF
    lim_err = abs(2 / P[40] - two_c)
    vals = [experiments.sg_part_value(Constant(0.25), (1, 0, 0), m) for m in range(1, 7)]
    growth = min(b / a for a, b in zip(vals, vals[1:]))
    ok = net_err <= 1e-10 and lim_err <= 1e-9 and growth > 1.1
    return ok, (
        f"network vs 2/P_m err {net_err:.2e}; |2/P_40 - 2C_*| = {lim_err:.2e} (2C_* = {two_c:.6f}); "
        f"constant control min growth {growth:.4f} (> 1.1)"
    )


def criterion_6():
    m = 6
    u_sg = pullback_sg(sg_harmonic((1, 0, 0), m), m, m, 2)
    tent = tent_on_segment("", (1, 2), m, 2)
    u = u_sg + tent
    P = mps.partial_products(GEOM, 40)
    g1 = mps.gammas(GEOM, 1)[0]
    err = abs(energy(build_ssg(GEOM, m, 2), u) - (2 / P[m] + 4 / g1))
    scalar = abs(2 / P[40] - 2 / mps.r_star(GEOM).r_star)
    lc = mps.r_star(GEOM)
    eta1 = g1 / (1 - lc.r_star)
    b_part = (1 / (1 - lc.r_star)) * (1 / eta1) * line_energies(tent, 1)[1][0]
    b_err = abs(b_part - 4 / g1) / (4 / g1)
    ok = err < 1e-9 and scalar < 1e-9 and b_err <= 1e-12
    return ok, f"|E_R,6(u) - (2/P_6 + 4/gamma_1)| = {err:.2e}; |2/P_40 - 2/R_*| = {scalar:.2e}; b-part rel {b_err:.2e}"


def criterion_7():
    fixed = float(np.max(np.abs(np.subtract(mps.project(Constant(0.25), 30).values, 0.25))))
    L = mps.project(GEOM, 30)
    idem = float(np.max(np.abs(np.subtract(mps.project(L, 30).values, L.values))))
    lc = mps.r_star(GEOM)
    direct = 1 - float(np.prod(1 - GEOM.rhos(2000)))
    rho0_rel = abs(lc.rho0 - direct) / direct
    ident = float(np.max(mps.energy_identity_residuals(GEOM, 30)))
    back = mps.unproject(L, lc.rho0, 30)
    rt = float(np.max(np.abs(back.rhos(30) - GEOM.rhos(30))))
    rt2 = float(np.max(np.abs(np.subtract(mps.project(back, 30).values, L.values))))
    ok = fixed <= 1e-14 and idem <= 1e-12 and rho0_rel <= 1e-12 and ident <= 1e-12 and rt <= 1e-12 and rt2 <= 1e-12
    return ok, (
        f"fixed point {fixed:.1e}; idempotence {idem:.1e}; rho_0 rel {rho0_rel:.1e}; "
        f"energy identity {ident:.1e}; roundtrips {rt:.1e} / {rt2:.1e}"
    )


def criterion_8():
    tele = max(mps.telescoping_residual(s, 40) for s in random_sequences(100, seed=8, length=40))
    norm = abs(mps.normalization_sum(GEOM, 60) - 1)
    return tele < 1e-12 and norm <= 1e-9, f"max telescoping residual {tele:.2e}; |normalization - 1| = {norm:.2e}"


def criterion_9():
    seqs = list(BUILTIN.values())
    fails = dict.fromkeys(["monotone", "clamp", "q<=d", "symmetry", "minimal", "affine"], 0)
    for seed in SEEDS:
        seq = seqs[seed % 3]
        n = 1 + seed % 4
        f = random_function(seed, 4, n)
        tot = [form_components(seq, m, f).total for m in range(5)]
        fails["monotone"] += any(a > b * (1 + 1e-13) for a, b in zip(tot, tot[1:]))

        g = f * 1.5
        a, b = form_components(seq, 4, g), form_components(seq, 4, clamp(g))
        fails["clamp"] += not (
            b.q_sigma <= a.q_sigma + 1e-14
            and np.all(b.q_line <= a.q_line + 1e-14)
            and np.all(b.d_line <= a.d_line + 1e-14)
        )

        q, d = line_energies(f, 4)
        fails["q<=d"] += bool(np.any(q > d * (1 + 1e-14)))

        small = random_function(seed, 3, n)
        net = build_ssg(seq, 3, n)
        base = energy(net, small)
        fails["symmetry"] += any(
            abs(energy(net, compose_symmetry(small, s)) - base) > 1e-12 * base for s in tp.SYMMETRIES
        )

        rng = np.random.default_rng(seed)
        hnet = build_ssg(seq, 3, max(n, 2))
        bvals = rng.uniform(-1, 1, 3)
        h = engine.harmonic_extend(hnet, dict(zip(tp.vertex_set(0), bvals)))
        v = h.values + rng.normal(size=hnet.n_vertices)
        v[:3] = bvals
        fails["minimal"] += hnet.energy_of_values(h.values) > hnet.energy_of_values(v) + 1e-12

        lookup = h.as_dict()
        bad = False
        for seg in tp.segment_list(3):
            ends = seg.endpoints()
            k = max(n, 2)
            samples = [lookup[ends[0]]] + [lookup[SegmentNode(seg, i, k)] for i in range(1, k)] + [lookup[ends[1]]]
            bad |= bool(np.max(np.abs(np.diff(samples, 2))) > 1e-12)
        fails["affine"] += bad
    total = sum(fails.values())
    detail = ", ".join(f"{k} {v}" for k, v in fails.items())
    return total == 0, f"violations over {len(SEEDS)} seeds each (m <= 4, n <= 4): {detail}"


def criterion_10():
    worst = 0.0
    for n in (2, 4, 8, 16):
        t = np.arange(1, n) / n
        profiles = np.zeros((3, n - 1))
        profiles[0] = t**2
        vals = {a: 0.0 for a in tp.vertex_set(1)}
        vals[tp.Segment("", (1, 2)).endpoints()[1]] = 1.0
        f = DiscretizedFunction.from_vertex_map(vals, 1, n, profiles)
        worst = max(worst, abs(line_energies(f, 1)[1][0] - (4 / 3 - 1 / (3 * n * n))))
    tents = [line_energies(tent_on_segment("", (1, 2), 1, n), 1)[1][0] for n in (2, 4, 6, 8, 16, 32)]
    exact = all(d == 4.0 for d in tents)
    return worst <= 1e-12 and exact, f"t^2 profile max error {worst:.2e} (n = 2,4,8,16); tent D = 4 exactly: {exact}"


CRITERIA = {
    1: ("compatibility", criterion_1),
    2: ("corner resistance 2/3", criterion_2),
    3: ("diameter bound", criterion_3),
    4: ("delta-wye", criterion_4),
    5: ("SG-part convergence", criterion_5),
    6: ("decomposition", criterion_6),
    7: ("projection calculus", criterion_7),
    8: ("telescoping and normalization", criterion_8),
    9: ("property suites", criterion_9),
    10: ("Dirichlet quadrature", criterion_10),
}


def evaluate(number):
    title, fn = CRITERIA[number]
    ok, detail = fn()
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = evaluate(number)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(k)[0] for k in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
