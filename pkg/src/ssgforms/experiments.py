"""Identity checks packaged as reports of (computed, predicted, residual) rows."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import mp_sequence as mps
from . import topology as tp
from .engine import (
    compatibility_residual,
    effective_resistance,
    pairs_compatibility_residual,
    resistance_diameter,
)
from .functions import compose_symmetry, pullback_sg, random_function, sg_harmonic, tent_on_segment
from .network import build_ssg, energy, form_components, line_energies, sigma_energy
from .mp_sequence import MatchingSequence

BROKEN_PAIR = (0.5, 0.4)

# How a row turns (computed, predicted, tolerance) into pass/fail.
#   abs / rel : |c - p| (relative to |p| for rel) must be <= tol
#   upper     : c <= p + tol
#   lower     : c >= p - tol
#   above     : c > p + tol
#   exceeds   : |c - p| > tol (negative controls)
MODES = ("abs", "rel", "upper", "lower", "above", "exceeds")


@dataclass
class Row:
    quantity: str
    computed: float
    predicted: float
    residual: float
    mode: str
    tolerance: float
    passed: bool
    note: str = ""


def make_row(quantity, computed, predicted, tolerance, mode="abs", note="") -> Row:
    if mode not in MODES:
        raise ValueError(f"unknown row mode {mode!r}")
    c, p = float(computed), float(predicted)
    if mode == "rel" and p != 0.0:
        res = abs(c - p) / abs(p)
    elif mode == "upper":
        res = max(0.0, c - p)
    elif mode in ("lower", "above"):
        res = max(0.0, p - c)
    else:
        res = abs(c - p)
    if mode == "exceeds":
        ok = res > tolerance
    elif mode == "above":
        ok = c > p + tolerance
    else:
        ok = res <= tolerance
    return Row(quantity, c, p, res, mode, float(tolerance), bool(ok), note)


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    rows: list[Row] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, *args, **kwargs) -> Row:
        row = make_row(*args, **kwargs)
        self.rows.append(row)
        return row

    def with_tolerance(self, tol: float) -> "ExperimentReport":
        """Re-judge the abs/rel rows against ``tol``; controls and bounds keep theirs."""
        rows = [
            make_row(r.quantity, r.computed, r.predicted, tol, r.mode, r.note) if r.mode in ("abs", "rel") else r
            for r in self.rows
        ]
        return ExperimentReport(self.name, {**self.parameters, "tolerance_override": tol}, rows)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "passed": self.passed,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["name"], d["parameters"], [Row(**r) for r in d["rows"]])

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["# experiment", self.name])
        w.writerow(["# parameters", json.dumps(self.parameters, sort_keys=True)])
        w.writerow(["# passed", self.passed])
        w.writerow(["quantity", "computed", "predicted", "residual", "mode", "tolerance", "passed", "note"])
        for r in self.rows:
            w.writerow(
                [r.quantity, fmt(r.computed), fmt(r.predicted), fmt(r.residual), r.mode, f"{r.tolerance:.3g}", r.passed, r.note]
            )
        return out.getvalue()


def fmt(x: float) -> str:
    """Ten significant digits, the output convention everywhere."""
    return f"{x:.10g}"


def _boundary_energy(b) -> float:
    return sum((b[i - 1] - b[j - 1]) ** 2 for i, j in tp.BONDS)


# --- experiments ----------------------------------------------------------------


def exp_compat_chain(seq: MatchingSequence, m_max: int = 4, break_at: int | None = None) -> ExperimentReport:
    """Residual of trace(level m+1 -> V_m) against level m, m = 0..m_max-1.

    ``break_at`` replaces pair number ``break_at`` (1-based) by a non-matching
    pair; the row m = break_at - 1 must then fail.
    """
    if not 1 <= m_max <= 5:
        raise ValueError(f"m_max must be in 1..5, got {m_max}")
    params = {"sequence": seq.to_dict(), "m_max": m_max}
    rep = ExperimentReport("compat", params)
    if break_at is None:
        for m in range(m_max):
            rep.add(f"compat_residual m={m}", compatibility_residual(seq, m), 0.0, 1e-9)
        ctl = pairs_compatibility_residual([BROKEN_PAIR], 0)
        rep.add("control (r,rho)=(0.5,0.4) m=0", ctl, 0.0, 1e-3, mode="exceeds")
        return rep
    if break_at < 1:
        raise ValueError("break_at is a 1-based pair index")
    params["break_at"] = break_at
    pairs = [(p.r, p.rho) for p in seq.pairs(m_max)]
    if break_at <= len(pairs):
        pairs[break_at - 1] = BROKEN_PAIR
    for m in range(m_max):
        rep.add(f"compat_residual m={m}", pairs_compatibility_residual(pairs, m), 0.0, 1e-9)
    return rep


def sg_part_value(seq: MatchingSequence, boundary, m: int) -> float:
    """(1/delta_m) Q_m^Σ of the pulled-back SG-harmonic function, from the network side."""
    u = pullback_sg(sg_harmonic(boundary, m), m, m, 1)
    return sigma_energy(u, m) / mps.deltas(seq, m)[m]


def exp_sg_part(seq: MatchingSequence, boundary=(1.0, 0.0, 0.0), m_max: int = 6) -> ExperimentReport:
    if not 0 <= m_max <= 6:
        raise ValueError(f"m_max must be in 0..6, got {m_max}")
    boundary = tuple(float(b) for b in boundary)
    q0 = _boundary_energy(boundary)
    rep = ExperimentReport("sgpart", {"sequence": seq.to_dict(), "boundary": list(boundary), "m_max": m_max})
    P = mps.partial_products(seq, 60)
    values = []
    for m in range(m_max + 1):
        v = sg_part_value(seq, boundary, m)
        values.append(v)
        rep.add(f"sg_part m={m}", v, q0 / P[m], 1e-10, mode="rel")
    lc = mps.r_star(seq)
    if lc.diverges:
        growth = [values[m] / values[m - 1] for m in range(2, m_max + 1)] if q0 > 0 else []
        rep.add(
            "sg_part degenerates: min growth factor m>=2",
            min(growth) if growth else math.inf,
            1.0,
            0.0,
            mode="above",
            note="sum(rho) diverges; the SG part carries no energy in the limit",
        )
    else:
        rep.add("sg_part scalar limit m=40", q0 / P[40], q0 * lc.c_star, 1e-9)
        rep.add("sg_part scalar limit m=60", q0 / P[60], q0 * lc.c_star, 1e-9)
    return rep


def exp_decomposition(seq: MatchingSequence, m: int = 6, subdiv: int = 2) -> ExperimentReport:
    """SG part plus line part of the composite pullback + tent test function."""
    if not 1 <= m <= 6:
        raise ValueError(f"m must be in 1..6, got {m}")
    if subdiv % 2:
        raise ValueError("subdivision must be even for the tent")
    lc = mps.r_star(seq)
    rep = ExperimentReport("decomp", {"sequence": seq.to_dict(), "m": m, "subdiv": subdiv})
    P = mps.partial_products(seq, 40)
    g = mps.gammas(seq, m)
    tent = tent_on_segment("", (1, 2), m, subdiv)
    net = build_ssg(seq, m, subdiv)
    tent_line = 4.0 / g[0]
    b = 1.0 / lc.rho0
    eta1 = g[0] / lc.rho0
    _, d_tent = line_energies(tent, m)
    rep.add("b-part identity b*(1/eta_1)*D(tent)", b * d_tent[0] / eta1, tent_line, 1e-12, mode="rel")
    rep.add("SG energy of tent", sigma_energy(tent, m), 0.0, 1e-12)
    if lc.diverges:
        rep.parameters["mode"] = "line-only"
        rep.add(f"E_R,{m}(tent) network", energy(net, tent), tent_line, 1e-9)
        rep.add(f"E_R,{m}(tent) components", form_components(seq, m, tent).total, tent_line, 1e-9)
        return rep
    rep.parameters["mode"] = "sg+line"
    u_sg = pullback_sg(sg_harmonic((1.0, 0.0, 0.0), m), m, m, subdiv)
    u = u_sg + tent
    predicted = 2.0 / P[m] + tent_line
    fc = form_components(seq, m, u)
    rep.add(f"E_R,{m}(u) network", energy(net, u), predicted, 1e-9)
    rep.add(f"E_R,{m}(u) components", fc.total, predicted, 1e-9)
    rep.add("a-part (1/delta_m) Q_m^Sigma(u)", fc.q_sigma / mps.deltas(seq, m)[m], 2.0 / P[m], 1e-9)
    rep.add("b-part sum D_k/gamma_k", float(np.sum(fc.d_line / g)), tent_line, 1e-9)
    rep.add("line energy of pullback", float(np.sum(line_energies(u_sg, m)[1])), 0.0, 1e-12)
    rep.add("SG part limit 2/P_40 vs a*E*", 2.0 / P[40], 2.0 / lc.r_star, 1e-9)
    return rep


def exp_projection(seq: MatchingSequence, terms: int = 30) -> ExperimentReport:
    if not 1 <= terms <= 100:
        raise ValueError(f"terms must be in 1..100, got {terms}")
    lc = mps.r_star(seq)
    rep = ExperimentReport("projection", {"sequence": seq.to_dict(), "terms": terms})
    rho = seq.rhos(terms)
    L = mps.project(seq, terms)
    sigma = L.rhos(terms)
    LL = mps.project(L, terms).rhos(terms)
    rep.add("idempotence max|L(L(R)) - L(R)|", float(np.max(np.abs(LL - sigma))), 0.0, 1e-12)
    if lc.diverges:
        rep.add("fixed point max|L(R) - R|", float(np.max(np.abs(sigma - rho))), 0.0, 1e-14)
        rep.add("rho_0", lc.rho0, 1.0, 1e-12)
    else:
        try:
            direct = 1.0 - math.prod(1.0 - x for x in seq.rhos(2000))
            rep.add("rho_0 vs 1 - prod_{m<=2000}(1 - rho_m)", lc.rho0, direct, 1e-12, mode="rel")
        except IndexError:
            pass
        back = mps.unproject(L, lc.rho0, terms).rhos(terms)
        rep.add("roundtrip max|unproject(L(R)) - R|", float(np.max(np.abs(back - rho))), 0.0, 1e-12)
        again = mps.project(mps.unproject(L, lc.rho0, terms), terms).rhos(terms)
        rep.add("roundtrip max|L(unproject(L(R))) - L(R)|", float(np.max(np.abs(again - sigma))), 0.0, 1e-12)
        long = mps.project(seq, 100).rhos(100)
        rep.add("partial sum of sigma, 100 terms", float(long.sum()), 10.0, 0.0, mode="above")
        P = mps.partial_products(seq, 60)
        alpha = 1.0 - P[:60]
        rep.add("alpha_m increasing, min step m<=60", float(np.min(np.diff(alpha))), 0.0, 0.0, mode="lower")
        rep.add("rho_0 - max alpha_m, m<=60", lc.rho0 - float(alpha.max()), 0.0, 1e-15, mode="lower")
    rep.add(
        "energy identity max relative residual",
        float(np.max(mps.energy_identity_residuals(seq, terms))),
        0.0,
        1e-12,
    )
    return rep


def exp_diameter(seq: MatchingSequence, m_max: int = 4) -> ExperimentReport:
    if not 0 <= m_max <= 4:
        raise ValueError(f"m_max must be in 0..4, got {m_max}")
    rep = ExperimentReport("diameter", {"sequence": seq.to_dict(), "m_max": m_max})
    for m in range(m_max + 1):
        net = build_ssg(seq, m, 1)
        rep.add(f"diameter m={m}", resistance_diameter(net), 4.0, 0.0, mode="upper")
        rep.add(f"R(p1,p2) m={m}", effective_resistance(net, tp.p(1), tp.p(2)), 2.0 / 3.0, 1e-10)
    return rep


def exp_symmetry(seq: MatchingSequence, m: int = 3, seed: int = 7, subdiv: int = 2) -> ExperimentReport:
    if not 0 <= m <= 4:
        raise ValueError(f"m must be in 0..4, got {m}")
    rep = ExperimentReport("symmetry", {"sequence": seq.to_dict(), "m": m, "seed": seed, "subdiv": subdiv})
    f = random_function(seed, m, subdiv)
    net = build_ssg(seq, m, subdiv)
    base = energy(net, f)
    images = [compose_symmetry(f, s) for s in tp.SYMMETRIES]
    for s, fs in zip(tp.SYMMETRIES, images):
        rep.add(f"symmetry {''.join(map(str, s.images))}", energy(net, fs), base, 1e-12, mode="rel")
    # Negative control: one triangle edge 50% stronger breaks the symmetry.
    c = np.array(net.conductances)
    c[0] *= 1.5
    bad = net.with_conductances(c)
    bad_base = energy(bad, f)
    worst = max(abs(energy(bad, fs) - bad_base) / abs(bad_base) for fs in images)
    rep.add("control: corrupted edge weight", worst, 0.0, 1e-6, mode="exceeds")
    return rep


EXPERIMENTS = {
    "compat": exp_compat_chain,
    "sgpart": exp_sg_part,
    "decomp": exp_decomposition,
    "projection": exp_projection,
    "diameter": exp_diameter,
    "symmetry": exp_symmetry,
}
