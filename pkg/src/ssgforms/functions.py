"""Test functions: SG pullbacks, SG-harmonic functions, segment tents, clamps, noise."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import topology as tp
from .engine import harmonic_extend
from .network import DiscretizedFunction, build_sg
from .topology import Address, Segment, SgClass, Symmetry


@dataclass
class SgFunction:
    level: int
    values: dict  # SgClass -> float

    def __getitem__(self, c: SgClass) -> float:
        return self.values[c]

    def at(self, a: Address) -> float:
        return self.values[tp.sg_class(a, self.level)]

    def as_array(self) -> np.ndarray:
        return np.array([self.values[c] for c in tp.sg_vertex_set(self.level)])

    def energy(self) -> float:
        """E_m^* on the level-m gasket network."""
        return build_sg(self.level).energy_of_values(self.as_array())


def sg_harmonic(boundary, m: int) -> SgFunction:
    """Harmonic function on the level-m gasket with values ``boundary`` at p_1, p_2, p_3."""
    if len(boundary) != 3:
        raise ValueError("boundary needs three values")
    data = {tp.sg_class(tp.p(i), m): float(b) for i, b in zip(tp.CORNERS, boundary)}
    h = harmonic_extend(build_sg(m), data)
    return SgFunction(m, h.as_dict())


def refine(g: SgFunction, M: int) -> SgFunction:
    """Extend a level-m SG function to level M, harmonically inside each level-m cell."""
    if M < g.level:
        raise ValueError("cannot refine to a coarser level")
    if M == g.level:
        return g
    data = {c: g.values[c] for c in tp.sg_vertex_set(g.level)}
    return SgFunction(M, harmonic_extend(build_sg(M), data).as_dict())


def pullback_sg(g: SgFunction, m: int, M: int, subdiv: int = 1) -> DiscretizedFunction:
    """u∘π_* on the SSG, discretized at depth M; every segment profile is constant."""
    if M < m:
        raise ValueError(f"target depth {M} is below the SG level {m}")
    if g.level != m:
        raise ValueError(f"SG function lives at level {g.level}, not {m}")
    fine = refine(g, M)
    vals = np.array([fine.values[tp.sg_class(a, M)] for a in tp.vertex_set(M)])
    idx = tp.vertex_index(M)
    ends = np.array([vals[idx[seg.endpoints()[0]]] for seg in tp.segment_list(M)])
    profiles = np.repeat(ends[:, None], subdiv - 1, axis=1)
    return DiscretizedFunction(M, subdiv, vals, profiles)


def tent_on_segment(word: str, bond: tuple[int, int], M: int, subdiv: int) -> DiscretizedFunction:
    """Zero except for a tent of height 1 on the interior of segment e_ij^w."""
    if subdiv % 2:
        raise ValueError(f"tent needs an even subdivision, got {subdiv}")
    seg = Segment(word, tuple(bond))
    if seg.level > M:
        raise ValueError(f"segment {seg} is deeper than level {M}")
    t = np.arange(1, subdiv) / subdiv
    profiles = np.zeros((len(tp.segment_list(M)), subdiv - 1))
    profiles[tp.segment_index(M)[seg]] = 1.0 - np.abs(2.0 * t - 1.0)
    return DiscretizedFunction(M, subdiv, np.zeros(3 ** (M + 1)), profiles)


def clamp(f: DiscretizedFunction) -> DiscretizedFunction:
    return f.map(lambda x: np.clip(x, 0.0, 1.0))


def random_function(seed: int, M: int, subdiv: int) -> DiscretizedFunction:
    rng = np.random.default_rng(seed)
    vals = rng.uniform(-1.0, 1.0, 3 ** (M + 1))
    profiles = rng.uniform(-1.0, 1.0, (len(tp.segment_list(M)), subdiv - 1))
    return DiscretizedFunction(M, subdiv, vals, profiles)


def compose_cell(f: DiscretizedFunction, i: int) -> DiscretizedFunction:
    """f∘G_i as a function one level shallower."""
    if f.level < 1:
        raise ValueError("need depth >= 1 to restrict to a cell")
    M = f.level - 1
    vals = [f.vertex_value(tp.canonicalize(str(i) + a.word, a.corner)) for a in tp.vertex_set(M)]
    sidx = tp.segment_index(f.level)
    profiles = np.array([f.profiles[sidx[Segment(str(i) + s.word, s.bond)]] for s in tp.segment_list(M)])
    return DiscretizedFunction(M, f.subdiv, vals, profiles.reshape(len(tp.segment_list(M)), f.subdiv - 1))


def compose_symmetry(f: DiscretizedFunction, s: Symmetry) -> DiscretizedFunction:
    """f∘φ where φ is the isometry of the gasket acting on letters by ``s``."""
    M = f.level
    vals = [f.vertex_value(tp.apply_symmetry(s, a)) for a in tp.vertex_set(M)]
    sidx = tp.segment_index(M)
    rows = []
    for seg in tp.segment_list(M):
        image, flipped = tp.apply_symmetry_segment(s, seg)
        prof = f.profiles[sidx[image]]
        rows.append(prof[::-1] if flipped else prof)
    return DiscretizedFunction(M, f.subdiv, vals, np.array(rows).reshape(len(rows), f.subdiv - 1))


# --- spec mini-language -------------------------------------------------------


def function_from_spec(spec, M: int, subdiv: int) -> DiscretizedFunction:
    """Build a function from a JSON-like spec (see README for the grammar)."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind") if isinstance(spec, dict) else None
    if kind == "pullback_harmonic":
        return pullback_sg(sg_harmonic(spec["boundary"], M), M, M, subdiv)
    if kind == "tent":
        seg = Segment.parse(spec["segment"])
        return tent_on_segment(seg.word, seg.bond, M, subdiv)
    if kind == "random":
        return random_function(int(spec["seed"]), M, subdiv)
    if kind == "sum":
        parts = [function_from_spec(p, M, subdiv) for p in spec["parts"]]
        if not parts:
            raise ValueError("sum needs at least one part")
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        return total
    raise ValueError(f"unknown function kind {kind!r}")
