"""Finite resistor networks for E_{R,m} (SSG) and E_m^* (SG), and the form pieces.

Energies use one term per unordered edge: E(u) = sum_e c_e (u_p - u_q)^2.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import topology as tp
from .mp_sequence import FIVE_THIRDS, MatchingSequence, deltas, gammas
from .topology import Address, Segment


@dataclass(frozen=True)
class SegmentNode:
    """Interior sample point ``index`` (1..subdiv-1) on a subdivided bridge segment."""

    segment: Segment
    index: int
    subdiv: int

    @property
    def t(self) -> float:
        return self.index / self.subdiv

    def __str__(self) -> str:
        return f"{self.segment}#{self.index}/{self.subdiv}"


@dataclass(frozen=True)
class EdgeTag:
    kind: str  # "triangle" | "segment"
    level: int
    word: str
    bond: tuple[int, int]
    sub: int | None = None

    def __str__(self) -> str:
        base = f"{self.kind}:{self.level}:{self.word or '∅'}:{self.bond[0]}{self.bond[1]}"
        return base if self.sub is None else f"{base}:{self.sub}"


class ResistorNetwork:
    """Vertex list plus unordered weighted edges, stored as index arrays."""

    def __init__(self, vertices: Sequence[Hashable], heads, tails, conductances, tags=None):
        self.vertices = tuple(vertices)
        self.index = {v: k for k, v in enumerate(self.vertices)}
        if len(self.index) != len(self.vertices):
            raise ValueError("duplicate vertices")
        self.heads = np.asarray(heads, dtype=np.int64)
        self.tails = np.asarray(tails, dtype=np.int64)
        self.conductances = np.asarray(conductances, dtype=float)
        if not (len(self.heads) == len(self.tails) == len(self.conductances)):
            raise ValueError("edge arrays differ in length")
        if np.any(self.heads == self.tails):
            raise ValueError("self-loops are not allowed")
        if np.any(~(self.conductances > 0)):
            raise ValueError("conductances must be positive")
        self.tags = tuple(tags) if tags is not None else (None,) * len(self.heads)
        for arr in (self.heads, self.tails, self.conductances):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[Hashable, Hashable, float]], vertices=None):
        edges = list(edges)
        if vertices is None:
            vertices = []
            seen = set()
            for a, b, _ in edges:
                for v in (a, b):
                    if v not in seen:
                        seen.add(v)
                        vertices.append(v)
        idx = {v: k for k, v in enumerate(vertices)}
        return cls(
            vertices,
            [idx[a] for a, _, _ in edges],
            [idx[b] for _, b, _ in edges],
            [c for _, _, c in edges],
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.heads)

    def edges(self):
        for h, t, c in zip(self.heads, self.tails, self.conductances):
            yield self.vertices[h], self.vertices[t], float(c)

    def with_conductances(self, conductances) -> "ResistorNetwork":
        return ResistorNetwork(self.vertices, self.heads, self.tails, conductances, self.tags)

    def energy_of_values(self, values: np.ndarray) -> float:
        """Energy of a value vector aligned with ``vertices``."""
        diff = values[self.heads] - values[self.tails]
        return float(np.dot(self.conductances, diff * diff))

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("u,v,conductance,tag\n")
        for (a, b, c), tag in zip(self.edges(), self.tags):
            out.write(f"{a},{b},{c:.10g},{tag if tag is not None else ''}\n")
        return out.getvalue()


def build_from_scales(delta_m: float, segment_scales: Sequence[float], m: int, subdiv: int = 1) -> ResistorNetwork:
    """Triangle resistance ``delta_m``; level-k segments have resistance ``segment_scales[k-1]``.

    The scales need not come from a matching sequence; that is what the
    compatibility negative controls rely on.
    """
    tp.check_level(m)
    if subdiv < 1:
        raise ValueError("subdivision must be >= 1")
    if len(segment_scales) < m:
        raise ValueError(f"need {m} segment scales, got {len(segment_scales)}")
    vidx = tp.vertex_index(m)
    vertices: list = list(tp.vertex_set(m))
    heads, tails, cond, tags = [], [], [], []

    tri = 1.0 / delta_m
    for w in tp.words(m):
        for i, j in tp.BONDS:
            heads.append(vidx[tp.canonicalize(w, i)])
            tails.append(vidx[tp.canonicalize(w, j)])
            cond.append(tri)
            tags.append(EdgeTag("triangle", m, w, (i, j)))

    for seg in tp.segment_list(m):
        k = seg.level
        c = subdiv / segment_scales[k - 1]
        a, b = seg.endpoints()
        chain = [vidx[a]]
        for s in range(1, subdiv):
            chain.append(len(vertices))
            vertices.append(SegmentNode(seg, s, subdiv))
        chain.append(vidx[b])
        for s in range(subdiv):
            heads.append(chain[s])
            tails.append(chain[s + 1])
            cond.append(c)
            tags.append(EdgeTag("segment", k, seg.word, seg.bond, s))
    return ResistorNetwork(vertices, heads, tails, cond, tags)


def build_from_pairs(pairs: Sequence[tuple[float, float]], m: int, subdiv: int = 1) -> ResistorNetwork:
    """Like ``build_ssg`` but from raw (r, rho) pairs, matching or not."""
    delta = 1.0
    gam = []
    for r, rho in pairs[:m]:
        gam.append(delta * rho)
        delta *= r
    return build_from_scales(delta, gam, m, subdiv)


@lru_cache(maxsize=64)
def build_ssg(seq: MatchingSequence, m: int, subdiv: int = 1) -> ResistorNetwork:
    """Network realizing E_{R,m}; segments subdivided into ``subdiv`` sub-edges."""
    pairs = [(p.r, p.rho) for p in seq.pairs(m)]
    return build_from_pairs(pairs, m, subdiv)


@lru_cache(maxsize=16)
def build_sg(m: int) -> ResistorNetwork:
    """Level-m Sierpinski gasket network, conductance (5/3)^m on every cell edge."""
    tp.check_level(m)
    verts = tp.sg_vertex_set(m)
    idx = {v: k for k, v in enumerate(verts)}
    c = FIVE_THIRDS**m
    heads, tails, tags = [], [], []
    for w in tp.words(m):
        for i, j in tp.BONDS:
            heads.append(idx[tp.sg_class(tp.canonicalize(w, i), m)])
            tails.append(idx[tp.sg_class(tp.canonicalize(w, j), m)])
            tags.append(EdgeTag("triangle", m, w, (i, j)))
    return ResistorNetwork(verts, heads, tails, np.full(len(heads), c), tags)


# --- discretized functions ----------------------------------------------------


class DiscretizedFunction:
    """Values on V_M plus ``subdiv - 1`` interior samples on every segment with |w| < M.

    Between samples the function is the piecewise-linear interpolant in the
    unit parameter of each segment, running from (w·i, j) to (w·j, i).
    """

    def __init__(self, level: int, subdiv: int, values, profiles=None):
        tp.check_level(level)
        if subdiv < 1:
            raise ValueError("subdivision must be >= 1")
        self.level = level
        self.subdiv = subdiv
        self.values = np.asarray(values, dtype=float).copy()
        n_seg = len(tp.segment_list(level))
        if self.values.shape != (3 ** (level + 1),):
            raise ValueError(f"expected {3 ** (level + 1)} vertex values, got {self.values.shape}")
        if profiles is None:
            profiles = np.zeros((n_seg, subdiv - 1))
        self.profiles = np.asarray(profiles, dtype=float).reshape(n_seg, subdiv - 1).copy()
        self.values.setflags(write=False)
        self.profiles.setflags(write=False)

    # construction helpers
    @classmethod
    def constant(cls, value: float, level: int, subdiv: int = 1):
        n_seg = len(tp.segment_list(level))
        return cls(level, subdiv, np.full(3 ** (level + 1), float(value)), np.full((n_seg, subdiv - 1), float(value)))

    @classmethod
    def from_vertex_map(cls, mapping, level: int, subdiv: int = 1, profiles=None):
        vals = [float(mapping[a]) for a in tp.vertex_set(level)]
        return cls(level, subdiv, vals, profiles)

    def _compatible(self, other: "DiscretizedFunction"):
        if (self.level, self.subdiv) != (other.level, other.subdiv):
            raise ValueError("functions live on different discretizations")

    def __add__(self, other):
        self._compatible(other)
        return DiscretizedFunction(self.level, self.subdiv, self.values + other.values, self.profiles + other.profiles)

    def __sub__(self, other):
        self._compatible(other)
        return DiscretizedFunction(self.level, self.subdiv, self.values - other.values, self.profiles - other.profiles)

    def __mul__(self, k: float):
        return DiscretizedFunction(self.level, self.subdiv, k * self.values, k * self.profiles)

    __rmul__ = __mul__

    def map(self, fn) -> "DiscretizedFunction":
        return DiscretizedFunction(self.level, self.subdiv, fn(self.values), fn(self.profiles))

    def equals(self, other, atol: float = 0.0) -> bool:
        self._compatible(other)
        return bool(
            np.allclose(self.values, other.values, rtol=0, atol=atol)
            and np.allclose(self.profiles, other.profiles, rtol=0, atol=atol)
        )

    # evaluation
    def vertex_value(self, a: Address) -> float:
        a = tp.canonicalize(a.word, a.corner)
        try:
            return float(self.values[tp.vertex_index(self.level)[a]])
        except KeyError:
            raise KeyError(f"address {a} is deeper than the function level {self.level}") from None

    def samples(self, seg: Segment) -> np.ndarray:
        """All n + 1 samples of a segment, endpoints included."""
        try:
            k = tp.segment_index(self.level)[seg]
        except KeyError:
            raise KeyError(f"segment {seg} is deeper than the function level {self.level}") from None
        a, b = seg.endpoints()
        return np.concatenate([[self.vertex_value(a)], self.profiles[k], [self.vertex_value(b)]])

    def value(self, label) -> float:
        if isinstance(label, Address):
            return self.vertex_value(label)
        if isinstance(label, SegmentNode):
            full = self.samples(label.segment)
            grid = np.linspace(0.0, 1.0, self.subdiv + 1)
            return float(np.interp(label.t, grid, full))
        raise KeyError(f"cannot evaluate a discretized SSG function at {label!r}")

    def on(self, net: ResistorNetwork) -> np.ndarray:
        """Values aligned with ``net.vertices``."""
        m = _address_prefix(net)
        out = np.empty(net.n_vertices)
        if m is not None and m <= self.level:
            out[: 3 ** (m + 1)] = self.values[: 3 ** (m + 1)]
            start = 3 ** (m + 1)
        else:
            start = 0
        for k in range(start, net.n_vertices):
            out[k] = self.value(net.vertices[k])
        return out

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("address,value\n")
        for a, v in zip(tp.vertex_set(self.level), self.values):
            out.write(f"{a},{v:.10g}\n")
        for seg, prof in zip(tp.segment_list(self.level), self.profiles):
            out.write(f"\nsegment,{seg}\n")
            out.write("t,value\n")
            for t, v in zip(np.linspace(0, 1, self.subdiv + 1), self.samples(seg)):
                out.write(f"{t:.10g},{v:.10g}\n")
        return out.getvalue()


def _address_prefix(net: ResistorNetwork) -> int | None:
    """Level m if the network's first 3^(m+1) vertices are V_m in standard order."""
    n = 0
    while n < net.n_vertices and isinstance(net.vertices[n], Address):
        n += 1
    m = 0
    while 3 ** (m + 2) <= n:
        m += 1
    if n < 3 or tuple(net.vertices[: 3 ** (m + 1)]) != tuple(tp.vertex_set(m)):
        return None
    return m


def energy(net: ResistorNetwork, f: DiscretizedFunction) -> float:
    return net.energy_of_values(f.on(net))


# --- form components ----------------------------------------------------------


@dataclass(frozen=True)
class FormComponents:
    q_sigma: float
    q_line: np.ndarray
    d_line: np.ndarray
    total: float
    discrete_total: float  # same with Q_k^I in place of D_k^I


@lru_cache(maxsize=None)
def _triangle_pairs(m: int, M: int):
    vidx = tp.vertex_index(M)
    heads, tails = [], []
    for w in tp.words(m):
        for i, j in tp.BONDS:
            heads.append(vidx[tp.canonicalize(w, i)])
            tails.append(vidx[tp.canonicalize(w, j)])
    return np.array(heads), np.array(tails)


@lru_cache(maxsize=None)
def _segment_endpoint_index(M: int):
    vidx = tp.vertex_index(M)
    ends = [seg.endpoints() for seg in tp.segment_list(M)]
    return np.array([vidx[a] for a, _ in ends], dtype=np.int64), np.array([vidx[b] for _, b in ends], dtype=np.int64)


def sigma_energy(f: DiscretizedFunction, m: int) -> float:
    """Q_m^Σ: sum over level-m cells of the unit triangle energy."""
    if m > f.level:
        raise ValueError(f"function level {f.level} is below m = {m}")
    h, t = _triangle_pairs(m, f.level)
    d = f.values[h] - f.values[t]
    return float(np.dot(d, d))


def line_energies(f: DiscretizedFunction, m: int) -> tuple[np.ndarray, np.ndarray]:
    """(Q_k^I, D_k^I) for k = 1..m."""
    if m > f.level:
        raise ValueError(f"function level {f.level} is below m = {m}")
    a, b = _segment_endpoint_index(f.level)
    full = np.column_stack([f.values[a], f.profiles, f.values[b]])
    jump = (full[:, -1] - full[:, 0]) ** 2
    dirichlet = f.subdiv * np.sum(np.diff(full, axis=1) ** 2, axis=1)
    q = np.array([jump[tp.segment_block(k)].sum() for k in range(1, m + 1)])
    d = np.array([dirichlet[tp.segment_block(k)].sum() for k in range(1, m + 1)])
    return q, d


def form_components(seq: MatchingSequence, m: int, f: DiscretizedFunction) -> FormComponents:
    """Pieces of E_{R,m}(f) = Q_m^Σ/delta_m + sum_k D_k^I/gamma_k."""
    if m > f.level:
        raise ValueError(f"insufficient discretization depth: function level {f.level} < m = {m}")
    qs = sigma_energy(f, m)
    q, d = line_energies(f, m)
    delta = deltas(seq, m)[m]
    g = gammas(seq, m)
    return FormComponents(
        q_sigma=qs,
        q_line=q,
        d_line=d,
        total=float(qs / delta + np.sum(d / g)),
        discrete_total=float(qs / delta + np.sum(q / g)),
    )
