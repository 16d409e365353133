"""Laplacians, traces (Schur complements), effective resistance and harmonic extension."""
from __future__ import annotations

import heapq
import io
import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from . import topology as tp
from .mp_sequence import MatchingSequence
from .network import ResistorNetwork, build_from_pairs, build_sg, build_ssg

# Above this many interior vertices the solves switch to sparse LU.
DENSE_LIMIT = 3000
STRUCTURAL_TOL = 1e-9
SCALAR_TOL = 1e-12


class InfiniteResistanceError(ValueError):
    """The two vertices lie in different connected components."""


class EngineFault(RuntimeError):
    """Numerical failure that a connected positive network cannot produce."""


def laplacian(net: ResistorNetwork, sparse: bool = False):
    n = net.n_vertices
    h, t, c = net.heads, net.tails, net.conductances
    rows = np.concatenate([h, t, h, t])
    cols = np.concatenate([t, h, h, t])
    vals = np.concatenate([-c, -c, c, c])
    L = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return L if sparse else L.toarray()


def is_connected(net: ResistorNetwork) -> bool:
    k, _ = connected_components(laplacian(net, sparse=True), directed=False)
    return k == 1


def _solve_spd(A, rhs):
    """Solve A x = rhs for a symmetric positive definite A (dense or sparse)."""
    if sp.issparse(A):
        if A.shape[0] <= DENSE_LIMIT:
            A = A.toarray()
        else:
            return splu(A.tocsc()).solve(np.asarray(rhs, dtype=float))
    try:
        factor = sla.cho_factor(A)
    except sla.LinAlgError as exc:
        raise EngineFault("interior block is singular; network disconnected from boundary") from exc
    return sla.cho_solve(factor, rhs)


def _split(net: ResistorNetwork, boundary: Sequence[Hashable]):
    try:
        b = np.array([net.index[v] for v in boundary], dtype=np.int64)
    except KeyError as exc:
        raise KeyError(f"boundary vertex {exc.args[0]} is not in the network") from None
    if len(b) == 0:
        raise ValueError("boundary must be nonempty")
    if len(set(b.tolist())) != len(b):
        raise ValueError("boundary has repeated vertices")
    mask = np.ones(net.n_vertices, dtype=bool)
    mask[b] = False
    return b, np.flatnonzero(mask)


@dataclass
class TraceForm:
    boundary: tuple
    matrix: np.ndarray  # Laplacian of the reduced network

    @property
    def conductances(self) -> np.ndarray:
        c = -self.matrix.copy()
        np.fill_diagonal(c, 0.0)
        return c

    def conductance(self, p, q) -> float:
        i, j = self.boundary.index(p), self.boundary.index(q)
        return float(-self.matrix[i, j])

    def energy(self, values) -> float:
        v = np.asarray(values, dtype=float)
        return float(v @ self.matrix @ v)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("," + ",".join(str(v) for v in self.boundary) + "\n")
        for v, row in zip(self.boundary, self.matrix):
            out.write(f"{v}," + ",".join(f"{x:.10g}" for x in row) + "\n")
        return out.getvalue()


def _adjacency(net: ResistorNetwork) -> list[dict]:
    adj: list[dict] = [dict() for _ in range(net.n_vertices)]
    for h, t, c in zip(net.heads.tolist(), net.tails.tolist(), net.conductances.tolist()):
        adj[h][t] = adj[h].get(t, 0.0) + c
        adj[t][h] = adj[h][t]
    return adj


def _kron_eliminate(adj: list[dict], interior) -> None:
    """Eliminate ``interior`` vertices in place, minimum degree first.

    Each step adds c_vj c_vk / sum_k c_vk to the conductance between the
    neighbours j, k of the removed vertex v.  Only positive quantities are
    added, so the result keeps full relative accuracy however graded the
    conductances are.
    """
    todo = set(interior)
    gone = set()
    heap = [(len(adj[v]), v) for v in todo]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in gone:
            continue
        if d != len(adj[v]):
            heapq.heappush(heap, (len(adj[v]), v))
            continue
        items = list(adj[v].items())
        total = math.fsum(c for _, c in items)
        if total <= 0.0:
            raise EngineFault(f"vertex {v} is isolated from the boundary")
        for j, _ in items:
            del adj[j][v]
        for a, (j, cj) in enumerate(items):
            row = adj[j]
            for k, ck in items[a + 1 :]:
                w = row.get(k, 0.0) + cj * ck / total
                row[k] = w
                adj[k][j] = w
        adj[v] = {}
        gone.add(v)
        for j, _ in items:
            if j in todo and j not in gone:
                heapq.heappush(heap, (len(adj[j]), j))


def trace(net: ResistorNetwork, boundary: Sequence[Hashable], method: str = "kron") -> TraceForm:
    """Trace of the network energy onto ``boundary`` (Schur complement of the Laplacian).

    ``method="kron"`` eliminates vertex by vertex on conductances and is the
    default; ``method="cholesky"`` forms the Schur complement with a dense or
    sparse factorization of the interior block.
    """
    b, i = _split(net, boundary)
    if method == "cholesky":
        L = laplacian(net, sparse=True)
        Lbb = L[b][:, b].toarray()
        if len(i) == 0:
            return TraceForm(tuple(boundary), Lbb)
        Lib = L[i][:, b]
        X = _solve_spd(L[i][:, i], Lib.toarray())
        S = Lbb - Lib.T @ X
        return TraceForm(tuple(boundary), np.asarray(0.5 * (S + S.T)))
    if method != "kron":
        raise ValueError(f"unknown trace method {method!r}")
    if not is_connected(net):
        raise EngineFault("trace needs a connected network")
    adj = _adjacency(net)
    _kron_eliminate(adj, i.tolist())
    pos = {v: k for k, v in enumerate(b.tolist())}
    C = np.zeros((len(b), len(b)))
    for v, row in zip(b.tolist(), (adj[v] for v in b.tolist())):
        for k, c in row.items():
            C[pos[v], pos[k]] = c
    S = -C
    np.fill_diagonal(S, C.sum(axis=1))
    return TraceForm(tuple(boundary), S)


@dataclass
class HarmonicExtension:
    boundary: dict
    vertices: tuple
    values: np.ndarray

    def __getitem__(self, v) -> float:
        return float(self.values[self.vertices.index(v)])

    def as_dict(self) -> dict:
        return dict(zip(self.vertices, self.values.tolist()))


def harmonic_extend(net: ResistorNetwork, data: Mapping[Hashable, float]) -> HarmonicExtension:
    """Energy minimizer among functions with the given boundary values."""
    keys = list(data)
    b, i = _split(net, keys)
    u = np.empty(net.n_vertices)
    u[b] = [float(data[k]) for k in keys]
    if len(i):
        L = laplacian(net, sparse=True)
        u[i] = _solve_spd(L[i][:, i], -(L[i][:, b] @ u[b]))
    return HarmonicExtension(dict(data), net.vertices, u)


def _grounded_inverse(net: ResistorNetwork) -> np.ndarray:
    """Inverse of the Laplacian with vertex 0 grounded, padded with a zero row/column."""
    if not is_connected(net):
        raise InfiniteResistanceError("network is disconnected")
    n = net.n_vertices
    L = laplacian(net)
    G = np.zeros((n, n))
    if n > 1:
        G[1:, 1:] = sla.cho_solve(sla.cho_factor(L[1:, 1:]), np.eye(n - 1))
    return G


def effective_resistance(net: ResistorNetwork, p: Hashable, q: Hashable) -> float:
    """R(p, q) as the reciprocal of the two-point trace conductance."""
    if p == q:
        raise ValueError("effective resistance needs two distinct vertices")
    for v in (p, q):
        if v not in net.index:
            raise KeyError(f"vertex {v} is not in the network")
    ip, iq = net.index[p], net.index[q]
    _, labels = connected_components(laplacian(net, sparse=True), directed=False)
    if labels[ip] != labels[iq]:
        raise InfiniteResistanceError(f"{p} and {q} are not connected")
    keep = np.flatnonzero(labels == labels[ip]).tolist()
    adj = _adjacency(net)
    _kron_eliminate(adj, [v for v in keep if v not in (ip, iq)])
    return 1.0 / adj[ip][iq]


def resistance_matrix(net: ResistorNetwork) -> np.ndarray:
    G = _grounded_inverse(net)
    d = np.diag(G)
    R = d[:, None] + d[None, :] - 2.0 * G
    np.fill_diagonal(R, 0.0)
    return R


def resistance_diameter(net: ResistorNetwork) -> float:
    return float(resistance_matrix(net).max())


def delta_wye(r12: float, r23: float, r31: float) -> tuple[float, float, float]:
    """Star arm resistances (at vertices 1, 2, 3) equivalent to a triangle."""
    if min(r12, r23, r31) <= 0:
        raise ValueError("triangle resistances must be positive")
    s = r12 + r23 + r31
    return r12 * r31 / s, r12 * r23 / s, r23 * r31 / s


def wye_delta(R1: float, R2: float, R3: float) -> tuple[float, float, float]:
    """Inverse of ``delta_wye``: triangle resistances (r12, r23, r31)."""
    if min(R1, R2, R3) <= 0:
        raise ValueError("star resistances must be positive")
    s = R1 * R2 + R2 * R3 + R3 * R1
    return s / R3, s / R1, s / R2


def star_network(R1: float, R2: float, R3: float) -> ResistorNetwork:
    return ResistorNetwork.from_edges(
        [(1, "center", 1.0 / R1), (2, "center", 1.0 / R2), (3, "center", 1.0 / R3)],
        vertices=[1, 2, 3, "center"],
    )


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def compatibility_residual(seq: MatchingSequence, m: int) -> float:
    """Max-abs gap between the level-(m+1) network traced onto V_m and the level-m network."""
    if m < 0:
        raise ValueError("m must be >= 0")
    fine = build_ssg(seq, m + 1, 1)
    coarse = build_ssg(seq, m, 1)
    return _max_abs(trace(fine, tp.vertex_set(m)).matrix, laplacian(coarse))


def pairs_compatibility_residual(pairs: Sequence[tuple[float, float]], m: int) -> float:
    """Same as ``compatibility_residual`` for raw (r, rho) pairs that need not match."""
    fine = build_from_pairs(pairs, m + 1, 1)
    coarse = build_from_pairs(pairs, m, 1)
    return _max_abs(trace(fine, tp.vertex_set(m)).matrix, laplacian(coarse))


def sg_compatibility_residual(m: int) -> float:
    coarse = build_sg(m)
    traced = trace(build_sg(m + 1), coarse.vertices)
    return _max_abs(traced.matrix, laplacian(coarse))
