"""Vertex addressing for the stretched Sierpinski gasket and its SG quotient.

An address ``(word, corner)`` names the point ``G_word(p_corner)``.  Words are
plain strings over ``"123"``; the empty string is the empty word.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LETTERS = "123"
CORNERS = (1, 2, 3)
# Bonds (i, j) indexing the three bridge segments of every cell.
BONDS = ((1, 2), (2, 3), (3, 1))

DEFAULT_MAX_LEVEL = 8


class LevelError(ValueError):
    """Requested level exceeds the configured cap."""


def max_level() -> int:
    """Level cap, overridable through the ``SSG_MAX_LEVEL`` environment variable."""
    raw = os.environ.get("SSG_MAX_LEVEL")
    if raw is None:
        return DEFAULT_MAX_LEVEL
    try:
        value = int(raw)
    except ValueError as exc:
        raise LevelError(f"SSG_MAX_LEVEL must be an integer, got {raw!r}") from exc
    if value < 0:
        raise LevelError("SSG_MAX_LEVEL must be non-negative")
    return value


def check_level(m: int) -> int:
    if m < 0:
        raise LevelError(f"level must be >= 0, got {m}")
    cap = max_level()
    if m > cap:
        raise LevelError(f"level {m} exceeds max level {cap} (set SSG_MAX_LEVEL to raise it)")
    return m


def check_word(word: str) -> str:
    if any(ch not in LETTERS for ch in word):
        raise ValueError(f"word letters must be in {{1,2,3}}, got {word!r}")
    return word


def _check_corner(corner: int) -> int:
    if corner not in CORNERS:
        raise ValueError(f"corner must be 1, 2 or 3, got {corner!r}")
    return int(corner)


@dataclass(frozen=True)
class Address:
    word: str
    corner: int

    def __post_init__(self):
        check_word(self.word)
        _check_corner(self.corner)

    @property
    def is_canonical(self) -> bool:
        return not self.word.endswith(str(self.corner))

    def sort_key(self):
        return (len(self.word), self.word, self.corner)

    def __str__(self) -> str:
        return f"{self.word}:{self.corner}"

    @classmethod
    def parse(cls, text: str) -> "Address":
        """Parse ``"w:i"``; the word may be empty or written as ``∅``."""
        word, sep, corner = text.strip().partition(":")
        if not sep or not corner.strip().isdigit():
            raise ValueError(f"address must look like 'w:i', got {text!r}")
        word = word.strip()
        if word == "∅":
            word = ""
        return canonicalize(word, int(corner))


def canonicalize(word: str, corner: int) -> Address:
    """Strip the trailing run of ``corner`` from ``word`` (G_i fixes p_i)."""
    _check_corner(corner)
    check_word(word)
    return Address(word.rstrip(str(corner)), corner)


def p(i: int, j: int | None = None) -> Address:
    """``p(i)`` is the corner p_i and ``p(i, j)`` is p_ij = G_i(p_j)."""
    if j is None:
        return Address("", i)
    return canonicalize(str(i), j)


def words(m: int):
    """All words of length ``m`` in lexicographic order."""
    return ["".join(t) for t in itertools.product(LETTERS, repeat=m)]


@lru_cache(maxsize=None)
def _vertex_tuple(m: int) -> tuple[Address, ...]:
    out = []
    for k in range(m + 1):
        for w in words(k):
            for c in CORNERS:
                if not w.endswith(str(c)):
                    out.append(Address(w, c))
    return tuple(out)


def vertex_set(m: int) -> list[Address]:
    """Canonical addresses with word length <= m, ordered by (length, word, corner).

    The ordering makes V_m a prefix of V_{m+1}.
    """
    check_level(m)
    return list(_vertex_tuple(m))


@lru_cache(maxsize=None)
def vertex_index(m: int) -> dict[Address, int]:
    return {a: k for k, a in enumerate(_vertex_tuple(check_level(m)))}


# --- bridge segments -------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Bridge segment e_ij^w joining (w·i, j) to (w·j, i)."""

    word: str
    bond: tuple[int, int]

    def __post_init__(self):
        check_word(self.word)
        if self.bond not in BONDS:
            raise ValueError(f"bond must be one of {BONDS}, got {self.bond!r}")

    @property
    def level(self) -> int:
        return len(self.word) + 1

    def endpoints(self) -> tuple[Address, Address]:
        i, j = self.bond
        return Address(self.word + str(i), j), Address(self.word + str(j), i)

    def __str__(self) -> str:
        i, j = self.bond
        return f"{self.word or '∅'}:{i}{j}"

    @classmethod
    def parse(cls, text: str) -> "Segment":
        word, sep, bond = text.strip().partition(":")
        word = "" if word.strip() in ("", "∅") else word.strip()
        if not sep or len(bond.strip()) != 2 or not bond.strip().isdigit():
            raise ValueError(f"segment must look like 'w:ij', got {text!r}")
        return cls(word, (int(bond.strip()[0]), int(bond.strip()[1])))


@lru_cache(maxsize=None)
def _segment_tuple(M: int) -> tuple[Segment, ...]:
    return tuple(Segment(w, b) for k in range(M) for w in words(k) for b in BONDS)


def segment_list(M: int) -> list[Segment]:
    """Segments e_ij^w with |w| < M, grouped by level then word then bond."""
    check_level(M)
    return list(_segment_tuple(M))


@lru_cache(maxsize=None)
def segment_index(M: int) -> dict[Segment, int]:
    return {s: k for k, s in enumerate(_segment_tuple(check_level(M)))}


def segment_block(k: int) -> slice:
    """Positions of level-k segments (|w| = k-1) inside ``segment_list``."""
    if k < 1:
        raise ValueError("segment levels start at 1")
    start = (3**k - 3) // 2
    return slice(start, start + 3**k)


# --- symmetries --------------------------------------------------------------


@dataclass(frozen=True)
class Symmetry:
    """Permutation of {1,2,3}; ``images[i-1]`` is the image of letter i."""

    images: tuple[int, int, int]

    def __post_init__(self):
        if sorted(self.images) != [1, 2, 3]:
            raise ValueError(f"not a permutation of (1,2,3): {self.images!r}")

    def __call__(self, letter: int) -> int:
        return self.images[letter - 1]

    def compose(self, other: "Symmetry") -> "Symmetry":
        """``self ∘ other``: apply ``other`` first."""
        return Symmetry(tuple(self(other(i)) for i in CORNERS))

    def inverse(self) -> "Symmetry":
        inv = [0, 0, 0]
        for i in CORNERS:
            inv[self(i) - 1] = i
        return Symmetry(tuple(inv))

    def map_word(self, word: str) -> str:
        return word.translate(str.maketrans(LETTERS, "".join(map(str, self.images))))


IDENTITY = Symmetry((1, 2, 3))
SYMMETRIES = tuple(Symmetry(t) for t in itertools.permutations(CORNERS))


def apply_symmetry(s: Symmetry, a: Address) -> Address:
    return canonicalize(s.map_word(a.word), s(a.corner))


def apply_symmetry_segment(s: Symmetry, seg: Segment) -> tuple[Segment, bool]:
    """Image of a segment and whether its parametrization is reversed."""
    i, j = s(seg.bond[0]), s(seg.bond[1])
    w = s.map_word(seg.word)
    if (i, j) in BONDS:
        return Segment(w, (i, j)), False
    return Segment(w, (j, i)), True


# --- SG quotient -------------------------------------------------------------


@dataclass(frozen=True)
class SgClass:
    """A vertex of the Sierpinski gasket, as the set of SSG addresses over it.

    ``members`` is sorted, so ``members[0]`` is the lexicographically least.
    """

    members: tuple[Address, ...]

    @property
    def representative(self) -> Address:
        return self.members[0]

    def __str__(self) -> str:
        return str(self.representative)


def _class_members(a: Address) -> tuple[Address, ...]:
    # Junction points have exactly two canonical names, (u·i, j) and (u·j, i).
    if not a.word:
        return (a,)
    u, i = a.word[:-1], int(a.word[-1])
    partner = Address(u + str(a.corner), i)
    return tuple(sorted((a, partner), key=Address.sort_key))


def sg_class(a: Address, m: int) -> SgClass:
    """SG vertex that the SSG point ``a`` collapses onto at level ``m``."""
    a = canonicalize(a.word, a.corner)
    if len(a.word) > m:
        raise ValueError(f"address {a} is deeper than level {m}")
    return SgClass(_class_members(a))


@lru_cache(maxsize=None)
def _sg_vertex_tuple(m: int) -> tuple[SgClass, ...]:
    seen = {sg_class(a, m) for a in _vertex_tuple(m)}
    return tuple(sorted(seen, key=lambda c: c.representative.sort_key()))


def sg_vertex_set(m: int) -> list[SgClass]:
    """V_m^*, with 3(3^m + 1)/2 elements."""
    check_level(m)
    return list(_sg_vertex_tuple(m))


# --- planar embedding --------------------------------------------------------


def _default_corners():
    h = 1.0 / np.sqrt(3.0)
    return (
        np.array([0.0, h]),
        np.array([-0.5, -0.5 * h]),
        np.array([0.5, -0.5 * h]),
    )


@dataclass(frozen=True)
class EmbeddingParams:
    alpha: float = 0.5
    corners: tuple = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0,1), got {self.alpha}")
        if self.corners is None:
            object.__setattr__(self, "corners", _default_corners())
        pts = [np.asarray(c, dtype=float) for c in self.corners]
        if len(pts) != 3:
            raise ValueError("need exactly three corner points")
        for a, b in itertools.combinations(pts, 2):
            if abs(np.linalg.norm(a - b) - 1.0) > 1e-12:
                raise ValueError("corner points must be pairwise at distance 1")
        if np.linalg.norm(sum(pts)) > 1e-12:
            raise ValueError("corner points must sum to zero")
        object.__setattr__(self, "corners", tuple(pts))

    @property
    def ratio(self) -> float:
        return (1.0 - self.alpha) / 2.0


def contraction(i: int, x, params: EmbeddingParams):
    pi = params.corners[i - 1]
    return params.ratio * (np.asarray(x, dtype=float) - pi) + pi


def embed(a: Address, params: EmbeddingParams | None = None) -> np.ndarray:
    params = params or EmbeddingParams()
    x = params.corners[a.corner - 1]
    for letter in reversed(a.word):
        x = contraction(int(letter), x, params)
    return x


def coordinates_csv(m: int, params: EmbeddingParams | None = None) -> str:
    """Coordinate table of V_m (the only rendering this package does)."""
    lines = ["address,x,y"]
    for a in vertex_set(m):
        x, y = embed(a, params)
        lines.append(f"{a},{x:.10g},{y:.10g}")
    return "\n".join(lines) + "\n"
