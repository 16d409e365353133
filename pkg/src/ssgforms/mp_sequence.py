"""Matching pairs (r, rho) with (5/3) r + rho = 1 and the scalar calculus built on them."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

FIVE_THIRDS = 5.0 / 3.0
PAIR_TOL = 1e-15

# Numeric divergence test for explicit sequences.
EXPLICIT_CUTOFF = 10_000
DIVERGE_PRODUCT = 1e-14
CONVERGE_INCREMENT = 1e-15

# Geometric tails are summed until rho_m drops below this, then closed off analytically.
_GEOMETRIC_FLOOR = 1e-20
_GEOMETRIC_MAX_TERMS = 2_000_000


class SequenceError(ValueError):
    pass


class UndeterminedError(SequenceError):
    """Numeric divergence test could not decide within the cutoff."""


@dataclass(frozen=True)
class MatchingPair:
    r: float
    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise SequenceError(f"rho must lie in (0,1), got {self.rho}")
        if not 0.0 < self.r < 0.6:
            raise SequenceError(f"r must lie in (0,3/5), got {self.r}")
        if abs(FIVE_THIRDS * self.r + self.rho - 1.0) > PAIR_TOL:
            raise SequenceError(f"(r, rho) = ({self.r}, {self.rho}) is not matching")


def make_pair(rho: float) -> MatchingPair:
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise SequenceError(f"rho must lie in (0,1), got {rho}")
    return MatchingPair(0.6 * (1.0 - rho), rho)


class MatchingSequence:
    """Lazy sequence of matching pairs indexed from m = 1."""

    family = "abstract"

    def rho(self, m: int) -> float:
        raise NotImplementedError

    def rhos(self, n: int) -> np.ndarray:
        """rho_1 .. rho_n as an array."""
        return np.array([self.rho(m) for m in range(1, n + 1)], dtype=float)

    def pair(self, m: int) -> MatchingPair:
        if m < 1:
            raise SequenceError("pairs are indexed from m = 1")
        return make_pair(self.rho(m))

    def pairs(self, n: int) -> list[MatchingPair]:
        return [self.pair(m) for m in range(1, n + 1)]

    def __iter__(self) -> Iterator[MatchingPair]:
        m = 1
        while True:
            yield self.pair(m)
            m += 1

    def shift(self, n: int) -> "MatchingSequence":
        raise NotImplementedError

    @property
    def known_divergence(self) -> bool | None:
        """True/False when the family decides sum(rho) analytically, None otherwise."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _check_rho(x: float, what: str) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise SequenceError(f"{what} must lie in (0,1), got {x}")
    return x


@dataclass(frozen=True)
class Constant(MatchingSequence):
    value: float
    family = "constant"

    def __post_init__(self):
        _check_rho(self.value, "rho")

    def rho(self, m):
        return self.value

    def rhos(self, n):
        return np.full(n, self.value)

    def shift(self, n):
        return self

    @property
    def known_divergence(self):
        return True

    def to_dict(self):
        return {"family": "constant", "rho": self.value}


@dataclass(frozen=True)
class Geometric(MatchingSequence):
    """rho_m = c q^(m-1)."""

    c: float
    q: float
    family = "geometric"

    def __post_init__(self):
        _check_rho(self.c, "c")
        if not 0.0 < self.q <= 1.0:
            raise SequenceError(f"q must lie in (0,1], got {self.q}")

    def rho(self, m):
        return self.c * self.q ** (m - 1)

    def rhos(self, n):
        return self.c * self.q ** np.arange(n, dtype=float)

    def shift(self, n):
        return Geometric(self.c * self.q**n, self.q) if n else self

    @property
    def known_divergence(self):
        return self.q == 1.0

    def to_dict(self):
        return {"family": "geometric", "c": self.c, "q": self.q}

    def _tail_logs(self, n: int) -> np.ndarray:
        # T_m = sum_{i>=m} log(1 - rho_i) for m = 1..n+1
        q = self.q
        if self.c < _GEOMETRIC_FLOOR:
            count = 1
        else:
            count = int(math.ceil(math.log(_GEOMETRIC_FLOOR / self.c) / math.log(q))) + 1
        count = min(max(count, n + 1), _GEOMETRIC_MAX_TERMS)
        logs = np.log1p(-self.rhos(count))
        remainder = -self.c * q**count / (1.0 - q)
        tails = np.cumsum(logs[::-1])[::-1] + remainder
        return tails[: n + 1]


@dataclass(frozen=True)
class Harmonic(MatchingSequence):
    """rho_m = c / (m + offset); ``offset`` only appears after shifting."""

    c: float
    offset: int = 0
    family = "harmonic"

    def __post_init__(self):
        if self.offset < 0:
            raise SequenceError("offset must be >= 0")
        _check_rho(self.c / (1 + self.offset), "rho_1")

    def rho(self, m):
        return self.c / (m + self.offset)

    def rhos(self, n):
        return self.c / (np.arange(1, n + 1, dtype=float) + self.offset)

    def shift(self, n):
        return Harmonic(self.c, self.offset + n) if n else self

    @property
    def known_divergence(self):
        return True

    def to_dict(self):
        d = {"family": "harmonic", "c": self.c}
        if self.offset:
            d["offset"] = self.offset
        return d


@dataclass(frozen=True)
class Explicit(MatchingSequence):
    """Finite list of rho values, optionally continued by another sequence.

    ``divergent`` and ``limit`` record facts known from how the sequence was
    produced (for instance every projected sequence has a divergent sum), so
    that the numeric test is not needed.  ``limit`` is the infinite product R_*
    and ``complements[m-1]`` is 1 - prod_{i>=m}(1 - rho_i) when known exactly.
    """

    values: tuple[float, ...]
    tail: MatchingSequence | None = None
    divergent: bool | None = None
    limit: float | None = None
    complements: tuple[float, ...] | None = None
    family = "explicit"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.complements is not None:
            object.__setattr__(self, "complements", tuple(float(v) for v in self.complements))
        for v in self.values:
            _check_rho(v, "rho")
        if self.limit is not None and not 0.0 <= self.limit < 1.0:
            raise SequenceError("limit product must lie in [0,1)")

    def __len__(self):
        return len(self.values)

    def rho(self, m):
        if m < 1:
            raise SequenceError("pairs are indexed from m = 1")
        if m <= len(self.values):
            return self.values[m - 1]
        if self.tail is None:
            raise IndexError(f"explicit sequence has only {len(self.values)} terms")
        return self.tail.rho(m - len(self.values))

    def rhos(self, n):
        head = np.asarray(self.values[:n], dtype=float)
        if n <= len(self.values):
            return head
        if self.tail is None:
            raise IndexError(f"explicit sequence has only {len(self.values)} terms")
        return np.concatenate([head, self.tail.rhos(n - len(self.values))])

    def shift(self, n):
        if n == 0:
            return self
        if n >= len(self.values):
            if self.tail is None:
                raise IndexError("cannot shift past the end of a finite sequence")
            return self.tail.shift(n - len(self.values))
        limit = None
        if self.limit is not None:
            dropped = np.sum(np.log1p(-np.asarray(self.values[:n])))
            limit = self.limit / math.exp(dropped) if self.limit > 0 else 0.0
        comp = self.complements[n:] if self.complements is not None else None
        return Explicit(self.values[n:], self.tail, self.divergent, limit, comp)

    @property
    def known_divergence(self):
        if self.divergent is not None:
            return self.divergent
        if self.limit is not None:
            return self.limit == 0.0
        if self.tail is not None:
            return self.tail.known_divergence
        return None

    def to_dict(self):
        d = {"family": "explicit", "rho": list(self.values)}
        if self.tail is not None:
            d["tail"] = self.tail.to_dict()
        if self.divergent is not None:
            d["divergent"] = self.divergent
        if self.limit is not None:
            d["limit"] = self.limit
        if self.complements is not None:
            d["complements"] = list(self.complements)
        return d


def sequence_from_dict(d: dict) -> MatchingSequence:
    if not isinstance(d, dict) or "family" not in d:
        raise SequenceError("sequence spec must be an object with a 'family' key")
    fam = d["family"]
    try:
        if fam == "constant":
            return Constant(float(d["rho"]))
        if fam == "geometric":
            return Geometric(float(d["c"]), float(d["q"]))
        if fam == "harmonic":
            return Harmonic(float(d["c"]), int(d.get("offset", 0)))
        if fam == "explicit":
            tail = d.get("tail")
            return Explicit(
                tuple(d["rho"]),
                sequence_from_dict(tail) if tail is not None else None,
                d.get("divergent"),
                d.get("limit"),
                d.get("complements"),
            )
    except KeyError as exc:
        raise SequenceError(f"{fam} sequence spec is missing key {exc}") from exc
    raise SequenceError(f"unknown sequence family {fam!r}")


def parse_sequence(text: str) -> MatchingSequence:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequenceError(f"malformed sequence JSON: {exc.msg}") from exc
    return sequence_from_dict(d)


def shift(seq: MatchingSequence, n: int) -> MatchingSequence:
    if n < 0:
        raise SequenceError("shift must be >= 0")
    return seq.shift(n)


# --- limit constants ----------------------------------------------------------


@dataclass(frozen=True)
class LimitConstants:
    r_star: float
    c_star: float
    rho0: float
    diverges: bool


def _numeric_limit(seq: MatchingSequence) -> float:
    """Heuristic R_* for sequences whose family cannot decide divergence."""
    n = EXPLICIT_CUTOFF
    if isinstance(seq, Explicit) and seq.tail is None:
        n = min(n, len(seq))
    logs = np.log1p(-seq.rhos(n))
    partial = np.cumsum(logs)
    for m in range(n):
        if partial[m] < math.log(DIVERGE_PRODUCT):
            return 0.0
        if -logs[m] < CONVERGE_INCREMENT:
            return math.exp(partial[m])
    raise UndeterminedError(
        f"divergence of sum(rho) undetermined after {n} terms "
        f"(product {math.exp(partial[-1]):.3g}, last increment {-logs[-1]:.3g})"
    )


def tail_logs(seq: MatchingSequence, n: int) -> np.ndarray:
    """T_m = sum_{i>=m} log(1 - rho_i) for m = 1..n+1 (convergent sequences only)."""
    if isinstance(seq, Geometric) and seq.q < 1.0:
        return seq._tail_logs(n)
    if isinstance(seq, Explicit):
        k = len(seq)
        if seq.limit is not None and seq.limit > 0.0:
            head = np.log1p(-seq.rhos(min(n, k) if seq.tail is None else n))
            lead = np.concatenate([[0.0], np.cumsum(head)])
            out = math.log(seq.limit) - lead
            if len(out) < n + 1:
                raise IndexError(f"explicit sequence has only {k} terms")
            return out[: n + 1]
        if seq.tail is not None and seq.tail.known_divergence is False:
            tail_t = tail_logs(seq.tail, max(n - k, 0))
            head = np.log1p(-np.asarray(seq.values))
            own = np.cumsum(head[::-1])[::-1] + tail_t[0]
            return np.concatenate([own, tail_t[1:]])[: n + 1]
    if seq.known_divergence:
        raise SequenceError("sum(rho) diverges; the tail products vanish")
    # Heuristic fallback: truncate where the numeric test declared convergence.
    r = _numeric_limit(seq)
    if r == 0.0:
        raise SequenceError("sum(rho) diverges; the tail products vanish")
    count = EXPLICIT_CUTOFF
    if isinstance(seq, Explicit) and seq.tail is None:
        count = len(seq)
    logs = np.log1p(-seq.rhos(count))
    stop = next(i for i in range(count) if -logs[i] < CONVERGE_INCREMENT)
    own = np.cumsum(logs[: stop + 1][::-1])[::-1]
    out = np.concatenate([own, np.zeros(max(n + 1 - len(own), 0))])
    return out[: n + 1]


def tail_complements(seq: MatchingSequence, n: int) -> np.ndarray:
    """1 - prod_{i>=m}(1 - rho_i) for m = 1..n (convergent sequences only)."""
    if isinstance(seq, Explicit) and seq.complements is not None and n <= len(seq.complements):
        return np.asarray(seq.complements[:n])
    return -np.expm1(tail_logs(seq, n)[:n])


def r_star(seq: MatchingSequence) -> LimitConstants:
    """R_* = prod(1 - rho_m), computed in log space."""
    div = seq.known_divergence
    if div is None:
        value = _numeric_limit(seq)
    elif div:
        value = 0.0
    elif isinstance(seq, Explicit) and seq.limit is not None:
        value = seq.limit
    else:
        value = math.exp(tail_logs(seq, 0)[0])
        if value == 0.0:
            raise SequenceError("sum(rho) converges but R_* underflows double precision")
    c = math.inf if value == 0.0 else 1.0 / value
    return LimitConstants(r_star=value, c_star=c, rho0=1.0 - value, diverges=value == 0.0)


# --- derived scales -----------------------------------------------------------


@dataclass(frozen=True)
class DerivedScales:
    m: int
    r: float
    rho: float
    delta: float
    gamma: float
    P: float
    eta: float
    kappa: float
    alpha_m: float


def deltas(seq: MatchingSequence, m: int) -> np.ndarray:
    """delta_0 .. delta_m with delta_0 = 1."""
    r = 0.6 * (1.0 - seq.rhos(m))
    return np.concatenate([[1.0], np.cumprod(r)])


def gammas(seq: MatchingSequence, m: int) -> np.ndarray:
    """gamma_1 .. gamma_m."""
    return deltas(seq, m)[:-1] * seq.rhos(m)


def partial_products(seq: MatchingSequence, m: int) -> np.ndarray:
    """P_0 .. P_m with P_k = prod_{i<=k}(1 - rho_i)."""
    return np.concatenate([[1.0], np.cumprod(1.0 - seq.rhos(m))])


def derive(seq: MatchingSequence, m: int) -> DerivedScales:
    if m < 1:
        raise SequenceError("derive needs m >= 1")
    lc = r_star(seq)
    d = deltas(seq, m)
    P = partial_products(seq, m)
    rho = seq.rho(m)
    gamma = d[m - 1] * rho
    return DerivedScales(
        m=m,
        r=0.6 * (1.0 - rho),
        rho=rho,
        delta=float(d[m]),
        gamma=float(gamma),
        P=float(P[m]),
        eta=float(gamma / lc.rho0),
        kappa=-math.log1p(-rho),
        alpha_m=float(1.0 - P[m - 1]),
    )


def telescoping_residual(seq: MatchingSequence, m: int) -> float:
    """|sum_{i<=m} (5/3)^(i-1) gamma_i + (5/3)^m delta_m - 1|."""
    if m < 1:
        raise SequenceError("telescoping needs m >= 1")
    total = 0.0
    delta = 1.0
    scale = 1.0
    for pair in seq.pairs(m):
        total += scale * delta * pair.rho
        delta *= pair.r
        scale *= FIVE_THIRDS
    return abs(total + scale * delta - 1.0)


def normalization_sum(seq: MatchingSequence, m: int) -> float:
    """Partial sum of (5/3)^(k-1) eta_k over k <= m; tends to 1."""
    lc = r_star(seq)
    weights = FIVE_THIRDS ** np.arange(m)
    return float(np.sum(weights * gammas(seq, m)) / lc.rho0)


# --- projection ---------------------------------------------------------------


def project(seq: MatchingSequence, terms: int) -> Explicit:
    """The line-part sequence sigma_1..sigma_terms of ``seq``.

    sigma_m = P_{m-1} rho_m / (P_{m-1} - R_*).  The denominator is evaluated as
    P_{m-1} (1 - prod_{i>=m}(1 - rho_i)) so that it keeps full relative
    precision when the tail is short.
    """
    if terms < 1:
        raise SequenceError("terms must be >= 1")
    lc = r_star(seq)
    rho = seq.rhos(terms)
    if lc.diverges:
        return Explicit(tuple(rho), divergent=True)
    sigma = rho / tail_complements(seq, terms)
    return Explicit(tuple(sigma), divergent=True)


def unproject(seq: MatchingSequence, rho0: float, terms: int) -> Explicit:
    """Inverse of ``project`` for a divergent input and a chosen rho_0."""
    rho0 = float(rho0)
    if not 0.0 < rho0 < 1.0:
        raise SequenceError(f"rho0 must lie in (0,1), got {rho0}")
    if terms < 1:
        raise SequenceError("terms must be >= 1")
    if seq.known_divergence is False:
        raise SequenceError("unproject needs a sequence with divergent sum(sigma)")
    sigma = seq.rhos(terms)
    lead = rho0 * np.concatenate([[1.0], np.cumprod(1.0 - sigma[:-1])])
    # A_{m-1} = lead + 1 - rho_0 is the partial product P_{m-1} of the output and
    # lead / A_{m-1} its tail complement, so ``project`` can invert without cancellation.
    comp = lead / (lead + (1.0 - rho0))
    return Explicit(tuple(comp * sigma), divergent=False, limit=1.0 - rho0, complements=tuple(comp))


def energy_identity_residuals(seq: MatchingSequence, terms: int) -> np.ndarray:
    """Relative residuals of r_1..r_{m-1} rho_m = rho_0 s_1..s_{m-1} sigma_m, m <= terms."""
    lc = r_star(seq)
    sig = project(seq, terms)
    lhs = gammas(seq, terms)
    rhs = lc.rho0 * gammas(sig, terms)
    return np.abs(lhs - rhs) / np.abs(lhs)
