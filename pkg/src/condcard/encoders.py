"""CNF encodings of (conditional) cardinality constraints.

Every encoder takes a :class:`VarPool`, the input literals and an optional
condition variable ``y`` and returns an :class:`EncodingArtifact`. Inputs
are literals rather than variables so that an AtMostK over ``x`` can be
rewritten as an AtLeastK over ``-x``.

Conditional modes:

* ``Mode.NONE``   -- the plain encoding, no condition;
* ``Mode.NAIVE``  -- ``-y`` added to every clause of the plain encoding;
* ``Mode.GAC``    -- ``-y`` added only to the clauses that detect a
  violation (the negative clauses of a Horn encoding, or the positive
  clauses of a reverse-Horn one).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Cnf, EncodingArtifact, VarPool


class Kind(enum.Enum):
    AT_MOST = "amk"
    AT_LEAST = "alk"
    EXACTLY_ONE = "exactly-one"


class Family(enum.Enum):
    PAIRWISE = "pairwise"
    SEQCOUNTER = "seqcounter"
    PIGEONHOLE = "pigeonhole"
    SORTNET = "sortnet"
    PIGEONHOLE_BASIC = "pigeonhole-basic"


class Mode(enum.Enum):
    NONE = "plain"
    NAIVE = "naive"
    GAC = "gac"


class EncodingError(ValueError):
    pass


class InvalidBound(EncodingError):
    pass


class UnsupportedCombination(EncodingError):
    pass


@dataclass(frozen=True)
class ConstraintSpec:
    kind: Kind
    n: int
    k: int = 1
    conditional: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise InvalidBound(f"n must be >= 1, got {self.n}")
        if self.kind is Kind.EXACTLY_ONE:
            object.__setattr__(self, "k", 1)
        if not 0 <= self.k <= self.n:
            raise InvalidBound(f"k must satisfy 0 <= k <= n, got k={self.k}, n={self.n}")

    def __str__(self) -> str:
        body = {Kind.AT_MOST: f"sum(x) <= {self.k}", Kind.AT_LEAST: f"sum(x) >= {self.k}",
                Kind.EXACTLY_ONE: "sum(x) = 1"}[self.kind]
        return f"{'y -> ' if self.conditional else ''}{body} (n={self.n})"


@dataclass(frozen=True)
class EncodingFlavor:
    family: Family
    mode: Mode = Mode.NONE

    def __post_init__(self):
        if self.family is Family.PIGEONHOLE_BASIC and self.mode is not Mode.NONE:
            raise UnsupportedCombination("pigeonhole-basic has no conditional variant")

    def __str__(self) -> str:
        return f"{self.family.value}/{self.mode.value}"


class _Emitter:
    """Collects clauses, optionally prefixing ``-y`` on guarded ones."""

    def __init__(self, cond: Optional[int], mode: Mode):
        if cond is None and mode is not Mode.NONE:
            raise UnsupportedCombination(f"mode {mode.value} needs a condition variable")
        if cond is not None and mode is Mode.NONE:
            raise UnsupportedCombination("a condition variable needs mode naive or gac")
        self.cond = cond
        self.mode = mode
        self.clauses: list[tuple[int, ...]] = []

    def plain(self, *lits: int) -> None:
        """A clause guarded only in naive mode."""
        if self.mode is Mode.NAIVE:
            self.clauses.append((-self.cond,) + lits)
        else:
            self.clauses.append(lits)

    def guarded(self, *lits: int) -> None:
        """A clause guarded in both conditional modes."""
        if self.cond is None:
            self.clauses.append(lits)
        else:
            self.clauses.append((-self.cond,) + lits)


def _artifact(pool: VarPool, em: _Emitter, xs, cond, aux, spec, outputs=()) -> EncodingArtifact:
    cnf = Cnf.build(pool.top, em.clauses, dict(pool.names))
    return EncodingArtifact(cnf, tuple(abs(x) for x in xs), cond, tuple(aux), spec, tuple(outputs))


def _spec_for(kind: Kind, xs, k: int, cond) -> ConstraintSpec:
    return ConstraintSpec(kind, len(xs), k, cond is not None)


def encode_pairwise_amo(pool: VarPool, xs: Sequence[int], cond: Optional[int] = None,
                        mode: Optional[Mode] = None) -> EncodingArtifact:
    """At-most-one as all pairwise binary clauses; ``-y`` joins each when conditional.

    Every pairwise clause is negative, so naive and GAC placement coincide.
    """
    if mode is None:
        mode = Mode.NONE if cond is None else Mode.GAC
    em = _Emitter(cond, mode)
    n = len(xs)
    for i in range(n):
        for j in range(i + 1, n):
            em.guarded(-xs[i], -xs[j])
    return _artifact(pool, em, xs, cond, (), _spec_for(Kind.AT_MOST, xs, min(1, n), cond))


def encode_seqcounter_amo(pool: VarPool, xs: Sequence[int], cond: Optional[int] = None,
                          mode: Mode = Mode.NONE, prefix: str = "") -> EncodingArtifact:
    """Sequential-counter at-most-one with register bits ``p[1..n-1]``.

    ``p[i]`` means "some of x1..xi is true". In GAC mode only the two
    negative clause families carry ``-y``.
    """
    em = _Emitter(cond, mode)
    n = len(xs)
    aux = [pool.new(f"{prefix}p[{i}]") for i in range(1, n)]
    if n >= 2:
        p = [None] + aux
        em.plain(-xs[0], p[1])
        for i in range(2, n):
            em.plain(-xs[i - 1], p[i])
            em.plain(-p[i - 1], p[i])
            em.guarded(-xs[i - 1], -p[i - 1])
        em.guarded(-xs[n - 1], -p[n - 1])
    return _artifact(pool, em, xs, cond, aux, _spec_for(Kind.AT_MOST, xs, min(1, n), cond))


def encode_seqcounter_amk(pool: VarPool, xs: Sequence[int], k: int, cond: Optional[int] = None,
                          mode: Mode = Mode.NONE, prefix: str = "") -> EncodingArtifact:
    """Sinz's sequential counter for ``sum(xs) <= k`` with ``s[i][j]``
    meaning "at least j of x1..xi are true" (1 <= i < n, 1 <= j <= k)."""
    n = len(xs)
    if not 1 <= k < n:
        raise InvalidBound(f"sequential counter needs 1 <= k < n, got k={k}, n={n}")
    em = _Emitter(cond, mode)
    s = {}
    for i in range(1, n):
        for j in range(1, k + 1):
            s[i, j] = pool.new(f"{prefix}s[{i}][{j}]")
    x = [None] + list(xs)
    em.plain(-x[1], s[1, 1])
    for j in range(2, k + 1):
        em.guarded(-s[1, j])
    for i in range(2, n):
        em.plain(-x[i], s[i, 1])
        em.plain(-s[i - 1, 1], s[i, 1])
        for j in range(2, k + 1):
            em.plain(-x[i], -s[i - 1, j - 1], s[i, j])
            em.plain(-s[i - 1, j], s[i, j])
        em.guarded(-x[i], -s[i - 1, k])
    em.guarded(-x[n], -s[n - 1, k])
    return _artifact(pool, em, xs, cond, s.values(), _spec_for(Kind.AT_MOST, xs, k, cond))


def encode_pigeonhole_basic_alk(pool: VarPool, xs: Sequence[int], k: int,
                                prefix: str = "") -> EncodingArtifact:
    """``sum(xs) >= k`` as k pigeons in n holes; ``p[j][i]``: pigeon j in hole i.

    Kept as a contrast exhibit: propagation on it is weak.
    """
    n = len(xs)
    if not 1 <= k <= n:
        raise InvalidBound(f"pigeon-hole needs 1 <= k <= n, got k={k}, n={n}")
    em = _Emitter(None, Mode.NONE)
    p = {(j, i): pool.new(f"{prefix}p[{j}][{i}]") for j in range(1, k + 1) for i in range(1, n + 1)}
    for j in range(1, k + 1):
        for i in range(1, n + 1):
            em.plain(-p[j, i], xs[i - 1])
    for j in range(1, k + 1):
        em.plain(*(p[j, i] for i in range(1, n + 1)))
    for i in range(1, n + 1):
        for j in range(1, k + 1):
            for j2 in range(j + 1, k + 1):
                em.plain(-p[j, i], -p[j2, i])
    return _artifact(pool, em, xs, None, p.values(), _spec_for(Kind.AT_LEAST, xs, k, None))


def encode_pigeonhole_alk(pool: VarPool, xs: Sequence[int], k: int, cond: Optional[int] = None,
                          mode: Mode = Mode.NONE, prefix: str = "") -> EncodingArtifact:
    """Symmetry-broken pigeon-hole encoding of ``sum(xs) >= k``.

    ``p[i][j]`` places pigeon i on input ``x[i+j-1]`` (1 <= j <= n-k+1);
    pigeon i+1 must sit strictly after pigeon i. The formula is reverse
    Horn, so in GAC mode only its k positive clauses carry ``-y``.
    """
    n = len(xs)
    if not 1 <= k <= n:
        raise InvalidBound(f"pigeon-hole needs 1 <= k <= n, got k={k}, n={n}")
    em = _Emitter(cond, mode)
    w = n - k + 1
    p = {(i, j): pool.new(f"{prefix}p[{i}][{j}]") for i in range(1, k + 1) for j in range(1, w + 1)}
    for i in range(1, k):
        for j in range(1, w):
            em.plain(-p[i + 1, j], *(p[i, l] for l in range(1, j + 1)))
    for i in range(1, k + 1):
        for j in range(1, w + 1):
            em.plain(xs[i + j - 2], -p[i, j])
    for i in range(1, k + 1):
        em.guarded(*(p[i, j] for j in range(1, w + 1)))
    return _artifact(pool, em, xs, cond, p.values(), _spec_for(Kind.AT_LEAST, xs, k, cond))


def batcher_comparators(size: int) -> list[tuple[int, int]]:
    """Comparator list of Batcher's odd-even mergesort for ``size`` (a power
    of two) wires. Each pair (i, j), i < j, puts the max on wire i."""
    out = []

    def merge(lo, n, r):
        step = r * 2
        if step < n:
            merge(lo, n, step)
            merge(lo + r, n, step)
            for i in range(lo + r, lo + n - r, step):
                out.append((i, i + r))
        else:
            out.append((lo, lo + r))

    def sort(lo, n):
        if n > 1:
            m = n // 2
            sort(lo, m)
            sort(lo + m, m)
            merge(lo, n, 1)

    sort(0, size)
    return out


def build_sorting_network(pool: VarPool, xs: Sequence[int], prefix: str = ""):
    """Descending sorter over ``xs``; returns ``(zs, clauses, aux)``.

    Inputs are padded to a power of two with constant-false wires;
    comparators touching a constant degrade to plain wires. Each remaining
    comparator emits only its monotone half::

        a -> hi ;  b -> hi ;  a & b -> lo
    """
    n = len(xs)
    size = 1
    while size < n:
        size *= 2
    wires: list[Optional[int]] = list(xs) + [None] * (size - n)  # None = constant false
    clauses = []
    aux = []
    t = 0
    for i, j in batcher_comparators(size):
        a, b = wires[i], wires[j]
        if a is None or b is None:
            wires[i], wires[j] = (a if b is None else b), None
            continue
        t += 1
        hi = pool.new(f"{prefix}c[{t}][1]")
        lo = pool.new(f"{prefix}c[{t}][2]")
        aux += [hi, lo]
        clauses += [(-a, hi), (-b, hi), (-a, -b, lo)]
        wires[i], wires[j] = hi, lo
    return tuple(wires[:n]), clauses, aux


def encode_sortnet_amk(pool: VarPool, xs: Sequence[int], k: int, cond: Optional[int] = None,
                       mode: Mode = Mode.NONE, prefix: str = "") -> EncodingArtifact:
    """Sorting-network encoding of ``sum(xs) <= k``: sorter plus ``-z[k+1]``.

    GAC mode guards only that final unit clause; naive mode guards every
    comparator clause as well.
    """
    n = len(xs)
    if not 0 <= k < n:
        raise InvalidBound(f"sorting network needs 0 <= k < n, got k={k}, n={n}")
    em = _Emitter(cond, mode)
    zs, clauses, aux = build_sorting_network(pool, xs, prefix)
    for c in clauses:
        em.plain(*c)
    em.guarded(-zs[k])
    return _artifact(pool, em, xs, cond, aux, _spec_for(Kind.AT_MOST, xs, k, cond), zs)


# -- dispatch -------------------------------------------------------------

def _alloc_constraint_vars(pool: VarPool, spec: ConstraintSpec):
    xs = [pool.new(f"x[{i}]") for i in range(1, spec.n + 1)]
    y = pool.new("y") if spec.conditional else None
    return xs, y


def _at_most(pool, lits, k, cond, flavor: EncodingFlavor, prefix=""):
    """Clauses and aux vars for ``sum(lits) <= k`` (k in 0..n-1)."""
    n = len(lits)
    fam, mode = flavor.family, flavor.mode
    em = _Emitter(cond, mode)
    if k == 0:
        for l in lits:
            em.guarded(-l)
        return em.clauses, []
    if fam is Family.PAIRWISE:
        if k != 1:
            raise UnsupportedCombination("pairwise encodes at-most-one only")
        art = encode_pairwise_amo(pool, lits, cond, mode)
    elif fam is Family.SEQCOUNTER:
        if k == 1:
            art = encode_seqcounter_amo(pool, lits, cond, mode, prefix)
        else:
            art = encode_seqcounter_amk(pool, lits, k, cond, mode, prefix)
    elif fam is Family.SORTNET:
        art = encode_sortnet_amk(pool, lits, k, cond, mode, prefix)
    elif fam is Family.PIGEONHOLE:
        art = encode_pigeonhole_alk(pool, [-l for l in lits], n - k, cond, mode, prefix)
    elif fam is Family.PIGEONHOLE_BASIC:
        art = encode_pigeonhole_basic_alk(pool, [-l for l in lits], n - k, prefix)
    else:  # pragma: no cover
        raise UnsupportedCombination(str(fam))
    return list(art.cnf.clauses), list(art.auxiliaries)


def _at_least(pool, lits, k, cond, flavor: EncodingFlavor, prefix=""):
    """Clauses and aux vars for ``sum(lits) >= k`` (k in 1..n)."""
    n = len(lits)
    fam, mode = flavor.family, flavor.mode
    if fam is Family.PIGEONHOLE:
        art = encode_pigeonhole_alk(pool, lits, k, cond, mode, prefix)
        return list(art.cnf.clauses), list(art.auxiliaries)
    if fam is Family.PIGEONHOLE_BASIC:
        art = encode_pigeonhole_basic_alk(pool, lits, k, prefix)
        return list(art.cnf.clauses), list(art.auxiliaries)
    if fam is Family.PAIRWISE and k != n - 1 and k != n:
        raise UnsupportedCombination("pairwise encodes at-least-(n-1) only")
    return _at_most(pool, [-l for l in lits], n - k, cond, flavor, prefix)


def encode(spec: ConstraintSpec, flavor: EncodingFlavor, pool: Optional[VarPool] = None) -> EncodingArtifact:
    """Encode ``spec`` with ``flavor``; inputs get ids 1..n, then ``y``.

    Degenerate bounds short-circuit to trivial clause sets, AtMostK over
    pigeon-hole families becomes AtLeast(n-k) over negated inputs (and
    AtLeastK over the other families becomes AtMost(n-k) likewise), and
    ExactlyOne is an at-most-one plus the clause ``-y | x1 | .. | xn``.
    """
    if pool is None:
        pool = VarPool()
    if spec.conditional and flavor.mode is Mode.NONE:
        raise UnsupportedCombination("conditional constraint needs mode naive or gac")
    if not spec.conditional and flavor.mode is not Mode.NONE:
        raise UnsupportedCombination(f"mode {flavor.mode.value} needs a conditional constraint")
    xs, y = _alloc_constraint_vars(pool, spec)
    n, k = spec.n, spec.k
    first_aux = pool.top + 1
    outputs = ()
    if spec.kind is Kind.AT_MOST:
        if k >= n:
            clauses = []
        elif flavor.family is Family.SORTNET and k > 0:
            art = encode_sortnet_amk(pool, xs, k, y, flavor.mode)
            clauses, outputs = list(art.cnf.clauses), art.outputs
        else:
            clauses, _ = _at_most(pool, xs, k, y, flavor)
    elif spec.kind is Kind.AT_LEAST:
        clauses = [] if k == 0 else _at_least(pool, xs, k, y, flavor)[0]
    else:
        clauses = [] if n == 1 else _at_most(pool, xs, 1, y, flavor)[0]
        clauses.append(((-y,) if y else ()) + tuple(xs))
    aux = tuple(range(first_aux, pool.top + 1))
    cnf = Cnf.build(pool.top, clauses, dict(pool.names))
    return EncodingArtifact(cnf, tuple(xs), y, aux, spec, tuple(outputs))


def family_supports(spec: ConstraintSpec, family: Family) -> bool:
    """Whether ``encode`` accepts this family for this constraint."""
    n, k = spec.n, spec.k
    if family is Family.PAIRWISE:
        if spec.kind is Kind.AT_MOST:
            return k <= 1 or k >= n
        if spec.kind is Kind.AT_LEAST:
            return k == 0 or k >= n - 1
    return True
