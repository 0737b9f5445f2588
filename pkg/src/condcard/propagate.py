"""Unit propagation (two watched literals) and Horn-structure analysis."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Clause, Cnf, Lit


class InconsistentAssumptions(ValueError):
    pass


class NotHorn(ValueError):
    pass


@dataclass(frozen=True)
class PropResult:
    conflict: bool
    implied: frozenset[int]
    conflict_clause: Optional[Clause] = None

    @property
    def outcome(self) -> str:
        return "Conflict" if self.conflict else "Fixpoint"


class Propagator:
    """Mutable propagation engine over one clause database.

    Values are stored per variable as 1 (true), -1 (false) or 0. Decision
    levels are opened with :meth:`new_level` and undone with
    :meth:`backtrack`, so one engine can serve a whole search tree.
    """

    def __init__(self, cnf: Cnf, order: Optional[Iterable[int]] = None):
        n = cnf.num_vars
        self.num_vars = n
        self.value = [0] * (n + 1)
        self.reason: list[Optional[int]] = [None] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {l: [] for v in range(1, n + 1) for l in (v, -v)}
        self.units: list[int] = []
        self.has_empty = False
        self.propagations = 0
        idxs = range(len(cnf.clauses)) if order is None else order
        for i in idxs:
            self.add_clause(cnf.clauses[i])

    # -- literal helpers -------------------------------------------------
    def lit_value(self, lit: int) -> int:
        v = self.value[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def enqueue(self, lit: int, reason: Optional[int] = None) -> bool:
        """Assign ``lit`` true. Returns False if it is already false."""
        var = lit if lit > 0 else -lit
        cur = self.value[var]
        if cur:
            return (cur > 0) == (lit > 0)
        self.value[var] = 1 if lit > 0 else -1
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def new_level(self) -> None:
        self.trail_lim.append(len(self.trail))

    def backtrack(self, level: int) -> None:
        if self.decision_level <= level:
            return
        start = self.trail_lim[level]
        value = self.value
        for lit in self.trail[start:]:
            value[lit if lit > 0 else -lit] = 0
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = len(self.trail)

    # -- clause database -------------------------------------------------
    def add_clause(self, lits: Iterable[int]) -> Optional[int]:
        """Add a clause at any time; watches are chosen to respect the
        current assignment.

        Returns None normally, or the clause index if the clause is falsified
        by the current assignment. A clause that is unit under the current
        assignment has its literal enqueued (and must then be propagated).
        """
        lits = list(lits)
        idx = len(self.clauses)
        self.clauses.append(lits)
        if not lits:
            self.has_empty = True
            return idx
        if len(lits) == 1:
            self.units.append(idx)
            if self.value[abs(lits[0])] == 0 and self.trail:
                self.enqueue(lits[0], idx)
            elif self.lit_value(lits[0]) < 0:
                return idx
            return None
        if self.trail:
            pos = {abs(l): i for i, l in enumerate(self.trail)}

            def rank(l):
                val = self.lit_value(l)
                if val > 0:
                    return (0, 0)
                if val == 0:
                    return (1, 0)
                return (2, -pos[abs(l)])

            lits.sort(key=rank)
            self.clauses[idx] = lits
        self.watches[lits[0]].append(idx)
        self.watches[lits[1]].append(idx)
        if self.trail:
            v0, v1 = self.lit_value(lits[0]), self.lit_value(lits[1])
            if v0 < 0:
                return idx
            if v0 == 0 and v1 < 0:
                self.enqueue(lits[0], idx)
        return None

    def assert_units(self) -> Optional[int]:
        """Enqueue every unit clause; returns a conflicting clause index."""
        if self.has_empty:
            return next(i for i, c in enumerate(self.clauses) if not c)
        for i in self.units:
            if not self.enqueue(self.clauses[i][0], i):
                return i
        return None

    # -- propagation -----------------------------------------------------
    def propagate(self) -> Optional[int]:
        """Propagate to fixpoint. Returns the index of a falsified clause."""
        value = self.value
        clauses = self.clauses
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[false_lit]
            i = j = 0
            end = len(ws)
            while i < end:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = value[first] if first > 0 else -value[-first]
                if fv > 0:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    l = c[k]
                    lv = value[l] if l > 0 else -value[-l]
                    if lv >= 0:
                        c[1], c[k] = l, false_lit
                        watches[l].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if fv < 0:
                        while i < end:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return ci
                    self.enqueue(first, ci)
                    self.propagations += 1
            del ws[j:]
        return None


def _check_fundamental(assumptions: Iterable[Lit]) -> list[int]:
    lits = list(dict.fromkeys(assumptions))
    s = set(lits)
    if any(-l in s for l in lits):
        raise InconsistentAssumptions(f"complementary literals in {sorted(s)}")
    return lits


def propagate(cnf: Cnf, assumptions: Iterable[Lit] = (), order=None) -> PropResult:
    """Unit-propagation closure of ``cnf`` under ``assumptions``.

    ``implied`` holds the literals added by propagation (assumptions
    excluded). ``order`` permutes the clause database, which changes
    internal traversal but never the implied set.
    """
    lits = _check_fundamental(assumptions)
    eng = Propagator(cnf, order)
    for l in lits:
        if abs(l) > cnf.num_vars:
            raise ValueError(f"assumption {l} out of range")
        eng.enqueue(l)
    assumed = set(lits)
    conflict = eng.assert_units()
    if conflict is None:
        conflict = eng.propagate()
    implied = frozenset(l for l in eng.trail if l not in assumed)
    if conflict is not None:
        # engine clause i is the cnf's clause order[i], possibly with literals reordered
        src = conflict if order is None else list(order)[conflict]
        return PropResult(True, implied, cnf.clauses[src])
    return PropResult(False, implied)


def naive_propagate(cnf: Cnf, assumptions: Iterable[Lit] = ()) -> PropResult:
    """Reference propagator: rescan every clause until nothing changes."""
    lits = _check_fundamental(assumptions)
    assign = set(lits)
    implied: set[int] = set()
    changed = True
    while changed:
        changed = False
        for c in cnf.clauses:
            if any(l in assign for l in c):
                continue
            open_lits = [l for l in c if -l not in assign]
            if not open_lits:
                return PropResult(True, frozenset(implied), tuple(c))
            if len(open_lits) == 1:
                assign.add(open_lits[0])
                implied.add(open_lits[0])
                changed = True
    return PropResult(False, frozenset(implied - set(lits)))


def entails_by_up(cnf: Cnf, clause: Iterable[Lit]) -> bool:
    """``cnf`` entails ``clause`` by unit propagation: (cnf and not clause)* is bottom."""
    negated = [-l for l in clause]
    try:
        return propagate(cnf, negated).conflict
    except InconsistentAssumptions:
        # tautological clause: trivially entailed
        return True


@dataclass(frozen=True)
class HornPartition:
    positive_part: tuple[Clause, ...]
    negative_part: tuple[Clause, ...]
    non_horn: tuple[Clause, ...]

    @property
    def is_horn(self) -> bool:
        return not self.non_horn


def horn_partition(cnf: Cnf) -> HornPartition:
    pos, negs, rest = [], [], []
    for c in cnf.clauses:
        npos = sum(1 for l in c if l > 0)
        if npos == 0:
            negs.append(c)
        elif npos == 1:
            pos.append(c)
        else:
            rest.append(c)
    return HornPartition(tuple(pos), tuple(negs), tuple(rest))


def flip_polarity(cnf: Cnf, keep: Iterable[int] = ()) -> Cnf:
    """Negate every variable except those in ``keep``."""
    keep = set(keep)
    flipped = [tuple(l if abs(l) in keep else -l for l in c) for c in cnf.clauses]
    return Cnf(cnf.num_vars, tuple(flipped), dict(cnf.names))


def is_reverse_horn(cnf: Cnf) -> bool:
    return horn_partition(flip_polarity(cnf)).is_horn


def horn_unsat_witness(cnf: Cnf, rho: Iterable[Lit]) -> Optional[Clause]:
    """Negative clause whose complement follows from the definite part.

    For a Horn formula and an all-positive ``rho`` this returns the first
    (by clause index) all-negative clause ``c`` such that every variable of
    ``c`` is derived by forward chaining over the one-positive-literal
    clauses from ``rho``; None if there is none. Such a clause exists
    exactly when ``cnf`` under ``rho`` propagates to a conflict.
    """
    part = horn_partition(cnf)
    if part.non_horn:
        raise NotHorn(f"{len(part.non_horn)} clause(s) with several positive literals")
    rho = list(rho)
    if any(l <= 0 for l in rho):
        raise ValueError("rho must contain positive literals only")

    # linear-time forward chaining (counter per rule body)
    derived = set(rho)
    missing = []
    by_body: dict[int, list[int]] = {}
    heads = []
    queue = list(derived)
    for ri, c in enumerate(part.positive_part):
        head = next(l for l in c if l > 0)
        body = {-l for l in c if l < 0}
        heads.append(head)
        missing.append(len(body))
        for v in body:
            by_body.setdefault(v, []).append(ri)
        if not body and head not in derived:
            derived.add(head)
            queue.append(head)
    seen = set()
    while queue:
        v = queue.pop()
        if v in seen:
            continue
        seen.add(v)
        for ri in by_body.get(v, ()):
            missing[ri] -= 1
            if missing[ri] == 0 and heads[ri] not in derived:
                derived.add(heads[ri])
                queue.append(heads[ri])
    for c in part.negative_part:
        if all(-l in derived for l in c):
            return c
    return None
