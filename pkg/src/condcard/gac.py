"""Semantic oracles and the exhaustive GAC checker.

Constraint variables are addressed canonically: ``x_i`` is ``i`` and the
condition ``y`` is ``n + 1``, matching the numbering used by
:func:`condcard.encoders.encode`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .core import EncodingArtifact
from .encoders import ConstraintSpec, EncodingFlavor, Kind, encode
from .enumeration import is_satisfiable
from .propagate import Propagator, propagate

DEFAULT_CAP = 10
MAX_COUNTEREXAMPLES = 32


class TooLarge(ValueError):
    pass


class SemanticOracle:
    """Truth function of a (conditional) cardinality constraint."""

    def __init__(self, spec: ConstraintSpec):
        self.spec = spec
        self.width = spec.n + (1 if spec.conditional else 0)

    def holds(self, xs: Sequence[bool], y: bool = True) -> bool:
        s = self.spec
        if s.conditional and not y:
            return True
        total = sum(1 for x in xs if x)
        if s.kind is Kind.AT_MOST:
            return total <= s.k
        if s.kind is Kind.AT_LEAST:
            return total >= s.k
        return total == 1

    def holds_mask(self, mask: int) -> bool:
        n = self.spec.n
        xs = [(mask >> i) & 1 for i in range(n)]
        y = bool((mask >> n) & 1) if self.spec.conditional else True
        return self.holds(xs, y)

    def models(self) -> list[int]:
        """Satisfying complete assignments as bitmasks (bit i-1 is x_i, bit n is y)."""
        return [m for m in range(1 << self.width) if self.holds_mask(m)]

    def count(self) -> int:
        return len(self.models())


def oracle_entailed_literals(spec: ConstraintSpec, rho: Iterable[int]) -> Optional[frozenset[int]]:
    """Literals over unassigned constraint variables true in every
    satisfying completion of ``rho``; None when no completion exists."""
    oracle = SemanticOracle(spec)
    width = oracle.width
    rho = set(rho)
    if any(-l in rho for l in rho):
        raise ValueError("rho is not fundamental")
    for l in rho:
        if not 1 <= abs(l) <= width:
            raise ValueError(f"literal {l} is not a constraint variable")
    free = [v for v in range(1, width + 1) if v not in rho and -v not in rho]
    entailed = None
    for bits in itertools.product((False, True), repeat=len(free)):
        vals = {abs(l): l > 0 for l in rho}
        vals.update(zip(free, bits))
        xs = [vals[i] for i in range(1, spec.n + 1)]
        y = vals.get(spec.n + 1, True)
        if not oracle.holds(xs, y):
            continue
        lits = {v if vals[v] else -v for v in free}
        entailed = lits if entailed is None else entailed & lits
    return None if entailed is None else frozenset(entailed)


@dataclass
class Counterexample:
    rho: tuple[int, ...]          # over the artifact's variable ids
    missed: tuple[int, ...] = ()  # entailed literals not propagated
    kind: str = "missed-literal"  # or "missed-conflict" / "spurious-conflict"

    def describe(self, names: dict[int, str]) -> str:
        def show(l):
            n = names.get(abs(l), str(abs(l)))
            return n if l > 0 else "-" + n

        rho = "{" + ", ".join(show(l) for l in self.rho) + "}"
        if self.kind == "missed-literal":
            return f"rho={rho}: UP misses {', '.join(show(l) for l in self.missed)}"
        if self.kind == "missed-conflict":
            return f"rho={rho}: constraint violated but UP finds no conflict"
        return f"rho={rho}: UP conflict although the constraint is satisfiable"


@dataclass
class GacReport:
    verdict: str
    checked_assignments: int
    counterexamples: list[Counterexample] = field(default_factory=list)
    total_counterexamples: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == "Pass"


def _check_cap(artifact: EncodingArtifact, cap: int) -> None:
    if artifact.spec.n > cap:
        raise TooLarge(f"n={artifact.spec.n} exceeds the exhaustive-sweep cap {cap}")


def check_gac(artifact: EncodingArtifact, cap: int = DEFAULT_CAP, incremental: bool = True,
              max_counterexamples: int = MAX_COUNTEREXAMPLES) -> GacReport:
    """Sweep every partial assignment of the constraint variables.

    For each one the oracle's verdict is compared with unit propagation:
    a violated constraint must produce a conflict and every entailed
    literal must be propagated. With ``incremental`` the sweep reuses one
    propagator along a depth-first walk; otherwise each assignment is
    propagated from scratch.
    """
    _check_cap(artifact, cap)
    spec = artifact.spec
    cvars = list(artifact.constraint_vars)
    width = len(cvars)
    models = SemanticOracle(spec).models()
    full = (1 << width) - 1
    cexs: list[Counterexample] = []
    total = 0
    checked = 0

    eng = Propagator(artifact.cnf)
    root_conflict = eng.assert_units() is not None or eng.propagate() is not None
    rho: list[int] = []

    def leaf(assigned: int, subset: list[int], up_conflict: bool, up_value) -> None:
        nonlocal total, checked
        checked += 1
        found = None
        if not subset:
            if not up_conflict:
                found = Counterexample(tuple(rho), (), "missed-conflict")
        elif up_conflict:
            found = Counterexample(tuple(rho), (), "spurious-conflict")
        else:
            and_mask, or_mask = full, 0
            for m in subset:
                and_mask &= m
                or_mask |= m
            missed = []
            for pos in range(width):
                if assigned >> pos & 1:
                    continue
                v = cvars[pos]
                if and_mask >> pos & 1 and up_value(v) <= 0:
                    missed.append(v)
                elif not or_mask >> pos & 1 and up_value(v) >= 0:
                    missed.append(-v)
            if missed:
                found = Counterexample(tuple(rho), tuple(missed))
        if found is not None:
            total += 1
            if len(cexs) < max_counterexamples:
                cexs.append(found)

    def walk(pos: int, assigned: int, subset: list[int], up_conflict: bool) -> None:
        if pos == width:
            if incremental:
                leaf(assigned, subset, up_conflict, lambda v: eng.value[v])
            else:
                res = propagate(artifact.cnf, rho)
                vals = {abs(l): (1 if l > 0 else -1) for l in res.implied}
                vals.update({abs(l): (1 if l > 0 else -1) for l in rho})
                leaf(assigned, subset, res.conflict, lambda v: vals.get(v, 0))
            return
        walk(pos + 1, assigned, subset, up_conflict)
        v = cvars[pos]
        bit = 1 << pos
        for lit in (v, -v):
            sub = [m for m in subset if bool(m & bit) == (lit > 0)]
            rho.append(lit)
            conflict = up_conflict
            if incremental and not up_conflict:
                eng.new_level()
                if eng.enqueue(lit):
                    conflict = eng.propagate() is not None
                else:
                    conflict = True
            walk(pos + 1, assigned | bit, sub, conflict)
            if incremental and not up_conflict:
                eng.backtrack(eng.decision_level - 1)
            rho.pop()

    walk(0, 0, models, root_conflict)
    verdict = "Fail" if total else "Pass"
    return GacReport(verdict, checked, cexs, total)


def projected_model_count(artifact: EncodingArtifact, cap: int = DEFAULT_CAP) -> int:
    """Assignments of the constraint variables that extend to a model of
    the CNF, decided one by one with a DPLL satisfiability check."""
    _check_cap(artifact, cap)
    cvars = artifact.constraint_vars
    count = 0
    for bits in itertools.product((True, False), repeat=len(cvars)):
        assumptions = [v if b else -v for v, b in zip(cvars, bits)]
        if is_satisfiable(artifact.cnf, assumptions):
            count += 1
    return count


@dataclass
class FlavorRow:
    flavor: EncodingFlavor
    spec: ConstraintSpec
    num_vars: int
    num_clauses: int
    report: GacReport

    @property
    def verdict(self) -> str:
        return self.report.verdict

    def line(self) -> str:
        return (f"{self.flavor},{self.spec.kind.value},{self.spec.n},{self.spec.k},"
                f"{self.num_vars},{self.num_clauses},{self.verdict},{self.report.total_counterexamples}")


def compare_flavors(spec: ConstraintSpec, flavors: Sequence[EncodingFlavor],
                    cap: int = DEFAULT_CAP) -> list[FlavorRow]:
    rows = []
    for fl in flavors:
        art = encode(spec, fl)
        rows.append(FlavorRow(fl, spec, art.cnf.num_vars, len(art.cnf.clauses), check_gac(art, cap)))
    return rows


TABLE_HEADER = ("flavor", "kind", "n", "k", "vars", "clauses", "verdict", "cex")


def format_table(rows: Sequence[FlavorRow]) -> str:
    body = [TABLE_HEADER] + [tuple(r.line().split(",")) for r in rows]
    widths = [max(len(r[i]) for r in body) for i in range(len(TABLE_HEADER))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in body)


def format_lines(rows: Sequence[FlavorRow]) -> str:
    return "\n".join([",".join(TABLE_HEADER)] + [r.line() for r in rows])
