"""DPLL-style enumeration of projected models.

The search is plain chronological backtracking over a watched-literal
propagator: no learning, no restarts. Constraints that are cheaper to
check than to clausify (support and confidence bounds) plug in as
:class:`DynamicConstraint` objects that inspect the partial assignment
after every propagation fixpoint.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence, Union

from .core import Cnf
from .propagate import Propagator


class DynamicConstraint:
    """Base class for constraints checked on the fly.

    ``prune`` must never return True on a partial assignment that can still
    be extended to a model; ``accepts`` is the exact test on a complete one.
    Values are read from the propagator's per-variable list (1, -1 or 0).
    """

    watch_vars: tuple[int, ...] = ()

    def prune(self, value: Sequence[int]) -> bool:
        raise NotImplementedError

    def accepts(self, value: Sequence[int]) -> bool:
        raise NotImplementedError


class AtLeastCounter(DynamicConstraint):
    """``sum(vars) >= bound``."""

    def __init__(self, variables: Sequence[int], bound: int):
        if not 0 <= bound <= len(variables):
            raise ValueError(f"bound {bound} outside 0..{len(variables)}")
        self.watch_vars = tuple(variables)
        self.bound = bound

    def prune(self, value):
        if self.bound == 0:
            return False
        possible = sum(1 for v in self.watch_vars if value[v] >= 0)
        return possible < self.bound

    def accepts(self, value):
        return sum(1 for v in self.watch_vars if value[v] > 0) >= self.bound

    def __repr__(self):
        return f"AtLeastCounter(n={len(self.watch_vars)}, bound={self.bound})"


class ConfidenceConstraint(DynamicConstraint):
    """``sum(q) / sum(p) >= minconf`` where the encoding guarantees q_i -> p_i.

    Pruning: at most ``N = #q true + #q open`` of the q's can end up true,
    and every (p true, q false) pair adds one to the denominator, so
    ``N / (N + C)`` bounds the final ratio from above.
    """

    def __init__(self, p_vars: Sequence[int], q_vars: Sequence[int], minconf):
        if len(p_vars) != len(q_vars):
            raise ValueError("p_vars and q_vars differ in length")
        minconf = Fraction(minconf)
        if not 0 < minconf <= 1:
            raise ValueError(f"minconf must be in (0, 1], got {minconf}")
        self.p_vars = tuple(p_vars)
        self.q_vars = tuple(q_vars)
        self.watch_vars = self.p_vars + self.q_vars
        self.num = minconf.numerator
        self.den = minconf.denominator

    def prune(self, value):
        n_max = 0
        c = 0
        for p, q in zip(self.p_vars, self.q_vars):
            qv = value[q]
            if qv >= 0:
                n_max += 1
            elif value[p] > 0:
                c += 1
        if n_max + c == 0:
            return False
        return n_max * self.den < self.num * (n_max + c)

    def accepts(self, value):
        p_true = sum(1 for v in self.p_vars if value[v] > 0)
        q_true = sum(1 for v in self.q_vars if value[v] > 0)
        return p_true > 0 and q_true * self.den >= self.num * p_true

    def __repr__(self):
        return f"ConfidenceConstraint(m={len(self.p_vars)}, minconf={self.num}/{self.den})"


def make_atleast_counter(variables: Sequence[int], bound: int) -> AtLeastCounter:
    return AtLeastCounter(variables, bound)


def make_confidence_constraint(p_vars, q_vars, minconf) -> ConfidenceConstraint:
    return ConfidenceConstraint(p_vars, q_vars, minconf)


@dataclass
class EnumConfig:
    projection: Sequence[int] = ()
    # list of tiers; a bare int is a one-variable tier
    branch_order: Sequence[Union[int, Sequence[int]]] = ()
    max_models: Optional[int] = None
    max_time: Optional[float] = None
    assumptions: Sequence[int] = ()


@dataclass
class EnumStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    models: int = 0
    elapsed: float = 0.0

    @property
    def effort(self) -> int:
        return self.decisions + self.propagations


@dataclass
class Enumerator:
    """Iterate to obtain projected models as tuples of signed literals in
    projection order. ``status`` becomes ``complete``, ``model_limit`` or
    ``timeout`` once iteration stops."""

    cnf: Cnf
    dynamics: Sequence[DynamicConstraint] = ()
    config: EnumConfig = field(default_factory=EnumConfig)
    status: str = "pending"
    stats: EnumStats = field(default_factory=EnumStats)

    def __post_init__(self):
        proj = list(dict.fromkeys(self.config.projection))
        for v in proj:
            if not 1 <= v <= self.cnf.num_vars:
                raise ValueError(f"projection variable {v} not in cnf")
        self.projection = tuple(proj)
        self._order = self._branch_order()

    def _branch_order(self) -> list[int]:
        # projection variables always come before the rest: blocking then
        # never has to undo a projection assignment behind a completion
        # decision, and chronological flipping cannot revisit a projection
        tiers = []
        for t in self.config.branch_order:
            tiers.append(sorted({t}) if isinstance(t, int) else sorted(set(t)))
        order = [v for t in tiers for v in t]
        order = list(dict.fromkeys(order))
        proj = set(self.projection)
        rest = [v for v in range(1, self.cnf.num_vars + 1) if v not in set(order)]
        full = order + rest
        return [v for v in full if v in proj] + [v for v in full if v not in proj]

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return self._search()

    def run(self) -> list[tuple[int, ...]]:
        return list(self)

    # -- search ----------------------------------------------------------
    def _pick(self, eng: Propagator) -> Optional[int]:
        value = eng.value
        for v in self._order:
            if value[v] == 0:
                return v
        return None

    def _pruned(self, eng: Propagator) -> bool:
        return any(d.prune(eng.value) for d in self.dynamics)

    def _backtrack(self, eng: Propagator, flipped: list[bool], proj_only: bool = False) -> bool:
        proj = set(self.projection)
        level = len(flipped)
        while level > 0:
            if not flipped[level - 1]:
                lit = eng.trail[eng.trail_lim[level - 1]]
                if not proj_only or abs(lit) in proj:
                    eng.backtrack(level - 1)
                    del flipped[level - 1:]
                    eng.new_level()
                    flipped.append(True)
                    eng.enqueue(-lit)
                    return True
            level -= 1
        return False

    def _search(self) -> Iterator[tuple[int, ...]]:
        t0 = time.monotonic()
        deadline = None if self.config.max_time is None else t0 + self.config.max_time
        self.status = "running"
        eng = Propagator(self.cnf)
        stats = self.stats

        def finish(status):
            self.status = status
            stats.propagations = eng.propagations
            stats.elapsed = time.monotonic() - t0

        conflict = eng.assert_units()
        if conflict is None:
            for a in self.config.assumptions:
                if not eng.enqueue(a):
                    conflict = -1
                    break
        flipped: list[bool] = []
        pending_conflict = conflict is not None
        steps = 0
        while True:
            steps += 1
            if deadline is not None and steps % 64 == 0 and time.monotonic() > deadline:
                finish("timeout")
                return
            if pending_conflict:
                conflict, pending_conflict = -1, False
            else:
                conflict = eng.propagate()
                if conflict is None and self.dynamics and self._pruned(eng):
                    conflict = -1
            if conflict is not None:
                stats.conflicts += 1
                if not self._backtrack(eng, flipped):
                    break
                continue
            v = self._pick(eng)
            if v is not None:
                stats.decisions += 1
                eng.new_level()
                flipped.append(False)
                eng.enqueue(v)
                continue
            if not all(d.accepts(eng.value) for d in self.dynamics):
                stats.conflicts += 1
                if not self._backtrack(eng, flipped):
                    break
                continue
            model = tuple(v if eng.value[v] > 0 else -v for v in self.projection)
            stats.models += 1
            stats.propagations = eng.propagations
            yield model
            if self.config.max_models is not None and stats.models >= self.config.max_models:
                finish("model_limit")
                return
            if not self._backtrack(eng, flipped, proj_only=True):
                break
            if model:
                pending_conflict = eng.add_clause([-l for l in model]) is not None
        finish("complete")


def enumerate_models(cnf: Cnf, dynamics: Iterable[DynamicConstraint] = (),
                     config: Optional[EnumConfig] = None) -> Enumerator:
    return Enumerator(cnf, tuple(dynamics), config or EnumConfig())


def is_satisfiable(cnf: Cnf, assumptions: Iterable[int] = ()) -> bool:
    e = Enumerator(cnf, (), EnumConfig(projection=(), max_models=1, assumptions=tuple(assumptions)))
    return bool(e.run())
