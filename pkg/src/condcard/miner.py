"""SAT-based association rule mining over transaction databases.

The rule X -> Y is represented by ``x[a]``/``y[a]`` per item, the cover
of X by ``p[i]`` and the cover of X u Y by ``q[i]`` per transaction.
Support and confidence thresholds are checked on the fly; closedness and
the minimal-generator condition on X are clausified. The latter needs one
conditional at-most-one constraint per transaction, whose encoding is the
knob compared by the benchmark.
"""
from __future__ import annotations

import enum
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .core import Cnf, VarPool
from .encoders import Mode, encode_seqcounter_amo
from .enumeration import (AtLeastCounter, ConfidenceConstraint, EnumConfig, EnumStats,
                          enumerate_models)

ORACLE_MAX_ITEMS = 12
_BAD_ITEM = re.compile(r"[,{};]")


class MiningError(ValueError):
    pass


class DbParseError(MiningError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class UnknownItem(MiningError, KeyError):
    pass


class DegenerateThreshold(MiningError):
    pass


class TooLarge(MiningError):
    pass


class LimitExceeded(MiningError):
    def __init__(self, status: str, rules):
        self.status = status
        self.rules = rules
        super().__init__(f"enumeration stopped early ({status}) after {len(rules)} rules")


class MineMode(enum.Enum):
    ALL = "all"
    CLOSED = "closed"
    MNR = "mnr"


def _natural_key(name: str):
    return [(0, int(t), "") if t.isdigit() else (1, 0, t) for t in re.split(r"(\d+)", name) if t]


@dataclass(frozen=True)
class TransactionDb:
    items: tuple[str, ...]
    transactions: tuple[tuple[int, frozenset[int]], ...]

    def __post_init__(self):
        if not self.transactions:
            raise MiningError("a transaction database needs at least one transaction")
        tids = [t for t, _ in self.transactions]
        if len(set(tids)) != len(tids):
            raise MiningError("duplicate transaction ids")
        if len(set(self.items)) != len(self.items):
            raise MiningError("duplicate item symbols")
        for _, its in self.transactions:
            if any(not 0 <= a < len(self.items) for a in its):
                raise MiningError("transaction refers to an unknown item index")

    @property
    def m(self) -> int:
        return len(self.transactions)

    def index(self, item: str) -> int:
        try:
            return self.items.index(item.casefold())
        except ValueError:
            raise UnknownItem(item) from None

    def itemset(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self.index(n) for n in names)

    def names(self, itemset: Iterable[int]) -> list[str]:
        """Item names sorted for display."""
        return sorted((self.items[a] for a in itemset), key=_natural_key)

    @classmethod
    def from_lists(cls, rows: Sequence[Iterable[str]]) -> "TransactionDb":
        return load_db("\n".join(" ".join(r) for r in rows))


def load_db(source) -> TransactionDb:
    """Read one transaction per non-blank line of whitespace-separated items.

    Item tokens are case-folded; items are numbered in order of first
    appearance and transactions get dense 1-based ids.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    items: dict[str, int] = {}
    rows = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        toks = raw.split()
        if not toks:
            continue
        its = set()
        for tok in toks:
            tok = tok.casefold()
            if _BAD_ITEM.search(tok):
                raise DbParseError(f"item {tok!r} contains a reserved character", lineno)
            its.add(items.setdefault(tok, len(items)))
        rows.append((len(rows) + 1, frozenset(its)))
    if not rows:
        raise DbParseError("empty transaction file")
    return TransactionDb(tuple(items), tuple(rows))


def cover(db: TransactionDb, itemset: Iterable[int]) -> frozenset[int]:
    itemset = frozenset(itemset)
    if any(not 0 <= a < len(db.items) for a in itemset):
        raise UnknownItem(str(sorted(itemset)))
    return frozenset(t for t, its in db.transactions if itemset <= its)


def support(db: TransactionDb, itemset: Iterable[int]) -> int:
    return len(cover(db, itemset))


def _proper_supersets(db, itemset):
    rest = [a for a in range(len(db.items)) if a not in itemset]
    for r in range(1, len(rest) + 1):
        for extra in combinations(rest, r):
            yield itemset | frozenset(extra)


def is_closed(db: TransactionDb, itemset: Iterable[int]) -> bool:
    """Support >= 1 and every proper superset has strictly smaller support."""
    itemset = frozenset(itemset)
    s = support(db, itemset)
    if s < 1:
        return False
    return all(support(db, j) < s for j in _proper_supersets(db, itemset))


def is_minimal_generator(db: TransactionDb, candidate: Iterable[int], of: Iterable[int]) -> bool:
    candidate, of = frozenset(candidate), frozenset(of)
    if not candidate <= of:
        return False
    target = support(db, of)
    if support(db, candidate) != target:
        return False
    for r in range(len(candidate)):
        for sub in combinations(sorted(candidate), r):
            if support(db, sub) == target:
                return False
    return True


def closure(db: TransactionDb, itemset: Iterable[int]) -> frozenset[int]:
    cov = cover(db, itemset)
    its = [i for t, i in db.transactions if t in cov]
    if not its:
        return frozenset(range(len(db.items)))
    return frozenset.intersection(*its)


@dataclass(frozen=True)
class Rule:
    antecedent: frozenset[int]
    consequent: frozenset[int]
    support_count: int
    antecedent_count: int
    m: int

    @property
    def support(self) -> Fraction:
        return Fraction(self.support_count, self.m)

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.support_count, self.antecedent_count)

    def key(self) -> tuple[frozenset[int], frozenset[int]]:
        return (self.antecedent, self.consequent)

    def format(self, db: TransactionDb) -> str:
        x = ",".join(db.names(self.antecedent))
        y = ",".join(db.names(self.consequent))
        return (f"{{{x}}} => {{{y}}} ; supp={self.support_count}/{self.m}"
                f" ; conf={self.support_count}/{self.antecedent_count}")


def make_rule(db: TransactionDb, x: Iterable[int], y: Iterable[int]) -> Rule:
    x, y = frozenset(x), frozenset(y)
    return Rule(x, y, support(db, x | y), support(db, x), db.m)


def _sort_rules(db: TransactionDb, rules: Iterable[Rule]) -> list[Rule]:
    def k(r):
        return ([_natural_key(n) for n in db.names(r.antecedent)],
                [_natural_key(n) for n in db.names(r.consequent)])
    return sorted(rules, key=k)


@dataclass(frozen=True)
class MiningParams:
    minsupp: Fraction
    minconf: Fraction
    mode: MineMode = MineMode.MNR
    amo_flavor: Mode = Mode.GAC

    def __post_init__(self):
        object.__setattr__(self, "minsupp", Fraction(self.minsupp))
        object.__setattr__(self, "minconf", Fraction(self.minconf))
        if self.minsupp > 1:
            raise DegenerateThreshold("threshold exceeds database size")
        if self.minsupp <= 0:
            raise MiningError("minsupp must be positive")
        if not 0 < self.minconf <= 1:
            raise MiningError("minconf must be in (0, 1]")
        if self.amo_flavor not in (Mode.GAC, Mode.NAIVE):
            raise MiningError("amo_flavor must be gac or naive")

    def support_bound(self, m: int) -> int:
        """Smallest integer support count meeting ``m * minsupp``."""
        return math.ceil(self.minsupp * m)


@dataclass
class MiningVarMap:
    x: list[int]
    y: list[int]
    p: list[int]
    q: list[int]
    g: Optional[int] = None
    g_tx: dict[int, int] = field(default_factory=dict)  # transaction position -> var
    aux: list[int] = field(default_factory=list)
    names: dict[int, str] = field(default_factory=dict)


def encode_mining(db: TransactionDb, params: MiningParams, pool: Optional[VarPool] = None):
    """Build the rule-mining CNF; returns ``(cnf, varmap, dynamics)``."""
    if params.minsupp * db.m > db.m:
        raise DegenerateThreshold("threshold exceeds database size")
    pool = pool or VarPool()
    items = range(len(db.items))
    x = [pool.new(f"x[{db.items[a]}]") for a in items]
    y = [pool.new(f"y[{db.items[a]}]") for a in items]
    p = [pool.new(f"p[{t}]") for t, _ in db.transactions]
    q = [pool.new(f"q[{t}]") for t, _ in db.transactions]
    vm = MiningVarMap(x, y, p, q)
    missing = [[a for a in items if a not in its] for _, its in db.transactions]
    clauses: list[tuple[int, ...]] = []

    clauses.append(tuple(x))
    clauses.append(tuple(y))
    clauses += [(-x[a], -y[a]) for a in items]
    for i, out in enumerate(missing):
        # -p_i <-> OR x_a (a not in I_i)
        clauses += [(-x[a], -p[i]) for a in out]
        clauses.append((p[i],) + tuple(x[a] for a in out))
        # -q_i <-> -p_i OR OR y_a (a not in I_i)
        clauses.append((-q[i], p[i]))
        clauses += [(-q[i], -y[a]) for a in out]
        clauses.append((q[i], -p[i]) + tuple(y[a] for a in out))

    if params.mode in (MineMode.CLOSED, MineMode.MNR):
        for a in items:
            clauses.append((x[a], y[a]) + tuple(q[i] for i, out in enumerate(missing) if a in out))

    if params.mode is MineMode.MNR:
        g = pool.new("g")
        vm.g = g
        for i, out in enumerate(missing):
            if out:
                vm.g_tx[i] = pool.new(f"g[{db.transactions[i][0]}]")
        for a in items:
            clauses.append((-x[a], g) + tuple(vm.g_tx[i] for i, out in enumerate(missing) if a in out))
        first_aux = pool.top + 1
        for i, gi in vm.g_tx.items():
            if len(missing[i]) >= 2:
                art = encode_seqcounter_amo(pool, [x[a] for a in missing[i]], gi,
                                            params.amo_flavor, prefix=f"amo[{db.transactions[i][0]}].")
                clauses += art.cnf.clauses
        # g -> exactly one x: conditional at-most-one (GAC placement) plus at-least-one
        if len(x) >= 2:
            clauses += encode_seqcounter_amo(pool, x, g, Mode.GAC, prefix="one.").cnf.clauses
        clauses.append((-g,) + tuple(x))
        vm.aux = list(range(first_aux, pool.top + 1))

    vm.names = dict(pool.names)
    cnf = Cnf.build(pool.top, clauses, pool.names)
    dynamics = [AtLeastCounter(q, params.support_bound(db.m)),
                ConfidenceConstraint(p, q, params.minconf)]
    return cnf, vm, dynamics


@dataclass
class MiningRun:
    rules: list[Rule]
    stats: EnumStats
    status: str


def run_mining(db: TransactionDb, params: MiningParams, max_time: Optional[float] = None,
               max_models: Optional[int] = None) -> MiningRun:
    """Enumerate rules, branching on X then Y, and report search effort."""
    cnf, vm, dynamics = encode_mining(db, params)
    config = EnumConfig(projection=vm.x + vm.y, branch_order=[vm.x, vm.y],
                        max_models=max_models, max_time=max_time)
    en = enumerate_models(cnf, dynamics, config)
    n_items = len(db.items)
    rules = []
    for model in en:
        xs = [a for a in range(n_items) if model[a] > 0]
        ys = [a for a in range(n_items) if model[n_items + a] > 0]
        rules.append(make_rule(db, xs, ys))
    return MiningRun(_sort_rules(db, rules), en.stats, en.status)


def mine(db: TransactionDb, params: MiningParams, max_time: Optional[float] = None) -> list[Rule]:
    run = run_mining(db, params, max_time)
    if run.status != "complete":
        raise LimitExceeded(run.status, run.rules)
    return run.rules


# -- brute-force ground truth ------------------------------------------------

def mine_oracle(db: TransactionDb, params: MiningParams) -> list[Rule]:
    """All rules by exhaustive subset enumeration, filtered by the textbook
    definitions of validity, closedness and minimal non-redundancy."""
    n = len(db.items)
    if n > ORACLE_MAX_ITEMS:
        raise TooLarge(f"{n} items exceeds the oracle limit {ORACLE_MAX_ITEMS}")
    if params.minsupp * db.m > db.m:
        raise DegenerateThreshold("threshold exceeds database size")
    m = db.m
    full = (1 << n) - 1
    # supp[mask]: support of the itemset encoded by mask
    item_tids = [0] * n
    for pos, (_, its) in enumerate(db.transactions):
        for a in its:
            item_tids[a] |= 1 << pos
    tids = [0] * (1 << n)
    tids[0] = (1 << m) - 1
    for mask in range(1, 1 << n):
        low = mask & -mask
        tids[mask] = tids[mask ^ low] & item_tids[low.bit_length() - 1]
    supp = [t.bit_count() for t in tids]

    def valid(xm, ym):
        s = supp[xm | ym]
        return (s > 0 and Fraction(s, m) >= params.minsupp
                and Fraction(s, supp[xm]) >= params.minconf)

    closed_memo: dict[int, bool] = {}

    def closed(mask):
        if mask not in closed_memo:
            s = supp[mask]
            rest = full & ~mask
            ok = s >= 1
            sub = rest
            while ok and sub:
                if supp[mask | sub] >= s:
                    ok = False
                sub = (sub - 1) & rest
            closed_memo[mask] = ok
        return closed_memo[mask]

    def submasks(mask):
        sub = mask
        while True:
            yield sub
            if sub == 0:
                return
            sub = (sub - 1) & mask

    def non_redundant(xm, ym):
        sr = Fraction(supp[xm | ym], m)
        cr = Fraction(supp[xm | ym], supp[xm])
        for xp in submasks(xm):
            if xp == 0:
                continue
            free = full & ~xp & ~ym
            for extra in submasks(free):
                yp = ym | extra
                if (xp, yp) == (xm, ym) or yp == 0:
                    continue
                s2 = supp[xp | yp]
                if s2 == 0 or supp[xp] == 0:
                    continue
                if Fraction(s2, m) == sr and Fraction(s2, supp[xp]) == cr:
                    return False
        return True

    out = []
    for xm in range(1, 1 << n):
        rest = full & ~xm
        for ym in submasks(rest):
            if ym == 0 or not valid(xm, ym):
                continue
            if params.mode is MineMode.CLOSED and not closed(xm | ym):
                continue
            if params.mode is MineMode.MNR and not non_redundant(xm, ym):
                continue
            xs = frozenset(a for a in range(n) if xm >> a & 1)
            ys = frozenset(a for a in range(n) if ym >> a & 1)
            out.append(Rule(xs, ys, supp[xm | ym], supp[xm], m))
    return _sort_rules(db, out)


# -- synthetic data ------------------------------------------------------------

def random_db(n_items: int, m: int, density: float, rng: random.Random) -> TransactionDb:
    """Each item joins each transaction with probability ``density``;
    empty transactions get one random item."""
    names = [f"i{k}" for k in range(1, n_items + 1)]
    rows = []
    for _ in range(m):
        row = [a for a in names if rng.random() < density]
        if not row:
            row = [rng.choice(names)]
        rows.append(row)
    return TransactionDb.from_lists(rows)


def db_to_text(db: TransactionDb) -> str:
    return "\n".join(" ".join(db.items[a] for a in sorted(its)) for _, its in db.transactions) + "\n"


TABLE1 = """\
C D E F G
C D E F G
A B C D
A B C D F
A B C D
C E
"""
