"""Literals, clauses, CNF containers, variable pools and DIMACS I/O.

Literals are plain signed integers in the DIMACS convention: variable ``v``
(1-based) appears positively as ``v`` and negatively as ``-v``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

Lit = int
Clause = tuple[int, ...]


class _Tautology:
    """Marker returned by :func:`new_clause` for clauses containing x and -x."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TAUTOLOGY"

    def __bool__(self) -> bool:
        return False


TAUTOLOGY = _Tautology()


class DimacsError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def neg(lit: Lit) -> Lit:
    return -lit


def var_of(lit: Lit) -> int:
    return lit if lit > 0 else -lit


def new_clause(lits: Iterable[Lit]):
    """Normalize ``lits`` into a clause.

    Duplicates are dropped (first occurrence keeps its position). Returns
    :data:`TAUTOLOGY` when a complementary pair is present.
    """
    seen: set[int] = set()
    out = []
    for lit in lits:
        if lit == 0:
            raise ValueError("literal 0 is not a valid literal")
        if -lit in seen:
            return TAUTOLOGY
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[Clause, ...] = ()
    names: dict[int, str] = field(default_factory=dict, compare=False)
    _allow_empty: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for c in self.clauses:
            if not c and not self._allow_empty:
                raise ValueError("empty clause; use Cnf.with_conflict")
            for lit in c:
                if lit == 0 or var_of(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @classmethod
    def build(cls, num_vars: int, clauses: Iterable[Iterable[Lit]],
              names: Optional[dict[int, str]] = None) -> "Cnf":
        """Normalize every clause and drop tautologies."""
        kept = []
        for lits in clauses:
            c = new_clause(lits)
            if c is TAUTOLOGY:
                continue
            kept.append(c)
        return cls(num_vars, tuple(kept), dict(names or {}))

    @classmethod
    def with_conflict(cls, num_vars: int, clauses: Iterable[Clause] = (),
                      names: Optional[dict[int, str]] = None) -> "Cnf":
        """A Cnf that contains the empty clause (plus ``clauses``)."""
        return cls(num_vars, tuple(clauses) + ((),), dict(names or {}), _allow_empty=True)

    def __len__(self) -> int:
        return len(self.clauses)

    def as_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(c) for c in self.clauses)

    def as_multiset(self) -> dict[frozenset[int], int]:
        out: dict[frozenset[int], int] = {}
        for c in self.clauses:
            key = frozenset(c)
            out[key] = out.get(key, 0) + 1
        return out


class VarPool:
    """Allocates dense variable ids and remembers a unique name for each."""

    def __init__(self):
        self.top = 0
        self.names: dict[int, str] = {}
        self._ids: dict[str, int] = {}

    def new(self, name: str) -> int:
        if name in self._ids:
            raise ValueError(f"duplicate variable name {name!r}")
        self.top += 1
        self.names[self.top] = name
        self._ids[name] = self.top
        return self.top

    def id(self, name: str) -> int:
        return self._ids[name]

    def __contains__(self, name: str) -> bool:
        return name in self._ids


@dataclass
class EncodingArtifact:
    """A CNF together with the role of each variable it mentions."""

    cnf: Cnf
    inputs: tuple[int, ...]
    condition: Optional[int]
    auxiliaries: tuple[int, ...]
    spec: "object"  # encoders.ConstraintSpec; kept loose to avoid an import cycle
    outputs: tuple[int, ...] = ()

    @property
    def names(self) -> dict[int, str]:
        return self.cnf.names

    @property
    def constraint_vars(self) -> tuple[int, ...]:
        """Input variables followed by the condition, if any."""
        if self.condition is None:
            return tuple(self.inputs)
        return tuple(self.inputs) + (self.condition,)


def write_dimacs(obj, sink: IO) -> None:
    """Write a Cnf (or an EncodingArtifact's Cnf) in DIMACS format.

    ``sink`` may be a text or a binary stream.
    """
    cnf = obj.cnf if isinstance(obj, EncodingArtifact) else obj
    lines = [f"c var {v} = {cnf.names[v]}" for v in sorted(cnf.names)]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    lines.extend(" ".join(map(str, c + (0,))) for c in cnf.clauses)
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (io.RawIOBase, io.BufferedIOBase)):
        sink.write(text.encode("utf-8"))
    else:
        sink.write(text)


def dimacs_string(obj) -> str:
    buf = io.StringIO()
    write_dimacs(obj, buf)
    return buf.getvalue()


def read_dimacs(source) -> Cnf:
    """Parse DIMACS from a stream, bytes or str.

    ``c var <id> = <name>`` comments are restored as variable names. Clause
    lines may span several physical lines; each clause ends with ``0``.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    header = None
    names: dict[int, str] = {}
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    has_empty = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            parts = line.split(None, 4)
            if len(parts) == 5 and parts[1] == "var" and parts[3] == "=":
                try:
                    names[int(parts[2])] = parts[4]
                except ValueError:
                    pass
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed problem line {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"malformed problem line {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError("negative counts in problem line", lineno)
            continue
        if header is None:
            raise DimacsError("clause before problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if lit == 0:
                c = new_clause(current)
                if c == ():
                    has_empty = True
                elif c is not TAUTOLOGY:
                    clauses.append(c)
                current = []
                continue
            if abs(lit) > header[0]:
                raise DimacsError(f"variable {abs(lit)} exceeds declared count {header[0]}", lineno)
            current.append(lit)
    if header is None:
        raise DimacsError("missing problem line")
    if current:
        raise DimacsError("last clause not terminated by 0")
    num_vars = header[0]
    names = {v: n for v, n in names.items() if 1 <= v <= num_vars}
    if has_empty:
        return Cnf.with_conflict(num_vars, clauses, names)
    return Cnf(num_vars, tuple(clauses), names)
