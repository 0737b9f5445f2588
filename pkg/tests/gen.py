"""Random instance generators shared by the test modules."""
import random

from condcard.core import Cnf


def random_cnf(rng: random.Random, max_vars: int = 8, max_clauses: int = 14, max_len: int = 4) -> Cnf:
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        size = rng.randint(1, min(max_len, n))
        vs = rng.sample(range(1, n + 1), size)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return Cnf.build(n, clauses)


def random_horn(rng: random.Random, max_vars: int = 12, max_clauses: int = 20) -> Cnf:
    """Clauses with at most one positive literal."""
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        size = rng.randint(1, min(4, n))
        vs = rng.sample(range(1, n + 1), size)
        lits = [-v for v in vs]
        if rng.random() < 0.7:
            lits[0] = vs[0]
        clauses.append(lits)
    return Cnf.build(n, clauses)


def truth_table_models(cnf: Cnf) -> set[tuple[int, ...]]:
    n = cnf.num_vars
    out = set()
    for mask in range(1 << n):
        val = lambda l: bool(mask >> (abs(l) - 1) & 1) == (l > 0)
        if all(any(val(l) for l in c) for c in cnf.clauses):
            out.add(tuple(v if mask >> (v - 1) & 1 else -v for v in range(1, n + 1)))
    return out
