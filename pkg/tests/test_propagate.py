import itertools
import random

import pytest

from condcard.core import Cnf
from condcard.encoders import (ConstraintSpec, EncodingFlavor, Family, Kind, Mode, encode,
                               encode_seqcounter_amo)
from condcard.core import VarPool
from condcard.propagate import (InconsistentAssumptions, NotHorn, Propagator, entails_by_up,
                                flip_polarity, horn_partition, horn_unsat_witness, is_reverse_horn,
                                naive_propagate, propagate)
from gen import random_cnf, random_horn

X, Z = 1, 2


def test_unit_fixpoint():
    r = propagate(Cnf(1, ((X,),)))
    assert r.outcome == "Fixpoint" and r.implied == {X}


def test_complementary_units_conflict():
    assert propagate(Cnf(1, ((X,), (-X,)))).conflict


def test_empty_clause_conflict():
    assert propagate(Cnf.with_conflict(1)).conflict


def test_example2_implies_not_y():
    art = encode(ConstraintSpec(Kind.AT_MOST, 3, 2, True), EncodingFlavor(Family.SEQCOUNTER, Mode.GAC))
    ids = {name: v for v, name in art.names.items()}
    r = propagate(art.cnf, [1, 2, 3])
    assert not r.conflict
    assert {ids["s[1][1]"], ids["s[2][1]"], ids["s[2][2]"], -ids["y"]} <= r.implied


def test_assumption_conflict():
    r = propagate(Cnf(2, ((-1, -2),)), [1, 2])
    assert r.conflict and r.conflict_clause == (-1, -2)


def test_inconsistent_assumptions_rejected():
    with pytest.raises(InconsistentAssumptions):
        propagate(Cnf(1), [1, -1])


def test_entails_by_up():
    assert entails_by_up(Cnf(2, ((X, Z), (-Z,))), (X,))
    assert not entails_by_up(Cnf(2, ((X, Z),)), (X,))
    assert entails_by_up(Cnf(1), (1, -1))


def test_entails_by_up_conditional_amo():
    pool = VarPool()
    xs = [pool.new(f"x{i}") for i in (1, 2, 3)]
    y = pool.new("y")
    art = encode_seqcounter_amo(pool, xs, y, Mode.GAC)
    assert entails_by_up(art.cnf, (-y, -xs[0], -xs[1]))


def test_confluence_over_clause_orders():
    rng = random.Random(1)
    for _ in range(200):
        cnf = random_cnf(rng)
        assum = [v if rng.random() < 0.5 else -v
                 for v in rng.sample(range(1, cnf.num_vars + 1), rng.randint(0, cnf.num_vars))]
        base = propagate(cnf, assum)
        for _ in range(10):
            order = list(range(len(cnf.clauses)))
            rng.shuffle(order)
            r = propagate(cnf, assum, order)
            assert r.conflict == base.conflict
            if not r.conflict:
                assert r.implied == base.implied


def test_matches_reference_propagator():
    rng = random.Random(2)
    for _ in range(500):
        cnf = random_cnf(rng)
        k = rng.randint(0, cnf.num_vars)
        assum = [v if rng.random() < 0.5 else -v for v in rng.sample(range(1, cnf.num_vars + 1), k)]
        fast, slow = propagate(cnf, assum), naive_propagate(cnf, assum)
        assert fast.conflict == slow.conflict
        if not fast.conflict:
            assert fast.implied == slow.implied


def test_incremental_backtrack_restores_state():
    rng = random.Random(3)
    for _ in range(100):
        cnf = random_cnf(rng)
        eng = Propagator(cnf)
        if eng.assert_units() is not None or eng.propagate() is not None:
            continue
        before = list(eng.value)
        for v in range(1, cnf.num_vars + 1):
            eng.new_level()
            if eng.enqueue(v if rng.random() < 0.5 else -v) and eng.propagate() is not None:
                break
        eng.backtrack(0)
        assert eng.value == before


def test_add_clause_during_search():
    eng = Propagator(Cnf(3, ((1, 2, 3),)))
    eng.new_level()
    eng.enqueue(-1)
    assert eng.propagate() is None
    # (1 or -2) is unit under -1
    assert eng.add_clause([1, -2]) is None
    assert eng.propagate() is None
    assert eng.value[2] == -1 and eng.value[3] == 1
    assert eng.add_clause([1, -3]) is not None


def test_horn_partition_seqcounter_amk():
    art = encode(ConstraintSpec(Kind.AT_MOST, 6, 3), EncodingFlavor(Family.SEQCOUNTER))
    part = horn_partition(art.cnf)
    assert part.is_horn and part.negative_part


def test_pigeonhole_is_reverse_horn():
    art = encode(ConstraintSpec(Kind.AT_LEAST, 6, 4), EncodingFlavor(Family.PIGEONHOLE))
    assert not horn_partition(art.cnf).is_horn
    assert is_reverse_horn(art.cnf)


def test_non_horn_clause():
    assert horn_partition(Cnf(2, ((X, Z),))).non_horn == ((X, Z),)


def test_flip_polarity_keep():
    assert flip_polarity(Cnf(2, ((1, -2),)), keep=[2]).clauses == ((-1, -2),)


def _amo3():
    pool = VarPool()
    xs = [pool.new(f"x{i}") for i in (1, 2, 3)]
    art = encode_seqcounter_amo(pool, xs)
    return art, {n: v for v, n in art.names.items()}


def test_horn_witness_amo():
    art, ids = _amo3()
    w = horn_unsat_witness(art.cnf, [ids["x1"], ids["x3"]])
    assert set(w) == {-ids["x3"], -ids["p[2]"]}
    assert horn_unsat_witness(art.cnf, [ids["x2"]]) is None


def test_horn_witness_rejects_non_horn_and_negative_rho():
    with pytest.raises(NotHorn):
        horn_unsat_witness(Cnf(2, ((1, 2),)), [1])
    with pytest.raises(ValueError):
        horn_unsat_witness(Cnf(2, ((-1, 2),)), [-1])


def test_horn_witness_agrees_with_propagate():
    rng = random.Random(4)
    for _ in range(300):
        cnf = random_horn(rng, max_vars=8)
        for r in range(cnf.num_vars + 1):
            for rho in itertools.combinations(range(1, cnf.num_vars + 1), r):
                w = horn_unsat_witness(cnf, rho)
                assert (w is not None) == propagate(cnf, rho).conflict
