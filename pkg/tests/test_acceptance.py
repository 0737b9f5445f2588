"""Acceptance criteria, one test each. Every test records a one-line
PASS/FAIL summary that is printed at the end of the pytest run."""
import itertools
import random
import time
from fractions import Fraction as F

from acceptance_log import record
from condcard.core import dimacs_string
from condcard.encoders import ConstraintSpec, EncodingFlavor, Family, Kind, Mode, encode, family_supports
from condcard.gac import SemanticOracle, check_gac, projected_model_count
from condcard.miner import TABLE1, MineMode, MiningParams, load_db, mine, mine_oracle, random_db, run_mining
from condcard.propagate import horn_unsat_witness, propagate
from gen import random_horn
from test_encoders import EXAMPLE1, EXAMPLE2, parse


def test_criterion_1_fixture_fidelity():
    t0 = time.perf_counter()
    ex1 = encode(ConstraintSpec(Kind.AT_LEAST, 6, 4), EncodingFlavor(Family.PIGEONHOLE))
    ex2 = encode(ConstraintSpec(Kind.AT_MOST, 3, 2, True), EncodingFlavor(Family.SEQCOUNTER, Mode.GAC))
    ok1 = len(ex1.cnf) == 22 and ex1.cnf.as_set() == parse(EXAMPLE1, ex1.names)
    ok2 = len(ex2.cnf) == 8 and ex2.cnf.as_set() == parse(EXAMPLE2, ex2.names)
    dt = time.perf_counter() - t0
    ok = ok1 and ok2 and dt < 1.0
    record(1, ok, f"example 1 (22 clauses) {'ok' if ok1 else 'MISMATCH'}, "
                  f"example 2 (8 clauses) {'ok' if ok2 else 'MISMATCH'}, {dt * 1000:.1f} ms")
    assert ok


GAC_FAMILIES = [(Family.PAIRWISE, Kind.AT_MOST), (Family.SEQCOUNTER, Kind.AT_MOST),
                (Family.SORTNET, Kind.AT_MOST), (Family.PIGEONHOLE, Kind.AT_LEAST)]


def test_criterion_2_gac_propositions():
    t0 = time.perf_counter()
    checked, failures = 0, []
    for fam, kind in GAC_FAMILIES:
        for n in range(2, 9):
            for k in range(0, n + 1):
                spec = ConstraintSpec(kind, n, k, True)
                if not family_supports(spec, fam):
                    continue
                rep = check_gac(encode(spec, EncodingFlavor(fam, Mode.GAC)))
                checked += 1
                if rep.total_counterexamples:
                    failures.append((fam.value, n, k, rep.total_counterexamples))
    dt = time.perf_counter() - t0
    ok = not failures and dt < 300
    record(2, ok, f"{checked} gac encodings swept exhaustively, {len(failures)} with counterexamples, {dt:.1f} s")
    assert ok, failures[:5]


def test_criterion_3_negative_exhibits():
    amo = encode(ConstraintSpec(Kind.AT_MOST, 3, 1, True), EncodingFlavor(Family.SEQCOUNTER, Mode.NAIVE))
    rep = check_gac(amo)
    y = amo.condition
    hit = [c for c in rep.counterexamples if set(c.rho) == {1, 3} and -y in c.missed]
    sortnet = check_gac(encode(ConstraintSpec(Kind.AT_MOST, 4, 2, True), EncodingFlavor(Family.SORTNET, Mode.NAIVE)))
    pigeon = check_gac(encode(ConstraintSpec(Kind.AT_LEAST, 6, 4, True), EncodingFlavor(Family.PIGEONHOLE, Mode.NAIVE)))
    pairwise = [check_gac(encode(ConstraintSpec(Kind.AT_MOST, n, 1, True), EncodingFlavor(Family.PAIRWISE, Mode.NAIVE)))
                for n in range(2, 9)]
    checks = {
        "seqcounter amo n=3 fails at {x1,x3}": not rep.passed and bool(hit),
        "sortnet n=4 k=2 fails": not sortnet.passed,
        "pigeonhole n=6 k=4 fails": not pigeon.passed,
        "pairwise n=2..8 passes": all(r.passed for r in pairwise),
    }
    ok = all(checks.values())
    record(3, ok, ", ".join(f"{k}: {'yes' if v else 'NO'}" for k, v in checks.items()))
    assert ok


def _all_flavors():
    for fam in Family:
        for kind in (Kind.AT_MOST, Kind.AT_LEAST, Kind.EXACTLY_ONE):
            for n in range(1, 9):
                for k in ([1] if kind is Kind.EXACTLY_ONE else range(0, n + 1)):
                    for cond, mode in [(False, Mode.NONE), (True, Mode.NAIVE), (True, Mode.GAC)]:
                        if fam is Family.PIGEONHOLE_BASIC and cond:
                            continue
                        spec = ConstraintSpec(kind, n, k, cond)
                        if family_supports(spec, fam):
                            yield spec, EncodingFlavor(fam, mode)


def test_criterion_4_semantic_equivalence():
    t0 = time.perf_counter()
    mismatches, total = [], 0
    for spec, fl in _all_flavors():
        got = projected_model_count(encode(spec, fl))
        want = SemanticOracle(spec).count()
        total += 1
        if got != want:
            mismatches.append((str(spec), str(fl), got, want))
    amk = projected_model_count(encode(ConstraintSpec(Kind.AT_MOST, 5, 2), EncodingFlavor(Family.SEQCOUNTER)))
    camk = projected_model_count(encode(ConstraintSpec(Kind.AT_MOST, 5, 2, True),
                                        EncodingFlavor(Family.SEQCOUNTER, Mode.GAC)))
    ok = not mismatches and (amk, camk) == (16, 48)
    record(4, ok, f"{total} encodings, {len(mismatches)} count mismatches; "
                  f"AMK(5,2)={amk}, conditional={camk}; {time.perf_counter() - t0:.1f} s")
    assert ok, mismatches[:5]


def test_criterion_5_horn_witness_equivalence():
    rng = random.Random(2024)
    cases = disagreements = 0
    for _ in range(1000):
        cnf = random_horn(rng, max_vars=12)
        for r in range(cnf.num_vars + 1):
            for rho in itertools.combinations(range(1, cnf.num_vars + 1), r):
                cases += 1
                if (horn_unsat_witness(cnf, rho) is not None) != propagate(cnf, rho).conflict:
                    disagreements += 1
    ok = disagreements == 0
    record(5, ok, f"1000 Horn formulas, {cases} positive assignments, {disagreements} disagreements")
    assert ok


def _rule_keys(rules):
    return {r.key() for r in rules}


def test_criterion_6_mining_ground_truth():
    db = load_db(TABLE1)
    S = db.itemset
    allr = {r.key(): r for r in mine(db, MiningParams(F(2, 6), F(2, 5), MineMode.ALL))}
    table2 = [(("a",), ("b",), F(3, 6), F(1)), (("c",), ("d",), F(5, 6), F(5, 6)),
              (("c", "d"), ("e", "f", "g"), F(2, 6), F(2, 5))]
    rows_ok = all((r := allr.get((S(x), S(y)))) is not None and (r.support, r.confidence) == (s, c)
                  for x, y, s, c in table2)
    mnr = _rule_keys(mine(db, MiningParams(F(3, 6), F(1), MineMode.MNR)))
    mnr_ok = (S("a"), S("bcd")) in mnr and (S("a"), S("b")) not in mnr

    rng = random.Random(6)
    dbs = [("table1", db, [(F(1, 6), F(1, 10)), (F(2, 6), F(2, 5)), (F(3, 6), F(1)), (F(5, 6), F(5, 6))])]
    for i in range(50):
        d = random_db(rng.randint(2, 8), rng.randint(1, 8), rng.uniform(0.3, 0.7), rng)
        dbs.append((f"random{i}", d, [(F(rng.randint(1, d.m), d.m), F(rng.randint(1, 5), 5))]))
    runs = bad = 0
    for name, d, thresholds in dbs:
        for s, c in thresholds:
            for mode in MineMode:
                want = _rule_keys(mine_oracle(d, MiningParams(s, c, mode)))
                for flavor in (Mode.GAC, Mode.NAIVE):
                    runs += 1
                    if _rule_keys(mine(d, MiningParams(s, c, mode, flavor))) != want:
                        bad += 1
    ok = rows_ok and mnr_ok and bad == 0
    record(6, ok, f"table 2 rows {'ok' if rows_ok else 'MISMATCH'}, mnr example {'ok' if mnr_ok else 'MISMATCH'}, "
                  f"{runs - bad}/{runs} mine runs equal the oracle")
    assert ok


def test_criterion_7_effort_trend():
    rng = random.Random(7)
    grid = [F(p, 100) for p in (25, 50, 75, 100)]
    configs = gac_le = same = 0
    gac_total = naive_total = 0
    for _ in range(20):
        db = random_db(15, 30, 0.4, rng)
        for s in grid:
            for c in grid:
                g = run_mining(db, MiningParams(s, c, MineMode.MNR, Mode.GAC))
                n = run_mining(db, MiningParams(s, c, MineMode.MNR, Mode.NAIVE))
                configs += 1
                gac_le += g.stats.effort <= n.stats.effort
                same += _rule_keys(g.rules) == _rule_keys(n.rules)
                gac_total += g.stats.effort
                naive_total += n.stats.effort
    frac = gac_le / configs
    ok = frac >= 0.9 and same == configs
    record(7, ok, f"20 dbs x 16 thresholds: gac effort <= naive in {gac_le}/{configs} ({frac:.0%}, need >= 90%), "
                  f"identical rules in {same}/{configs}; summed effort gac={gac_total} naive={naive_total}")
    assert same == configs
    assert frac >= 0.9


def test_criterion_8_determinism():
    diffs = 0
    for spec, fl in _all_flavors():
        if spec.n > 6:
            continue
        diffs += dimacs_string(encode(spec, fl)) != dimacs_string(encode(spec, fl))
    db = random_db(10, 20, 0.4, random.Random(8))
    mines_equal = all(mine(db, p) == mine(db, p) for p in [
        MiningParams(F(1, 10), F(1, 2), MineMode.MNR),
        MiningParams(F(1, 5), F(1, 3), MineMode.ALL, Mode.NAIVE),
        MiningParams(F(3, 6), F(1), MineMode.CLOSED)])
    t1 = load_db(TABLE1)
    mines_equal &= mine(t1, MiningParams(F(1, 6), F(1, 6))) == mine(t1, MiningParams(F(1, 6), F(1, 6)))
    ok = diffs == 0 and mines_equal
    record(8, ok, f"encode outputs differing between runs: {diffs}; mine rule lists identical: {mines_equal}")
    assert ok
