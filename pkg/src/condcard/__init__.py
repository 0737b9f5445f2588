"""Conditional cardinality constraints: CNF encodings, a GAC checker and
a SAT-based association-rule miner."""
from .core import Cnf, DimacsError, EncodingArtifact, VarPool, dimacs_string, read_dimacs, write_dimacs
from .encoders import ConstraintSpec, EncodingFlavor, Family, Kind, Mode, encode, family_supports
from .enumeration import EnumConfig, Enumerator, enumerate_models, is_satisfiable
from .gac import SemanticOracle, check_gac, compare_flavors, oracle_entailed_literals, projected_model_count
from .miner import (MineMode, MiningParams, Rule, TransactionDb, load_db, mine, mine_oracle,
                    run_mining)
from .propagate import Propagator, horn_partition, horn_unsat_witness, propagate

__all__ = [
    "Cnf", "DimacsError", "EncodingArtifact", "VarPool", "dimacs_string", "read_dimacs", "write_dimacs",
    "ConstraintSpec", "EncodingFlavor", "Family", "Kind", "Mode", "encode", "family_supports",
    "EnumConfig", "Enumerator", "enumerate_models", "is_satisfiable",
    "SemanticOracle", "check_gac", "compare_flavors", "oracle_entailed_literals", "projected_model_count",
    "MineMode", "MiningParams", "Rule", "TransactionDb", "load_db", "mine", "mine_oracle", "run_mining",
    "Propagator", "horn_partition", "horn_unsat_witness", "propagate",
]
