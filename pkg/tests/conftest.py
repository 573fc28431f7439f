import json
from pathlib import Path

import numpy as np
import pytest

from ippomdp.model import parse_pomdp
from ippomdp.vectorset import AlphaVector, VectorSet

ROOT = Path(__file__).resolve().parent.parent
TIGER_PATH = ROOT / "models" / "tiger.POMDP"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def tiger_model():
    return parse_pomdp(TIGER_PATH.read_text())


@pytest.fixture(scope="session")
def tiger_golden_counts():
    return json.loads((DATA / "tiger_vector_counts.json").read_text())


def make_set(rows, **kwargs) -> VectorSet:
    return VectorSet([AlphaVector(np.asarray(r, dtype=float), **kwargs)
                      for r in rows])


def sorted_values(W: VectorSet) -> np.ndarray:
    vals = W.matrix()
    order = sorted(range(len(W)), key=lambda i: tuple(vals[i]))
    return vals[order]


def assert_same_value_set(A: VectorSet, B: VectorSet, tol: float = 1e-6):
    va, vb = sorted_values(A), sorted_values(B)
    assert va.shape == vb.shape, (
        f"set sizes differ: {va.shape[0]} vs {vb.shape[0]}")
    assert np.max(np.abs(va - vb)) <= tol


def random_beliefs(n: int, count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(n), size=count)
