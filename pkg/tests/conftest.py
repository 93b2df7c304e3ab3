import pytest

from robustlip.cones import Caps
from robustlip.model import instance_from_dict
from robustlip.subaffine import sa_from_dict

FIX_A = {"dim": 1, "index": ["t"],
         "uncertainty": {"t": {"convex_hull": False,
                               "points": [{"a": [1], "b": 1}]}}}
FIX_B = {"dim": 2, "index": ["1", "2"],
         "uncertainty": {"1": {"convex_hull": False,
                               "points": [{"a": [1, 0], "b": 0}]},
                         "2": {"convex_hull": False,
                               "points": [{"a": [0, 1], "b": 0}]}}}
FIX_C = {"dim": 1, "index": ["t"],
         "uncertainty": {"t": {"convex_hull": False,
                               "points": [{"a": [1], "b": 1},
                                          {"a": [-1], "b": 1}]}}}
FIX_SA = {"dim": 1, "index": ["t"],
          "uncertainty": {"t": [{"A": [[1], [2]], "b": 2}]}}


@pytest.fixture
def fix_a():
    return instance_from_dict(FIX_A)


@pytest.fixture
def fix_b():
    return instance_from_dict(FIX_B)


@pytest.fixture
def fix_c():
    return instance_from_dict(FIX_C)


@pytest.fixture
def fix_sa():
    return sa_from_dict(FIX_SA)


@pytest.fixture
def caps():
    # room for fuzz-sized unions; the CLI default of 12 pieces is for users
    return Caps(selections=4096, pieces=96)
