import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make helpers importable

from cdworkbench.synth import SynthConfig, generate
from cdworkbench.train import TrainConfig, fit

RESPONSES_CSV = """student_id,item_id,correct,selected_option
s1,i1,1,
s1,i2,0,B
s1,i3,1,
s2,i1,0,C
s2,i2,1,
s2,i3,0,B
"""

QMATRIX_CSV = """item_id,algebra,geometry
i1,1,0
i2,0,1
i3,1,1
"""


@pytest.fixture
def responses_text():
    return RESPONSES_CSV


@pytest.fixture
def qmatrix_text():
    return QMATRIX_CSV


@pytest.fixture(scope="session")
def small_synth():
    """Synthetic class small enough for fast end-to-end tests."""
    return generate(SynthConfig(n_students=12, n_items=12, n_kcs=3,
                                items_per_kc=4, seed=11))


@pytest.fixture(scope="session")
def small_trained(small_synth):
    _, dataset = small_synth
    params, report = fit(dataset, TrainConfig(epochs=150, seed=11))
    return dataset, params, report
