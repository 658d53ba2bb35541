import itertools

import numpy as np
import pytest

from biasbound.measures import SelectionModel, TargetJoint

# Example from the selection-bias discussion: cells (1,1), (1,0), (0,1), (0,0)
EXAMPLE = (0.8, 0.6, 0.4, 0.1)
EXAMPLE_MODIFIED = (0.8, 0.6, 0.4, 0.25)


@pytest.fixture
def example_sel():
    return SelectionModel(*EXAMPLE)


@pytest.fixture
def modified_sel():
    return SelectionModel(*EXAMPLE_MODIFIED)


@pytest.fixture
def uniform_target():
    return TargetJoint(0.25, 0.25, 0.25, 0.25)


def random_pairs(n, seed):
    """``n`` random (target, selection) pairs with all cells positive."""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        p = rng.dirichlet(np.ones(4))
        p = np.clip(p, 1e-9, None)
        p = p / p.sum()
        s = rng.uniform(1e-6, 1.0, size=4)
        yield TargetJoint(*map(float, p)), SelectionModel(*map(float, s))


def brute_force_selected_or(target, sel):
    """Cross ratio of (E, D) given S=1 from the full eight-cell joint law."""
    joint = {}
    for d, e, s in itertools.product((0, 1), repeat=3):
        pi = sel.cell(d, e)
        joint[e, d, s] = target.cell(d, e) * (pi if s else 1.0 - pi)
    p_sel = sum(v for (e, d, s), v in joint.items() if s == 1)
    cond = {(e, d): joint[e, d, 1] / p_sel for e in (0, 1) for d in (0, 1)}
    return cond[1, 1] * cond[0, 0] / (cond[1, 0] * cond[0, 1])
