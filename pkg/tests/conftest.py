import numpy as np
import pytest

from riimpute import RngStream


@pytest.fixture
def rng():
    return RngStream(20260808, 0)


def fresh_stream(tag: int) -> RngStream:
    return RngStream(20260808, tag)


def make_incomplete(target, covariates, missing_idx):
    """Set the given target indices to NaN and wrap in an IncompleteDataset."""
    from riimpute import IncompleteDataset

    target = np.asarray(target, dtype=float).copy()
    target[np.asarray(missing_idx)] = np.nan
    return IncompleteDataset(target, covariates)
