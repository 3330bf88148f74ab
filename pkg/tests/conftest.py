"""Shared fixtures: model bundles are expensive enough to build once."""
import numpy as np
import pytest

from nklab import models as M


@pytest.fixture(scope="session")
def s3s3():
    return M.build_model("s3s3")


@pytest.fixture(scope="session")
def s6():
    return M.build_model("s6")


@pytest.fixture(scope="session")
def s2s2():
    return M.build_model("s2s2")


@pytest.fixture(scope="session")
def s3s3_product():
    return M.build_model("s3s3-product")


@pytest.fixture(scope="session")
def ansatz_bundle():
    return M.build_model("ansatz")


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
