"""
Lorenz Attractors - Shared test fixtures

Path: /conftest.py
Purpose: Puts the repository root on sys.path and provides the named map instances.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from lorenz_config import Tolerances  # noqa: E402
from lorenz_map import named_map  # noqa: E402


@pytest.fixture
def tol():
    return Tolerances()


@pytest.fixture
def full_map():
    """F: both branches full, chaotic on [0,1]"""
    return named_map("F")


@pytest.fixture
def contracting_map():
    """C: every orbit descends to the fixed point 0"""
    return named_map("C")


@pytest.fixture
def period_two_map():
    """P: attracting period-2 orbit, renormalizable with periods (2,2)"""
    return named_map("P")


@pytest.fixture
def twice_renormalizable_map():
    """T: two nested renormalization levels"""
    return named_map("T")
