"""Shared fixtures: the expensive reference currents are built once."""

import numpy as np
import pytest

from gaugeint import Curve, Current1D, gallery


@pytest.fixture(scope="session")
def segment345():
    """Open segment from the origin to (3, 4), length 5."""
    return Current1D([(Curve(np.array([[0.0, 0.0], [3.0, 4.0]])), 1)])


@pytest.fixture(scope="session")
def unit_square():
    V = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
    return Current1D([(Curve(V, closed=True), 1)])


@pytest.fixture(scope="session")
def circle16():
    return gallery.unit_circle(16)


@pytest.fixture(scope="session")
def circle1024():
    return gallery.unit_circle(1024)


@pytest.fixture(scope="session")
def two_curves_data():
    return gallery.two_curves()


@pytest.fixture(scope="session")
def square_sine_pair():
    return gallery.square_sine_pair()
