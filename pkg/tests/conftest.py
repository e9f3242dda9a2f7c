"""Shared test propagators and small meshes."""

import numpy as np
import pytest

from cirsplit.mesh import GridFunction, build_mesh
from cirsplit.splitting import Propagator


class DiagonalPropagator(Propagator):
    """Multiplies nodal values by exp(rates * tau); exact scalar semigroup."""

    def __init__(self, rates, real_time_only=False):
        self.rates = np.asarray(rates)
        self.real_time_only = real_time_only

    def apply(self, u, tau):
        return GridFunction(u.mesh, u.values * np.exp(self.rates * tau))


class IdentityPropagator(Propagator):
    def apply(self, u, tau):
        return u.copy()


class FailingPropagator(Propagator):
    def apply(self, u, tau):
        raise RuntimeError("deliberate sub-solver failure")


@pytest.fixture
def tiny_mesh():
    return build_mesh(2.0, 2.0, 2, 2)


@pytest.fixture
def ones(tiny_mesh):
    return GridFunction(tiny_mesh, np.ones(tiny_mesh.node_count, dtype=complex))
