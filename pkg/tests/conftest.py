"""Shared fixtures: session-scoped reference solves keep the suite fast."""

from __future__ import annotations

import numpy as np
import pytest

import hypexterior as hx


@pytest.fixture(scope="session")
def params_n3p3() -> hx.ModelParams:
    return hx.ModelParams(3, 3.0)


@pytest.fixture(scope="session")
def params_n2p3() -> hx.ModelParams:
    return hx.ModelParams(2, 3.0)


@pytest.fixture(scope="session")
def cfg_mid() -> hx.NumericsConfig:
    # 20001 nodes holds the profile defect near 1e-9; plenty for unit tests
    return hx.NumericsConfig(grid_points=20001)


@pytest.fixture(scope="session")
def cfg_default() -> hx.NumericsConfig:
    return hx.NumericsConfig()


@pytest.fixture(scope="session")
def w_n3p3_R1(params_n3p3, cfg_mid) -> hx.ShootingResult:
    return hx.solve_exterior_ground_state(params_n3p3, 1.0, cfg_mid)


@pytest.fixture(scope="session")
def u_n3p3_lam1(w_n3p3_R1) -> hx.RadialProfile:
    return hx.rescale_to_unit(w_n3p3_R1, 1.0)


@pytest.fixture(scope="session")
def w_n2p3_R1(params_n2p3, cfg_mid) -> hx.ShootingResult:
    return hx.solve_exterior_ground_state(params_n2p3, 1.0, cfg_mid)


@pytest.fixture(scope="session")
def icosahedral_group() -> hx.SymmetryGroup:
    return hx.SymmetryGroup("icosahedral", 3)


@pytest.fixture(scope="session")
def dihedral3_group() -> hx.SymmetryGroup:
    return hx.SymmetryGroup("dihedral", 2, m=3)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
