"""Shared fixtures and independent oracles for the test suite."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import pytest
from scipy.integrate import quad

from hullforge.geometry import PointGrid, feasibility_check
from hullforge.hydro import FluidEnvironment
from hullforge.params import COLUMNS, midrange_vector, uniform_vector, validate_params

ENV = FluidEnvironment()

# Wigley test form used throughout the solver tests
WIGLEY_L, WIGLEY_B, WIGLEY_T = 10.0, 1.0, 0.625


def wigley_grid(nx: int = 50, nz: int = 25, L=WIGLEY_L, B=WIGLEY_B, T=WIGLEY_T) -> PointGrid:
    x = np.linspace(0.0, L, nx)
    z = np.linspace(-T, 0.0, nz)
    y = 0.5 * B * (1.0 - (2.0 * x / L - 1.0) ** 2)[:, None] * (1.0 - (z / T) ** 2)[None, :]
    return PointGrid(x, z, y, T, L, L)


def wigley_speed(fn: float, L=WIGLEY_L, g=ENV.g) -> float:
    return fn * math.sqrt(g * L)


def wigley_cw_exact(fn: float, L=WIGLEY_L, B=WIGLEY_B, T=WIGLEY_T, env=ENV, lam_max=60.0) -> float:
    """Michell Cw of the continuous Wigley form.

    The source strength separates into closed-form x and z transforms, so
    only the outer wavenumber integral is numerical.
    """
    U = wigley_speed(fn, L, env.g)
    k0 = env.g / U**2
    c0, c1 = 2.0 * B / L, -4.0 * B / L**2  # dY/dx = (c0 + c1 x) * (1 - (z/T)^2)

    def spectrum_sq(lam):
        a = k0 * lam
        e = np.exp(-1j * a * L)
        X = c0 * (1.0 - e) / (1j * a) + c1 * (e * (1.0 + 1j * a * L) - 1.0) / a**2
        b = k0 * lam * lam
        q = math.exp(-b * T)
        Z = (1.0 - q) / b - (2.0 / b**3 - q * (T * T / b + 2.0 * T / b**2 + 2.0 / b**3)) / T**2
        return abs(X * Z) ** 2

    def integrand(u):
        lam = math.cosh(u)
        return spectrum_sq(lam) * lam * lam

    u_max = math.acosh(lam_max)
    edges = np.linspace(0.0, u_max, 400)
    total = sum(quad(integrand, a, b, epsabs=0.0, epsrel=1e-11, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
    rw = 4.0 * env.rho * env.g**2 / (math.pi * U**2) * total
    return rw / (0.5 * env.rho * U**2 * L**2)


def set_field(v: np.ndarray, name: str, value: float) -> np.ndarray:
    v[COLUMNS.index(name)] = value
    return v


def barge_vector(lb=0.0501, bd=0.2, dd=0.1) -> np.ndarray:
    """Near-box hull: flat bottom, vertical sides, square ends."""
    v = midrange_vector()
    settings = {
        "Lb": lb, "Ls": 1e-4, "Bd": bd, "Bc": bd - 1e-4, "Dd": dd, "Bs": 0.9999,
        "Beta": 1e-4, "Rc": 1e-4, "Rk": 1e-4,
        "Bc_trans": bd - 1e-4, "Beta_trans": 1e-4, "Rc_trans": 1e-4, "Rk_trans": 1e-4,
        "SK": 1e-4, "TRANS(A)": 0.0, "BOW(A)": 0.0, "BOW(B)": 0.0, "BK": 1e-4,
        "Kappa_BOW": 1e-4, "Kappa_STERN": 1e-4,
        "DELTA_BOW(A)": 0.0, "DELTA_BOW(B)": 0.0, "DELTA_STERN(A)": 0.0, "DELTA_STERN(B)": 0.0,
        "DRIFT(A)": 0.0, "DRIFT(B)": 0.0, "DRIFT(C)": 59.9,
    }
    for k, val in settings.items():
        set_field(v, k, val)
    return v


@lru_cache(maxsize=None)
def random_feasible_vectors(n: int, seed: int) -> tuple[np.ndarray, ...]:
    """Uniform draws over the full range table kept only when feasible."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        v = uniform_vector(rng)
        if feasibility_check(validate_params(v)).feasible:
            out.append(v)
    return tuple(out)


def blobs(n_per: int, centers: np.ndarray, sigma: float, seed: int):
    rng = np.random.default_rng(seed)
    centers = np.asarray(centers, dtype=float)
    X = np.vstack([c + sigma * rng.standard_normal((n_per, centers.shape[1])) for c in centers])
    y = np.repeat(np.arange(len(centers)), n_per)
    return X, y


@pytest.fixture(scope="session")
def env():
    return ENV


@pytest.fixture(scope="session")
def mid_params():
    return validate_params(midrange_vector())


@pytest.fixture(scope="session")
def training_rows():
    from hullforge.io import load_dataset
    from hullforge.pipeline import bundled_training_path

    return load_dataset(bundled_training_path()).rows
