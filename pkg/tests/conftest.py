"""Shared fixtures: reference model instances and random-instance factories."""

import numpy as np
import pytest

from adkit import ModelSpec


def make_sub_spec() -> ModelSpec:
    """Ergodic benchmark instance: n=1, identity diffusion, b > 0."""
    return ModelSpec(
        n=1,
        a=2.0,
        b=1.0,
        m=np.array([0.5]),
        kappa=np.array([0.5]),
        theta=np.array([[1.0]]),
        rho=np.eye(2),
        y0=1.0,
        x0=np.array([0.0]),
    )


def make_super_spec() -> ModelSpec:
    """Explosive benchmark instance: n=1, b < 0 with negative-spectrum theta."""
    return ModelSpec(
        n=1,
        a=2.0,
        b=-1.0,
        m=np.array([1.0]),
        kappa=np.array([-0.5]),
        theta=np.array([[-2.0]]),
        rho=np.eye(2),
        y0=1.0,
        x0=np.array([0.0]),
    )


def make_general_spec() -> ModelSpec:
    """n=2 instance with a full lower-triangular diffusion factor."""
    return ModelSpec(
        n=2,
        a=2.0,
        b=1.0,
        m=np.array([0.5, -0.25]),
        kappa=np.array([0.5, 0.1]),
        theta=np.array([[1.2, 0.2], [0.0, 1.5]]),
        rho=np.array([[1.0, 0.0, 0.0], [0.3, 0.9, 0.0], [-0.2, 0.1, 0.8]]),
        y0=1.0,
        x0=np.array([0.0, 0.5]),
    )


def random_subcritical(rng: np.random.Generator, n: int = 1) -> ModelSpec:
    """Draw a random ergodic instance (b > 0, theta spectrum positive)."""
    d = n + 1
    theta = np.triu(rng.uniform(-0.4, 0.4, size=(n, n)))
    np.fill_diagonal(theta, rng.uniform(0.5, 2.0, size=n))
    rho = np.tril(rng.uniform(-0.5, 0.5, size=(d, d)))
    np.fill_diagonal(rho, rng.uniform(0.6, 1.4, size=d))
    return ModelSpec(
        n=n,
        a=float(rng.uniform(1.0, 3.0)),
        b=float(rng.uniform(0.5, 2.0)),
        m=rng.uniform(-1.0, 1.0, size=n),
        kappa=rng.uniform(-1.0, 1.0, size=n),
        theta=theta,
        rho=rho,
        y0=float(rng.uniform(0.2, 2.0)),
        x0=rng.uniform(-1.0, 1.0, size=n),
    )


def random_argument(rng: np.random.Generator, n: int = 1):
    from adkit import FLArgument

    return FLArgument(lam=float(rng.uniform(0.0, 3.0)), mu=rng.uniform(-2.0, 2.0, size=n))


@pytest.fixture
def sub_spec() -> ModelSpec:
    return make_sub_spec()


@pytest.fixture
def super_spec() -> ModelSpec:
    return make_super_spec()


@pytest.fixture
def general_spec() -> ModelSpec:
    return make_general_spec()
