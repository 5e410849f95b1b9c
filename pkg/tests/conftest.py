"""Shared fixtures: table models and randomized stable model generation."""

import numpy as np
import pytest

from qbd2d import (
    QbdModel,
    Region,
    StabilityVerdict,
    build_limited_service,
    stability,
    validate,
)

SYMMETRIC_RATES = (0.3, 0.3, 1.0, 1.0)
ASYMMETRIC_RATES = (0.24, 0.7, 1.2, 1.0)


@pytest.fixture(scope="session")
def symmetric_k1():
    return build_limited_service((*SYMMETRIC_RATES, 1))


@pytest.fixture(scope="session")
def symmetric_k5():
    return build_limited_service((*SYMMETRIC_RATES, 5))


@pytest.fixture(scope="session")
def symmetric_k10():
    return build_limited_service((*SYMMETRIC_RATES, 10))


@pytest.fixture(scope="session")
def asymmetric_k1():
    return build_limited_service((*ASYMMETRIC_RATES, 1))


@pytest.fixture(scope="session")
def asymmetric_k5():
    return build_limited_service((*ASYMMETRIC_RATES, 5))


@pytest.fixture(scope="session")
def asymmetric_k10():
    return build_limited_service((*ASYMMETRIC_RATES, 10))


def scalar_model(interior, x_boundary, y_boundary, origin):
    """s0 = 1 model from step -> probability maps."""
    blocks = {}
    for region, probs in (
        (Region.INTERIOR, interior),
        (Region.X_BOUNDARY, x_boundary),
        (Region.Y_BOUNDARY, y_boundary),
        (Region.ORIGIN, origin),
    ):
        for step, p in probs.items():
            blocks[(region, step)] = np.array([[p]])
    return QbdModel(s0=1, blocks=blocks)


def reflected_scalar_model(interior):
    """Scalar model whose boundaries fold the forbidden steps onto zero."""

    def reflect_x(p):
        out = {}
        for (i1, i2), v in p.items():
            key = (i1, max(i2, 0))
            out[key] = out.get(key, 0.0) + v
        return out

    def reflect_y(p):
        out = {}
        for (i1, i2), v in p.items():
            key = (max(i1, 0), i2)
            out[key] = out.get(key, 0.0) + v
        return out

    return scalar_model(
        interior,
        reflect_x(interior),
        reflect_y(interior),
        reflect_y(reflect_x(interior)),
    )


DRIFTED_INTERIOR = {
    (-1, -1): 0.10, (-1, 0): 0.16, (-1, 1): 0.06,
    (0, -1): 0.18, (0, 0): 0.16, (0, 1): 0.06,
    (1, -1): 0.08, (1, 0): 0.12, (1, 1): 0.08,
}


def drifted_scalar_walk():
    """Drifted scalar walk with a closed, clearly asymmetric level set."""
    return reflected_scalar_model(dict(DRIFTED_INTERIOR))


def random_qbd_model(rng, s0, drift_pull=2.0, floor=0.02):
    """One random skip-free model with a bias toward the origin.

    Interior step weights are drawn with extra mass on the down/left
    steps, every admissible block gets a strictly positive phase-mixing
    floor (keeping all derived chains irreducible and aperiodic), and each
    region's rows are normalized to stochastic.
    """
    blocks = {}
    for region in Region:
        steps = region.admissible_steps
        raw = {}
        for step in steps:
            weight = rng.gamma(1.0, 1.0)
            if step[0] < 0 or step[1] < 0:
                weight *= drift_pull
            mat = rng.gamma(1.0, 1.0, size=(s0, s0)) + floor
            raw[step] = weight * mat
        total = np.zeros(s0)
        for mat in raw.values():
            total += mat.sum(axis=1)
        blocks.update(
            {(region, step): mat / total[:, None] for step, mat in raw.items()}
        )
    return QbdModel(s0=s0, blocks=blocks)


def random_stable_model(seed, s0=None, max_tries=200):
    """Random model that validates and is positive recurrent."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        size = s0 if s0 is not None else int(rng.integers(1, 4))
        model = random_qbd_model(rng, size)
        if validate(model):
            continue
        if stability(model) is StabilityVerdict.POSITIVE_RECURRENT:
            return model
    raise RuntimeError(f"no stable model found from seed {seed}")
