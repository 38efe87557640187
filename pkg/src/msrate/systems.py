"""Benchmark instances used throughout the tests and notebooks."""

import numpy as np

from .model import SystemSpec, scale_A

TWO_DIM_SIGMAS = (1.0, 1.5, 2.0, 3.0)
THETA_RANGE = (0.95, 1.10, 20)


def two_dim(sigma=2.0):
    """Stabilizable 2-state, 1-input system used for the noise sweep."""
    return SystemSpec(
        A=[[0.88, 0.22], [-0.18, 0.86]],
        A_bar=[[0.12, 0.04], [0.06, 0.10]],
        B=[[1.0], [0.7]],
        B_bar=[[0.20], [0.25]],
        sigma=sigma,
    )


def four_dim(theta=1.0):
    """Near-marginal 4-state, 2-input system (sigma = 2), optionally with A scaled by `theta`."""
    spec = SystemSpec(
        A=[
            [0.9999, 0.34, 0.0, 0.0],
            [0.0, 0.9996, 0.25, 0.0],
            [0.0, 0.0, 0.9992, 0.22],
            [0.0, 0.0, 0.0, 0.9988],
        ],
        A_bar=[
            [0.16, 0.06, 0.0, 0.0],
            [0.05, 0.13, 0.05, 0.0],
            [0.0, 0.04, 0.11, 0.05],
            [0.0, 0.0, 0.03, 0.10],
        ],
        B=[[0.0024, 0.0], [0.0, 0.05], [0.22, 0.0], [0.0, 0.14]],
        B_bar=[[0.375, 0.0], [0.0, 0.25], [0.15, 0.0], [0.0, 0.15]],
        sigma=2.0,
    )
    return spec if theta == 1.0 else scale_A(spec, theta)


def theta_grid(start=THETA_RANGE[0], stop=THETA_RANGE[1], count=THETA_RANGE[2]):
    return np.linspace(start, stop, count)


def scalar(a, a_bar, b, b_bar, sigma):
    return SystemSpec([[a]], [[a_bar]], [[b]], [[b_bar]], sigma)


def scalar_gamma(a, a_bar, b, b_bar, sigma):
    """Closed-form one-step growth factor of a scalar system under its optimal gain."""
    s2 = sigma ** 2
    return (a * a + s2 * a_bar * a_bar) - (a * b + s2 * a_bar * b_bar) ** 2 / (b * b + s2 * b_bar * b_bar)
