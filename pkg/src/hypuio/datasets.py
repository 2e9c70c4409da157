"""The two benchmark plants, their initial data and unknown input.

Example 1 uses E = [0; 1; 1]. The alternative column E = [0; 0; 1] gives
H = [0; 0; 1] through the left inverse, which does not match the reference
gains H = [0; 1/3; 1/3], R and the spectrum of RA; E = [0; 1; 1] reproduces
all three.
"""
import numpy as np

from .model import NonlinearitySpec, PlantSpec, SpeedProfile

_A = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
_M = [[1.0, 1.0, 1.0], [0.0, 1.0, 0.0]]
_N = [[1.0, 0.0], [0.0, 1.0]]
_S = [[1.0], [0.0]]

EXAMPLE1_NOTE = ("E reconciled to [0;1;1]: E=[0;0;1] is inconsistent with the "
                 "reference H=[0;1/3;1/3], R and eigenvalues of RA")


def example1_speeds() -> SpeedProfile:
    prof = SpeedProfile.from_function(
        lambda z: np.stack([1.0 + z**2, np.exp(-z)], axis=-1), 2, name="example1")
    prof.source = {"builtin": "example1"}
    return prof


def example2_speeds() -> SpeedProfile:
    prof = SpeedProfile.constant([np.sqrt(2.0), 2.0], name="example2")
    prof.source = {"builtin": "example2"}
    return prof


def example1() -> PlantSpec:
    return PlantSpec(
        Lambda=example1_speeds(),
        M=_M, A=_A, B=[[0.0], [0.0], [0.0]], E=[[0.0], [1.0], [1.0]],
        C=[[1.0, 1.0]], N=_N, S=_S, T=[[1.0, 0.0]],
        nonlinearity=NonlinearitySpec.tanh(0.0, 0.5),
        name="example1", notes=[EXAMPLE1_NOTE],
    )


def example2() -> PlantSpec:
    return PlantSpec(
        Lambda=example2_speeds(),
        M=_M, A=_A, B=[[0.0], [0.0], [0.0]], E=[[0.0], [0.0], [1.0]],
        C=[[1.0, 0.0]], N=_N, S=_S, T=[[0.0, 1.0]],
        nonlinearity=NonlinearitySpec.tanh(0.0, 0.5),
        name="example2",
    )


PLANTS = {"example1": example1, "example2": example2}


def example_initial_state():
    """Initial data shared by both examples (plant perturbed, observer at rest)."""
    def x0(z):
        z = np.asarray(z, dtype=float)
        return np.stack([0.5 * (np.sin(2 * np.pi * z) - 1.0),
                         0.5 * (np.sin(4 * np.pi * z) - 1.0)], axis=-1)

    def xhat0(z):
        return np.zeros(np.shape(z) + (2,))

    return {
        "x0": x0,
        "chi0": np.array([0.5, -0.5, -0.5]),
        "xhat0": xhat0,
        "chihat0": np.zeros(3),
    }


# expression form of the same data, used by the builtin configs
EXAMPLE_INITIAL_EXPR = {
    "x0": ["0.5*(sin(2*pi*z) - 1)", "0.5*(sin(4*pi*z) - 1)"],
    "chi0": [0.5, -0.5, -0.5],
    "xhat0": ["0", "0"],
    "chihat0": [0.0, 0.0, 0.0],
}

EXAMPLE_W = {"kind": "sin", "amplitude": [1.0], "frequency": 2.0, "phase": 0.0}

REFERENCE_EXAMPLE1_CERTIFICATE = {
    "mu": 0.1,
    "kappa": 13.75,
    "P": [[9.28, 0.0], [0.0, 14.76]],
    "Q": [[21.96, -6.954, 4.087], [-6.954, 16.13, -1.041], [4.087, -1.041, 10.13]],
    "K1": [[0.6597], [0.4537], [0.358]],
}

REFERENCE_EXAMPLE2_CERTIFICATE = {
    "mu": 1.0,
    "theta": 1.0,
    "P": [[9.28, 0.0], [0.0, 14.76]],
    "Q": [[21.96, -6.954, 4.087], [-6.954, 16.13, -1.041], [4.087, -1.041, 10.13]],
    "Y": [[-1.146, 0.2738], [-2.177, -11.58], [-1.684, 0.5115]],
    "L": [[-0.01306, -0.02304], [0.008322, 0.279], [0.1568, -0.3331]],
}
