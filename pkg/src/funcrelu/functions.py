"""Named test functions used by the CLI and experiment configs."""

from __future__ import annotations

import numpy as np

from .discretize import InputFunction
from .legendre import tensor_eval, tensor_multi_indices


def _asbatch(x):
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def _slow_series():
    # Legendre series with slowly decaying coefficients (1 + total)^-0.6:
    # rough enough that inner products against it have a tight modulus,
    # which the rate experiments rely on.  Indices are built lazily per
    # input dimension.
    cache = {}

    def call(x):
        x = _asbatch(x)
        s = x.shape[1]
        if s not in cache:
            idx = tensor_multi_indices(s, max(32 // s, 4))
            coeffs = (1.0 + idx.sum(axis=1)) ** -0.6
            cache[s] = (idx, coeffs)
        idx, coeffs = cache[s]
        return tensor_eval(idx, x) @ coeffs

    return call


CUBE_FUNCTIONS = {
    "zero": lambda x: np.zeros(_asbatch(x).shape[0]),
    "one": lambda x: np.ones(_asbatch(x).shape[0]),
    "coordinate-sum": lambda x: _asbatch(x).sum(axis=1),
    "abs-first": lambda x: np.abs(_asbatch(x)[:, 0]),
    "gaussian": lambda x: np.exp(-(_asbatch(x) ** 2).sum(axis=1)),
    "runge": lambda x: 1.0 / (1.0 + 25.0 * (_asbatch(x) ** 2).sum(axis=1)),
    "cos-sum": lambda x: np.cos(_asbatch(x).sum(axis=1)),
    "slow-series": _slow_series(),
}

# Node-value generators for interpolation grids (arguments live in R^t,
# not the cube).
NODE_FUNCTIONS = {
    "zeros": lambda y: np.zeros(_asbatch(y).shape[0]),
    "ones": lambda y: np.ones(_asbatch(y).shape[0]),
    "euclidean-norm": lambda y: np.linalg.norm(_asbatch(y), axis=1),
    "coordinate-sum": lambda y: _asbatch(y).sum(axis=1),
    "sum-of-squares": lambda y: (_asbatch(y) ** 2).sum(axis=1),
}


def get_function(name: str) -> InputFunction:
    if name not in CUBE_FUNCTIONS:
        raise KeyError(
            f"unknown function {name!r}; available: {sorted(CUBE_FUNCTIONS)}"
        )
    return InputFunction(CUBE_FUNCTIONS[name], tag=name)


def get_node_function(name: str):
    if name not in NODE_FUNCTIONS:
        raise KeyError(
            f"unknown node function {name!r}; available: {sorted(NODE_FUNCTIONS)}"
        )
    return NODE_FUNCTIONS[name]
