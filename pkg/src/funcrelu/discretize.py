"""Discretization of input functions into coefficient vectors.

The discretizing operator maps a function on [-1, 1]^s to a polynomial of
coordinatewise degree at most 2m by filtering its Legendre expansion:

    f  ->  sum_k hhat_k <f, L_k> L_k

with filter values hhat_k in [0, 1] that equal 1 whenever the multi-index
of k is coordinatewise at most m, so polynomials of degree <= m are
reproduced exactly.  The coefficient vector (hhat_k <f, L_k>)_k is the
discretized representation of f; in the parametric-net view the fixed
parametrizing functions are hhat_k * L_k.

Built-in filters:

* ``dlvp``: tensor product of the univariate taper 1 for n <= m and
  (2m + 1 - n) / (m + 1) for m < n <= 2m.
* ``truncate``: indicator of the coordinatewise <= m block.

For p = 2 both filters are near-best with constant 1: the error
``||f - V f||_2`` never exceeds the best approximation error from the
degree-m block, since the filter damps exactly the coefficients the best
approximation discards.  For p != 2 the constant is measured, not assumed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .legendre import (
    GaussRule,
    LegendreBasis,
    PolyCoeffs,
    default_rule_size,
    gauss_legendre_rule,
    lp_norm,
    tensor_eval,
    tensor_multi_indices,
)

FILTER_KINDS = ("dlvp", "truncate")


def filter_vector(basis: LegendreBasis, kind: str) -> np.ndarray:
    """Per-basis-function filter values for a named filter."""
    m = basis.m
    if kind == "dlvp":
        taper = np.ones(2 * m + 1)
        for nn in range(m + 1, 2 * m + 1):
            taper[nn] = (2 * m + 1 - nn) / (m + 1)
        h = np.ones(basis.t)
        for d in range(basis.s):
            h *= taper[basis.multi_indices[:, d]]
        return h
    if kind == "truncate":
        return (basis.multi_indices <= m).all(axis=1).astype(float)
    raise ValueError(f"unknown filter kind {kind!r}; choose from {FILTER_KINDS}")


@dataclass(frozen=True)
class DiscretizationOperator:
    """Filtered Legendre expansion into the degree window 2m."""

    basis: LegendreBasis
    filter: np.ndarray
    rule: GaussRule
    kind: str = "dlvp"

    def __post_init__(self):
        h = np.asarray(self.filter, dtype=float).ravel()
        if h.shape[0] != self.basis.t:
            raise ValueError("filter length must equal basis size")
        if np.any(h < 0) or np.any(h > 1):
            raise ValueError("filter values must lie in [0, 1]")
        low = (self.basis.multi_indices <= self.basis.m).all(axis=1)
        if not np.allclose(h[low], 1.0):
            raise ValueError("filter must be 1 on the coordinatewise <= m block")
        object.__setattr__(self, "filter", h)

    @property
    def t(self) -> int:
        return self.basis.t


def make_operator(s: int, m: int, kind: str = "dlvp",
                  q: Optional[int] = None) -> DiscretizationOperator:
    basis = LegendreBasis(s, m)
    q = default_rule_size(m) if q is None else q
    rule = gauss_legendre_rule(q, s)
    return DiscretizationOperator(basis, filter_vector(basis, kind), rule, kind)


@dataclass(frozen=True)
class InputFunction:
    """Callable on batches of points in [-1, 1]^s, with an optional tag
    describing its construction."""

    evaluator: Callable
    tag: str = ""

    def __call__(self, x):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class RadiusSpec:
    """Cube radius for discretized vectors.

    R = c1_surrogate * C_K * max(m, 1)^(2 s max(1/p - 1/2, 0)) with C_K a
    configured bound on the discretized norm over the input class.  The
    max(m, 1) guard keeps the m = 0 edge at factor 1.
    """

    m: int
    s: int
    p: float
    C_K: float
    c1_surrogate: float = 1.0

    @property
    def R(self) -> float:
        expo = 2.0 * self.s * max(1.0 / self.p - 0.5, 0.0)
        return self.c1_surrogate * self.C_K * float(max(self.m, 1)) ** expo


def apply_Vm(op: DiscretizationOperator, f: InputFunction) -> PolyCoeffs:
    """Filtered quadrature projection of f onto the degree window."""
    vals = np.asarray(f(op.rule.points), dtype=float).ravel()
    bad = ~np.isfinite(vals)
    if bad.any():
        node = op.rule.points[int(np.argmax(bad))]
        raise ValueError(f"input function returned a non-finite value at node {node}")
    B = op.basis.eval_all(op.rule.points)
    coeffs = op.filter * (B.T @ (op.rule.weights * vals))
    return PolyCoeffs(op.basis, coeffs)


def discretize(op: DiscretizationOperator, f: InputFunction,
               radius_spec: Optional[RadiusSpec] = None,
               self_check: bool = False) -> np.ndarray:
    """Coefficient vector of the discretized function, length t.

    With a radius spec, vectors outside [-R, R]^t raise (the configured
    C_K or c1 surrogate is then wrong for this input class).  With
    ``self_check`` the quadrature is repeated at doubled resolution and a
    relative drift above 1e-8 warns.
    """
    coeffs = apply_Vm(op, f).coeffs
    if self_check:
        dense = DiscretizationOperator(
            op.basis, op.filter, gauss_legendre_rule(2 * op.rule.q, op.basis.s), op.kind
        )
        ref = apply_Vm(dense, f).coeffs
        scale = max(float(np.linalg.norm(ref)), 1e-30)
        drift = float(np.linalg.norm(ref - coeffs)) / scale
        if drift > 1e-8:
            warnings.warn(
                f"discretized vector moved by {drift:.2e} under quadrature "
                "doubling; increase the rule size",
                stacklevel=2,
            )
    if radius_spec is not None:
        top = float(np.max(np.abs(coeffs), initial=0.0))
        if top > radius_spec.R:
            raise ValueError(
                f"discretized vector leaves the cube: |.|_inf = {top:.6g} > "
                f"R = {radius_spec.R:.6g}; C_K or c1_surrogate is misconfigured"
            )
    return coeffs


def transfer_modulus(omega_F, m: int, s: int, p: float,
                     c1_surrogate: float = 1.0):
    """Modulus bound for the discretized target as a function on R^t:
    r -> omega_F(c1 * max(m, 1)^(2 s max(1/2 - 1/p, 0)) * r)."""
    expo = 2.0 * s * max(0.5 - 1.0 / p, 0.0)
    factor = c1_surrogate * float(max(m, 1)) ** expo
    return lambda r: omega_F(factor * r)


def projection_error(f: InputFunction, m: int, s: int, p: float = 2.0,
                     q: Optional[int] = None) -> float:
    """Distance from f to the polynomials of coordinatewise degree <= m.

    For p = 2 this is the best approximation error at quadrature
    resolution (orthonormal projection).  For p != 2 the same projector is
    measured in the quadrature p-norm, an upper bound on the true minimum.
    """
    q = default_rule_size(m) if q is None else q
    rule = gauss_legendre_rule(q, s)
    vals = np.asarray(f(rule.points), dtype=float).ravel()
    idx = tensor_multi_indices(s, m)
    B = tensor_eval(idx, rule.points)
    coeffs = B.T @ (rule.weights * vals)
    resid = vals - B @ coeffs
    return float((rule.weights @ np.abs(resid) ** p) ** (1.0 / p))


def vm_error(op: DiscretizationOperator, f: InputFunction, p: float = 2.0) -> float:
    """Quadrature p-norm of f - V f (the operator's own error on f)."""
    approx = apply_Vm(op, f)
    return lp_norm(lambda x: f(x) - approx(x), p, op.rule)
