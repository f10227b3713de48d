"""Simplicial geometry behind the piecewise linear interpolation.

The lattice h*Z^t together with all coordinate orderings cuts R^t into
simplices

    {y : 0 <= y_{rho(0)} - h*n_{rho(0)} <= ... <= y_{rho(t-1)} - h*n_{rho(t-1)} <= h}

indexed by an integer shift n and a permutation rho (a Kuhn-type
triangulation).  This module locates points in that partition, evaluates
the spike function psi (the unique continuous cellwise-linear function
with psi(0) = 1 and psi = 0 on all other lattice points), and provides
executable versions of the supporting facts about the spike's support:
the union S0 of simplices containing the origin equals an explicit
intersection of half-spaces, and each vertex interpolant over the S0 fan
is one of the affine forms

    1 + y_l,   1 + y_l - y_k,   1 - y_k.

Permutations are stored 0-based: rho[i] is the coordinate in chain slot i.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np


@dataclass(frozen=True)
class SimplexId:
    """Cell of the triangulation: integer shift ``n`` and permutation ``rho``."""

    n: tuple
    rho: tuple

    def __post_init__(self):
        t = len(self.n)
        if sorted(self.rho) != list(range(t)):
            raise ValueError(f"rho must be a permutation of 0..{t - 1}")

    @property
    def t(self) -> int:
        return len(self.n)


@dataclass(frozen=True)
class ScaledGrid:
    """Uniform grid {-R + (2R/N) * i : i = 0..N}^t on the cube [-R, R]^t."""

    t: int
    R: float
    N: int

    def __post_init__(self):
        if self.t < 1 or self.N < 1 or not self.R > 0:
            raise ValueError("need t >= 1, N >= 1, R > 0")

    @classmethod
    def unit(cls, t: int) -> "ScaledGrid":
        """Grid with cell size exactly 1 (nodes -1, 0, 1 per axis)."""
        return cls(t, 1.0, 2)

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    @property
    def node_count(self) -> int:
        return (self.N + 1) ** self.t

    def node_array(self) -> np.ndarray:
        """All grid nodes, shape (node_count, t), C-order over axis indices."""
        axes = np.arange(self.N + 1)
        mesh = np.meshgrid(*([axes] * self.t), indexing="ij")
        idx = np.stack([m.ravel() for m in mesh], axis=1)
        return -self.R + self.h * idx

    def node_index(self, i) -> int:
        """Flat node index of the axis-index tuple i (C order)."""
        return int(np.ravel_multi_index(tuple(int(v) for v in i),
                                        (self.N + 1,) * self.t))


def locate_batch(y: np.ndarray, grid: ScaledGrid):
    """Canonical (n, rho) of the containing simplex for each row of y.

    The canonical cell is the lexicographically smallest (n, rho) among
    all cells containing the point: coordinates hitting a lattice plane
    take the lower shift (fractional offset 1 at the top of the chain),
    and tied offsets are ordered by coordinate index.  Returns integer
    arrays (n, rho) of the same shape as y.
    """
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != grid.t:
        raise ValueError(f"points have dimension {y.shape[1]}, grid is {grid.t}")
    z = y / grid.h
    n = np.floor(z).astype(np.int64)
    frac = z - n
    on_face = frac == 0.0
    n[on_face] -= 1
    frac[on_face] = 1.0
    rho = np.argsort(frac, axis=1, kind="stable")
    return n, rho


def locate(y, grid: ScaledGrid) -> SimplexId:
    """Canonical containing simplex of a single point; total on R^t."""
    n, rho = locate_batch(np.asarray(y, dtype=float)[None, :], grid)
    sid = SimplexId(tuple(int(v) for v in n[0]), tuple(int(v) for v in rho[0]))
    if not contains(sid, y, grid):
        raise AssertionError("constructed simplex fails its membership chain")
    return sid


def contains(simplex: SimplexId, y, grid: ScaledGrid, tol: float = 0.0) -> bool:
    """Recheck the defining inequality chain 0 <= v_1 <= ... <= v_t <= 1
    with v = y/h - n ordered by rho."""
    z = np.asarray(y, dtype=float) / grid.h
    v = z[list(simplex.rho)] - np.array(simplex.n, dtype=float)[list(simplex.rho)]
    chain = np.concatenate(([0.0], v, [1.0]))
    return bool(np.all(np.diff(chain) >= -tol))


def spike(y: np.ndarray) -> np.ndarray:
    """The spike function: relu of the minimum of the t^2 + t affine forms
    1 + y_k - y_j (k != j), 1 + y_k and 1 - y_k.

    Equals 1 at the origin, vanishes on every other lattice point and
    outside S0, and is linear on each simplex of the unit triangulation.
    Accepts shape (t,) or a batch (..., t).
    """
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    pts = y[None, :] if single else y
    # The diagonal of the pair table is the constant 1, which never moves
    # the minimum because min(1 + y_k, 1 - y_k) <= 1.
    diffs = 1.0 + pts[..., :, None] - pts[..., None, :]
    m = np.minimum(diffs.min(axis=(-2, -1)),
                   np.minimum((1.0 + pts).min(axis=-1), (1.0 - pts).min(axis=-1)))
    val = np.maximum(m, 0.0)
    return float(val[0]) if single else val


def in_Sprime(y: np.ndarray) -> np.ndarray:
    """Membership in the half-space intersection
    {|y_k| <= 1 for all k, and y_k <= 1 + y_l for all k != l}."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    pts = y[None, :] if single else y
    box = np.abs(pts).max(axis=-1) <= 1.0
    pairs = (pts.max(axis=-1) - pts.min(axis=-1)) <= 1.0
    res = box & pairs
    return bool(res[0]) if single else res


def simplices_containing_origin(t: int) -> list:
    """All (n, rho) cells of the unit triangulation having 0 as a vertex.

    These are exactly the cells with n in {-1, 0}^t whose -1 entries are
    trailing in rho order; there are (t + 1) * t! of them (6 for t = 2).
    Enumeration cost grows like t!, intended for t <= 8.
    """
    out = []
    for rho in permutations(range(t)):
        for trailing in range(t + 1):
            n = [0] * t
            for slot in range(t - trailing, t):
                n[rho[slot]] = -1
            out.append(SimplexId(tuple(n), rho))
    return out


def in_S0(y: np.ndarray) -> np.ndarray:
    """Membership in the union of simplices containing the origin,
    by direct enumeration of the qualifying cells."""
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    pts = y[None, :] if single else y
    res = np.zeros(pts.shape[0], dtype=bool)
    for sid in simplices_containing_origin(pts.shape[1]):
        v = pts[:, list(sid.rho)] - np.array(sid.n, dtype=float)[list(sid.rho)]
        ok = (v[:, 0] >= 0.0) & (v[:, -1] <= 1.0)
        if v.shape[1] > 1:
            ok &= np.all(np.diff(v, axis=1) >= 0.0, axis=1)
        res |= ok
        if res.all():
            break
    return bool(res[0]) if single else res


@dataclass(frozen=True)
class AffineForm:
    """h(y) = coeffs . y + constant."""

    coeffs: tuple
    constant: float

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return y @ np.array(self.coeffs) + self.constant


def simplex_vertices(simplex: SimplexId) -> np.ndarray:
    """The t + 1 vertices: in rho order, vertex i adds 1 to the last i
    chain slots of n."""
    t = simplex.t
    verts = np.zeros((t + 1, t))
    n = np.array(simplex.n, dtype=float)
    for i in range(t + 1):
        u = n.copy()
        for slot in range(t - i, t):
            u[simplex.rho[slot]] += 1.0
        verts[i] = u
    return verts


def vertex_interpolant(simplex: SimplexId) -> AffineForm:
    """Affine function equal to 1 at the origin and 0 at the other
    vertices of a simplex that has 0 as a vertex.

    Solves the (t+1)-unknown linear system over the vertex set; the
    result always lands on one of the three listed shapes 1 + a*y_l - b*y_k.
    """
    verts = simplex_vertices(simplex)
    origin_rows = np.where(~verts.any(axis=1))[0]
    if origin_rows.size == 0:
        raise ValueError("simplex does not contain the origin as a vertex")
    k = origin_rows[0]
    t = simplex.t
    A = np.hstack([verts, np.ones((t + 1, 1))])
    rhs = np.zeros(t + 1)
    rhs[k] = 1.0
    sol = np.linalg.solve(A, rhs)
    coeffs = np.where(np.abs(sol[:t]) < 1e-12, 0.0, sol[:t])
    const = 0.0 if abs(sol[t]) < 1e-12 else sol[t]
    return AffineForm(tuple(float(c) for c in coeffs), float(const))


def classify_interpolant(form: AffineForm, tol: float = 1e-9):
    """Match an affine form against the three listed shapes.

    Returns (a, b, l, k) with h(y) = 1 + a*y_l - b*y_k for
    (a, b) in {(1, 0), (1, 1), (-1, 0)}, or None if the form is not of
    that shape.  Index None stands for an absent term.
    """
    if abs(form.constant - 1.0) > tol:
        return None
    c = np.array(form.coeffs)
    pos = np.where(np.abs(c - 1.0) < tol)[0]
    neg = np.where(np.abs(c + 1.0) < tol)[0]
    zero = np.where(np.abs(c) < tol)[0]
    if len(pos) + len(neg) + len(zero) != c.size:
        return None
    if len(pos) == 1 and len(neg) == 0:
        return (1, 0, int(pos[0]), None)
    if len(pos) == 1 and len(neg) == 1:
        return (1, 1, int(pos[0]), int(neg[0]))
    if len(pos) == 0 and len(neg) == 1:
        return (-1, 0, None, int(neg[0]))
    return None
