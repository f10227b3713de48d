"""Deep ReLU networks as explicit weight data: evaluation, composition,
serialization and exact nonzero-weight accounting.

A network with J hidden layers computes

    A @ relu(W_J @ relu( ... relu(W_1 @ x + b_1) ... ) + b_J)

where each hidden layer applies its weight matrix, adds the shift vector
and passes the result through relu componentwise.  The output stage is a
plain matrix A with no shift; the scalar case is a 1-row A.  Weight
matrices may be dense ndarrays or scipy CSR matrices; sparsity is an
internal storage choice, never part of the contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

FORMAT_VERSION = 1

# Refuse to densify absurdly large layers when writing the JSON format,
# which stores row-major dense weights.
SERIALIZE_ENTRY_LIMIT = 50_000_000


class NetworkFormatError(ValueError):
    """Raised when a serialized network cannot be parsed."""


def _as_matrix(w):
    if sp.issparse(w):
        return w.tocsr()
    return np.atleast_2d(np.asarray(w, dtype=float))


def _check_finite(w, what):
    data = w.data if sp.issparse(w) else w
    if data.size and not np.all(np.isfinite(data)):
        raise ValueError(f"non-finite entries in {what}")


@dataclass
class Layer:
    weights: object  # (d_j, d_{j-1}) ndarray or CSR matrix
    shifts: np.ndarray  # (d_j,)

    def __post_init__(self):
        self.weights = _as_matrix(self.weights)
        self.shifts = np.asarray(self.shifts, dtype=float).ravel()
        if self.weights.shape[0] != self.shifts.shape[0]:
            raise ValueError(
                f"layer has {self.weights.shape[0]} rows but "
                f"{self.shifts.shape[0]} shifts"
            )
        _check_finite(self.weights, "layer weights")
        _check_finite(self.shifts, "layer shifts")

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


@dataclass
class ReluNetwork:
    """Immutable feedforward ReLU network.

    ``output`` is a matrix so that intermediate construction stages can
    carry several values; scalar networks have a single output row.
    """

    input_dim: int
    layers: list = field(default_factory=list)
    output: object = None

    def __post_init__(self):
        self.layers = [
            l if isinstance(l, Layer) else Layer(*l) for l in self.layers
        ]
        self.output = _as_matrix(self.output)
        _check_finite(self.output, "output weights")
        if self.input_dim < 1:
            raise ValueError("input_dim must be positive")
        prev = self.input_dim
        for j, layer in enumerate(self.layers):
            if layer.cols != prev:
                raise ValueError(
                    f"layer {j} expects {layer.cols} inputs, got {prev}"
                )
            prev = layer.rows
        if self.output.shape[1] != prev:
            raise ValueError(
                f"output expects {self.output.shape[1]} inputs, got {prev}"
            )

    @property
    def output_dim(self) -> int:
        return self.output.shape[0]


def depth(net: ReluNetwork) -> int:
    """Number of hidden layers."""
    return len(net.layers)


def _nnz(w) -> int:
    if sp.issparse(w):
        return int(np.count_nonzero(w.data))
    return int(np.count_nonzero(w))


def count_nonzero(net: ReluNetwork) -> int:
    """Total count of strictly nonzero entries over all weight matrices,
    shift vectors and the output matrix.  Entries that happen to come out
    exactly zero during construction are not counted."""
    total = _nnz(net.output)
    for layer in net.layers:
        total += _nnz(layer.weights) + _nnz(layer.shifts)
    return total


def nonzero_breakdown(net: ReluNetwork) -> dict:
    """Per-component nonzero counts alongside the headline total."""
    per_layer = [
        {"weights": _nnz(l.weights), "shifts": _nnz(l.shifts)}
        for l in net.layers
    ]
    return {
        "total": count_nonzero(net),
        "weights": sum(p["weights"] for p in per_layer),
        "shifts": sum(p["shifts"] for p in per_layer),
        "output": _nnz(net.output),
        "per_layer": per_layer,
    }


def _matmul(w, h):
    # h has shape (d_{j-1}, n); both dense and CSR weights support @.
    out = w @ h
    return np.asarray(out)


def forward(net: ReluNetwork, x: np.ndarray, max_batch_bytes: int = 1 << 29) -> np.ndarray:
    """All output rows for a batch of inputs.

    ``x`` is one point of shape (input_dim,) or a batch (n, input_dim);
    returns (output_dim,) or (n, output_dim).  Wide networks are evaluated
    in chunks so the activation buffer stays below ``max_batch_bytes``.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = x[None, :] if single else x
    if pts.shape[1] != net.input_dim:
        raise ValueError(
            f"input has dimension {pts.shape[1]}, network expects {net.input_dim}"
        )
    width = max((l.rows for l in net.layers), default=net.input_dim)
    chunk = max(1, int(max_batch_bytes // (8 * width)))
    outs = []
    for lo in range(0, pts.shape[0], chunk):
        h = pts[lo : lo + chunk].T
        for layer in net.layers:
            h = _matmul(layer.weights, h)
            h += layer.shifts[:, None]
            np.maximum(h, 0.0, out=h)
        outs.append(_matmul(net.output, h).T)
    res = np.vstack(outs)
    return res[0] if single else res


def evaluate(net: ReluNetwork, x: np.ndarray) -> float:
    """Scalar network value at one point; requires a single output row."""
    if net.output_dim != 1:
        raise ValueError("evaluate is for scalar networks; use forward")
    return float(forward(net, np.asarray(x, dtype=float))[0])


def evaluate_batch(net: ReluNetwork, x: np.ndarray) -> np.ndarray:
    """Scalar values for a batch (n, input_dim) -> (n,)."""
    if net.output_dim != 1:
        raise ValueError("evaluate_batch is for scalar networks; use forward")
    return forward(net, x)[:, 0]


def _vstack(mats):
    if any(sp.issparse(m) for m in mats):
        return sp.vstack([sp.csr_matrix(m) for m in mats], format="csr")
    return np.vstack(mats)


def _block_diag(mats):
    if any(sp.issparse(m) for m in mats) or len(mats) >= 8:
        return sp.block_diag([sp.csr_matrix(m) for m in mats], format="csr")
    out = np.zeros((sum(m.shape[0] for m in mats), sum(m.shape[1] for m in mats)))
    r = c = 0
    for m in mats:
        out[r : r + m.shape[0], c : c + m.shape[1]] = m
        r += m.shape[0]
        c += m.shape[1]
    return out


def compose_serial(outer: ReluNetwork, inner: ReluNetwork) -> ReluNetwork:
    """Network computing outer(inner(x)); depths add.

    The inner output matrix is folded into the first outer layer, so the
    result is again a plain layered network.
    """
    if outer.input_dim != inner.output_dim:
        raise ValueError(
            f"outer expects {outer.input_dim} inputs, inner produces {inner.output_dim}"
        )
    if not outer.layers:
        raise ValueError("outer network must have at least one hidden layer")
    first = outer.layers[0]
    merged = Layer(first.weights @ inner.output, first.shifts.copy())
    layers = list(inner.layers) + [merged] + list(outer.layers[1:])
    return ReluNetwork(inner.input_dim, layers, outer.output.copy())


def compose_parallel(nets: list, coefficients) -> ReluNetwork:
    """Single scalar network computing sum_i c_i * net_i(x).

    All nets must share input_dim and depth and have one output row; pad
    shallower nets with :func:`pad_to_depth` first.  First layers stack on
    the shared input, deeper layers go block diagonal, and the output row
    concatenates the scaled per-net output rows.  The nonzero count is
    exactly the sum of the per-net counts whenever every coefficient is
    nonzero (no extra gadget weights are introduced).
    """
    coefficients = np.asarray(coefficients, dtype=float).ravel()
    if len(nets) != coefficients.shape[0]:
        raise ValueError("one coefficient per network required")
    if not nets:
        raise ValueError("need at least one network")
    d0 = nets[0].input_dim
    J = depth(nets[0])
    for n in nets:
        if n.input_dim != d0:
            raise ValueError("mixed input dimensions")
        if depth(n) != J:
            raise ValueError("mixed depths; pad_to_depth first")
        if n.output_dim != 1:
            raise ValueError("compose_parallel needs scalar networks")
    layers = [Layer(_vstack([n.layers[0].weights for n in nets]),
                    np.concatenate([n.layers[0].shifts for n in nets]))]
    for j in range(1, J):
        layers.append(Layer(_block_diag([n.layers[j].weights for n in nets]),
                            np.concatenate([n.layers[j].shifts for n in nets])))
    out = np.hstack([c * np.asarray(n.output.todense() if sp.issparse(n.output) else n.output)
                     for c, n in zip(coefficients, nets)])
    return ReluNetwork(d0, layers, out)


def identity_net(dim: int, hidden_layers: int = 1) -> ReluNetwork:
    """Network computing x exactly via relu(x) - relu(-x), any depth."""
    if hidden_layers < 1:
        raise ValueError("need at least one hidden layer")
    eye = np.eye(dim)
    layers = [Layer(np.vstack([eye, -eye]), np.zeros(2 * dim))]
    for _ in range(hidden_layers - 1):
        layers.append(Layer(np.eye(2 * dim), np.zeros(2 * dim)))
    return ReluNetwork(dim, layers, np.hstack([eye, -eye]))


def pad_to_depth(net: ReluNetwork, target_depth: int) -> ReluNetwork:
    """Append identity gadget layers until the depth matches.

    Each padding step splits every output row r into the pair
    (relu(r.h), relu(-r.h)) and recombines with (1, -1), so evaluation is
    unchanged on all inputs.
    """
    if target_depth < depth(net):
        raise ValueError("target depth below current depth")
    layers = list(net.layers)
    out = np.asarray(net.output.todense() if sp.issparse(net.output) else net.output)
    r = out.shape[0]
    eye = np.eye(r)
    for _ in range(target_depth - depth(net)):
        layers.append(Layer(np.vstack([out, -out]), np.zeros(2 * r)))
        out = np.hstack([eye, -eye])
    return ReluNetwork(net.input_dim, layers, out)


def _dense_list(w, what):
    if sp.issparse(w):
        if w.shape[0] * w.shape[1] > SERIALIZE_ENTRY_LIMIT:
            raise ValueError(
                f"{what} with shape {w.shape} is too large for the dense "
                "JSON format"
            )
        w = np.asarray(w.todense())
    return [float(v) for v in np.asarray(w, dtype=float).ravel()]


def serialize(net: ReluNetwork) -> bytes:
    """JSON encoding with full round-trip precision.

    Floats are written with Python repr, which is exact for binary64, so
    deserialize(serialize(net)) reproduces every weight bit for bit.
    """
    doc = {
        "version": FORMAT_VERSION,
        "input_dim": net.input_dim,
        "layers": [
            {
                "rows": l.rows,
                "cols": l.cols,
                "weights": _dense_list(l.weights, f"layer {j}"),
                "shifts": [float(v) for v in l.shifts],
            }
            for j, l in enumerate(net.layers)
        ],
        "output": {
            "rows": net.output.shape[0],
            "cols": net.output.shape[1],
            "weights": _dense_list(net.output, "output"),
        },
    }
    return json.dumps(doc).encode("utf-8")


def _require(doc, key, where):
    if key not in doc:
        raise NetworkFormatError(f"missing '{key}' in {where}")
    return doc[key]


def deserialize(raw: bytes) -> ReluNetwork:
    try:
        doc = json.loads(raw.decode("utf-8") if isinstance(raw, bytes) else raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise NetworkFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise NetworkFormatError("top-level JSON object expected")
    version = _require(doc, "version", "network")
    if version != FORMAT_VERSION:
        raise NetworkFormatError(f"unsupported format version {version}")
    input_dim = _require(doc, "input_dim", "network")
    layers = []
    for j, ldoc in enumerate(_require(doc, "layers", "network")):
        rows = _require(ldoc, "rows", f"layer {j}")
        cols = _require(ldoc, "cols", f"layer {j}")
        weights = _require(ldoc, "weights", f"layer {j}")
        shifts = _require(ldoc, "shifts", f"layer {j}")
        if len(weights) != rows * cols:
            raise NetworkFormatError(
                f"layer {j} weights has {len(weights)} entries, expected {rows * cols}"
            )
        if len(shifts) != rows:
            raise NetworkFormatError(
                f"layer {j} shifts has {len(shifts)} entries, expected {rows}"
            )
        layers.append(Layer(np.array(weights, dtype=float).reshape(rows, cols),
                            np.array(shifts, dtype=float)))
    odoc = _require(doc, "output", "network")
    rows = _require(odoc, "rows", "output")
    cols = _require(odoc, "cols", "output")
    weights = _require(odoc, "weights", "output")
    if len(weights) != rows * cols:
        raise NetworkFormatError(
            f"output weights has {len(weights)} entries, expected {rows * cols}"
        )
    out = np.array(weights, dtype=float).reshape(rows, cols)
    try:
        return ReluNetwork(input_dim, layers, out)
    except ValueError as exc:
        raise NetworkFormatError(str(exc)) from exc
