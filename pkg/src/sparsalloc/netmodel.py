"""Synthetic layer-chain networks and calibration data.

A :class:`LayerNet` is an ordered chain of weight matrices, the desk-scale
stand-in for a deep model: layer ``i`` maps activations of width
``dims[i]`` to width ``dims[i+1]``. Attention, normalization and residual
paths are deliberately absent; whether residual connections change any of
the allocation conclusions is untested here and the linear chain is the
documented model.

Serialization ("SPAL" container, little-endian):

* net file: magic ``SPAL``, u32 version=1, u8 activation (0=linear,
  1=relu), u32 L, then (u32 rows, u32 cols) per layer, then each layer's
  entries as raw float64 row-major.
* calibration sets reuse the container with L=1 and activation byte 0.
* mask files (see :mod:`sparsalloc.pruner`) reuse magic+version with a
  4-byte ``MASK`` tag in place of the activation byte, and byte-per-entry
  payloads.

The display label on a net is not part of the byte layout and therefore
does not round-trip; it is excluded from equality.
"""

from __future__ import annotations

import hashlib
import struct
import sys
from array import array
from dataclasses import dataclass, field
from enum import Enum

from sparsalloc.errors import NetFileError, ShapeError
from sparsalloc.linalg import DenseMatrix, matmul
from sparsalloc.rng import SplitMix64
from sparsalloc import _kernels

MAGIC = b"SPAL"
FORMAT_VERSION = 1
MASK_TAG = b"MASK"


class Activation(Enum):
    LINEAR = "linear"
    RELU = "relu"


_ACT_TO_BYTE = {Activation.LINEAR: 0, Activation.RELU: 1}
_BYTE_TO_ACT = {v: k for k, v in _ACT_TO_BYTE.items()}


@dataclass(frozen=True)
class LayerNet:
    """Chain of layer weight matrices with a shared activation."""

    layers: tuple[DenseMatrix, ...]
    activation: Activation = Activation.LINEAR
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ShapeError("a net needs at least one layer")
        for i in range(len(self.layers) - 1):
            if self.layers[i + 1].cols != self.layers[i].rows:
                raise ShapeError(
                    f"layer {i + 1} expects {self.layers[i + 1].cols} inputs "
                    f"but layer {i} produces {self.layers[i].rows}"
                )

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def in_dim(self) -> int:
        return self.layers[0].cols

    @property
    def dims(self) -> list[int]:
        return [self.layers[0].cols] + [w.rows for w in self.layers]


@dataclass(frozen=True)
class CalibrationSet:
    """Input matrix x0 of shape (first-layer width x d samples)."""

    x0: DenseMatrix

    @property
    def d(self) -> int:
        return self.x0.cols


def generate_net(
    L: int,
    dims: list[int],
    activation: Activation = Activation.LINEAR,
    seed: int = 0,
    label: str = "",
) -> LayerNet:
    """Deterministically generate an L-layer chain.

    ``dims`` must have L+1 entries. Layer i gets shape dims[i+1] x dims[i]
    with entries uniform on [-sqrt(3/c_in), +sqrt(3/c_in)], i.e. variance
    1/c_in, which keeps activation magnitudes comparable across depth.
    """
    if len(dims) != L + 1:
        raise ShapeError(f"need {L + 1} dims for {L} layers, got {len(dims)}")
    if any(d < 1 for d in dims):
        raise ShapeError("all dims must be >= 1")
    rng = SplitMix64(seed)
    layers = []
    for i in range(L):
        c_in, c_out = dims[i], dims[i + 1]
        bound = (3.0 / c_in) ** 0.5
        layers.append(DenseMatrix(c_out, c_in, rng.fill_uniform(c_out * c_in, -bound, bound)))
    return LayerNet(tuple(layers), activation, label)


def generate_calibration(c_in: int, d: int, seed: int) -> CalibrationSet:
    """Standard-normal calibration inputs; any full-rank distribution works."""
    if c_in < 1 or d < 1:
        raise ShapeError("calibration dims must be >= 1")
    rng = SplitMix64(seed)
    return CalibrationSet(DenseMatrix(c_in, d, rng.fill_normal(c_in * d)))


def _apply_activation(pre: DenseMatrix, activation: Activation) -> DenseMatrix:
    if activation is Activation.LINEAR:
        return pre
    return DenseMatrix(pre.rows, pre.cols, _kernels.relu(pre.data))


def forward(net: LayerNet, x0: DenseMatrix) -> list[DenseMatrix]:
    """Activations [X_1, ..., X_{L+1}] with X_1 = x0, X_{i+1} = act(W_i X_i)."""
    if x0.rows != net.in_dim:
        raise ShapeError(f"input has {x0.rows} rows, net expects {net.in_dim}")
    acts = [x0]
    for w in net.layers:
        acts.append(_apply_activation(matmul(w, acts[-1]), net.activation))
    return acts


def forward_preacts(
    net: LayerNet, x0: DenseMatrix
) -> tuple[list[DenseMatrix], list[DenseMatrix]]:
    """Like :func:`forward` but also returns the pre-activation products
    [W_1 X_1, ..., W_L X_L], on which reconstruction errors are defined."""
    if x0.rows != net.in_dim:
        raise ShapeError(f"input has {x0.rows} rows, net expects {net.in_dim}")
    acts = [x0]
    preacts = []
    for w in net.layers:
        pre = matmul(w, acts[-1])
        preacts.append(pre)
        acts.append(_apply_activation(pre, net.activation))
    return acts, preacts


def _float_bytes(data: array) -> bytes:
    if sys.byteorder == "little":
        return data.tobytes()
    swapped = array("d", data)
    swapped.byteswap()
    return swapped.tobytes()


def _floats_from(buf: bytes) -> array:
    out = array("d")
    out.frombytes(buf)
    if sys.byteorder != "little":
        out.byteswap()
    return out


def net_to_bytes(net: LayerNet) -> bytes:
    parts = [
        MAGIC,
        struct.pack("<IBI", FORMAT_VERSION, _ACT_TO_BYTE[net.activation], net.L),
    ]
    for w in net.layers:
        parts.append(struct.pack("<II", w.rows, w.cols))
    for w in net.layers:
        parts.append(_float_bytes(w.data))
    return b"".join(parts)


def net_from_bytes(buf: bytes, label: str = "") -> LayerNet:
    if len(buf) < 13:
        raise NetFileError("file too short for a SPAL header")
    if buf[:4] != MAGIC:
        raise NetFileError("bad magic; not a SPAL file")
    version, act_byte, L = struct.unpack_from("<IBI", buf, 4)
    if version != FORMAT_VERSION:
        raise NetFileError(f"unsupported format version {version}")
    if act_byte not in _BYTE_TO_ACT:
        raise NetFileError(f"unknown activation byte {act_byte}")
    if L < 1:
        raise NetFileError("layer count must be >= 1")
    off = 13
    shapes = []
    for _ in range(L):
        if off + 8 > len(buf):
            raise NetFileError("truncated shape table")
        r, c = struct.unpack_from("<II", buf, off)
        if r < 1 or c < 1:
            raise NetFileError("invalid layer shape")
        shapes.append((r, c))
        off += 8
    layers = []
    for r, c in shapes:
        nbytes = 8 * r * c
        if off + nbytes > len(buf):
            raise NetFileError("truncated layer payload")
        layers.append(DenseMatrix(r, c, _floats_from(buf[off : off + nbytes])))
        off += nbytes
    if off != len(buf):
        raise NetFileError("trailing bytes after last layer")
    return LayerNet(tuple(layers), _BYTE_TO_ACT[act_byte], label)


def save_net(net: LayerNet, path) -> None:
    from sparsalloc._csvio import atomic_write_bytes

    atomic_write_bytes(path, net_to_bytes(net))


def load_net(path, label: str = "") -> LayerNet:
    with open(path, "rb") as fh:
        return net_from_bytes(fh.read(), label)


def save_calibration(calib: CalibrationSet, path) -> None:
    save_net(LayerNet((calib.x0,), Activation.LINEAR), path)


def load_calibration(path) -> CalibrationSet:
    net = load_net(path)
    if net.L != 1:
        raise NetFileError("calibration container must hold exactly one matrix")
    return CalibrationSet(net.layers[0])


def net_digest(net: LayerNet) -> str:
    """Hex SHA-256 of the serialized bytes; stable across runs."""
    return hashlib.sha256(net_to_bytes(net)).hexdigest()
