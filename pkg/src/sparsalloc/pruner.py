"""Per-layer mask construction under a target sparsity.

Scores are magnitude or activation-aware (|w| times the input feature's
2-norm over calibration samples); masks zero the lowest-scored entries.
Ranking compares the whole layer by default; ``per_row`` restricts the
comparison group to each output row. Ties always resolve by flat row-major
index (lower index pruned first / kept first), so masks are reproducible
across implementations.

Sequential pruning: layer i is scored with the propagated *sparse* input
by default, the way post-training pruners see activations. Pass
``dense_scoring=True`` to score every layer with the dense activations
instead (ablation mode; also the only mode in which layers could be
processed concurrently).
"""

from __future__ import annotations

import struct
from array import array
from dataclasses import dataclass, field
from typing import Sequence, Union

from sparsalloc import _kernels
from sparsalloc._csvio import atomic_write_bytes
from sparsalloc.errors import DomainError, NetFileError, ShapeError
from sparsalloc.linalg import DenseMatrix, matmul
from sparsalloc.netmodel import (
    FORMAT_VERSION,
    MAGIC,
    MASK_TAG,
    CalibrationSet,
    LayerNet,
    _apply_activation,
    forward,
)


@dataclass(frozen=True)
class Magnitude:
    """Score entries by |w|."""


@dataclass(frozen=True)
class WandaStyle:
    """Score entries by |w| times the input feature norm."""


@dataclass(frozen=True)
class NMGroup:
    """Keep n of every m consecutive entries along each output row.

    ``score`` chooses the metric used inside each group.
    """

    n: int
    m: int
    score: Union[Magnitude, WandaStyle] = field(default_factory=WandaStyle)

    def __post_init__(self):
        if self.m < 1 or not (0 <= self.n <= self.m):
            raise DomainError(f"invalid N:M pattern {self.n}:{self.m}")


PruneMethod = Union[Magnitude, WandaStyle, NMGroup]


@dataclass(frozen=True)
class Mask:
    """A 0/1 matrix matching its weight's shape."""

    values: DenseMatrix

    def __post_init__(self):
        for v in self.values.data:
            if v != 0.0 and v != 1.0:
                raise DomainError("mask entries must be 0 or 1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def num_zeros(self) -> int:
        return sum(1 for v in self.values.data if v == 0.0)

    @property
    def sparsity(self) -> float:
        return self.num_zeros / self.values.numel

    def apply(self, w: DenseMatrix) -> DenseMatrix:
        if w.shape != self.values.shape:
            raise ShapeError(f"mask {self.values.shape} does not fit weight {w.shape}")
        return DenseMatrix(
            w.rows, w.cols, _kernels.elementwise_mul(w.data, self.values.data)
        )


def score_layer(
    w: DenseMatrix, x: DenseMatrix | None, method: PruneMethod
) -> DenseMatrix:
    """Importance scores for every entry of ``w`` (higher = keep)."""
    if isinstance(method, NMGroup):
        return score_layer(w, x, method.score)
    if isinstance(method, Magnitude):
        return DenseMatrix(w.rows, w.cols, _kernels.abs_values(w.data))
    if isinstance(method, WandaStyle):
        if x is None:
            raise ShapeError("WandaStyle scoring needs a calibration input")
        if x.rows != w.cols:
            raise ShapeError(
                f"calibration input has {x.rows} features, weight expects {w.cols}"
            )
        sq = _kernels.row_sq_norms(x.data, x.rows, x.cols)
        norms = array("d", (v ** 0.5 for v in sq))
        return DenseMatrix(w.rows, w.cols, _kernels.wanda_scores(w.data, w.rows, w.cols, norms))
    raise DomainError(f"unknown prune method: {method!r}")


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def prune_layer(
    w: DenseMatrix, score: DenseMatrix, s: float, per_row: bool = False
) -> Mask:
    """Mask zeroing the round(s * numel) lowest-scored entries.

    Stable ordering means equal scores are pruned lower-flat-index first.
    With ``per_row``, the count and ranking apply within each output row.
    """
    if score.shape != w.shape:
        raise ShapeError(f"score {score.shape} does not match weight {w.shape}")
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"sparsity must lie in [0, 1], got {s}")
    values = array("d", bytes(8 * w.numel))
    for i in range(w.numel):
        values[i] = 1.0
    if per_row:
        cols = w.cols
        k_row = _round_half_up(s * cols)
        for r in range(w.rows):
            base = r * cols
            order = sorted(range(base, base + cols), key=score.data.__getitem__)
            for idx in order[:k_row]:
                values[idx] = 0.0
    else:
        k = _round_half_up(s * w.numel)
        order = sorted(range(w.numel), key=score.data.__getitem__)
        for idx in order[:k]:
            values[idx] = 0.0
    return Mask(DenseMatrix(w.rows, w.cols, values))


def nm_mask(w: DenseMatrix, score: DenseMatrix, n: int, m: int) -> Mask:
    """Keep the n highest-scored entries of every m-wide group in each row.

    A trailing partial group of length l keeps ceil(n * l / m) entries so
    the achieved sparsity stays closest to 1 - n/m.
    """
    if score.shape != w.shape:
        raise ShapeError(f"score {score.shape} does not match weight {w.shape}")
    if m < 1 or not (0 <= n <= m):
        raise DomainError(f"invalid N:M pattern {n}:{m}")
    values = array("d", bytes(8 * w.numel))
    cols = w.cols
    for r in range(w.rows):
        base = r * cols
        for g0 in range(0, cols, m):
            glen = min(m, cols - g0)
            keep = n if glen == m else -((-n * glen) // m)
            idxs = sorted(
                range(base + g0, base + g0 + glen),
                key=lambda i: (-score.data[i], i),
            )
            for i in idxs[:keep]:
                values[i] = 1.0
    return Mask(DenseMatrix(w.rows, w.cols, values))


def _masks_for_rates(net, x0, rates, method, dense_scoring, per_row, per_layer_nm=None):
    if dense_scoring:
        dense_acts = forward(net, x0)
    masks: list[Mask] = []
    sparse_layers: list[DenseMatrix] = []
    x_cur = x0
    for i, w in enumerate(net.layers):
        x_score = dense_acts[i] if dense_scoring else x_cur
        score = score_layer(w, x_score, method)
        if per_layer_nm is not None:
            mask = nm_mask(w, score, per_layer_nm[i], method.m)
        elif isinstance(method, NMGroup):
            mask = nm_mask(w, score, method.n, method.m)
        else:
            mask = prune_layer(w, score, rates[i], per_row)
        w_sparse = mask.apply(w)
        masks.append(mask)
        sparse_layers.append(w_sparse)
        x_cur = _apply_activation(matmul(w_sparse, x_cur), net.activation)
    return masks, LayerNet(tuple(sparse_layers), net.activation, net.label)


def prune_net(
    net: LayerNet,
    calib: CalibrationSet,
    profile,
    method: PruneMethod,
    dense_scoring: bool = False,
    per_row: bool = False,
) -> tuple[list[Mask], LayerNet]:
    """Prune every layer at its profile rate, propagating sparse inputs.

    With an :class:`NMGroup` method the fixed n:m pattern applies to every
    layer; use :func:`prune_net_nm` for per-layer N values.
    """
    if len(profile.rates) != net.L:
        raise ShapeError(
            f"profile has {len(profile.rates)} rates for a {net.L}-layer net"
        )
    return _masks_for_rates(
        net, calib.x0, profile.rates, method, dense_scoring, per_row
    )


def prune_net_nm(
    net: LayerNet,
    calib: CalibrationSet,
    ns: Sequence[int],
    m: int,
    score: Union[Magnitude, WandaStyle] = WandaStyle(),
    dense_scoring: bool = False,
) -> tuple[list[Mask], LayerNet]:
    """Mixed N:M pruning: layer i keeps ns[i] of every m entries."""
    if len(ns) != net.L:
        raise ShapeError(f"got {len(ns)} N values for a {net.L}-layer net")
    method = NMGroup(n=max(0, min(m, ns[0])), m=m, score=score)
    return _masks_for_rates(
        net, calib.x0, None, method, dense_scoring, False, per_layer_nm=list(ns)
    )


def masks_to_bytes(masks: Sequence[Mask]) -> bytes:
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), MASK_TAG]
    parts.append(struct.pack("<I", len(masks)))
    for mk in masks:
        parts.append(struct.pack("<II", mk.values.rows, mk.values.cols))
    for mk in masks:
        parts.append(bytes(1 if v == 1.0 else 0 for v in mk.values.data))
    return b"".join(parts)


def masks_from_bytes(buf: bytes) -> list[Mask]:
    if len(buf) < 16:
        raise NetFileError("file too short for a mask container")
    if buf[:4] != MAGIC:
        raise NetFileError("bad magic; not a SPAL file")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != FORMAT_VERSION:
        raise NetFileError(f"unsupported format version {version}")
    if buf[8:12] != MASK_TAG:
        raise NetFileError("missing MASK tag; this is not a mask container")
    (count,) = struct.unpack_from("<I", buf, 12)
    off = 16
    shapes = []
    for _ in range(count):
        if off + 8 > len(buf):
            raise NetFileError("truncated mask shape table")
        r, c = struct.unpack_from("<II", buf, off)
        shapes.append((r, c))
        off += 8
    masks = []
    for r, c in shapes:
        n = r * c
        if off + n > len(buf):
            raise NetFileError("truncated mask payload")
        chunk = buf[off : off + n]
        if any(b not in (0, 1) for b in chunk):
            raise NetFileError("mask payload has bytes outside {0, 1}")
        masks.append(Mask(DenseMatrix(r, c, array("d", (float(b) for b in chunk)))))
        off += n
    if off != len(buf):
        raise NetFileError("trailing bytes after last mask")
    return masks


def save_masks(masks: Sequence[Mask], path) -> None:
    atomic_write_bytes(path, masks_to_bytes(masks))


def load_masks(path) -> list[Mask]:
    with open(path, "rb") as fh:
        return masks_from_bytes(fh.read())
