"""Image I/O and amplitude encoding.

Images are plain 2-D numpy arrays indexed ``image[i, j]`` (row i, column j).
Flattening is column-major: pixel (i, j) lands at index ``j * M + i``.
"""

from __future__ import annotations

import gzip
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from qcnn.errors import DataError, ImageFormatError
from qcnn.state import QuantumState

IMAG_TOL = 1e-9


@dataclass(frozen=True)
class EncodingRecord:
    norm_factor: float
    padded_size: int
    original_dims: tuple

    @property
    def num_qubits(self) -> int:
        return int(self.padded_size).bit_length() - 1


def flatten(image) -> np.ndarray:
    return np.asarray(image, dtype=float).reshape(-1, order="F")


def unflatten(vector, rows: int, cols: int) -> np.ndarray:
    return np.asarray(vector)[: rows * cols].reshape((rows, cols), order="F")


def encode(image) -> tuple[QuantumState, EncodingRecord]:
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.size == 0:
        raise ImageFormatError(f"expected a non-empty 2-D image, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ImageFormatError("image has non-finite pixels")
    vec = flatten(img)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ImageFormatError("cannot amplitude-encode an all-zero image")
    n = max(0, math.ceil(math.log2(vec.size))) if vec.size > 1 else 0
    amps = np.zeros(1 << n, dtype=complex)
    amps[: vec.size] = vec / norm
    return QuantumState(n, amps), EncodingRecord(norm, 1 << n, img.shape)


def decode(state: QuantumState, record: EncodingRecord, rescale: float = 1.0) -> np.ndarray:
    rows, cols = record.original_dims
    if state.amplitudes.size < rows * cols:
        raise ImageFormatError(
            f"state has {state.amplitudes.size} amplitudes, image needs {rows * cols}")
    head = state.amplitudes[: rows * cols]
    residue = float(np.max(np.abs(head.imag))) if head.size else 0.0
    if residue >= IMAG_TOL:
        raise ImageFormatError(f"decoded amplitudes carry imaginary residue {residue:.3e}")
    return unflatten(head.real * (rescale * record.norm_factor), rows, cols)


def pad_to_power_of_two(image) -> np.ndarray:
    """Zero-pad bottom/right to the smallest square power-of-two side (at least 4)."""
    img = np.asarray(image, dtype=float)
    side = max(4, 1 << math.ceil(math.log2(max(img.shape))))
    out = np.zeros((side, side))
    out[: img.shape[0], : img.shape[1]] = img
    return out


# -- file formats ---------------------------------------------------------

def _format_of(path, fmt):
    if fmt:
        return fmt.lower()
    suffix = Path(path).suffix.lower()
    if suffix in (".pgm", ".pnm"):
        return "pgm"
    if suffix in (".csv", ".txt"):
        return "csv"
    raise ImageFormatError(f"cannot infer image format from {path!r}")


def _pgm_tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageFormatError("malformed header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:1] != b"P":
        raise ImageFormatError("malformed header")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"unsupported magic number {magic.decode(errors='replace')}")
    tokens, pos = _pgm_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ImageFormatError("malformed header") from None
    if width <= 0 or height <= 0 or not 0 < maxval < 256:
        raise ImageFormatError("malformed header")
    if magic == b"P5":
        body = data[pos + 1: pos + 1 + width * height]
        if len(body) != width * height:
            raise ImageFormatError("truncated pixel data")
        pixels = np.frombuffer(body, dtype=np.uint8).astype(float)
    else:
        try:
            pixels = np.array(data[pos:].split(), dtype=float)
        except ValueError:
            raise ImageFormatError("non-numeric pixel data") from None
        if pixels.size != width * height:
            raise ImageFormatError(f"expected {width * height} pixels, found {pixels.size}")
    return pixels.reshape(height, width)


def write_pgm(path, image, binary: bool = True) -> dict:
    """Write an 8-bit PGM after an affine map onto [0, 255].

    The map is saved next to the image as ``<path>.json`` so the original
    scale can be recovered.
    """
    img = np.asarray(image, dtype=float)
    lo, hi = float(img.min()), float(img.max())
    scale = (hi - lo) / 255.0 if hi > lo else 1.0
    pixels = np.clip(np.rint((img - lo) / scale), 0, 255).astype(np.uint8)
    h, w = pixels.shape
    path = Path(path)
    if binary:
        path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + pixels.tobytes())
    else:
        rows = "\n".join(" ".join(str(int(v)) for v in row) for row in pixels)
        path.write_text(f"P2\n{w} {h}\n255\n{rows}\n")
    meta = {"offset": lo, "scale": scale}
    Path(str(path) + ".json").write_text(json.dumps(meta))
    return meta


def load_image(path, fmt: str | None = None, apply_sidecar: bool = False) -> np.ndarray:
    fmt = _format_of(path, fmt)
    if fmt == "csv":
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2, dtype=float)
        except ValueError as exc:
            raise ImageFormatError(f"malformed CSV image: {exc}") from None
    if fmt == "pgm":
        img = read_pgm(path)
        side = Path(str(path) + ".json")
        if apply_sidecar and side.exists():
            meta = json.loads(side.read_text())
            img = img * meta["scale"] + meta["offset"]
        return img
    raise ImageFormatError(f"unsupported image format {fmt!r}")


def save_image(path, image, fmt: str | None = None) -> None:
    fmt = _format_of(path, fmt)
    img = np.asarray(image, dtype=float)
    if fmt == "csv":
        # repr-precision floats keep the round trip exact
        with open(path, "w") as fh:
            for row in img:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    elif fmt == "pgm":
        write_pgm(path, img)
    else:
        raise ImageFormatError(f"unsupported image format {fmt!r}")


# -- MNIST IDX ------------------------------------------------------------

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def _open(path):
    path = str(path)
    return gzip.open(path, "rb") if path.endswith(".gz") else open(path, "rb")


def read_idx_images(path) -> np.ndarray:
    with _open(path) as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise DataError(f"{path}: truncated IDX header")
        magic, count, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise DataError(f"{path}: bad magic number 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
        body = fh.read(count * rows * cols)
    if len(body) != count * rows * cols:
        raise DataError(f"{path}: truncated image data")
    return np.frombuffer(body, dtype=np.uint8).reshape(count, rows, cols)


def read_idx_labels(path) -> np.ndarray:
    with _open(path) as fh:
        header = fh.read(8)
        if len(header) < 8:
            raise DataError(f"{path}: truncated IDX header")
        magic, count = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise DataError(f"{path}: bad magic number 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
        body = fh.read(count)
    if len(body) != count:
        raise DataError(f"{path}: truncated label data")
    return np.frombuffer(body, dtype=np.uint8).copy()


def write_idx(images_path, labels_path, images, labels) -> None:
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    opener = lambda p: gzip.open(p, "wb") if str(p).endswith(".gz") else open(p, "wb")
    with opener(images_path) as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols) + images.tobytes())
    with opener(labels_path) as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + labels.tobytes())


def pad_mnist(image, width: int = 2) -> np.ndarray:
    return np.pad(np.asarray(image, dtype=float), width)


def load_mnist(images_path, labels_path, filter_labels=None):
    """Return a list of (32x32 image scaled to [0, 1], label) pairs."""
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise DataError(f"{len(images)} images but {len(labels)} labels")
    wanted = None if filter_labels is None else {int(v) for v in filter_labels}
    out = []
    for img, lab in zip(images, labels):
        if wanted is not None and int(lab) not in wanted:
            continue
        out.append((pad_mnist(img / 255.0), int(lab)))
    return out
