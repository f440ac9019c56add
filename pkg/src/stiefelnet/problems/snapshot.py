"""Binary snapshots of problem instances for exact run reproducibility.

Container layout (all integers little-endian):

    u32 magic 0x53544E31 ("STN1")
    u32 kind-string length, then that many UTF-8 bytes ("pca" or "lrmc")
    u32 matrix count
    per matrix: u32 name length + UTF-8 name,
                u32 ndim, u64 x ndim dims,
                row-major float64 payload

Scalars ride along as 1x1 matrices so the container stays homogeneous.
"""

import struct

import numpy as np

from ..errors import BadMagicError, TruncatedFileError
from .lrmc import LrmcInstance
from .pca import PcaInstance

MAGIC = 0x53544E31


def _write_matrix(fh, name: str, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    raw = name.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)
    fh.write(struct.pack("<I", arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
    fh.write(arr.tobytes(order="C"))


def _read_exact(fh, nbytes: int, what: str) -> bytes:
    data = fh.read(nbytes)
    if len(data) < nbytes:
        raise TruncatedFileError(f"snapshot ended inside {what}")
    return data


def _read_matrix(fh) -> tuple[str, np.ndarray]:
    (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "name length"))
    name = _read_exact(fh, name_len, "name").decode("utf-8")
    (ndim,) = struct.unpack("<I", _read_exact(fh, 4, "ndim"))
    dims = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim, "dims"))
    count = int(np.prod(dims)) if ndim else 1
    payload = _read_exact(fh, 8 * count, f"payload of {name}")
    return name, np.frombuffer(payload, dtype="<f8").reshape(dims).copy()


def save_instance(path: str, inst) -> None:
    """Write a PCA or LRMC instance to the binary container."""
    if isinstance(inst, PcaInstance):
        kind = "pca"
        mats = {f"shard{i}": s for i, s in enumerate(inst.shards)}
        mats["dims"] = np.array([[inst.d, inst.r]], dtype=np.float64)
        if inst.optimum is not None:
            mats["optimum"] = inst.optimum
    elif isinstance(inst, LrmcInstance):
        kind = "lrmc"
        mats = {f"shard{i}": s for i, s in enumerate(inst.shards)}
        mats.update({f"mask{i}": m for i, m in enumerate(inst.masks)})
        mats["dims"] = np.array([[inst.d, inst.T, inst.r]], dtype=np.float64)
        if inst.ground_truth is not None:
            mats["ground_truth"] = inst.ground_truth
    else:
        raise TypeError(f"cannot snapshot {type(inst).__name__}")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", MAGIC))
        raw = kind.encode("utf-8")
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        fh.write(struct.pack("<I", len(mats)))
        for name in sorted(mats):
            _write_matrix(fh, name, mats[name])


def load_instance(path: str, scaling: str = "per_sample"):
    """Read a container written by :func:`save_instance`."""
    with open(path, "rb") as fh:
        (magic,) = struct.unpack("<I", _read_exact(fh, 4, "magic"))
        if magic != MAGIC:
            raise BadMagicError(f"{path}: magic 0x{magic:08x} != 0x{MAGIC:08x}")
        (kind_len,) = struct.unpack("<I", _read_exact(fh, 4, "kind length"))
        kind = _read_exact(fh, kind_len, "kind").decode("utf-8")
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "matrix count"))
        mats = dict(_read_matrix(fh) for _ in range(count))
    def block(prefix):
        keys = [m for m in mats if m.startswith(prefix)]
        return [mats[k] for k in sorted(keys, key=lambda k: int(k[len(prefix):]))]

    shards = block("shard")
    if kind == "pca":
        d, r = (int(v) for v in mats["dims"].ravel())
        return PcaInstance(shards=shards, d=d, r=r, optimum=mats.get("optimum"),
                           scaling=scaling)
    if kind == "lrmc":
        d, T, r = (int(v) for v in mats["dims"].ravel())
        masks = block("mask")
        return LrmcInstance(shards=shards, masks=masks, d=d, T=T, r=r,
                            ground_truth=mats.get("ground_truth"), scaling=scaling)
    raise BadMagicError(f"{path}: unknown snapshot kind {kind!r}")
