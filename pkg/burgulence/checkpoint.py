"""
Versioned little-endian checkpoint records.

    offset size field
    0      4    magic b"BGCK"
    4      2    version (uint16)
    6      1    scheme tag: 0 spectral, 1 linearized, 2 godunov
    7      1    reserved
    8      8    t (float64)
    16     8    nu (float64, 0 for godunov)
    24     4    payload length P: K modes or N cells (uint32)
    28     4    carrier grid N (uint32)
    32     8    seed (uint64)
    40     8    member_id (uint64)
    48     8    next lattice step_index (uint64)
    56     ...  spectral: 2K float64, re/im interleaved for k = 1..K
                godunov: N float64 cell averages
"""
import enum
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path as p

import numpy as np

from burgulence.errors import CheckpointError

MAGIC = b"BGCK"
VERSION = 1
HEADER = struct.Struct("<4sHBBddIIQQQ")


class Scheme(enum.IntEnum):
    SPECTRAL = 0
    LINEARIZED = 1
    GODUNOV = 2


@dataclass(frozen=True, slots=True, eq=False)
class Checkpoint:
    scheme: Scheme
    t: float
    nu: float
    N: int
    seed: int
    member_id: int
    step_index: int
    payload: np.ndarray     # complex128 modes or float64 cells

    @property
    def is_spectral(self) -> bool:
        return self.scheme != Scheme.GODUNOV


def encode(ck: Checkpoint) -> bytes:
    if ck.is_spectral:
        body = np.ascontiguousarray(ck.payload, dtype=np.complex128).view('<f8')
        length = body.size // 2
    else:
        body = np.ascontiguousarray(ck.payload, dtype='<f8')
        length = body.size
    head = HEADER.pack(MAGIC, VERSION, int(ck.scheme), 0, ck.t, ck.nu, length, ck.N,
                       ck.seed, ck.member_id, ck.step_index)
    return head + body.astype('<f8').tobytes()


def decode(raw: bytes) -> Checkpoint:
    if len(raw) < HEADER.size:
        raise CheckpointError(f"checkpoint too short ({len(raw)} bytes)")
    magic, version, tag, _, t, nu, length, N, seed, member_id, step_index = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"bad checkpoint magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        scheme = Scheme(tag)
    except ValueError:
        raise CheckpointError(f"unknown scheme tag {tag}")
    n_float = 2 * length if scheme != Scheme.GODUNOV else length
    body = np.frombuffer(raw, dtype='<f8', offset=HEADER.size)
    if body.size != n_float:
        raise CheckpointError(f"checkpoint payload holds {body.size} values, header says {n_float}")
    payload = body.astype(np.float64).view(np.complex128).copy() if scheme != Scheme.GODUNOV else body.astype(np.float64)
    return Checkpoint(scheme, t, nu, N, seed, member_id, step_index, payload)


def write_checkpoint(path: p, ck: Checkpoint) -> None:
    """atomic: write a temporary file next to path, then rename"""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(encode(ck))
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def read_checkpoint(path: p) -> Checkpoint:
    return decode(path.read_bytes())
