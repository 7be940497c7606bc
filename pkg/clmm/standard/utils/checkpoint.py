"""
checkpoint.py - This module reads and writes clmm checkpoints.

Layout, all integers unsigned 32-bit little-endian:
    b"CLMM" | version | stage | record* | crc32
    record = name_length | name (UTF-8) | rank | dims[rank] | float64 LE data
The CRC32 covers every byte before it.
"""

import struct
import zlib

import numpy as np

from clmm.models.errors import IntegrityError

MAGIC = b"CLMM"
VERSION = 1
STAGES = (1, 2)

_U32 = struct.Struct("<I")

def encode_checkpoint(tensors, stage):
    """
    Serialize named tensors.

    Arguments:
    tensors :: dict(str -> ndarray) - names must be unique, which a
        dictionary guarantees; entries are written in sorted order
    stage :: int - 1 or 2

    Returns:
    payload :: bytes
    """
    if stage not in STAGES:
        raise IntegrityError("Checkpoint stage must be one of {}, got {}.".format(STAGES, stage))
    chunks = [MAGIC, _U32.pack(VERSION), _U32.pack(stage)]
    for name in sorted(tensors):
        array = np.asarray(tensors[name], dtype="<f8")
        encoded_name = name.encode("utf-8")
        chunks.append(_U32.pack(len(encoded_name)))
        chunks.append(encoded_name)
        chunks.append(_U32.pack(array.ndim))
        chunks.extend(_U32.pack(dim) for dim in array.shape)
        chunks.append(np.ascontiguousarray(array).tobytes())
    #ENDFOR
    body = b"".join(chunks)
    return body + _U32.pack(zlib.crc32(body) & 0xffffffff)


class _Reader(object):
    def __init__(self, body, source):
        self.body = body
        self.offset = 0
        self.source = source


    def take(self, count):
        if self.offset + count > len(self.body):
            raise IntegrityError("Checkpoint {} is truncated at byte {}."
                                 "".format(self.source, self.offset))
        chunk = self.body[self.offset:self.offset + count]
        self.offset += count
        return chunk


    def u32(self):
        return _U32.unpack(self.take(4))[0]


def decode_checkpoint(payload, source="<bytes>"):
    """
    Parse and verify a checkpoint.

    Arguments:
    payload :: bytes
    source :: str - used in error messages

    Returns:
    stage :: int
    tensors :: dict(str -> ndarray)
    """
    if len(payload) < len(MAGIC) or payload[:len(MAGIC)] != MAGIC:
        raise IntegrityError("{} is not a clmm checkpoint (bad magic).".format(source))
    if len(payload) < len(MAGIC) + 3 * _U32.size:
        raise IntegrityError("Checkpoint {} is truncated.".format(source))
    body = payload[:-_U32.size]
    stored_crc = _U32.unpack(payload[-_U32.size:])[0]
    if zlib.crc32(body) & 0xffffffff != stored_crc:
        raise IntegrityError("Checkpoint {} failed its CRC32 check.".format(source))
    reader = _Reader(body, source)
    reader.take(len(MAGIC))
    version = reader.u32()
    if version != VERSION:
        raise IntegrityError("Checkpoint {} has unsupported version {}.".format(source, version))
    stage = reader.u32()
    if stage not in STAGES:
        raise IntegrityError("Checkpoint {} has unknown stage {}.".format(source, stage))
    tensors = dict()
    while reader.offset < len(body):
        name_length = reader.u32()
        try:
            name = reader.take(name_length).decode("utf-8")
        except UnicodeDecodeError:
            raise IntegrityError("Checkpoint {} holds a tensor name that is not UTF-8."
                                 "".format(source))
        if name in tensors:
            raise IntegrityError("Checkpoint {} repeats the tensor name {}.".format(source, name))
        rank = reader.u32()
        shape = tuple(reader.u32() for _ in range(rank))
        size = int(np.prod(shape, dtype=np.int64))
        data = reader.take(8 * size)
        tensors[name] = np.frombuffer(data, dtype="<f8").astype(np.float64).reshape(shape)
    #ENDWHILE
    return stage, tensors


def save_checkpoint(file_path, tensors, stage):
    payload = encode_checkpoint(tensors, stage)
    with open(file_path, "wb") as checkpoint_file:
        checkpoint_file.write(payload)
    return len(payload)


def load_checkpoint(file_path, expected_stage=None):
    """
    Read a checkpoint file.

    Arguments:
    file_path :: str
    expected_stage :: int - raise an IntegrityError on any other stage

    Returns:
    stage :: int
    tensors :: dict(str -> ndarray)
    """
    with open(file_path, "rb") as checkpoint_file:
        payload = checkpoint_file.read()
    stage, tensors = decode_checkpoint(payload, source=file_path)
    if expected_stage is not None and stage != expected_stage:
        raise IntegrityError("{} is a stage {} checkpoint, expected stage {}."
                             "".format(file_path, stage, expected_stage))
    return stage, tensors
