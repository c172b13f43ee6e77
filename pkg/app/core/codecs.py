"""
Binary tensor files shared by the channel and pre-filter caches.

A file is a fixed little-endian header, an optional block of int64
values, then the tensor as little-endian complex-double pairs in C order.
"""
import struct

import numpy as np

from core.exceptions import FormatError

COMPLEX_DTYPE = np.dtype('<c16')
INT_DTYPE = np.dtype('<i8')


def write_tensor_file(path, header, header_values, tensor, extra_ints=()):
    """Write header, extra int64 values and a complex tensor to path"""
    payload = np.ascontiguousarray(tensor, dtype=COMPLEX_DTYPE)
    extras = np.asarray(extra_ints, dtype=INT_DTYPE)
    with open(path, 'wb') as fh:
        fh.write(header.pack(*header_values))
        fh.write(extras.tobytes())
        fh.write(payload.tobytes(order='C'))


def read_tensor_file(path, header, magic, version):
    """
    Read a file written by write_tensor_file.

    Returns the unpacked header tuple and the remaining bytes; callers know
    how many extra ints and tensor entries follow from the header.
    """
    with open(path, 'rb') as fh:
        raw = fh.read()
    if len(raw) < header.size:
        raise FormatError(f'{path}: truncated header')
    values = header.unpack_from(raw)
    if values[0] != magic:
        raise FormatError(
            f'{path}: bad magic {values[0]!r}, expected {magic!r}'
        )
    if values[1] != version:
        raise FormatError(f'{path}: unsupported version {values[1]}')
    return values, raw[header.size:]


def take_ints(buffer, count):
    """Split count int64 values off the front of buffer"""
    size = count * INT_DTYPE.itemsize
    if len(buffer) < size:
        raise FormatError('truncated integer block')
    return np.frombuffer(buffer[:size], dtype=INT_DTYPE).copy(), buffer[size:]


def take_tensor(buffer, shape):
    """Decode exactly prod(shape) complex values from buffer"""
    count = int(np.prod(shape))
    if len(buffer) != count * COMPLEX_DTYPE.itemsize:
        raise FormatError(
            f'payload holds {len(buffer)} bytes, expected '
            f'{count * COMPLEX_DTYPE.itemsize}'
        )
    data = np.frombuffer(buffer, dtype=COMPLEX_DTYPE, count=count)
    return data.astype(np.complex128).reshape(shape)


def header_struct(*formats):
    """Little-endian header: 4-byte magic, u32 version, then formats"""
    return struct.Struct('<4sI' + ''.join(formats))
