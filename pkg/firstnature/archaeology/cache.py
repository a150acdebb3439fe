"""
Binary cache of Monte Carlo replicate tensors. The layout is the magic bytes ``APSA``, a little-endian u32 format
version, a u32 number of dimensions, one u32 per dimension and the row-major bits packed with ``numpy.packbits``.
"""
import logging
import os
import struct
from typing import Union

import numpy as np

from firstnature.exceptions import DataError

logger = logging.getLogger(__name__)

MAGIC = b'APSA'
VERSION = 1


def write_replicate_cache(replicates: np.ndarray, path: Union[str, os.PathLike]) -> None:
    """
    Write a boolean tensor to `path`.
    """
    bits = np.asarray(replicates, dtype=bool)
    header = MAGIC + struct.pack(f'<II{bits.ndim}I', VERSION, bits.ndim, *bits.shape)
    with open(path, 'wb') as f:
        f.write(header)
        f.write(np.packbits(bits.ravel(order='C')).tobytes())
    logger.debug('Wrote replicate cache of shape %s to %s', bits.shape, path)


def read_replicate_cache(path: Union[str, os.PathLike]) -> np.ndarray:
    """
    Read a boolean tensor written by :py:func:`write_replicate_cache`.

    Raises
    ------
    DataError
        If the file is not a replicate cache, has an unsupported version or is truncated.
    """
    with open(path, 'rb') as f:
        content = f.read()
    if content[:4] != MAGIC:
        raise DataError(f"{path} is not a replicate cache")
    try:
        version, ndims = struct.unpack_from('<II', content, 4)
        if version != VERSION:
            raise DataError(f"Unsupported replicate cache version {version} in {path}")
        shape = struct.unpack_from(f'<{ndims}I', content, 12)
    except struct.error as e:
        raise DataError(f"Truncated replicate cache header in {path}") from e

    offset = 12 + 4 * ndims
    if len(content) < offset:
        raise DataError(f"Truncated replicate cache header in {path}")
    n_bits = int(np.prod(shape, dtype=np.int64))
    body = np.frombuffer(content, dtype=np.uint8, offset=offset)
    if len(body) != (n_bits + 7) // 8:
        raise DataError(f"Replicate cache {path} holds {len(body)} bytes, expected {(n_bits + 7) // 8}")
    return np.unpackbits(body, count=n_bits).astype(bool).reshape(shape)
