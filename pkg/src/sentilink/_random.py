"""Named random sub-streams derived from one run seed."""

import zlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    # crc32 keeps the stream id stable across processes (hash() is salted)
    return np.random.default_rng([int(seed), zlib.crc32(name.encode("utf-8"))])
