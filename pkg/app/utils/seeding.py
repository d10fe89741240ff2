import zlib

import numpy as np


def derive_seed(root: int, purpose: str, index: int = 0) -> int:
    """Derives a child seed from (root, purpose, index).

    The purpose tag is hashed with CRC-32 so the mapping does not depend on
    Python's randomized ``hash``.
    """
    tag = zlib.crc32(purpose.encode("utf-8"))
    sequence = np.random.SeedSequence(
        entropy=int(root), spawn_key=(tag, int(index))
    )
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def make_rng(root: int, purpose: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, purpose, index))
