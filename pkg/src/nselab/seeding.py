"""Deterministic sub-seed derivation.

Every randomized procedure draws from a Generator built by
`generator(master, label, index)`. The entropy tuple is
(master, crc32(label), index), fed to numpy's SeedSequence, so each
named procedure gets an independent, reproducible stream:

    master  -- the run-level seed (uint64 from config or --seed)
    label   -- a fixed string naming the procedure ("trilinear-corpus",
               "annulus-fields", ...)
    index   -- counter for repeated draws inside one procedure

Records of (master, label, index) in reports are enough to replay any
check in isolation.
"""

import zlib

import numpy as np


def sub_seed(master: int, label: str, index: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(master), zlib.crc32(label.encode("utf-8")), int(index)))


def generator(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(sub_seed(master, label, index))
