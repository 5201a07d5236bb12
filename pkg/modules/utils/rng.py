"""Deterministic random streams.

All randomness flows from numpy's PCG64 seeded through SeedSequence. Streams
are split by spawn key so that running restarts or chunks in parallel never
changes results:

    (0, i)  restart i of a designer
    (1,)    design sample of a continuous preference
    (2,)    held-out evaluation sample
    (3,)    generated datasets
    (4, c)  chunk c of a chunked sampler
"""
import numpy as np

STREAM_RESTARTS = 0
STREAM_SAMPLE = 1
STREAM_EVAL = 2
STREAM_DATA = 3
STREAM_CHUNKS = 4


def seed_sequence(seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))


def make_rng(seed: int | np.random.SeedSequence, *key: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *key)))


def restart_seeds(seed: int, restarts: int) -> list[np.random.SeedSequence]:
    return [seed_sequence(seed, STREAM_RESTARTS, i) for i in range(restarts)]


def stream_rng(seed: int, stream: int) -> np.random.Generator:
    return make_rng(seed, stream)


def chunk_rngs(seed: int, chunks: int) -> list[np.random.Generator]:
    return [make_rng(seed, STREAM_CHUNKS, c) for c in range(chunks)]
