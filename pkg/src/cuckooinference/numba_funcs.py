"""Compiled kernels: the counter-based splitmix64 generator, instance sampling,
the 2^n brute-force enumerator and the vector intersection Monte Carlo."""
import numpy as np
from numba import njit, prange  # type: ignore

from src.cuckooinference.constants import GOLDEN_GAMMA, MASK64, MIX_MULTIPLIER_1, MIX_MULTIPLIER_2
from src.cuckooinference.hash_types import SlotArray

_GAMMA = np.uint64(GOLDEN_GAMMA)
_MUL1 = np.uint64(MIX_MULTIPLIER_1)
_MUL2 = np.uint64(MIX_MULTIPLIER_2)
_MASK = np.uint64(MASK64)
_ONE = np.uint64(1)


@njit(cache=True)
def mix64(z: np.uint64) -> np.uint64:
    """splitmix64 finalizer."""
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def absorb(key: np.uint64, word: np.uint64) -> np.uint64:
    """Folds one counter word into a key. Distinct word sequences give independent keys."""
    return mix64(key + (word + _ONE) * _GAMMA)


@njit(cache=True)
def uniform_below(key: np.uint64, bound: np.uint64) -> np.uint64:
    """Uniform draw from [0, bound) by rejection on the low 2^64 mod bound values."""
    # 2^64 mod bound, computed without leaving uint64
    threshold = (_MASK - bound + _ONE) % bound
    attempt = np.uint64(0)
    while True:
        r = mix64(key + attempt * _GAMMA)
        if r >= threshold:
            return r % bound
        attempt += _ONE


@njit(parallel=True, cache=True)
def sample_hashes(n: int, m: int, d: int, seed: np.uint64, trial: np.uint64) -> SlotArray:
    """Every slot index is keyed by (seed, trial, item, side, coord), so the
    result does not depend on how prange splits the items."""
    hashes = np.empty((n, 2, d), dtype=np.int64)
    trial_key = absorb(mix64(seed + _GAMMA), trial)
    bound = np.uint64(m)

    for i in prange(n):
        item_key = absorb(trial_key, np.uint64(i))
        for side in range(2):
            side_key = absorb(item_key, np.uint64(side))
            for k in range(d):
                hashes[i, side, k] = np.int64(uniform_below(absorb(side_key, np.uint64(k)), bound))

    return hashes


@njit(cache=True)
def _is_legal_code(hashes: SlotArray, code: int, stamp: SlotArray) -> bool:
    # bit n-1-i of code is the side of item i, so numeric order is lexicographic order
    n = hashes.shape[0]
    d = hashes.shape[2]
    for i in range(n):
        side = (code >> (n - 1 - i)) & 1
        for k in range(d):
            slot = hashes[i, side, k]
            if stamp[side, slot] == code:
                return False
            stamp[side, slot] = code

    return True


@njit(parallel=True, cache=True)
def first_legal_code(hashes: SlotArray, m: int, num_chunks: int) -> int:
    """Returns the smallest legal assignment code, or -1 if none is legal.
    Chunks cover increasing code ranges so the reduction keeps lexicographic order."""
    n = hashes.shape[0]
    total = 1 << n
    chunks = max(1, min(num_chunks, total))
    chunk_size = (total + chunks - 1) // chunks

    found = np.full(chunks, -1, dtype=np.int64)

    for c in prange(chunks):
        stamp = np.full((2, max(m, 1)), -1, dtype=np.int64)
        start = c * chunk_size
        stop = min(total, start + chunk_size)
        for code in range(start, stop):
            if _is_legal_code(hashes, code, stamp):
                found[c] = code
                break

    for c in range(chunks):
        if found[c] >= 0:
            return found[c]

    return -1


@njit(parallel=True, cache=True)
def count_intersections(d: int, m: int, samples: int, seed: np.uint64) -> int:
    """Counts how many of `samples` pairs of independent uniform d-vectors over [m] share a value."""
    base = mix64(seed + _GAMMA)
    bound = np.uint64(m)
    hits = np.zeros(samples, dtype=np.uint8)

    for s in prange(samples):
        sample_key = absorb(base, np.uint64(s))
        left_key = absorb(sample_key, np.uint64(0))
        right_key = absorb(sample_key, np.uint64(1))
        left = np.empty(d, dtype=np.uint64)
        for a in range(d):
            left[a] = uniform_below(absorb(left_key, np.uint64(a)), bound)
        for b in range(d):
            value = uniform_below(absorb(right_key, np.uint64(b)), bound)
            for a in range(d):
                if left[a] == value:
                    hits[s] = 1
                    break
            if hits[s]:
                break

    return int(hits.sum())
