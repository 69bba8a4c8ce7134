"""Exact small-n coding experiments behind the sphere-packing argument.

Words of length ``n`` are stored as integer bitmasks (bit ``i`` of the int
is position ``i`` of the word). A received word carries a separate erasure
mask; erased positions are skipped when measuring Hamming distance, which is
the same as giving both bit values likelihood 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rates import FecInputs, channel_capacity, security_conditions

MAX_SPHERE_N = 64
MAX_CODE_N = 24
MAX_CODE_K = 16
PAIRWISE_BUDGET = 10**8


def sphere_volume(n: int, t: int) -> int:
    """Number of n-bit words within Hamming distance ``t`` of a fixed word."""
    if not 0 <= t <= n <= MAX_SPHERE_N:
        raise ValueError(f"need 0 <= t <= n <= {MAX_SPHERE_N}, got n={n}, t={t}")
    return sum(math.comb(n, j) for j in range(t + 1))


def popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.uint32)).astype(np.int64)


def word_to_int(bits: Sequence[Optional[int]]) -> tuple[int, int]:
    """Pack a bit list with ``None`` erasures into ``(value, erasure_mask)``."""
    value = mask = 0
    for i, b in enumerate(bits):
        if b is None:
            mask |= 1 << i
        elif b == 1:
            value |= 1 << i
        elif b != 0:
            raise ValueError(f"bit {i} is {b!r}, expected 0, 1 or None")
    return value, mask


def int_to_word(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> i) & 1 for i in range(n))


def _pairwise_min_distance(words: np.ndarray, chunk: int = 512) -> int:
    best = np.iinfo(np.int64).max
    for start in range(0, words.size, chunk):
        block = words[start : start + chunk]
        d = popcount(block[:, None] ^ words[None, :])
        # Mask the diagonal entries of this block.
        rows = np.arange(block.size)
        d[rows, start + rows] = best
        best = min(best, int(d.min()))
    return best


@dataclass(frozen=True)
class Codebook:
    n: int
    codewords: np.ndarray
    min_distance: int
    generator: Optional[np.ndarray] = None

    @classmethod
    def from_words(cls, n: int, words, generator: Optional[np.ndarray] = None) -> "Codebook":
        arr = np.asarray(sorted({int(w) for w in words}), dtype=np.uint32)
        if arr.size == 0:
            raise ValueError("codebook is empty")
        if len(words) != arr.size:
            raise ValueError("codewords must be distinct")
        if int(arr.max()) >> n:
            raise ValueError(f"codeword wider than n = {n}")
        if arr.size == 1:
            d = n + 1  # no pair: every error pattern of weight <= n is correctable
        elif generator is not None and n * arr.size**2 > PAIRWISE_BUDGET:
            nonzero = arr[arr != 0]
            d = int(popcount(nonzero).min())
        else:
            d = _pairwise_min_distance(arr)
        return cls(n=n, codewords=arr, min_distance=d, generator=generator)

    def __len__(self) -> int:
        return int(self.codewords.size)

    @property
    def k(self) -> Optional[int]:
        size = len(self)
        return size.bit_length() - 1 if size & (size - 1) == 0 else None

    @property
    def rate(self) -> float:
        return math.log2(len(self)) / self.n

    def __contains__(self, word: int) -> bool:
        i = np.searchsorted(self.codewords, word)
        return bool(i < self.codewords.size and self.codewords[i] == word)


def gf2_rank(rows: Sequence[int]) -> int:
    rank = 0
    pivots: list[int] = []
    for r in rows:
        for p in pivots:
            r = min(r, r ^ p)
        if r:
            pivots.append(r)
            rank += 1
    return rank


def span(generator: Sequence[int]) -> np.ndarray:
    """All XOR combinations of the generator rows."""
    words = np.zeros(1, dtype=np.uint32)
    for g in generator:
        words = np.concatenate([words, words ^ np.uint32(g)])
    return words


def _random_generator(n: int, k: int, rng: np.random.Generator) -> list[int]:
    return [int(x) for x in rng.integers(0, 1 << n, size=k, dtype=np.int64)]


def random_full_rank_generator(n: int, k: int, rng: np.random.Generator, max_tries: int = 10_000) -> list[int]:
    """Draw k rows until they are linearly independent over GF(2)."""
    for _ in range(max_tries):
        gen = _random_generator(n, k, rng)
        if gf2_rank(gen) == k:
            return gen
    raise RuntimeError(f"no full-rank generator found for n={n}, k={k}")


def random_linear_code(n: int, k: int, seed: int) -> Codebook:
    """Linear [n, k] code spanned by k random rows.

    A rank-deficient draw is retried with seed ``seed + 1``, ``seed + 2``, ...
    """
    if not 0 <= k <= n <= MAX_CODE_N or k > MAX_CODE_K:
        raise ValueError(f"need 0 <= k <= n <= {MAX_CODE_N} and k <= {MAX_CODE_K}, got n={n}, k={k}")
    s = seed
    while True:
        gen = _random_generator(n, k, np.random.default_rng(s))
        if gf2_rank(gen) == k:
            break
        s += 1
    return Codebook.from_words(n, span(gen), generator=np.asarray(gen, dtype=np.uint32))


def distances(book: Codebook, value: int, erasure_mask: int = 0) -> np.ndarray:
    keep = ((1 << book.n) - 1) & ~erasure_mask
    return popcount((book.codewords ^ np.uint32(value)) & np.uint32(keep))


def _decode_ints(codewords: np.ndarray, value: int, keep: int) -> tuple[int, int]:
    """Return ``(best codeword, number of codewords tied at the minimum)``."""
    d = popcount((codewords ^ np.uint32(value)) & np.uint32(keep))
    dmin = d.min()
    ties = np.flatnonzero(d == dmin)
    return int(codewords[ties[0]]), int(ties.size)


def ml_decode_batch(book: Codebook, values, erasure_masks=0, chunk_cells: int = 1 << 22) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-distance decoding of many integer words at once.

    Returns ``(best, ambiguous)`` arrays aligned with ``values``; semantics
    match :func:`ml_decode`.
    """
    values = np.asarray(values, dtype=np.uint32).ravel()
    keep = np.uint32((1 << book.n) - 1) & ~np.broadcast_to(np.asarray(erasure_masks, dtype=np.uint32), values.shape)
    best = np.empty_like(values)
    ambiguous = np.empty(values.shape, dtype=bool)
    step = max(1, chunk_cells // len(book))
    cw = book.codewords[np.newaxis, :]
    for lo in range(0, values.size, step):
        v, m = values[lo : lo + step, np.newaxis], keep[lo : lo + step, np.newaxis]
        d = popcount((cw ^ v) & m)
        dmin = d.min(axis=1, keepdims=True)
        best[lo : lo + step] = book.codewords[np.argmax(d == dmin, axis=1)]
        ambiguous[lo : lo + step] = (d == dmin).sum(axis=1) > 1
    return best, ambiguous


def ml_decode(book: Codebook, received) -> tuple[tuple[int, ...], bool]:
    """Minimum-distance decoding over non-erased positions.

    ``received`` is a length-``n`` sequence of 0, 1 or ``None`` (erasure).
    Returns the nearest codeword and whether the minimum was attained more than
    once. On a tie the returned word is the smallest tied codeword, but the
    flag is set and callers must not treat it as a decision.
    """
    if len(received) != book.n:
        raise ValueError(f"received word has length {len(received)}, expected {book.n}")
    value, mask = word_to_int(received)
    best, ties = _decode_ints(book.codewords, value, ((1 << book.n) - 1) & ~mask)
    return int_to_word(best, book.n), ties > 1


def _noisy_observation(word: int, n: int, p_flip: float, p_erase: float, rng: np.random.Generator) -> tuple[int, int]:
    flips = rng.random(n) < p_flip
    erased = rng.random(n) < p_erase
    weights = 1 << np.arange(n, dtype=np.int64)
    return word ^ int(weights[flips].sum()), int(weights[erased].sum())


def shannon_experiment(n: int, R: float, p1: float, eta: float, trials: int, seed: int) -> float:
    """Fraction of unambiguous correct ML decodings over random linear codes.

    Each trial draws a fresh [n, ceil(R n)] code and a uniform message,
    flips each bit with probability ``p1`` and erases it with probability
    ``eta``.
    """
    if n > 20:
        raise ValueError(f"n must be at most 20, got {n}")
    if trials < 1000:
        raise ValueError(f"need at least 1000 trials, got {trials}")
    k = math.ceil(R * n - 1e-12)
    if not 0 <= k <= min(n, MAX_CODE_K):
        raise ValueError(f"rate {R} gives k = {k}, outside [0, {min(n, MAX_CODE_K)}]")
    rng = np.random.default_rng(seed)
    full = (1 << n) - 1
    ok = 0
    for _ in range(trials):
        words = span(random_full_rank_generator(n, k, rng))
        sent = int(words[rng.integers(words.size)])
        value, mask = _noisy_observation(sent, n, p1, eta, rng)
        best, ties = _decode_ints(words, value, full & ~mask)
        ok += ties == 1 and best == sent
    return ok / trials


@dataclass(frozen=True)
class AmbiguityResult:
    bob_success: float
    eve_list_exponent: float
    k: int
    condition_a: bool
    condition_b: bool


def default_code_dimension(n: int, f: FecInputs) -> int:
    """Largest k with k/n within Bob's capacity (the reliability condition)."""
    k = math.floor(n * channel_capacity(f.eta_B, f.p1) + 1e-12)
    return max(1, min(k, n, MAX_CODE_K))


def eve_ambiguity_experiment(
    n: int, f: FecInputs, trials: int, seed: int, k: Optional[int] = None, gap: float = 2.0
) -> AmbiguityResult:
    """Bob's decoding success and the size of Eve's candidate list.

    Bob sees the codeword with flip rate ``p1`` and erasure rate ``eta_B``;
    Eve sees it with flip rate ``p_A`` and erasure rate ``eta_E``. Eve's list
    is every codeword tied at her minimum distance. The exponent is
    ``log2(mean list size) / n``.
    """
    if n > 20:
        raise ValueError(f"n must be at most 20, got {n}")
    if k is None:
        k = default_code_dimension(n, f)
    cond_a, cond_b = security_conditions(n, k / n, f, gap)
    rng = np.random.default_rng(seed)
    full = (1 << n) - 1
    bob_ok = 0
    eve_list = 0
    for _ in range(trials):
        words = span(random_full_rank_generator(n, k, rng))
        sent = int(words[rng.integers(words.size)])
        value, mask = _noisy_observation(sent, n, f.p1, f.eta_B, rng)
        best, ties = _decode_ints(words, value, full & ~mask)
        bob_ok += ties == 1 and best == sent
        value, mask = _noisy_observation(sent, n, f.p_A, f.eta_E, rng)
        eve_list += _decode_ints(words, value, full & ~mask)[1]
    return AmbiguityResult(
        bob_success=bob_ok / trials,
        eve_list_exponent=math.log2(eve_list / trials) / n,
        k=k,
        condition_a=cond_a,
        condition_b=cond_b,
    )
