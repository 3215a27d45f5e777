"""OFDM-IM block construction, unitary transform, and PAPR.

Conventions:
- A frequency block and a time signal are plain complex ndarrays of length
  ``n_fft``; no wrapper types.
- Groups are interleaved: subcarrier ``G*r + g`` is row ``r`` of group ``g``
  (``G`` = number of groups).
- The IDFT is unitary, x(m) = (1/sqrt(N)) * sum_i X(i) exp(j*2*pi*i*m/N),
  so Parseval holds exactly.
- PAPR is referenced to the ensemble mean power ``active/group_size``
  (not the per-block mean) and is returned in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Validated OFDM-IM parameter tuple.

    n_fft:      total subcarrier count (power of two)
    group_size: subcarriers per group; n_fft must be a multiple
    active:     active subcarriers per group, 1 <= active < group_size
    mod_order:  constellation order, power of two >= 2
    """

    n_fft: int
    group_size: int
    active: int
    mod_order: int

    def __post_init__(self):
        N, n, k, M = self.n_fft, self.group_size, self.active, self.mod_order
        if N < 2 or N & (N - 1):
            raise ValueError(f"n_fft must be a power of two >= 2, got {N}")
        if n < 2 or N % n:
            raise ValueError(f"group_size must divide n_fft, got {n} for n_fft={N}")
        if not 1 <= k < n:
            raise ValueError(f"active must satisfy 1 <= active < group_size, got {k}")
        if M < 2 or M & (M - 1):
            raise ValueError(f"mod_order must be a power of two >= 2, got {M}")

    @property
    def num_groups(self) -> int:
        return self.n_fft // self.group_size

    @property
    def total_active(self) -> int:
        return self.active * self.num_groups

    @property
    def index_bits(self) -> int:
        # floor(log2 C(n, k)) bits selected by the activation pattern
        return math.comb(self.group_size, self.active).bit_length() - 1

    @property
    def symbol_bits(self) -> int:
        return self.active * (self.mod_order.bit_length() - 1)

    @property
    def bits_per_group(self) -> int:
        return self.index_bits + self.symbol_bits

    @property
    def mean_power(self) -> float:
        # ensemble mean of |x(m)|^2 for a unit-power constellation
        return self.active / self.group_size


@dataclass(frozen=True)
class Constellation:
    """Unit-average-power symbol set."""

    symbols: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=complex)
        object.__setattr__(self, "symbols", s)
        if s.ndim != 1 or len(s) < 2 or len(s) & (len(s) - 1):
            raise ValueError("constellation size must be a power of two >= 2")
        if abs(np.mean(np.abs(s) ** 2) - 1.0) > 1e-12:
            raise ValueError("constellation average power must be 1")

    @property
    def order(self) -> int:
        return len(self.symbols)

    @classmethod
    def psk(cls, order: int) -> "Constellation":
        """Unit-modulus PSK set; order 4 is the standard QPSK grid (+-1+-j)/sqrt(2)."""
        offset = np.pi / 4 if order == 4 else 0.0
        return cls(np.exp(1j * (offset + 2 * np.pi * np.arange(order) / order)))

    @classmethod
    def qpsk(cls) -> "Constellation":
        return cls.psk(4)

    @classmethod
    def for_order(cls, order: int) -> "Constellation":
        return cls.psk(order)


@dataclass(frozen=True)
class GroupSap:
    """Sorted k-subset of rows {0..group_size-1} active within one group."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if sorted(set(rows)) != list(rows) or (rows and rows[0] < 0):
            raise ValueError(f"rows must be sorted, distinct and nonnegative: {rows}")


@dataclass(frozen=True)
class Sap:
    """Block-level activation pattern: per-group subsets plus the flat index set."""

    groups: tuple
    active: tuple = field(init=False)

    def __post_init__(self):
        G = len(self.groups)
        flat = sorted(G * r + g for g, gs in enumerate(self.groups) for r in gs.rows)
        if len(set(flat)) != len(flat):
            raise ValueError("duplicate active indices")
        object.__setattr__(self, "groups", tuple(self.groups))
        object.__setattr__(self, "active", tuple(flat))

    def check(self, cfg: SystemConfig) -> "Sap":
        if len(self.groups) != cfg.num_groups:
            raise ValueError(f"expected {cfg.num_groups} groups, got {len(self.groups)}")
        for gs in self.groups:
            if len(gs.rows) != cfg.active or any(r >= cfg.group_size for r in gs.rows):
                raise ValueError(f"group rows out of range for cfg: {gs.rows}")
        return self

    def active_array(self) -> np.ndarray:
        return np.array(self.active, dtype=np.intp)

    def indicator(self, n_fft: int) -> np.ndarray:
        alpha = np.zeros(n_fft, dtype=np.uint8)
        alpha[list(self.active)] = 1
        return alpha


# ---------------------------------------------------------------------------
# combinadic (lexicographic k-subset ranking)

def subset_unrank(rank: int, n: int, k: int) -> tuple:
    """k-subset of {0..n-1} with lexicographic rank ``rank`` (rank 0 -> {0..k-1})."""
    if not 0 <= rank < math.comb(n, k):
        raise ValueError(f"rank {rank} out of range for C({n},{k})")
    out = []
    x = 0
    for remaining in range(k, 0, -1):
        c = math.comb(n - x - 1, remaining - 1)
        while rank >= c:
            rank -= c
            x += 1
            c = math.comb(n - x - 1, remaining - 1)
        out.append(x)
        x += 1
    return tuple(out)


def subset_rank(rows, n: int) -> int:
    """Inverse of subset_unrank for a sorted subset of {0..n-1}."""
    rows = tuple(rows)
    k = len(rows)
    rank = 0
    prev = -1
    for j, c_j in enumerate(rows):
        for x in range(prev + 1, c_j):
            rank += math.comb(n - x - 1, k - j - 1)
        prev = c_j
    return rank


# ---------------------------------------------------------------------------
# bit mapping and block assembly

def _bits_to_int(bits) -> int:
    value = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError("bits must be 0/1")
        value = (value << 1) | int(b)
    return value


def map_bits_to_group(bits, cfg: SystemConfig, cs: Constellation):
    """Map one p-bit word to (GroupSap, active-row symbols).

    The first index_bits select the row subset by lexicographic unranking;
    the remaining symbol_bits select one constellation point per active row,
    in row order, MSB first.
    """
    bits = list(bits)
    if len(bits) != cfg.bits_per_group:
        raise ValueError(f"expected {cfg.bits_per_group} bits, got {len(bits)}")
    if cs.order != cfg.mod_order:
        raise ValueError("constellation order does not match cfg.mod_order")
    p1 = cfg.index_bits
    bps = cfg.mod_order.bit_length() - 1
    sap = GroupSap(subset_unrank(_bits_to_int(bits[:p1]), cfg.group_size, cfg.active))
    symbols = np.array(
        [cs.symbols[_bits_to_int(bits[p1 + i * bps : p1 + (i + 1) * bps])] for i in range(cfg.active)]
    )
    return sap, symbols


def sample_random_sap(cfg: SystemConfig, rng: np.random.Generator) -> Sap:
    """Uniform draw over all C(n,k)^G activation patterns (analysis assumption)."""
    groups = tuple(
        GroupSap(tuple(sorted(rng.permutation(cfg.group_size)[: cfg.active].tolist())))
        for _ in range(cfg.num_groups)
    )
    return Sap(groups).check(cfg)


def assemble_block(groups, cfg: SystemConfig):
    """Interleave G (GroupSap, symbols) pairs into a length-N block.

    Placement rule: block[G*r + g] = symbols of group g at its r-th active row.
    Returns (block, Sap).
    """
    if len(groups) != cfg.num_groups:
        raise ValueError(f"expected {cfg.num_groups} groups, got {len(groups)}")
    G = cfg.num_groups
    block = np.zeros(cfg.n_fft, dtype=complex)
    saps = []
    for g, (gsap, symbols) in enumerate(groups):
        if len(symbols) != len(gsap.rows):
            raise ValueError("one symbol per active row required")
        for r, s in zip(gsap.rows, symbols):
            block[G * r + g] = s
        saps.append(gsap)
    return block, Sap(tuple(saps)).check(cfg)


def block_from_bits(bits, cfg: SystemConfig, cs: Constellation):
    """Map G*bits_per_group bits to a full block: one word per group, in group order."""
    bits = list(bits)
    p = cfg.bits_per_group
    if len(bits) != p * cfg.num_groups:
        raise ValueError(f"expected {p * cfg.num_groups} bits, got {len(bits)}")
    pairs = [map_bits_to_group(bits[g * p : (g + 1) * p], cfg, cs) for g in range(cfg.num_groups)]
    return assemble_block(pairs, cfg)


# ---------------------------------------------------------------------------
# transform and PAPR

def idft(block: np.ndarray) -> np.ndarray:
    """Unitary inverse DFT; numpy's ifft carries 1/N, so rescale by sqrt(N)."""
    block = np.asarray(block)
    n = block.shape[-1]
    return np.fft.ifft(block, axis=-1) * math.sqrt(n)


def dft(signal: np.ndarray) -> np.ndarray:
    """Unitary forward DFT (inverse of idft)."""
    signal = np.asarray(signal)
    n = signal.shape[-1]
    return np.fft.fft(signal, axis=-1) / math.sqrt(n)


def papr_db_vs_mean(signal: np.ndarray, mean_power: float) -> float:
    """Peak power over a fixed reference mean power, in dB."""
    peak = float(np.max(np.abs(signal) ** 2))
    return 10.0 * math.log10(peak / mean_power)


def papr_db(signal: np.ndarray, cfg: SystemConfig) -> float:
    """PAPR in dB, referenced to the ensemble mean power active/group_size."""
    return papr_db_vs_mean(signal, cfg.mean_power)


def oversampled_idft(block: np.ndarray, factor: int) -> np.ndarray:
    """Unitary IDFT on a zero-padded spectrum (factor >= 1, integer).

    Indices at or above n_fft/2 are treated as negative frequencies, so the
    result interpolates the Nyquist-rate signal. factor == 1 returns idft().
    """
    if factor < 1 or int(factor) != factor:
        raise ValueError("oversampling factor must be a positive integer")
    block = np.asarray(block)
    if factor == 1:
        return idft(block)
    n = block.shape[-1]
    half = n // 2
    padded = np.zeros(block.shape[:-1] + (n * factor,), dtype=complex)
    padded[..., :half] = block[..., :half]
    padded[..., n * factor - (n - half) :] = block[..., half:]
    return np.fft.ifft(padded, axis=-1) * factor * math.sqrt(n)
