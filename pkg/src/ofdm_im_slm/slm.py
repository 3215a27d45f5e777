"""Phase-sequence sets, per-group permutations, and the SLM selector.

A phase sequence is a unit-modulus complex ndarray of length n_fft; a
permutation is an int ndarray d with out[d[i]] = in[i]. Permutations must
map each residue class mod G onto itself (permutation stays inside each
interleaved group), which together with bijectivity is equivalent to
d[i] % G == i % G for all i.

Generators take an explicit numpy Generator; everything after generation
is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GroupSap, Sap, SystemConfig, idft, papr_db

# Feedback polynomials x^m + ... + 1 known to generate maximal-length
# sequences, given as exponent tuples. Each entry is re-verified at
# generation time by the exact-period check.
PRIMITIVE_POLYS = {
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 3, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
}


@dataclass(frozen=True)
class MlsSpec:
    """LFSR description: degree and feedback polynomial exponents (incl. degree and 0)."""

    degree: int
    taps: tuple = ()

    def __post_init__(self):
        taps = tuple(self.taps) if self.taps else PRIMITIVE_POLYS.get(self.degree)
        if taps is None:
            raise ValueError(f"no built-in polynomial for degree {self.degree}; pass taps")
        if self.degree < 2 or max(taps) != self.degree or 0 not in taps:
            raise ValueError(f"taps must span x^{self.degree} .. x^0, got {taps}")
        object.__setattr__(self, "taps", tuple(sorted(set(taps), reverse=True)))

    @property
    def period(self) -> int:
        return (1 << self.degree) - 1


def gen_mls(spec: MlsSpec) -> np.ndarray:
    """Maximal-length 0/1 sequence from the all-ones LFSR state.

    Raises if the state does not return to all-ones after exactly
    2^m - 1 steps (non-primitive feedback polynomial).
    """
    m = spec.degree
    length = spec.period
    # recent outputs, most recent first; recurrence s_t = XOR of s_{t-(m-e)}
    state = [1] * m
    offsets = [m - e - 1 for e in spec.taps if 0 < e < m] + [m - 1]
    out = np.empty(length, dtype=np.uint8)
    for t in range(length):
        bit = 0
        for off in offsets:
            bit ^= state[off]
        out[t] = bit
        state = [bit] + state[:-1]
        if state == [1] * m and t != length - 1:
            raise ValueError(f"taps {spec.taps} give period {t + 1}, not {length}")
    if state != [1] * m:
        raise ValueError(f"taps {spec.taps} do not give period {length}")
    return out


def mls_plus_minus(spec: MlsSpec) -> np.ndarray:
    """+-1 image of the sequence (bit 0 -> +1, bit 1 -> -1)."""
    return 1.0 - 2.0 * gen_mls(spec).astype(float)


def cyclic_hadamard_matrix(degree: int, taps: tuple = ()) -> np.ndarray:
    """N x N +-1 matrix, N = 2^degree: all-ones border, circulant MLS core.

    Row u >= 1 is [1, b shifted left by u-1]; the two-valued autocorrelation
    of the sequence makes the rows mutually orthogonal.
    """
    b = mls_plus_minus(MlsSpec(degree, taps))
    size = b.size + 1
    h = np.ones((size, size))
    for s in range(size - 1):
        h[1 + s, 1:] = np.roll(b, -s)
    return h


# ---------------------------------------------------------------------------
# phase sequence sets

@dataclass(frozen=True)
class PhaseSequenceSet:
    """U unit-modulus rows of length n_fft, pairwise distinct."""

    sequences: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        seq = np.atleast_2d(np.asarray(self.sequences, dtype=complex))
        object.__setattr__(self, "sequences", seq)
        if seq.shape[0] < 1:
            raise ValueError("need at least one phase sequence")
        if np.max(np.abs(np.abs(seq) - 1.0)) > 1e-12:
            raise ValueError("phase sequence entries must have unit modulus")
        for u in range(seq.shape[0]):
            for v in range(u + 1, seq.shape[0]):
                if np.array_equal(seq[u], seq[v]):
                    raise ValueError(f"phase sequences {u} and {v} are identical")

    @property
    def u(self) -> int:
        return self.sequences.shape[0]

    @property
    def n_fft(self) -> int:
        return self.sequences.shape[1]


def gen_hadamard_pss(cfg: SystemConfig, u: int, taps: tuple = ()) -> PhaseSequenceSet:
    """First u rows of the cyclic Hadamard matrix as a PSS (row 0 = all-ones)."""
    if u > cfg.n_fft:
        raise ValueError(f"u={u} exceeds n_fft={cfg.n_fft}")
    degree = cfg.n_fft.bit_length() - 1
    h = cyclic_hadamard_matrix(degree, taps)
    return PhaseSequenceSet(h[:u].astype(complex), kind="cyclic-hadamard")


def gen_random_pss(
    cfg: SystemConfig,
    u: int,
    rng: np.random.Generator,
    alphabet: str = "quaternary",
    force_first_all_ones: bool = False,
) -> PhaseSequenceSet:
    """i.i.d. random phase sequences: binary +-1, quaternary +-1/+-j, or continuous phase."""
    n = cfg.n_fft
    if alphabet == "binary":
        seq = (1.0 - 2.0 * rng.integers(0, 2, (u, n))).astype(complex)
    elif alphabet == "quaternary":
        seq = np.exp(1j * np.pi / 2 * rng.integers(0, 4, (u, n)))
    elif alphabet == "continuous":
        seq = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, (u, n)))
    else:
        raise ValueError(f"unknown alphabet {alphabet!r}")
    if force_first_all_ones:
        seq[0] = 1.0
    return PhaseSequenceSet(seq, kind="random")


def all_ones_pss(cfg: SystemConfig) -> PhaseSequenceSet:
    return PhaseSequenceSet(np.ones((1, cfg.n_fft), dtype=complex), kind="explicit")


# ---------------------------------------------------------------------------
# permutation sets

def validate_permutation(d: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    d = np.asarray(d, dtype=np.intp)
    if d.shape != (cfg.n_fft,) or not np.array_equal(np.sort(d), np.arange(cfg.n_fft)):
        raise ValueError("not a permutation of 0..n_fft-1")
    G = cfg.num_groups
    if np.any(d % G != np.arange(cfg.n_fft) % G):
        raise ValueError("permutation leaves a group (residue class mod G not preserved)")
    return d


@dataclass(frozen=True)
class PermutationSet:
    """U per-group permutations, rows of an int array.

    Construction checks bijectivity; group closure is checked against a
    config by the generators and loaders.
    """

    perms: np.ndarray
    kind: str = "explicit"

    def __post_init__(self):
        perms = np.atleast_2d(np.asarray(self.perms, dtype=np.intp))
        object.__setattr__(self, "perms", perms)
        full = np.arange(perms.shape[1])
        for row in perms:
            if not np.array_equal(np.sort(row), full):
                raise ValueError("each row must be a permutation of 0..n_fft-1")

    @property
    def u(self) -> int:
        return self.perms.shape[0]


def gen_perm_set(
    cfg: SystemConfig,
    u: int,
    kind: str = "random",
    rng: np.random.Generator | None = None,
    explicit=None,
    force_identity_first: bool = False,
) -> PermutationSet:
    """Build a permutation set.

    random:   each row permutes every group's rows independently and uniformly
    identity: all rows are the identity
    explicit: validate the given list of index arrays
    """
    N, n, G = cfg.n_fft, cfg.group_size, cfg.num_groups
    if kind == "identity":
        perms = np.tile(np.arange(N, dtype=np.intp), (u, 1))
    elif kind == "random":
        if rng is None:
            raise ValueError("random permutation set needs an rng")
        perms = np.empty((u, N), dtype=np.intp)
        for i in range(u):
            for g in range(G):
                members = np.arange(n, dtype=np.intp) * G + g
                perms[i, members] = members[rng.permutation(n)]
        if force_identity_first:
            perms[0] = np.arange(N, dtype=np.intp)
    elif kind == "explicit":
        if explicit is None:
            raise ValueError("explicit permutation set needs the index arrays")
        perms = np.array([validate_permutation(d, cfg) for d in explicit], dtype=np.intp)
        if perms.shape[0] != u:
            raise ValueError(f"expected {u} permutations, got {perms.shape[0]}")
    else:
        raise ValueError(f"unknown permutation kind {kind!r}")
    for row in perms:
        validate_permutation(row, cfg)
    return PermutationSet(perms, kind=kind)


def apply_permutation(block: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Move every entry i to position d[i]."""
    block = np.asarray(block)
    out = np.empty_like(block)
    out[..., d] = block
    return out


def permute_sap(sap: Sap, d: np.ndarray, cfg: SystemConfig) -> Sap:
    """Activation pattern of the permuted block, {d(i) : i active}."""
    G = cfg.num_groups
    d = np.asarray(d)
    groups = []
    for g, gs in enumerate(sap.groups):
        rows = sorted(int(d[G * r + g] - g) // G for r in gs.rows)
        groups.append(GroupSap(tuple(rows)))
    return Sap(tuple(groups)).check(cfg)


# ---------------------------------------------------------------------------
# SLM selection

@dataclass(frozen=True)
class SlmResult:
    """Outcome of one SLM pass: chosen branch, its signal, all candidate PAPRs."""

    selected_index: int
    signal: np.ndarray
    papr_db: np.ndarray


def slm_select(
    block: np.ndarray, pss: PhaseSequenceSet, perms: PermutationSet, cfg: SystemConfig
) -> SlmResult:
    """Permute, phase-rotate, transform each branch; keep the minimum-PAPR signal.

    Ties go to the lowest branch index.
    """
    if pss.u != perms.u:
        raise ValueError(f"pss has {pss.u} sequences but perms has {perms.u}")
    paprs = np.empty(pss.u)
    signals = []
    for i in range(pss.u):
        candidate = idft(pss.sequences[i] * apply_permutation(block, perms.perms[i]))
        signals.append(candidate)
        paprs[i] = papr_db(candidate, cfg)
    best = int(np.argmin(paprs))
    return SlmResult(selected_index=best, signal=signals[best], papr_db=paprs)


# ---------------------------------------------------------------------------
# JSON documents (phases in radians, permutations as index arrays)

def pss_to_json(pss: PhaseSequenceSet) -> dict:
    return {
        "kind": pss.kind,
        "n_fft": pss.n_fft,
        "phases": [[float(p) for p in np.angle(row)] for row in pss.sequences],
    }


def pss_from_json(doc: dict) -> PhaseSequenceSet:
    phases = np.array(doc["phases"], dtype=float)
    return PhaseSequenceSet(np.exp(1j * phases), kind=doc.get("kind", "explicit"))


def perm_set_to_json(perms: PermutationSet) -> dict:
    return {"kind": perms.kind, "perms": [[int(i) for i in row] for row in perms.perms]}


def perm_set_from_json(doc: dict, cfg: SystemConfig) -> PermutationSet:
    rows = [validate_permutation(np.array(row), cfg) for row in doc["perms"]]
    return PermutationSet(np.array(rows), kind=doc.get("kind", "explicit"))
