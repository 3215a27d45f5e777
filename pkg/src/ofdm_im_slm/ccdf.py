"""Seeded Monte-Carlo CCDF estimation of PAPR for configurable schemes.

Reproducibility contract: all randomness in a run derives from the plan
seed. The generator sets are instantiated once from stream (seed, 0) in a
fixed order (phase sequences first, then permutations); trial blocks are
drawn in fixed-size batches of BATCH_TRIALS, batch b using stream
(seed, 2, b). Workers only partition whole batches and the reduction is
integer addition, so identical plans give bit-identical exceedance counts
for any worker count.

Per-batch draw order (per trial block): for each group in order, the
active rows (uniform subset, or ranked-word lookup in bits mode), then all
symbol indices. Candidate u applies permutation u, phase sequence u, and
the unitary IDFT; exceedances of the selected branch are counted per
gamma.
"""

from __future__ import annotations

import hashlib
import json
import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .core import Constellation, SystemConfig, idft, oversampled_idft, subset_unrank
from .slm import (
    PermutationSet,
    PhaseSequenceSet,
    all_ones_pss,
    gen_hadamard_pss,
    gen_perm_set,
    gen_random_pss,
    perm_set_to_json,
    pss_to_json,
)

BATCH_TRIALS = 4096

PSS_KINDS = ("random", "cyclic-hadamard", "pinned", "all-ones")
PERM_KINDS = ("identity", "random", "pinned")
SAP_SOURCES = ("uniform", "bits")


@dataclass(frozen=True)
class SchemeDescriptor:
    """One experiment arm: original transmission or SLM with U branches."""

    mode: str
    u: int = 1
    pss_kind: str = "random"
    perm_kind: str = "identity"
    sap_source: str = "uniform"
    pss_alphabet: str = "quaternary"
    pinned_pss: PhaseSequenceSet | None = None
    pinned_perms: PermutationSet | None = None

    def __post_init__(self):
        if self.mode == "original":
            # original transmission is exactly one untouched branch
            if self.u != 1 or self.pss_kind != "all-ones" or self.perm_kind != "identity":
                raise ValueError("original mode implies u=1, all-ones PSS, identity permutation")
        elif self.mode == "slm":
            if self.u < 1:
                raise ValueError("u must be >= 1")
            if self.pss_kind not in PSS_KINDS or self.perm_kind not in PERM_KINDS:
                raise ValueError(f"unknown pss/perm kind: {self.pss_kind}/{self.perm_kind}")
            if self.pss_kind == "pinned" and (self.pinned_pss is None or self.pinned_pss.u != self.u):
                raise ValueError("pinned pss_kind requires pinned_pss with matching u")
            if self.perm_kind == "pinned" and (self.pinned_perms is None or self.pinned_perms.u != self.u):
                raise ValueError("pinned perm_kind requires pinned_perms with matching u")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sap_source not in SAP_SOURCES:
            raise ValueError(f"unknown sap_source {self.sap_source!r}")

    @classmethod
    def original(cls, sap_source: str = "uniform") -> "SchemeDescriptor":
        return cls(mode="original", u=1, pss_kind="all-ones", perm_kind="identity", sap_source=sap_source)


@dataclass(frozen=True)
class TrialPlan:
    """Complete experiment protocol; everything a run needs, seed included."""

    cfg: SystemConfig
    scheme: SchemeDescriptor
    trials: int
    seed: int
    gamma_db: np.ndarray
    oversample: int = 1

    def __post_init__(self):
        gamma = np.asarray(self.gamma_db, dtype=float)
        object.__setattr__(self, "gamma_db", gamma)
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        if gamma.size == 0:
            raise ValueError("gamma grid is empty")
        if gamma.ndim != 1 or np.any(np.diff(gamma) <= 0):
            raise ValueError("gamma grid must be strictly increasing")
        if self.oversample < 1 or int(self.oversample) != self.oversample:
            raise ValueError("oversample must be a positive integer")


@dataclass(frozen=True)
class CcdfCurve:
    """Exceedance counts per gamma; probability is exactly counts/trials."""

    gamma_db: np.ndarray
    counts: np.ndarray
    trials: int

    def __post_init__(self):
        gamma = np.asarray(self.gamma_db, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "gamma_db", gamma)
        object.__setattr__(self, "counts", counts)
        if gamma.shape != counts.shape:
            raise ValueError("gamma grid and counts differ in length")
        if np.any(counts < 0) or np.any(counts > self.trials):
            raise ValueError("counts out of range")
        if np.any(np.diff(counts) > 0):
            raise ValueError("exceedance counts must be nonincreasing in gamma")

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.trials

    @property
    def tail_resolution(self) -> float:
        # levels below ~10 raw counts are not considered resolvable
        return 10.0 / self.trials


def default_gamma_grid() -> np.ndarray:
    """4.0 .. 13.0 dB in 0.1 dB steps."""
    return np.round(np.arange(40, 131), 1) / 10.0


def instantiate_scheme(plan: TrialPlan):
    """Deterministically build (pss, perms) for a plan from stream (seed, 0)."""
    cfg, scheme = plan.cfg, plan.scheme
    setup_rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(0,)))
    if scheme.pss_kind == "all-ones":
        pss = all_ones_pss(cfg)
    elif scheme.pss_kind == "random":
        pss = gen_random_pss(cfg, scheme.u, setup_rng, alphabet=scheme.pss_alphabet)
    elif scheme.pss_kind == "cyclic-hadamard":
        pss = gen_hadamard_pss(cfg, scheme.u)
    else:
        pss = scheme.pinned_pss
    if scheme.perm_kind == "identity":
        perms = gen_perm_set(cfg, scheme.u, "identity")
    elif scheme.perm_kind == "random":
        perms = gen_perm_set(cfg, scheme.u, "random", setup_rng)
    else:
        perms = scheme.pinned_perms
    if pss.n_fft != cfg.n_fft or perms.perms.shape[1] != cfg.n_fft:
        raise ValueError("pss/perm length does not match cfg.n_fft")
    return pss, perms


@dataclass(frozen=True)
class _Resolved:
    """Plan plus instantiated generator sets, ready for batch execution."""

    n_fft: int
    group_size: int
    active: int
    num_groups: int
    mean_power: float
    gamma: np.ndarray
    pss_seq: np.ndarray
    perm_inv: np.ndarray
    symbols: np.ndarray
    sap_source: str
    subset_table: np.ndarray | None
    oversample: int
    seed: int
    trials: int


def _resolve(plan: TrialPlan) -> _Resolved:
    cfg = plan.cfg
    pss, perms = instantiate_scheme(plan)
    constellation = Constellation.for_order(cfg.mod_order)
    table = None
    if plan.scheme.sap_source == "bits":
        words = 1 << cfg.index_bits
        table = np.array(
            [subset_unrank(r, cfg.group_size, cfg.active) for r in range(words)], dtype=np.intp
        )
    return _Resolved(
        n_fft=cfg.n_fft,
        group_size=cfg.group_size,
        active=cfg.active,
        num_groups=cfg.num_groups,
        mean_power=cfg.mean_power,
        gamma=plan.gamma_db,
        pss_seq=pss.sequences,
        perm_inv=np.argsort(perms.perms, axis=1),
        symbols=constellation.symbols,
        sap_source=plan.scheme.sap_source,
        subset_table=table,
        oversample=plan.oversample,
        seed=plan.seed,
        trials=plan.trials,
    )


def _batch_counts(res: _Resolved, batch_index: int) -> np.ndarray:
    start = batch_index * BATCH_TRIALS
    size = min(BATCH_TRIALS, res.trials - start)
    rng = np.random.default_rng(np.random.SeedSequence(res.seed, spawn_key=(2, batch_index)))
    n, k, G, N = res.group_size, res.active, res.num_groups, res.n_fft

    pos = np.empty((size, k * G), dtype=np.intp)
    for g in range(G):
        if res.sap_source == "uniform":
            rows = np.sort(rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)[:, :k], axis=1)
        else:
            ranks = rng.integers(0, res.subset_table.shape[0], size=size)
            rows = res.subset_table[ranks]
        pos[:, g * k : (g + 1) * k] = rows * G + g
    sym_idx = rng.integers(0, res.symbols.size, size=(size, k * G))

    block = np.zeros((size, N), dtype=complex)
    np.put_along_axis(block, pos, res.symbols[sym_idx], axis=1)

    best = np.full(size, np.inf)
    for u in range(res.pss_seq.shape[0]):
        rotated = block[:, res.perm_inv[u]] * res.pss_seq[u]
        x = idft(rotated) if res.oversample == 1 else oversampled_idft(rotated, res.oversample)
        papr = 10.0 * np.log10(np.max(np.abs(x) ** 2, axis=1) / res.mean_power)
        np.minimum(best, papr, out=best)
    return np.sum(best[:, None] > res.gamma[None, :], axis=0, dtype=np.int64)


_WORKER_RESOLVED = None


def _worker_init(res):
    global _WORKER_RESOLVED
    _WORKER_RESOLVED = res


def _worker_batch(batch_index):
    return _batch_counts(_WORKER_RESOLVED, batch_index)


def run_ccdf(plan: TrialPlan, workers: int = 1) -> CcdfCurve:
    """Estimate the PAPR CCDF for a plan; workers never change the counts."""
    res = _resolve(plan)
    n_batches = -(-plan.trials // BATCH_TRIALS)
    counts = np.zeros(plan.gamma_db.size, dtype=np.int64)
    if workers <= 1 or n_batches == 1:
        for b in range(n_batches):
            counts += _batch_counts(res, b)
    else:
        # fork keeps workers importable without a __main__ guard in callers
        method = "fork" if "fork" in multiprocessing.get_all_start_methods() else "spawn"
        ctx = multiprocessing.get_context(method)
        with ctx.Pool(workers, initializer=_worker_init, initargs=(res,)) as pool:
            for c in pool.imap_unordered(_worker_batch, range(n_batches)):
                counts += c
    return CcdfCurve(gamma_db=plan.gamma_db, counts=counts, trials=plan.trials)


# ---------------------------------------------------------------------------
# curve readout

def papr_at_ccdf(curve: CcdfCurve, target: float) -> float:
    """Gamma (dB) where the curve crosses ``target``.

    Interpolates linearly in (gamma, log10 ccdf); a zero-count bracket point
    is read as half a count. Targets below ~10 raw counts, above the curve
    start, or beyond the grid end are rejected.
    """
    if target < curve.tail_resolution:
        raise ValueError(f"target {target} below resolution {curve.tail_resolution} of this curve")
    p = curve.probabilities
    gamma = curve.gamma_db
    if target > p[0]:
        raise ValueError(f"target {target} above curve start {p[0]}")
    below = np.nonzero(p <= target)[0]
    if below.size == 0:
        raise ValueError(f"curve stays above target {target} on this gamma grid")
    j = int(below[0])
    if p[j] == target:
        return float(gamma[j])
    p_hi = p[j - 1]
    p_lo = max(p[j], 0.5 / curve.trials)
    frac = (math.log10(p_hi) - math.log10(target)) / (math.log10(p_hi) - math.log10(p_lo))
    return float(gamma[j - 1] + frac * (gamma[j] - gamma[j - 1]))


@dataclass(frozen=True)
class CurveComparison:
    """Pointwise deltas plus dB gaps at selected CCDF levels (a minus b)."""

    gamma_db: np.ndarray
    delta: np.ndarray
    max_abs_delta: float
    dominance: str
    gaps_db: dict = field(default_factory=dict)


def compare_curves(a: CcdfCurve, b: CcdfCurve, levels=(), min_count: int = 100) -> CurveComparison:
    """Compare two curves on the same gamma grid.

    ``dominance`` is judged only where both arms have at least ``min_count``
    raw exceedances; ``gaps_db[level]`` is (gap, (lo, hi)) where the interval
    comes from shifting each level by two binomial standard deviations.
    """
    if a.gamma_db.shape != b.gamma_db.shape or np.any(a.gamma_db != b.gamma_db):
        raise ValueError("gamma grids differ")
    delta = a.probabilities - b.probabilities
    mask = (a.counts >= min_count) & (b.counts >= min_count)
    if not np.any(mask):
        dominance = "unresolved"
    elif np.all(delta[mask] <= 0) and np.all(delta[mask] >= 0):
        dominance = "equal"
    elif np.all(delta[mask] <= 0):
        dominance = "a<=b"
    elif np.all(delta[mask] >= 0):
        dominance = "b<=a"
    else:
        dominance = "crossing"
    gaps = {}
    for level in levels:
        g_a, g_b = papr_at_ccdf(a, level), papr_at_ccdf(b, level)
        lo, hi = _gap_interval(a, b, level)
        gaps[level] = (g_a - g_b, (lo, hi))
    return CurveComparison(
        gamma_db=a.gamma_db,
        delta=delta,
        max_abs_delta=float(np.max(np.abs(delta))),
        dominance=dominance,
        gaps_db=gaps,
    )


def _shifted_targets(curve: CcdfCurve, level: float):
    sigma = math.sqrt(level * (1.0 - level) / curve.trials)
    hi_t = min(level + 2 * sigma, float(curve.probabilities[0]))
    lo_t = max(level - 2 * sigma, curve.tail_resolution)
    # papr_at_ccdf is decreasing in the target
    return papr_at_ccdf(curve, hi_t), papr_at_ccdf(curve, lo_t)


def _gap_interval(a: CcdfCurve, b: CcdfCurve, level: float):
    a_lo, a_hi = _shifted_targets(a, level)
    b_lo, b_hi = _shifted_targets(b, level)
    return a_lo - b_hi, a_hi - b_lo


# ---------------------------------------------------------------------------
# serialization (shared by the CLI and by byte-identity tests)

def format_sig9(value) -> str:
    """Fixed 9-significant-digit formatting used for all numeric file output."""
    return format(float(value), ".9g")


def curve_csv_text(curve: CcdfCurve) -> str:
    lines = ["gamma_db,ccdf,count,trials"]
    for g, c in zip(curve.gamma_db, curve.counts):
        lines.append(f"{format_sig9(g)},{format_sig9(c / curve.trials)},{int(c)},{curve.trials}")
    return "\n".join(lines) + "\n"


def _fingerprint(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def plan_json_doc(plan: TrialPlan, pss: PhaseSequenceSet, perms: PermutationSet) -> dict:
    cfg = plan.cfg
    return {
        "config": {
            "n_fft": cfg.n_fft,
            "group_size": cfg.group_size,
            "active": cfg.active,
            "mod_order": cfg.mod_order,
        },
        "scheme": {
            "mode": plan.scheme.mode,
            "u": plan.scheme.u,
            "pss_kind": plan.scheme.pss_kind,
            "perm_kind": plan.scheme.perm_kind,
            "sap_source": plan.scheme.sap_source,
            "pss_alphabet": plan.scheme.pss_alphabet,
        },
        "trials": plan.trials,
        "seed": plan.seed,
        "oversample": plan.oversample,
        "gamma_db": [format_sig9(g) for g in plan.gamma_db],
        "batch_trials": BATCH_TRIALS,
        "tail_resolution_ccdf": 10.0 / plan.trials,
        "pss_sha256": _fingerprint(pss_to_json(pss)),
        "perm_sha256": _fingerprint(perm_set_to_json(perms)),
    }
