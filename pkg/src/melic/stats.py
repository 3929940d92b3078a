"""Statistical plumbing: Silverman KDE, Jensen-Shannon divergence, Pearson
correlation, Benjamini-Hochberg, the joint-entropy null model, region-balanced
subsampling, rhythm-deviation profiles, and n-gram melodic similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .corpus import Corpus
from .infotheory import distribution_of, entropy
from .viewpoints import (
    ViewpointKind,
    ViewpointSequence,
    estimate_tonic,
    extract_viewpoint,
)


class StatsError(Exception):
    pass


# --- kernel density estimation ---------------------------------------------

@dataclass(frozen=True)
class KDEResult:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float


def silverman_bandwidth(samples: np.ndarray) -> float:
    """h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5)."""
    n = samples.size
    sigma = samples.std(ddof=1)
    q75, q25 = np.percentile(samples, [75, 25])
    iqr = q75 - q25
    spread = min(sigma, iqr / 1.34) if iqr > 0 else sigma
    return 0.9 * spread * n ** (-0.2)


def kde_silverman(samples, grid: np.ndarray | None = None, clamp: bool = False) -> KDEResult:
    """Gaussian KDE with Silverman bandwidth, renormalized on the grid.

    With clamp=True, samples outside the grid are moved to the nearest grid
    boundary rather than losing their mass.
    """
    samples = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if samples.size < 2:
        raise StatsError("KDE needs at least 2 samples")
    h = silverman_bandwidth(samples)
    if h <= 0:
        raise StatsError("zero-spread samples: the density is a delta, not a KDE")
    if grid is None:
        lo = samples.min() - 4 * h
        hi = samples.max() + 4 * h
        grid = np.linspace(lo, hi, 512)
    else:
        grid = np.asarray(grid, dtype=float)
    if clamp:
        samples = np.clip(samples, grid[0], grid[-1])
    z = (grid[:, None] - samples[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (samples.size * h * np.sqrt(2 * np.pi))
    step = grid[1] - grid[0]
    total = dens.sum() * step
    if total <= 0:
        raise StatsError("all sample mass falls outside the evaluation grid")
    return KDEResult(grid=grid, density=dens / total, bandwidth=h)


# --- divergences and correlation -------------------------------------------

def _hist_entropy(p: np.ndarray) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits between two histograms on shared bins."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise StatsError(f"binning mismatch: {p.shape} vs {q.shape}")
    if p.sum() <= 0 or q.sum() <= 0:
        raise StatsError("empty histogram")
    p = p / p.sum()
    q = q / q.sum()
    m = 0.5 * (p + q)
    return _hist_entropy(m) - 0.5 * (_hist_entropy(p) + _hist_entropy(q))


def pearson(x, y) -> tuple[float, float]:
    """Product-moment r with a two-sided Student-t p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise StatsError("length mismatch")
    if x.size < 3:
        raise StatsError("need at least 3 points")
    if x.std() == 0 or y.std() == 0:
        raise StatsError("zero variance")
    r = float(np.corrcoef(x, y)[0, 1])
    n = x.size
    if abs(r) >= 1.0:
        return (1.0 if r > 0 else -1.0), 0.0
    t = r * np.sqrt((n - 2) / (1 - r * r))
    p = 2 * float(sps.t.sf(abs(t), n - 2))
    return r, p


def benjamini_hochberg(pvals, q: float) -> list[bool]:
    """Step-up FDR control; flags returned in original index order."""
    pvals = list(pvals)
    if any(not 0 <= p <= 1 for p in pvals):
        raise StatsError("p-values must lie in [0, 1]")
    if not 0 < q < 1:
        raise StatsError("q must lie in (0, 1)")
    m = len(pvals)
    order = sorted(range(m), key=lambda i: pvals[i])
    k_max = 0
    for rank, i in enumerate(order, start=1):
        if pvals[i] <= rank * q / m:
            k_max = rank
    flags = [False] * m
    for rank, i in enumerate(order, start=1):
        if rank <= k_max:
            flags[i] = True
    return flags


# --- corpus-level operations -----------------------------------------------

@dataclass(frozen=True)
class CorpusMeans:
    corpus_id: str
    h_chroma: float
    h_duration: float
    i_chroma_duration: float
    region: str = ""
    type: str = "Folk"


@dataclass(frozen=True)
class JointNullResult:
    null_samples: np.ndarray
    null_variance: float
    empirical_variance: float
    ratio: float
    degenerate: bool = False


def joint_entropy_null(means: list[CorpusMeans], n_samples: int = 10000, rng=None) -> JointNullResult:
    """Null joint-entropy distribution assuming independent pitch entropy,
    rhythm entropy and mutual information pools; H(C,D) = H(C) + H(D) - I."""
    if len(means) < 2:
        raise StatsError("need at least 2 corpora")
    rng = np.random.default_rng() if rng is None else rng
    hc = np.array([m.h_chroma for m in means])
    hd = np.array([m.h_duration for m in means])
    mi = np.array([m.i_chroma_duration for m in means])
    n = len(means)
    null = (
        hc[rng.integers(0, n, n_samples)]
        + hd[rng.integers(0, n, n_samples)]
        - mi[rng.integers(0, n, n_samples)]
    )
    emp = hc + hd - mi
    null_var = float(null.var())
    emp_var = float(emp.var())
    if null_var == 0.0:
        return JointNullResult(null, 0.0, emp_var, 1.0, degenerate=True)
    ratio = null_var / emp_var if emp_var > 0 else float("inf")
    return JointNullResult(null, null_var, emp_var, ratio)


def region_balanced_correlation(
    means: list[CorpusMeans], max_per_region: int, n_resamples: int = 1000, rng=None
) -> tuple[float, tuple[float, float]]:
    """Pearson r between pitch and rhythm entropy under region-capped
    resampling; returns (mean r, 2.5/97.5 percentile CI)."""
    if max_per_region < 1:
        raise StatsError("max_per_region must be >= 1")
    regions: dict[str, list[CorpusMeans]] = {}
    for m in means:
        regions.setdefault(m.region, []).append(m)
    if len(regions) < 2:
        raise StatsError("need at least 2 regions")
    rng = np.random.default_rng() if rng is None else rng
    rs = []
    for _ in range(n_resamples):
        kept: list[CorpusMeans] = []
        for _, group in sorted(regions.items()):
            if len(group) <= max_per_region:
                kept.extend(group)
            else:
                idx = rng.choice(len(group), size=max_per_region, replace=False)
                kept.extend(group[i] for i in idx)
        r, _ = pearson([m.h_chroma for m in kept], [m.h_duration for m in kept])
        rs.append(r)
    rs = np.array(rs)
    lo, hi = np.percentile(rs, [2.5, 97.5])
    return float(rs.mean()), (float(lo), float(hi))


def rhythm_deviation_profile(
    corpus: Corpus, pitch_kind: str = "chroma_transposed", rhythm_kind: str = "ioi"
) -> dict:
    """Mean rhythm-value deviation co-occurring with each pitch symbol,
    relative to the corpus-wide mean rhythm value."""
    if pitch_kind not in ("chroma_transposed", "mint_abs"):
        raise StatsError(f"unknown pitch kind {pitch_kind!r}")
    if rhythm_kind not in ("ioi", "duration"):
        raise StatsError(f"unknown rhythm kind {rhythm_kind!r}")
    pairs: list[tuple] = []
    for melody in corpus.melodies:
        rk = ViewpointKind.IOI if rhythm_kind == "ioi" else ViewpointKind.DURATION
        rhythm = [float(v) for v in extract_viewpoint(melody, rk).symbols]
        if pitch_kind == "chroma_transposed":
            tonic = estimate_tonic(melody, "final")
            chroma = extract_viewpoint(melody, ViewpointKind.CHROMA).symbols
            syms = [(c - tonic) % 12 for c in chroma]
            n = min(len(syms), len(rhythm))
            pairs.extend(zip(syms[:n], rhythm[:n]))
        else:
            mint = extract_viewpoint(melody, ViewpointKind.MINT).symbols
            if rhythm_kind == "duration":
                # the interval co-occurs with the note it lands on
                rhythm = rhythm[1:]
            n = min(len(mint), len(rhythm))
            pairs.extend((abs(m), r) for m, r in zip(mint[:n], rhythm[:n]))
    if not pairs:
        raise StatsError("no pitch-rhythm pairs in corpus")
    overall = float(np.mean([r for _, r in pairs]))
    by_symbol: dict = {}
    for s, r in pairs:
        by_symbol.setdefault(s, []).append(r)
    return {s: float(np.mean(v)) - overall for s, v in sorted(by_symbol.items())}


@dataclass(frozen=True)
class SimilarityReport:
    n_matches: int
    expected_by_chance: float
    enrichment: float | None
    expected_paper: float
    expected_fixed_query: float


def ngram_similarity(query, corpus: Corpus, n: int = 10, kind=ViewpointKind.MINT) -> SimilarityReport:
    """Count corpus melodies containing the query's leading n-gram, against
    the chance expectation A^(-2n) per candidate position.

    expected_fixed_query uses the A^(-n) fixed-query convention alongside the
    two-random-sequences figure, so both numbers are visible.
    """
    if n < 2:
        raise StatsError("n must be >= 2")
    syms = query.symbols if isinstance(query, ViewpointSequence) else tuple(query)
    if len(syms) < n:
        raise StatsError(f"query shorter than n={n}")
    gram = syms[:n]
    a = len(set(syms))
    p_paper = float(a) ** (-2 * n)
    p_fixed = float(a) ** (-n)
    n_matches = 0
    exp_paper = 0.0
    exp_fixed = 0.0
    for melody in corpus.melodies:
        try:
            target = extract_viewpoint(melody, kind).symbols
        except Exception:
            continue
        positions = len(target) - n + 1
        if positions < 1:
            continue
        exp_paper += p_paper * positions
        exp_fixed += p_fixed * positions
        if any(target[i : i + n] == gram for i in range(positions)):
            n_matches += 1
    enrichment = n_matches / exp_paper if exp_paper > 0 else None
    return SimilarityReport(
        n_matches=n_matches,
        expected_by_chance=exp_paper,
        enrichment=enrichment,
        expected_paper=exp_paper,
        expected_fixed_query=exp_fixed,
    )
