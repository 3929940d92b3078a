"""Unigram information measures: entropy, Gini coefficient, mutual information
with a shuffle null, entropy lower bound, power-law contours, and constructed
bounds on first/second-order entropy ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .viewpoints import ViewpointSequence


class InfoError(Exception):
    pass


@dataclass(frozen=True)
class Distribution:
    """Alphabet with probabilities, sorted ascending by symbol."""

    alphabet: tuple
    probs: tuple[float, ...]
    counts: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.alphabet) < 1:
            raise InfoError("distribution needs at least one symbol")
        if any(p < 0 for p in self.probs):
            raise InfoError("negative probability")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise InfoError(f"probabilities sum to {sum(self.probs)}, not 1")

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)


def distribution_of(seq) -> Distribution:
    """Empirical relative frequencies of a symbol sequence."""
    symbols = seq.symbols if isinstance(seq, ViewpointSequence) else tuple(seq)
    if not symbols:
        raise InfoError("cannot build a distribution from an empty sequence")
    counts: dict = {}
    for s in symbols:
        counts[s] = counts.get(s, 0) + 1
    alphabet = tuple(sorted(counts))
    n = len(symbols)
    return Distribution(
        alphabet=alphabet,
        probs=tuple(counts[a] / n for a in alphabet),
        counts=tuple(counts[a] for a in alphabet),
    )


def entropy(d: Distribution) -> float:
    """Plug-in Shannon entropy in bits."""
    return float(-sum(p * math.log2(p) for p in d.probs if p > 0.0)) + 0.0


def entropy_of(seq) -> float:
    return entropy(distribution_of(seq))


def gini(d: Distribution) -> float:
    """Gini coefficient from the Lorenz curve of the ascending-sorted probabilities.

    G = 1 - (2/A) * sum_i theta(p_i) + 1/A, theta the cumulative sum; 0 for a
    uniform distribution, approaching 1 for maximal inequality as A grows.
    """
    p = np.sort(np.asarray(d.probs, dtype=float))
    a = p.size
    theta = np.cumsum(p)
    return float(1.0 - (2.0 / a) * theta.sum() + 1.0 / a)


@dataclass(frozen=True)
class InfoSummary:
    entropy_bits: float
    alphabet_size: int
    gini: float


def summarize(seq) -> InfoSummary:
    d = distribution_of(seq)
    return InfoSummary(entropy_bits=entropy(d), alphabet_size=d.alphabet_size, gini=gini(d))


# --- mutual information with shuffle null ----------------------------------

def _mi(symsP: tuple, symsR: tuple) -> float:
    joint = entropy_of(tuple(zip(symsP, symsR)))
    return entropy_of(symsP) + entropy_of(symsR) - joint


def mutual_information_excess(seqP, seqR, n_shuffles: int = 10, rng: np.random.Generator | None = None):
    """Nonnegative MI between two aligned sequences, the shuffle-null mean, and
    their difference I* = I - I_ran."""
    symsP = seqP.symbols if isinstance(seqP, ViewpointSequence) else tuple(seqP)
    symsR = seqR.symbols if isinstance(seqR, ViewpointSequence) else tuple(seqR)
    if len(symsP) != len(symsR):
        raise InfoError(f"length mismatch: {len(symsP)} vs {len(symsR)}")
    if n_shuffles < 0:
        raise InfoError("n_shuffles must be >= 0")
    i_obs = _mi(symsP, symsR)
    if n_shuffles == 0:
        return i_obs, 0.0, i_obs
    if rng is None:
        raise InfoError("shuffled null requires an explicit rng")
    acc = 0.0
    n = len(symsR)
    for _ in range(n_shuffles):
        perm = rng.permutation(n)
        acc += _mi(symsP, tuple(symsR[i] for i in perm))
    i_ran = acc / n_shuffles
    return i_obs, i_ran, i_obs - i_ran


# --- entropy lower bound ---------------------------------------------------

def entropy_lower_bound(A: int, L: int) -> float:
    """Minimum entropy of a length-L sequence using exactly A symbols: one
    symbol repeated L - A + 1 times, all others heard once."""
    if not 1 <= A <= L:
        raise InfoError(f"need 1 <= A <= L, got A={A}, L={L}")
    counts = [L - A + 1] + [1] * (A - 1)
    return float(-sum((c / L) * math.log2(c / L) for c in counts)) + 0.0


# --- power-law entropy/Gini contour ----------------------------------------

def _powerlaw_dist(A: int, exponent: float) -> Distribution:
    if A < 1:
        raise InfoError("A must be >= 1")
    w = np.arange(1, A + 1, dtype=float) ** (-float(exponent))
    p = w / w.sum()
    return Distribution(alphabet=tuple(range(A)), probs=tuple(p))


def powerlaw_entropy_gini(A: int, exponent: float) -> tuple[float, float]:
    """Entropy and Gini of p_i proportional to i^-exponent, i = 1..A."""
    d = _powerlaw_dist(A, exponent)
    return entropy(d), gini(d)


def max_gini(A: int) -> float:
    """Supremum of the Gini coefficient over distributions on A symbols."""
    return (A - 1) / A


def solve_powerlaw_H(A: int, G: float, tol: float = 1e-8) -> float:
    """Entropy of the power-law distribution on A symbols whose Gini equals G,
    found by bisection on the exponent."""
    if A < 1:
        raise InfoError("A must be >= 1")
    if G < 0 or G >= max_gini(A) or (A == 1 and G > 0):
        raise InfoError(f"G={G} outside achievable range [0, {max_gini(A)}) for A={A}")
    if G == 0 or A == 1:
        return math.log2(A)
    lo, hi = 0.0, 1.0
    while powerlaw_entropy_gini(A, hi)[1] < G:
        hi *= 2.0
        if hi > 1e6:
            raise InfoError(f"G={G} not reachable by a power law on A={A} symbols")
    while True:
        mid = 0.5 * (lo + hi)
        h, g = powerlaw_entropy_gini(A, mid)
        if abs(g - G) <= tol:
            return h
        if g < G:
            lo = mid
        else:
            hi = mid


# --- constructed entropy-ratio bound families ------------------------------

def _measure(pitches: list[int]) -> dict:
    h_pitch = entropy_of(pitches)
    h_mint = entropy_of([b - a for a, b in zip(pitches, pitches[1:])])
    ratio = math.inf if h_mint == 0.0 else h_pitch / h_mint
    return {"length": len(pitches), "H_pitch": h_pitch, "H_mint": h_mint, "ratio": ratio}


def entropy_ratio_bounds(L: int) -> list[dict]:
    """Construct three explicit pitch-sequence families and measure the
    H(Pitch)/H(M-Int) ratio each achieves at length L."""
    if L < 3:
        raise InfoError("L must be >= 3")
    climb = list(range(L))
    chromatic = [i % 2 for i in range(L)]
    wave = [0 if i % 2 == 0 else (i + 1) // 2 for i in range(L)]
    out = []
    for name, seq in (("climb", climb), ("chromatic", chromatic), ("stop_start_wave", wave)):
        rec = {"family": name}
        rec.update(_measure(seq))
        out.append(rec)
    return out
