"""Empirical language of the coded stadium billiard.

Phase points are sampled on a jittered grid over (arc length, theta), with
the grid cells visited in a seeded random order. Their orbits are coded
and every factor of every code window is recorded. The result is a
factorial set of words per length n, a lower estimate of the true language,
from which complexity, special words and entropy growth are read off. Two
exactly enumerated shifts (the full shift and the golden-mean shift) go
through the same analytics as a reference.
"""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from stadium_entropy.coding import ALPHABET, CodeLetter, code_orbit, code_point
from stadium_entropy.combinatorics import FINAL_BOUND
from stadium_entropy.dynamics import billiard_map_inverse
from stadium_entropy.errors import DomainError, StadiumError
from stadium_entropy.table import HALF_PI, SINGULAR_TOL, PhasePoint, StadiumTable
from stadium_entropy.utils import (
    chunk_bounds,
    chunk_rng,
    merge_first_seen,
    parallel_map,
    visit_order,
)

logger = logging.getLogger(__name__)

Word = Tuple[str, ...]

BILLIARD_ALPHABET: Tuple[str, ...] = tuple(letter.value for letter in ALPHABET)

# A level is saturated when the last 10% of samples brought no new word
SATURATION_FRACTION = 0.9

# Keeps sampled directions away from tangency
THETA_MARGIN = 1e-6

MEASURES = ("uniform", "liouville")


@dataclass
class LanguageSample:
    """Observed words per length with the sample index that first produced each."""

    alphabet: Tuple[str, ...]
    n_max: int
    samples: int
    levels: Dict[int, Dict[Word, int]] = field(default_factory=dict)
    sampler: str = "billiard"
    l: Optional[float] = None
    seed: Optional[int] = None
    window: Optional[int] = None
    measure: str = "uniform"
    skipped_singular: int = 0
    skipped_ambiguous: int = 0
    retained: List[Tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        for n in range(1, self.n_max + 1):
            self.levels.setdefault(n, {})

    def insert(self, word: Sequence[str], index: int) -> None:
        """Record every factor of `word` up to length n_max."""
        word = tuple(word)
        for n in range(1, min(self.n_max, len(word)) + 1):
            merge_first_seen(
                self.levels[n],
                ((word[i : i + n], index) for i in range(len(word) - n + 1)),
            )

    def merge(self, other: "LanguageSample") -> None:
        if other.n_max != self.n_max:
            raise DomainError("Cannot merge samples with different n_max")
        for n, words in other.levels.items():
            merge_first_seen(self.levels[n], words.items())
        self.skipped_singular += other.skipped_singular
        self.skipped_ambiguous += other.skipped_ambiguous
        self.retained.extend(other.retained)

    def words(self, n: int) -> Set[Word]:
        _check_level(self, n)
        return set(self.levels[n])

    def saturated(self, n: int) -> bool:
        """Whether no n-word was first seen in the last 10% of the samples."""
        _check_level(self, n)
        seen = self.levels[n]
        if not seen:
            return False
        return max(seen.values()) < SATURATION_FRACTION * self.samples

    def is_factorial(self) -> bool:
        """Whether both maximal proper factors of every word are present."""
        for n in range(2, self.n_max + 1):
            shorter = self.levels[n - 1]
            for word in self.levels[n]:
                if word[1:] not in shorter or word[:-1] not in shorter:
                    return False
        return True

    def extendability(self, n: int) -> Tuple[int, int]:
        """Numbers of n-words with no observed left / right extension."""
        _check_level(self, n + 1)
        longer = self.levels[n + 1]
        with_left = {word[1:] for word in longer}
        with_right = {word[:-1] for word in longer}
        words = self.levels[n]
        return (
            sum(1 for w in words if w not in with_left),
            sum(1 for w in words if w not in with_right),
        )


def _check_level(ls: LanguageSample, n: int) -> None:
    if not 1 <= n <= ls.n_max:
        raise DomainError(f"Level {n} outside [1, {ls.n_max}]")


def format_symbols(word: Iterable[str]) -> str:
    return "".join(word)


# Sampling


def _grid_shape(samples: int) -> Tuple[int, int]:
    n_theta = max(1, int(math.sqrt(samples)))
    return math.ceil(samples / n_theta), n_theta


def _sample_theta(v: float, measure: str) -> float:
    u = 2.0 * v - 1.0
    if measure == "liouville":
        # Density proportional to cos(theta)
        return math.asin(u * math.sin(HALF_PI - THETA_MARGIN))
    return u * (HALF_PI - THETA_MARGIN)


def _sample_chunk(
    table: StadiumTable,
    n_max: int,
    samples: int,
    seed: int,
    window: int,
    measure: str,
    retain: int,
    tol: float,
    job: Tuple[Tuple[int, int, int], np.ndarray],
) -> LanguageSample:
    (index, start, stop), cells = job
    rng = chunk_rng(seed, index)
    jitter = rng.random((stop - start, 2))
    n_s, n_theta = _grid_shape(samples)
    part = LanguageSample(BILLIARD_ALPHABET, n_max, samples)
    for offset, (ju, jv) in enumerate(jitter):
        k = start + offset
        cell_s, cell_theta = divmod(int(cells[offset]), n_theta)
        s = (cell_s + ju) / n_s * table.perimeter
        theta = _sample_theta((cell_theta + jv) / n_theta, measure)
        point = table.from_arc_length(s)
        _, offset_to_corner = table.nearest_junction(point)
        if abs(offset_to_corner) < tol:
            part.skipped_singular += 1
            continue
        pp = PhasePoint(point, theta)
        try:
            coded = code_orbit(table, pp, window, tol)
        except StadiumError:
            part.skipped_singular += 1
            continue
        if not coded.valid:
            part.skipped_ambiguous += 1
            continue
        part.insert(coded.word.key, k)
        if retain and k % max(1, samples // retain) == 0:
            part.retained.append((s, theta))
    return part


def sample_language(
    table: StadiumTable,
    n_max: int,
    samples: int,
    seed: int,
    window: Optional[int] = None,
    measure: str = "uniform",
    threads: int = 1,
    retain: int = 2000,
    chunk_size: int = 4096,
    tol: float = SINGULAR_TOL,
) -> LanguageSample:
    """Sample the language of the coded billiard up to words of length n_max.

    Args:
        window: Length of the coded orbit window, at least n_max (default n_max).
        measure: "uniform" in theta, or "liouville" (cos(theta) weighted).
        retain: Approximate number of phase points, spread evenly over the
            sample indices, kept for the separation report.
    """
    if n_max < 2:
        raise DomainError(f"n_max must be at least 2, got {n_max}")
    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    window = n_max if window is None else window
    if window < n_max:
        raise DomainError(f"window {window} is shorter than n_max {n_max}")
    if measure not in MEASURES:
        raise DomainError(f"Unknown sampling measure '{measure}'")

    worker = partial(
        _sample_chunk, table, n_max, samples, seed, window, measure, retain, tol
    )
    chunks = chunk_bounds(samples, chunk_size)
    # Sample k fills grid cell order[k]
    order = visit_order(seed, samples)
    jobs = [(chunk, order[chunk[1] : chunk[2]]) for chunk in chunks]
    logger.debug("Sampling %d points at l=%s in %d chunks", samples, table.l, len(chunks))
    ls = LanguageSample(
        BILLIARD_ALPHABET,
        n_max,
        samples,
        l=table.l,
        seed=seed,
        window=window,
        measure=measure,
    )
    for part in parallel_map(worker, jobs, threads):
        ls.merge(part)

    logger.info(
        "Sampled l=%s: %d points, %d singular, %d ambiguous, p(1..%d)=%s",
        table.l,
        samples,
        ls.skipped_singular,
        ls.skipped_ambiguous,
        n_max,
        [len(ls.levels[n]) for n in range(1, n_max + 1)],
    )
    for n in range(1, n_max + 1):
        if not ls.saturated(n):
            logger.warning("Level n=%d is not saturated", n)
    return ls


# Synthetic shifts


def _exact_language(
    alphabet: Tuple[str, ...], n_max: int, sampler: str, allowed
) -> LanguageSample:
    if n_max < 2:
        raise DomainError(f"n_max must be at least 2, got {n_max}")
    ls = LanguageSample(alphabet, n_max, samples=1, sampler=sampler)
    for n in range(1, n_max + 1):
        ls.levels[n] = {
            word: 0 for word in itertools.product(alphabet, repeat=n) if allowed(word)
        }
    return ls


def full_shift_language(
    n_max: int, alphabet: Tuple[str, ...] = ("0", "1")
) -> LanguageSample:
    return _exact_language(alphabet, n_max, "full-shift", lambda word: True)


def golden_mean_language(n_max: int) -> LanguageSample:
    """Binary words without two consecutive 1s."""
    return _exact_language(
        ("0", "1"),
        n_max,
        "golden-mean",
        lambda word: "11" not in format_symbols(word),
    )


# Analytics


def complexity(ls: LanguageSample, n: int) -> int:
    _check_level(ls, n)
    return len(ls.levels[n])


def first_difference(ls: LanguageSample, n: int) -> int:
    """s(n) = p(n+1) - p(n)."""
    return complexity(ls, n + 1) - complexity(ls, n)


@dataclass(frozen=True)
class SpecialCounts:
    m_left: int
    m_right: int
    m_bi: int

    @property
    def left_special(self) -> bool:
        return self.m_left > 1

    @property
    def right_special(self) -> bool:
        return self.m_right > 1

    @property
    def bispecial(self) -> bool:
        return self.left_special and self.right_special

    @property
    def cassaigne_term(self) -> int:
        return self.m_bi - self.m_left - self.m_right + 1


def _warn_unsaturated(ls: LanguageSample, levels: Iterable[int]) -> None:
    for n in levels:
        if not ls.saturated(n):
            logger.warning("Level n=%d is unsaturated; extension counts are lower bounds", n)


def _extension_table(ls: LanguageSample, n: int) -> Dict[Word, SpecialCounts]:
    """Special counts for every observed n-word; needs levels n+1 and n+2."""
    longer, longest = ls.levels[n + 1], ls.levels[n + 2]
    left = Counter(word[1:] for word in longer)
    right = Counter(word[:-1] for word in longer)
    bi = Counter(word[1:-1] for word in longest)
    return {
        word: SpecialCounts(left[word], right[word], bi[word]) for word in ls.levels[n]
    }


def special_counts(ls: LanguageSample, word: Sequence[str]) -> SpecialCounts:
    word = tuple(word)
    n = len(word)
    if n + 2 > ls.n_max:
        raise DomainError(f"Special counts of {n}-words need level {n + 2}")
    if word not in ls.levels[n]:
        raise DomainError(f"Word {format_symbols(word)} was not observed")
    _warn_unsaturated(ls, (n + 1, n + 2))
    return SpecialCounts(
        sum(1 for a in ls.alphabet if (a,) + word in ls.levels[n + 1]),
        sum(1 for b in ls.alphabet if word + (b,) in ls.levels[n + 1]),
        sum(
            1
            for a in ls.alphabet
            for b in ls.alphabet
            if (a,) + word + (b,) in ls.levels[n + 2]
        ),
    )


def bispecial_words(ls: LanguageSample, n: int) -> Set[Word]:
    if n + 1 > ls.n_max:
        raise DomainError(f"Bispecial {n}-words need level {n + 1}")
    _check_level(ls, n)
    _warn_unsaturated(ls, (n + 1,))
    longer = ls.levels[n + 1]
    left = Counter(word[1:] for word in longer)
    right = Counter(word[:-1] for word in longer)
    return {word for word in ls.levels[n] if left[word] > 1 and right[word] > 1}


def cassaigne_residual(ls: LanguageSample, k: int) -> int:
    """s(k+1) - s(k) - sum over bispecial k-words v of (m_b - m_l - m_r + 1)."""
    if not 1 <= k <= ls.n_max - 2:
        raise DomainError(f"Residual at k={k} needs levels k..k+2 <= {ls.n_max}")
    _warn_unsaturated(ls, (k, k + 1, k + 2))
    table = _extension_table(ls, k)
    bispecial_sum = sum(
        counts.cassaigne_term for counts in table.values() if counts.bispecial
    )
    return first_difference(ls, k + 1) - first_difference(ls, k) - bispecial_sum


@dataclass
class EntropyEstimate:
    slope: float
    intercept: float
    window: Tuple[int, int]
    log_complexity: List[float]
    ratios: List[float]
    analytic_bound: float
    reference_lower: float

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "window": list(self.window),
            "log_complexity": self.log_complexity,
            "ratios": self.ratios,
            "analytic_bound": self.analytic_bound,
            "reference_lower": self.reference_lower,
        }


def entropy_estimate(
    ls: LanguageSample, window: Optional[Tuple[int, int]] = None
) -> EntropyEstimate:
    """Least-squares slope of log p(n) against n over `window` (inclusive).

    The default window is the upper half of the sampled levels.
    """
    if ls.n_max < 6:
        raise DomainError(f"Entropy estimate needs n_max >= 6, got {ls.n_max}")
    lo, hi = window if window is not None else ((ls.n_max + 1) // 2, ls.n_max)
    if not 1 <= lo < hi <= ls.n_max:
        raise DomainError(f"Invalid fitting window ({lo}, {hi})")
    counts = [complexity(ls, n) for n in range(1, ls.n_max + 1)]
    logs = [math.log(c) if c else float("-inf") for c in counts]
    ns = np.arange(lo, hi + 1)
    slope, intercept = np.polyfit(ns, np.array(logs[lo - 1 : hi]), 1)
    return EntropyEstimate(
        slope=float(slope),
        intercept=float(intercept),
        window=(lo, hi),
        log_complexity=logs,
        ratios=[b / a if a else float("nan") for a, b in zip(counts, counts[1:])],
        analytic_bound=math.log(FINAL_BOUND),
        reference_lower=math.log(1.0 + math.sqrt(2.0)),
    )


def language_rows(ls: LanguageSample) -> List[dict]:
    """Per-level statistics in the column order of the complexity CSV."""
    rows = []
    for n in range(1, ls.n_max + 1):
        has_next = n < ls.n_max
        has_two = n <= ls.n_max - 2
        left_missing, right_missing = ls.extendability(n) if has_next else ("", "")
        rows.append(
            {
                "n": n,
                "p_hat": complexity(ls, n),
                "s_hat": first_difference(ls, n) if has_next else "",
                "num_bispecial": len(bispecial_words(ls, n)) if has_next else "",
                "cassaigne_residual": cassaigne_residual(ls, n) if has_two else "",
                "saturated": int(ls.saturated(n)),
                "left_unextendable": left_missing,
                "right_unextendable": right_missing,
            }
        )
    return rows


def language_words(ls: LanguageSample, n_limit: int = 6) -> Dict[str, List[str]]:
    """Sorted observed words for every n <= n_limit, for JSON export."""
    return {
        str(n): sorted(format_symbols(word) for word in ls.levels[n])
        for n in range(1, min(n_limit, ls.n_max) + 1)
    }


# Separation of cells


@dataclass(frozen=True)
class SeparationRow:
    n: int
    groups: int
    multi_point_groups: int
    median_diameter: float
    max_diameter: float


def _centered_letters(
    table: StadiumTable, pp: PhasePoint, back: int, forward: int, tol: float
) -> Optional[List[CodeLetter]]:
    """Letters of F^-back(pp) .. F^(forward-1)(pp), or None if the window is not clean."""
    try:
        coded = code_orbit(table, pp, forward, tol)
        if not coded.valid:
            return None
        past = []
        current = pp
        for _ in range(back):
            current = billiard_map_inverse(table, current, tol)
            admissible = code_point(current, tol)
            if len(admissible) > 1:
                return None
            past.append(next(iter(admissible)))
    except StadiumError:
        return None
    return list(reversed(past)) + list(coded.word.letters)


def code_separation_report(
    table: StadiumTable,
    ls: LanguageSample,
    n_values: Optional[Sequence[int]] = None,
    tol: float = SINGULAR_TOL,
) -> List[SeparationRow]:
    """Diameters of the groups of retained phase points sharing a centred n-word.

    Words made of flat letters only are skipped: they belong to the column of
    vertical bouncing orbits, which codes cannot separate.
    """
    n_values = list(n_values or range(2, min(ls.n_max, 10) + 1))
    if not n_values:
        return []
    n_top = max(n_values)
    back_top = (n_top - 1) // 2
    forward_top = n_top - back_top

    windows = []
    for s, theta in ls.retained:
        pp = PhasePoint(table.from_arc_length(s), theta)
        # Pad the forward part so every smaller centred window fits too
        letters = _centered_letters(table, pp, back_top, forward_top + 1, tol)
        if letters is not None:
            windows.append((s, theta, letters))

    rows = []
    for n in n_values:
        back = (n - 1) // 2
        groups: Dict[Tuple[str, ...], List[Tuple[float, float]]] = {}
        for s, theta, letters in windows:
            centre = back_top
            word = letters[centre - back : centre - back + n]
            if all(not letter.is_arc for letter in word):
                continue
            groups.setdefault(tuple(x.value for x in word), []).append((s, theta))
        diameters = [
            float(pdist(np.array(points)).max()) for points in groups.values() if len(points) > 1
        ]
        rows.append(
            SeparationRow(
                n=n,
                groups=len(groups),
                multi_point_groups=len(diameters),
                median_diameter=float(np.median(diameters)) if diameters else 0.0,
                max_diameter=max(diameters) if diameters else 0.0,
            )
        )
    return rows
