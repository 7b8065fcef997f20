"""Saddle connections: orbit segments that start and end at corners.

Each corner emits a one-parameter family of orbits. Junction corners shoot
rays in every inward direction; a semicircle centre is represented by the
arc points hit perpendicularly, whose first flight passes through the centre.
The family is traced on a uniform parameter grid. Where the codes of
neighbouring grid points first differ, at collision k, a continuous event
function of collision k changes sign: the signed arc length to a junction
when the collision moves across it, or theta when an arc collision turns
perpendicular. Letters after k follow from the event and are not compared.
Bisection on the event function locates the connection.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from stadium_entropy.coding import (
    CodeLetter,
    CodeWord,
    SignedComposition,
    arc_letter,
    format_word,
    signed_composition_of_orbit,
)
from stadium_entropy.combinatorics import CompositionCounts
from stadium_entropy.dynamics import Orbit, orbit, trace
from stadium_entropy.errors import DomainError, EmptyArcRunError
from stadium_entropy.table import (
    HALF_PI,
    JUNCTION_SIDES,
    SINGULAR_TOL,
    Corner,
    Side,
    StadiumTable,
)
from stadium_entropy.utils import parallel_map

logger = logging.getLogger(__name__)

# Launch parameters this close to a tangential direction are left out
FAMILY_MARGIN = 1e-7

MIN_GRID = 1000
MAX_REFINE_DEPTH = 40

# Interior arc collisions this close to perpendicular pass through a centre
CENTRE_PASS_TOL = 1e-7

SaddleKey = Tuple[str, str, Tuple[str, ...]]


@dataclass(frozen=True)
class SaddleConnection:
    start: Corner
    end: Corner
    letters: Tuple[CodeLetter, ...]
    length: int
    weight: int
    launch_param: float
    residual: float

    @property
    def code(self) -> Tuple[str, ...]:
        return (
            (self.start.value,)
            + tuple(letter.value for letter in self.letters)
            + (self.end.value,)
        )

    @property
    def key(self) -> SaddleKey:
        return self.start.value, self.end.value, self.code

    def code_string(self) -> str:
        return f"{self.start.value}:{format_word(self.letters)}:{self.end.value}"

    def as_row(self) -> dict:
        return {
            "start": self.start.value,
            "end": self.end.value,
            "code": self.code_string(),
            "length": self.length,
            "weight": self.weight,
            "launch_param": self.launch_param,
            "residual": self.residual,
        }


@dataclass
class SearchDiagnostics:
    coarse_intervals: int = 0
    unresolved: int = 0
    shots: int = 0

    def add(self, other: "SearchDiagnostics") -> None:
        self.coarse_intervals += other.coarse_intervals
        self.unresolved += other.unresolved
        self.shots += other.shots


@dataclass(frozen=True)
class LaunchFamily:
    """Orbits leaving a corner, indexed by a direction angle or an arc angle."""

    table: StadiumTable
    corner: Corner
    lo: float
    hi: float

    @property
    def kind(self) -> str:
        return "arc" if self.corner.is_center else "direction"

    def launch(self, param: float, max_len: int, tol: float = SINGULAR_TOL) -> Orbit:
        if self.corner.is_center:
            pp = self.table.phase_point(self.corner.arc, param, 0.0)
            return orbit(self.table, pp, max_len, tol)
        position = self.table.corner_position(self.corner)
        return trace(
            self.table, position, (math.cos(param), math.sin(param)), max_len, tol
        )


def launch_family(table: StadiumTable, corner: Corner) -> LaunchFamily:
    """The shooting family of a corner, with tangential ends cut off."""
    if corner == Corner.cL:
        lo, hi = HALF_PI, 3.0 * HALF_PI
    elif corner == Corner.cR:
        lo, hi = -HALF_PI, HALF_PI
    elif corner in (Corner.p, Corner.g):
        lo, hi = 0.0, math.pi
    else:
        lo, hi = math.pi, 2.0 * math.pi
    return LaunchFamily(table, corner, lo + FAMILY_MARGIN, hi - FAMILY_MARGIN)


@dataclass(frozen=True)
class Shot:
    """Collision data of one family member."""

    param: float
    letters: Tuple[CodeLetter, ...]
    arc_lengths: Tuple[float, ...]
    thetas: Tuple[float, ...]
    status: str

    @property
    def clean(self) -> int:
        """Number of leading letters not affected by a junction hit."""
        if self.status == "singular":
            return len(self.letters) - 1
        return len(self.letters)


def _shoot(family: LaunchFamily, param: float, max_len: int, tol: float) -> Shot:
    result = family.launch(param, max_len, tol)
    letters, arc_lengths, thetas = [], [], []
    for transit in result.transits:
        image = transit.image
        if image.side.is_arc:
            letters.append(arc_letter(image.side, 1 if image.theta >= 0.0 else -1))
        else:
            letters.append(CodeLetter(image.side.value))
        arc_lengths.append(family.table.arc_length(image.point))
        thetas.append(image.theta)
    return Shot(param, tuple(letters), tuple(arc_lengths), tuple(thetas), result.status)


@dataclass(frozen=True)
class _Event:
    index: int
    target: Corner

    def value(self, table: StadiumTable, shot: Shot) -> float:
        if self.target.is_center:
            return shot.thetas[self.index]
        return table.arc_difference(
            shot.arc_lengths[self.index], table.junction_arc_length(self.target)
        )

    def admits(self, shot: Shot) -> bool:
        if len(shot.letters) <= self.index:
            return False
        side = shot.letters[self.index].side
        if self.target.is_center:
            return side == self.target.arc
        return side in JUNCTION_SIDES[self.target]


def _classify(a: Shot, b: Shot, index: int) -> Optional[_Event]:
    first, second = a.letters[index], b.letters[index]
    if first.side == second.side and first.is_arc:
        return _Event(index, Corner.cL if first.side == Side.L else Corner.cR)
    for junction, sides in JUNCTION_SIDES.items():
        if {first.side, second.side} == set(sides):
            return _Event(index, junction)
    return None


def _first_difference(a: Shot, b: Shot) -> Optional[int]:
    """Index of the first letter where two shots differ, among reliable letters."""
    for index in range(min(a.clean, b.clean)):
        if a.letters[index] != b.letters[index]:
            return index
    return None


def _passes_centre(shot: Shot, k: int) -> bool:
    """Whether one of the first k collisions is a perpendicular arc hit."""
    return any(
        shot.letters[i].is_arc and abs(shot.thetas[i]) < CENTRE_PASS_TOL
        for i in range(k)
    )


class _FamilyScan:
    """Event detection and refinement over one launch family."""

    def __init__(self, family: LaunchFamily, max_len: int, tol: float):
        self.family = family
        self.table = family.table
        self.max_len = max_len
        self.tol = tol
        self.found: List[SaddleConnection] = []
        self.diagnostics = SearchDiagnostics()

    def shoot(self, param: float) -> Shot:
        self.diagnostics.shots += 1
        shot = _shoot(self.family, param, self.max_len, self.tol)
        if shot.status == "singular":
            self._record_direct_hit(shot)
        return shot

    def _record_direct_hit(self, shot: Shot) -> None:
        index = len(shot.letters) - 1
        end, _ = self.table.nearest_junction(
            self.table.from_arc_length(shot.arc_lengths[index])
        )
        event = _Event(index, end)
        self._accept(shot, event, abs(event.value(self.table, shot)))

    def _accept(self, shot: Shot, event: _Event, residual: float) -> None:
        start = self.family.corner
        k = event.index
        if _passes_centre(shot, k):
            # The orbit reaches a centre before k and retraces itself from there
            logger.debug(
                "Dropping %s connection through a centre at %r", start.value, shot.param
            )
            return
        self.found.append(
            SaddleConnection(
                start=start,
                end=event.target,
                letters=shot.letters[:k],
                length=k + 1,
                weight=k + int(start.is_center) + int(event.target.is_center),
                launch_param=shot.param,
                residual=residual,
            )
        )

    def scan(self, a: Shot, b: Shot, depth: int = 0) -> None:
        first = _first_difference(a, b)
        if first is None:
            return
        event = _classify(a, b, first)
        if event is not None:
            fa, fb = event.value(self.table, a), event.value(self.table, b)
            # A grid point may sit exactly on the event
            if fa * fb <= 0.0 and (fa or fb):
                self.bisect(a, b, event, fa, fb, depth)
                return
        if depth == 0:
            self.diagnostics.coarse_intervals += 1
        self.subdivide(a, b, depth)

    def subdivide(self, a: Shot, b: Shot, depth: int) -> None:
        mid = 0.5 * (a.param + b.param)
        if depth >= MAX_REFINE_DEPTH or mid in (a.param, b.param):
            self.diagnostics.unresolved += 1
            logger.debug(
                "Unresolved code change from %s between %r and %r",
                self.family.corner.value,
                a.param,
                b.param,
            )
            return
        m = self.shoot(mid)
        self.scan(a, m, depth + 1)
        self.scan(m, b, depth + 1)

    def bisect(
        self, a: Shot, b: Shot, event: _Event, fa: float, fb: float, depth: int
    ) -> None:
        """Close in on the zero of `event` between a and b.

        Pieces cut off on either side can still hold events at later
        collisions, so each is scanned again.
        """
        k = event.index
        prefix = a.letters[:k]
        if fa == 0.0 or fb == 0.0:
            self._accept(a if fa == 0.0 else b, event, 0.0)
            return
        while b.param - a.param > self.tol or min(abs(fa), abs(fb)) >= self.tol:
            mid = 0.5 * (a.param + b.param)
            if mid in (a.param, b.param):
                break
            m = self.shoot(mid)
            if m.letters[:k] != prefix or not event.admits(m):
                self.scan(a, m, depth + 1)
                self.scan(m, b, depth + 1)
                return
            fm = event.value(self.table, m)
            if m.status == "singular" and len(m.letters) == k + 1:
                # Already recorded as a direct corner hit
                self.scan(a, m, depth + 1)
                self.scan(m, b, depth + 1)
                return
            if (fm < 0.0) == (fa < 0.0):
                self.scan(a, m, depth + 1)
                a, fa = m, fm
            else:
                self.scan(m, b, depth + 1)
                b, fb = m, fm
        best = min((a, b), key=lambda shot: abs(event.value(self.table, shot)))
        residual = abs(event.value(self.table, best))
        if residual < self.tol:
            self._accept(best, event, residual)
        else:
            self.diagnostics.unresolved += 1
            logger.debug(
                "Bisection from %s stalled at %r with residual %.3e",
                self.family.corner.value,
                best.param,
                residual,
            )


def _grid(family: LaunchFamily, grid: int) -> np.ndarray:
    # grid + 1 points, so that doubling the grid nests the old points
    return np.linspace(family.lo, family.hi, grid + 1)


def _scan_chunk(
    table: StadiumTable,
    corner: Corner,
    max_len: int,
    grid: int,
    tol: float,
    bounds: Tuple[int, int],
) -> Tuple[List[SaddleConnection], SearchDiagnostics]:
    family = launch_family(table, corner)
    params = _grid(family, grid)
    scanner = _FamilyScan(family, max_len, tol)
    first, last = bounds
    previous = scanner.shoot(float(params[first]))
    for index in range(first + 1, last + 1):
        current = scanner.shoot(float(params[index]))
        scanner.scan(previous, current)
        previous = current
    return scanner.found, scanner.diagnostics


def _chunk_edges(grid: int, pieces: int) -> List[Tuple[int, int]]:
    edges = np.linspace(0, grid, max(1, pieces) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]


def _merge_roots(
    connections: Sequence[SaddleConnection], tol: float
) -> List[SaddleConnection]:
    """Drop repeated detections: same class and launch parameters within 10 tol."""
    ordered = sorted(connections, key=lambda sc: (sc.key, sc.launch_param))
    merged: List[SaddleConnection] = []
    for sc in ordered:
        if (
            merged
            and merged[-1].key == sc.key
            and abs(sc.launch_param - merged[-1].launch_param) <= 10.0 * tol
        ):
            if sc.residual < merged[-1].residual:
                merged[-1] = sc
            continue
        merged.append(sc)
    return merged


def find_saddles(
    table: StadiumTable,
    corner: Corner,
    max_len: int,
    grid: int,
    tol: float = SINGULAR_TOL,
    threads: int = 1,
    diagnostics: Optional[SearchDiagnostics] = None,
) -> List[SaddleConnection]:
    """Saddle connections of at most max_len links starting at `corner`."""
    if grid < MIN_GRID:
        raise DomainError(f"grid must be at least {MIN_GRID}, got {grid}")
    if max_len < 1:
        raise DomainError(f"max_len must be at least 1, got {max_len}")
    worker = partial(_scan_chunk, table, corner, max_len, grid, tol)
    found: List[SaddleConnection] = []
    for connections, chunk_diagnostics in parallel_map(
        worker, _chunk_edges(grid, 4 * threads), threads
    ):
        found.extend(connections)
        if diagnostics is not None:
            diagnostics.add(chunk_diagnostics)
    return _merge_roots(found, tol)


@dataclass
class SaddleCount:
    n: int
    connections: List[SaddleConnection]
    classes: Dict[SaddleKey, List[SaddleConnection]]
    diagnostics: SearchDiagnostics = field(default_factory=SearchDiagnostics)

    def N(self, length: int) -> int:
        """Number of distinct classes with at most `length` links."""
        return sum(
            1 for members in self.classes.values() if members[0].length <= length
        )

    @property
    def counts(self) -> Dict[int, int]:
        return {m: self.N(m) for m in range(1, self.n + 1)}


def count_N(
    table: StadiumTable,
    n: int,
    grid: int,
    tol: float = SINGULAR_TOL,
    threads: int = 1,
) -> SaddleCount:
    """All saddle connections of at most n links from the six corners."""
    diagnostics = SearchDiagnostics()
    connections: List[SaddleConnection] = []
    for corner in Corner:
        found = find_saddles(table, corner, n, grid, tol, threads, diagnostics)
        logger.debug("Corner %s: %d connections", corner.value, len(found))
        connections.extend(found)
    classes: Dict[SaddleKey, List[SaddleConnection]] = {}
    for sc in connections:
        classes.setdefault(sc.key, []).append(sc)
    if diagnostics.coarse_intervals:
        logger.warning(
            "Grid too coarse on %d intervals; refined automatically",
            diagnostics.coarse_intervals,
        )
    if diagnostics.unresolved:
        logger.warning("%d code changes could not be resolved", diagnostics.unresolved)
    count = SaddleCount(n, connections, classes, diagnostics)
    logger.info("l=%s, grid=%d: N(1..%d) = %s", table.l, grid, n, list(count.counts.values()))
    return count


@dataclass
class UniquenessReport:
    unique: bool
    duplicates: Dict[SaddleKey, List[float]]


def verify_uniqueness(
    connections: Sequence[SaddleConnection], tol: float = SINGULAR_TOL
) -> UniquenessReport:
    """Check that each (start, end, code) class is realised by a single orbit."""
    params: Dict[SaddleKey, List[float]] = {}
    for sc in _merge_roots(connections, tol):
        params.setdefault(sc.key, []).append(sc.launch_param)
    duplicates = {key: values for key, values in params.items() if len(values) > 1}
    for key, values in duplicates.items():
        logger.error("Class %s realised at parameters %s", key, values)
    return UniquenessReport(not duplicates, duplicates)


def resimulate(
    table: StadiumTable, sc: SaddleConnection, tol: float = SINGULAR_TOL
) -> Tuple[bool, float]:
    """Re-trace a connection from its launch parameter.

    Returns whether the code is reproduced and the distance of the final event
    from the end corner condition.
    """
    family = launch_family(table, sc.start)
    shot = _shoot(family, sc.launch_param, sc.length, tol)
    event = _Event(sc.length - 1, sc.end)
    if not event.admits(shot):
        return False, math.inf
    return shot.letters[: sc.length - 1] == sc.letters, abs(event.value(table, shot))


def saddle_signed_composition(sc: SaddleConnection) -> SignedComposition:
    """Signed composition of a connection; centre endpoints count as arc collisions."""
    letters = list(sc.letters)
    if sc.start.is_center:
        letters.insert(0, arc_letter(sc.start.arc, 1))
    if sc.end.is_center:
        letters.append(arc_letter(sc.end.arc, 1))
    if not letters:
        raise EmptyArcRunError(f"Connection {sc.code_string()} has no collision")
    return signed_composition_of_orbit(CodeWord(tuple(letters)))


@dataclass(frozen=True)
class AuditRow:
    n: int
    N: int
    max_weight: int
    tight_bound: int
    conservative_bound: int

    @property
    def ok(self) -> bool:
        return self.N <= self.conservative_bound

    @property
    def tight_ok(self) -> bool:
        return self.N <= self.tight_bound


def bound_audit(count: SaddleCount, q: CompositionCounts) -> List[AuditRow]:
    """Compare N(n) with 36 times partial sums of Q.

    A connection with n links has weight between n - 1 and n + 1, so the
    asserted bound sums Q up to n + 1. The sum up to n - 1 is reported beside it
    and does not hold in general: b and p alone are joined by three connections
    of at most two links, against Q(0) + Q(1) = 2 compositions.
    """
    if q.j_max < count.n + 1:
        raise DomainError(f"Composition counts needed up to j={count.n + 1}")
    rows = []
    for n in range(1, count.n + 1):
        weights = [
            members[0].weight
            for members in count.classes.values()
            if members[0].length <= n
        ]
        rows.append(
            AuditRow(
                n=n,
                N=count.N(n),
                max_weight=max(weights, default=0),
                tight_bound=36 * q.partial_sum(n - 1),
                conservative_bound=36 * q.partial_sum(n + 1),
            )
        )
    for row in rows:
        if not row.ok:
            logger.error(
                "N(%d)=%d exceeds 36 * sum Q(j<=%d) = %d",
                row.n,
                row.N,
                row.n + 1,
                row.conservative_bound,
            )
        elif not row.tight_ok:
            logger.warning(
                "N(%d)=%d exceeds 36 * sum Q(j<%d) = %d",
                row.n,
                row.N,
                row.n,
                row.tight_bound,
            )
    return rows


def saddle_growth_estimate(count: SaddleCount) -> List[Tuple[int, float]]:
    """log(N(1) + ... + N(n)) / n for each n."""
    rows = []
    running = 0
    for n in range(1, count.n + 1):
        running += count.N(n)
        rows.append((n, math.log(running) / n if running else 0.0))
    return rows
