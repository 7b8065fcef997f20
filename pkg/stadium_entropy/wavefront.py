"""Wave-front curvature along billiard orbits and the defocusing check.

Sign conventions follow Chernov & Markarian, "Chaotic Billiards": the
curvature G of the projection of a wave front is positive for a diverging
front and negative for a converging one. A free flight of length tau maps
G to G / (1 + tau G); a collision with a boundary of curvature K at angle
theta maps G- to G+ = G- + 2 K / cos(theta). The stadium's semicircles are
focusing (K = -1, unit radius) and its flats have K = 0, so fronts keep
their curvature at flat collisions.

A point source is stored as G = +inf. After a flight of length tau it has
curvature 1 / tau.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Tuple

from stadium_entropy.dynamics import Vector, trace
from stadium_entropy.errors import DomainError, GrazingError
from stadium_entropy.table import SINGULAR_TOL, Corner, PhasePoint, StadiumTable
from stadium_entropy.utils import chunk_rng, parallel_map

logger = logging.getLogger(__name__)

# Relative tolerance for the expansion inequality |1 + tau G+| >= 1
EXPANSION_TOL = 1e-9


@dataclass(frozen=True)
class WaveFrontState:
    """Curvature of a front attached to a collision (pre- or post-reflection)."""

    curvature: float
    collision: int = 0
    post: bool = False
    focused_at_collision: bool = False

    @property
    def is_flat(self) -> bool:
        return self.curvature == 0.0

    @property
    def is_point_source(self) -> bool:
        return math.isinf(self.curvature)

    def focusing_time(self) -> float:
        """Time after this state at which the front passes its focus, -1/G.

        Negative for diverging fronts (the focus lies in the past).
        """
        if self.is_point_source:
            return 0.0
        if self.is_flat:
            return math.inf
        return -1.0 / self.curvature


def point_source(collision: int = 0) -> WaveFrontState:
    return WaveFrontState(math.inf, collision, post=True)


def curvature_reflect(
    state: WaveFrontState, collision: PhasePoint, tol: float = SINGULAR_TOL
) -> WaveFrontState:
    """Post-collision curvature G+ at a collision with the given phase point."""
    if not collision.side.is_arc:
        return WaveFrontState(state.curvature, state.collision, post=True)
    cos_theta = math.cos(collision.theta)
    if cos_theta < tol:
        raise GrazingError(f"Wave front grazes the arc at theta={collision.theta}")
    if state.is_point_source:
        return WaveFrontState(math.inf, state.collision, post=True)
    return WaveFrontState(
        state.curvature - 2.0 / cos_theta, state.collision, post=True
    )


def curvature_flight(state: WaveFrontState, tau: float) -> WaveFrontState:
    """Curvature on arrival after a free flight of length tau."""
    if tau <= 0.0:
        raise DomainError(f"Flight time must be positive, got {tau}")
    nxt = state.collision + 1
    if state.is_point_source:
        return WaveFrontState(1.0 / tau, nxt)
    g = state.curvature
    denominator = 1.0 + tau * g
    if abs(denominator) <= 1e-15 * max(1.0, abs(tau * g)):
        return WaveFrontState(math.inf, nxt, focused_at_collision=True)
    return WaveFrontState(g / denominator, nxt)


@dataclass(frozen=True)
class FrontRecord:
    """Curvatures at one collision of a propagated front."""

    collision: PhasePoint
    tau: float
    pre: WaveFrontState
    post: WaveFrontState


def propagate(
    table: StadiumTable,
    position: Vector,
    direction: Vector,
    n: int,
    initial: Optional[WaveFrontState] = None,
    tol: float = SINGULAR_TOL,
) -> List[FrontRecord]:
    """Follow a front emitted along a ray through up to n collisions.

    By default the front is a point source at `position`.
    """
    state = initial if initial is not None else point_source()
    orbit = trace(table, position, direction, n, tol)
    records = []
    for transit in orbit.transits:
        pre = curvature_flight(state, transit.segment.tau)
        post = curvature_reflect(pre, transit.image, tol)
        records.append(FrontRecord(transit.image, transit.segment.tau, pre, post))
        state = post
    return records


@dataclass(frozen=True)
class ArcPair:
    """Two successive semicircle collisions of a front, flats allowed between."""

    curvature: float
    tau: float
    same_arc: bool

    @property
    def expansion(self) -> float:
        return abs(1.0 + self.tau * self.curvature)

    def classify(self, rel_tol: float = EXPANSION_TOL) -> str:
        scale = max(1.0, abs(self.tau * self.curvature))
        value = self.expansion
        if value > 1.0 + rel_tol * scale:
            return "strict"
        if value >= 1.0 - rel_tol * scale:
            return "equality"
        return "violation"


def arc_pairs(records: List[FrontRecord]) -> List[ArcPair]:
    """Group a propagated front into successive semicircle collision pairs."""
    pairs = []
    last_arc: Optional[FrontRecord] = None
    tau = 0.0
    for record in records:
        if last_arc is not None:
            tau += record.tau
        if record.collision.side.is_arc:
            if last_arc is not None and not last_arc.post.is_point_source:
                pairs.append(
                    ArcPair(
                        last_arc.post.curvature,
                        tau,
                        last_arc.collision.side == record.collision.side,
                    )
                )
            last_arc, tau = record, 0.0
    return pairs


@dataclass
class DefocusingReport:
    l: float
    seed: int
    segments: int = 0
    strict: int = 0
    equality: int = 0
    violations: List[ArcPair] = field(default_factory=list)

    @property
    def strict_fraction(self) -> float:
        return self.strict / self.segments if self.segments else 0.0

    @property
    def equality_fraction(self) -> float:
        return self.equality / self.segments if self.segments else 0.0

    def add(self, pair: ArcPair) -> None:
        self.segments += 1
        kind = pair.classify()
        if kind == "strict":
            self.strict += 1
        elif kind == "equality":
            self.equality += 1
        else:
            self.violations.append(pair)

    def as_dict(self) -> dict:
        return {
            "l": self.l,
            "seed": self.seed,
            "segments": self.segments,
            "strict_fraction": self.strict_fraction,
            "equality_fraction": self.equality_fraction,
            "violations": len(self.violations),
        }


def _random_source(
    table: StadiumTable, rng
) -> Tuple[Vector, Vector]:
    """A corner and a random direction entering the table from it."""
    corners = list(Corner)
    corner = corners[int(rng.integers(len(corners)))]
    position = table.corner_position(corner)
    if corner.is_center:
        angle = rng.uniform(0.0, 2.0 * math.pi)
    else:
        # Junctions on T (b, r) emit downwards, those on B (p, g) upwards
        margin = 1e-6
        angle = rng.uniform(margin, math.pi - margin)
        if position[1] > 0.0:
            angle += math.pi
    return position, (math.cos(angle), math.sin(angle))


def _defocusing_chunk(
    table: StadiumTable, seed: int, depth: int, chunk: Tuple[int, int, int]
) -> List[ArcPair]:
    index, start, stop = chunk
    rng = chunk_rng(seed, index)
    pairs: List[ArcPair] = []
    for _ in range(start, stop):
        position, direction = _random_source(table, rng)
        pairs.extend(arc_pairs(propagate(table, position, direction, depth)))
    return pairs


def defocusing_report(
    table: StadiumTable,
    samples: int,
    seed: int,
    depth: int = 12,
    threads: int = 1,
    chunk_size: int = 256,
) -> DefocusingReport:
    """Check |1 + tau G+| >= 1 on fronts emitted as point sources at corners.

    Sources are launched until `samples` semicircle pairs have been evaluated.
    Orbits are cut at the first singular or tangential collision.
    """
    if samples < 1:
        raise DomainError(f"Sample count must be at least 1, got {samples}")
    report = DefocusingReport(table.l, seed)
    worker = partial(_defocusing_chunk, table, seed, depth)
    next_chunk = 0
    while report.segments < samples:
        # Pairs are consumed in chunk order, so the result is independent of threads
        chunks = [
            (next_chunk + index, 0, chunk_size) for index in range(max(1, threads))
        ]
        next_chunk += len(chunks)
        for pairs in parallel_map(worker, chunks, threads):
            for pair in pairs[: samples - report.segments]:
                report.add(pair)
    if report.violations:
        logger.warning(
            "%d of %d semicircle pairs violate the expansion inequality",
            len(report.violations),
            report.segments,
        )
    logger.info(
        "Defocusing check at l=%s: %d pairs, %.4f strict, %.4f equality",
        table.l,
        report.segments,
        report.strict_fraction,
        report.equality_fraction,
    )
    return report
