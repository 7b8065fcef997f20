"""Symbolic coding of stadium orbits.

Every collision gets one of six letters: the flat it lands on (T or B), or
the semicircle it lands on (L or R) together with the sign of theta. A
perpendicular arc collision (theta = 0) admits both signs and makes the
coding of its orbit ambiguous.
"""
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple, Union

from stadium_entropy.dynamics import Orbit, orbit
from stadium_entropy.errors import (
    DomainError,
    EmptyArcRunError,
    GeometryError,
    SingularOrbitError,
    TangentialCollisionError,
    UnrealizablePairError,
)
from stadium_entropy.table import SINGULAR_TOL, PhasePoint, Side, StadiumTable

logger = logging.getLogger(__name__)


class CodeLetter(str, Enum):
    L_PLUS = "L+"
    L_MINUS = "L-"
    T = "T"
    B = "B"
    R_PLUS = "R+"
    R_MINUS = "R-"

    @property
    def side(self) -> Side:
        return Side(self.value[0])

    @property
    def sign(self) -> int:
        """+1 or -1 for arc letters, 0 for flats."""
        if len(self.value) == 1:
            return 0
        return 1 if self.value[1] == "+" else -1

    @property
    def is_arc(self) -> bool:
        return self.side.is_arc

    def flipped(self) -> "CodeLetter":
        """The letter of the time-reversed collision."""
        if not self.is_arc:
            return self
        return arc_letter(self.side, -self.sign)


def arc_letter(side: Side, sign: int) -> CodeLetter:
    return CodeLetter(f"{side.value}{'+' if sign >= 0 else '-'}")


ALPHABET: Tuple[CodeLetter, ...] = tuple(CodeLetter)

_TOKEN = re.compile(r"\||[LR][+-]|[TB]")


@dataclass(frozen=True)
class CodeWord:
    """A finite code word. `anchor` is the index of the time-0 letter, if any."""

    letters: Tuple[CodeLetter, ...]
    anchor: Optional[int] = None

    def __post_init__(self):
        if not self.letters:
            raise DomainError("A code word needs at least one letter")
        if self.anchor is not None and not 0 <= self.anchor < len(self.letters):
            raise DomainError(f"Anchor {self.anchor} outside the word")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_word(self.letters, self.anchor)

    @property
    def key(self) -> Tuple[str, ...]:
        return tuple(letter.value for letter in self.letters)


def format_word(letters: Iterable[CodeLetter], anchor: Optional[int] = None) -> str:
    """Concatenate letters, marking the time-0 letter with a leading '|'."""
    out = []
    for index, letter in enumerate(letters):
        if index == anchor:
            out.append("|")
        out.append(CodeLetter(letter).value)
    return "".join(out)


def parse_word(text: str) -> CodeWord:
    """Parse words such as 'TBR+TB' or 'L-|TB' (anchor before T)."""
    compact = "".join(text.split())
    tokens = _TOKEN.findall(compact)
    if "".join(tokens) != compact:
        raise DomainError(f"Invalid code word '{text}'")
    letters = []
    anchor = None
    for token in tokens:
        if token == "|":
            if anchor is not None:
                raise DomainError(f"Code word '{text}' has two anchors")
            anchor = len(letters)
        else:
            letters.append(CodeLetter(token))
    if anchor is not None and anchor == len(letters):
        raise DomainError(f"Anchor of '{text}' is not followed by a letter")
    return CodeWord(tuple(letters), anchor)


def code_point(pp: PhasePoint, tol: float = SINGULAR_TOL) -> FrozenSet[CodeLetter]:
    """The admissible letters of a phase point; two of them on perpendicular arc hits."""
    side = pp.side
    if not side.is_arc:
        return frozenset({CodeLetter(side.value)})
    if abs(pp.theta) < tol:
        return frozenset({arc_letter(side, 1), arc_letter(side, -1)})
    return frozenset({arc_letter(side, 1 if pp.theta > 0 else -1)})


def pick_letter(letters: FrozenSet[CodeLetter]) -> CodeLetter:
    """A deterministic representative of an ambiguous letter set."""
    return min(letters, key=ALPHABET.index)


@dataclass
class CodedOrbit:
    word: CodeWord
    valid: bool
    orbit: Orbit
    ambiguous_steps: Tuple[int, ...] = ()


def code_orbit(
    table: StadiumTable, pp: PhasePoint, n: int, tol: float = SINGULAR_TOL
) -> CodedOrbit:
    """Letters of pp, F(pp), ..., F^{n-1}(pp).

    `valid` is False when some collision admits two letters; the word then
    uses the first of them in alphabet order.

    Raises:
        SingularOrbitError: If the orbit reaches a junction.
        TangentialCollisionError: If the orbit becomes tangential.
        GeometryError: If the flight cannot be continued.
    """
    if n < 1:
        raise DomainError(f"Word length must be at least 1, got {n}")
    if n == 1:
        points, result = [pp], None
    else:
        result = orbit(table, pp, n - 1, tol)
        if result.status == "singular":
            raise SingularOrbitError(result.message, len(result.transits))
        if result.status == "tangential":
            raise TangentialCollisionError(result.message)
        if result.status == "lost":
            raise GeometryError(result.message)
        points = result.points

    letters = []
    ambiguous = []
    for index, point in enumerate(points):
        admissible = code_point(point, tol)
        if len(admissible) > 1:
            ambiguous.append(index)
        letters.append(pick_letter(admissible))
    if result is None:
        result = Orbit(start=pp)
    return CodedOrbit(
        CodeWord(tuple(letters), anchor=0),
        valid=not ambiguous,
        orbit=result,
        ambiguous_steps=tuple(ambiguous),
    )


class SixteenLetter(str, Enum):
    """Letters of the regrouped coding: consecutive pairs of six-letter symbols.

    Pairs on the same semicircle keep the common sign of their letters.
    """

    LL_PLUS = "LL+"
    LL_MINUS = "LL-"
    LT = "LT"
    LR = "LR"
    LB = "LB"
    TL = "TL"
    TR = "TR"
    TB = "TB"
    RL = "RL"
    RR_PLUS = "RR+"
    RR_MINUS = "RR-"
    RT = "RT"
    RB = "RB"
    BL = "BL"
    BT = "BT"
    BR = "BR"


def pair_letter(first: CodeLetter, second: CodeLetter) -> SixteenLetter:
    if first.side != second.side:
        return SixteenLetter(first.side.value + second.side.value)
    if not first.is_arc:
        raise UnrealizablePairError(
            f"Pair {first.value}{second.value} cannot occur on a flat"
        )
    if first.sign != second.sign:
        raise UnrealizablePairError(
            f"Pair {first.value}{second.value} mixes signs on one semicircle"
        )
    return SixteenLetter(
        f"{first.side.value}{first.side.value}{'+' if first.sign > 0 else '-'}"
    )


def phi_regroup(
    word: Union[CodeWord, Sequence[CodeLetter]]
) -> Tuple[SixteenLetter, ...]:
    """Map w0 w1 ... w_{n-1} to the pairs (w0 w1)(w1 w2)...(w_{n-2} w_{n-1})."""
    letters = word.letters if isinstance(word, CodeWord) else tuple(word)
    if len(letters) < 2:
        raise DomainError("Regrouping needs a word of length at least 2")
    return tuple(pair_letter(a, b) for a, b in zip(letters, letters[1:]))


def reverse_word(word: CodeWord) -> CodeWord:
    """The code of the time-reversed orbit: letters reversed and arc signs flipped."""
    anchor = None if word.anchor is None else len(word) - 1 - word.anchor
    return CodeWord(tuple(letter.flipped() for letter in reversed(word.letters)), anchor)


@dataclass(frozen=True)
class SignedComposition:
    """Alternating flat and arc run lengths (n1, m1, ..., nk, mk) and a trailing flat run.

    A flat run is positive when it starts with T and negative when it starts
    with B; a zero flat run stands for two arc runs on different semicircles
    meeting directly.
    """

    pairs: Tuple[Tuple[int, int], ...]
    tail: int = 0

    def __post_init__(self):
        if not self.pairs:
            raise EmptyArcRunError("A signed composition needs at least one arc run")
        for _, m in self.pairs:
            if m < 1:
                raise DomainError(f"Arc runs must be positive, got {m}")

    @property
    def weight(self) -> int:
        return sum(abs(n) + m for n, m in self.pairs) + abs(self.tail)

    @property
    def terms(self) -> Tuple[int, ...]:
        flat = tuple(value for pair in self.pairs for value in pair)
        return flat + (self.tail,) if self.tail else flat

    def __len__(self) -> int:
        return len(self.pairs)


def _flat_run_sign(run: Sequence[CodeLetter]) -> int:
    for a, b in zip(run, run[1:]):
        if a == b:
            raise UnrealizablePairError(f"Flat run has a repeated {a.value}")
    return 1 if run[0] == CodeLetter.T else -1


def signed_composition_of_letters(letters: Sequence[CodeLetter]) -> SignedComposition:
    """Signed composition of a word, read from its maximal runs."""
    pairs = []
    pending = 0
    index = 0
    while index < len(letters):
        letter = letters[index]
        end = index + 1
        if letter.is_arc:
            while end < len(letters) and letters[end].side == letter.side:
                end += 1
            pairs.append((pending, end - index))
            pending = 0
        else:
            while end < len(letters) and not letters[end].is_arc:
                end += 1
            pending = _flat_run_sign(letters[index:end]) * (end - index)
        index = end
    if not pairs:
        raise EmptyArcRunError(
            f"Word {format_word(letters)} has no semicircle collision"
        )
    return SignedComposition(tuple(pairs), pending)


def signed_composition_of_orbit(
    coded: Union[CodedOrbit, CodeWord]
) -> SignedComposition:
    if isinstance(coded, CodedOrbit):
        if not coded.valid:
            raise DomainError("The orbit has an ambiguous collision")
        if coded.orbit.status == "singular":
            raise SingularOrbitError(coded.orbit.message)
        return signed_composition_of_letters(coded.word.letters)
    return signed_composition_of_letters(coded.letters)
