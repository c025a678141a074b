"""Closed braids: components, writhe, linking and framing arithmetic.

Strands are labelled 0..n-1 by their starting position.  The letter
``(i, +1)`` is the positive crossing sigma_i between positions i-1 and i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "BraidWord",
    "Crossing",
    "ComponentData",
    "ClosedBraidLink",
    "ParityReport",
    "ParityViolation",
    "BraidFileError",
    "strand_permutation",
    "close",
    "framing_from_braid",
    "parity_check",
    "crossing_oracle",
    "parse_braid_file",
    "load_braid_file",
    "with_auxiliary_strands",
]


class ParityViolation(AssertionError):
    """Some component has omega + n even; only a bug can cause this."""


class BraidFileError(ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class BraidWord:
    strands: int
    letters: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.strands < 1:
            raise ValueError("a braid needs at least one strand")
        letters = tuple((int(i), int(s)) for i, s in self.letters)
        for i, s in letters:
            if not 1 <= i <= self.strands - 1:
                raise ValueError(f"generator index {i} outside 1..{self.strands - 1}")
            if s not in (1, -1):
                raise ValueError(f"crossing sign must be +1 or -1, got {s}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def from_signed(cls, strands: int, word: Iterable[int]) -> "BraidWord":
        letters = []
        for w in word:
            if w == 0:
                raise ValueError("0 is not a braid generator")
            letters.append((abs(w), 1 if w > 0 else -1))
        return cls(strands, tuple(letters))

    def signed(self) -> list[int]:
        return [i * s for i, s in self.letters]

    def __len__(self) -> int:
        return len(self.letters)


@dataclass(frozen=True)
class Crossing:
    letter: int  # index of the letter in the word
    position: int  # left position i-1 of sigma_i
    strands: tuple[int, int]  # (strand at left position, strand at right position) before the crossing
    sign: int


def _walk(word: BraidWord):
    """Yield (letter index, i, sign, left strand, right strand) while permuting positions."""
    at = list(range(word.strands))  # at[position] = strand
    for k, (i, s) in enumerate(word.letters):
        left, right = at[i - 1], at[i]
        yield k, i, s, left, right
        at[i - 1], at[i] = right, left


def strand_permutation(word: BraidWord) -> tuple[int, ...]:
    """perm[s] = final position of the strand starting at position s."""
    at = list(range(word.strands))
    for _, i, _, left, right in _walk(word):
        at[i - 1], at[i] = right, left
    final = [0] * word.strands
    for pos, strand in enumerate(at):
        final[strand] = pos
    return tuple(final)


def _cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        s = start
        while not seen[s]:
            seen[s] = True
            cyc.append(s)
            s = perm[s]
        out.append(tuple(cyc))
    return out


@dataclass(frozen=True)
class ComponentData:
    label: int  # smallest strand label in the component
    strands: tuple[int, ...]
    positive: int
    negative: int

    @property
    def strand_count(self) -> int:
        return len(self.strands)

    @property
    def writhe(self) -> int:
        return self.positive - self.negative


@dataclass(frozen=True)
class ClosedBraidLink:
    word: BraidWord
    components: tuple[ComponentData, ...]
    linking: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def component(self, label: int) -> ComponentData:
        for c in self.components:
            if c.label == label:
                return c
        raise KeyError(f"no component with label {label}")

    def labels(self) -> list[int]:
        return [c.label for c in self.components]

    def linking_number(self, K: int, L: int) -> int:
        if K == L:
            raise ValueError("linking number needs two distinct components")
        return self.linking.get((min(K, L), max(K, L)), 0)

    def component_of(self, strand: int) -> int:
        for c in self.components:
            if strand in c.strands:
                return c.label
        raise KeyError(strand)


def close(word: BraidWord) -> ClosedBraidLink:
    perm = strand_permutation(word)
    cycles = _cycles(perm)
    owner = {}
    for cyc in cycles:
        for s in cyc:
            owner[s] = min(cyc)
    pos = {min(c): 0 for c in cycles}
    neg = {min(c): 0 for c in cycles}
    tally: dict[tuple[int, int], int] = {}
    for _, _, s, left, right in _walk(word):
        K, L = owner[left], owner[right]
        if K == L:
            if s > 0:
                pos[K] += 1
            else:
                neg[K] += 1
        else:
            key = (min(K, L), max(K, L))
            tally[key] = tally.get(key, 0) + s
    linking = {}
    for key, t in tally.items():
        if t % 2:
            raise ParityViolation(f"odd inter-component crossing tally {t} for {key}")
        linking[key] = t // 2
    comps = tuple(
        ComponentData(min(c), tuple(sorted(c)), pos[min(c)], neg[min(c)])
        for c in sorted(cycles, key=min)
    )
    return ClosedBraidLink(word, comps, linking)


def framing_from_braid(link: ClosedBraidLink, K: int, m: int) -> int:
    """Framing omega(K) + m n(K) induced by the m-framed braid axis."""
    comp = link.component(K)
    return comp.writhe + m * comp.strand_count


@dataclass(frozen=True)
class ParityReport:
    label: int
    strand_count: int
    writhe: int
    odd: bool
    cycle_sign: int  # sign of the cyclic permutation on the strands of K
    crossing_sign: int  # (-1)^(positive + negative)


def parity_check(link: ClosedBraidLink) -> list[ParityReport]:
    out = []
    for c in link.components:
        n, w = c.strand_count, c.writhe
        cycle_sign = (-1) ** (n + 1)
        crossing_sign = (-1) ** (c.positive + c.negative)
        odd = (w + n) % 2 == 1
        if not odd or cycle_sign != crossing_sign:
            raise ParityViolation(
                f"component {c.label}: writhe {w}, strands {n}, "
                f"signatures {cycle_sign} vs {crossing_sign}"
            )
        out.append(ParityReport(c.label, n, w, odd, cycle_sign, crossing_sign))
    return out


def crossing_oracle(word: BraidWord) -> list[Crossing]:
    """Recompute crossings from a full position table, without the closure walk.

    Every strand's position is tabulated at every time step; a crossing is any
    pair of strands whose left/right order flips between consecutive steps.
    """
    n = word.strands
    table = [list(range(n))]  # table[t][strand] = position
    for i, _ in word.letters:
        row = list(table[-1])
        for s in range(n):
            if row[s] == i - 1:
                row[s] = i
            elif row[s] == i:
                row[s] = i - 1
        table.append(row)
    found = []
    for t, (i, sign) in enumerate(word.letters):
        before, after = table[t], table[t + 1]
        for a in range(n):
            for b in range(n):
                if before[a] < before[b] and after[a] > after[b]:
                    found.append(Crossing(t, before[a], (a, b), sign))
    return found


def _json_position(text: str, needle: str) -> tuple[int, int]:
    idx = text.find(needle)
    if idx < 0:
        return 1, 1
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 1
    return line, col


def parse_braid_file(text: str) -> tuple[BraidWord, dict[int, int], dict]:
    """Parse ``{"strands": n, "word": [...], "targets": {...}}``.

    Returns the word, the component targets, and the remaining raw record
    (which may carry ``aux`` declarations).  Any problem raises
    ``BraidFileError`` carrying a line and column.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BraidFileError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise BraidFileError("top level must be an object")
    for key in ("strands", "word"):
        if key not in raw:
            raise BraidFileError(f"missing field {key!r}")
    strands, letters = raw["strands"], raw["word"]
    if not isinstance(strands, int) or isinstance(strands, bool) or strands < 1:
        raise BraidFileError("'strands' must be a positive integer", *_json_position(text, '"strands"'))
    if not isinstance(letters, list) or not all(isinstance(w, int) and not isinstance(w, bool) for w in letters):
        raise BraidFileError("'word' must be an array of signed integers", *_json_position(text, '"word"'))
    try:
        word = BraidWord.from_signed(strands, letters)
    except ValueError as exc:
        raise BraidFileError(str(exc), *_json_position(text, '"word"')) from None
    targets: dict[int, int] = {}
    for k, v in (raw.get("targets") or {}).items():
        try:
            targets[int(k)] = int(v)
        except (TypeError, ValueError):
            raise BraidFileError(f"bad target entry {k!r}: {v!r}", *_json_position(text, '"targets"')) from None
    return word, targets, raw


def load_braid_file(path) -> tuple[BraidWord, dict[int, int], dict]:
    with open(path, encoding="utf-8") as fh:
        return parse_braid_file(fh.read())


def with_auxiliary_strands(word: BraidWord) -> tuple[BraidWord, int, int]:
    """Append two untouched strands; they close to split unknots.

    Returns the widened word and the labels (plus, minus) of the new strands.
    """
    return BraidWord(word.strands + 2, word.letters), word.strands, word.strands + 1
