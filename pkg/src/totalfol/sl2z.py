"""Exact 2x2 integer matrices with determinant +1 or -1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "GL2ZMatrix",
    "DeterminantError",
    "DetMinusOne",
    "IntegerOverflow",
    "WordTooLong",
    "IDENTITY",
    "MINUS_IDENTITY",
    "A_XY",
    "A1",
    "A2",
    "A_STAR",
    "GENERATORS",
    "mul",
    "inv",
    "power",
    "conj_xy",
    "decompose",
    "evaluate_word",
]

# entries are kept inside signed 64-bit range; anything larger is a hard error
INT64_MAX = 2**63 - 1


class DeterminantError(ValueError):
    pass


class DetMinusOne(ValueError):
    pass


class WordTooLong(OverflowError):
    pass


class IntegerOverflow(OverflowError):
    pass


def _check_range(*values: int) -> None:
    for v in values:
        if v > INT64_MAX or v < -INT64_MAX - 1:
            raise IntegerOverflow(f"matrix entry {v} leaves the 64-bit range")


@dataclass(frozen=True)
class GL2ZMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        for v in (self.a, self.b, self.c, self.d):
            if isinstance(v, bool) or not isinstance(v, int):
                raise TypeError(f"matrix entries must be int, got {v!r}")
        _check_range(self.a, self.b, self.c, self.d)
        if self.det not in (1, -1):
            raise DeterminantError(f"determinant {self.det} is not +1 or -1")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GL2ZMatrix":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def from_list(cls, entries: Sequence[int]) -> "GL2ZMatrix":
        if len(entries) != 4:
            raise ValueError("a matrix serializes as exactly four integers")
        return cls(*(int(e) for e in entries))

    def to_list(self) -> list[int]:
        return [self.a, self.b, self.c, self.d]

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    def apply(self, vec: Sequence[int]) -> tuple[int, int]:
        p, q = vec
        x, y = self.a * p + self.b * q, self.c * p + self.d * q
        _check_range(x, y)
        return (x, y)

    def __matmul__(self, other: "GL2ZMatrix") -> "GL2ZMatrix":
        return mul(self, other)

    def __neg__(self) -> "GL2ZMatrix":
        return GL2ZMatrix(-self.a, -self.b, -self.c, -self.d)

    def __repr__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


IDENTITY = GL2ZMatrix(1, 0, 0, 1)
MINUS_IDENTITY = GL2ZMatrix(-1, 0, 0, -1)
A_XY = GL2ZMatrix(0, 1, 1, 0)
A1 = GL2ZMatrix(1, 0, 1, 1)
A2 = GL2ZMatrix(1, 1, 0, 1)
A_STAR = GL2ZMatrix(0, -1, 1, 1)


def mul(A: GL2ZMatrix, B: GL2ZMatrix) -> GL2ZMatrix:
    a = A.a * B.a + A.b * B.c
    b = A.a * B.b + A.b * B.d
    c = A.c * B.a + A.d * B.c
    d = A.c * B.b + A.d * B.d
    _check_range(a, b, c, d)
    return GL2ZMatrix(a, b, c, d)


def inv(A: GL2ZMatrix) -> GL2ZMatrix:
    # adjugate divided by det, and det is its own inverse
    s = A.det
    return GL2ZMatrix(s * A.d, -s * A.b, -s * A.c, s * A.a)


def power(A: GL2ZMatrix, k: int) -> GL2ZMatrix:
    base = A if k >= 0 else inv(A)
    out = IDENTITY
    for _ in range(abs(k)):
        out = mul(out, base)
    return out


def conj_xy(A: GL2ZMatrix) -> GL2ZMatrix:
    return mul(mul(A_XY, A), A_XY)


GENERATORS: dict[str, GL2ZMatrix] = {
    "A1": A1,
    "A1inv": inv(A1),
    "A2": A2,
    "A2inv": inv(A2),
}
_INVERSE_LETTER = {"A1": "A1inv", "A1inv": "A1", "A2": "A2inv", "A2inv": "A2"}


def evaluate_word(word: Iterable[str]) -> GL2ZMatrix:
    """Left-to-right product of generator letters (empty word is I)."""
    out = IDENTITY
    for letter in word:
        try:
            out = mul(out, GENERATORS[letter])
        except KeyError:
            raise ValueError(f"unknown generator letter {letter!r}") from None
    return out


def decompose(A: GL2ZMatrix, max_length: int = 10**6) -> tuple[tuple[str, ...], int]:
    """Write A as sign * (product of A1, A2 and their inverses).

    Row operations by generators reduce the first column to (+-1, 0) with a
    Euclidean loop, then clear the upper right entry.  Returns ``(word, sign)``
    with ``evaluate_word(word) == sign * A``.  The word length is the sum of
    the partial quotients met during the reduction; past ``max_length``
    letters ``WordTooLong`` is raised before anything is allocated.
    """
    if A.det != 1:
        raise DetMinusOne(f"decompose needs det +1, got {A.det} for {A!r}")
    a, b, c, d = A.a, A.b, A.c, A.d
    applied: list[str] = []  # letters g with M <- g M, in order of application

    def grow(k: int) -> None:
        if len(applied) + abs(k) > max_length:
            raise WordTooLong(f"generator word for {A!r} exceeds {max_length} letters")

    def left_upper(k: int) -> None:
        # row1 += k * row2, i.e. M <- A2^k M
        nonlocal a, b
        grow(k)
        a, b = a + k * c, b + k * d
        applied.extend(["A2" if k > 0 else "A2inv"] * abs(k))

    def left_lower(k: int) -> None:
        # row2 += k * row1, i.e. M <- A1^k M
        nonlocal c, d
        grow(k)
        c, d = c + k * a, d + k * b
        applied.extend(["A1" if k > 0 else "A1inv"] * abs(k))

    while c != 0:
        if a == 0:
            left_upper(1)
        elif abs(a) > abs(c):
            left_upper(-(a // c))
        else:
            left_lower(-(c // a))
    sign = a  # now a = d = +-1
    if b != 0:
        left_upper(-b * sign)
    word = tuple(_INVERSE_LETTER[g] for g in applied)
    return _free_reduce(word), sign


def _free_reduce(word: Sequence[str]) -> tuple[str, ...]:
    out: list[str] = []
    for letter in word:
        if out and out[-1] == _INVERSE_LETTER[letter]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)
