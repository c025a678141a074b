"""Symbolic blocks of twisted total foliations on [0,1] x T^2.

A block records its twist matrix, its torus braid word, the rotation of the
line fields of the first two foliations along each string (in full turns)
and holonomy tags.  ``compose(F, G)`` follows the ledger convention

    twist(compose(F, G)) = G.twist @ F.twist

which is realized geometrically by running G on the lower half of the
interval and F, pushed forward by G's twist, on the upper half.  Braid words
are stored in that geometric order (bottom to top), so the permutation read
off the word always matches the string matching of the block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from . import sl2z
from .sl2z import GL2ZMatrix, IDENTITY

__all__ = [
    "Direction",
    "TorusBraidClass",
    "FolBlock",
    "BlockPlan",
    "UnknownBlock",
    "StrandMismatch",
    "IDENTITY_TAG",
    "PendingUnconfirmed",
    "REEB_TAG",
    "E_X",
    "E_Y",
    "angle_of",
    "transport_defect",
    "catalog",
    "block_from_spec",
    "compose",
    "compose_all",
    "invert",
    "transpose",
    "realize_target",
    "composite_power",
]

IDENTITY_TAG = "Identity"
REEB_TAG = "ReebConjugate"
_TAGS = (IDENTITY_TAG, REEB_TAG)


class UnknownBlock(KeyError):
    pass


class StrandMismatch(ValueError):
    pass


class PendingUnconfirmed(ValueError):
    pass


@dataclass(frozen=True)
class Direction:
    p: int
    q: int

    def __post_init__(self) -> None:
        if (self.p, self.q) == (0, 0) or math.gcd(self.p, self.q) != 1:
            raise ValueError(f"({self.p},{self.q}) is not a primitive vector")

    @classmethod
    def of(cls, vec: Sequence[int]) -> "Direction":
        p, q = int(vec[0]), int(vec[1])
        g = math.gcd(p, q)
        if g == 0:
            raise ValueError("zero vector has no direction")
        return cls(p // g, q // g)

    @property
    def angle(self) -> float:
        return angle_of((self.p, self.q))


E_X = Direction(1, 0)
E_Y = Direction(0, 1)
_START = {1: E_X, 2: E_Y}


def angle_of(vec: Sequence[float]) -> float:
    """Angle of a plane vector in turns, in [0, 1)."""
    return (math.atan2(vec[1], vec[0]) / (2 * math.pi)) % 1.0


def _wrap_half(x: float) -> float:
    """Representative of x modulo 1 in (-1/2, 1/2]."""
    r = x - math.floor(x + 0.5)
    return 0.5 if r == -0.5 else r


def _defect(A: GL2ZMatrix, phi: float) -> float:
    """Continuous branch of angle(A u) - angle(u) at the unit vector of angle phi.

    For det A = 1 the map u -> Au has degree one, so the difference is a
    genuine function of the direction.  It never reaches the value opposite to
    the branch centre: 0 when trace >= 0 (no negative eigenvalue), 1/2 when
    trace < 0 (A = -B with B of that first kind).
    """
    c, s = math.cos(2 * math.pi * phi), math.sin(2 * math.pi * phi)
    img = (A.a * c + A.b * s, A.c * c + A.d * s)
    centre = 0.0 if A.trace >= 0 else 0.5
    return centre + _wrap_half(angle_of(img) - phi - centre)


def transport_defect(A: GL2ZMatrix, path_start, path_winding: float) -> float:
    """Extra winding picked up by a direction path when pushed through A.

    A path starting at ``path_start`` (a Direction or an angle in turns) and
    turning by ``path_winding`` winds by ``path_winding + defect`` after the
    linear map A is applied.
    """
    if A.det != 1:
        raise sl2z.DetMinusOne("transport defect needs det +1")
    if A == IDENTITY:
        return 0.0
    start = path_start.angle if isinstance(path_start, Direction) else float(path_start)
    return _defect(A, start + path_winding) - _defect(A, start)


# --- torus braid words ------------------------------------------------------

_GENS = ("sigma", "rho", "tau")


def _letter(gen: str, m: int, sign: int = 1) -> tuple[str, int, int]:
    if gen not in _GENS:
        raise UnknownBlock(f"unknown braid generator {gen!r}")
    if sign not in (1, -1):
        raise ValueError("generator exponent must be +1 or -1")
    return (gen, int(m), int(sign))


@dataclass(frozen=True)
class TorusBraidClass:
    strands: int
    twist: GL2ZMatrix = IDENTITY
    word: tuple[tuple[str, int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.twist.det != 1:
            raise sl2z.DetMinusOne("torus braids are twisted by det +1 matrices")
        for gen, m, s in self.word:
            _letter(gen, m, s)
            top = self.strands - 2 if gen == "sigma" else self.strands - 1
            if not 0 <= m <= top:
                raise ValueError(f"{gen}_{m} is not a generator on {self.strands} strands")

    def permutation(self) -> tuple[int, ...]:
        """perm[j] = index of the end point reached by string j."""
        at = list(range(self.strands))  # at[slot] = string
        for gen, m, _ in self.word:
            if gen == "sigma":
                at[m], at[m + 1] = at[m + 1], at[m]
        perm = [0] * self.strands
        for slot, string in enumerate(at):
            perm[string] = slot
        return tuple(perm)

    def abelian_counts(self) -> dict[tuple[str, int], int]:
        out: dict[tuple[str, int], int] = {}
        for gen, m, s in self.word:
            out[(gen, m)] = out.get((gen, m), 0) + s
        return {k: v for k, v in sorted(out.items()) if v}

    def same_class(self, other: "TorusBraidClass", strict: bool = False) -> bool:
        if (self.strands, self.twist) != (other.strands, other.twist):
            return False
        if strict:
            return self.word == other.word
        return (self.permutation() == other.permutation()
                and self.abelian_counts() == other.abelian_counts())

    def to_json(self) -> dict:
        return {
            "strands": self.strands,
            "twist": self.twist.to_list(),
            "word": [[g, m, s] for g, m, s in self.word],
        }


# --- blocks -----------------------------------------------------------------

def _combine_tag(a: str, b: str) -> str:
    return REEB_TAG if REEB_TAG in (a, b) else IDENTITY_TAG


@dataclass(frozen=True)
class FolBlock:
    strands: int
    twist: GL2ZMatrix
    word: tuple[tuple[str, int, int], ...]
    theta1: tuple[float, ...]
    theta2: tuple[float, ...]
    tags: tuple[tuple[str, str], ...]  # per string: (x-axis tag, y-axis tag)
    holonomy_scale: float
    recipe: tuple = field(compare=False)
    name: str = ""
    pending: bool = False

    def __post_init__(self) -> None:
        n = self.strands
        if len(self.theta1) != n or len(self.theta2) != n or len(self.tags) != n:
            raise ValueError("per-string data must have one entry per strand")
        if self.twist.det != 1:
            raise sl2z.DetMinusOne("block twists have det +1")
        for t1, t2 in zip(self.theta1, self.theta2):
            if abs(t1 - t2) >= 0.5:
                raise ValueError(f"rotations {t1}, {t2} violate |theta1 - theta2| < 1/2")
        if self.holonomy_scale <= 0:
            raise ValueError("holonomy scale must be positive")

    @property
    def braid(self) -> TorusBraidClass:
        return TorusBraidClass(self.strands, self.twist, self.word)

    @property
    def permutation(self) -> tuple[int, ...]:
        return self.braid.permutation()

    def theta(self, j: int = 0) -> tuple[float, float]:
        return (self.theta1[j], self.theta2[j])

    def thetas(self, k: int) -> tuple[float, ...]:
        return self.theta1 if k == 1 else self.theta2

    def start_dir(self, k: int) -> Direction:
        return _START[k]

    def end_dir(self, k: int) -> Direction:
        return Direction.of(self.twist.apply((_START[k].p, _START[k].q)))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "strands": self.strands,
            "twist": self.twist.to_list(),
            "word": [[g, m, s] for g, m, s in self.word],
            "theta1": list(self.theta1),
            "theta2": list(self.theta2),
            "tags": [list(t) for t in self.tags],
            "holonomy_scale": self.holonomy_scale,
            "oracle_pending": self.pending,
        }


def _uniform(n: int, value: float) -> tuple[float, ...]:
    return tuple(float(value) for _ in range(n))


def _plain_tags(n: int) -> tuple[tuple[str, str], ...]:
    return tuple((IDENTITY_TAG, IDENTITY_TAG) for _ in range(n))


def _default_scale(n: int) -> float:
    return 1.0 / (16 * n)


def _twist_block(name: str, n: int, twist: GL2ZMatrix, t1: float, t2: float, pending=False) -> FolBlock:
    return FolBlock(n, twist, (), _uniform(n, t1), _uniform(n, t2), _plain_tags(n),
                    _default_scale(n), (name,), name, pending)


def identity_block(n: int = 1) -> FolBlock:
    return _twist_block("std", n, IDENTITY, 0.0, 0.0)


def _f1(n: int) -> FolBlock:
    return _twist_block("F1", n, sl2z.A1, 1 / 8, 0.0)


def _f2(n: int) -> FolBlock:
    return _twist_block("F2", n, sl2z.A2, 0.0, -1 / 8)


def catalog(name: str, n: int = 1, **params) -> FolBlock:
    """Catalog block by name.

    Names: std, F1, F2, F1inv, F2inv, G (the F1/F2inv composite),
    holonomy (``tags=[(x, y), ...]``, optional ``scale``),
    braid_gen (``gen=("sigma"|"rho"|"tau", m, sign)``), rotation (``m=int``).
    The inverse shapes are derived with the transport law and come back
    flagged ``pending`` until the rotation oracle confirms them.
    """
    if n < 1:
        raise ValueError("blocks need at least one strand")
    if name == "std":
        return identity_block(n)
    if name == "F1":
        return _f1(n)
    if name == "F2":
        return _f2(n)
    if name == "F1inv":
        return replace(_invert_by_law(_f1(n)), name="F1inv", recipe=("F1inv",))
    if name == "F2inv":
        return replace(_invert_by_law(_f2(n)), name="F2inv", recipe=("F2inv",))
    if name == "G":
        return compose(catalog("F1", n), catalog("F2inv", n))
    if name == "holonomy":
        tags = params.get("tags")
        if tags is None:
            tags = [(IDENTITY_TAG, IDENTITY_TAG)] * n
        tags = tuple((str(x), str(y)) for x, y in tags)
        if len(tags) != n or any(t not in _TAGS for pair in tags for t in pair):
            raise ValueError(f"holonomy tags must be {n} pairs over {_TAGS}")
        scale = float(params.get("scale", _default_scale(n)))
        return FolBlock(n, IDENTITY, (), _uniform(n, 0), _uniform(n, 0), tags, scale,
                        ("holonomy", tags, scale), "holonomy")
    if name == "braid_gen":
        gen = params.get("gen")
        if gen is None:
            raise UnknownBlock("braid_gen needs gen=(name, m, sign)")
        letter = _letter(*gen) if len(gen) == 3 else _letter(gen[0], gen[1])
        TorusBraidClass(n, IDENTITY, (letter,))  # range check
        return FolBlock(n, IDENTITY, (letter,), _uniform(n, 0), _uniform(n, 0), _plain_tags(n),
                        _default_scale(n), ("braid_gen", letter), "braid_gen")
    if name == "rotation":
        m = int(params.get("m", 0))
        return _twist_block("rotation", n, IDENTITY, m, m) if m == 0 else FolBlock(
            n, IDENTITY, (), _uniform(n, m), _uniform(n, m), _plain_tags(n),
            _default_scale(n), ("rotation", m), "rotation")
    raise UnknownBlock(f"no catalog block named {name!r}")


def block_from_spec(spec, n: int = 1) -> FolBlock:
    """Build from a serialized spec: a name or ``{"name": ..., **params}``."""
    if isinstance(spec, str):
        return catalog(spec, n)
    params = dict(spec)
    name = params.pop("name")
    if "gen" in params:
        params["gen"] = tuple(params["gen"])
    return catalog(name, n, **params)


def compose(F: FolBlock, G: FolBlock) -> FolBlock:
    """Ledger composite with twist G.twist @ F.twist.

    String j runs through G first and then through F's string G.perm[j]; the
    F-part is seen through G's twist, which adds a transport defect.
    """
    if F.strands != G.strands:
        raise StrandMismatch(f"{F.strands} vs {G.strands} strands")
    n = F.strands
    A = G.twist
    gperm = G.permutation
    thetas = {}
    for k in (1, 2):
        vals = []
        for j in range(n):
            upper = F.thetas(k)[gperm[j]]
            vals.append(G.thetas(k)[j] + upper + transport_defect(A, _START[k], upper))
        thetas[k] = tuple(vals)
    tags = tuple(
        (_combine_tag(G.tags[j][0], F.tags[gperm[j]][0]), _combine_tag(G.tags[j][1], F.tags[gperm[j]][1]))
        for j in range(n)
    )
    return FolBlock(
        n,
        sl2z.mul(G.twist, F.twist),
        G.word + F.word,
        thetas[1],
        thetas[2],
        tags,
        min(F.holonomy_scale, G.holonomy_scale),
        ("compose", F.recipe, G.recipe),
        f"({F.name}*{G.name})",
        F.pending or G.pending,
    )


def compose_all(blocks: Iterable[FolBlock], n: int | None = None) -> FolBlock:
    blocks = list(blocks)
    if not blocks:
        return identity_block(n or 1)
    out = blocks[0]
    for b in blocks[1:]:
        out = compose(out, b)
    return out


def composite_power(F: FolBlock, k: int) -> FolBlock:
    return compose_all([F] * k) if k > 0 else identity_block(F.strands)


def _invert_by_law(F: FolBlock) -> FolBlock:
    n = F.strands
    Ainv = sl2z.inv(F.twist)
    perm = F.permutation
    source = [0] * n  # inverse string j retraces F's string source[j] backwards
    for j in range(n):
        source[perm[j]] = j
    thetas = {}
    for k in (1, 2):
        vals = []
        for j in range(n):
            th = F.thetas(k)[source[j]]
            end_angle = _START[k].angle + th
            vals.append(-th + transport_defect(Ainv, end_angle, -th))
        thetas[k] = tuple(vals)
    word = tuple((g, m, -s) for g, m, s in reversed(F.word))
    tags = tuple(F.tags[source[j]] for j in range(n))
    return FolBlock(n, Ainv, word, thetas[1], thetas[2], tags, F.holonomy_scale,
                    ("invert", F.recipe), f"{F.name}^-1", True)


_CATALOG_INVERSES = {"F1": "F1inv", "F2": "F2inv", "F1inv": "F1", "F2inv": "F2", "std": "std"}


def invert(F: FolBlock) -> FolBlock:
    """Inverse block: reversed time, pushed forward by the inverse twist.

    Catalog shapes map to catalog shapes (F1 <-> F1inv, rotation(m) ->
    rotation(-m)); anything else gets its rotations from the transport law
    and is flagged pending.
    """
    if F.recipe and F.recipe[0] in _CATALOG_INVERSES and F.recipe == (F.recipe[0],):
        return catalog(_CATALOG_INVERSES[F.recipe[0]], F.strands)
    if F.recipe and F.recipe[0] == "rotation":
        return catalog("rotation", F.strands, m=-F.recipe[1])
    if F.recipe and F.recipe[0] == "holonomy":
        return replace(F)
    return _invert_by_law(F)


def transpose(F: FolBlock) -> FolBlock:
    """Swap the roles of x and y (and of the first two foliations).

    Reflection reverses angles, so the rotations come back as
    (-theta2, -theta1).
    """
    swap = {"sigma": "sigma", "rho": "tau", "tau": "rho"}
    return FolBlock(
        F.strands,
        sl2z.conj_xy(F.twist),
        tuple((swap[g], m, s) for g, m, s in F.word),
        tuple(-t for t in F.theta2),
        tuple(-t for t in F.theta1),
        tuple((y, x) for x, y in F.tags),
        F.holonomy_scale,
        ("transpose", F.recipe),
        f"T({F.name})",
        F.pending,
    )


# --- planning -----------------------------------------------------------------

@dataclass(frozen=True)
class BlockPlan:
    strands: int
    specs: tuple  # serialized block specs, composed left to right
    composite: FolBlock

    @property
    def pending_blocks(self) -> list[str]:
        names = []
        for spec in self.specs:
            name = spec if isinstance(spec, str) else spec["name"]
            if catalog_pending(name) and name not in names:
                names.append(name)
        return names

    def validate(self, confirmations: Mapping[str, Sequence[float]] | None = None, tol: float = 1e-3) -> None:
        """Refuse a plan whose derived ledger values lack a matching oracle value.

        ``confirmations`` maps a catalog name to the oracle's (theta1, theta2).
        """
        confirmations = confirmations or {}
        for name in self.pending_blocks:
            if name not in confirmations:
                raise PendingUnconfirmed(f"{name} ledger value has not been checked by the rotation oracle")
            ledger = catalog(name, self.strands).theta(0)
            oracle = confirmations[name]
            if max(abs(ledger[0] - oracle[0]), abs(ledger[1] - oracle[1])) > tol:
                raise PendingUnconfirmed(f"{name}: ledger {ledger} disagrees with oracle {tuple(oracle)}")

    def blocks(self) -> list[FolBlock]:
        return [block_from_spec(s, self.strands) for s in self.specs]

    def to_json(self) -> dict:
        return {
            "strands": self.strands,
            "blocks": [s if isinstance(s, str) else dict(s) for s in self.specs],
            "composite": self.composite.to_json(),
            "oracle_pending": self.pending_blocks,
        }


def catalog_pending(name: str) -> bool:
    return name in ("F1inv", "F2inv")


_LETTER_BLOCK = {"A1": "F1", "A1inv": "F1inv", "A2": "F2", "A2inv": "F2inv"}


def realize_target(
    n: int,
    A: GL2ZMatrix,
    braid_word: Sequence[tuple[str, int, int]] = (),
    m: int = 0,
    tags: Sequence[tuple[str, str]] | None = None,
) -> BlockPlan:
    """Composition word over catalog blocks hitting the requested data.

    ``braid_word`` is the requested torus braid word in geometric order.
    The composite's first rotation lands in [m, m+1); the second rotation is
    whatever the twist forces (it differs from the first by less than 1/2).
    """
    word, sign = sl2z.decompose(A)  # raises DetMinusOne
    specs: list = []
    # compose(X, Y) has twist Y.twist @ X.twist, so the product w1 w2 ... wk
    # needs the blocks in reverse letter order
    specs.extend(_LETTER_BLOCK[letter] for letter in reversed(word))
    if sign == -1:
        # -I is the cube of the F1/F2inv composite
        specs.extend(["F1", "F2inv"] * 3)
    # blocks appended later sit lower in time; the requested word is read
    # bottom to top, so append its letters last-first
    for gen, idx, s in reversed(list(braid_word)):
        specs.append({"name": "braid_gen", "gen": [gen, idx, s]})
    if tags is not None and any(t != IDENTITY_TAG for pair in tags for t in pair):
        specs.append({"name": "holonomy", "tags": [list(t) for t in tags]})
    partial = compose_all([block_from_spec(s, n) for s in specs], n)
    shift = m - math.floor(partial.theta1[0] + 1e-12)
    if shift:
        specs.append({"name": "rotation", "m": shift})
    composite = compose_all([block_from_spec(s, n) for s in specs], n)
    return BlockPlan(n, tuple(specs), composite)
