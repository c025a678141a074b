"""Integer ledgers: framings, surgery coefficients, spin evenness, Hopf degrees."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

__all__ = [
    "NotNullHomotopic",
    "ParityMismatch",
    "OddFraming",
    "FlagMissing",
    "RComponentRecord",
    "GluingData",
    "HopfValue",
    "SpinCertificate",
    "surgery_coefficient",
    "plug_plan",
    "evenness_check",
    "hopf_concat",
    "hopf_reverse",
    "hopf_glue",
    "validate_gluing",
    "standard_surgery_map",
    "trefoil_transport",
    "bennequin_check",
    "PSI0_TO_PSI_K0",
    "PSI_K0_TO_PSI0",
]


class NotNullHomotopic(ValueError):
    pass


class ParityMismatch(ValueError):
    pass


class OddFraming(ValueError):
    def __init__(self, components: Sequence[int]):
        self.components = list(components)
        super().__init__(f"odd framing on components {self.components}")


class FlagMissing(ValueError):
    pass


@dataclass(frozen=True)
class RComponentRecord:
    component: int
    framing: int
    unknotted: bool = False
    null_homotopic: bool = False


def surgery_coefficient(k: int, null_homotopic: bool = True) -> int:
    """Dehn coefficient produced by standard surgery on a k-framed core."""
    if not null_homotopic:
        raise NotNullHomotopic("standard surgery needs a null-homotopic core")
    return k + 1


def plug_plan(current: int, target: int) -> int:
    """Signed number of plugs; each plug moves the framing by +-2."""
    if (target - current) % 2:
        raise ParityMismatch(f"cannot move framing {current} to {target} in steps of 2")
    return (target - current) // 2


@dataclass(frozen=True)
class SpinCertificate:
    framings: tuple[tuple[int, int], ...]  # (component, framing)
    rule: str = "surgery_formula"

    @property
    def evenness(self) -> dict[int, bool]:
        return {c: f % 2 == 0 for c, f in self.framings}

    @property
    def valid(self) -> bool:
        return all(self.evenness.values())

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "framings": {str(c): f for c, f in self.framings},
            "even": {str(c): e for c, e in self.evenness.items()},
            "rule": self.rule,
        }


def evenness_check(framings: Mapping[int, int]) -> SpinCertificate:
    odd = sorted(c for c, f in framings.items() if f % 2)
    if odd:
        raise OddFraming(odd)
    return SpinCertificate(tuple(sorted((int(c), int(f)) for c, f in framings.items())))


@dataclass(frozen=True)
class HopfValue:
    """Hopf degree difference against the positive total Reeb foliation.

    ``unknown`` counts copies of an unevaluated reference value h (the Hopf
    degree of a Hardorp foliation on S^3, which is never computed).  A value
    is concrete once the h-terms cancel.
    """

    value: int
    unknown: int = 0

    @property
    def concrete(self) -> bool:
        return self.unknown == 0

    def to_json(self) -> list[int]:
        return [self.value, self.unknown]

    @classmethod
    def from_json(cls, data) -> "HopfValue":
        if isinstance(data, int):
            return cls(data)
        return cls(int(data[0]), int(data[1]))


def _hv(h) -> HopfValue:
    return h if isinstance(h, HopfValue) else HopfValue(int(h))


def hopf_concat(h1, h2) -> HopfValue:
    a, b = _hv(h1), _hv(h2)
    return HopfValue(a.value + b.value, a.unknown + b.unknown)


def hopf_reverse(h) -> HopfValue:
    """Hopf value after reversing the orientation of S^3: -1 - h."""
    a = _hv(h)
    return HopfValue(-1 - a.value, -a.unknown)


def hopf_glue(h_base, h_block, base_null_homotopic: bool = True, block_minus_one_unknot: bool = True) -> HopfValue:
    if not base_null_homotopic:
        raise FlagMissing("base R-component must be declared null-homotopic")
    if not block_minus_one_unknot:
        raise FlagMissing("block R-component must be declared a (-1)-framed unknot")
    return hopf_concat(h_base, h_block)


def _primitive(v: Sequence[int]) -> bool:
    from math import gcd

    return len(v) == 2 and gcd(int(v[0]), int(v[1])) == 1


@dataclass(frozen=True)
class GluingData:
    """A map on H_1 of the boundary torus plus the distinguished classes.

    ``matrix`` acts on column vectors: [[a, b], [c, d]] sends (1, 0) to (a, c).
    """

    matrix: tuple[tuple[int, int], tuple[int, int]]
    a_source: tuple[int, int]
    a_target: tuple[int, int]
    mu_source: tuple[int, int] | None = None
    mu_target: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        for v in (self.a_source, self.a_target, self.mu_source, self.mu_target):
            if v is not None and not _primitive(v):
                raise ValueError(f"class {v} is not primitive")
        (a, b), (c, d) = self.matrix
        if abs(a * d - b * c) != 1:
            raise ValueError("gluing map must be invertible over the integers")

    def image(self, v: Sequence[int]) -> tuple[int, int]:
        (a, b), (c, d) = self.matrix
        return (a * v[0] + b * v[1], c * v[0] + d * v[1])


def validate_gluing(g: GluingData) -> bool:
    return g.image(g.a_source) == tuple(g.a_target)


def standard_surgery_map(a_r: Sequence[int], mu: Sequence[int]) -> GluingData:
    """The surgery map fixing a_R and sending mu to mu + a_R, in the (a_R, mu) frame."""
    (p, q), (r, s) = a_r, mu
    det = p * s - q * r
    if abs(det) != 1:
        raise ValueError("a_R and mu must form a basis")
    # in basis (a_R, mu) the map is [[1, 1], [0, 1]]; conjugate to standard basis
    B = ((p, r), (q, s))
    Binv = ((s * det, -r * det), (-q * det, p * det))
    U = ((1, 1), (0, 1))

    def mm(X, Y):
        return tuple(tuple(sum(X[i][k] * Y[k][j] for k in range(2)) for j in range(2)) for i in range(2))

    return GluingData(mm(mm(B, U), Binv), tuple(a_r), tuple(a_r), tuple(mu), (r + p, s + q))


PSI0_TO_PSI_K0 = "psi0_to_psi_k0"
PSI_K0_TO_PSI0 = "psi_k0_to_psi0"


def trefoil_transport(n: int, m_star: int, direction: str) -> int:
    """Move a braid framing between the unknot axis and the trefoil-fibration axis.

    A framing n relative to the unknotted axis corresponds to n - m_star
    relative to the trefoil fibration, and back.
    """
    if direction == PSI0_TO_PSI_K0:
        return n - m_star
    if direction == PSI_K0_TO_PSI0:
        return n + m_star
    raise ValueError(f"unknown direction {direction!r}")


def bennequin_check(tb: int, euler_char: int, rot: int) -> bool:
    """True when tb + chi <= -|rot| fails, i.e. the contact structure is overtwisted."""
    return tb + euler_char > -abs(rot)
