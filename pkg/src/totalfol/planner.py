"""Construction plans for total foliations on surgered 3-manifolds.

A plan is a flat list of steps acting on named scopes.  Scope ``M`` is the
manifold given by the Kirby diagram; the S^3 blocks used to shift the Hopf
degree live in scopes named after their role (``G[-1]#0.A`` and so on).
Every step records its pre and post values so that ``verify_certificate`` can
replay the ledger rule by rule without trusting any stored delta.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from . import braidlink as bl
from . import invariants as inv
from .braidlink import BraidWord

__all__ = [
    "PlanStep",
    "ConstructionPlan",
    "Violation",
    "OddKirbyFraming",
    "MissingAuxiliaryUnknots",
    "MissingTarget",
    "KirbyInput",
    "hardorp_plan",
    "build_gn",
    "total_plan",
    "verify_certificate",
    "TURBULARIZE",
    "INSERT_PLUG",
    "STANDARD_SURGERY",
    "GLUE_BLOCK",
    "ORIENTATION_REVERSE",
    "BUILD_GN",
]

TURBULARIZE = "Turbularize"
INSERT_PLUG = "InsertPlug"
STANDARD_SURGERY = "StandardSurgery"
GLUE_BLOCK = "GlueBlock"
ORIENTATION_REVERSE = "OrientationReverse"
BUILD_GN = "BuildGn"

MAIN = "M"


class OddKirbyFraming(ValueError):
    def __init__(self, components):
        self.components = list(components)
        super().__init__(f"odd Kirby framing on components {self.components}")


class MissingAuxiliaryUnknots(ValueError):
    pass


class MissingTarget(ValueError):
    pass


@dataclass(frozen=True)
class KirbyInput:
    """Braid word for the Kirby link plus two auxiliary split unknots."""

    word: BraidWord
    targets: Mapping[int, int]
    aux_plus: int | None
    aux_minus: int | None
    m_star: int = 0

    @classmethod
    def with_aux(cls, word: BraidWord, targets: Mapping[int, int], m_star: int = 0) -> "KirbyInput":
        wide, plus, minus = bl.with_auxiliary_strands(word)
        return cls(wide, dict(targets), plus, minus, m_star)

    @classmethod
    def empty(cls, m_star: int = 0) -> "KirbyInput":
        return cls(BraidWord(2, ()), {}, 0, 1, m_star)

    def to_json(self) -> dict:
        return {
            "strands": self.word.strands,
            "word": self.word.signed(),
            "targets": {str(k): int(v) for k, v in sorted(self.targets.items())},
            "aux_plus": self.aux_plus,
            "aux_minus": self.aux_minus,
            "m_star": self.m_star,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KirbyInput":
        return cls(
            BraidWord.from_signed(int(data["strands"]), data["word"]),
            {int(k): int(v) for k, v in data.get("targets", {}).items()},
            data.get("aux_plus"),
            data.get("aux_minus"),
            int(data.get("m_star", 0)),
        )


@dataclass(frozen=True)
class PlanStep:
    kind: str
    scope: str
    component: int | None
    pre: Any
    post: Any
    rule: str
    detail: tuple = ()  # sorted (key, value) pairs

    def get(self, key, default=None):
        return dict(self.detail).get(key, default)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "scope": self.scope,
            "component": self.component,
            "pre": self.pre,
            "post": self.post,
            "rule": self.rule,
        }
        out.update(dict(self.detail))
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "PlanStep":
        base = {"kind", "scope", "component", "pre", "post", "rule"}
        detail = tuple(sorted((k, _freeze(v)) for k, v in data.items() if k not in base))
        return cls(data["kind"], data["scope"], data.get("component"), _freeze(data.get("pre")),
                   _freeze(data.get("post")), data.get("rule", ""), detail)


def _freeze(v):
    return tuple(_freeze(x) for x in v) if isinstance(v, list) else v


def _thaw(v):
    return [_thaw(x) for x in v] if isinstance(v, tuple) else v


def _step(kind, scope, component, pre, post, rule, **detail) -> PlanStep:
    return PlanStep(kind, scope, component, _freeze(pre), _freeze(post), rule,
                    tuple(sorted((k, _freeze(v)) for k, v in detail.items())))


@dataclass(frozen=True)
class ConstructionPlan:
    kirby: KirbyInput | None
    hopf_offset: int
    scopes: Mapping[str, dict]  # scope -> {"role", "strands", "word", "aux_plus", "aux_minus"}
    steps: tuple[PlanStep, ...]
    certificate: Mapping[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "input": None if self.kirby is None else self.kirby.to_json(),
            "hopf_offset": self.hopf_offset,
            "scopes": {k: self.scopes[k] for k in sorted(self.scopes)},
            "steps": [_json_ready(s.to_json()) for s in self.steps],
            "certificate": self.certificate,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, data: Mapping) -> "ConstructionPlan":
        kirby = None if data.get("input") is None else KirbyInput.from_json(data["input"])
        return cls(
            kirby,
            int(data.get("hopf_offset", 0)),
            {k: dict(v) for k, v in data.get("scopes", {}).items()},
            tuple(PlanStep.from_json(s) for s in data.get("steps", [])),
            dict(data.get("certificate", {})),
        )

    def kinds(self) -> list[str]:
        return [s.kind for s in self.steps]


def _json_ready(d):
    if isinstance(d, dict):
        return {k: _json_ready(v) for k, v in d.items()}
    return _thaw(d)


# --- building -----------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.steps: list[PlanStep] = []
        self.scopes: dict[str, dict] = {}
        # live R-components: (scope, component) -> framing, per owning scope
        self.available: dict[str, dict[tuple[str, int], int]] = {}
        self.hopf: dict[str, inv.HopfValue] = {}
        self.gn_blocks = 0

    def add(self, step: PlanStep) -> None:
        self.steps.append(step)


def _hardorp_steps(b: _Builder, scope: str, kirby: KirbyInput, role: str) -> None:
    link = bl.close(kirby.word)
    labels = link.labels()
    aux = {kirby.aux_plus: 1, kirby.aux_minus: -1}
    if kirby.aux_plus is None or kirby.aux_minus is None or kirby.aux_plus == kirby.aux_minus \
            or any(a not in labels for a in aux):
        raise MissingAuxiliaryUnknots("two distinct auxiliary unknot components are required")
    for a in aux:
        c = link.component(a)
        if c.strand_count != 1 or any(a in key for key, v in link.linking.items() if v):
            raise MissingAuxiliaryUnknots(f"auxiliary component {a} is not a split unknot")
    kirby_labels = [c for c in labels if c not in aux]
    missing = [c for c in kirby_labels if c not in kirby.targets]
    if missing:
        raise MissingTarget(f"no Kirby framing declared for components {missing}")
    odd = [c for c in kirby_labels if kirby.targets[c] % 2]
    if odd:
        raise OddKirbyFraming(odd)
    bl.parity_check(link)

    b.scopes[scope] = {
        "role": role,
        "strands": kirby.word.strands,
        "word": kirby.word.signed(),
        "aux_plus": kirby.aux_plus,
        "aux_minus": kirby.aux_minus,
        "hopf_start": [0, 1] if role == "hardorp-S3" else [0, 0],
    }
    b.hopf[scope] = inv.HopfValue(0, 1) if role == "hardorp-S3" else inv.HopfValue(0)
    framing: dict[int, int] = {}
    for c in labels:
        comp = link.component(c)
        psi_k0 = 1 - kirby.m_star
        psi0 = inv.trefoil_transport(psi_k0, kirby.m_star, inv.PSI_K0_TO_PSI0)
        base = bl.framing_from_braid(link, c, psi0)
        framing[c] = base
        b.add(_step(TURBULARIZE, scope, c, None, base, "any_braid",
                    writhe=comp.writhe, strand_count=comp.strand_count,
                    m_star=kirby.m_star, psi_k0_framing=psi_k0, psi0_framing=psi0))
    goal = {c: kirby.targets[c] - 1 for c in kirby_labels}
    goal.update(aux)
    for c in labels:
        count = inv.plug_plan(framing[c], goal[c])
        sign = 1 if count > 0 else -1
        for _ in range(abs(count)):
            b.add(_step(INSERT_PLUG, scope, c, framing[c], framing[c] + 2 * sign, "framing_change", sign=sign))
            framing[c] += 2 * sign
    for c in kirby_labels:
        coef = inv.surgery_coefficient(framing[c])
        b.add(_step(STANDARD_SURGERY, scope, c, framing[c], coef, "framing_of_surgery"))
    b.available[scope] = {(scope, a): framing[a] for a in aux}


def _pick(b: _Builder, scope: str, framing: int) -> tuple[str, int]:
    options = sorted(k for k, v in b.available[scope].items() if v == framing)
    if not options:
        raise MissingAuxiliaryUnknots(f"scope {scope} has no ({framing:+d})-framed unknotted R-component")
    return options[0]


def _reverse(b: _Builder, scope: str) -> None:
    pre = b.hopf[scope]
    post = inv.hopf_reverse(pre)
    b.available[scope] = {k: -v for k, v in b.available[scope].items()}
    b.hopf[scope] = post
    b.add(_step(ORIENTATION_REVERSE, scope, None, pre.to_json(), post.to_json(), "inversion_formula"))


def _glue(b: _Builder, base: str, block: str) -> None:
    base_key = _pick(b, base, 1)
    block_key = _pick(b, block, -1)
    pre = b.hopf[base]
    post = inv.hopf_glue(pre, b.hopf[block])
    del b.available[base][base_key]
    del b.available[block][block_key]
    b.available[base].update(b.available.pop(block))
    b.hopf[base] = post
    del b.hopf[block]
    b.add(_step(GLUE_BLOCK, base, base_key[1], pre.to_json(), post.to_json(), "gluing_formula",
                base_scope=base_key[0], block=block, block_scope=block_key[0], block_component=block_key[1]))


def _gn_steps(b: _Builder, n: int, prefix: str) -> str:
    """Emit steps for G_n; returns the scope that ends up holding it."""
    if n == -1:
        idx = b.gn_blocks
        b.gn_blocks += 1
        first, second = f"{prefix}#{idx}.A", f"{prefix}#{idx}.B"
        for s in (first, second):
            _hardorp_steps(b, s, KirbyInput.empty(), "hardorp-S3")
        _reverse(b, second)
        _glue(b, first, second)
        scope = first
    elif n < -1:
        scope = _gn_steps(b, n + 1, prefix)
        extra = _gn_steps(b, -1, prefix)
        _glue(b, scope, extra)
    else:
        scope = _gn_steps(b, -n - 1, prefix)
        _reverse(b, scope)
    b.add(_step(BUILD_GN, scope, None, None, b.hopf[scope].to_json(), "change_hopf", n=n))
    return scope


def _certificate(b: _Builder, scope: str, kirby: KirbyInput | None, hopf: int) -> dict:
    plus = _pick(b, scope, 1)
    minus = _pick(b, scope, -1)
    coefficients = {}
    for s in b.steps:
        if s.kind == STANDARD_SURGERY and s.scope == MAIN:
            coefficients[str(s.component)] = s.post
    if kirby is not None:
        aux = (kirby.aux_plus, kirby.aux_minus)
        spin = inv.evenness_check({c: t for c, t in kirby.targets.items() if c not in aux}).to_json()
    else:
        spin = inv.SpinCertificate(()).to_json()
    return {
        "spin": spin,
        "hopf": hopf,
        "coefficients": dict(sorted(coefficients.items())),
        "r_plus": {"scope": plus[0], "component": plus[1], "framing": 1, "unknotted": True},
        "r_minus": {"scope": minus[0], "component": minus[1], "framing": -1, "unknotted": True},
        "gn_blocks": b.gn_blocks,
    }


def hardorp_plan(kirby: KirbyInput) -> ConstructionPlan:
    b = _Builder()
    _hardorp_steps(b, MAIN, kirby, "hardorp")
    return ConstructionPlan(kirby, 0, b.scopes, tuple(b.steps), _certificate(b, MAIN, kirby, 0))


def build_gn(n: int) -> ConstructionPlan:
    """Plan for the S^3 block whose Hopf degree against R_+ is n."""
    b = _Builder()
    scope = _gn_steps(b, n, f"G[{n}]")
    value = b.hopf[scope]
    if not value.concrete:
        raise AssertionError("reference Hopf value failed to cancel")
    return ConstructionPlan(None, n, b.scopes, tuple(b.steps), _certificate(b, scope, None, value.value))


def total_plan(kirby: KirbyInput, hopf_offset: int) -> ConstructionPlan:
    b = _Builder()
    _hardorp_steps(b, MAIN, kirby, "hardorp")
    block = _gn_steps(b, hopf_offset, f"G[{hopf_offset}]")
    _glue(b, MAIN, block)
    value = b.hopf[MAIN]
    return ConstructionPlan(kirby, hopf_offset, b.scopes, tuple(b.steps),
                            _certificate(b, MAIN, kirby, value.value))


# --- verification -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    step: int | None
    error: str
    rule: str
    message: str

    def to_json(self) -> dict:
        return {"step": self.step, "error": self.error, "rule": self.rule, "message": self.message}


def verify_certificate(plan) -> list[Violation]:
    """Replay every step from scratch; return violated rules (empty = valid)."""
    if isinstance(plan, ConstructionPlan):
        plan = ConstructionPlan.from_json(json.loads(plan.dumps()))
    elif isinstance(plan, Mapping):
        plan = ConstructionPlan.from_json(plan)
    out: list[Violation] = []

    def bad(step, error, rule, message):
        out.append(Violation(step, error, rule, message))

    links: dict[str, bl.ClosedBraidLink] = {}
    aux_of: dict[str, tuple] = {}
    framing: dict[tuple[str, int], int] = {}
    live: dict[str, dict[tuple[str, int], int]] = {}
    hopf: dict[str, inv.HopfValue] = {}
    coefficients: dict[int, int] = {}
    turbularized: set[tuple[str, int]] = set()

    for name, info in sorted(plan.scopes.items()):
        try:
            word = BraidWord.from_signed(int(info["strands"]), info["word"])
            links[name] = bl.close(word)
        except (ValueError, KeyError) as exc:
            bad(None, "ParseError", "scope", f"scope {name}: {exc}")
            continue
        aux_of[name] = (info.get("aux_plus"), info.get("aux_minus"))
        labels = links[name].labels()
        if None in aux_of[name] or any(a not in labels for a in aux_of[name]) or aux_of[name][0] == aux_of[name][1]:
            bad(None, "MissingAuxiliaryUnknots", "hardorp", f"scope {name} lacks declared K+ / K- components")
        else:
            for a in aux_of[name]:
                if links[name].component(a).strand_count != 1:
                    bad(None, "MissingAuxiliaryUnknots", "hardorp", f"scope {name}: component {a} is not a 1-strand unknot")
        expected_start = [0, 1] if info.get("role") == "hardorp-S3" else [0, 0]
        if list(info.get("hopf_start", expected_start)) != expected_start:
            bad(None, "HopfMismatch", "hopf_origin", f"scope {name} starts from the wrong Hopf reference")
        hopf[name] = inv.HopfValue(*expected_start)
        live[name] = {}
        try:
            bl.parity_check(links[name])
        except bl.ParityViolation as exc:
            bad(None, "ParityViolation", "odd_framing", str(exc))

    if plan.kirby is not None:
        k = plan.kirby
        main = plan.scopes.get(MAIN, {})
        if None in (k.aux_plus, k.aux_minus) or (k.aux_plus, k.aux_minus) != aux_of.get(MAIN):
            bad(None, "MissingAuxiliaryUnknots", "hardorp", "input does not declare the K+ / K- of the main scope")
        if main.get("strands") != k.word.strands or list(main.get("word", [])) != k.word.signed():
            bad(None, "InputMismatch", "hardorp", "main scope braid differs from the declared input")

    m_star = plan.kirby.m_star if plan.kirby is not None else 0
    for idx, s in enumerate(plan.steps):
        if s.scope not in hopf and s.kind != BUILD_GN:
            bad(idx, "UnknownScope", s.rule, f"step acts on unknown or consumed scope {s.scope}")
            continue
        key = (s.scope, s.component)
        if s.kind == TURBULARIZE:
            link = links[s.scope]
            try:
                comp = link.component(s.component)
            except KeyError:
                bad(idx, "UnknownComponent", "any_braid", f"no component {s.component}")
                continue
            ms = s.get("m_star", m_star)
            psi0 = inv.trefoil_transport(1 - ms, ms, inv.PSI_K0_TO_PSI0)
            expected = bl.framing_from_braid(link, s.component, psi0)
            if (comp.writhe + comp.strand_count) % 2 != 1:
                bad(idx, "ParityViolation", "odd_framing", f"component {s.component} has even omega+n")
            if s.post != expected:
                bad(idx, "FramingMismatch", "any_braid", f"base framing {s.post}, expected omega+n = {expected}")
            framing[key] = expected
            turbularized.add(key)
        elif s.kind == INSERT_PLUG:
            if key not in framing:
                bad(idx, "UnknownComponent", "framing_change", f"plug on untracked component {s.component}")
                continue
            if s.pre != framing[key]:
                bad(idx, "FramingMismatch", "framing_change", f"pre {s.pre} but current framing {framing[key]}")
            delta = (s.post - s.pre) if isinstance(s.post, int) and isinstance(s.pre, int) else None
            if delta not in (2, -2) or delta != 2 * s.get("sign", 0):
                bad(idx, "ParityViolation", "framing_change", f"plug changes framing by {delta}, must be 2*sign")
            framing[key] = framing[key] + 2 * (1 if s.get("sign", 0) > 0 else -1)
        elif s.kind == STANDARD_SURGERY:
            if key not in framing:
                bad(idx, "UnknownComponent", "framing_of_surgery", f"surgery on untracked component {s.component}")
                continue
            if s.component in aux_of.get(s.scope, ()):
                bad(idx, "AuxiliarySurgered", "framing_of_surgery", "auxiliary unknots must stay R-components")
            if s.pre != framing[key]:
                bad(idx, "FramingMismatch", "framing_of_surgery", f"pre {s.pre} but current framing {framing[key]}")
            coef = inv.surgery_coefficient(framing[key])
            if s.post != coef:
                bad(idx, "CoefficientMismatch", "framing_of_surgery", f"coefficient {s.post}, expected k+1 = {coef}")
            if s.scope == MAIN:
                coefficients[s.component] = coef
            del framing[key]
        elif s.kind == ORIENTATION_REVERSE:
            _activate(s.scope, framing, live, aux_of)
            expected = inv.hopf_reverse(hopf[s.scope])
            if inv.HopfValue.from_json(s.pre) != hopf[s.scope] or inv.HopfValue.from_json(s.post) != expected:
                bad(idx, "HopfMismatch", "inversion_formula", f"recorded {s.pre}->{s.post}, expected -1-h = {expected.to_json()}")
            hopf[s.scope] = expected
            live[s.scope] = {k: -v for k, v in live[s.scope].items()}
        elif s.kind == GLUE_BLOCK:
            block = s.get("block")
            if block not in hopf:
                bad(idx, "UnknownScope", "gluing_formula", f"unknown block scope {block}")
                continue
            _activate(s.scope, framing, live, aux_of)
            _activate(block, framing, live, aux_of)
            base_key = (s.get("base_scope"), s.component)
            block_key = (s.get("block_scope"), s.get("block_component"))
            if base_key not in live[s.scope]:
                bad(idx, "MissingAuxiliaryUnknots", "gluing_formula", f"base R-component {base_key} unavailable")
            if live[block].get(block_key) != -1:
                bad(idx, "FlagMissing", "gluing_formula", f"block R-component {block_key} is not (-1)-framed")
            expected = inv.hopf_glue(hopf[s.scope], hopf[block])
            if inv.HopfValue.from_json(s.pre) != hopf[s.scope] or inv.HopfValue.from_json(s.post) != expected:
                bad(idx, "HopfMismatch", "gluing_formula", f"recorded {s.pre}->{s.post}, expected {expected.to_json()}")
            live[s.scope].pop(base_key, None)
            live[block].pop(block_key, None)
            live[s.scope].update(live.pop(block))
            hopf[s.scope] = expected
            del hopf[block]
        elif s.kind == BUILD_GN:
            n = s.get("n")
            value = hopf.get(s.scope)
            if value is None or value != inv.HopfValue(n):
                bad(idx, "HopfMismatch", "change_hopf", f"G_{n} ledger is {None if value is None else value.to_json()}")
        else:
            bad(idx, "UnknownStep", s.rule, f"unknown step kind {s.kind}")

    for name in list(hopf):
        _activate(name, framing, live, aux_of)
    _final_checks(plan, out, coefficients, hopf, live, framing, turbularized, links, aux_of)
    return out


def _activate(scope, framing, live, aux_of) -> None:
    """Once a scope starts being glued or reversed, its K+/K- become live R-components."""
    if live.get(scope) or scope not in aux_of:
        return
    for a in aux_of[scope]:
        if (scope, a) in framing:
            live[scope][(scope, a)] = framing.pop((scope, a))


def _final_checks(plan, out, coefficients, hopf, live, framing, turbularized, links, aux_of) -> None:
    def bad(error, rule, message):
        out.append(Violation(None, error, rule, message))

    for name, link in links.items():
        for c in link.labels():
            if (name, c) not in turbularized:
                bad("MissingStep", "any_braid", f"component {c} of scope {name} never became an R-component")
    kirby = plan.kirby
    if kirby is not None and MAIN in links:
        aux = (kirby.aux_plus, kirby.aux_minus)
        targets = {c: t for c, t in kirby.targets.items() if c not in aux}
        try:
            inv.evenness_check(targets)
        except inv.OddFraming as exc:
            bad("OddFraming", "surgery_formula", str(exc))
        for c in links[MAIN].labels():
            if c in aux:
                continue
            if coefficients.get(c) != targets.get(c):
                bad("CoefficientMismatch", "framing_of_surgery",
                    f"component {c}: coefficient {coefficients.get(c)} vs Kirby framing {targets.get(c)}")
    if len(hopf) != 1:
        bad("UnmergedScopes", "gluing_formula", f"plan ends with {len(hopf)} separate pieces: {sorted(hopf)}")
        return
    (final_scope, value), = hopf.items()
    cert = plan.certificate
    if not value.concrete:
        bad("HopfMismatch", "hopf_total", f"Hopf value still depends on the reference: {value.to_json()}")
    if value.value != plan.hopf_offset or cert.get("hopf") != plan.hopf_offset:
        bad("HopfMismatch", "hopf_total", f"ledger {value.value}, certificate {cert.get('hopf')}, requested {plan.hopf_offset}")
    pool = live.get(final_scope, {})
    for tag, sign in (("r_plus", 1), ("r_minus", -1)):
        if sign not in pool.values():
            bad("MissingAuxiliaryUnknots", "availability", f"no ({sign:+d})-framed unknotted R-component left")
            continue
        entry = cert.get(tag) or {}
        if pool.get((entry.get("scope"), entry.get("component"))) != sign:
            bad("CertificateMismatch", "availability", f"{tag} in certificate does not match the replayed ledger")
    if cert.get("coefficients") is not None:
        recorded = {int(k): v for k, v in cert["coefficients"].items()}
        if recorded != coefficients:
            bad("CertificateMismatch", "framing_of_surgery", f"certificate coefficients {recorded} vs replay {coefficients}")
