"""Evaluatable model foliations on [0,1] x T^2 and a solid-torus chart.

A model returns, for arrays of points (t, x, y), the coefficients of three
1-forms in the (dt, dx, dy) basis as an array of shape (3, 3, N): first
index = which foliation, second = which coefficient.  Block models also
expose their strings as lifted curves in R^2 and their twist matrix.
"""

from __future__ import annotations

import numpy as np

from .. import sl2z
from ..folblocks import IDENTITY_TAG
from ..sl2z import GL2ZMatrix, IDENTITY
from . import bumps

__all__ = [
    "NoModel",
    "FormTriple",
    "BlockModel",
    "StdModel",
    "ShearModel",
    "HolonomyModel",
    "TransposeModel",
    "InverseModel",
    "StackModel",
    "FunctionTriple",
    "ReebChart",
    "model_for",
    "reference_image",
]


class NoModel(LookupError):
    """The block has a ledger entry but no analytic model."""


def _arr(*vals):
    out = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in vals])
    return [np.ascontiguousarray(o).ravel() for o in out]


def _mat(A: GL2ZMatrix) -> np.ndarray:
    return np.array([[A.a, A.b], [A.c, A.d]], dtype=float)


class FormTriple:
    """Anything with ``forms(t, x, y) -> (3, 3, N)``."""

    name = "forms"
    domain = "block"  # or "chart" for the solid torus S^1 x D^2

    def forms(self, t, x, y) -> np.ndarray:
        raise NotImplementedError

    def seam_mask(self, t, x, y, margin: float) -> np.ndarray:
        """Points within ``margin`` of a place where the model is only piecewise smooth."""
        t, _, _ = _arr(t, x, y)
        return np.zeros(t.shape, dtype=bool)


class FunctionTriple(FormTriple):
    """Form triple from plain callables, e.g. for deliberately broken inputs."""

    def __init__(self, funcs, name: str = "custom", domain: str = "block"):
        self.funcs = list(funcs)
        self.name = name
        self.domain = domain

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        rows = []
        for f in self.funcs:
            a, b, c = f(t, x, y)
            rows.append(np.stack(_arr(a + 0 * t, b + 0 * t, c + 0 * t)))
        return np.stack(rows)


class BlockModel(FormTriple):
    n: int
    twist: GL2ZMatrix
    perm: tuple[int, ...]

    def string_point(self, j: int, t) -> np.ndarray:
        """Lifted (x, y) of string j at times t, shape (2, N)."""
        raise NotImplementedError

    def leaves(self) -> list[tuple[float, float]]:
        """Time intervals of the elementary pieces (for sampling)."""
        return [(0.0, 1.0)]

    def sample_times(self, per_leaf: int) -> np.ndarray:
        pieces = [np.linspace(a, b, per_leaf + 1) for a, b in self.leaves()]
        return np.unique(np.concatenate(pieces))


def _std_rows(t, x, y, n):
    zero, one = np.zeros_like(t), np.ones_like(t)
    c1y, c1x = bumps.chi_1(y, n), bumps.chi_1(x, n)
    b3 = bumps.chi_bar_1(t - 3 / 8, n) + bumps.chi_bar_1(t - 5 / 8, n)
    return np.stack([
        np.stack([zero, -c1y, one]),
        np.stack([zero, one, -c1x]),
        np.stack([one, zero, -b3]),
    ])


def _lattice(n: int, j: int) -> np.ndarray:
    return np.array([j / n, j / n])


class StdModel(BlockModel):
    def __init__(self, n: int = 1):
        self.n = n
        self.twist = IDENTITY
        self.perm = tuple(range(n))
        self.name = "std"

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        return _std_rows(t, x, y, self.n)

    def string_point(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.repeat(_lattice(self.n, j)[:, None], t.size, axis=1)


class ShearModel(BlockModel):
    """Standard triple pushed forward by (t, x, y) -> (t, x, y + beta(x, t)).

    beta vanishes for t <= 3/4, equals the band shear chi_3 just after 3/4 and
    the linear shear x from t = 7/8 on, so the block is F_{A1}(std) near the
    top.  The jump at t = 3/4 lives in the band of chi_3, away from all strings.
    """

    def __init__(self, n: int = 1):
        self.n = n
        self.twist = sl2z.A1
        self.perm = tuple(range(n))
        self.name = "F1"

    def _beta(self, t, x):
        xt = np.mod(x, 1.0)
        on = t > 0.75
        lam = bumps.shear_ramp(t)
        c3 = bumps.chi_3(xt, self.n)
        beta = np.where(on, c3 + lam * (xt - c3), 0.0)
        beta_x = np.where(on, bumps.chi_3_slope(xt, self.n) * (1 - lam) + lam, 0.0)
        beta_t = np.where(on, bumps.shear_ramp_slope(t) * (xt - c3), 0.0)
        return beta, beta_x, beta_t

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        n = self.n
        beta, bx, bt = self._beta(t, x)
        Y = y - beta
        c1Y, c1x = bumps.chi_1(Y, n), bumps.chi_1(x, n)
        b3 = bumps.chi_bar_1(t - 3 / 8, n) + bumps.chi_bar_1(t - 5 / 8, n)
        one = np.ones_like(t)
        return np.stack([
            np.stack([-bt, -bx - c1Y, one]),
            np.stack([c1x * bt, 1 + c1x * bx, -c1x]),
            np.stack([1 + b3 * bt, b3 * bx, -b3]),
        ])

    def seam_mask(self, t, x, y, margin):
        t, x, y = _arr(t, x, y)
        lo, hi = bumps._band(self.n)
        xt = np.mod(x, 1.0)
        return (np.abs(t - 0.75) < margin) & (xt > lo - margin) & (xt < hi + margin)

    def string_point(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        q = j / self.n
        beta, _, _ = self._beta(t, np.full_like(t, q))
        return np.stack([np.full_like(t, q), q + beta])


class HolonomyModel(BlockModel):
    """Standard triple with a Reeb-type flow inserted near tagged strings.

    On a tagged string the first (or second) foliation gains the term
    -mu'(t) * delta * chi_R((y - q_j)/delta) dt, so the leaf holonomy along the
    string is the time-one flow of chi_R after rescaling by delta.
    """

    def __init__(self, n: int, tags, scale: float):
        self.n = n
        self.twist = IDENTITY
        self.perm = tuple(range(n))
        self.tags = tuple(tuple(t) for t in tags)
        self.scale = scale
        self.name = "holonomy"
        if 2 * scale >= 3 / (8 * n):
            raise ValueError("holonomy scale too large for the standard bands")

    def _flow(self, s, axis):
        out = np.zeros_like(s)
        for j, pair in enumerate(self.tags):
            if pair[axis] == IDENTITY_TAG:
                continue
            u = np.mod(s - j / self.n + 0.5, 1.0) - 0.5
            out += self.scale * bumps.chi_R(u / self.scale)
        return out

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        rows = _std_rows(t, x, y, self.n)
        dmu = 2.0 * bumps.smooth_step_slope((t - 0.25) * 2.0)
        rows[0, 0] = -dmu * self._flow(y, 1)
        rows[1, 0] = -dmu * self._flow(x, 0)
        return rows

    def string_point(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.repeat(_lattice(self.n, j)[:, None], t.size, axis=1)


class TransposeModel(BlockModel):
    """Swap x and y and exchange the first two foliations."""

    def __init__(self, base: BlockModel):
        self.base = base
        self.n = base.n
        self.twist = sl2z.conj_xy(base.twist)
        self.perm = base.perm
        self.name = f"T({base.name})"

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        f = self.base.forms(t, y, x)
        f = f[[1, 0, 2]]
        return f[:, [0, 2, 1]]

    def seam_mask(self, t, x, y, margin):
        return self.base.seam_mask(t, y, x, margin)

    def string_point(self, j, t):
        p = self.base.string_point(j, t)
        return p[::-1].copy()

    def leaves(self):
        return self.base.leaves()


class InverseModel(BlockModel):
    """Time reversal followed by the inverse twist."""

    def __init__(self, base: BlockModel):
        self.base = base
        self.n = base.n
        self.twist = sl2z.inv(base.twist)
        self._A = _mat(base.twist)
        self._Ainv = _mat(self.twist)
        source = [0] * base.n
        for j, p in enumerate(base.perm):
            source[p] = j
        self._source = source
        self.perm = tuple(source)
        self.name = f"{base.name}^-1"

    def _pre(self, t, x, y):
        w = self._A @ np.stack([x, y])
        return 1.0 - t, w[0], w[1]

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        f = self.base.forms(*self._pre(t, x, y))
        out = np.empty_like(f)
        out[:, 0] = -f[:, 0]
        out[:, 1] = f[:, 1] * self._A[0, 0] + f[:, 2] * self._A[1, 0]
        out[:, 2] = f[:, 1] * self._A[0, 1] + f[:, 2] * self._A[1, 1]
        return out

    def seam_mask(self, t, x, y, margin):
        t, x, y = _arr(t, x, y)
        return self.base.seam_mask(*self._pre(t, x, y), margin)

    def string_point(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = self._source[j]
        back = self._Ainv @ self.base.string_point(s, 1.0 - t)
        end = self._Ainv @ self.base.string_point(s, np.array([1.0]))[:, 0]
        return back + (_lattice(self.n, j) - end)[:, None]

    def leaves(self):
        return sorted((1.0 - b, 1.0 - a) for a, b in self.base.leaves())


class StackModel(BlockModel):
    """``lower`` on [0, 1/2], ``upper`` pushed forward by lower's twist on [1/2, 1].

    This is the model of the ledger composite compose(upper, lower).
    """

    def __init__(self, upper: BlockModel, lower: BlockModel):
        if upper.n != lower.n:
            raise ValueError("strand counts differ")
        self.upper, self.lower = upper, lower
        self.n = upper.n
        self.twist = sl2z.mul(lower.twist, upper.twist)
        self._A = _mat(lower.twist)
        self._Ainv = _mat(sl2z.inv(lower.twist))
        self.perm = tuple(upper.perm[lower.perm[j]] for j in range(self.n))
        self.name = f"({upper.name}*{lower.name})"

    def _split(self, t):
        return t < 0.5

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        low = self._split(t)
        out = np.empty((3, 3, t.size))
        if low.any():
            f = self.lower.forms(2 * t[low], x[low], y[low])
            f[:, 0] *= 2
            out[:, :, low] = f
        high = ~low
        if high.any():
            w = self._Ainv @ np.stack([x[high], y[high]])
            f = self.upper.forms(2 * t[high] - 1, w[0], w[1])
            g = np.empty_like(f)
            g[:, 0] = 2 * f[:, 0]
            g[:, 1] = f[:, 1] * self._Ainv[0, 0] + f[:, 2] * self._Ainv[1, 0]
            g[:, 2] = f[:, 1] * self._Ainv[0, 1] + f[:, 2] * self._Ainv[1, 1]
            out[:, :, high] = g
        return out

    def seam_mask(self, t, x, y, margin):
        t, x, y = _arr(t, x, y)
        out = np.zeros(t.shape, dtype=bool)
        low = self._split(t)
        if low.any():
            out[low] = self.lower.seam_mask(2 * t[low], x[low], y[low], 2 * margin)
        high = ~low
        if high.any():
            w = self._Ainv @ np.stack([x[high], y[high]])
            out[high] = self.upper.seam_mask(2 * t[high] - 1, w[0], w[1], 2 * margin)
        return out

    def string_point(self, j, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((2, t.size))
        low = t < 0.5
        if low.any():
            out[:, low] = self.lower.string_point(j, 2 * t[low])
        high = ~low
        if high.any():
            s = self.lower.perm[j]
            joint = self.lower.string_point(j, np.array([1.0]))[:, 0]
            start = self._A @ self.upper.string_point(s, np.array([0.0]))[:, 0]
            out[:, high] = self._A @ self.upper.string_point(s, 2 * t[high] - 1) + (joint - start)[:, None]
        return out

    def leaves(self):
        low = [(a / 2, b / 2) for a, b in self.lower.leaves()]
        high = [(0.5 + a / 2, 0.5 + b / 2) for a, b in self.upper.leaves()]
        return low + high


class ReebChart(FormTriple):
    """Reeb pair plus dt on S^1 x D^2, coordinates (t, x, y) with x, y in [-1, 1]."""

    domain = "chart"

    def __init__(self):
        self.name = "reeb"

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        zero, one = np.zeros_like(t), np.ones_like(t)
        return np.stack([
            np.stack([-bumps.chi_R(y), zero, one]),
            np.stack([-bumps.chi_R(x), one, zero]),
            np.stack([one, zero, zero]),
        ])


def reference_image(A: GL2ZMatrix, n: int) -> BlockModel:
    """Standard triple pushed forward by the linear torus map A (time untouched)."""
    return _LinearImage(StdModel(n), A)


class _LinearImage(BlockModel):
    def __init__(self, base: BlockModel, A: GL2ZMatrix):
        self.base = base
        self.n = base.n
        self.twist = A
        self.perm = base.perm
        self._Ainv = _mat(sl2z.inv(A))
        self.name = f"F_A({base.name})"

    def forms(self, t, x, y):
        t, x, y = _arr(t, x, y)
        w = self._Ainv @ np.stack([x, y])
        f = self.base.forms(t, w[0], w[1])
        g = np.empty_like(f)
        g[:, 0] = f[:, 0]
        g[:, 1] = f[:, 1] * self._Ainv[0, 0] + f[:, 2] * self._Ainv[1, 0]
        g[:, 2] = f[:, 1] * self._Ainv[0, 1] + f[:, 2] * self._Ainv[1, 1]
        return g


def model_for(recipe, n: int = 1) -> BlockModel:
    """Analytic model for a block recipe (see ``FolBlock.recipe``)."""
    if hasattr(recipe, "recipe"):
        n = recipe.strands
        recipe = recipe.recipe
    head = recipe[0]
    if head == "std":
        return StdModel(n)
    if head == "F1":
        return ShearModel(n)
    if head == "F2":
        m = TransposeModel(ShearModel(n))
        m.name = "F2"
        return m
    if head == "F1inv":
        return InverseModel(ShearModel(n))
    if head == "F2inv":
        return InverseModel(model_for(("F2",), n))
    if head == "holonomy":
        _, tags, scale = recipe
        return HolonomyModel(n, tags, scale)
    if head == "rotation":
        m = recipe[1]
        if m == 0:
            return StdModel(n)
        g = StackModel(ShearModel(n), InverseModel(model_for(("F2",), n)))
        out: BlockModel = g
        for _ in range(6 * abs(m) - 1):
            out = StackModel(out, g)
        return out if m > 0 else InverseModel(out)
    if head == "compose":
        return StackModel(model_for(recipe[1], n), model_for(recipe[2], n))
    if head == "invert":
        return InverseModel(model_for(recipe[1], n))
    if head == "transpose":
        return TransposeModel(model_for(recipe[1], n))
    raise NoModel(f"no analytic model for block {head!r}")
