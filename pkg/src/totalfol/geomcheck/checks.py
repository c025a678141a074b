"""Numerical checks on model foliations and the rotation oracle."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import folblocks
from ..sl2z import GL2ZMatrix, IDENTITY
from . import bumps
from .models import (
    BlockModel,
    FormTriple,
    FunctionTriple,
    InverseModel,
    ReebChart,
    ShearModel,
    StdModel,
    model_for,
    reference_image,
)

__all__ = [
    "CheckReport",
    "SamplingTooCoarse",
    "eval_forms",
    "grid_points",
    "transversality_check",
    "frobenius_residual",
    "frobenius_check",
    "frobenius_convergence_check",
    "almost_horizontal_check",
    "boundary_gluing_check",
    "rotation_oracle",
    "oracle_concordance",
    "resolve_pending",
    "run_model_suite",
    "MAX_STEP_TURNS",
]

# largest angle increment (in turns) accepted between consecutive samples;
# the half-turn ambiguity of a line field makes anything near 1/4 unreliable
MAX_STEP_TURNS = 1 / 16


class SamplingTooCoarse(RuntimeError):
    pass


@dataclass
class CheckReport:
    name: str
    grid: dict
    tolerance: float
    value: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "grid": dict(self.grid),
            "tolerance": _finite(self.tolerance),
            "value": _finite(self.value),
            "passed": bool(self.passed),
            "details": {k: _finite(v) for k, v in self.details.items()},
        }


def _finite(v):
    """JSON has no infinities; spell them out."""
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def eval_forms(model: FormTriple, point) -> np.ndarray:
    """3x3 coefficient matrix at one point; rows are the forms, columns (dt, dx, dy)."""
    t, x, y = point
    return model.forms(np.array([t]), np.array([x]), np.array([y]))[:, :, 0]


def grid_points(model: FormTriple, size: int, t_range=(0.0, 1.0)):
    """Flattened cell-centre grid over the model's domain."""
    if size < 2:
        raise ValueError("grid size must be at least 2")
    u = (np.arange(size) + 0.5) / size
    t = t_range[0] + (t_range[1] - t_range[0]) * u
    if getattr(model, "domain", "block") == "chart":
        s = -1.0 + 2.0 * u
        x, y = s, s
    else:
        x, y = u, u
    T, X, Y = np.meshgrid(t, x, y, indexing="ij")
    return T.ravel(), X.ravel(), Y.ravel()


def _chunks(total: int, workers: int):
    if workers <= 1:
        return [slice(0, total)]
    step = -(-total // workers)
    return [slice(i, min(i + step, total)) for i in range(0, total, step)]


def _map_points(fn, arrays, workers: int):
    """Apply ``fn`` chunkwise; results come back in chunk order."""
    total = arrays[0].size
    parts = _chunks(total, workers)
    if len(parts) == 1:
        return [fn(*arrays)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: fn(*(a[s] for a in arrays)), parts))


# --- transversality -----------------------------------------------------------

def transversality_check(model: FormTriple, grid: int = 64, threshold: float = 0.5, workers: int = 1) -> CheckReport:
    pts = grid_points(model, grid)

    def part(t, x, y):
        f = model.forms(t, x, y)
        return float(np.min(np.abs(np.linalg.det(np.moveaxis(f, 2, 0)))))

    value = min(_map_points(part, pts, workers))
    return CheckReport("transversality", {"size": grid, "points": grid ** 3, "model": model.name},
                       threshold, value, value >= threshold, {"min_abs_det": value})


# --- integrability ------------------------------------------------------------

def frobenius_residual(model: FormTriple, t, x, y, h: float) -> np.ndarray:
    """|w ^ dw| per form at each point, derivatives by central differences; shape (3, N)."""
    w = model.forms(t, x, y)
    d = []
    for axis in range(3):
        shift = [np.zeros_like(t), np.zeros_like(t), np.zeros_like(t)]
        shift[axis] = np.full_like(t, h)
        plus = model.forms(t + shift[0], x + shift[1], y + shift[2])
        minus = model.forms(t - shift[0], x - shift[1], y - shift[2])
        d.append((plus - minus) / (2 * h))
    dt, dx, dy = d
    a, b, c = w[:, 0], w[:, 1], w[:, 2]
    curl_t = dx[:, 2] - dy[:, 1]
    curl_x = dy[:, 0] - dt[:, 2]
    curl_y = dt[:, 1] - dx[:, 0]
    return np.abs(a * curl_t + b * curl_x + c * curl_y)


def _frob_stats(model, pts, h, margin, workers):
    """(max, sum of squares, count) of the residual away from seams."""

    def part(t, x, y):
        r = frobenius_residual(model, t, x, y, h)
        r = r[:, ~model.seam_mask(t, x, y, margin)]
        return (float(r.max()) if r.size else 0.0, float((r ** 2).sum()), r.size)

    parts = _map_points(part, pts, workers)
    return max(p[0] for p in parts), sum(p[1] for p in parts), sum(p[2] for p in parts)


def _observed_order(fine, coarse, h, coarse_h, floor):
    if fine <= floor:
        return math.inf
    return math.log(max(coarse, floor) / fine) / math.log(coarse_h / h)


def frobenius_check(model: FormTriple, grid: int = 24, h: float = 1e-3, tol: float = 1e-5,
                    coarse_h: float = 1e-2, floor: float = 1e-12, workers: int = 1,
                    name: str = "frobenius") -> CheckReport:
    """Max Frobenius residual at spacing h plus the observed order against ``coarse_h``.

    The order comes from the RMS residual over the grid (the location of the
    max moves with h).  Passes when the max residual is within ``tol`` and
    either the order is at least 1.8 or the residual sits at round-off level.
    Grid points stay one coarse step away from t = 0, 1 and away from any
    seam of a piecewise model.
    """
    span = (coarse_h, 1.0 - coarse_h) if getattr(model, "domain", "block") == "block" else (0.0, 1.0)
    pts = grid_points(model, grid, span)
    margin = 2 * max(h, coarse_h)
    fine, ss_f, count = _frob_stats(model, pts, h, margin, workers)
    coarse, ss_c, _ = _frob_stats(model, pts, coarse_h, margin, workers)
    rms_f = math.sqrt(ss_f / max(count, 1))
    rms_c = math.sqrt(ss_c / max(count, 1))
    order = _observed_order(rms_f, rms_c, h, coarse_h, floor)
    converged = order >= 1.8
    passed = fine <= tol and converged
    details = {"residual": fine, "coarse_residual": coarse, "rms": rms_f, "coarse_rms": rms_c,
               "h": h, "coarse_h": coarse_h,
               "observed_order": order if math.isfinite(order) else "exact", "converged": converged}
    return CheckReport(name, {"size": grid, "points": grid ** 3, "model": model.name},
                       tol, fine, passed, details)


def frobenius_convergence_check(model: FormTriple, grid: int = 16, h: float = 5e-6,
                                min_order: float = 1.8, workers: int = 1) -> CheckReport:
    """Second-order decay of the Frobenius residual between h and 2h.

    For the sheared models the residual at moderate h is dominated by
    truncation error of the narrow bumps; what certifies integrability is that
    it vanishes at the rate of the difference scheme.
    """
    rep = frobenius_check(model, grid, h=h, coarse_h=2 * h, tol=math.inf, workers=workers,
                          name="frobenius_convergence")
    order = rep.details["observed_order"]
    value = math.inf if order == "exact" else order
    return CheckReport("frobenius_convergence", rep.grid, min_order, value, value >= min_order, rep.details)


# --- slope bound --------------------------------------------------------------

def _outside_boxes(t, x, n):
    frac = np.mod(x * n, 1.0)
    inside = (t > 0.25) & (t < 1 / 3) & (frac > 0.25) & (frac < 0.75)
    return ~inside


def almost_horizontal_check(model: FormTriple, region: str = "W0", grid: int = 48, n: int | None = None,
                            form: int = 0) -> CheckReport:
    """Slope bound dy(v)^2 <= eta^-2 (dt(v)^2 + dx(v)^2) on the kernel of one form.

    For a dt + b dx + c dy the bound is equivalent to sqrt(a^2 + b^2) <= |c| / eta.
    """
    if region not in ("W0", "full"):
        raise ValueError("region must be 'W0' or 'full'")
    n = n or getattr(model, "n", 1)
    t, x, y = grid_points(model, grid)
    if region == "W0":
        keep = _outside_boxes(t, x, n)
        t, x, y = t[keep], x[keep], y[keep]
    f = model.forms(t, x, y)[form]
    a, b, c = f
    limit = 1.0 / bumps.eta(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(np.abs(c) > 0, np.hypot(a, b) / np.abs(c), np.inf)
    value = float(slope.max())
    return CheckReport("almost_horizontal", {"size": grid, "region": region, "model": model.name},
                       limit, value, value <= limit, {"max_slope": value, "eta": bumps.eta(n)})


# --- boundary collars -----------------------------------------------------------

def _unit(f):
    return f / np.linalg.norm(f, axis=1, keepdims=True)


def _mismatch(f, g):
    u, v = _unit(f), _unit(g)
    diff = np.minimum(np.linalg.norm(u - v, axis=1), np.linalg.norm(u + v, axis=1))
    return float(diff.max()) if diff.size else 0.0


def boundary_gluing_check(model: BlockModel, twist: GL2ZMatrix | None = None, tol: float = 1e-9,
                          grid: int = 48, collar: float | None = None, eps: float = 1e-3) -> CheckReport:
    """Compare the block with std near t = 0 and with F_A(std) near t = 1.

    Plane fields are compared through unit normals up to sign.  Sample times
    are {0, eps} and {1 - eps, 1}, plus {collar, 1 - collar} when a collar
    width is given.
    """
    A = model.twist if twist is None else twist
    n = model.n
    u = (np.arange(grid) + 0.5) / grid
    X, Y = np.meshgrid(u, u, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    bottom = [0.0, eps] + ([collar] if collar else [])
    top = [1.0 - eps, 1.0] + ([1.0 - collar] if collar else [])
    std, img = StdModel(n), reference_image(A, n)
    worst_bottom = worst_top = 0.0
    for t0 in bottom:
        T = np.full_like(X, t0)
        worst_bottom = max(worst_bottom, _mismatch(model.forms(T, X, Y), std.forms(T, X, Y)))
    for t0 in top:
        T = np.full_like(X, t0)
        worst_top = max(worst_top, _mismatch(model.forms(T, X, Y), img.forms(T, X, Y)))
    value = max(worst_bottom, worst_top)
    return CheckReport("boundary_gluing", {"size": grid, "times": bottom + top, "model": model.name},
                       tol, value, value <= tol,
                       {"bottom": worst_bottom, "top": worst_top, "twist": A.to_list()})


# --- rotation oracle ------------------------------------------------------------

def _line_angles(f):
    """Angle (turns) of the line {b dx + c dy = 0} in the xy-plane, per sample."""
    b, c = f[1], f[2]
    return np.arctan2(-b, c) / (2 * math.pi)


def _winding(angles):
    inc = np.diff(angles)
    inc = np.mod(inc + 0.25, 0.5) - 0.25  # representative in [-1/4, 1/4)
    inc = np.where(inc == -0.25, 0.25, inc)
    worst = float(np.abs(inc).max()) if inc.size else 0.0
    if worst > MAX_STEP_TURNS:
        raise SamplingTooCoarse(f"angle step {worst:.4f} turns exceeds {MAX_STEP_TURNS}")
    return float(inc.sum())


def rotation_oracle(model: BlockModel, j: int = 0, samples: int = 400) -> tuple[float, float]:
    """Numerical (Theta_1, Theta_2) along string j.

    ``samples`` is the number of steps per elementary piece of the model.
    """
    ts = model.sample_times(samples)
    p = model.string_point(j, ts)
    f = model.forms(ts, p[0], p[1])
    return (_winding(_line_angles(f[0])), _winding(_line_angles(f[1])))


def oracle_concordance(block: folblocks.FolBlock, samples: int = 400, tol: float = 1e-3) -> CheckReport:
    """Ledger rotations of a block against the oracle on every string."""
    model = model_for(block)
    worst = 0.0
    per_string = []
    for j in range(block.strands):
        th = rotation_oracle(model, j, samples)
        per_string.append([th[0], th[1]])
        worst = max(worst, abs(th[0] - block.theta1[j]), abs(th[1] - block.theta2[j]))
    return CheckReport("rotation_concordance", {"samples_per_piece": samples, "model": model.name},
                       tol, worst, worst <= tol,
                       {"oracle": per_string, "ledger": [list(block.theta(j)) for j in range(block.strands)]})


def resolve_pending(n: int = 1, samples: int = 400, tol: float = 1e-3) -> dict:
    """Oracle verdict on every catalog block whose ledger value is derived, not stated."""
    out = {}
    for name in ("F1inv", "F2inv"):
        block = folblocks.catalog(name, n)
        th = rotation_oracle(model_for(block), 0, samples)
        ledger = block.theta(0)
        agree = max(abs(th[0] - ledger[0]), abs(th[1] - ledger[1])) <= tol
        out[name] = {"ledger": list(ledger), "oracle": list(th), "agree": agree}
    return out


# --- suite used by the command line -------------------------------------------

def _suite_models(n: int):
    return [StdModel(n), ShearModel(n), model_for(("F2",), n), InverseModel(model_for(("F2",), n)),
            model_for(folblocks.catalog("G", n)), ReebChart()]


def run_model_suite(grid: int = 64, n: int = 1, tol: float = 1e-5, workers: int = 1,
                    frob_grid: int = 24) -> list[CheckReport]:
    """Every geometric check on the catalog models; nothing is skipped."""
    reports: list[CheckReport] = []
    for model in _suite_models(n):
        reports.append(transversality_check(model, grid, workers=workers))
        if isinstance(model, (StdModel, ReebChart)):
            reports.append(frobenius_check(model, min(grid, frob_grid), tol=tol, workers=workers))
        else:
            reports.append(frobenius_convergence_check(model, min(grid, 16), workers=workers))
    for model in (StdModel(n), ShearModel(n)):
        reports.append(almost_horizontal_check(model, "W0", grid))
    reports.append(boundary_gluing_check(StdModel(n), IDENTITY, grid=grid))
    reports.append(boundary_gluing_check(ShearModel(n), grid=grid, collar=1 / 8))
    for name in ("F1", "F2", "F1inv", "F2inv", "G"):
        reports.append(oracle_concordance(folblocks.catalog(name, n)))
    g3 = folblocks.composite_power(folblocks.catalog("G", n), 3)
    reports.append(oracle_concordance(g3))
    return reports


def degenerate_triple(n: int = 1) -> FunctionTriple:
    """(std1, std1, std3): a repeated row, so never transverse."""
    std = StdModel(n)

    def row(k):
        return lambda t, x, y: tuple(std.forms(t, x, y)[k])

    return FunctionTriple([row(0), row(0), row(2)], name="degenerate")
