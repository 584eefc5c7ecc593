"""Equilibria, spectral radii and minimum-control-intensity estimates.

The module answers two questions about a map f and a state K:

* locally, how strong must the control be so that every equilibrium in a
  compact region becomes asymptotically stable?  That threshold is
  ``local_cstar`` applied to either the spectral radius of the Jacobian at
  the equilibrium or to the sampled row/column-sum bound ``bound_A``.
* globally, how strong must it be so that every orbit converges?  That is
  ``global_cstar`` applied to a Lipschitz-style constant L with
  ||f(x) - K|| <= L*||x - K||, estimated by ``lipschitz_estimate``.

All the sampled constants (A, L, M) are estimates from below of the true
suprema: grids plus low-discrepancy points keep the gap small and a 5%
inflation is applied to the sampled ratio, but none of them is certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .controls import ControlConfig, controlled_map
from .core import MapModel, as_state, norm

_EIG_DIRECT_LIMIT = 50
_FIXED_POINT_RESIDUAL = 1e-8


class ConvergenceError(RuntimeError):
    """Fixed-point search ran out of iterations; carries the best residual seen."""

    def __init__(self, message, best_point=None, best_residual=None):
        super().__init__(message)
        self.best_point = best_point
        self.best_residual = best_residual


def find_fixed_point(model: MapModel, x0, tol: float = 1e-10,
                     max_iter: int = 500) -> np.ndarray:
    """Solve f(x) = x by damped Newton iteration from ``x0``.

    Newton steps on f(x) - x use the model Jacobian (analytic when present,
    finite differences otherwise) and are halved up to 30 times whenever the
    residual would grow.  If damping stalls, 200 averaging steps
    x <- (x + f(x))/2 are interleaved, which converge whenever the map is a
    contraction in the averaged sense.  Iterates are projected onto the
    model domain.  Raises :class:`ConvergenceError` after ``max_iter``
    Newton steps without reaching ``tol`` in the max-norm.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(model.domain.project(as_state(x0, model.dimension)), float)
    eye = np.eye(model.dimension)

    def residual(y):
        return np.asarray(model.evaluate(y), float) - y

    r = residual(x)
    best = (float(np.max(np.abs(r))), x.copy())
    for _ in range(max_iter):
        rnorm = float(np.max(np.abs(r)))
        if rnorm < best[0]:
            best = (rnorm, x.copy())
        if rnorm < tol:
            out = x.copy()
            out.flags.writeable = False
            return out
        try:
            step = np.linalg.solve(model.jacobian_at(x) - eye, -r)
        except np.linalg.LinAlgError:
            step = None
        moved = False
        if step is not None and np.all(np.isfinite(step)):
            scale = 1.0
            for _ in range(30):
                cand = model.domain.project(x + scale * step)
                rc = residual(cand)
                if np.all(np.isfinite(rc)) and np.max(np.abs(rc)) < rnorm:
                    x, r = cand, rc
                    moved = True
                    break
                scale *= 0.5
        if not moved:
            # Newton stalled: fall back to Krasnoselskii-Mann averaging.
            for _ in range(200):
                x = model.domain.project(0.5 * (x + np.asarray(model.evaluate(x), float)))
                r = residual(x)
                rnorm = float(np.max(np.abs(r)))
                if rnorm < best[0]:
                    best = (rnorm, x.copy())
                if rnorm < tol:
                    out = x.copy()
                    out.flags.writeable = False
                    return out
    raise ConvergenceError(
        f"no fixed point within {max_iter} iterations (best residual {best[0]:.3e})",
        best_point=best[1], best_residual=best[0])


def multistart_fixed_points(model: MapModel, seeds, tol: float = 1e-10,
                            dedup: float = 1e-6) -> list:
    """Fixed points reached from each seed, deduplicated at max-norm distance ``dedup``."""
    found = []
    for s in seeds:
        try:
            x = find_fixed_point(model, s, tol=tol)
        except ConvergenceError:
            continue
        if all(np.max(np.abs(x - y)) > dedup for y in found):
            found.append(x)
    return found


def spectral_radius(m) -> float:
    """Largest eigenvalue modulus of a square matrix.

    Uses dense eigenvalues up to 50x50 and two-dimensional subspace (power)
    iteration with random restarts above that, which also handles spectra
    dominated by a complex pair.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("spectral_radius expects a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite matrix entries")
    n = m.shape[0]
    if n <= _EIG_DIRECT_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(m))))
    best = 0.0
    for restart in range(3):
        rng = np.random.default_rng(restart)
        q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
        est = 0.0
        for _ in range(5000):
            z = m @ q
            q, _ = np.linalg.qr(z)
            t = q.T @ (m @ q)
            new = float(np.max(np.abs(np.linalg.eigvals(t))))
            if abs(new - est) <= 1e-9 * (1.0 + new):
                est = new
                break
            est = new
        best = max(best, est)
    return best


def _halton(index: int, base: int) -> float:
    out, f, i = 0.0, 1.0 / base, index
    while i > 0:
        out += f * (i % base)
        i //= base
        f /= base
    return out


def _primes(count: int) -> list:
    out, cand = [], 2
    while len(out) < count:
        if all(cand % p for p in out):
            out.append(cand)
        cand += 1
    return out


def box_samples(lo, hi, n_samples: int) -> np.ndarray:
    """Deterministic samples of a box: corners, center, then a Halton prefix.

    Prefixes are nested, so enlarging ``n_samples`` only ever adds points;
    estimates built on these samples are monotone in ``n_samples``.
    """
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ValueError("box bounds must be vectors of equal length")
    if np.any(lo > hi):
        raise ValueError("box bounds must satisfy lo <= hi componentwise")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    d = lo.shape[0]
    pts = []
    if d <= 12:
        for mask in range(2 ** d):
            pts.append(np.where([(mask >> j) & 1 for j in range(d)], hi, lo))
    pts.append(0.5 * (lo + hi))
    bases = _primes(d)
    for i in range(1, n_samples + 1):
        u = np.array([_halton(i, b) for b in bases])
        pts.append(lo + u * (hi - lo))
    return np.asarray(pts)


def bound_A(model: MapModel, lo, hi, n_samples: int = 512) -> float:
    """min(max abs row sum, max abs col sum) of the Jacobian, sampled over a box.

    The row and column maxima are taken over the deterministic sample set of
    ``box_samples``; since any eigenvalue modulus is bounded by both the
    maximal row and column sums, the result bounds the spectral radius at
    every sampled state.
    """
    rows = 0.0
    cols = 0.0
    for x in box_samples(lo, hi, n_samples):
        j = np.abs(model.jacobian_at(x))
        rows = max(rows, float(np.max(j.sum(axis=1))))
        cols = max(cols, float(np.max(j.sum(axis=0))))
    return min(rows, cols)


def local_cstar(bound: float) -> float:
    """Minimum intensity that locally stabilizes: max(0, 1 - 1/bound).

    ``bound`` is a spectral radius or a row/column-sum bound; anything at or
    below 1 needs no control at all, so the threshold is 0 there.
    """
    bound = float(bound)
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if bound <= 1.0:
        return 0.0
    return 1.0 - 1.0 / bound


@dataclass(frozen=True)
class LipschitzEstimate:
    """Sampled Lipschitz-style constant L = max(ratio_part, bound_part).

    ratio_part  1.05 * sampled max of ||f(x)-K|| / ||x-K|| over box points
                within ||x-K|| <= ||K||
    bound_part  M/||K|| + 1 with M the sampled sup of ||f|| over the box
    """

    value: float
    ratio_part: float
    bound_part: float
    sup_f: float
    norm_kind: str
    n_samples: int

    def __float__(self):
        return self.value


def lipschitz_estimate(model: MapModel, k, lo, hi, n_samples: int = 2048,
                       norm_kind: str = "max") -> LipschitzEstimate:
    """Estimate L with ||f(x) - K|| <= L*||x - K|| from box samples.

    ``k`` must be a fixed point (residual below 1e-8) with nonzero norm.
    Near K the secant ratio is sampled directly (inflated by 5%); far from K
    the bound M/||K|| + 1 applies wherever the sampled sup M really bounds
    ||f||, i.e. on the sampled box only -- for maps unbounded on their full
    domain the estimate is valid on that compact restriction and nowhere
    else.
    """
    k = as_state(k, model.dimension)
    fk = np.asarray(model.evaluate(k), float)
    if norm(fk - k, "max") >= _FIXED_POINT_RESIDUAL:
        raise ValueError("K is not a fixed point of the model")
    nk = norm(k, norm_kind)
    if nk == 0.0:
        raise ValueError("K must have nonzero norm")
    sup_f = 0.0
    ratio = 0.0
    for x in box_samples(lo, hi, n_samples):
        fx = np.asarray(model.evaluate(x), float)
        sup_f = max(sup_f, norm(fx, norm_kind))
        dist = norm(x - k, norm_kind)
        if 0.0 < dist <= nk:
            ratio = max(ratio, norm(fx - k, norm_kind) / dist)
    ratio_part = 1.05 * ratio
    bound_part = sup_f / nk + 1.0
    return LipschitzEstimate(value=max(ratio_part, bound_part),
                             ratio_part=ratio_part, bound_part=bound_part,
                             sup_f=sup_f, norm_kind=norm_kind,
                             n_samples=n_samples)


def global_cstar(L) -> float:
    """Minimum intensity guaranteeing global convergence: 0 for L <= 1, else 1 - 1/L."""
    L = float(L)
    if L < 0:
        raise ValueError("L must be nonnegative")
    if L <= 1.0:
        return 0.0
    return 1.0 - 1.0 / L


def verify_contraction(model: MapModel, cfg: ControlConfig, k, L, x0,
                       n: int = 200, norm_kind: str = "max") -> Tuple[bool, float]:
    """Check the geometric-decay certificate along one controlled orbit.

    Requires a VMTOC control with T = K, K a fixed point of the model and
    c > global_cstar(L).  Iterates ``n`` steps from ``x0`` and tests the
    per-step ratio ||x' - K|| / ||x - K|| against theta = (1-c)*L, skipping
    steps with ||x - K|| below 1e-12.  Returns (all ratios within theta,
    maximum observed ratio).
    """
    k = as_state(k, model.dimension)
    L = float(L)
    if cfg.scheme != "VMTOC":
        raise ValueError("contraction certificate requires a VMTOC control")
    t = cfg.target_vector(model.dimension)
    if norm(t - k, "max") > 1e-12 * (1.0 + norm(k, "max")):
        raise ValueError("certificate requires target T = K")
    if norm(np.asarray(model.evaluate(k), float) - k, "max") >= _FIXED_POINT_RESIDUAL:
        raise ValueError("K is not a fixed point of the model")
    if cfg.intensity <= global_cstar(L):
        raise ValueError("intensity must exceed global_cstar(L)")
    theta = (1.0 - cfg.intensity) * L
    g = controlled_map(model, cfg)
    x = as_state(x0, model.dimension)
    worst = 0.0
    for _ in range(n):
        nxt = np.asarray(g.evaluate(x), float)
        d0 = norm(x - k, norm_kind)
        if d0 >= 1e-12:
            worst = max(worst, norm(nxt - k, norm_kind) / d0)
        x = nxt
    return worst <= theta + 1e-12, worst


@dataclass(frozen=True)
class StabilityReport:
    """Everything the stability command measures, with provenance strings."""

    equilibrium: tuple
    residual: float
    rho: float
    bound_a: float
    lipschitz: Optional[LipschitzEstimate]
    local_cstar_rho: float
    local_cstar_a: float
    global_cstar: Optional[float]
    provenance: dict = field(default_factory=dict)

    def to_lines(self) -> list:
        lines = []
        for i, v in enumerate(self.equilibrium):
            lines.append(f"equilibrium.{i} = {v:.17g}")
        lines.append(f"residual = {self.residual:.17g}")
        lines.append(f"rho = {self.rho:.17g}")
        lines.append(f"bound_a = {self.bound_a:.17g}")
        lines.append(f"local_cstar_rho = {self.local_cstar_rho:.17g}")
        lines.append(f"local_cstar_a = {self.local_cstar_a:.17g}")
        if self.lipschitz is not None:
            lines.append(f"lipschitz = {self.lipschitz.value:.17g}")
            lines.append(f"lipschitz.ratio_part = {self.lipschitz.ratio_part:.17g}")
            lines.append(f"lipschitz.bound_part = {self.lipschitz.bound_part:.17g}")
            lines.append(f"lipschitz.sup_f = {self.lipschitz.sup_f:.17g}")
        if self.global_cstar is not None:
            lines.append(f"global_cstar = {self.global_cstar:.17g}")
        for key, note in sorted(self.provenance.items()):
            lines.append(f"provenance.{key} = {note}")
        return lines


def stability_report(model: MapModel, x0, lo, hi, n_samples: int = 2048,
                     tol: float = 1e-12, norm_kind: str = "max") -> StabilityReport:
    """Assemble the full stability picture around the equilibrium reached from ``x0``.

    The sampling box [lo, hi] feeds both the row/column-sum bound and the
    Lipschitz estimate.  Every constant is a sampled estimate, not a
    certified supremum; the provenance entries say which formula produced
    each number, and warn when the equilibrium escaped the box.
    """
    eq = find_fixed_point(model, x0, tol=tol)
    res = norm(np.asarray(model.evaluate(eq), float) - eq, "max")
    rho = spectral_radius(model.jacobian_at(eq))
    a = bound_A(model, lo, hi, n_samples)
    prov = {
        "rho": "spectral radius of the Jacobian at the equilibrium",
        "bound_a": f"sampled estimate: min of max row/col sums over the box, {n_samples} samples",
        "local_cstar_rho": "max(0, 1 - 1/rho)",
        "local_cstar_a": "max(0, 1 - 1/bound_a)",
    }
    lo_arr = np.atleast_1d(np.asarray(lo, float))
    hi_arr = np.atleast_1d(np.asarray(hi, float))
    if np.any(eq < lo_arr) or np.any(eq > hi_arr):
        prov["box"] = "warning: equilibrium lies outside the sampling box"
    lip = None
    gc = None
    try:
        lip = lipschitz_estimate(model, eq, lo, hi, n_samples, norm_kind)
        gc = global_cstar(lip.value)
        prov["lipschitz"] = ("sampled estimate on the box only; "
                            "not valid beyond it if f is unbounded on the domain")
        prov["global_cstar"] = "0 if L <= 1 else 1 - 1/L"
    except ValueError as exc:
        prov["lipschitz"] = f"unavailable: {exc}"
    return StabilityReport(
        equilibrium=tuple(float(v) for v in eq), residual=res, rho=rho,
        bound_a=a, lipschitz=lip,
        local_cstar_rho=local_cstar(rho), local_cstar_a=local_cstar(a),
        global_cstar=gc, provenance=prov)
