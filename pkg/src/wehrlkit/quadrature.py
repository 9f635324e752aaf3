"""Numerical integration engine for phase-space and line densities.

Every analytic value in the package can be cross-checked here.  The
engine picks a coordinate system from the evaluator's ``kind`` hint
(radial, polar with an angular difference, whitened cartesian), runs a
deterministic composite rule, then doubles the resolution and compares.
The difference between the two finest levels is the reported error
estimate; if it misses the tolerance after the allowed escalations the
engine raises instead of returning a number it cannot defend.

Conventions: phase-space measure ``d^n x d^n p / (2 pi)^n``, line
measure ``dx``.  Densities enter through log values; points where a
density is below 1e-300 contribute exactly zero to entropy-type
integrands.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammainccinv, roots_hermite

from .errors import (
    DimensionMismatch,
    SupportViolation,
    ToleranceNotReached,
    UnsupportedState,
)
from .husimi import LOG_TINY, HusimiEvaluator, PositionDensity, ProductHusimi

# Proxy threshold: a state "has mass" at a point when Q exceeds this.
LOG_SUPPORT = math.log(1e-12)

_PANEL_NODES = 16
_GL_NODES, _GL_WEIGHTS = leggauss(_PANEL_NODES)

_STRATEGIES = ("auto", "radial-1d", "polar-2d", "polar-reduced-3d", "tensor-cartesian")


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution and tolerance knobs for the integration engine.

    ``radial_nodes`` counts nodes along a radial or line coordinate,
    ``angular_nodes`` the midpoint samples of a periodic angle, and
    ``cartesian_nodes_per_dim`` the Gauss-Hermite order per axis.  The
    engine always computes one refinement (all counts doubled) to get an
    error estimate, then up to ``max_escalations`` further doublings.
    ``radial_cutoff`` of None means the cutoff is solved from the
    integrand's Gamma-type tail.  ``parallelism`` > 1 maps independent
    chunks over a thread pool; results are reduced pairwise in a fixed
    order, so the value does not depend on the worker count.
    """

    strategy: str = "auto"
    radial_nodes: int = 400
    angular_nodes: int = 128
    cartesian_nodes_per_dim: int = 24
    radial_cutoff: float | None = None
    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_escalations: int = 3
    parallelism: int = 1

    def __post_init__(self):
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}, pick from {_STRATEGIES}")
        if self.radial_nodes < _PANEL_NODES:
            raise ValueError(f"radial_nodes must be at least {_PANEL_NODES}")
        if self.angular_nodes < 4:
            raise ValueError("angular_nodes must be at least 4")
        if self.cartesian_nodes_per_dim < 2:
            raise ValueError("cartesian_nodes_per_dim must be at least 2")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be nonnegative")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")


@dataclass(frozen=True)
class IntegralResult:
    """Value plus the honest two-level error estimate that backed it."""

    value: float
    error_estimate: float
    nodes_used: int


def _pairwise(values) -> float:
    """Deterministic pairwise reduction, independent of chunking order."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = []
        for i in range(0, len(vals) - 1, 2):
            nxt.append(vals[i] + vals[i + 1])
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _map_chunks(fn, items, parallelism: int):
    items = list(items)
    if parallelism <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items))


def _tail_mass(spec: QuadratureSpec) -> float:
    return max(1e-18, 1e-2 * min(spec.abs_tol, spec.rel_tol))


def gamma_tail_threshold(shape: float, rate: float, tail_mass: float) -> float:
    """Radius beyond which a Gamma-enveloped integrand is negligible.

    For integrands bounded by r^(2 shape) exp(-rate r^2 / 2) times slowly
    varying factors, returns R such that the mass beyond R is below
    ``tail_mass`` relative to the whole.  The shape is padded by two to
    absorb the radial Jacobian and logarithmic entropy factors.
    """
    if rate <= 0:
        raise ValueError("tail rate must be positive")
    s = float(gammainccinv(shape + 2.0, tail_mass))
    return math.sqrt(2.0 * s / rate)


def _panel_nodes(a: float, b: float, n_nodes: int, breakpoints=()):
    """Composite Gauss-Legendre nodes on [a, b] with panel edges at breakpoints."""
    edges = sorted({a, b, *(float(p) for p in breakpoints if a < float(p) < b)})
    total = b - a
    n_panels = max(1, int(n_nodes) // _PANEL_NODES)
    lows, highs = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, round(n_panels * (hi - lo) / total))
        step = (hi - lo) / k
        for i in range(k):
            lows.append(lo + i * step)
            highs.append(lo + (i + 1) * step)
    lows = np.asarray(lows)
    highs = np.asarray(highs)
    half = 0.5 * (highs - lows)
    mid = 0.5 * (highs + lows)
    x = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return x, w


def _escalated(eval_at, base, spec: QuadratureSpec, grow, what: str) -> IntegralResult:
    """Run eval_at on doubling resolutions until two levels agree."""
    level = base
    value_prev, count = eval_at(level)
    total_nodes = count
    attempts = spec.max_escalations
    err = math.inf
    while True:
        level_next = grow(level)
        if level_next == level:
            raise ToleranceNotReached(
                f"{what}: node ceiling reached at error {err:.3e} "
                f"(abs_tol={spec.abs_tol:.1e}, rel_tol={spec.rel_tol:.1e})",
                result=IntegralResult(float(value_prev), float(err), int(total_nodes)),
            )
        value_cur, count = eval_at(level_next)
        total_nodes += count
        err = abs(value_cur - value_prev)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(value_cur)):
            return IntegralResult(float(value_cur), float(err), int(total_nodes))
        if attempts == 0:
            raise ToleranceNotReached(
                f"{what}: refinement stalled at error {err:.3e} "
                f"(abs_tol={spec.abs_tol:.1e}, rel_tol={spec.rel_tol:.1e})",
                result=IntegralResult(float(value_cur), float(err), int(total_nodes)),
            )
        attempts -= 1
        level, value_prev = level_next, value_cur


def _masked_contrib(logmass, factor):
    """exp(logmass) * factor with exact zeros wherever the mass underflows."""
    logmass = np.asarray(logmass, dtype=float)
    out = np.zeros(logmass.shape)
    m = logmass > LOG_TINY
    if np.any(m):
        f = factor[m] if isinstance(factor, np.ndarray) else factor
        out[m] = np.exp(logmass[m]) * f
    return out


# ---------------------------------------------------------------------------
# Coordinate-system runners.  Each integrates exp(logmass) * factor against
# the phase-space measure, where (logmass, factor) come from a callback.
# ---------------------------------------------------------------------------


def _run_radial(log_pair_of_r, shape, rate, spec: QuadratureSpec, what: str) -> IntegralResult:
    cutoff = spec.radial_cutoff
    if cutoff is None:
        cutoff = gamma_tail_threshold(shape, rate, _tail_mass(spec))

    def eval_at(n):
        r, w = _panel_nodes(0.0, cutoff, n)
        logmass, factor = log_pair_of_r(r)
        g = _masked_contrib(logmass, factor) * r
        return float(np.dot(w, g)), r.size

    return _escalated(eval_at, spec.radial_nodes, spec, lambda n: 2 * n, what)


def _run_line(log_pair_of_x, shape, rate, breakpoints, spec: QuadratureSpec,
              what: str, tail_log_margin: float = 0.0) -> IntegralResult:
    """Even density on the real line: twice the integral over [0, cutoff]."""
    cutoff = spec.radial_cutoff
    if cutoff is None:
        mass = max(_tail_mass(spec) * math.exp(-min(tail_log_margin, 600.0)), 1e-280)
        cutoff = gamma_tail_threshold(shape, rate, mass)
    pos_breaks = tuple(abs(b) for b in breakpoints if abs(b) > 0.0)

    def eval_at(n):
        x, w = _panel_nodes(0.0, cutoff, n, breakpoints=pos_breaks)
        logmass, factor = log_pair_of_x(x)
        g = _masked_contrib(logmass, factor)
        return 2.0 * float(np.dot(w, g)), x.size

    return _escalated(eval_at, spec.radial_nodes, spec, lambda n: 2 * n, what)


def _run_polar_pair(evaluator, pair_factory, spec: QuadratureSpec, what: str) -> IntegralResult:
    """Two radial coordinates plus one periodic angular difference.

    The angular integral is taken over one period of the evaluator's
    angular frequency, which leaves the substituted variable's cost
    independent of that frequency.  Frequency zero drops the angular
    axis entirely, leaving a plain two-radius integral.

    ``pair_factory(ra, rb)`` returns the map log Q -> (logmass, factor)
    for that radial grid, so grid-dependent reference densities (for
    relative entropies) are computed once per level, not per angle.
    """
    freq = int(evaluator.angular_frequency)
    cutoff = spec.radial_cutoff
    if cutoff is None:
        cutoff = gamma_tail_threshold(
            evaluator.radial_gamma_shape + 1.0, evaluator.radial_rate, _tail_mass(spec)
        )

    def eval_at(level):
        nr, na = level
        r, w = _panel_nodes(0.0, cutoff, nr)
        wr_a = (w * r)[:, None]
        wr_b = (w * r)[None, :]
        ra = r[:, None]
        rb = r[None, :]
        if hasattr(evaluator, "polar_slab_factory"):
            slab_log = evaluator.polar_slab_factory(ra, rb)
        else:
            slab_log = lambda cu: evaluator.log_q_polar_cos(ra, rb, cu)
        pair = pair_factory(ra, rb)

        def slab(cos_u):
            logmass, factor = pair(slab_log(cos_u))
            g = _masked_contrib(logmass, factor)
            return float(np.sum(wr_a * wr_b * g))

        if freq == 0:
            return slab(1.0), r.size * r.size
        u = (np.arange(na) + 0.5) * (2.0 * math.pi / na)
        parts = _map_chunks(slab, np.cos(u), spec.parallelism)
        return _pairwise(parts) / na, r.size * r.size * na

    base = (max(2 * _PANEL_NODES, spec.radial_nodes // 2), spec.angular_nodes)
    if freq == 0:
        grow = lambda lv: (2 * lv[0], lv[1])
    else:
        grow = lambda lv: (2 * lv[0], 2 * lv[1])
    return _escalated(eval_at, base, spec, grow, what)


def _run_cartesian(dim, envelope, log_pair_of_points, spec: QuadratureSpec,
                   what: str) -> IntegralResult:
    """Gauss-Hermite rule whitened by a Gaussian envelope (sigma, mean).

    Per-dimension log-weights are carried as ln(w) + t^2, which stays
    bounded, so the reweighting never overflows.  Node counts are capped
    where the weight computation itself stays stable.
    """
    sigma, mean = envelope
    sigma = np.asarray(sigma, dtype=float)
    mean = np.asarray(mean, dtype=float)
    chol = np.linalg.cholesky(sigma)
    log_pref = float(np.sum(np.log(np.diag(chol)))) - 0.5 * dim * math.log(math.pi)
    scale = math.sqrt(2.0) * chol

    def eval_at(m):
        t, w = roots_hermite(m)
        lw = np.log(w) + t * t
        rest = m ** (dim - 1)
        chunk_len = max(1, 500_000 // rest)
        starts = range(0, m, chunk_len)

        def do_chunk(start):
            stop = min(start + chunk_len, m)
            axes_t = [t[start:stop]] + [t] * (dim - 1)
            axes_lw = [lw[start:stop]] + [lw] * (dim - 1)
            grid_t = np.meshgrid(*axes_t, indexing="ij")
            tpts = np.stack([g.reshape(-1) for g in grid_t], axis=-1)
            lw_sum = np.zeros(tpts.shape[0])
            grid_lw = np.meshgrid(*axes_lw, indexing="ij")
            for g in grid_lw:
                lw_sum += g.reshape(-1)
            pts = tpts @ scale.T + mean
            logmass, factor = log_pair_of_points(pts)
            return float(np.sum(_masked_contrib(logmass + lw_sum, factor)))

        parts = _map_chunks(do_chunk, starts, spec.parallelism)
        return math.exp(log_pref) * _pairwise(parts), m**dim

    # Beyond four dimensions each doubling is eight-fold work or worse;
    # one extra refinement is the pragmatic ceiling there.  The per-axis
    # cap keeps the Hermite weight computation in its stable regime.
    eff_spec = spec
    if dim >= 4 and spec.max_escalations > 1:
        eff_spec = replace(spec, max_escalations=1)
    grow = lambda n: min(2 * n, 384)
    return _escalated(eval_at, min(spec.cartesian_nodes_per_dim, 384), eff_spec, grow, what)


# ---------------------------------------------------------------------------
# Integrand factories
# ---------------------------------------------------------------------------


def _entropy_factor(logq):
    return -np.asarray(logq, dtype=float)


def _unit_factor(logq):
    return 1.0


def _strategy_for(evaluator: HusimiEvaluator, spec: QuadratureSpec) -> str:
    if spec.strategy != "auto":
        return spec.strategy
    kind = getattr(evaluator, "kind", "generic")
    if kind == "radial":
        return "radial-1d"
    if kind == "noon":
        if int(getattr(evaluator, "angular_frequency", 0)) == 0:
            return "polar-2d"
        return "polar-reduced-3d"
    return "tensor-cartesian"


def _require_radial(evaluator):
    if not hasattr(evaluator, "log_q_radial"):
        raise UnsupportedState(
            f"{type(evaluator).__name__} exposes no radial profile; "
            "pick a different strategy"
        )


def _require_envelope(evaluator):
    if not hasattr(evaluator, "gaussian_envelope"):
        raise UnsupportedState(
            f"{type(evaluator).__name__} advertises no Gaussian envelope, "
            "so the cartesian rule has nothing to whiten against"
        )
    return evaluator.gaussian_envelope()


def _functional(evaluator: HusimiEvaluator, factor_of_log, spec: QuadratureSpec,
                what: str) -> IntegralResult:
    strategy = _strategy_for(evaluator, spec)
    if strategy == "radial-1d":
        _require_radial(evaluator)

        def pair_r(r):
            logq = evaluator.log_q_radial(r)
            return logq, factor_of_log(logq)

        return _run_radial(pair_r, evaluator.radial_gamma_shape,
                           evaluator.radial_rate, spec, what)
    if strategy in ("polar-2d", "polar-reduced-3d"):
        if getattr(evaluator, "kind", None) != "noon":
            raise UnsupportedState("polar strategies need an angular-difference evaluator")
        if strategy == "polar-2d" and int(evaluator.angular_frequency) != 0:
            raise UnsupportedState(
                "polar-2d drops the angle; this density still depends on it"
            )
        return _run_polar_pair(
            evaluator, lambda ra, rb: (lambda logq: (logq, factor_of_log(logq))),
            spec, what,
        )
    if strategy == "tensor-cartesian":
        envelope = _require_envelope(evaluator)

        def pair_pts(pts):
            logq = evaluator.log_q(pts)
            return logq, factor_of_log(logq)

        return _run_cartesian(evaluator.dim, envelope, pair_pts, spec, what)
    raise UnsupportedState(f"no runner for strategy {strategy!r}")


def entropy_functional(evaluator: HusimiEvaluator,
                       spec: QuadratureSpec | None = None) -> IntegralResult:
    """- integral of Q ln Q over phase space."""
    spec = spec or QuadratureSpec()
    if isinstance(evaluator, ProductHusimi) and spec.strategy == "auto":
        # Entropy is additive over independent factors.
        part_a = entropy_functional(evaluator.factor_a, spec)
        part_b = entropy_functional(evaluator.factor_b, spec)
        return IntegralResult(
            part_a.value + part_b.value,
            part_a.error_estimate + part_b.error_estimate,
            part_a.nodes_used + part_b.nodes_used,
        )
    return _functional(evaluator, _entropy_factor, spec, "entropy functional")


def normalization(evaluator: HusimiEvaluator,
                  spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral of Q over phase space; one for any valid density."""
    spec = spec or QuadratureSpec()
    if isinstance(evaluator, ProductHusimi) and spec.strategy == "auto":
        part_a = normalization(evaluator.factor_a, spec)
        part_b = normalization(evaluator.factor_b, spec)
        return IntegralResult(
            part_a.value * part_b.value,
            abs(part_a.value) * part_b.error_estimate
            + abs(part_b.value) * part_a.error_estimate,
            part_a.nodes_used + part_b.nodes_used,
        )
    return _functional(evaluator, _unit_factor, spec, "normalization")


def integrate(f, spec: QuadratureSpec | None = None, *, dim: int = 2,
              envelope=None) -> IntegralResult:
    """Integral of a plain callable against the phase-space measure.

    ``f`` maps an (m, dim) array of phase-space points to m values and
    must contain every density factor itself.  ``envelope`` is the
    (sigma, mean) whitening hint for the Gauss-Hermite grid; the default
    is the vacuum envelope (unit covariance at the origin), under which
    integrating the vacuum Gaussian exp(-|r|^2 / 2) returns the measure
    normalization 1.  Integrands decaying slower than the envelope need
    an explicit, wider one.
    """
    spec = spec or QuadratureSpec()
    if dim < 1:
        raise ValueError("dim must be at least 1")
    if envelope is None:
        envelope = (np.eye(dim), np.zeros(dim))

    def pair_pts(pts):
        vals = np.asarray(f(pts), dtype=float)
        if vals.shape != (pts.shape[0],):
            raise DimensionMismatch(
                f"integrand returned shape {vals.shape} for {pts.shape[0]} points"
            )
        return np.zeros(vals.shape), vals

    return _run_cartesian(dim, envelope, pair_pts, spec, "integral")


def relative_entropy(rho: HusimiEvaluator, sigma: HusimiEvaluator,
                     spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral of Q_rho (ln Q_rho - ln Q_sigma) over phase space.

    Raises SupportViolation when some node carries appreciable Q_rho mass
    (above 1e-12) while Q_sigma has already underflowed (below 1e-300):
    there the integrand is effectively pinned to a cutoff and the finite
    number returned would be meaningless.
    """
    spec = spec or QuadratureSpec()
    if rho.dim != sigma.dim:
        raise DimensionMismatch(
            f"densities live on {rho.dim} and {sigma.dim} coordinates"
        )
    violated = {"flag": False}
    floor = 2.0 * LOG_TINY

    def combine(logp, logs):
        logp = np.asarray(logp, dtype=float)
        logs = np.asarray(logs, dtype=float)
        if np.any((logp > LOG_SUPPORT) & (logs < LOG_TINY)):
            violated["flag"] = True
        return logp, logp - np.maximum(logs, floor)

    both_radial = hasattr(rho, "log_q_radial") and hasattr(sigma, "log_q_radial")
    noon_vs_radial_product = (
        getattr(rho, "kind", None) == "noon"
        and isinstance(sigma, ProductHusimi)
        and hasattr(sigma.factor_a, "log_q_radial")
        and hasattr(sigma.factor_b, "log_q_radial")
    )
    if spec.strategy == "auto":
        route = ("radial" if both_radial
                 else "polar" if noon_vs_radial_product else "cartesian")
    elif spec.strategy == "radial-1d":
        if not both_radial:
            raise UnsupportedState(
                "radial-1d relative entropy needs radial profiles on both densities"
            )
        route = "radial"
    elif spec.strategy in ("polar-2d", "polar-reduced-3d"):
        if not noon_vs_radial_product:
            raise UnsupportedState(
                "polar relative entropy needs an angular-difference density "
                "against a product of radial marginals"
            )
        if spec.strategy == "polar-2d" and int(rho.angular_frequency) != 0:
            raise UnsupportedState(
                "polar-2d drops the angle; this density still depends on it"
            )
        route = "polar"
    else:
        route = "cartesian"

    if route == "radial":
        def pair_r(r):
            return combine(rho.log_q_radial(r), sigma.log_q_radial(r))

        shape = max(rho.radial_gamma_shape, sigma.radial_gamma_shape)
        rate = min(rho.radial_rate, sigma.radial_rate)
        result = _run_radial(pair_r, shape, rate, spec, "relative entropy")
    elif route == "polar":
        # The reference factorizes over the two radii, so the same
        # angle-reduced grid serves the relative entropy.
        def pair_factory(ra, rb):
            logs = sigma.factor_a.log_q_radial(ra) + sigma.factor_b.log_q_radial(rb)
            return lambda logp: combine(logp, np.broadcast_to(logs, logp.shape))

        result = _run_polar_pair(rho, pair_factory, spec, "relative entropy")
    else:
        envelope = _require_envelope(rho)

        def pair_pts(pts):
            return combine(rho.log_q(pts), sigma.log_q(pts))

        result = _run_cartesian(rho.dim, envelope, pair_pts, spec, "relative entropy")
    if violated["flag"]:
        raise SupportViolation(
            "first density keeps mass where the second has none; "
            "the relative entropy diverges at this resolution"
        )
    return result


def density_entropy_1d(density: PositionDensity,
                       spec: QuadratureSpec | None = None) -> IntegralResult:
    """Differential entropy - integral of f ln f dx of an even line density."""
    spec = spec or QuadratureSpec()

    def pair_x(x):
        logf = density.log_f(x)
        return logf, _entropy_factor(logf)

    return _run_line(pair_x, density.position_gamma_shape, density.position_rate,
                     density.breakpoints, spec, "line entropy",
                     getattr(density, "position_tail_log_margin", 0.0))


def density_normalization_1d(density: PositionDensity,
                             spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral of an even line density f dx; one when normalized."""
    spec = spec or QuadratureSpec()

    def pair_x(x):
        return density.log_f(x), 1.0

    return _run_line(pair_x, density.position_gamma_shape, density.position_rate,
                     density.breakpoints, spec, "line normalization",
                     getattr(density, "position_tail_log_margin", 0.0))
