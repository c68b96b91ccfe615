"""Bloch-type norms, the growth function G_t, pointwise growth and Lipschitz
estimates, and the F(p,q,s) seminorm.

All suprema are estimated from samples on boundary shells ``r_j = 1 - 2^-j``
plus a local refinement, so every norm reported here is a *lower* estimate
of the true value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .geometry import BallPoint, norm_sq
from .quadrature import QuadratureSpec, integrate_green_weighted, integrate
from .sampling import golden_section_max, keyed_directions, shell_radii, shell_samples, stream
from .symbols import HoloExpr

Number = Fraction | float

#: Tolerance of the k = 1 test when parameters are not exact rationals.
UNIT_TOL = 1e-12


class ParamError(ValueError):
    """Parameters outside the admissible range of the function spaces."""

    def __init__(self, message: str, field_name: str = ""):
        self.field = field_name
        super().__init__(f"{field_name}: {message}" if field_name else message)


def exact(x, name: str = "") -> Number:
    """Parse ``x`` as an exact rational when it is a string or int, else a float."""
    if isinstance(x, bool):
        raise ParamError(f"expected a number, got {x!r}", name)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ParamError(f"malformed number {x!r}", name) from None
    if isinstance(x, float) and math.isfinite(x):
        return x
    raise ParamError(f"expected a finite number, got {x!r}", name)


def regime_of(t: Number) -> str:
    """``'k<1'``, ``'k=1'`` or ``'k>1'``; exact for rationals."""
    if isinstance(t, Fraction):
        return "k<1" if t < 1 else ("k=1" if t == 1 else "k>1")
    if abs(t - 1.0) < UNIT_TOL:
        return "k=1"
    return "k<1" if t < 1 else "k>1"


@dataclass(frozen=True)
class SpaceParams:
    """``(n, p, q, s, alpha)`` for ``F(p,q,s) -> beta^alpha``; ``s = 0`` selects F(p,q,0)."""

    n: int
    p: Number
    q: Number
    s: Number
    alpha: Number

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParamError("dimension must be a positive integer", "n")
        for name in ("p", "q", "s", "alpha"):
            object.__setattr__(self, name, exact(getattr(self, name), name))
        p, q, s, a, n = self.p, self.q, self.s, self.alpha, self.n
        if not p > 0:
            raise ParamError("need 0 < p", "p")
        if not s >= 0:
            raise ParamError("need s >= 0", "s")
        if not q > -n - 1:
            raise ParamError(f"need q > -n-1 = {-n - 1}", "q")
        if not q + s > -1:
            raise ParamError("need q + s > -1", "q")
        if not a >= 0:
            raise ParamError("need alpha >= 0", "alpha")

    @property
    def k(self) -> Number:
        """Critical exponent ``(q + n + 1) / p``."""
        if isinstance(self.p, Fraction) and isinstance(self.q, Fraction):
            return (self.q + self.n + 1) / self.p
        return (float(self.q) + self.n + 1) / float(self.p)

    @property
    def regime(self) -> str:
        return regime_of(self.k)

    def to_dict(self) -> dict:
        return {"n": self.n, "p": str(self.p), "q": str(self.q), "s": str(self.s),
                "alpha": str(self.alpha), "k": str(self.k), "regime": self.regime}


# ------------------------------------------------------------------ G_t

def g_growth_sq(t: Number, nsq) -> np.ndarray | float:
    """``G_t`` as a function of ``|omega|^2`` (vectorised)."""
    if not t > 0:
        raise ValueError("t must be positive")
    nsq = np.asarray(nsq, dtype=float)
    reg = regime_of(t)
    if reg == "k<1":
        out = np.ones_like(nsq)
    elif reg == "k=1":
        out = np.log(2.0 / (1.0 - nsq))
    else:
        out = (1.0 / (1.0 - nsq)) ** (float(t) - 1.0)
    return float(out) if out.ndim == 0 else out


def g_growth(t: Number, omega) -> float:
    """The growth function: 1 (t<1), log(2/(1-|w|^2)) (t=1), (1-|w|^2)^{1-t} (t>1)."""
    if isinstance(omega, BallPoint):
        nsq = omega.norm_sq
    else:
        nsq = norm_sq(np.asarray(omega, dtype=np.complex128))
    return float(g_growth_sq(t, nsq))


# -------------------------------------------------------------- sup search

@dataclass(frozen=True)
class ShellConfig:
    """Boundary-shell sampler for suprema over the ball."""

    levels: int = 10
    per_shell: int = 256
    seed: int = 0
    refine: bool = True
    refine_iters: int = 400

    @property
    def r_cap(self) -> float:
        return 1.0 - 2.0 ** -(self.levels + 4)


@dataclass(frozen=True)
class NormEstimate:
    """A sampled (lower) estimate of a norm ``|f(0)| + sup term``."""

    value: float
    argmax_point: np.ndarray
    shell_profile: tuple[tuple[float, float], ...]
    f0: float = 0.0
    diverging: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def sup_term(self) -> float:
        return self.value - self.f0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "f0": self.f0,
            "argmax_point": [[float(c.real), float(c.imag)] for c in self.argmax_point],
            "shell_profile": [list(t) for t in self.shell_profile],
            "diverging": self.diverging,
            **{k: v for k, v in self.extra.items() if isinstance(v, (int, float, str, bool))},
        }


def _growth_slope(radii: Sequence[float], sups: Sequence[float]) -> float:
    x = np.log(1.0 - np.asarray(radii) ** 2)
    y = np.log(np.maximum(np.asarray(sups), 1e-300))
    return float(np.polyfit(x, y, 1)[0]) if len(x) >= 2 else 0.0


def _diverging(profile: Sequence[tuple[float, float]]) -> bool:
    pts = [(r, v) for r, v in profile if r > 0]
    if len(pts) < 3:
        return False
    radii, sups = zip(*pts)
    tail = sups[-3:]
    increasing = all(b > a for a, b in zip(tail, tail[1:]))
    return increasing and _growth_slope(radii, sups) <= -0.1


def ball_sup(
    h: Callable[[np.ndarray], np.ndarray],
    n: int,
    config: ShellConfig,
    tag: str,
    extra_points: np.ndarray | None = None,
) -> tuple[float, np.ndarray, tuple[tuple[float, float], ...]]:
    """Sampled sup of a non-negative function ``h`` over the ball.

    Returns ``(sup, argmax, shell_profile)``.  Refinement runs Nelder-Mead on
    the real coordinates (projected into the ball of radius ``r_cap``) and a
    golden-section search along the ray of the incumbent; only improvements
    are kept, so more budget never lowers the estimate.
    """
    profile = []
    best, arg = -1.0, np.zeros(n, dtype=np.complex128)
    for radius, pts in shell_samples(n, config.levels, config.per_shell, config.seed, tag):
        vals = np.asarray(h(pts), dtype=float)
        i = int(np.argmax(vals))
        profile.append((radius, float(vals[i])))
        if vals[i] > best:
            best, arg = float(vals[i]), pts[i].copy()
    if extra_points is not None and len(extra_points):
        pts = np.atleast_2d(np.asarray(extra_points, dtype=np.complex128))
        vals = np.asarray(h(pts), dtype=float)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, arg = float(vals[i]), pts[i].copy()
    if config.refine:
        best, arg = _refine(h, n, arg, best, config.r_cap, config.refine_iters)
    return best, arg, tuple(profile)


def _project(z: np.ndarray, r_cap: float) -> np.ndarray:
    r = math.sqrt(norm_sq(z))
    return z * (r_cap / r) if r > r_cap else z


def _refine(h, n, z0, v0, r_cap, iters):
    def neg(x):
        z = _project(x[:n] + 1j * x[n:], r_cap)
        return -float(h(z[None, :])[0])

    x0 = np.concatenate([z0.real, z0.imag])
    best, arg = v0, z0
    res = minimize(neg, x0, method="Nelder-Mead",
                   options={"maxfev": iters, "xatol": 1e-10, "fatol": 1e-14,
                            "initial_simplex": _simplex(x0, r_cap)})
    if -res.fun > best:
        best, arg = -res.fun, _project(res.x[:n] + 1j * res.x[n:], r_cap)
    r = math.sqrt(norm_sq(arg))
    if r > 0:
        u = arg / r

        def along(t):
            return float(h((t * u)[None, :])[0])

        t, v = golden_section_max(along, 0.5 * r, r_cap)
        if v > best:
            best, arg = v, t * u
    return best, arg


def _simplex(x0: np.ndarray, r_cap: float) -> np.ndarray:
    d = len(x0)
    step = max(1e-3, 0.25 * (r_cap - math.sqrt(float(np.sum(x0**2)))))
    return np.vstack([x0] + [x0 + step * np.eye(d)[i] for i in range(d)])


def _weighted_grad(f: HoloExpr, alpha: Number, radial: bool):
    a = float(alpha)

    def h(Z):
        g = f.value_and_grad(Z)[1]
        w = (1.0 - norm_sq(Z)) ** a
        if radial:
            return w * np.abs(np.sum(Z * g, axis=1))
        return w * np.sqrt(norm_sq(g))

    return h


def _infer_n(f: HoloExpr, n: int | None) -> int:
    n = n if n is not None else max(1, f.max_coord())
    return n


def bloch_norm(f: HoloExpr, alpha: Number, config: ShellConfig = ShellConfig(),
               n: int | None = None, extra_points=None) -> NormEstimate:
    """``|f(0)| + sup (1-|z|^2)^alpha |grad f(z)|``."""
    return _bloch(f, alpha, config, n, extra_points, radial=False)


def bloch_norm_radial(f: HoloExpr, alpha: Number, config: ShellConfig = ShellConfig(),
                      n: int | None = None, extra_points=None) -> NormEstimate:
    """``|f(0)| + sup (1-|z|^2)^alpha |Rf(z)|``."""
    return _bloch(f, alpha, config, n, extra_points, radial=True)


def _bloch(f, alpha, config, n, extra_points, radial):
    if not float(alpha) >= 0:
        raise ParamError("need alpha >= 0", "alpha")
    n = _infer_n(f, n)
    f0 = abs(f(np.zeros(n)))
    tag = "bloch-radial" if radial else "bloch"
    sup, arg, profile = ball_sup(_weighted_grad(f, alpha, radial), n, config, tag, extra_points)
    return NormEstimate(f0 + sup, arg, profile, f0, _diverging(profile))


def directional_seminorm_at(f: HoloExpr, z, p: Number) -> float:
    """``sup_u (1-|z|^2)^p |grad f(z) u| / sqrt((1-|z|^2)|u|^2 + |<z,u>|^2)`` in closed form.

    With ``B = (1-|z|^2) I + z z^H`` the sup equals ``sqrt(rho B^{-1} rho^H)``
    for the gradient row ``rho``; ``B^{-1} = (I - z z^H) / (1-|z|^2)``.
    """
    z = z.vector if isinstance(z, BallPoint) else np.asarray(z, dtype=np.complex128)
    c = 1.0 - norm_sq(z)
    if c <= 0:
        raise ValueError("z must lie inside the ball")
    rho = f.value_and_grad(z[None, :])[1][0]
    rz = np.sum(rho * z)  # rho z = Rf(z)
    q = max(norm_sq(rho) - abs(rz) ** 2, 0.0) / c
    return c ** float(p) * math.sqrt(q)


def directional_ratio(f: HoloExpr, z, p: Number, U: np.ndarray) -> np.ndarray:
    """The ratio inside :func:`directional_seminorm_at` for each row of ``U``."""
    z = np.asarray(z, dtype=np.complex128)
    c = 1.0 - norm_sq(z)
    rho = f.value_and_grad(z[None, :])[1][0]
    num = np.abs(U @ rho)
    den = np.sqrt(c * norm_sq(U) + np.abs(U @ np.conj(z)) ** 2)
    return c ** float(p) * num / den


# ------------------------------------------------------ pointwise estimates

def growth_constant(p: Number, nsq) -> np.ndarray:
    """Explicit constant ``C`` with ``|f(z)| <= C ||f||_{beta^p}`` from the integral estimate."""
    nsq = np.asarray(nsq, dtype=float)
    reg = regime_of(p)
    if reg == "k<1":
        return np.full_like(nsq, 1.0 + 1.0 / (1.0 - float(p)))
    if reg == "k=1":
        return 1.0 + 0.5 * np.log(4.0 / (1.0 - nsq))
    pf = float(p)
    return 1.0 + 2.0 ** (pf - 1.0) / ((pf - 1.0) * (1.0 - nsq) ** (pf - 1.0))


@dataclass(frozen=True)
class BoundReport:
    """Outcome of a sampled inequality check."""

    passed: bool
    max_ratio: float
    witness: np.ndarray | None
    samples: int
    norm: float

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_ratio": self.max_ratio, "samples": self.samples,
                "norm": self.norm,
                "witness": None if self.witness is None else
                [[float(c.real), float(c.imag)] for c in np.ravel(self.witness)]}


def _ray_sup(f: HoloExpr, p: float, Z: np.ndarray, points: int = 65) -> float:
    """``max`` of ``(1-|tz|^2)^p |grad f(tz)|`` over a grid of ``t`` on each sample ray."""
    best = 0.0
    for t in np.linspace(0.0, 1.0, points):
        W = t * Z
        g = f.value_and_grad(W)[1]
        best = max(best, float(np.max((1.0 - norm_sq(W)) ** p * np.sqrt(norm_sq(g)))))
    return best


def growth_bound_check(f: HoloExpr, p: Number, samples: np.ndarray,
                       norm: float | None = None, config: ShellConfig = ShellConfig()) -> BoundReport:
    """Check ``|f(z)| <= C_p(z) ||f||_{beta^p}`` at every sample.

    The norm used is the larger of the supplied/estimated norm and
    ``|f(0)| +`` the sup of the weighted gradient along the sample rays, which
    is the only part of the norm the integral estimate consumes.
    """
    Z = np.atleast_2d(np.asarray(samples, dtype=np.complex128))
    n = Z.shape[1]
    if norm is None:
        norm = bloch_norm(f, p, config, n=n).value
    f0 = abs(f(np.zeros(n)))
    norm = max(norm, f0 + _ray_sup(f, float(p), Z))
    bound = growth_constant(p, norm_sq(Z)) * norm
    vals = np.abs(f.value(Z))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(bound > 0, vals / bound, np.where(vals > 0, np.inf, 0.0))
    i = int(np.argmax(ratio))
    return BoundReport(bool(ratio[i] <= 1.0), float(ratio[i]), Z[i], len(Z), float(norm))


def radial_pairs(n: int, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Pairs ``(z, w)`` with ``z = r w`` for real ``r`` (sign allowed), both in the ball."""
    rng = stream(seed, "radial-pairs")
    dirs = keyed_directions(n, count, seed, "radial-pairs-dir")
    rw = 1.0 - (1.0 - rng.random(count) ** 0.5) * rng.choice([1.0, 1e-3], count)
    rw = np.clip(rw, 0.0, 1.0 - 1e-9)
    W = rw[:, None] * dirs
    rz = rng.uniform(-1.0, 1.0, count)
    rz = np.where(rng.random(count) < 0.5, np.sign(rz) * (1.0 - 1e-3 * rng.random(count)), rz)
    Zp = (rz * (1.0 - 1e-9))[:, None] * dirs
    return Zp, W


def lipschitz_check(f: HoloExpr, p: Number, z_pts: np.ndarray, w_pts: np.ndarray,
                    norm: float | None = None, config: ShellConfig = ShellConfig()) -> BoundReport:
    """Check ``|f(z) - f(w)| <= 2 ||f||_{beta^p} / (1-p) |z - w|^{1-p}`` on radial pairs.

    As in :func:`growth_bound_check`, the norm is raised to at least
    ``|f(0)|`` plus the weighted-gradient sup along the sampled segments.
    """
    pf = float(p)
    if not 0.0 < pf < 1.0:
        raise ParamError("Lipschitz estimate needs 0 < p < 1", "p")
    Zp = np.atleast_2d(np.asarray(z_pts, dtype=np.complex128))
    W = np.atleast_2d(np.asarray(w_pts, dtype=np.complex128))
    # collinearity over the reals: z = r w
    cross = np.abs(Zp[:, :, None] * W[:, None, :] - Zp[:, None, :] * W[:, :, None]).max(axis=(1, 2)) \
        if Zp.shape[1] > 1 else np.zeros(len(Zp))
    imag = np.abs(np.sum(Zp * np.conj(W), axis=1).imag)
    if np.any(cross > 1e-9) or np.any(imag > 1e-9):
        raise ValueError("pairs must satisfy z = r w for a real r")
    n = Zp.shape[1]
    if norm is None:
        norm = bloch_norm(f, p, config, n=n).value
    # the estimate integrates the weighted gradient along the segment [w, z]
    f0 = abs(f(np.zeros(n)))
    seg = 0.0
    for t in np.linspace(0.0, 1.0, 65):
        G = W + t * (Zp - W)
        g = f.value_and_grad(G)[1]
        seg = max(seg, float(np.max((1.0 - norm_sq(G)) ** pf * np.sqrt(norm_sq(g)))))
    norm = max(norm, f0 + seg)
    diff = np.abs(f.value(Zp) - f.value(W))
    dist = np.sqrt(norm_sq(Zp - W))
    bound = 2.0 * norm / (1.0 - pf) * dist ** (1.0 - pf)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(bound > 0, diff / bound, np.where(diff > 0, np.inf, 0.0))
    i = int(np.argmax(ratio))
    return BoundReport(bool(ratio[i] <= 1.0), float(ratio[i]), np.stack([Zp[i], W[i]]),
                       len(Zp), float(norm))


# --------------------------------------------------------------- F(p,q,s)

#: Multiples of ``1 - |c|`` at which extra poles are placed on a hint ray.
HINT_SCALES = (0.5, 1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class AGridConfig:
    """Grid of Green-function poles ``a`` for the sup in the F(p,q,s) seminorm."""

    levels: int = 6
    directions: int | None = None  # default 8 n per shell
    seed: int = 0
    stabilization_tol: float = 0.05


def a_grid(n: int, config: AGridConfig, hints: Sequence = ()) -> list[tuple[int, np.ndarray]]:
    """``[(shell_index, a)]``: the origin (shell 0) plus directions on each shell.

    Each hint direction ``c/|c|`` is added to every shell, together with
    poles at ``1 - m (1 - |c|)`` for ``m`` in ``HINT_SCALES``, so poles can sit
    on the ray through a known concentration point at its own scale.
    """
    d = config.directions if config.directions is not None else 8 * n
    out = [(0, np.zeros(n, dtype=np.complex128))]
    hint_dirs = []
    for c in hints:
        c = np.asarray(c, dtype=np.complex128)
        r = math.sqrt(norm_sq(c))
        if r > 0:
            hint_dirs.append(c / r)
    radii = shell_radii(config.levels)
    for j, r in enumerate(radii, start=1):
        dirs = keyed_directions(n, d, config.seed, "a-grid", j)
        for u in list(dirs) + hint_dirs:
            out.append((j, r * u))
    for c in hints:
        rho = math.sqrt(norm_sq(np.asarray(c, dtype=np.complex128)))
        for m in HINT_SCALES:
            t = 1.0 - m * (1.0 - rho)
            if 0.0 < t < 1.0 and rho > 0:
                j = int(np.searchsorted(radii, t, side="right"))
                out.append((j, t * np.asarray(c, dtype=np.complex128) / rho))
    return out


def fpqs_seminorm(
    f: HoloExpr,
    params: SpaceParams,
    quad: QuadratureSpec = QuadratureSpec(),
    agrid: AGridConfig = AGridConfig(),
    centers: Sequence = (),
    workers: int | None = None,
) -> NormEstimate:
    """``|f(0)| + (sup_a int_B |grad f|^p (1-|z|^2)^q g(z,a)^s dv)^{1/p}``.

    ``centers`` are points where ``|grad f|`` concentrates; they become
    mixture components of the quadrature and hint directions of the a-grid.
    ``extra`` carries per-pole integrals, their standard errors and a
    ``stabilized`` flag (false when the last shell still raised the sup by
    more than ``agrid.stabilization_tol``).
    """
    n = params.n
    p, q, s = float(params.p), float(params.q), float(params.s)
    f0 = abs(f(np.zeros(n)))

    def integrand(Z):
        g = f.value_and_grad(Z)[1]
        return norm_sq(g) ** (p / 2.0) * (1.0 - norm_sq(Z)) ** q

    poles = [(0, np.zeros(n, dtype=np.complex128))] if s == 0 else a_grid(n, agrid, centers)
    estimates = []
    for j, a in poles:
        est = integrate(integrand, n, quad, a=a, s=s, centers=centers, workers=workers) \
            if s == 0 else integrate_green_weighted(integrand, a, s, quad, centers, workers)
        estimates.append((j, a, est))
    best_j, best_a, best = max(estimates, key=lambda t: t[2].value)
    shells: dict[int, float] = {}
    for j, _, est in estimates:
        shells[j] = max(shells.get(j, 0.0), est.value)
    running, stabilized = 0.0, True
    for j in sorted(shells):
        prev = running
        running = max(running, shells[j])
        if j == max(shells) and j > 0 and prev > 0:
            stabilized = (running - prev) <= agrid.stabilization_tol * prev
    I = max(best.value, 0.0)
    root = I ** (1.0 / p)
    root_se = (root / (p * I) * best.standard_error) if I > 0 else 0.0
    radii = [0.0] + list(shell_radii(agrid.levels))
    profile = tuple((radii[j], max(v, 0.0) ** (1.0 / p)) for j, v in sorted(shells.items()))
    extra = {
        "integral": I,
        "integral_se": best.standard_error,
        "seminorm_se": root_se,
        "relative_se": (best.standard_error / I) if I > 0 else 0.0,
        "stabilized": stabilized,
        "poles": len(estimates),
        "per_pole": [(a, e) for _, a, e in estimates],
    }
    return NormEstimate(f0 + root, best_a, profile, f0, False, extra)
