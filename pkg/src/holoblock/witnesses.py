"""Explicit test functions that force lower bounds on ``||W_{psi,phi} f||``.

Five families are built as exact expression trees:

* ``eq24-rational``  ``(z1 - r)(1 - r^2) / (1 - r z1)^{k+1}`` (radial directions)
* ``eq27-tangential`` ``(sum_j a_j z_j)(1 - r^2)^{3/2} / (1 - r z1)^{k+1}``
* ``thm1-power``     ``(1 - r^2) / (1 - r z1)^k`` (``k > 1``)
* ``thm1-log-sgtn``  ``L^{-1} (log 1/(1 - r z1))^2`` with ``L = log 1/(1 - r^2)`` (``k = 1, s > n``)
* ``thm1-log-sletn`` ``L^{-2/(px)} (log 1/(1 - r z1))^{1 + 2/(px)}`` (``k = 1, s <= n``)

All are written in a frame where ``phi(omega) = r e_1``; the optional
rotation ``V`` (with ``V phi(omega) = r e_1``) turns ``f`` into ``f o V``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .criteria import SymbolPair, rayleigh_ratio
from .geometry import align_to_e1, norm_sq
from .quadrature import QuadratureSpec, integrate
from .spaces import (AGridConfig, Number, ShellConfig, SpaceParams, bloch_norm, exact,
                     fpqs_seminorm, regime_of)
from .symbols import AtomLog, AtomPow, Const, HoloExpr, Prod, SelfMapSymbol, Sum, Unitary, coord, compose

KINDS = ("eq24-rational", "eq27-tangential", "thm1-power", "thm1-log-sgtn", "thm1-log-sletn")
#: ``|phi(omega)|`` must exceed this for the radial/tangential witnesses.
R_THRESHOLD = math.sqrt(2.0 / 3.0)
#: Calibrated on ``phi = id, psi = 1`` (minimum ratio 0.75 over radii
#: 0.85..0.999 and random directions, n = 1, 2); frozen a factor 3 below it.
LOWER_BOUND_FLOOR = 0.25


class WitnessError(ValueError):
    """Witness parameters outside the admissible range."""


def log_witness_exponent(n: int, p: Number, s: Number) -> float:
    """Exponent ``x`` for the ``s <= n`` log witness.

    The admissible window is ``max{1, n/p} < x < n/(n-s)``; the midpoint is
    used, and ``max{1, n/p} + 1`` when ``s = n`` (the window is unbounded).
    """
    p, s = float(p), float(s)
    lo = max(1.0, n / p)
    if s > n:
        raise WitnessError("the s <= n log witness needs s <= n")
    if s == n:
        return lo + 1.0
    hi = n / (n - s)
    if not hi > lo:
        raise WitnessError(f"empty window max(1, n/p)={lo} < x < n/(n-s)={hi}; need s + p > n")
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WitnessFamily:
    """Parameters of one witness function ``f_{omega,u}``."""

    kind: str
    r: float
    k: Number
    n: int
    rotation: np.ndarray | None = field(default=None, repr=False)
    coeffs: tuple[complex, ...] | None = None
    p: Number | None = None
    x: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WitnessError(f"unknown witness kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 < self.r < 1.0:
            raise WitnessError("r must lie in (0, 1)")
        if self.n < 1:
            raise WitnessError("n must be >= 1")
        object.__setattr__(self, "k", exact(self.k, "k"))
        if not self.k > 0:
            raise WitnessError("k must be positive")
        if self.kind in ("eq24-rational", "eq27-tangential") and not self.r > R_THRESHOLD:
            raise WitnessError(f"r = {self.r} must exceed sqrt(2/3) for {self.kind}")
        if self.kind == "eq27-tangential":
            if self.n < 2:
                raise WitnessError("the tangential witness needs n >= 2")
            if self.coeffs is None or len(self.coeffs) != self.n - 1:
                raise WitnessError("eq27-tangential needs n-1 coefficients a_2..a_n")
            mods = [abs(complex(a)) for a in self.coeffs]
            if any(min(abs(m), abs(m - 1.0)) > 1e-12 for m in mods):
                raise WitnessError("eq27-tangential coefficients must have modulus 0 or 1")
            if max(mods) == 0.0:
                raise WitnessError("eq27-tangential needs at least one nonzero coefficient")
        if self.kind == "thm1-power" and regime_of(self.k) != "k>1":
            raise WitnessError("thm1-power is the k > 1 witness")
        if self.kind.startswith("thm1-log") and regime_of(self.k) != "k=1":
            raise WitnessError(f"{self.kind} is a k = 1 witness")
        if self.kind == "thm1-log-sletn":
            if self.p is None or self.x is None:
                raise WitnessError("thm1-log-sletn needs p and x")
            if not self.x > max(1.0, self.n / float(self.p)):
                raise WitnessError("x must exceed max(1, n/p)")
        if self.rotation is not None:
            V = np.asarray(self.rotation, dtype=np.complex128)
            if V.shape != (self.n, self.n):
                raise WitnessError(f"rotation must be {self.n}x{self.n}")
            object.__setattr__(self, "rotation", V)

    @property
    def log_power(self) -> float:
        """Exponent of ``log 1/(1 - r z1)`` for the ``s <= n`` log witness."""
        return 1.0 + 2.0 / (float(self.p) * self.x)

    def with_r(self, r: float) -> "WitnessFamily":
        return replace(self, r=r)


def _k_exp(k: Number, shift: int) -> Number:
    return -(k + shift)


def build_witness(family: WitnessFamily) -> HoloExpr:
    """Exact tree of the witness; precomposed with the rotation when present."""
    r, k = family.r, family.k
    c = 1.0 - r * r
    z1 = coord(1)
    if family.kind == "eq24-rational":
        f = Prod((Sum((z1, Const(-r))), Const(c), AtomPow(r, _k_exp(k, 1), 1)))
    elif family.kind == "eq27-tangential":
        lin = Sum(tuple(Const(complex(a)) * coord(j) for j, a in enumerate(family.coeffs, start=2)
                        if a != 0))
        f = Prod((lin, Const(c**1.5), AtomPow(r, _k_exp(k, 1), 1)))
    elif family.kind == "thm1-power":
        f = Prod((Const(c), AtomPow(r, _k_exp(k, 0), 1)))
    elif family.kind == "thm1-log-sgtn":
        L = -math.log1p(-r * r)
        f = Prod((Const(1.0 / L), AtomLog(r, 2, 1)))
    else:
        L = -math.log1p(-r * r)
        e = 2.0 / (float(family.p) * family.x)
        f = Prod((Const(L ** -e), AtomLog(r, 1.0 + e, 1)))
    if family.rotation is not None:
        f = Unitary(family.rotation, f)
    return f


def witness_center(family: WitnessFamily) -> np.ndarray:
    """The point ``phi(omega)`` at which the witness concentrates (original frame)."""
    e = np.zeros(family.n, dtype=np.complex128)
    e[0] = family.r
    if family.rotation is None:
        return e
    return family.rotation.conj().T @ e


def gradient_bound(family: WitnessFamily, Z: np.ndarray, factor: float | None = None) -> np.ndarray:
    """``factor (1 - r^2) / |1 - r z_1|^{k+1}`` in the witness frame, for ``eq24-rational``.

    The derivative of ``(z_1 - r)(1 - r z_1)^{-(k+1)}`` carries ``(k+1)``
    inside the bracket, so the sharp factor is ``k + 2`` (the default);
    ``1 + k`` fails near ``z_1 = 1`` by a ratio tending to ``(k+2)/(k+1)``.
    """
    if family.kind != "eq24-rational":
        raise WitnessError("the gradient bound is stated for eq24-rational")
    r, k = family.r, float(family.k)
    c = k + 2.0 if factor is None else float(factor)
    Z = np.atleast_2d(np.asarray(Z, dtype=np.complex128))
    if family.rotation is not None:
        Z = Z @ family.rotation.T
    return c * (1.0 - r * r) / np.abs(1.0 - r * Z[:, 0]) ** (k + 1.0)


# ---------------------------------------------------------- direction split

@dataclass(frozen=True)
class DirectionSplit:
    """Which witness a pair ``(omega, u)`` calls for, with its frame data."""

    case: str
    r: float
    rotation: np.ndarray
    xi: np.ndarray
    coeffs: tuple[complex, ...] | None

    def family(self, k: Number, n: int) -> WitnessFamily:
        if self.case == "radial":
            return WitnessFamily("eq24-rational", self.r, k, n, rotation=self.rotation)
        return WitnessFamily("eq27-tangential", self.r, k, n, rotation=self.rotation,
                             coeffs=self.coeffs)


def witness_direction_split(phi: SelfMapSymbol, omega, u) -> DirectionSplit:
    """Radial iff ``sqrt(1 - r^2) |J u| <= |<phi(omega), J u>|``, else tangential.

    ``xi = V J u`` in the frame ``V phi(omega) = r e_1``; for the tangential
    case ``a_j = exp(-i arg xi_j)`` (0 when ``xi_j = 0``), ``j >= 2``.
    """
    omega = np.asarray(getattr(omega, "vector", omega), dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    if norm_sq(u) == 0.0:
        raise WitnessError("direction u must be nonzero")
    PHI, J = phi.value_and_jacobian(omega[None, :])
    phiw, J = PHI[0], J[0]
    r = math.sqrt(norm_sq(phiw))
    if not r > R_THRESHOLD:
        raise WitnessError(f"|phi(omega)| = {r:.6g} does not exceed sqrt(2/3)")
    Ju = J @ u
    V = align_to_e1(phiw)
    xi = V @ Ju
    radial = math.sqrt(1.0 - r * r) * math.sqrt(norm_sq(Ju)) <= abs(np.vdot(phiw, Ju))
    if radial:
        return DirectionSplit("radial", r, V, xi, None)
    scale = math.sqrt(norm_sq(xi))
    coeffs = tuple(0j if abs(x) <= 1e-15 * scale else cmath.exp(-1j * cmath.phase(x)) for x in xi[1:])
    return DirectionSplit("tangential", r, V, xi, coeffs)


# ------------------------------------------------------------ lower bound

@dataclass(frozen=True)
class LowerBoundSample:
    omega: np.ndarray
    u: np.ndarray
    case: str
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else math.inf


@dataclass(frozen=True)
class LowerBoundReport:
    status: str  # "pass", "fail" or "not-applicable"
    min_ratio: float
    floor: float
    samples: tuple[LowerBoundSample, ...]
    skipped: int

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"status": self.status, "min_ratio": self.min_ratio, "floor": self.floor,
                "skipped": self.skipped,
                "samples": [{"omega_abs": float(math.sqrt(norm_sq(s.omega))), "case": s.case,
                             "lhs": s.lhs, "rhs": s.rhs, "ratio": s.ratio} for s in self.samples]}


def image_norm(pair: SymbolPair, f: HoloExpr, alpha: Number, config: ShellConfig,
               extra_points=None) -> float:
    """Sampled ``||psi (f o phi)||_{beta^alpha}``."""
    h = Prod((pair.psi, compose(f, pair.phi)))
    return bloch_norm(h, alpha, config, n=pair.n, extra_points=extra_points).value


def verify_lower_bound(pair: SymbolPair, params: SpaceParams, omegas: Sequence, directions: Sequence,
                       config: ShellConfig = ShellConfig(levels=8, per_shell=64),
                       floor: float = LOWER_BOUND_FLOOR) -> LowerBoundReport:
    """Compare ``||W f_{omega,u}||_{beta^alpha}`` with the single-direction criterion quantity.

    Pairs with ``|phi(omega)| <= sqrt(2/3)`` are skipped; if nothing is left
    the report is ``not-applicable``.  ``omega`` itself is always among the
    points of the norm estimate.
    """
    k, alpha = params.k, params.alpha
    samples, skipped = [], 0
    for omega in omegas:
        omega = np.asarray(getattr(omega, "vector", omega), dtype=np.complex128)
        PHI, J = pair.phi.value_and_jacobian(omega[None, :])
        if not math.sqrt(norm_sq(PHI[0])) > R_THRESHOLD:
            skipped += len(directions)
            continue
        psi_w = abs(complex(pair.psi.value(omega[None, :])[0]))
        c_w = 1.0 - norm_sq(omega)
        c_phi = 1.0 - norm_sq(PHI[0])
        for u in directions:
            u = np.asarray(u, dtype=np.complex128)
            split = witness_direction_split(pair.phi, omega, u)
            f = build_witness(split.family(k, pair.n))
            lhs = image_norm(pair, f, alpha, config, extra_points=omega[None, :])
            ratio = float(rayleigh_ratio(omega, PHI[0], J[0], u[None, :])[0])
            rhs = psi_w * c_w ** float(alpha) / c_phi ** float(k) * math.sqrt(ratio)
            samples.append(LowerBoundSample(omega, u, split.case, lhs, rhs))
    if not samples:
        return LowerBoundReport("not-applicable", math.nan, floor, (), skipped)
    finite = [s.ratio for s in samples if math.isfinite(s.ratio)]
    m = min(finite) if finite else math.inf
    return LowerBoundReport("pass" if m > floor else "fail", m, floor, tuple(samples), skipped)


# -------------------------------------------------------- uniform bounds

@dataclass(frozen=True)
class LadderReport:
    """A sequence of estimates along a ladder and its no-growth verdict."""

    passed: bool
    ladder: tuple[float, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]
    median: float
    factor: float
    unstable: bool

    def to_dict(self) -> dict:
        return {"passed": self.passed, "ladder": list(self.ladder), "values": list(self.values),
                "standard_errors": list(self.errors), "median": self.median,
                "factor": self.factor, "unstable": self.unstable}


def _ladder_report(ladder, values, errors, factor, unstable_rel=0.2) -> LadderReport:
    med = float(np.median(values))
    passed = bool(max(values) <= factor * med) if med > 0 else bool(max(values) == 0.0)
    unstable = any(e > unstable_rel * v for v, e in zip(values, errors) if v > 0)
    return LadderReport(passed, tuple(ladder), tuple(values), tuple(errors), med, factor, unstable)


def uniform_witness_norm_check(
    template: WitnessFamily | Callable[[float], HoloExpr],
    params: SpaceParams,
    r_ladder: Sequence[float] = (0.9, 0.99, 0.999),
    quad: QuadratureSpec = QuadratureSpec(4000),
    agrid: AGridConfig = AGridConfig(),
    factor: float = 2.0,
    workers: int | None = None,
) -> LadderReport:
    """``||f_r||_{F(p,q,s)}`` along ``r_ladder`` must stay within ``factor`` of the median.

    ``template`` is a :class:`WitnessFamily` (its ``r`` is replaced) or any
    callable ``r -> HoloExpr``; family templates also contribute the witness
    center as a quadrature component and a-grid hint.
    """
    values, errors = [], []
    for r in r_ladder:
        if isinstance(template, WitnessFamily):
            fam = template.with_r(r)
            f, centers = build_witness(fam), [witness_center(fam)]
        else:
            f, centers = template(r), []
        est = fpqs_seminorm(f, params, quad, agrid, centers=centers, workers=workers)
        values.append(est.value)
        errors.append(est.extra["seminorm_se"])
    return _ladder_report(r_ladder, values, errors, factor)


def log_kernel_integrand(z: np.ndarray, t: float) -> Callable[[np.ndarray], np.ndarray]:
    """``w -> |log 1/(1 - <w,z>)|^2 (1-|w|^2)^t / |1 - <w,z>|^{n+1+t}``."""
    z = np.asarray(z, dtype=np.complex128)
    n = z.shape[0]

    def fn(W):
        x = 1.0 - W @ np.conj(z)
        return np.abs(np.log(x)) ** 2 * (1.0 - norm_sq(W)) ** t / np.abs(x) ** (n + 1 + t)

    return fn


def scale_centers(z: np.ndarray) -> list[np.ndarray]:
    """Points ``(1 - 2^-m) z/|z|`` down to the scale of ``1 - |z|``, plus ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    rho = math.sqrt(norm_sq(z))
    if rho == 0.0:
        return []
    u = z / rho
    out, m = [], 1
    while 1.0 - 2.0**-m < rho:
        out.append((1.0 - 2.0**-m) * u)
        m += 1
    return out + [z]


def log_kernel_integral(z, t: float, quad: QuadratureSpec = QuadratureSpec(200_000),
                        workers: int | None = None):
    """Monte Carlo estimate of the log-kernel integral at ``z``.

    The integrand spreads over every scale between ``1 - |z|`` and 1 near
    ``z/|z|``, so one pulled-back component is placed per dyadic scale.
    """
    z = np.asarray(getattr(z, "vector", z), dtype=np.complex128)
    if not t > -1:
        raise ValueError("t must exceed -1")
    spec = QuadratureSpec(quad.sample_count, quad.seed, "pullback-singular", quad.levels,
                          quad.log_fraction, quad.log_radius, center_weight=0.8)
    return integrate(log_kernel_integrand(z, t), z.shape[0], spec, centers=scale_centers(z),
                     workers=workers)


def log_kernel_bound_check(n: int, t: float, z_ladder: Sequence[float] = (0.5, 0.9, 0.99),
                           quad: QuadratureSpec = QuadratureSpec(200_000), factor: float = 2.0,
                           workers: int | None = None) -> LadderReport:
    """Ratio of the log-kernel integral to ``(log 1/(1-|z|^2))^2`` along ``|z|`` in ``z_ladder``."""
    values, errors = [], []
    for rho in z_ladder:
        if not 0.0 < rho < 1.0:
            raise ValueError("ladder radii must lie in (0, 1)")
        z = np.zeros(n, dtype=np.complex128)
        z[0] = rho
        est = log_kernel_integral(z, t, quad, workers)
        norm = math.log(1.0 / (1.0 - rho * rho)) ** 2
        values.append(est.value / norm)
        errors.append(est.standard_error / norm)
    return _ladder_report(z_ladder, values, errors, factor)


__all__ = [
    "KINDS", "LOWER_BOUND_FLOOR", "R_THRESHOLD", "DirectionSplit", "LadderReport",
    "LowerBoundReport", "WitnessError", "WitnessFamily", "build_witness", "gradient_bound",
    "image_norm", "log_witness_exponent", "log_kernel_bound_check", "log_kernel_integral", "scale_centers",
    "uniform_witness_norm_check", "verify_lower_bound", "witness_center", "witness_direction_split",
]

