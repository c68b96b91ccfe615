"""Monte Carlo integration over the unit ball with normalized volume ``v(B) = 1``.

Green-weighted integrals ``int_B fn(z) g(z,a)^s dv(z)`` are computed by
sampling ``u`` near the origin and mapping ``z = phi_a(u)``; the pole of the
Green function then sits at ``u = 0``, where a dedicated small-radius
stratum controls the ``log(1/|u|)^s`` tail.  Extra *centers* add mixture
components pulled back through ``phi_c`` so that integrands concentrated
near a boundary point are sampled where their mass lives.

All strata have deterministic sample counts, so the estimator is a
stratified (deterministic-mixture) estimator and its standard error is
combined from per-stratum variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .geometry import green_batch, moebius_batch, norm_sq
from .sampling import chunk_counts, ordered_map, sphere_directions, stream

STRATEGIES = ("plain", "radial-stratified", "pullback-singular")
#: Largest radius used for u-samples; keeps ``1 - |u|^2`` positive in float64.
_R_CAP = math.sqrt(1.0 - 1e-14)


class QuadratureError(RuntimeError):
    """Non-finite integrand values (the weight was applied to a non-integrable function)."""


@dataclass(frozen=True)
class QuadratureSpec:
    sample_count: int = 20000
    seed: int = 0
    strategy: str = "pullback-singular"
    levels: int = 1
    log_fraction: float = 0.05
    log_radius: float = 2.0**-8
    center_weight: float = 0.5

    def __post_init__(self):
        if self.sample_count < 100:
            raise ValueError("sample_count must be >= 100")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    standard_error: float
    samples_used: int

    def to_dict(self) -> dict:
        return {"value": self.value, "standard_error": self.standard_error,
                "samples_used": self.samples_used}


@dataclass(frozen=True)
class _Stratum:
    component: int
    r_lo: float
    r_hi: float
    count: int
    two_n: int

    @property
    def volume(self) -> float:
        return self.r_hi**self.two_n - self.r_lo**self.two_n


def _radii(n: int, lo: float, hi: float, size: int, rng: np.random.Generator) -> np.ndarray:
    # r^{2n} uniform on [lo^{2n}, hi^{2n}] gives the volume density 2n r^{2n-1}
    a, b = lo ** (2 * n), hi ** (2 * n)
    r = (a + (b - a) * rng.random(size)) ** (1.0 / (2 * n))
    return np.minimum(r, _R_CAP)


def _sample_stratum(n: int, st: _Stratum, size: int, rng: np.random.Generator) -> np.ndarray:
    return _radii(n, st.r_lo, st.r_hi, size, rng)[:, None] * sphere_directions(n, size, rng)


def _allocate(total: int, fractions: Sequence[float]) -> list[int]:
    return [max(2, int(round(total * f))) for f in fractions]


def _mixture(spec: QuadratureSpec, a_is_origin: bool, ncenters: int) -> list[tuple[str, float]]:
    """Component kinds and weights for the pull-back strategy.

    The pulled-back component at ``a`` alone has a density that decays like
    ``(1 - |a|^2)^{n+1}`` far from ``a``; a uniform component keeps the
    importance weights bounded there.
    """
    if spec.strategy != "pullback-singular":
        return [("uniform", 1.0)]
    cw = spec.center_weight if ncenters else 0.0
    if a_is_origin:
        comps = [("log", 1.0 - cw)]
    else:
        comps = [("log", 0.5 * (1.0 - cw)), ("uniform", 0.5 * (1.0 - cw))]
    return comps + [("uniform", cw / max(ncenters, 1))] * ncenters


def _strata(n: int, spec: QuadratureSpec, mixture: Sequence[tuple[str, float]]) -> list[_Stratum]:
    out: list[_Stratum] = []
    for c, (kind, cf) in enumerate(mixture):
        if spec.strategy == "plain":
            bounds = [(0.0, 1.0, 1.0)]
        elif kind == "uniform":
            L = spec.levels
            edges = [(i / L) ** (1.0 / (2 * n)) for i in range(L + 1)]
            bounds = [(edges[i], edges[i + 1], 1.0 / L) for i in range(L)]
        else:
            rho = spec.log_radius
            bounds = [(0.0, rho, spec.log_fraction), (rho, 1.0, 1.0 - spec.log_fraction)]
        counts = _allocate(spec.sample_count, [cf * f for _, _, f in bounds])
        for (lo, hi, _), k in zip(bounds, counts):
            out.append(_Stratum(c, lo, hi, k, 2 * n))
    return out


# ------------------------------------------------------------------ plain

def iter_ball_samples(n: int, spec: QuadratureSpec) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Chunks ``(Z, w)`` with ``sum(w * f(Z))`` estimating ``int_B f dv``."""
    if spec.strategy == "pullback-singular":
        spec = QuadratureSpec(spec.sample_count, spec.seed, "radial-stratified", spec.levels)
    strata = _strata(n, spec, _mixture(spec, True, 0))
    for h, st in enumerate(strata):
        w = st.volume / st.count
        for c, size in enumerate(chunk_counts(st.count)):
            Z = _sample_stratum(n, st, size, stream(spec.seed, "ball", h, c))
            yield Z, np.full(size, w)


def sample_ball(n: int, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """All points and weights of :func:`iter_ball_samples` concatenated."""
    parts = list(iter_ball_samples(n, spec))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def monomial_moment(n: int, m: int, t: float, z) -> float:
    """Closed form of ``int_B |<z,w>|^{2m} (1-|w|^2)^t dv(w)``.

    Equals ``n! m! Gamma(t+1) / Gamma(t+n+1+m) * |z|^{2m}``.
    """
    if m < 0 or int(m) != m:
        raise ValueError("m must be a non-negative integer")
    if not t > -1:
        raise ValueError("t must exceed -1")
    zz = norm_sq(np.asarray(z, dtype=np.complex128))
    logc = math.lgamma(n + 1) + math.lgamma(m + 1) + math.lgamma(t + 1) - math.lgamma(t + n + 1 + m)
    return math.exp(logc) * zz**m


# --------------------------------------------------------- Green-weighted

def _jac(Z: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Real Jacobian determinant of ``phi_c`` at ``Z`` w.r.t. normalized volume."""
    csq = norm_sq(c)
    if csq == 0.0:
        return np.ones(Z.shape[0])
    zc = Z @ np.conj(c)
    return ((1.0 - csq) / np.abs(1.0 - zc) ** 2) ** (Z.shape[1] + 1)


def _moments(values: np.ndarray) -> tuple[float, float]:
    return float(np.sum(values)), float(np.sum(values * values))


def integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    n: int,
    spec: QuadratureSpec,
    *,
    a=None,
    s: float = 0.0,
    centers: Sequence = (),
    workers: int | None = None,
) -> IntegralEstimate:
    """Estimate ``int_B fn(z) g(z,a)^s dv(z)``.

    ``fn`` maps a batch ``(N, n)`` to real values.  For ``plain`` and
    ``radial-stratified`` the points are drawn uniformly (no pull-back); for
    ``pullback-singular`` the first mixture component is pulled back through
    ``phi_a`` and ``centers`` add further pulled-back components.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    origin = np.zeros(n, dtype=np.complex128)
    a = origin if a is None else np.asarray(a, dtype=np.complex128)
    centers = [np.asarray(c, dtype=np.complex128) for c in centers]
    a_is_origin = norm_sq(a) == 0.0
    mixture = _mixture(spec, a_is_origin, len(centers))
    if spec.strategy == "pullback-singular":
        comps = [a] + ([] if a_is_origin else [origin]) + centers
    else:
        comps = [origin]
    strata = _strata(n, spec, mixture)
    N = sum(st.count for st in strata)
    fracs = {h: st.count / N for h, st in enumerate(strata)}

    def density(Z: np.ndarray) -> np.ndarray:
        m = np.zeros(Z.shape[0])
        for ci, c in enumerate(comps):
            u_abs = np.sqrt(norm_sq(moebius_batch(c, Z))) if norm_sq(c) > 0 else np.sqrt(norm_sq(Z))
            jac = _jac(Z, c)
            for h, st in enumerate(strata):
                if st.component != ci:
                    continue
                inside = (u_abs >= st.r_lo) & (u_abs < st.r_hi) if st.r_lo > 0 else (u_abs < st.r_hi)
                m += np.where(inside, fracs[h] / st.volume, 0.0) * jac
        return m

    jobs = [(h, c, size) for h, st in enumerate(strata)
            for c, size in enumerate(chunk_counts(st.count))]

    def run(j: int):
        h, c, size = jobs[j]
        st = strata[h]
        rng = stream(spec.seed, "green", h, c)
        U = _sample_stratum(n, st, size, rng)
        center = comps[st.component]
        Z = moebius_batch(center, U) if norm_sq(center) > 0 else (-U if spec.strategy ==
                                                                   "pullback-singular" else U)
        vals = np.asarray(fn(Z), dtype=float)
        if s > 0:
            if st.component == 0 and spec.strategy == "pullback-singular":
                g = -np.log(np.sqrt(norm_sq(U)))
            else:
                g = green_batch(Z, a)
            vals = vals * g**s
        Y = vals if spec.strategy == "plain" else vals / density(Z)
        if not np.all(np.isfinite(Y)):
            bad = int(np.flatnonzero(~np.isfinite(Y))[0])
            raise QuadratureError(
                f"non-finite integrand at z={Z[bad].tolist()} (stratum {h}, chunk {c}); "
                "check that the integrand is integrable against the weight"
            )
        return h, _moments(Y)

    results = ordered_map(run, len(jobs), workers)
    per = {h: [0.0, 0.0] for h in range(len(strata))}
    for h, (s1, s2) in results:
        per[h][0] += s1
        per[h][1] += s2
    total, var = 0.0, 0.0
    for h, st in enumerate(strata):
        s1, s2 = per[h]
        k = st.count
        mean = s1 / k
        total += s1
        if k > 1:
            sv = max(s2 - k * mean * mean, 0.0) / (k - 1)
            var += k * sv
    return IntegralEstimate(total / N, math.sqrt(var) / N, N)


def integrate_green_weighted(
    fn: Callable[[np.ndarray], np.ndarray],
    a,
    s: float,
    spec: QuadratureSpec,
    centers: Sequence = (),
    workers: int | None = None,
) -> IntegralEstimate:
    """``int_B fn(z) g(z, a)^s dv(z)`` through the Moebius pull-back at ``a``."""
    a = np.asarray(a.vector if hasattr(a, "vector") else a, dtype=np.complex128)
    if spec.strategy != "pullback-singular":
        spec = QuadratureSpec(spec.sample_count, spec.seed, "pullback-singular", spec.levels,
                              spec.log_fraction, spec.log_radius, spec.center_weight)
    return integrate(fn, a.shape[0], spec, a=a, s=s, centers=centers, workers=workers)
