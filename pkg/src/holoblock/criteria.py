"""Boundedness and compactness criteria for ``W_{psi,phi} f = psi * (f o phi)``.

``Q(w)`` is the weight-scaled, direction-supped Jacobian distortion and
``D(w)`` the gradient-of-weight term; their behaviour on boundary shells of
``w`` and on bins of ``1 - |phi(w)|`` drives the verdicts.  Verdicts are
explicit trend heuristics whose thresholds all live in :class:`VerdictPolicy`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .geometry import BallPoint, norm_sq
from .sampling import ordered_map, shell_samples
from .spaces import Number, SpaceParams, exact, g_growth_sq, regime_of
from .symbols import HoloExpr, SelfMapSymbol, lift


class CriterionError(RuntimeError):
    """Numerical failure while evaluating a criterion quantity."""


@dataclass(frozen=True)
class SymbolPair:
    """The weight ``psi`` and self-map ``phi`` of a weighted composition operator."""

    psi: HoloExpr
    phi: SelfMapSymbol

    def __post_init__(self):
        object.__setattr__(self, "psi", lift(self.psi))
        if self.psi.max_coord() > self.phi.n:
            raise ValueError(f"psi uses coordinates beyond n={self.phi.n}")

    @property
    def n(self) -> int:
        return self.phi.n


@dataclass(frozen=True)
class CriterionParams:
    """Exponents entering ``Q`` and ``D``: ``k`` (the G-function index) and ``alpha``."""

    n: int
    k: Number
    alpha: Number

    @classmethod
    def from_space(cls, params: SpaceParams) -> "CriterionParams":
        return cls(params.n, params.k, params.alpha)

    @classmethod
    def bloch(cls, n: int, p_src, q_dst) -> "CriterionParams":
        """``beta^{p'} -> beta^{q'}``: substitute ``k <- p'`` and ``alpha <- q'``."""
        p_src, q_dst = exact(p_src, "p_src"), exact(q_dst, "q_dst")
        if not p_src > 0:
            raise ValueError("p_src must be positive")
        if not q_dst > 0:
            raise ValueError("q_dst must be positive")
        return cls(n, p_src, q_dst)

    @property
    def regime(self) -> str:
        return regime_of(self.k)

    def to_dict(self) -> dict:
        return {"n": self.n, "k": str(self.k), "alpha": str(self.alpha), "regime": self.regime}


def _params(params) -> CriterionParams:
    return CriterionParams.from_space(params) if isinstance(params, SpaceParams) else params


# ------------------------------------------------------------ Rayleigh sup

def _forms(w, phiw, J):
    w = np.asarray(w, dtype=np.complex128)
    phiw = np.asarray(phiw, dtype=np.complex128)
    J = np.asarray(J, dtype=np.complex128)
    n = w.shape[0]
    c_phi = 1.0 - norm_sq(phiw)
    c_w = 1.0 - norm_sq(w)
    inner = c_phi * np.eye(n) + np.outer(phiw, phiw.conj())
    A = J.conj().T @ inner @ J
    B = c_w * np.eye(n) + np.outer(w, w.conj())
    return A, B


def rayleigh_sup(w, phiw, J) -> float:
    """Largest generalized eigenvalue of ``(A, B)``, the sup over ``u`` of

    ``[(1-|phi|^2)|Ju|^2 + |<phi, Ju>|^2] / [(1-|w|^2)|u|^2 + |<w, u>|^2]``.
    """
    w = w.vector if isinstance(w, BallPoint) else w
    A, B = _forms(w, phiw, J)
    try:
        lam = scipy.linalg.eigh(A, B, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise CriterionError(f"generalized eigensolver failed; cond(B) = {np.linalg.cond(B):.3e}") from exc
    return max(float(lam[-1]), 0.0)


def rayleigh_ratio(w, phiw, J, U: np.ndarray) -> np.ndarray:
    """The ratio of the two quadratic forms at each row of ``U``."""
    w = np.asarray(w, dtype=np.complex128)
    phiw = np.asarray(phiw, dtype=np.complex128)
    JU = U @ np.asarray(J).T
    num = (1.0 - norm_sq(phiw)) * norm_sq(JU) + np.abs(JU @ phiw.conj()) ** 2
    den = (1.0 - norm_sq(w)) * norm_sq(U) + np.abs(U @ w.conj()) ** 2
    return num / den


def rayleigh_sup_batch(W: np.ndarray, PHI: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Vectorised :func:`rayleigh_sup` for ``W, PHI`` of shape ``(N, n)`` and ``J`` of ``(N, n, n)``.

    Uses ``B^{-1/2} = c^{-1/2} I + beta w w^H`` with ``c = 1 - |w|^2`` and
    ``beta = -1 / (sqrt(c) (1 + sqrt(c)))`` and writes the reduced matrix as
    ``(1-|phi|^2) K K^H + v v^H`` (``K = B^{-1/2} J^H``, ``v = K phi``) so no
    cancellation happens before the Hermitian eigensolver.
    """
    c = 1.0 - norm_sq(W)
    sc = np.sqrt(c)
    beta = -1.0 / (sc * (1.0 + sc))
    JH = np.conj(np.swapaxes(J, 1, 2))
    wJH = np.einsum("ni,nij->nj", np.conj(W), JH)  # w^H J^H
    K = JH / sc[:, None, None] + beta[:, None, None] * W[:, :, None] * wJH[:, None, :]
    v = np.einsum("nij,nj->ni", K, PHI)
    M = (1.0 - norm_sq(PHI))[:, None, None] * (K @ np.conj(np.swapaxes(K, 1, 2)))
    M = M + v[:, :, None] * np.conj(v)[:, None, :]
    lam = np.linalg.eigvalsh(M)[:, -1]
    return np.maximum(lam, 0.0)


# ----------------------------------------------------------- Q and D

def evaluate_batch(pair: SymbolPair, params, W: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(|phi(w)|, Q(w), D(w))`` for a batch ``W``."""
    cp = _params(params)
    W = np.atleast_2d(np.asarray(W, dtype=np.complex128))
    PHI, J = pair.phi.value_and_jacobian(W)
    psi, dpsi = pair.psi.value_and_grad(W)
    phi_sq = norm_sq(PHI)
    if np.any(phi_sq >= 1.0):
        raise CriterionError("phi leaves the ball at a sample; validate the self-map first")
    c_w = 1.0 - norm_sq(W)
    c_phi = 1.0 - phi_sq
    lam = rayleigh_sup_batch(W, PHI, J)
    weight = c_w ** float(cp.alpha)
    Q = np.abs(psi) * weight / c_phi ** float(cp.k) * np.sqrt(lam)
    D = np.asarray(g_growth_sq(cp.k, phi_sq)) * np.sqrt(norm_sq(dpsi)) * weight
    return np.sqrt(phi_sq), Q, D


def criterion_Q(psi, phi: SelfMapSymbol, params, w) -> float:
    """``|psi(w)| (1-|w|^2)^alpha / (1-|phi(w)|^2)^k * sqrt(rayleigh_sup)``."""
    cp = _params(params)
    w = w.vector if isinstance(w, BallPoint) else np.asarray(w, dtype=np.complex128)
    psi = lift(psi)
    PHI, J = phi.value_and_jacobian(w[None, :])
    lam = rayleigh_sup(w, PHI[0], J[0])
    c_phi = 1.0 - norm_sq(PHI[0])
    return abs(complex(psi.value(w[None, :])[0])) * (1.0 - norm_sq(w)) ** float(cp.alpha) \
        / c_phi ** float(cp.k) * math.sqrt(lam)


def criterion_D(psi, phi: SelfMapSymbol, params, w) -> float:
    """``G_k(phi(w)) |grad psi(w)| (1-|w|^2)^alpha``."""
    cp = _params(params)
    w = w.vector if isinstance(w, BallPoint) else np.asarray(w, dtype=np.complex128)
    dpsi = lift(psi).value_and_grad(w[None, :])[1][0]
    phi_sq = norm_sq(phi.value(w[None, :])[0])
    return float(g_growth_sq(cp.k, phi_sq)) * math.sqrt(norm_sq(dpsi)) * (1.0 - norm_sq(w)) ** float(cp.alpha)


# ------------------------------------------------------------- profile

@dataclass(frozen=True)
class ProfileConfig:
    levels: int = 10
    per_shell: int = 256
    seed: int = 0
    workers: int | None = None


def phi_bin(abs_phi: np.ndarray) -> np.ndarray:
    """Bin ``j`` with ``1 - |phi| in (2^{-j-1}, 2^{-j}]``."""
    gap = np.maximum(1.0 - np.asarray(abs_phi, dtype=float), np.finfo(float).tiny)
    return np.floor(-np.log2(gap)).astype(int)


@dataclass(frozen=True)
class CriterionProfile:
    """Per-sample ``(w, |phi(w)|, Q, D, shell_index)`` and their aggregates."""

    W: np.ndarray
    abs_phi: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    shell_index: np.ndarray
    shell_radii: np.ndarray
    params: CriterionParams
    config: ProfileConfig

    @property
    def sup_Q(self) -> float:
        return float(np.max(self.Q))

    @property
    def sup_D(self) -> float:
        return float(np.max(self.D))

    @property
    def sup_phi(self) -> float:
        return float(np.max(self.abs_phi))

    def shell_maxima(self) -> list[tuple[int, float, float, float]]:
        """``[(j, r_j, max Q, max D)]`` over ``w``-shells ``j = 0..J`` (0 is the origin)."""
        out = []
        for j, r in enumerate(self.shell_radii):
            m = self.shell_index == j
            if np.any(m):
                out.append((j, float(r), float(self.Q[m].max()), float(self.D[m].max())))
        return out

    def phi_bins(self) -> list[tuple[int, int, float, float]]:
        """``[(j, count, max Q, max D)]`` over nonempty bins of ``1 - |phi(w)|``."""
        b = phi_bin(self.abs_phi)
        out = []
        for j in np.unique(b):
            m = b == j
            out.append((int(j), int(m.sum()), float(self.Q[m].max()), float(self.D[m].max())))
        return out

    def argmax_Q(self) -> np.ndarray:
        return self.W[int(np.argmax(self.Q))]

    def summary(self) -> dict:
        return {
            "samples": int(len(self.Q)),
            "sup_Q": self.sup_Q,
            "sup_D": self.sup_D,
            "sup_abs_phi": self.sup_phi,
            "argmax_Q": [[float(c.real), float(c.imag)] for c in self.argmax_Q()],
            "shells": [{"index": j, "radius": r, "max_Q": q, "max_D": d}
                       for j, r, q, d in self.shell_maxima()],
            "phi_bins": [{"index": j, "count": c, "max_Q": q, "max_D": d}
                         for j, c, q, d in self.phi_bins()],
        }


def profile(pair: SymbolPair, params, config: ProfileConfig = ProfileConfig()) -> CriterionProfile:
    """Evaluate ``Q`` and ``D`` on the origin and ``config.levels`` boundary shells of ``w``."""
    cp = _params(params)
    if cp.n != pair.n:
        raise ValueError(f"params are for n={cp.n} but the symbols have n={pair.n}")
    shells = shell_samples(pair.n, config.levels, config.per_shell, config.seed, "profile")

    def run(j):
        return evaluate_batch(pair, cp, shells[j][1])

    results = ordered_map(run, len(shells), config.workers)
    W = np.concatenate([pts for _, pts in shells])
    idx = np.concatenate([np.full(len(pts), j) for j, (_, pts) in enumerate(shells)])
    radii = np.array([r for r, _ in shells])
    abs_phi, Q, D = (np.concatenate([r[i] for r in results]) for i in range(3))
    return CriterionProfile(W, abs_phi, Q, D, idx, radii, cp, config)


# ------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class VerdictPolicy:
    """Every threshold used by the verdict heuristics."""

    min_shells: int = 3
    stabilization_window: int = 3
    stabilization_rel: float = 0.10
    stable_slope: float = -0.02
    growth_slope: float = -0.1
    min_r2: float = 0.9
    decay_slope: float = 0.02
    last_bin_factor: float = 10.0
    delta0: float = 0.05
    zero_tol: float = 1e-14

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Verdict:
    bounded: str
    compact: str
    regime: str
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.compact == "yes" and self.bounded != "yes":
            raise ValueError("compact=yes requires bounded=yes")

    def to_dict(self) -> dict:
        return {"bounded": self.bounded, "compact": self.compact, "regime": self.regime,
                "evidence": self.evidence}


def _fit(x, y) -> tuple[float, float]:
    """Least-squares slope and R^2 of ``y`` against ``x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), r2


def _series_stats(x, vals, policy: VerdictPolicy) -> dict:
    vals = np.asarray(vals, float)
    if np.max(vals) <= policy.zero_tol:
        return {"zero": True, "slope": None, "r2": None, "stable": True, "growing": False,
                "max": float(np.max(vals))}
    slope, r2 = _fit(x, np.log(np.maximum(vals, policy.zero_tol)))
    tail = vals[-(policy.stabilization_window + 1):]
    rel = [(b - a) / a if a > 0 else (math.inf if b > 0 else 0.0) for a, b in zip(tail, tail[1:])]
    stable = all(r < policy.stabilization_rel for r in rel) and slope >= policy.stable_slope
    growing = slope <= policy.growth_slope and r2 > policy.min_r2
    return {"zero": False, "slope": slope, "r2": r2, "tail_rel_increase": rel,
            "stable": bool(stable), "growing": bool(growing), "max": float(np.max(vals))}


def boundedness_verdict(prof: CriterionProfile, policy: VerdictPolicy = VerdictPolicy()) -> Verdict:
    """Bounded iff the ``Q`` and ``D`` shell maxima stabilise; unbounded on a clean power-law blow-up."""
    rows = [row for row in prof.shell_maxima() if row[0] > 0]
    regime = prof.params.regime
    if len(rows) < policy.min_shells:
        return Verdict("inconclusive", "inconclusive", regime,
                       {"insufficient_data": True, "shells": len(rows), "policy": policy.to_dict()})
    x = np.log(1.0 - np.array([r for _, r, _, _ in rows]) ** 2)
    q = _series_stats(x, [v for _, _, v, _ in rows], policy)
    d = _series_stats(x, [v for _, _, _, v in rows], policy)
    if q["growing"] or d["growing"]:
        bounded = "no"
    elif q["stable"] and d["stable"]:
        bounded = "yes"
    else:
        bounded = "inconclusive"
    evidence = {"axis": "log(1-|w|^2)", "Q": q, "D": d, "sup_Q": prof.sup_Q, "sup_D": prof.sup_D,
                "insufficient_data": False, "policy": policy.to_dict()}
    return Verdict(bounded, "inconclusive", regime, evidence)


def _decays(bins, col: int, policy: VerdictPolicy) -> dict:
    vals = np.array([b[col] for b in bins], float)
    if np.max(vals) <= policy.zero_tol:
        return {"zero": True, "decays": True, "max_last": float(vals[-1])}
    x = np.log(2.0 ** -(np.array([b[0] for b in bins], float) + 0.5))
    slope, r2 = _fit(x, np.log(np.maximum(vals, policy.zero_tol)))
    tail = vals[-policy.stabilization_window:]
    nonincreasing = bool(np.all(np.diff(tail) <= 0.0))
    interior = vals[1:-1] if len(vals) > 2 else vals
    last_ok = bool(vals[-1] < policy.last_bin_factor * float(np.median(interior)))
    ok = slope >= policy.decay_slope and r2 >= policy.min_r2 and nonincreasing and last_ok
    return {"zero": False, "slope": slope, "r2": r2, "tail_nonincreasing": nonincreasing,
            "last_bin_ok": last_ok, "max_last": float(vals[-1]), "decays": bool(ok)}


def compactness_verdict(prof: CriterionProfile, bounded: Verdict,
                        policy: VerdictPolicy = VerdictPolicy()) -> Verdict:
    """``Q`` (and for ``k >= 1`` also ``D``) must vanish as ``|phi(w)| -> 1``.

    Bins of ``1 - |phi(w)|`` must show a clean decay of their maxima.  If
    ``|phi|`` stays below ``1 - delta0`` the boundary condition is vacuous.
    """
    regime = prof.params.regime
    ev = dict(bounded.evidence)
    if bounded.bounded == "no":
        return Verdict("no", "not-applicable", regime, {**ev, "compactness": "not-applicable"})
    if prof.sup_phi <= 1.0 - policy.delta0:
        comp = {"vacuous_boundary": True, "sup_abs_phi": prof.sup_phi}
        compact = "yes" if bounded.bounded == "yes" else "inconclusive"
        return Verdict(bounded.bounded, compact, regime, {**ev, "compactness": comp})
    bins = prof.phi_bins()
    if len(bins) < policy.min_shells:
        comp = {"vacuous_boundary": False, "insufficient_bins": True, "bins": len(bins)}
        return Verdict(bounded.bounded, "inconclusive", regime, {**ev, "compactness": comp})
    q = _decays(bins, 2, policy)
    comp = {"vacuous_boundary": False, "insufficient_bins": False, "axis": "log(1-|phi|)", "Q": q}
    ok = q["decays"]
    if regime != "k<1":
        d = _decays(bins, 3, policy)
        comp["D"] = d
        ok = ok and d["decays"]
    if not ok:
        compact = "no"
    else:
        compact = "yes" if bounded.bounded == "yes" else "inconclusive"
    return Verdict(bounded.bounded, compact, regime, {**ev, "compactness": comp})


def analyze(pair: SymbolPair, params, config: ProfileConfig = ProfileConfig(),
            policy: VerdictPolicy = VerdictPolicy()) -> tuple[CriterionProfile, Verdict]:
    """Profile followed by both verdicts."""
    prof = profile(pair, params, config)
    return prof, compactness_verdict(prof, boundedness_verdict(prof, policy), policy)


def bloch_to_bloch_verdict(psi, phi: SelfMapSymbol, p_src, q_dst,
                           config: ProfileConfig = ProfileConfig(),
                           policy: VerdictPolicy = VerdictPolicy()) -> tuple[CriterionProfile, Verdict]:
    """Verdicts for ``beta^{p'} -> beta^{q'}`` (``k <- p'``, ``alpha <- q'``)."""
    pair = SymbolPair(lift(psi), phi)
    return analyze(pair, CriterionParams.bloch(pair.n, p_src, q_dst), config, policy)


__all__ = [
    "CriterionError", "CriterionParams", "CriterionProfile", "ProfileConfig", "SymbolPair",
    "Verdict", "VerdictPolicy", "analyze", "bloch_to_bloch_verdict", "boundedness_verdict",
    "compactness_verdict", "criterion_D", "criterion_Q", "evaluate_batch", "phi_bin", "profile",
    "rayleigh_ratio", "rayleigh_sup", "rayleigh_sup_batch",
]
