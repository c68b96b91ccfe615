"""Verification suites: the invariants of every module, run at a chosen budget.

Each check returns a :class:`CheckResult` with the measured margin and the
inputs needed to reproduce a failure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .corpus import function_corpus
from .criteria import (CriterionParams, ProfileConfig, SymbolPair, analyze, criterion_Q,
                       evaluate_batch, rayleigh_ratio, rayleigh_sup)
from .geometry import (green_batch, moebius_batch, norm_sq, one_minus_norm_sq, one_minus_phi_sq,
                       random_unitary)
from .quadrature import QuadratureSpec, monomial_moment, sample_ball
from .sampling import keyed_directions, stream
from .spaces import (AGridConfig, ShellConfig, SpaceParams, bloch_norm, directional_ratio,
                     directional_seminorm_at, exact, fpqs_seminorm, growth_bound_check,
                     lipschitz_check, radial_pairs)
from .symbols import (AtomLog, Const, blaschke_self_map, coord, disk_automorphism, identity_map)
from .witnesses import (LOWER_BOUND_FLOOR, WitnessFamily, build_witness, gradient_bound,
                        log_witness_exponent, log_kernel_bound_check, uniform_witness_norm_check,
                        verify_lower_bound)

SUITES = ("geometry", "moments", "norms", "witnesses", "criteria")


@dataclass(frozen=True)
class Budget:
    name: str
    pairs: int
    moment_samples: int
    rayleigh_instances: int
    rayleigh_dirs: int
    disk_instances: int
    self_maps: int
    levels: int
    per_shell: int
    quad_samples: int
    growth_samples: int
    lipschitz_pairs: int
    dims: tuple[int, ...]

    @property
    def shell(self) -> ShellConfig:
        return ShellConfig(levels=self.levels, per_shell=self.per_shell)


BUDGETS = {
    "smoke": Budget("smoke", 10_000, 200_000, 20, 20_000, 1000, 10, 8, 64, 2000, 500, 2000, (1, 2)),
    "standard": Budget("standard", 10_000, 1_000_000, 100, 100_000, 1000, 50, 10, 256, 4000, 2000,
                       10_000, (1, 2)),
    "deep": Budget("deep", 100_000, 4_000_000, 200, 200_000, 5000, 100, 12, 512, 16_000, 5000,
                   20_000, (1, 2, 3)),
}


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: dict
    inputs: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"suite": self.suite, "name": self.name, "passed": self.passed,
                "measured": self.measured, "inputs": self.inputs, "seconds": self.seconds}


def _ball_points(n: int, count: int, seed: int, *key) -> np.ndarray:
    """Points uniform for normalized volume on the ball."""
    rng = stream(seed, "ball-points", *key)
    r = rng.random(count) ** (1.0 / (2 * n))
    return r[:, None] * keyed_directions(n, count, seed, "ball-dirs", *key)


# ----------------------------------------------------------------- geometry

def _pairs(budget: Budget, seed: int, n: int):
    return zip(_ball_points(n, budget.pairs, seed, "a", n), _ball_points(n, budget.pairs, seed, "z", n))


def check_moebius(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for n in (1, 2, 3):
        inv = zero = at_a = 0.0
        for a, z in _pairs(budget, seed, n):
            inv = max(inv, math.sqrt(norm_sq(moebius_batch(a, moebius_batch(a, z)) - z)))
            zero = max(zero, math.sqrt(norm_sq(moebius_batch(a, np.zeros(n)) - a)))
            at_a = max(at_a, math.sqrt(norm_sq(moebius_batch(a, a))))
        out.append(CheckResult("geometry", f"moebius involution n={n}",
                               inv < 1e-10 and zero < 1e-12 and at_a < 1e-12,
                               {"max_involution_error": inv, "max_phi_0_error": zero,
                                "max_phi_a_norm": at_a},
                               {"pairs": budget.pairs, "seed": seed}))
    return out


def check_kernel_identity(budget: Budget, seed: int) -> list[CheckResult]:
    worst = 0.0
    for n in (1, 2, 3):
        for a, z in _pairs(budget, seed, n):
            x = one_minus_phi_sq(a, z)
            worst = max(worst, abs(x - one_minus_norm_sq(moebius_batch(a, z, extended=True))) / x)
    return [CheckResult("geometry", "kernel identity", worst < 1e-10,
                        {"max_relative_error": worst},
                        {"pairs": budget.pairs, "seed": seed})]


def check_unitary_invariance(budget: Budget, seed: int) -> list[CheckResult]:
    worst = 0.0
    for n in (1, 2, 3):
        rng = stream(seed, "unitary", n)
        for i in range(50):
            U = random_unitary(n, rng)
            z, w = _ball_points(n, 2, seed, "uz", n, i)
            worst = max(worst, abs(abs(np.vdot(w, z)) - abs(np.vdot(U @ w, U @ z))))
    return [CheckResult("geometry", "unitary invariance", worst < 1e-12, {"max_error": worst})]


def check_green(budget: Budget, seed: int) -> list[CheckResult]:
    worst, minimum = 0.0, math.inf
    for n in (1, 2, 3):
        A = _ball_points(n, 2000, seed, "ga", n) * 0.999
        Z = _ball_points(n, 2000, seed, "gz", n) * 0.999
        for a, z in zip(A, Z):
            g = float(green_batch(z[None, :], a)[0])
            h = float(green_batch(moebius_batch(a, z)[None, :], np.zeros(n))[0])
            g_swap = float(green_batch(a[None, :], z)[0])
            worst = max(worst, abs(g - h) / max(g, 1e-300), abs(g - g_swap) / max(g, 1e-300))
            minimum = min(minimum, g)
    return [CheckResult("geometry", "green symmetry and positivity", worst < 1e-8 and minimum > 0,
                        {"max_relative_error": worst, "min_value": minimum})]


# ------------------------------------------------------------------ moments

def check_moments(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for n in (1, 2, 3):
        z = 0.9 * keyed_directions(n, 1, seed, "moment-z", n)[0]
        spec = QuadratureSpec(budget.moment_samples, seed, "radial-stratified", levels=16)
        W, wts = sample_ball(n, spec)
        zw = np.abs(W @ np.conj(z)) ** 2
        for m in (0, 1, 2):
            for t in (0, 1):
                vals = zw**m * (1.0 - norm_sq(W)) ** t
                est, se = _stratified(vals, wts)
                exact_v = monomial_moment(n, m, t, z)
                err = abs(est - exact_v)
                ok = err <= 3.0 * se + 1e-15 and err <= 0.02 * exact_v
                out.append(CheckResult("moments", f"moment n={n} m={m} t={t}", bool(ok),
                                       {"estimate": est, "exact": exact_v, "stderr": se,
                                        "relative_error": err / exact_v},
                                       {"samples": budget.moment_samples, "seed": seed}))
    return out


def _stratified(vals: np.ndarray, wts: np.ndarray) -> tuple[float, float]:
    """Stratified mean and standard error; strata are runs of equal weight."""
    est = float(np.sum(vals * wts))
    var = 0.0
    for w in np.unique(wts):
        m = wts == w
        k = int(m.sum())
        if k > 1:
            var += (w * k) ** 2 * float(np.var(vals[m], ddof=1)) / k
    return est, math.sqrt(var)


# -------------------------------------------------------------------- norms

def check_bloch_examples(budget: Budget, seed: int) -> list[CheckResult]:
    cfg = ShellConfig(levels=10, per_shell=budget.per_shell, seed=seed)
    v1 = bloch_norm(coord(1), 1, cfg, n=2).value
    vlog = bloch_norm(AtomLog(1.0 - 1e-9, 1, 1), 1, cfg, n=1).value
    vc = bloch_norm(Const(2.5 + 1j), 1, cfg, n=2).value
    return [
        CheckResult("norms", "bloch z1", abs(v1 - 1.0) < 1e-6, {"value": v1, "expected": 1.0}),
        CheckResult("norms", "bloch log", abs(vlog - 2.0) < 1e-3, {"value": vlog, "expected": 2.0}),
        CheckResult("norms", "bloch constant", abs(vc - abs(2.5 + 1j)) < 1e-12, {"value": vc}),
    ]


def check_directional(budget: Budget, seed: int) -> list[CheckResult]:
    worst_over, worst_under = 0.0, 0.0
    rng = stream(seed, "directional")
    for i, (name, f) in enumerate(function_corpus(2, seed)[:8]):
        z = _ball_points(2, 1, seed, "dir-z", i)[0] * 0.95
        p = float(rng.uniform(0.5, 2.0))
        exact_v = directional_seminorm_at(f, z, p)
        U = keyed_directions(2, 10_000, seed, "dir-u", i)
        sampled = float(np.max(directional_ratio(f, z, p, U)))
        if exact_v > 0:
            worst_over = max(worst_over, sampled / exact_v - 1.0)
            worst_under = max(worst_under, 1.0 - sampled / exact_v)
    ok = worst_over <= 1e-12 and worst_under <= 0.01
    return [CheckResult("norms", "directional closed form", ok,
                        {"max_sampled_excess": worst_over, "max_sampling_gap": worst_under})]


def check_growth(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for p in ("1/2", "1", "3/2"):
        worst, failures = 0.0, []
        for n in budget.dims:
            Z = _ball_points(n, budget.growth_samples, seed, "growth", n)
            for name, f in function_corpus(n, seed):
                rep = growth_bound_check(f, exact(p), Z, config=budget.shell)
                worst = max(worst, rep.max_ratio)
                if not rep.passed:
                    failures.append({"n": n, "function": name, "ratio": rep.max_ratio})
        out.append(CheckResult("norms", f"growth bound p={p}", not failures,
                               {"max_ratio": worst, "failures": failures},
                               {"samples": budget.growth_samples, "seed": seed}))
    return out


def check_lipschitz(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for p in ("1/4", "1/2", "3/4"):
        worst, failures = 0.0, []
        for n in budget.dims:
            Zp, W = radial_pairs(n, budget.lipschitz_pairs, seed)
            for name, f in function_corpus(n, seed):
                rep = lipschitz_check(f, exact(p), Zp, W, config=budget.shell)
                worst = max(worst, rep.max_ratio)
                if not rep.passed:
                    failures.append({"n": n, "function": name, "ratio": rep.max_ratio})
        out.append(CheckResult("norms", f"lipschitz p={p}", not failures,
                               {"max_ratio": worst, "failures": failures},
                               {"pairs": budget.lipschitz_pairs, "seed": seed}))
    return out


def check_fpqs_constant(budget: Budget, seed: int) -> list[CheckResult]:
    params = SpaceParams(2, "2", "0", "1", "1")
    est = fpqs_seminorm(Const(-3.0), params, QuadratureSpec(budget.quad_samples, seed),
                        AGridConfig(levels=3, seed=seed))
    return [CheckResult("norms", "F(p,q,s) of a constant", abs(est.value - 3.0) < 1e-12,
                        {"value": est.value})]


# ---------------------------------------------------------------- witnesses

def check_gradient_bound(budget: Budget, seed: int) -> list[CheckResult]:
    sharp, loose = 0.0, 0.0
    for n in (1, 2):
        Z = _ball_points(n, 5000, seed, "gradient-bound", n)
        for r in (0.85, 0.99, 0.9999):
            for k in ("1/2", "1", "5/2"):
                fam = WitnessFamily("eq24-rational", r, k, n)
                # points crowding z_1 = 1, where the bracket is largest
                near = np.zeros((200, n), dtype=np.complex128)
                near[:, 0] = 1.0 - np.geomspace(1e-8, 1e-1, 200)
                W = np.vstack([Z, near])
                g = np.sqrt(norm_sq(build_witness(fam).value_and_grad(W)[1]))
                sharp = max(sharp, float(np.max(g / gradient_bound(fam, W))))
                loose = max(loose, float(np.max(g / gradient_bound(fam, W, 1.0 + float(fam.k)))))
    return [CheckResult("witnesses", "gradient bound (k+2)", sharp <= 1.0,
                        {"max_ratio": sharp, "max_ratio_factor_1_plus_k": loose})]


def _ladder_cases(budget: Budget):
    cases = [("eq24-rational", 1, ("2", "0", "1")), ("thm1-log-sgtn", 1, ("2", "0", "2")),
             ("thm1-log-sletn", 1, ("2", "0", "1"))]
    if 2 in budget.dims:
        cases += [("eq24-rational", 2, ("3", "0", "1")), ("thm1-log-sgtn", 2, ("3", "0", "3")),
                  ("thm1-log-sletn", 2, ("3", "0", "2"))]
    return cases


def witness_template(kind: str, params: SpaceParams) -> WitnessFamily:
    kw = {}
    if kind == "thm1-log-sletn":
        kw = {"p": params.p, "x": log_witness_exponent(params.n, params.p, params.s)}
    return WitnessFamily(kind, 0.9, params.k, params.n, **kw)


def check_uniform_witness(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for kind, n, (p, q, s) in _ladder_cases(budget):
        params = SpaceParams(n, p, q, s, "1")
        rep = uniform_witness_norm_check(witness_template(kind, params), params,
                                         quad=QuadratureSpec(budget.quad_samples, seed),
                                         agrid=AGridConfig(seed=seed))
        out.append(CheckResult("witnesses", f"uniform norm {kind} n={n}", rep.passed and not rep.unstable,
                               rep.to_dict(), {"p": p, "q": q, "s": s, "seed": seed}))
    return out


def check_log_kernel(budget: Budget, seed: int) -> list[CheckResult]:
    rep = log_kernel_bound_check(1, 0.0, quad=QuadratureSpec(10 * budget.quad_samples, seed))
    return [CheckResult("witnesses", "log kernel ratio n=1 t=0", rep.passed, rep.to_dict())]


def check_lower_bound(budget: Budget, seed: int) -> list[CheckResult]:
    out = []
    for n, (p, q, s) in ((1, ("2", "0", "1")), (2, ("3", "0", "1"))):
        params = SpaceParams(n, p, q, s, "1")
        pair = SymbolPair(Const(1.0), identity_map(n))
        dirs = keyed_directions(n, 3, seed, "lb-omega")
        omegas = [r * d for r in (0.85, 0.99, 0.999) for d in dirs]
        us = list(keyed_directions(n, 3, seed, "lb-u"))
        rep = verify_lower_bound(pair, params, omegas, us,
                                 ShellConfig(levels=8, per_shell=64, seed=seed))
        out.append(CheckResult("witnesses", f"lower bound identity n={n}", rep.passed,
                               {"min_ratio": rep.min_ratio, "floor": LOWER_BOUND_FLOOR,
                                "samples": len(rep.samples)}))
    return out


# ----------------------------------------------------------------- criteria

def random_instance(n: int, rng: np.random.Generator):
    """Random ``(w, phi(w), J)`` with ``|w|, |phi(w)| < 1``."""
    w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    w *= rng.uniform(0.0, 0.999) / np.linalg.norm(w)
    phiw = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    phiw *= rng.uniform(0.0, 0.999) / np.linalg.norm(phiw)
    J = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return w, phiw, J


def check_rayleigh(budget: Budget, seed: int) -> list[CheckResult]:
    rng = stream(seed, "rayleigh")
    worst_excess, worst_gap = -math.inf, 0.0
    for i in range(budget.rayleigh_instances):
        w, phiw, J = random_instance(2, rng)
        lam = rayleigh_sup(w, phiw, J)
        U = keyed_directions(2, budget.rayleigh_dirs, seed, "rayleigh-u", i)
        ratios = rayleigh_ratio(w, phiw, J, U)
        worst_excess = max(worst_excess, float(np.max(ratios)) - lam * (1.0 + 1e-12))
        worst_gap = max(worst_gap, 1.0 - float(np.max(ratios)) / lam)
    ok = worst_excess <= 0.0 and worst_gap <= 0.01
    return [CheckResult("criteria", "rayleigh eigen dominance", ok,
                        {"max_excess": worst_excess, "max_gap": worst_gap},
                        {"instances": budget.rayleigh_instances, "directions": budget.rayleigh_dirs})]


def check_one_variable(budget: Budget, seed: int) -> list[CheckResult]:
    rng = stream(seed, "disk")
    worst = 0.0
    for _ in range(budget.disk_instances):
        zeros = [complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(int(rng.integers(1, 3)))]
        phi = blaschke_self_map(zeros, complex(np.exp(1j * rng.uniform(0, 2 * np.pi)) * rng.uniform(0.3, 1.0)))
        psi = Const(complex(*rng.standard_normal(2))) + Const(complex(*rng.standard_normal(2))) * coord(1)
        alpha, k = float(rng.uniform(0, 2)), float(rng.uniform(0.2, 2))
        w = complex(*rng.standard_normal(2))
        w *= rng.uniform(0, 0.99) / abs(w)
        W = np.array([w])
        params = CriterionParams(1, k, alpha)
        q = criterion_Q(psi, phi, params, W)
        v, J = phi.value_and_jacobian(W[None, :])
        ref = abs(complex(psi.value(W[None, :])[0])) * (1 - abs(w) ** 2) ** alpha * abs(J[0, 0, 0]) \
            / (1 - abs(v[0, 0]) ** 2) ** k
        worst = max(worst, abs(q - ref) / max(ref, 1e-300))
    return [CheckResult("criteria", "one-variable reduction", worst < 1e-12, {"max_relative_error": worst},
                        {"instances": budget.disk_instances})]


def check_schwarz_pick(budget: Budget, seed: int) -> list[CheckResult]:
    rng = stream(seed, "schwarz-pick")
    cfg = ProfileConfig(budget.levels, budget.per_shell, seed)
    params = CriterionParams(1, 1, 1)
    aut_err = 0.0
    for _ in range(5):
        a = complex(*rng.uniform(-0.7, 0.7, 2))
        phi = disk_automorphism(a, np.exp(1j * rng.uniform(0, 2 * np.pi)))
        W = _ball_points(1, 2000, seed, "sp", a.real)
        _, Q, _ = evaluate_batch(SymbolPair(Const(1.0), phi), params, W)
        aut_err = max(aut_err, float(np.max(np.abs(Q - 1.0))))
    sup_q = 0.0
    for _ in range(budget.self_maps):
        zeros = [complex(*rng.uniform(-0.7, 0.7, 2)) for _ in range(int(rng.integers(2, 4)))]
        phi = blaschke_self_map(zeros, complex(np.exp(1j * rng.uniform(0, 2 * np.pi)) * rng.uniform(0.5, 1.0)))
        prof, _ = analyze(SymbolPair(Const(1.0), phi), params, cfg)
        sup_q = max(sup_q, prof.sup_Q)
    return [CheckResult("criteria", "schwarz-pick automorphisms", aut_err < 1e-10, {"max_error": aut_err}),
            CheckResult("criteria", "schwarz-pick self-maps", sup_q <= 1.0 + 1e-6, {"sup_Q": sup_q},
                        {"maps": budget.self_maps, "seed": seed})]


def identity_table(dims=(1, 2), seed: int = 0, levels: int = 10, per_shell: int = 16) -> list[dict]:
    """Verdicts for ``phi = id, psi = 1`` at ``alpha in {k, k + 1/4, k - 1/2}`` and ``k in {1/2, 1, 2}``."""
    rows = []
    p_for = {1: ("4", "2", "1"), 2: ("6", "3", "3/2")}
    for n in dims:
        for p in p_for[n]:
            params = SpaceParams(n, p, "0", "1", "0")
            k = params.k
            for alpha in (k, k + exact("1/4"), k - exact("1/2")):
                if alpha < 0:
                    continue
                cp = CriterionParams(n, k, alpha)
                _, v = analyze(SymbolPair(Const(1.0), identity_map(n)), cp,
                               ProfileConfig(levels, per_shell, seed))
                rows.append({"n": n, "k": str(k), "alpha": str(alpha), "alpha_minus_k": str(alpha - k),
                             "bounded": v.bounded, "compact": v.compact, "regime": v.regime})
    return rows


def identity_expected(row: dict) -> tuple[str, str]:
    d = exact(row["alpha_minus_k"])
    if d < 0:
        return "no", "not-applicable"
    if d == 0:
        return "yes", "no"
    return "yes", "yes"


def check_identity_threshold(budget: Budget, seed: int) -> list[CheckResult]:
    rows = identity_table(seed=seed, levels=budget.levels)
    bad = [r for r in rows if (r["bounded"], r["compact"]) != identity_expected(r)]
    return [CheckResult("criteria", "identity threshold", not bad, {"rows": rows, "mismatches": bad})]


REGISTRY: dict[str, list[Callable[[Budget, int], list[CheckResult]]]] = {
    "geometry": [check_moebius, check_kernel_identity, check_unitary_invariance, check_green],
    "moments": [check_moments],
    "norms": [check_bloch_examples, check_directional, check_growth, check_lipschitz,
              check_fpqs_constant],
    "witnesses": [check_gradient_bound, check_uniform_witness, check_log_kernel, check_lower_bound],
    "criteria": [check_rayleigh, check_one_variable, check_schwarz_pick, check_identity_threshold],
}


def run_suite(suite: str, budget: str = "smoke", seed: int = 0) -> list[CheckResult]:
    """Run one suite (or ``"all"``) and return every check result."""
    if budget not in BUDGETS:
        raise ValueError(f"unknown budget {budget!r}; expected one of {tuple(BUDGETS)}")
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        if name not in REGISTRY:
            raise ValueError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    b = BUDGETS[budget]
    results = []
    for name in names:
        for check in REGISTRY[name]:
            t0 = time.perf_counter()
            for res in check(b, seed):
                res.seconds = time.perf_counter() - t0
                results.append(res)
    return results
