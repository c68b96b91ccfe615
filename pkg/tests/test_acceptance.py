"""Acceptance criteria, each at its stated tolerance and runtime bound."""

import json
import math
import time

import numpy as np
import pytest

from holoblock.cli import dumps, identity_view, main
from holoblock.corpus import function_corpus
from holoblock.criteria import (CriterionParams, ProfileConfig, SymbolPair, analyze, criterion_Q,
                                evaluate_batch, rayleigh_ratio, rayleigh_sup)
from holoblock.geometry import moebius_batch, norm_sq, one_minus_norm_sq, one_minus_phi_sq
from holoblock.quadrature import QuadratureSpec, monomial_moment, sample_ball
from holoblock.sampling import keyed_directions
from holoblock.spaces import (AGridConfig, ShellConfig, SpaceParams, exact, growth_bound_check,
                              lipschitz_check, radial_pairs)
from holoblock.symbols import (Const, blaschke_self_map, coord, disk_automorphism, identity_map)
from holoblock.witnesses import (LOWER_BOUND_FLOOR, WitnessFamily, build_witness, gradient_bound,
                                 log_witness_exponent, uniform_witness_norm_check, verify_lower_bound)

PAIRS = 10_000


def uniform_ball(n, count, rng):
    """Uniform for normalized volume: radius U^{1/(2n)} times a uniform direction."""
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    v /= np.sqrt(norm_sq(v))[:, None]
    return v * (rng.random(count) ** (1.0 / (2 * n)))[:, None]


@pytest.fixture(scope="module")
def pair_samples():
    rng = np.random.default_rng(20240611)
    return {n: (uniform_ball(n, PAIRS, rng), uniform_ball(n, PAIRS, rng)) for n in (1, 2, 3)}


def stratified(vals, wts):
    est = float(np.sum(vals * wts))
    var = 0.0
    for w in np.unique(wts):
        m = wts == w
        c = int(m.sum())
        var += (w * c) ** 2 * float(np.var(vals[m], ddof=1)) / c
    return est, math.sqrt(var)


class TestAcceptance:
    @pytest.mark.criterion(1, "Moebius involution, phi_a(0) = a, phi_a(a) = 0")
    def test_c01_moebius(self, pair_samples, record_property):
        t0 = time.perf_counter()
        inv = at0 = ata = 0.0
        for n, (A, Z) in pair_samples.items():
            for a, z in zip(A, Z):
                inv = max(inv, float(np.max(np.abs(moebius_batch(a, moebius_batch(a, z)) - z))))
                at0 = max(at0, float(np.max(np.abs(moebius_batch(a, np.zeros(n)) - a))))
                ata = max(ata, float(np.max(np.abs(moebius_batch(a, a)))))
        dt = time.perf_counter() - t0
        record_property("measured", f"involution {inv:.2e}, |phi_a(0)-a| {at0:.2e}, |phi_a(a)| {ata:.2e}, "
                                    f"{dt:.1f}s")
        assert inv < 1e-10 and at0 < 1e-12 and ata < 1e-12
        assert dt < 10

    @pytest.mark.criterion(2, "kernel identity for 1 - |phi_a(z)|^2")
    def test_c02_kernel_identity(self, pair_samples, record_property):
        worst = 0.0
        for A, Z in pair_samples.values():
            for a, z in zip(A, Z):
                rhs = one_minus_phi_sq(a, z)
                lhs = one_minus_norm_sq(moebius_batch(a, z, extended=True))
                worst = max(worst, abs(lhs - rhs) / rhs)
        record_property("measured", f"max relative error {worst:.2e}")
        assert worst < 1e-10

    @pytest.mark.criterion(3, "monomial moments, N = 1e6, 3 sigma and 2%")
    def test_c03_moments(self, record_property):
        t0 = time.perf_counter()
        worst_sigma, worst_rel = 0.0, 0.0
        for n in (1, 2, 3):
            z = np.zeros(n, dtype=np.complex128)
            z[0] = 0.6
            z[-1] += 0.5j
            W, wts = sample_ball(n, QuadratureSpec(1_000_000, n, "radial-stratified", levels=16))
            zw = np.abs(W @ np.conj(z)) ** 2
            c = 1.0 - norm_sq(W)
            for m in (0, 1, 2):
                for t in (0, 1):
                    est, se = stratified(zw**m * c**t, wts)
                    ref = monomial_moment(n, m, t, z)
                    err = abs(est - ref)
                    # 3 sigma plus a 1e-12 floor for the zero-variance (m, t) = (0, 0) case
                    worst_sigma = max(worst_sigma, max(err - 1e-12, 0.0) / se if se > 0 else
                                      (0.0 if err <= 1e-12 else math.inf))
                    worst_rel = max(worst_rel, err / ref)
        dt = time.perf_counter() - t0
        record_property("measured", f"max {worst_sigma:.2f} sigma, max relative {worst_rel:.2e}, {dt:.1f}s")
        assert worst_sigma <= 3.0 and worst_rel <= 0.02
        assert dt < 120

    @pytest.mark.criterion(4, "eigen-based inner sup dominates 1e5 directions, reaches 0.99")
    def test_c04_rayleigh(self, record_property):
        t0 = time.perf_counter()
        rng = np.random.default_rng(4)
        excess, gap = -math.inf, 0.0
        for i in range(100):
            w, phiw = uniform_ball(2, 2, rng) * 0.999
            J = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            lam = rayleigh_sup(w, phiw, J)
            best = float(np.max(rayleigh_ratio(w, phiw, J, keyed_directions(2, 100_000, 4, "acc", i))))
            excess = max(excess, best - lam * (1 + 1e-12))
            gap = max(gap, 1.0 - best / lam)
        dt = time.perf_counter() - t0
        record_property("measured", f"max excess {excess:.2e}, max gap {gap:.2e}, {dt:.1f}s")
        assert excess <= 0.0 and gap <= 0.01
        assert dt < 60

    @pytest.mark.criterion(5, "one-variable reduction of Q")
    def test_c05_one_variable(self, record_property):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(1000):
            zeros = [complex(*rng.uniform(-0.6, 0.6, 2)) for _ in range(int(rng.integers(1, 4)))]
            phi = blaschke_self_map(zeros, complex(np.exp(2j * np.pi * rng.random()) * rng.uniform(0.3, 1)))
            psi = Const(complex(*rng.standard_normal(2))) + Const(complex(*rng.standard_normal(2))) * coord(1)
            k, alpha = rng.uniform(0.2, 3), rng.uniform(0, 3)
            w = complex(*rng.standard_normal(2))
            w *= rng.uniform(0, 0.99) / abs(w)
            # oracle: one-variable closed form with phi' from central differences of phi's value
            h = 1e-6
            fw = phi.value(np.array([[w]]))[0, 0]
            dphi = (phi.value(np.array([[w + h]]))[0, 0] - phi.value(np.array([[w - h]]))[0, 0]) / (2 * h)
            exact_d = phi.value_and_jacobian(np.array([[w]]))[1][0, 0, 0]
            assert abs(dphi - exact_d) <= 1e-6 * max(1.0, abs(exact_d))
            ref = abs(psi(np.array([w]))) * (1 - abs(w) ** 2) ** alpha * abs(exact_d) / (1 - abs(fw) ** 2) ** k
            q = criterion_Q(psi, phi, CriterionParams(1, k, alpha), np.array([w]))
            worst = max(worst, abs(q - ref) / ref)
        record_property("measured", f"max relative error {worst:.2e}")
        assert worst < 1e-12

    @pytest.mark.criterion(6, "Schwarz-Pick: automorphisms Q = 1, 50 self-maps sup Q <= 1")
    def test_c06_schwarz_pick(self, record_property):
        rng = np.random.default_rng(6)
        params = CriterionParams(1, 1, 1)
        cfg = ProfileConfig(levels=10, per_shell=256, seed=6)
        aut = 0.0
        for _ in range(10):
            a = complex(*rng.uniform(-0.6, 0.6, 2))
            phi = disk_automorphism(a, np.exp(2j * np.pi * rng.random()))
            prof, _ = analyze(SymbolPair(Const(1.0), phi), params, cfg)
            # stay inside the sampler's outermost shell: past it, float64 phi limits the
            # relative accuracy of 1 - |phi|^2 to about eps / (1 - |phi|^2)
            W = uniform_ball(1, 2000, rng) * (1 - 2.0**-10)
            _, Q, _ = evaluate_batch(SymbolPair(Const(1.0), phi), params, W)
            aut = max(aut, float(np.max(np.abs(prof.Q - 1))), float(np.max(np.abs(Q - 1))))
        sup_q = 0.0
        for _ in range(50):
            zeros = [complex(*rng.uniform(-0.7, 0.7, 2)) for _ in range(int(rng.integers(2, 4)))]
            phi = blaschke_self_map(zeros, complex(np.exp(2j * np.pi * rng.random()) * rng.uniform(0.5, 1)))
            prof, _ = analyze(SymbolPair(Const(1.0), phi), params, cfg)
            sup_q = max(sup_q, prof.sup_Q)
        record_property("measured", f"automorphism |Q-1| {aut:.2e}, self-map sup Q {sup_q:.6f}")
        assert aut <= 1e-10 and sup_q <= 1 + 1e-6

    @pytest.mark.criterion(7, "identity operator threshold at alpha = k")
    def test_c07_identity_threshold(self, record_property):
        t0 = time.perf_counter()
        rows = []
        for n in (1, 2):
            pair = SymbolPair(Const(1.0), identity_map(n))
            for k in (exact("1/2"), exact(1), exact(2)):
                for d, expect in ((exact(0), ("yes", "no")), (exact("1/4"), ("yes", "yes")),
                                  (exact("-1/2"), ("no", "not-applicable"))):
                    if k + d < 0:
                        continue
                    _, v = analyze(pair, CriterionParams(n, k, k + d), ProfileConfig(10, 64, 7))
                    rows.append((n, str(k), str(d), (v.bounded, v.compact), expect))
        bad = [r for r in rows if r[3] != r[4]]
        dt = time.perf_counter() - t0
        record_property("measured", f"{len(rows) - len(bad)}/{len(rows)} verdicts match, {dt:.1f}s")
        assert not bad, bad
        assert dt < 120

    @pytest.mark.criterion(8, "growth bound with explicit constants, 20-function corpus")
    def test_c08_growth(self, record_property):
        rng = np.random.default_rng(8)
        worst, fails = 0.0, []
        for n in (1, 2):
            Z = uniform_ball(n, 2000, rng) * (1 - 1e-6)
            corpus = function_corpus(n, 8)
            assert len(corpus) == 20
            for p in ("1/2", "1", "3/2"):
                for name, f in corpus:
                    rep = growth_bound_check(f, exact(p), Z, config=ShellConfig(10, 128))
                    worst = max(worst, rep.max_ratio)
                    if not rep.passed:
                        fails.append((n, p, name))
        record_property("measured", f"max |f|/bound {worst:.3f}")
        assert not fails, fails

    @pytest.mark.criterion(9, "Lipschitz bound on 1e4 radial pairs")
    def test_c09_lipschitz(self, record_property):
        worst, fails = 0.0, []
        for n in (1, 2):
            Zp, W = radial_pairs(n, 10_000, 9)
            for p in ("1/4", "1/2", "3/4"):
                for name, f in function_corpus(n, 9):
                    rep = lipschitz_check(f, exact(p), Zp, W, config=ShellConfig(10, 128))
                    worst = max(worst, rep.max_ratio)
                    if not rep.passed:
                        fails.append((n, p, name))
        record_property("measured", f"max ratio {worst:.3f}")
        assert not fails, fails

    @pytest.mark.criterion(10, "witness suite: gradient bound, uniform norms, lower bound")
    def test_c10_witnesses(self, record_property):
        t0 = time.perf_counter()
        rng = np.random.default_rng(10)
        sharp = 0.0
        for n in (1, 2):
            near = np.zeros((200, n), dtype=np.complex128)
            near[:, 0] = 1 - np.geomspace(1e-9, 1e-1, 200)
            Z = np.vstack([uniform_ball(n, 5000, rng), near])
            for r in (0.85, 0.99, 0.9999):
                for k in ("1/2", "1", "5/2"):
                    fam = WitnessFamily("eq24-rational", r, k, n)
                    g = np.sqrt(norm_sq(build_witness(fam).value_and_grad(Z)[1]))
                    sharp = max(sharp, float(np.max(g / gradient_bound(fam, Z))))
        ladders = []
        for kind, n, (p, q, s) in (("eq24-rational", 1, ("2", "0", "1")), ("thm1-log-sgtn", 1, ("2", "0", "2")),
                                   ("thm1-log-sletn", 1, ("2", "0", "1")), ("eq24-rational", 2, ("3", "0", "1")),
                                   ("thm1-log-sgtn", 2, ("3", "0", "3")), ("thm1-log-sletn", 2, ("3", "0", "2"))):
            sp = SpaceParams(n, p, q, s, "1")
            kw = {"p": sp.p, "x": log_witness_exponent(n, sp.p, sp.s)} if kind == "thm1-log-sletn" else {}
            rep = uniform_witness_norm_check(WitnessFamily(kind, 0.9, sp.k, n, **kw), sp, (0.9, 0.99, 0.999),
                                             QuadratureSpec(2000, 10), AGridConfig(seed=10))
            ladders.append((kind, n, rep.passed, max(rep.values) / rep.median))
        lower = []
        for n, (p, q, s) in ((1, ("2", "0", "1")), (2, ("3", "0", "1"))):
            dirs = keyed_directions(n, 3, 10, "acc-omega")
            omegas = [r * d for r in (0.85, 0.99, 0.999) for d in dirs]
            rep = verify_lower_bound(SymbolPair(Const(1.0), identity_map(n)), SpaceParams(n, p, q, s, "1"),
                                     omegas, list(keyed_directions(n, 3, 10, "acc-u")),
                                     ShellConfig(8, 64, 10))
            lower.append(rep.min_ratio)
        dt = time.perf_counter() - t0
        record_property("measured", f"gradient ratio {sharp:.4f}, ladder max/median "
                                    f"{max(x[3] for x in ladders):.3f}, lower-bound min ratio {min(lower):.3f} "
                                    f"(floor {LOWER_BOUND_FLOOR}), {dt:.1f}s")
        assert sharp <= 1.0
        assert all(x[2] for x in ladders), ladders
        assert min(lower) > LOWER_BOUND_FLOOR
        assert dt < 300

    @pytest.mark.xfail(strict=True, reason="the (1+k) constant is exceeded near z1 = 1; (k+2) is sharp")
    def test_c10_gradient_bound_with_printed_constant(self):
        worst = 0.0
        for k in ("1/2", "1", "5/2"):
            fam = WitnessFamily("eq24-rational", 0.9999, k, 1)
            Z = (1 - np.geomspace(1e-9, 1e-1, 400))[:, None] + 0j
            g = np.abs(build_witness(fam).value_and_grad(Z)[1][:, 0])
            ratio = g / gradient_bound(fam, Z, 1 + float(fam.k))
            worst = max(worst, float(np.max(ratio)))
            assert np.max(ratio) <= (float(fam.k) + 2) / (float(fam.k) + 1) + 1e-12
        assert worst <= 1.0

    @pytest.mark.criterion(11, "analyze is byte-identical across runs and worker counts")
    def test_c11_determinism(self, tmp_path, record_property):
        config = {
            "version": 1,
            "symbols": {"psi": {"kind": "sum", "terms": [{"kind": "const", "value": 1},
                                                          {"kind": "coord", "index": 2}]},
                        "phi": [{"kind": "prod", "factors": [{"kind": "const", "value": 0.9},
                                                              {"kind": "coord", "index": 1}]},
                                {"kind": "coord", "index": 2}]},
            "params": {"n": 2, "p": "3", "q": "0", "s": "1", "alpha": "1"},
            "sampler": {"seed": 11, "levels": 10, "per_shell": 64},
            "outputs": {"stem": "det", "formats": ["json", "csv"]},
        }
        path = tmp_path / "det.json"
        path.write_text(json.dumps(config))
        blobs = []
        for i, workers in enumerate((1, 1, 2, 4)):
            out = tmp_path / f"run{i}"
            assert main(["analyze", "--config", str(path), "--out", str(out), "--workers", str(workers)]) == 0
            report = json.loads((out / "det.json").read_text())
            blobs.append(((out / "det.csv").read_bytes(), dumps(identity_view(report)).encode()))
        same = all(b == blobs[0] for b in blobs)
        record_property("measured", f"{len(blobs)} runs, workers 1/1/2/4, identical={same}")
        assert same
