import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoblock.corpus import function_corpus
from holoblock.geometry import norm_sq
from holoblock.quadrature import QuadratureSpec
from holoblock.sampling import keyed_directions
from holoblock.spaces import (AGridConfig, ParamError, ShellConfig, SpaceParams, a_grid, bloch_norm,
                              bloch_norm_radial, directional_ratio, directional_seminorm_at, exact,
                              fpqs_seminorm, g_growth, growth_bound_check, growth_constant,
                              lipschitz_check, radial_pairs, regime_of)
from holoblock.symbols import AtomLog, AtomPow, Const, coord

FAST = ShellConfig(levels=8, per_shell=64)
#: frozen fits over the corpus (n = 1, 2): radial equivalence and F(p,q,s) -> beta^k inclusion
RADIAL_C = 3.0
INCLUSION_C = 3.0


class TestParams:
    def test_k_exact(self):
        sp = SpaceParams(2, "3", "0", "1", "1")
        assert sp.k == 1 and isinstance(sp.k, Fraction)
        assert sp.regime == "k=1"

    def test_k_third(self):
        sp = SpaceParams(2, "9", "0", "0", "0")
        assert sp.k == Fraction(1, 3)

    def test_float_input_normalized(self):
        assert SpaceParams(1, 0.5, 0, 0, 1).p == Fraction(1, 2)

    @pytest.mark.parametrize("kw,field", [
        (dict(p="0"), "p"), (dict(s="-1"), "s"), (dict(q="-3"), "q"), (dict(q="-1.5", s="0"), "q"),
        (dict(alpha="-0.1"), "alpha"),
    ])
    def test_rejections(self, kw, field):
        base = dict(n=1, p="2", q="0", s="1", alpha="1")
        base.update(kw)
        with pytest.raises(ParamError) as exc:
            SpaceParams(**base)
        assert exc.value.field == field

    def test_regime_of(self):
        assert regime_of(Fraction(1, 2)) == "k<1"
        assert regime_of(1.0 + 1e-15) == "k=1"
        assert regime_of(exact("5/2")) == "k>1"


class TestGrowthFunction:
    def test_examples(self):
        assert g_growth(Fraction(1, 2), [0.5]) == 1.0
        assert g_growth(1, [math.sqrt(0.5)]) == pytest.approx(math.log(4), rel=1e-14)
        assert g_growth(2, [math.sqrt(0.75)]) == pytest.approx(4.0, rel=1e-13)

    def test_nonpositive(self):
        with pytest.raises(ValueError):
            g_growth(0, [0.1])

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 0.999), st.sampled_from(["1/3", "1", "3/2", "4"]))
    def test_at_least_one_like(self, r, t):
        assert g_growth(exact(t), [r]) >= min(1.0, math.log(2)) - 1e-15


class TestBloch:
    def test_coordinate(self):
        assert abs(bloch_norm(coord(1), 1, ShellConfig(10), n=2).value - 1.0) < 1e-6

    def test_log_near_boundary(self):
        assert abs(bloch_norm(AtomLog(1 - 1e-9, 1, 1), 1, ShellConfig(10), n=1).value - 2.0) < 1e-3

    def test_constant(self):
        assert bloch_norm(Const(3 - 4j), 1, FAST, n=2).value == pytest.approx(5.0, abs=1e-12)

    def test_atom_closed_form(self):
        # f = (1 - r z)^{-1}: sup_x (1-x^2) r/(1-rx)^2 on [0,1), oracle by dense grid
        r = 0.5
        x = np.linspace(0, 1, 200001)[:-1]
        oracle = 1.0 + float(np.max((1 - x * x) * r / (1 - r * x) ** 2))
        est = bloch_norm(AtomPow(r, -1, 1), 1, FAST, n=1).value
        assert est == pytest.approx(oracle, rel=1e-6)

    def test_euler_radial(self):
        # R(z1^m) = m z1^m, so the radial norm of z1^m is sup m r^m (1-r^2) ~ closed form
        m = 3
        x = math.sqrt(m / (m + 2.0))
        oracle = m * x**m * (1 - x * x)
        est = bloch_norm_radial(coord(1) ** m, 1, FAST, n=2).value
        assert est == pytest.approx(oracle, rel=1e-6)

    def test_alpha_negative(self):
        with pytest.raises(ParamError):
            bloch_norm(coord(1), -1, FAST)

    @pytest.mark.parametrize("n", [1, 2])
    def test_radial_equivalence(self, n):
        for name, f in function_corpus(n):
            full = bloch_norm(f, 1, FAST, n=n).value
            rad = bloch_norm_radial(f, 1, FAST, n=n).value
            assert rad <= full * (1 + 1e-9), name
            assert full <= RADIAL_C * rad, name


class TestDirectional:
    @pytest.mark.parametrize("idx", range(6))
    def test_closed_form_vs_sampled(self, idx):
        name, f = function_corpus(2)[idx + 1]
        z = np.array([0.5 + 0.1j, -0.3j])
        exact_v = directional_seminorm_at(f, z, 1.5)
        sampled = directional_ratio(f, z, 1.5, keyed_directions(2, 20000, 0, "t", idx))
        assert np.max(sampled) <= exact_v * (1 + 1e-12) + 1e-15
        assert np.max(sampled) >= 0.99 * exact_v

    def test_one_variable(self):
        # n = 1: the denominator is identically 1, leaving (1-|z|^2)^p |f'(z)|
        v = directional_seminorm_at(coord(1) ** 2, np.array([0.6]), 1.0)
        assert v == pytest.approx(0.64 * 1.2, rel=1e-12)


class TestPointwise:
    @pytest.mark.parametrize("p", ["1/2", "1", "3/2"])
    def test_growth_bound_corpus(self, p):
        rng = np.random.default_rng(0)
        for n in (1, 2):
            Z = rng.standard_normal((300, n)) + 1j * rng.standard_normal((300, n))
            Z *= (rng.random(300) ** (1 / (2 * n)) * 0.999 / np.sqrt(norm_sq(Z)))[:, None]
            for name, f in function_corpus(n):
                assert growth_bound_check(f, exact(p), Z, config=FAST).passed, (n, name)

    def test_growth_constant_regimes(self):
        assert growth_constant(Fraction(1, 2), [0.0])[0] == 3.0
        assert growth_constant(1, [0.0])[0] == pytest.approx(1 + 0.5 * math.log(4))
        assert growth_constant(2, [0.75])[0] == pytest.approx(1 + 2 / 0.25)

    @pytest.mark.parametrize("p", ["1/4", "1/2", "3/4"])
    def test_lipschitz_corpus(self, p):
        for n in (1, 2):
            Zp, W = radial_pairs(n, 500, 1)
            for name, f in function_corpus(n):
                assert lipschitz_check(f, exact(p), Zp, W, config=FAST).passed, (n, name)

    def test_lipschitz_rejects_noncollinear(self):
        with pytest.raises(ValueError):
            lipschitz_check(coord(1), exact("1/2"), np.array([[0.1, 0.2]]), np.array([[0.2, 0.1]]))

    def test_lipschitz_p_range(self):
        with pytest.raises(ParamError):
            lipschitz_check(coord(1), 1, np.array([[0.1]]), np.array([[0.2]]))


class TestFpqs:
    def test_constant(self):
        est = fpqs_seminorm(Const(2j), SpaceParams(2, "2", "0", "1", "1"), QuadratureSpec(1000),
                            AGridConfig(levels=2))
        assert est.value == pytest.approx(2.0, abs=1e-12)

    def test_seed_agreement(self):
        sp = SpaceParams(1, "2", "0", "1", "1")
        a = fpqs_seminorm(coord(1), sp, QuadratureSpec(20000, 1), AGridConfig(levels=3))
        b = fpqs_seminorm(coord(1), sp, QuadratureSpec(20000, 2), AGridConfig(levels=3))
        se = math.hypot(a.extra["seminorm_se"], b.extra["seminorm_se"])
        assert abs(a.value - b.value) <= 3 * se + 1e-3

    def test_s_zero_single_pole(self):
        est = fpqs_seminorm(coord(1), SpaceParams(1, "2", "0", "0", "1"), QuadratureSpec(20000))
        # int |f'|^2 dv = 1 for f = z1
        assert est.extra["poles"] == 1
        assert est.value == pytest.approx(1.0, abs=1e-12)

    def test_a_grid_hints(self):
        c = np.array([0.0, 0.99])
        grid = a_grid(2, AGridConfig(levels=3, directions=4), hints=[c])
        assert grid[0][0] == 0
        assert any(np.allclose(a, [0.0, 0.98]) for _, a in grid)
        assert all(norm_sq(a) < 1 for _, a in grid)

    @pytest.mark.parametrize("n,p", [(1, "2"), (2, "3")])
    def test_inclusion_constant(self, n, p):
        sp = SpaceParams(n, p, "0", "1", "0")
        quad, agrid = QuadratureSpec(2000), AGridConfig(levels=4)
        for name, f in function_corpus(n)[1:8]:
            b = bloch_norm(f, sp.k, FAST, n=n).value
            fs = fpqs_seminorm(f, sp, quad, agrid).value
            assert b <= INCLUSION_C * fs, name
