import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoblock.corpus import random_polynomial
from holoblock.symbols import (AtomLog, AtomPow, Const, IPow, Prod, SelfMapSymbol, Sum, SymbolError,
                               Unitary, compose, coord, disk_automorphism, eval, from_dict, gradient,
                               identity_map, jacobian, moebius_symbol, radial_derivative,
                               scaled_identity, validate_self_map)


def fd_gradient(f, z, h=1e-5):
    """Central differences along real and imaginary perturbations; holomorphic => agree."""
    z = np.asarray(z, dtype=np.complex128)
    re, im = [], []
    for j in range(len(z)):
        e = np.zeros_like(z)
        e[j] = h
        re.append((f(z + e) - f(z - e)) / (2 * h))
        im.append((f(z + 1j * e) - f(z - 1j * e)) / (2j * h))
    return np.array(re), np.array(im)


def trees(n, depth):
    leaves = st.one_of(
        st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False).map(Const),
        st.integers(1, n).map(coord),
        st.tuples(st.floats(0.05, 0.9), st.sampled_from(["-2", "-1/2", "1/3", "3/2"]),
                  st.integers(1, n)).map(lambda t: AtomPow(t[0], t[1], t[2])),
        st.tuples(st.floats(0.05, 0.9), st.integers(1, 3), st.integers(1, n)).map(
            lambda t: AtomLog(t[0], t[1], t[2])),
    )
    if depth == 0:
        return leaves
    sub = trees(n, depth - 1)
    return st.one_of(
        leaves,
        st.lists(sub, min_size=2, max_size=3).map(Sum),
        st.lists(sub, min_size=2, max_size=3).map(Prod),
        st.tuples(sub, st.integers(0, 3)).map(lambda t: IPow(t[0], t[1])),
    )


def ball_point(n, rng, rmax=0.9):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v) * rng.uniform(0, rmax)


class TestEval:
    def test_product(self):
        assert abs(eval(coord(1) * coord(2), [0.3, 0.5j]) - 0.15j) < 1e-15

    def test_atom_at_origin(self):
        assert eval(AtomPow(0.5, -2), [0.0]) == 1

    def test_log_atom(self):
        assert abs(eval(AtomLog(0.5), [0.5]) - math.log(4 / 3)) < 1e-15

    def test_batch_shape(self):
        Z = np.zeros((5, 2))
        assert eval(coord(2) + 1, Z).shape == (5,)


class TestGradient:
    def test_product_rule(self):
        np.testing.assert_allclose(gradient(coord(1) * coord(2), [0.2, 0.7j]), [0.7j, 0.2])

    def test_constant(self):
        np.testing.assert_array_equal(gradient(Const(3 + 1j), [0.1, 0.2]), [0, 0])

    @pytest.mark.parametrize("seed", range(5))
    def test_random_polynomial_fd(self, seed):
        rng = np.random.default_rng(seed)
        f = random_polynomial(2, 3, rng)
        z = ball_point(2, rng)
        g = gradient(f, z)
        for fd in fd_gradient(f, z):
            np.testing.assert_allclose(fd, g, rtol=1e-6, atol=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3).flatmap(lambda n: st.tuples(st.just(n), trees(n, 3))), st.integers(0, 2**31))
    def test_random_trees_fd(self, nt, seed):
        n, f = nt
        z = ball_point(n, np.random.default_rng(seed), 0.8)
        g = gradient(f, z)
        scale = max(1.0, float(np.max(np.abs(g))), abs(f(z)))
        for fd in fd_gradient(f, z):
            np.testing.assert_allclose(fd, g, rtol=1e-6, atol=1e-6 * scale)

    def test_unitary_node(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        f = Unitary(q, coord(1) ** 2 * AtomPow(0.5, "-3/2", 2))
        z = ball_point(2, rng)
        for fd in fd_gradient(f, z):
            np.testing.assert_allclose(fd, gradient(f, z), rtol=1e-6)

    def test_non_unitary_rejected(self):
        with pytest.raises(SymbolError):
            Unitary([[1, 1], [0, 1]], coord(1))


class TestJacobian:
    def test_identity(self):
        np.testing.assert_array_equal(jacobian(identity_map(3), [0.1, 0.2, 0.3]), np.eye(3))

    def test_swap(self):
        phi = SelfMapSymbol((coord(2), coord(1)))
        np.testing.assert_array_equal(jacobian(phi, [0.1, 0.2]), [[0, 1], [1, 0]])

    def test_polynomial_map(self):
        a, b = 0.3 + 0.1j, -0.2j
        phi = SelfMapSymbol((coord(1) ** 2, coord(1) * coord(2)))
        np.testing.assert_allclose(jacobian(phi, [a, b]), [[2 * a, 0], [b, a]])

    @pytest.mark.parametrize("seed", range(4))
    def test_chain_rule(self, seed):
        rng = np.random.default_rng(seed)
        f = random_polynomial(2, 3, rng) * AtomLog(0.6, 1, 2)
        phi = moebius_symbol(ball_point(2, rng, 0.7))
        w = ball_point(2, rng, 0.8)
        lhs = gradient(compose(f, phi), w)
        rhs = gradient(f, phi.value(w)) @ jacobian(phi, w)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-12)


class TestRadialDerivative:
    @pytest.mark.parametrize("m", [1, 2, 3, 5])
    def test_euler(self, m):
        rng = np.random.default_rng(m)
        f = (coord(1) * Const(0.3 - 1j) + coord(2) * Const(2.0)) ** m
        z = ball_point(2, rng)
        assert abs(radial_derivative(f, z) - m * f(z)) <= 1e-12 * max(1.0, abs(f(z)))

    def test_constant(self):
        assert radial_derivative(Const(2.0), [0.3, 0.1]) == 0

    def test_square(self):
        assert abs(radial_derivative(coord(1) ** 2, [0.4, 0]) - 0.32) < 1e-15


class TestSelfMap:
    def test_contraction(self):
        rep = validate_self_map(scaled_identity(2, 0.5), 1000, 0)
        assert rep.accepted
        assert abs(rep.bound - 0.5) < 1e-3
        assert rep.symbol.certified_bound == rep.bound

    def test_expansion_rejected(self):
        rep = validate_self_map(scaled_identity(1, 2.0), 100, 0)
        assert not rep.accepted
        assert abs(abs(rep.argmax[0]) * 2 - rep.bound) < 1e-12

    def test_automorphism_bound_approaches_one(self):
        phi = moebius_symbol(np.array([0.3, 0.2j]))
        coarse = validate_self_map(phi, 400, 0, levels=4).bound
        fine = validate_self_map(phi, 4000, 0, levels=16).bound
        assert coarse < fine < 1.0
        assert fine > 0.9999

    def test_moebius_symbol_matches_geometry(self):
        from holoblock.geometry import moebius_batch
        a = np.array([0.4, -0.3j])
        Z = np.array([[0.1, 0.2], [0.5j, -0.5], [0.0, 0.0]])
        np.testing.assert_allclose(moebius_symbol(a).value(Z), moebius_batch(a, Z), atol=1e-14)

    def test_disk_automorphism(self):
        phi = disk_automorphism(0.5, 1j)
        assert abs(phi.value(np.array([0.25]))[0] - 1j * 2 / 7) < 1e-14

    def test_component_dimension(self):
        with pytest.raises(SymbolError):
            SelfMapSymbol((coord(3), coord(1)))


class TestAtoms:
    def test_r_range(self):
        for r in (0.0, 1.0, -0.1):
            with pytest.raises(SymbolError):
                AtomPow(r, -1)

    def test_exact_exponent_strings(self):
        assert AtomPow("0.5", "-3/2").to_dict()["exponent"] == "-3/2"

    def test_log_integer_power_holomorphic(self):
        assert AtomLog(0.5, 2).holomorphic
        assert not AtomLog(0.5, "3/2").holomorphic

    def test_guard_on_substitution(self):
        # substituting a non-self-map component can push 1 - r*arg into the left half-plane
        f = AtomPow(0.9, -1).substitute([Const(3.0)])
        with pytest.raises(SymbolError):
            f.value(np.zeros((1, 1)))


class TestSerialization:
    def test_roundtrip(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        f = Unitary(q, Sum((coord(1) ** 3, Prod((Const(1 - 2j), AtomPow(0.25, "-5/2", 2))),
                            AtomLog(0.75, 2, 1))))
        g = from_dict(f.to_dict())
        Z = np.array([[0.1 + 0.2j, -0.3], [0.5, 0.5j]])
        np.testing.assert_allclose(g.value(Z), f.value(Z), rtol=1e-15)

    def test_error_path(self):
        bad = {"kind": "sum", "terms": [{"kind": "coord", "index": 1}, {"kind": "atompow", "r": "0.5"}]}
        with pytest.raises(SymbolError) as exc:
            from_dict(bad)
        assert exc.value.path == "$.terms[1]"

    def test_unknown_kind(self):
        with pytest.raises(SymbolError, match="unknown node kind"):
            from_dict({"kind": "conj"})

    def test_ipow_exponent_integer(self):
        with pytest.raises(SymbolError):
            from_dict({"kind": "ipow", "base": {"kind": "coord", "index": 1}, "exponent": "1/2"})
