"""A fixed corpus of holomorphic test functions on the ball of C^n."""

from __future__ import annotations

import numpy as np

from .geometry import random_unitary
from .sampling import stream
from .symbols import AtomLog, AtomPow, Const, HoloExpr, Unitary, coord


def function_corpus(n: int, seed: int = 0) -> list[tuple[str, HoloExpr]]:
    """Twenty named functions: polynomials, atom powers, logs, products and rotations.

    Every member extends holomorphically past the closed ball, so all of its
    Bloch-type norms are finite.
    """
    z = [coord(i + 1) for i in range(n)]
    z1 = z[0]
    z2 = z[1] if n > 1 else z[0]
    rng = stream(seed, "corpus", n)
    U = random_unitary(n, rng)
    c = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    out = [
        ("const", Const(1.5 - 0.5j)),
        ("z1", z1),
        ("z1+2iz2", z1 + Const(2j) * z2),
        ("z1^2", z1**2),
        ("z1*z2", z1 * z2),
        ("cubic", Const(c[0]) * z1**3 + Const(c[1]) * z1 * z2 + Const(c[2]) * z2),
        ("quartic", (z1 + z2) ** 4 - Const(0.5) * z1),
        ("z1^7", z1**7),
        ("atom(-1)", AtomPow(0.5, -1, 1)),
        ("atom(-2)", AtomPow(0.8, -2, 1)),
        ("atom(1/2)", AtomPow(0.9, "1/2", 1)),
        ("atom(-3/2)", AtomPow(0.7, "-3/2", 1)),
        ("log", AtomLog(0.9, 1, 1)),
        ("log^2", AtomLog(0.95, 2, 1)),
        ("z2*log", z2 * AtomLog(0.6, 1, 1)),
        ("atom*poly", AtomPow(0.6, -1, 1) * (Const(1.0) + z2**2)),
        ("rotated atom", Unitary(U, AtomPow(0.85, -1, 1))),
        ("rotated cubic", Unitary(U, z1**3 - Const(c[3]) * z2)),
        ("log^3", AtomLog(0.7, 3, 1)),
        ("mixed", Const(c[4]) + Const(c[5]) * z1 * AtomPow(0.5, -2, 1) + AtomLog(0.5, 1, 1)),
    ]
    return out


def random_polynomial(n: int, degree: int, rng: np.random.Generator) -> HoloExpr:
    """Sum of ``degree + 2`` random monomials of total degree at most ``degree``."""
    z = [coord(i + 1) for i in range(n)]
    terms = []
    for _ in range(degree + 2):
        coef = complex(rng.standard_normal(), rng.standard_normal())
        powers = rng.multinomial(int(rng.integers(0, degree + 1)), np.ones(n) / n)
        term: HoloExpr = Const(coef)
        for zi, m in zip(z, powers):
            if m:
                term = term * zi**int(m)
        terms.append(term)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out
