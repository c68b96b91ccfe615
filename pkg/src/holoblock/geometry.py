"""Complex-vector arithmetic on C^n, Moebius automorphisms of the unit ball
and the invariant Green's function.

Inner products are conjugate-linear in the second slot:
``<z, w> = sum_j z_j * conj(w_j)``.

Every function here accepts either a single point of shape ``(n,)`` or a
batch of shape ``(N, n)``; batched inputs broadcast against a single ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Points with ``|z|^2 >= 1 - BOUNDARY_MARGIN`` are rejected by constructors.
BOUNDARY_MARGIN = 1e-14
#: ``|phi_a(z)|`` below this value is treated as the pole of the Green function.
GREEN_POLE_CUTOFF = 1e-15


class BallError(ValueError):
    """Raised for points that are not strictly inside the unit ball."""


def as_complex_vector(coords) -> np.ndarray:
    v = np.asarray(coords, dtype=np.complex128)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValueError(f"expected a non-empty 1-d complex vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("complex vector has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class BallPoint:
    """A point of the open unit ball of C^n with its cached squared norm."""

    vector: np.ndarray
    norm_sq: float = field(init=False)

    def __post_init__(self):
        v = as_complex_vector(self.vector)
        v.setflags(write=False)
        nsq = float(np.vdot(v, v).real)
        if nsq >= 1.0 - BOUNDARY_MARGIN:
            raise BallError(f"|z|^2 = {nsq!r} is not inside the ball (margin {BOUNDARY_MARGIN})")
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "norm_sq", nsq)

    @classmethod
    def of(cls, *coords) -> "BallPoint":
        if len(coords) == 1 and np.ndim(coords[0]) == 1:
            return cls(np.asarray(coords[0]))
        return cls(np.asarray(coords))

    @property
    def n(self) -> int:
        return self.vector.shape[0]

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    def __array__(self, dtype=None, copy=None):
        return self.vector if dtype is None else self.vector.astype(dtype)

    def __repr__(self) -> str:
        return f"BallPoint({self.vector.tolist()!r})"


def _vec(x) -> np.ndarray:
    if isinstance(x, BallPoint):
        return x.vector
    return np.asarray(x, dtype=np.complex128)


def hermitian_inner(z, w):
    """``sum_j z_j conj(w_j)`` over the last axis."""
    z, w = _vec(z), _vec(w)
    if z.shape[-1] != w.shape[-1]:
        raise ValueError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    out = np.sum(z * np.conj(w), axis=-1)
    return complex(out) if np.ndim(out) == 0 else out


def norm_sq(z):
    z = _vec(z)
    out = np.sum(z.real**2 + z.imag**2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """The involutive automorphism ``phi_a`` with ``phi_a(0) = a``, ``phi_a(a) = 0``.

    ``phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>)`` where ``P_a`` projects
    onto span(a), ``Q_a = I - P_a`` and ``s_a = sqrt(1 - |a|^2)``; ``phi_0 = -id``.
    """

    a: BallPoint
    s_a: float = field(init=False)

    def __post_init__(self):
        a = self.a if isinstance(self.a, BallPoint) else BallPoint(self.a)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "s_a", float(np.sqrt(1.0 - a.norm_sq)))

    def __call__(self, z):
        return moebius_apply(self, z)


def _xvec(x) -> np.ndarray:
    if isinstance(x, BallPoint):
        x = x.vector
    return np.asarray(x).astype(np.clongdouble)


def moebius_batch(a, z, extended: bool = False) -> np.ndarray:
    """Apply ``phi_a`` to ``z`` of shape ``(n,)`` or ``(N, n)`` without validation.

    Evaluated in extended precision: near the sphere ``1 - <z, a>`` and the
    numerator both cancel, and float64 alone loses ~1e-10 in the involution.
    ``extended=True`` returns the unrounded extended-precision result.
    """
    a, z = _xvec(a), _xvec(z)
    dtype = np.clongdouble if extended else np.complex128
    asq = np.sum(a.real**2 + a.imag**2)
    if asq == 0.0:
        return (-z).astype(dtype)
    za = np.sum(z * np.conj(a), axis=-1)  # <z, a>
    s_a = np.sqrt(1.0 - asq)
    proj = (za / asq)[..., None] * a  # P_a z
    num = a - proj - s_a * (z - proj)
    return (num / (1.0 - za)[..., None]).astype(dtype)


def one_minus_norm_sq(z):
    """``1 - |z|^2`` accumulated in extended precision."""
    z = _xvec(z)
    out = (1.0 - np.sum(z.real**2 + z.imag**2, axis=-1)).astype(float)
    return float(out) if np.ndim(out) == 0 else out


def moebius_apply(m: MoebiusMap, z) -> BallPoint | np.ndarray:
    """``phi_a(z)``; returns a :class:`BallPoint` for a single BallPoint input."""
    if isinstance(z, BallPoint):
        if z.n != m.a.n:
            raise ValueError(f"dimension mismatch: {z.n} vs {m.a.n}")
        out = moebius_batch(m.a.vector, z.vector)
        # phi_a is a bijection of the ball; clamp roundoff at the margin.
        nsq = norm_sq(out)
        if nsq >= 1.0 - BOUNDARY_MARGIN:
            out = out * np.sqrt((1.0 - 2 * BOUNDARY_MARGIN) / nsq)
        return BallPoint(out)
    return moebius_batch(m.a.vector, z)


def one_minus_phi_sq(a, z):
    """``1 - |phi_a(z)|^2 = (1-|a|^2)(1-|z|^2) / |1 - <z,a>|^2``, in extended precision."""
    a, z = _xvec(a), _xvec(z)
    za = np.sum(z * np.conj(a), axis=-1)
    ca = 1.0 - np.sum(a.real**2 + a.imag**2, axis=-1)
    cz = 1.0 - np.sum(z.real**2 + z.imag**2, axis=-1)
    d = 1.0 - za
    out = (ca * cz / (d.real**2 + d.imag**2)).astype(float)
    return float(out) if np.ndim(out) == 0 else out


def green_batch(z, a) -> np.ndarray:
    """``log(1/|phi_a(z)|)`` elementwise; ``inf`` at the pole."""
    z = np.atleast_2d(_vec(z))
    a = _vec(a)
    x = np.asarray(one_minus_phi_sq(a, z), dtype=float)
    out = np.empty_like(x)
    far = x <= 0.5
    # away from the pole: -1/2 log(1 - x) keeps precision as |phi_a(z)| -> 1
    out[far] = -0.5 * np.log1p(-x[far])
    near = ~far
    if np.any(near):
        r = np.sqrt(norm_sq(moebius_batch(a, z[near])))
        with np.errstate(divide="ignore"):
            out[near] = np.where(r < GREEN_POLE_CUTOFF, np.inf, -np.log(r))
    return out


def green(z, a) -> float:
    """Green's function ``g(z, a) = log(1/|phi_a(z)|)``; ``math.inf`` when ``z = a``."""
    z, a = _vec(z), _vec(a)
    if z.shape != a.shape:
        raise ValueError(f"dimension mismatch: {z.shape} vs {a.shape}")
    return float(green_batch(z[None, :], a)[0])


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix (QR of a complex Ginibre matrix)."""
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def align_to_e1(v) -> np.ndarray:
    """Unitary ``V`` with ``V v = |v| e_1``; identity when ``v = 0``."""
    v = _vec(v)
    n = v.shape[0]
    nv = np.sqrt(norm_sq(v))
    if nv == 0.0:
        return np.eye(n, dtype=np.complex128)
    q, r = np.linalg.qr(v.reshape(n, 1), mode="complete")
    phase = r[0, 0] / abs(r[0, 0])
    q[:, 0] *= phase
    return q.conj().T
