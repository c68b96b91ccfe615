"""Closed grammar of holomorphic expressions with exact evaluation and gradients.

The grammar covers constants, coordinates ``z_1..z_n``, sums, products,
integer powers, real powers of the atom ``(1 - r z_j)`` with ``0 < r < 1``,
powers of ``log(1/(1 - r z_j))`` and precomposition with a fixed unitary
matrix.  The atom ``1 - r z_j`` has positive real part on the ball, so its
principal powers and logarithm are single valued there.

Evaluation is vectorised: every node maps a batch ``Z`` of shape ``(N, n)``
to values of shape ``(N,)`` and gradients of shape ``(N, n)``.  Gradients
are produced by the differentiation rules of each node (forward mode), so
they are exact up to floating point rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from .geometry import BallPoint, align_to_e1, norm_sq
from .sampling import shell_samples


class SymbolError(ValueError):
    """Malformed expression tree or serialized symbol."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _as_batch(z) -> tuple[np.ndarray, bool]:
    if isinstance(z, BallPoint):
        return z.vector[None, :], True
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 1:
        return z[None, :], True
    if z.ndim != 2:
        raise ValueError(f"expected shape (n,) or (N, n), got {z.shape}")
    return z, False


def _exponent(x) -> Fraction | float:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise SymbolError(f"bad exponent string {x!r}") from exc
    if isinstance(x, float):
        if not math.isfinite(x):
            raise SymbolError(f"non-finite exponent {x!r}")
        return x
    raise SymbolError(f"bad exponent {x!r}")


def _exponent_str(x: Fraction | float) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _is_integer(x: Fraction | float) -> bool:
    return (isinstance(x, Fraction) and x.denominator == 1) or (
        isinstance(x, float) and x.is_integer()
    )


class HoloExpr:
    """Base class of expression nodes; nodes are immutable after construction."""

    kind = "expr"
    __slots__ = ()

    def value(self, Z: np.ndarray) -> np.ndarray:
        return self.value_and_grad(Z)[0]

    def value_and_grad(self, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def substitute(self, comps: Sequence["HoloExpr"]) -> "HoloExpr":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def max_coord(self) -> int:
        return 0

    def children(self) -> tuple["HoloExpr", ...]:
        return ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)

    def __call__(self, z):
        Z, single = _as_batch(z)
        v = self.value(Z)
        return complex(v[0]) if single else v

    # arithmetic sugar
    def __add__(self, other):
        return Sum((self, lift(other)))

    def __radd__(self, other):
        return Sum((lift(other), self))

    def __sub__(self, other):
        return Sum((self, Prod((Const(-1.0), lift(other)))))

    def __rsub__(self, other):
        return Sum((lift(other), Prod((Const(-1.0), self))))

    def __neg__(self):
        return Prod((Const(-1.0), self))

    def __mul__(self, other):
        return Prod((self, lift(other)))

    def __rmul__(self, other):
        return Prod((lift(other), self))

    def __pow__(self, m):
        if not isinstance(m, (int, np.integer)):
            raise SymbolError("only integer powers of general expressions are allowed")
        return IPow(self, int(m))


def lift(x) -> HoloExpr:
    if isinstance(x, HoloExpr):
        return x
    if isinstance(x, Number):
        return Const(complex(x))
    raise SymbolError(f"cannot use {type(x).__name__} in an expression")


class Const(HoloExpr):
    kind = "const"
    __slots__ = ("c",)

    def __init__(self, c):
        c = complex(c)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise SymbolError("non-finite constant")
        self.c = c

    def value(self, Z):
        return np.full(Z.shape[0], self.c, dtype=np.complex128)

    def value_and_grad(self, Z):
        return self.value(Z), np.zeros(Z.shape, dtype=np.complex128)

    def substitute(self, comps):
        return self

    def to_dict(self):
        return {"kind": "const", "value": [self.c.real, self.c.imag]}

    def __repr__(self):
        return f"Const({self.c!r})"


class Coord(HoloExpr):
    """The coordinate function ``z_index`` (1-based)."""

    kind = "coord"
    __slots__ = ("index",)

    def __init__(self, index: int):
        if int(index) != index or index < 1:
            raise SymbolError(f"coordinate index must be a positive integer, got {index!r}")
        self.index = int(index)

    def _check(self, Z):
        if self.index > Z.shape[1]:
            raise SymbolError(f"z_{self.index} used in dimension n={Z.shape[1]}")

    def value(self, Z):
        self._check(Z)
        return Z[:, self.index - 1].astype(np.complex128, copy=True)

    def value_and_grad(self, Z):
        g = np.zeros(Z.shape, dtype=np.complex128)
        g[:, self.index - 1] = 1.0
        return self.value(Z), g

    def substitute(self, comps):
        if self.index > len(comps):
            raise SymbolError(f"z_{self.index} has no substitute among {len(comps)} components")
        return comps[self.index - 1]

    def max_coord(self):
        return self.index

    def to_dict(self):
        return {"kind": "coord", "index": self.index}

    def __repr__(self):
        return f"z{self.index}"


class Sum(HoloExpr):
    kind = "sum"
    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[HoloExpr]):
        self.terms = tuple(lift(t) for t in terms)
        if not self.terms:
            raise SymbolError("empty sum")

    def children(self):
        return self.terms

    def value(self, Z):
        return sum(t.value(Z) for t in self.terms)

    def value_and_grad(self, Z):
        v = np.zeros(Z.shape[0], dtype=np.complex128)
        g = np.zeros(Z.shape, dtype=np.complex128)
        for t in self.terms:
            tv, tg = t.value_and_grad(Z)
            v += tv
            g += tg
        return v, g

    def substitute(self, comps):
        return Sum(t.substitute(comps) for t in self.terms)

    def max_coord(self):
        return max(t.max_coord() for t in self.terms)

    def to_dict(self):
        return {"kind": "sum", "terms": [t.to_dict() for t in self.terms]}

    def __repr__(self):
        return "(" + " + ".join(map(repr, self.terms)) + ")"


class Prod(HoloExpr):
    kind = "prod"
    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[HoloExpr]):
        self.factors = tuple(lift(f) for f in factors)
        if not self.factors:
            raise SymbolError("empty product")

    def children(self):
        return self.factors

    def value(self, Z):
        v = self.factors[0].value(Z)
        for f in self.factors[1:]:
            v = v * f.value(Z)
        return v

    def value_and_grad(self, Z):
        vals, grads = zip(*(f.value_and_grad(Z) for f in self.factors))
        m = len(vals)
        # prefix/suffix products avoid dividing by factors that vanish
        prefix = [np.ones(Z.shape[0], dtype=np.complex128)]
        for v in vals[:-1]:
            prefix.append(prefix[-1] * v)
        suffix = np.ones(Z.shape[0], dtype=np.complex128)
        g = np.zeros(Z.shape, dtype=np.complex128)
        for i in range(m - 1, -1, -1):
            g += (prefix[i] * suffix)[:, None] * grads[i]
            suffix = suffix * vals[i]
        return suffix, g

    def substitute(self, comps):
        return Prod(f.substitute(comps) for f in self.factors)

    def max_coord(self):
        return max(f.max_coord() for f in self.factors)

    def to_dict(self):
        return {"kind": "prod", "factors": [f.to_dict() for f in self.factors]}

    def __repr__(self):
        return "(" + " * ".join(map(repr, self.factors)) + ")"


class IPow(HoloExpr):
    kind = "ipow"
    __slots__ = ("base", "m")

    def __init__(self, base: HoloExpr, m: int):
        if int(m) != m:
            raise SymbolError(f"ipow exponent must be an integer, got {m!r}")
        self.base = lift(base)
        self.m = int(m)

    def children(self):
        return (self.base,)

    def value(self, Z):
        return self.base.value(Z) ** self.m

    def value_and_grad(self, Z):
        bv, bg = self.base.value_and_grad(Z)
        if self.m == 0:
            return np.ones_like(bv), np.zeros_like(bg)
        return bv**self.m, (self.m * bv ** (self.m - 1))[:, None] * bg

    def substitute(self, comps):
        return IPow(self.base.substitute(comps), self.m)

    def max_coord(self):
        return self.base.max_coord()

    def to_dict(self):
        return {"kind": "ipow", "base": self.base.to_dict(), "exponent": self.m}

    def __repr__(self):
        return f"{self.base!r}**{self.m}"


class _Atom(HoloExpr):
    """Shared plumbing for nodes built on ``1 - r * arg`` with ``0 < r < 1``.

    ``arg`` is a coordinate for user-built trees; substitution of a self-map
    replaces it by a component with modulus < 1 on the ball, which keeps
    ``Re(1 - r * arg) > 0``.  A runtime guard enforces this on every batch.
    """

    __slots__ = ("r", "arg")

    def __init__(self, r, arg: HoloExpr | int = 1):
        r = float(Fraction(r)) if isinstance(r, str) else float(r)
        if not (0.0 < r < 1.0):
            raise SymbolError(f"atom parameter r must lie in (0, 1), got {r!r}")
        self.r = r
        self.arg = Coord(arg) if isinstance(arg, (int, np.integer)) else lift(arg)

    def children(self):
        return (self.arg,)

    def max_coord(self):
        return self.arg.max_coord()

    def _base(self, Z, with_grad: bool):
        if with_grad:
            av, ag = self.arg.value_and_grad(Z)
        else:
            av, ag = self.arg.value(Z), None
        b = 1.0 - self.r * av
        if np.any(b.real <= 0.0):
            raise SymbolError(f"atom 1 - {self.r} * {self.arg!r} left the right half-plane")
        return b, ag

    def _arg_dict(self) -> dict:
        if isinstance(self.arg, Coord):
            return {"coord": self.arg.index}
        return {"arg": self.arg.to_dict()}


class AtomPow(_Atom):
    """``(1 - r * arg)^exponent`` on the principal branch."""

    kind = "atompow"
    __slots__ = ("exponent",)

    def __init__(self, r, exponent, arg: HoloExpr | int = 1):
        super().__init__(r, arg)
        self.exponent = _exponent(exponent)

    @property
    def gamma(self) -> float:
        return float(self.exponent)

    def value(self, Z):
        b, _ = self._base(Z, False)
        return np.power(b, self.gamma)

    def value_and_grad(self, Z):
        b, ag = self._base(Z, True)
        g = self.gamma
        v = np.power(b, g)
        dv = -self.r * g * np.power(b, g - 1.0)
        return v, dv[:, None] * ag

    def substitute(self, comps):
        return AtomPow(self.r, self.exponent, self.arg.substitute(comps))

    def to_dict(self):
        return {"kind": "atompow", "r": repr(self.r), "exponent": _exponent_str(self.exponent),
                **self._arg_dict()}

    def __repr__(self):
        return f"(1-{self.r}*{self.arg!r})^{_exponent_str(self.exponent)}"


class AtomLog(_Atom):
    """``log(1/(1 - r * arg))`` raised to ``power`` (principal branch).

    Integer powers are holomorphic on the ball.  A non-integer power has a
    branch cut where the logarithm is a negative real, i.e. on the segment
    ``arg in (-1/r, 0)`` of the real axis; the modulus of the value and of the
    gradient is branch independent, which is all the norm integrals consume.
    """

    kind = "atomlog"
    __slots__ = ("power",)

    def __init__(self, r, power=1, arg: HoloExpr | int = 1):
        super().__init__(r, arg)
        self.power = _exponent(power)
        if float(self.power) < 0 and not _is_integer(self.power):
            raise SymbolError("negative non-integer log powers are not supported")

    @property
    def holomorphic(self) -> bool:
        return _is_integer(self.power)

    def _pow(self, L, g):
        if _is_integer(g):
            return L ** int(g)
        return np.power(L, float(g))

    def value(self, Z):
        b, _ = self._base(Z, False)
        return self._pow(-np.log(b), self.power)

    def value_and_grad(self, Z):
        b, ag = self._base(Z, True)
        L = -np.log(b)
        g = self.power
        v = self._pow(L, g)
        if float(g) == 0.0:
            return v, np.zeros_like(ag)
        dL = self.r / b
        dv = float(g) * self._pow(L, g - 1) * dL
        return v, dv[:, None] * ag

    def substitute(self, comps):
        return AtomLog(self.r, self.power, self.arg.substitute(comps))

    def to_dict(self):
        return {"kind": "atomlog", "r": repr(self.r), "power": _exponent_str(self.power),
                **self._arg_dict()}

    def __repr__(self):
        return f"log(1/(1-{self.r}*{self.arg!r}))^{_exponent_str(self.power)}"


class Unitary(HoloExpr):
    """``child(M z)`` for a fixed unitary matrix ``M``."""

    kind = "unitary"
    __slots__ = ("matrix", "child")

    def __init__(self, matrix, child: HoloExpr, atol: float = 1e-10):
        M = np.array(matrix, dtype=np.complex128)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise SymbolError(f"unitary matrix must be square, got shape {M.shape}")
        if not np.allclose(M.conj().T @ M, np.eye(M.shape[0]), atol=atol):
            raise SymbolError("matrix is not unitary")
        M.setflags(write=False)
        self.matrix = M
        self.child = lift(child)

    def children(self):
        return (self.child,)

    def max_coord(self):
        return self.matrix.shape[0]

    def _map(self, Z):
        if Z.shape[1] != self.matrix.shape[0]:
            raise SymbolError(f"unitary of size {self.matrix.shape[0]} used in dimension {Z.shape[1]}")
        return Z @ self.matrix.T

    def value(self, Z):
        return self.child.value(self._map(Z))

    def value_and_grad(self, Z):
        v, g = self.child.value_and_grad(self._map(Z))
        return v, g @ self.matrix

    def substitute(self, comps):
        n = self.matrix.shape[0]
        rows = []
        for i in range(n):
            terms = [Prod((Const(self.matrix[i, j]), comps[j])) for j in range(n)
                     if self.matrix[i, j] != 0]
            rows.append(Sum(terms) if terms else Const(0.0))
        return self.child.substitute(rows)

    def to_dict(self):
        return {"kind": "unitary",
                "matrix": [[[c.real, c.imag] for c in row] for row in self.matrix],
                "child": self.child.to_dict()}

    def __repr__(self):
        return f"U[{self.matrix.shape[0]}]({self.child!r})"


# ---------------------------------------------------------------- builders

def const(c) -> Const:
    return Const(c)


def coord(i: int) -> Coord:
    return Coord(i)


def coords(n: int) -> list[Coord]:
    return [Coord(i) for i in range(1, n + 1)]


# ---------------------------------------------------------- serialization

NODE_KINDS = ("const", "coord", "sum", "prod", "ipow", "atompow", "atomlog", "unitary")


def _complex(x, path) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(t, (int, float)) and not isinstance(t, bool) for t in x
    ):
        return complex(x[0], x[1])
    raise SymbolError("complex numbers are [re, im] pairs", path)


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise SymbolError(f"missing field {key!r}", path)
    return d[key]


def from_dict(d, path: str = "$") -> HoloExpr:
    """Parse the declarative tree format; errors carry a JSON-path to the node."""
    if not isinstance(d, dict):
        raise SymbolError("node must be an object", path)
    kind = d.get("kind")
    if kind not in NODE_KINDS:
        raise SymbolError(f"unknown node kind {kind!r}; expected one of {NODE_KINDS}", path)
    try:
        if kind == "const":
            return Const(_complex(_require(d, "value", path), f"{path}.value"))
        if kind == "coord":
            return Coord(_require(d, "index", path))
        if kind in ("sum", "prod"):
            key = "terms" if kind == "sum" else "factors"
            items = _require(d, key, path)
            if not isinstance(items, list) or not items:
                raise SymbolError(f"{key} must be a non-empty list", f"{path}.{key}")
            nodes = [from_dict(t, f"{path}.{key}[{i}]") for i, t in enumerate(items)]
            return Sum(nodes) if kind == "sum" else Prod(nodes)
        if kind == "ipow":
            m = _require(d, "exponent", path)
            if isinstance(m, str):
                m = _exponent(m)
                if not _is_integer(m):
                    raise SymbolError("ipow exponent must be an integer", f"{path}.exponent")
            if isinstance(m, bool) or int(m) != m:
                raise SymbolError("ipow exponent must be an integer", f"{path}.exponent")
            return IPow(from_dict(_require(d, "base", path), f"{path}.base"), int(m))
        if kind in ("atompow", "atomlog"):
            r = _require(d, "r", path)
            if not isinstance(r, (str, int, float)) or isinstance(r, bool):
                raise SymbolError("r must be a decimal string", f"{path}.r")
            arg = from_dict(d["arg"], f"{path}.arg") if "arg" in d else int(d.get("coord", 1))
            if kind == "atompow":
                return AtomPow(r, _require(d, "exponent", path), arg)
            return AtomLog(r, d.get("power", 1), arg)
        M = _require(d, "matrix", path)
        if not isinstance(M, list):
            raise SymbolError("matrix must be a list of rows", f"{path}.matrix")
        rows = [[_complex(c, f"{path}.matrix[{i}][{j}]") for j, c in enumerate(row)]
                for i, row in enumerate(M)]
        return Unitary(rows, from_dict(_require(d, "child", path), f"{path}.child"))
    except SymbolError as exc:
        if exc.path:
            raise
        raise SymbolError(str(exc), path) from exc


# ------------------------------------------------------------- operations

def eval(f: HoloExpr, z) -> complex | np.ndarray:  # noqa: A001 - mirrors the math name
    """Value of ``f`` at a point (complex) or a batch (array)."""
    return f(z)


def gradient(f: HoloExpr, z) -> np.ndarray:
    """Holomorphic gradient ``(df/dz_1, ..., df/dz_n)``."""
    Z, single = _as_batch(z)
    g = f.value_and_grad(Z)[1]
    return g[0] if single else g


def radial_derivative(f: HoloExpr, z) -> complex | np.ndarray:
    """``Rf(z) = sum_j z_j df/dz_j``."""
    Z, single = _as_batch(z)
    g = f.value_and_grad(Z)[1]
    r = np.sum(Z * g, axis=1)
    return complex(r[0]) if single else r


@dataclass(frozen=True)
class WeightSymbol:
    """The multiplier ``psi``."""

    expr: HoloExpr

    def value_and_grad(self, Z):
        return self.expr.value_and_grad(Z)


@dataclass(frozen=True)
class SelfMapSymbol:
    """A holomorphic map ``phi = (phi_1, ..., phi_n)`` meant to send the ball into itself.

    ``certified_bound`` is the sampled sup of ``|phi|`` recorded by
    :func:`validate_self_map`; ``None`` until validated.
    """

    components: tuple[HoloExpr, ...]
    certified_bound: float | None = None

    def __post_init__(self):
        comps = tuple(lift(c) for c in self.components)
        if not comps:
            raise SymbolError("self-map needs at least one component")
        n = len(comps)
        for i, c in enumerate(comps):
            if c.max_coord() > n:
                raise SymbolError(f"component {i + 1} uses coordinates beyond n={n}")
        object.__setattr__(self, "components", comps)

    @property
    def n(self) -> int:
        return len(self.components)

    def value(self, Z) -> np.ndarray:
        Z, single = _as_batch(Z)
        out = np.stack([c.value(Z) for c in self.components], axis=1)
        return out[0] if single else out

    def value_and_jacobian(self, Z) -> tuple[np.ndarray, np.ndarray]:
        """Values ``(N, n)`` and Jacobians ``(N, n, n)`` with rows = component gradients."""
        vg = [c.value_and_grad(Z) for c in self.components]
        return np.stack([v for v, _ in vg], axis=1), np.stack([g for _, g in vg], axis=1)

    def to_list(self) -> list[dict]:
        return [c.to_dict() for c in self.components]


def jacobian(phi: SelfMapSymbol, z) -> np.ndarray:
    """``J_phi(z)``; row ``i`` is ``gradient(phi_i, z)``."""
    Z, single = _as_batch(z)
    J = phi.value_and_jacobian(Z)[1]
    return J[0] if single else J


def compose(f: HoloExpr, phi: SelfMapSymbol) -> HoloExpr:
    """The tree of ``f o phi``."""
    return f.substitute(phi.components)


@dataclass(frozen=True)
class SelfMapReport:
    accepted: bool
    bound: float
    argmax: np.ndarray
    samples: int
    shell_profile: tuple[tuple[float, float], ...]
    symbol: SelfMapSymbol = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "bound": self.bound,
            "argmax": [[c.real, c.imag] for c in self.argmax],
            "samples": self.samples,
            "shell_profile": [list(t) for t in self.shell_profile],
        }


def validate_self_map(phi: SelfMapSymbol, sample_count: int = 4096, seed: int = 0,
                      levels: int = 12) -> SelfMapReport:
    """Sample ``|phi|`` on stratified boundary shells; accept iff the max stays below 1."""
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    per_shell = max(1, sample_count // levels)
    best, arg, used, profile = -1.0, None, 0, []
    for radius, pts in shell_samples(phi.n, levels, per_shell, seed, "self-map"):
        vals = np.sqrt(norm_sq(phi.value(pts)))
        i = int(np.argmax(vals))
        profile.append((radius, float(vals[i])))
        used += len(pts)
        if vals[i] > best:
            best, arg = float(vals[i]), pts[i]
    accepted = bool(best < 1.0)
    sym = replace(phi, certified_bound=best) if accepted else phi
    return SelfMapReport(accepted, best, arg, used, tuple(profile), sym)


# ---------------------------------------------------------- common symbols

def identity_map(n: int) -> SelfMapSymbol:
    return SelfMapSymbol(tuple(coords(n)))


def scaled_identity(n: int, c: complex) -> SelfMapSymbol:
    return SelfMapSymbol(tuple(Const(c) * z for z in coords(n)))


def moebius_symbol(a) -> SelfMapSymbol:
    """Exact tree for the ball automorphism ``phi_a``."""
    a = np.asarray(a.vector if isinstance(a, BallPoint) else a, dtype=np.complex128)
    n = a.shape[0]
    asq = norm_sq(a)
    zs = coords(n)
    if asq == 0.0:
        return SelfMapSymbol(tuple(-z for z in zs))
    s_a = math.sqrt(1.0 - asq)
    # linear part -(P_a + s_a Q_a)
    L = -(s_a * np.eye(n) + (1.0 - s_a) * np.outer(a, a.conj()) / asq)
    denom = Unitary(align_to_e1(a), AtomPow(math.sqrt(asq), -1, 1))
    comps = []
    for i in range(n):
        terms = [Const(a[i])] + [Const(L[i, j]) * zs[j] for j in range(n) if L[i, j] != 0]
        comps.append(Prod((Sum(terms), denom)))
    return SelfMapSymbol(tuple(comps))


def disk_automorphism(a: complex, rotation: complex = 1.0) -> SelfMapSymbol:
    """``rotation * (a - z) / (1 - conj(a) z)`` on the unit disk."""
    a = complex(a)
    base = moebius_symbol(np.array([a]))
    if rotation == 1.0:
        return base
    return SelfMapSymbol((Const(rotation) * base.components[0],))


def blaschke_self_map(zeros: Sequence[complex], scale: complex = 1.0) -> SelfMapSymbol:
    """``scale * prod_j (a_j - z) / (1 - conj(a_j) z)`` on the disk; needs ``|scale| <= 1``.

    An automorphism exactly when there is one zero and ``|scale| = 1``.
    """
    if not zeros:
        raise SymbolError("need at least one zero")
    if abs(complex(scale)) > 1.0:
        raise SymbolError("|scale| must not exceed 1")
    factors = [disk_automorphism(a).components[0] for a in zeros]
    return SelfMapSymbol((Prod((Const(scale), *factors)),))
