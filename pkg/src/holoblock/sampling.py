"""Deterministic, counter-based random streams and boundary-shell samplers.

Every random draw is keyed by ``(seed, tag, index...)`` through a Philox
generator, so a chunk of samples depends only on its key and never on how
many workers produced it or in which order.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

#: Samples per generator chunk; fixed so that sample prefixes are stable.
CHUNK = 4096
WORKERS_ENV = "HOLOBLOCK_WORKERS"


def _tag(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    return int(tag)


def stream(seed: int, *key) -> np.random.Generator:
    """Independent generator for the counter ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_tag(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else 1
    return max(1, int(workers))


def ordered_map(fn: Callable[[int], T], count: int, workers: int | None = None) -> list[T]:
    """``[fn(0), ..., fn(count-1)]``, optionally on a thread pool; order preserved."""
    workers = resolve_workers(workers)
    if workers == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def sphere_directions(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` uniform points on the unit sphere of C^n, shape ``(count, n)``."""
    g = rng.standard_normal((count, 2 * n))
    z = g[:, :n] + 1j * g[:, n:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def keyed_directions(n: int, count: int, seed: int, *key) -> np.ndarray:
    """Prefix-stable directions: the first ``m`` rows never depend on ``count``."""
    nchunks = -(-count // CHUNK)
    parts = [sphere_directions(n, CHUNK, stream(seed, *key, c)) for c in range(nchunks)]
    if not parts:
        return np.empty((0, n), dtype=np.complex128)
    return np.concatenate(parts)[:count]


def shell_radii(levels: int) -> np.ndarray:
    """Boundary shells ``r_j = 1 - 2^-j`` for ``j = 1..levels``."""
    return 1.0 - 2.0 ** -np.arange(1, levels + 1, dtype=float)


def shell_samples(
    n: int, levels: int, per_shell: int, seed: int, tag: str, include_origin: bool = True
) -> list[tuple[float, np.ndarray]]:
    """``[(radius, points)]`` for the origin (optional) and every boundary shell."""
    out: list[tuple[float, np.ndarray]] = []
    if include_origin:
        out.append((0.0, np.zeros((1, n), dtype=np.complex128)))
    for j, r in enumerate(shell_radii(levels), start=1):
        out.append((float(r), r * keyed_directions(n, per_shell, seed, tag, j)))
    return out


def golden_section_max(
    fn: Callable[[float], float], lo: float, hi: float, iters: int = 40
) -> tuple[float, float]:
    """Golden-section search for a maximum of a (locally unimodal) function on ``[lo, hi]``."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    if fc >= fd:
        return c, fc
    return d, fd


def chunk_counts(total: int, chunk: int = CHUNK) -> Sequence[int]:
    full, rem = divmod(total, chunk)
    return [chunk] * full + ([rem] if rem else [])
