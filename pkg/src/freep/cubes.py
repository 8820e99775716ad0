"""Cube complexes and their multilinear vertex weights.

A complex is a nonempty set of axis-aligned cubes R*w + R*[0,1]^d indexed by
integer offsets w. The weight of a lattice vertex v at a point x is the
product over coordinates of the one-dimensional affine weights; within each
cube the weights form a partition of unity that is Kronecker at vertices.
Vertices are handled in lattice units (integers), positions in actual
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np

_CUBE_TOL = 1e-12


class VertexWeight(NamedTuple):
    vertex: tuple[int, ...]
    weight: float


def scalar_coeff(x: float, w: int) -> float:
    """One-dimensional weight of lattice coordinate w at local position x."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"local coordinate {x} outside [0, 1]")
    if w == 1:
        return x
    if w == 0:
        return 1.0 - x
    return 0.0


@dataclass(frozen=True)
class CubeComplex:
    """Scale R plus integer cube offsets; vertices in lattice units."""

    d: int
    R: float
    offsets: tuple[tuple[int, ...], ...]
    base_vertex: tuple[int, ...] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        d = int(self.d)
        if d < 1:
            raise ValueError("d must be >= 1")
        if not self.R > 0:
            raise ValueError("R must be positive")
        offs = sorted({tuple(int(c) for c in w) for w in self.offsets})
        if not offs:
            raise ValueError("a cube complex needs at least one cube")
        if any(len(w) != d for w in offs):
            raise ValueError("every offset must have d coordinates")
        verts = sorted(
            {tuple(wi + b for wi, b in zip(w, bits)) for w in offs for bits in product((0, 1), repeat=d)}
        )
        base = self.base_vertex
        base = verts[0] if base is None else tuple(int(c) for c in base)
        if base not in verts:
            raise ValueError(f"base vertex {base} is not a vertex of the complex")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "offsets", tuple(offs))
        object.__setattr__(self, "base_vertex", base)
        object.__setattr__(self, "_vertices", tuple(verts))

    def vertices(self) -> tuple[tuple[int, ...], ...]:
        return self._vertices  # type: ignore[attr-defined]


def find_cube(complex: CubeComplex, x: Sequence[float]) -> tuple[int, ...]:
    """Offset of a cube of the complex containing x (lexicographically
    smallest on shared faces); raises if x lies outside every cube."""
    z = np.asarray(x, dtype=float) / complex.R
    if z.shape != (complex.d,):
        raise ValueError(f"point must have {complex.d} coordinates")
    for tol in (0.0, _CUBE_TOL * (1.0 + float(np.abs(z).max()))):
        for w in complex.offsets:
            wa = np.array(w, dtype=float)
            if np.all(z >= wa - tol) and np.all(z <= wa + 1.0 + tol):
                return w
    raise ValueError(f"point {tuple(map(float, x))} lies outside the complex")


def _local_coords(complex: CubeComplex, w: tuple[int, ...], x: Sequence[float]) -> np.ndarray:
    t = np.asarray(x, dtype=float) / complex.R - np.array(w, dtype=float)
    if np.any(t < -_CUBE_TOL - _CUBE_TOL * np.abs(t)) or np.any(t > 1.0 + _CUBE_TOL):
        raise ValueError(f"point {tuple(map(float, x))} not in cube {w}")
    return np.clip(t, 0.0, 1.0)


def lambda_weight(complex: CubeComplex, v: Sequence[int], x: Sequence[float]) -> float:
    """Weight of lattice vertex v (lattice units) at point x (actual
    coordinates); zero whenever v is not a vertex of x's cube."""
    w = find_cube(complex, x)
    t = _local_coords(complex, w, x)
    out = 1.0
    for ti, vi, wi in zip(t, v, w):
        out *= scalar_coeff(ti, int(vi) - wi)
        if out == 0.0:
            return 0.0
    return out


def lambda_support(
    complex: CubeComplex, x: Sequence[float], cube: tuple[int, ...] | None = None
) -> list[VertexWeight]:
    """All vertices with nonzero weight at x, with their weights.

    At most 2^d entries; the weights sum to 1 to machine precision. Tiny
    weights are kept, never truncated. A containing cube may be forced via
    `cube`, e.g. to compare evaluations across a shared face.
    """
    if cube is None:
        cube = find_cube(complex, x)
    elif tuple(cube) not in complex.offsets:
        raise ValueError(f"cube {cube} is not part of the complex")
    w = tuple(int(c) for c in cube)
    t = _local_coords(complex, w, x)
    out = []
    for bits in product((0, 1), repeat=complex.d):
        weight = 1.0
        for ti, b in zip(t, bits):
            weight *= ti if b else 1.0 - ti
            if weight == 0.0:
                break
        if weight != 0.0:
            out.append(VertexWeight(tuple(wi + b for wi, b in zip(w, bits)), float(weight)))
    return out


def save_complex(complex: CubeComplex) -> str:
    """Serialize: first line "d R", one offset per line, base vertex last."""
    lines = [f"{complex.d} {complex.R!r}"]
    lines += [" ".join(str(c) for c in w) for w in complex.offsets]
    lines.append(" ".join(str(c) for c in complex.base_vertex))
    return "\n".join(lines) + "\n"


def load_complex(text: str) -> CubeComplex:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(rows) < 3:
        raise ValueError("complex file needs a header, offsets, and a base vertex")
    head = rows[0].split()
    if len(head) != 2:
        raise ValueError("first line must hold d and R")
    d, R = int(head[0]), float(head[1])
    vectors = [tuple(int(tok) for tok in ln.split()) for ln in rows[1:]]
    if any(len(v) != d for v in vectors):
        raise ValueError("every offset line must have d integers")
    return CubeComplex(d=d, R=R, offsets=tuple(vectors[:-1]), base_vertex=vectors[-1])
