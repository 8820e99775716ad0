"""The vertex retraction of a cube complex and its Lipschitz sandwich.

A point of the cube union maps to the multilinear vertex-weight combination
of point evaluations over the vertex set with the subspace l1 metric. The
module builds the explicit decompositions certifying the upper Lipschitz
bound C(p, 2^(d-1)) C(p, d) C(p, 3), the cross-axis witness pair with its
indicator dual certificate reaching the lower bound C(p, 2^(d-1)), and a
seeded sampling harness reporting both extremes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import c_const, check_p, retraction_bounds
from .cubes import CubeComplex, find_cube, lambda_support, _local_coords
from .freenorm import (
    Decomposition,
    DualCertificate,
    FreeElement,
    Molecule,
    dual_lower_bound,
    evaluate,
    exact_norm_small,
    p_cost,
)
from .metric import PointedFiniteMetric, lattice_l1_space

LATTICE_TOL = 1e-9


@dataclass(frozen=True)
class RetractionContext:
    complex: CubeComplex
    p: float
    vertex_space: PointedFiniteMetric

    def vertex_index(self, v: tuple[int, ...]) -> int:
        return self._index[tuple(int(c) for c in v)]  # type: ignore[attr-defined]

    def vertex_lattice(self, idx: int) -> tuple[int, ...]:
        return self.vertex_space.points[idx]


def build_context(complex: CubeComplex, p: float) -> RetractionContext:
    """Pair a complex with the metric space over its vertices."""
    p = check_p(p)
    verts = complex.vertices()
    space = lattice_l1_space(verts, complex.R, base=verts.index(complex.base_vertex))
    ctx = RetractionContext(complex, p, space)
    object.__setattr__(ctx, "_index", {v: i for i, v in enumerate(verts)})
    return ctx


def retract(ctx: RetractionContext, x) -> FreeElement:
    """The vertex-weight image of x; the unit evaluation when x is a vertex."""
    weights = {
        ctx.vertex_index(v): w for v, w in lambda_support(ctx.complex, x)
    }
    return FreeElement(ctx.vertex_space, weights)


def translate_element(ctx: RetractionContext, m: FreeElement, shift) -> FreeElement:
    """Transport a retraction-image weight family by a lattice vector.

    The element is read as a full weight family summing to one, with the
    base vertex carrying the complement of the stored weights (evaluations
    at the base are normalized away in `FreeElement`); every weight then
    moves to its shifted vertex, which must exist in the complex.
    """
    if m.host is not ctx.vertex_space:
        raise ValueError("element does not live over this context's vertices")
    shift = np.asarray(shift, dtype=float)
    lat = np.rint(shift / ctx.complex.R)
    if np.abs(shift / ctx.complex.R - lat).max(initial=0.0) > LATTICE_TOL:
        raise ValueError(f"shift {tuple(shift)} is not a lattice vector")
    lat = tuple(int(c) for c in lat)

    family = dict(m.weights)
    complement = 1.0 - sum(family.values())
    if abs(complement) > 1e-12:
        family[m.host.base] = complement
    out: dict[int, float] = {}
    for idx, w in family.items():
        v = tuple(a + b for a, b in zip(ctx.vertex_lattice(idx), lat))
        try:
            j = ctx.vertex_index(v)
        except KeyError:
            raise ValueError(f"shifted vertex {v} is missing from the complex") from None
        out[j] = out.get(j, 0.0) + w
    return FreeElement(ctx.vertex_space, out)


def rescale_check(m: FreeElement, R: float, shift, p: float):
    """Compare the norm of an element under v -> R(v + shift) against R times
    its norm on the original integer vertex set.

    The host of `m` must be an integer-lattice l1 space at scale 1. Returns
    (lhs, rhs); the dilation isometry of free p-spaces makes them equal up
    to floating error.
    """
    p = check_p(p)
    pts = [tuple(int(c) for c in v) for v in m.host.points]
    shift = tuple(int(c) for c in shift)
    image_pts = [tuple(c + s for c, s in zip(v, shift)) for v in pts]
    image_space = lattice_l1_space(image_pts, float(R), base=m.host.base)

    m_image = FreeElement(image_space, dict(m.weights))
    lhs, _ = exact_norm_small(m_image, p)
    rhs_raw, _ = exact_norm_small(m, p)
    return lhs, float(R) * rhs_raw


# ---------------------------------------------------------------------------
# the certified upper-bound decomposition


def _axis_pair_terms(ctx, w, common, axis, delta):
    """Terms for the difference of two images in cube `w` that agree except
    in `axis`, where they differ by `delta` (actual units)."""
    if delta == 0.0:
        return []
    t = _local_coords(ctx.complex, w, common)
    other = [j for j in range(ctx.complex.d) if j != axis]
    terms = []
    for bits in np.ndindex(*(2,) * len(other)):
        weight = 1.0
        for j, b in zip(other, bits):
            weight *= t[j] if b else 1.0 - t[j]
            if weight == 0.0:
                break
        if weight == 0.0:
            continue
        hi = list(w)
        for j, b in zip(other, bits):
            hi[j] += b
        lo = list(hi)
        hi[axis] += 1
        mol = Molecule(
            ctx.vertex_space, ctx.vertex_index(tuple(hi)), ctx.vertex_index(tuple(lo))
        )
        terms.append((delta * weight, mol))
    return terms


def _same_cube_terms(ctx, w, a, b):
    """Zigzag decomposition of r(a) - r(b) for a, b in one cube: change one
    coordinate at a time, each step supported on a single face."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    terms = []
    for i in range(ctx.complex.d):
        z = np.concatenate([a[: i + 1], b[i + 1 :]])
        z[i] = a[i]  # common point of the step pair, axis-i value irrelevant
        terms += _axis_pair_terms(ctx, w, z, i, float(a[i] - b[i]))
    return terms


def _bridge_terms(ctx, w, x1, y1):
    """Terms for r(x') - r(y') when y' - x' is a lattice vector: every
    supported vertex of x' pairs with its translate."""
    delta = np.asarray(y1, dtype=float) - np.asarray(x1, dtype=float)
    lat = np.rint(delta / ctx.complex.R)
    assert np.abs(delta / ctx.complex.R - lat).max(initial=0.0) <= LATTICE_TOL
    lat = tuple(int(c) for c in lat)
    if all(c == 0 for c in lat):
        return []
    l1 = float(np.abs(delta).sum())
    terms = []
    for v, weight in lambda_support(ctx.complex, x1, cube=w):
        target = tuple(a + b for a, b in zip(v, lat))
        mol = Molecule(ctx.vertex_space, ctx.vertex_index(v), ctx.vertex_index(target))
        terms.append((weight * l1, mol))
    return terms


def lipschitz_upper_decomposition(ctx: RetractionContext, x, y) -> Decomposition:
    """Explicit decomposition of r(x) - r(y) whose cost is at most
    C(p, 2^(d-1)) C(p, d) C(p, 3) |x - y|_1.

    Within one cube the coordinatewise zigzag suffices; across cubes the
    points are first moved to the facing integer faces (x', y'), whose
    difference is a lattice vector handled by vertex translation. When a
    facing integer coordinate is ambiguous the smaller value is taken.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    wx = find_cube(ctx.complex, x)
    wy = find_cube(ctx.complex, y)
    if wx == wy:
        return Decomposition(ctx.vertex_space, tuple(_same_cube_terms(ctx, wx, x, y)))

    R = ctx.complex.R
    moved = [i for i in range(ctx.complex.d) if wx[i] != wy[i]]
    x1 = x.copy()
    y1 = x.copy()  # coordinates off the moved set stay at x's values
    for i in moved:
        n_i = wx[i] + 1 if wx[i] < wy[i] else wx[i]
        m_i = wy[i] if wx[i] < wy[i] else wy[i] + 1
        x1[i] = R * n_i
        y1[i] = R * m_i
    terms = (
        _same_cube_terms(ctx, wx, x, x1)
        + _bridge_terms(ctx, wx, x1, y1)
        + _same_cube_terms(ctx, wy, y1, y)
    )
    return Decomposition(ctx.vertex_space, tuple(terms))


# ---------------------------------------------------------------------------
# the lower-bound witness and its dual certificate


def vertex_indicator_certificate(space: PointedFiniteMetric) -> DualCertificate:
    """One scaled indicator per vertex (complemented at the base so it still
    vanishes there), active exactly on the pairs meeting that vertex; every
    pair meets at most two vertices, so the multiplicity is 2."""
    n = space.n
    off = ~np.eye(n, dtype=bool)
    scale = float(space.dist[off].min())
    F = np.zeros((n, n))
    activity = np.zeros((n, n, n), dtype=bool)
    for u in range(n):
        if u == space.base:
            F[u] = scale
            F[u, u] = 0.0
        else:
            F[u, u] = scale
        activity[u, u, :] = True
        activity[u, :, u] = True
        activity[u, u, u] = False
    return DualCertificate(space, F, 2, activity)


@dataclass(frozen=True)
class WitnessResult:
    x: tuple[float, ...]
    y: tuple[float, ...]
    element: FreeElement
    certificate: DualCertificate
    certified_value: float
    upper_decomposition: Decomposition
    context: RetractionContext


def lower_bound_witness(d: int, p: float) -> WitnessResult:
    """The cross-axis pair on the unit cube whose image difference has free
    p-norm exactly C(p, 2^(d-1)) while |x - y|_1 = 1.

    x and y sit at the centers of the bottom and top facets; the image
    difference spreads over the 2^(d-1) vertical edges with equal weights,
    the indicator certificate matches the explicit edge decomposition, and
    the two certified bounds coincide.
    """
    p = check_p(p)
    d = int(d)
    complex = CubeComplex(d=d, R=1.0, offsets=((0,) * d,), base_vertex=(0,) * d)
    ctx = build_context(complex, p)
    x = (0.5,) * (d - 1) + (0.0,)
    y = (0.5,) * (d - 1) + (1.0,)
    element = retract(ctx, y) - retract(ctx, x)

    cert = vertex_indicator_certificate(ctx.vertex_space)
    value = dual_lower_bound(element, p, cert)

    coeff = 2.0 ** (-(d - 1))
    terms = []
    for bits in np.ndindex(*(2,) * (d - 1)):
        hi = ctx.vertex_index(tuple(bits) + (1,))
        lo = ctx.vertex_index(tuple(bits) + (0,))
        terms.append((coeff, Molecule(ctx.vertex_space, hi, lo)))
    return WitnessResult(x, y, element, cert, value, Decomposition(ctx.vertex_space, tuple(terms)), ctx)


# ---------------------------------------------------------------------------
# sampling harness


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 200
    seed: int = 0
    include_witness_pair: bool = True
    exact_norm_cap: int = 6
    exact_check_samples: int = 50


def estimate_lipschitz(ctx: RetractionContext, config: SamplerConfig) -> dict:
    """Sample point pairs in the cube union and report the certified
    Lipschitz evidence for the retraction.

    Every pair contributes a dual lower bound ratio and the proof
    decomposition's cost ratio; the theoretical sandwich and the witness
    value accompany them. Exact norms are cross-checked only when the vertex
    count is within the engine cap, and the report says whether they were.
    """
    complex, p = ctx.complex, ctx.p
    rng = np.random.default_rng(config.seed)
    offsets = np.array(complex.offsets, dtype=float)
    R = complex.R

    pairs = []
    if config.include_witness_pair:
        w0 = offsets[0]
        unit_x = np.array((0.5,) * (complex.d - 1) + (0.0,))
        unit_y = np.array((0.5,) * (complex.d - 1) + (1.0,))
        pairs.append((R * (w0 + unit_x), R * (w0 + unit_y)))
    for _ in range(config.n_samples):
        wa = offsets[rng.integers(len(offsets))]
        wb = offsets[rng.integers(len(offsets))]
        pairs.append((R * (wa + rng.random(complex.d)), R * (wb + rng.random(complex.d))))

    cert = vertex_indicator_certificate(ctx.vertex_space)
    exact_ok = ctx.vertex_space.n <= config.exact_norm_cap
    max_lower = 0.0
    max_cost = 0.0
    max_residual = 0.0
    exact_checked = 0
    for x, y in pairs:
        l1 = float(np.abs(x - y).sum())
        if l1 == 0.0:
            continue
        m = retract(ctx, x) - retract(ctx, y)
        lower = dual_lower_bound(m, p, cert) / l1
        decomp = lipschitz_upper_decomposition(ctx, x, y)
        cost = p_cost(decomp, p) / l1
        residual = evaluate(decomp).max_weight_diff(m)
        max_lower = max(max_lower, lower)
        max_cost = max(max_cost, cost)
        max_residual = max(max_residual, residual)
        if exact_ok and exact_checked < config.exact_check_samples:
            norm, _ = exact_norm_small(m, p, cap=config.exact_norm_cap)
            exact_checked += 1
            if not (lower * l1 <= norm + 1e-9 and norm <= cost * l1 + 1e-9):
                raise AssertionError("exact norm escaped its certified bounds")

    lower_const, upper_const = retraction_bounds(p, complex.d)
    witness = lower_bound_witness(complex.d, p)
    return {
        "d": complex.d,
        "p": p,
        "R": R,
        "complex": [list(w) for w in complex.offsets],
        "n_samples": len(pairs),
        "seed": config.seed,
        "max_lower_ratio": max_lower,
        "max_upper_cost_ratio": max_cost,
        "max_reconstruction_residual": max_residual,
        "theoretical_lower": lower_const,
        "theoretical_upper": upper_const,
        "witness_value": witness.certified_value,
        "exact_norms_checked": exact_checked,
    }


def witness_sandwich(d: int, p: float) -> tuple[float, float, float]:
    """(dual lower bound, exact target, decomposition upper bound) for the
    witness element; all three coincide at C(p, 2^(d-1))."""
    res = lower_bound_witness(d, p)
    upper = p_cost(res.upper_decomposition, p)
    return res.certified_value, c_const(p, 2 ** (d - 1)), upper
