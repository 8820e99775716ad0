"""The free p-norm engine over finite pointed metric spaces.

Elements of the span of point evaluations are sparse weight vectors with the
base point normalized away. The p-norm (0 < p <= 1) is the infimum of
(sum |a_i|^p)^(1/p) over decompositions into elementary molecules
(delta(x) - delta(y)) / d(x, y). Three certified routes are provided:

* an exact value for p = 1 by minimum-cost flow on the complete graph,
* an exact value for any p on small hosts by enumerating decompositions
  supported on linearly independent molecule subsets (the objective is
  concave per sign-orthant and coercive, so some minimizer has independent
  support of size at most n - 1, and every such support extends to an
  independent subset of that exact size),
* certified two-sided bounds: any explicit decomposition gives an upper
  bound, and any validated dual certificate of Lipschitz-1 functions with
  bounded pair multiplicity gives a lower bound via subadditivity of t^p.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .constants import check_p
from .metric import PointedFiniteMetric

RANK_TOL = 1e-10
EVAL_TOL = 1e-9
COEFF_TOL = 1e-12
DEFAULT_CAP = 8
FLOW_CAP = 1000


class FreeElement:
    """A finitely supported weight vector over the points of a host space.

    Zero weights and any weight at the base index are dropped on
    construction (the base evaluation is the zero vector).
    """

    __slots__ = ("host", "weights")

    def __init__(self, host: PointedFiniteMetric, weights: dict[int, float]):
        self.host = host
        clean = {}
        for idx, w in weights.items():
            idx = int(idx)
            if not 0 <= idx < host.n:
                raise ValueError(f"point index {idx} out of range")
            w = float(w)
            if idx != host.base and w != 0.0:
                clean[idx] = clean.get(idx, 0.0) + w
        self.weights = {i: w for i, w in clean.items() if w != 0.0}

    @classmethod
    def zero(cls, host: PointedFiniteMetric) -> "FreeElement":
        return cls(host, {})

    @classmethod
    def delta(cls, host: PointedFiniteMetric, idx: int) -> "FreeElement":
        return cls(host, {idx: 1.0})

    def is_zero(self) -> bool:
        return not self.weights

    def as_full_vector(self) -> np.ndarray:
        out = np.zeros(self.host.n)
        for i, w in self.weights.items():
            out[i] = w
        return out

    def _require_same_host(self, other: "FreeElement") -> None:
        if other.host is not self.host:
            raise ValueError("elements live over different hosts")

    def __add__(self, other: "FreeElement") -> "FreeElement":
        self._require_same_host(other)
        acc = dict(self.weights)
        for i, w in other.weights.items():
            acc[i] = acc.get(i, 0.0) + w
        return FreeElement(self.host, acc)

    def __sub__(self, other: "FreeElement") -> "FreeElement":
        return self + (-1.0) * other

    def __rmul__(self, a: float) -> "FreeElement":
        return FreeElement(self.host, {i: a * w for i, w in self.weights.items()})

    def max_weight_diff(self, other: "FreeElement") -> float:
        self._require_same_host(other)
        keys = set(self.weights) | set(other.weights)
        return max(
            (abs(self.weights.get(i, 0.0) - other.weights.get(i, 0.0)) for i in keys),
            default=0.0,
        )

    def __repr__(self) -> str:
        return f"FreeElement({self.weights})"


@dataclass(frozen=True)
class Molecule:
    """The unit vector (delta(x) - delta(y)) / d(x, y), x != y."""

    host: PointedFiniteMetric
    x: int
    y: int

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("a molecule needs two distinct points")
        for idx in (self.x, self.y):
            if not 0 <= idx < self.host.n:
                raise ValueError(f"point index {idx} out of range")

    @property
    def distance(self) -> float:
        return self.host.distance(self.x, self.y)

    def element(self) -> FreeElement:
        inv = 1.0 / self.distance
        return FreeElement(self.host, {self.x: inv, self.y: -inv})


@dataclass(frozen=True)
class Decomposition:
    """A formal combination sum a_i * molecule_i over one host."""

    host: PointedFiniteMetric
    terms: tuple[tuple[float, Molecule], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((float(a), mol) for a, mol in self.terms)
        )


def evaluate(decomp: Decomposition) -> FreeElement:
    """Sum the molecule terms into a free element (base coordinate dropped)."""
    acc: dict[int, float] = {}
    for a, mol in decomp.terms:
        if mol.host is not decomp.host:
            raise ValueError("decomposition mixes molecules over different hosts")
        f = a / mol.distance
        acc[mol.x] = acc.get(mol.x, 0.0) + f
        acc[mol.y] = acc.get(mol.y, 0.0) - f
    return FreeElement(decomp.host, acc)


def p_cost(decomp: Decomposition, p: float) -> float:
    """The coefficient cost (sum |a_i|^p)^(1/p); zero for an empty list."""
    p = check_p(p)
    if not decomp.terms:
        return 0.0
    coeffs = np.array([abs(a) for a, _ in decomp.terms])
    return float((coeffs**p).sum() ** (1.0 / p))


def upper_bound_from(m: FreeElement, p: float, decomp: Decomposition) -> float:
    """Certified upper bound: the cost of a decomposition verified to
    reproduce m within EVAL_TOL per coordinate."""
    if decomp.host is not m.host:
        raise ValueError("decomposition host differs from the element host")
    residual = evaluate(decomp).max_weight_diff(m)
    if residual > EVAL_TOL:
        raise ValueError(
            f"decomposition does not evaluate to the element "
            f"(max coordinate residual {residual:.3e})"
        )
    return p_cost(decomp, p)


# ---------------------------------------------------------------------------
# exact norm by independent-support enumeration


def _molecule_matrix(host, mols, rows):
    row_of = {q: r for r, q in enumerate(rows)}
    A = np.zeros((len(rows), len(mols)))
    for c, (i, j) in enumerate(mols):
        inv = 1.0 / host.distance(i, j)
        if i in row_of:
            A[row_of[i], c] += inv
        if j in row_of:
            A[row_of[j], c] -= inv
    return A


def _chunked_combinations(m: int, r: int, size: int):
    it = combinations(range(m), r)
    while True:
        block = list(islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.intp)


def _norm_by_enumeration(m, p, subset, chunk=65536):
    host = m.host
    subset = sorted(set(int(i) for i in subset))
    if any(not 0 <= i < host.n for i in subset):
        raise ValueError("subset contains out-of-range indices")
    outside = [i for i in m.weights if i not in subset]
    if outside:
        raise ValueError(f"element supported outside the subset at indices {outside}")
    if m.is_zero():
        return 0.0, Decomposition(host, ())

    mols = list(combinations(subset, 2))
    rows = [q for q in subset if q != host.base]
    if not mols:
        raise ValueError("element is not decomposable over molecules of the subset")
    A = _molecule_matrix(host, mols, rows)
    t = np.array([m.weights.get(q, 0.0) for q in rows])

    svals = np.linalg.svd(A, compute_uv=False)
    r = int((svals > RANK_TOL * svals[0]).sum())
    coeffs_ls, _, _, _ = np.linalg.lstsq(A, t, rcond=None)
    if np.abs(A @ coeffs_ls - t).max() > EVAL_TOL * (1.0 + np.abs(t).max()):
        raise ValueError("element is not decomposable over molecules of the subset")

    scale = 1.0 + float(np.abs(t).max())
    best_cost = np.inf
    best = None
    for idx in _chunked_combinations(len(mols), r, chunk):
        B = np.ascontiguousarray(A.T[idx].transpose(0, 2, 1))  # (chunk, n_rows, r)
        u, s, vt = np.linalg.svd(B, full_matrices=False)
        keep = s[:, -1] > RANK_TOL * s[:, 0]
        if not keep.any():
            continue
        idx, u, s, vt, B = idx[keep], u[keep], s[keep], vt[keep], B[keep]
        ut = np.einsum("cnr,n->cr", u, t)
        a = np.einsum("crk,cr->ck", vt, ut / s)
        resid = np.abs(np.einsum("cnk,ck->cn", B, a) - t).max(axis=1)
        ok = resid <= EVAL_TOL * scale
        if not ok.any():
            continue
        idx, a = idx[ok], a[ok]
        mag = np.abs(a)
        mag[mag <= COEFF_TOL * mag.max(axis=1, keepdims=True)] = 0.0
        costs = (mag**p).sum(axis=1) ** (1.0 / p)
        k = int(np.argmin(costs))
        if costs[k] < best_cost:
            best_cost = float(costs[k])
            best = (idx[k], np.where(mag[k] > 0.0, a[k], 0.0))

    if best is None:
        raise ValueError("element is not decomposable over molecules of the subset")
    cols, coeffs = best
    terms = tuple(
        (float(coeffs[k]), Molecule(host, *mols[int(c)]))
        for k, c in enumerate(cols)
        if coeffs[k] != 0.0
    )
    return best_cost, Decomposition(host, terms)


def exact_norm_small(
    m: FreeElement, p: float, cap: int = DEFAULT_CAP
) -> tuple[float, Decomposition]:
    """Exact free p-norm of m over its host, with an optimal witness.

    Enumerates all decompositions supported on linearly independent molecule
    subsets; exact for every 0 < p <= 1 but exponential in the host size,
    hence the cap. Beyond the cap, use the certified bound operations
    (`upper_bound_from`, `dual_lower_bound`) instead.
    """
    p = check_p(p)
    if m.host.n > cap:
        raise ValueError(
            f"host has {m.host.n} points, beyond the exact-norm cap {cap}; "
            "use upper_bound_from / dual_lower_bound for certified bounds"
        )
    return _norm_by_enumeration(m, p, range(m.host.n))


def restricted_norm(
    m: FreeElement, p: float, subset, cap: int = DEFAULT_CAP
) -> float:
    """Infimum cost over decompositions into molecules with both endpoints in
    `subset`; at least the unrestricted norm."""
    p = check_p(p)
    subset = sorted(set(int(i) for i in subset))
    if len(subset) > cap:
        raise ValueError(f"subset has {len(subset)} points, beyond the cap {cap}")
    value, _ = _norm_by_enumeration(m, p, subset)
    return value


# ---------------------------------------------------------------------------
# p = 1: minimum-cost flow on the complete graph


def exact_norm_p1(m: FreeElement, cap: int = FLOW_CAP) -> tuple[float, Decomposition]:
    """Exact free 1-norm as a minimum-cost transshipment.

    Nonnegative flows on all ordered point pairs; each non-base point must
    emit its weight net, the base point is a free source/sink. Solved as a
    linear program (HiGHS); the flow on an edge, times its length, is the
    molecule coefficient of the witness.
    """
    host = m.host
    n = host.n
    if n > cap:
        raise ValueError(f"host has {n} points, beyond the flow cap {cap}")
    if m.is_zero():
        return 0.0, Decomposition(host, ())

    edges = [(i, j) for i in range(n) for j in range(n) if i != j]
    cost = np.array([host.distance(i, j) for i, j in edges])
    rows_idx, cols_idx, vals = [], [], []
    row_of = {q: r for r, q in enumerate(q for q in range(n) if q != host.base)}
    for c, (i, j) in enumerate(edges):
        if i in row_of:
            rows_idx.append(row_of[i])
            cols_idx.append(c)
            vals.append(1.0)
        if j in row_of:
            rows_idx.append(row_of[j])
            cols_idx.append(c)
            vals.append(-1.0)
    A_eq = sp.coo_matrix((vals, (rows_idx, cols_idx)), shape=(n - 1, len(edges)))
    b_eq = np.zeros(n - 1)
    for i, w in m.weights.items():
        b_eq[row_of[i]] = w

    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"min-cost flow LP failed: {res.message}")
    flows = res.x
    floor = COEFF_TOL * max(1.0, float(flows.max()))
    terms = tuple(
        (float(f * cost[c]), Molecule(host, *edges[c]))
        for c, f in enumerate(flows)
        if f > floor
    )
    return float(res.fun), Decomposition(host, terms)


# ---------------------------------------------------------------------------
# dual certificates


class CertificateError(ValueError):
    pass


@dataclass
class DualCertificate:
    """A family of base-vanishing Lipschitz-1 functions, each annihilating
    every molecule outside its declared activity set, with every unordered
    point pair active for at most `kappa` of them."""

    host: PointedFiniteMetric
    functions: np.ndarray  # (n_functions, n_points)
    kappa: int
    activity: np.ndarray  # (n_functions, n_points, n_points) bool, symmetric

    def __post_init__(self):
        self.functions = np.atleast_2d(np.asarray(self.functions, dtype=float))
        self.activity = np.asarray(self.activity, dtype=bool)
        n = self.host.n
        if self.functions.shape[1] != n:
            raise CertificateError("function table width differs from the host size")
        if self.activity.shape != (self.functions.shape[0], n, n):
            raise CertificateError("activity table has the wrong shape")
        if self.kappa < 1:
            raise CertificateError("multiplicity kappa must be a positive integer")

    def validate(self) -> None:
        F, D = self.functions, self.host.dist
        n = self.host.n
        if np.abs(F[:, self.host.base]).max() > 1e-12:
            raise CertificateError("certificate function does not vanish at the base")
        diffs = np.abs(F[:, :, None] - F[:, None, :])
        off = ~np.eye(n, dtype=bool)
        slack = 1e-12 * (1.0 + D.max())
        if np.any(diffs[:, off] > D[off][None, :] + slack):
            raise CertificateError("certificate function exceeds Lipschitz constant 1")
        act = self.activity | self.activity.transpose(0, 2, 1)
        counts = act.sum(axis=0)
        if counts[off].size and counts[off].max(initial=0) > self.kappa:
            raise CertificateError(
                "a point pair is active for more functions than the multiplicity"
            )
        inactive = off[None, :, :] & ~act
        if np.any(diffs[inactive] > slack):
            raise CertificateError(
                "certificate function does not annihilate an inactive molecule"
            )


def dual_lower_bound(m: FreeElement, p: float, cert: DualCertificate) -> float:
    """Certified lower bound (sum_u |<phi_u, m>|^p / kappa)^(1/p).

    Sound for any decomposition sum a_i mu_i of m: each pairing is at most
    sum of |a_i| over the molecules active for that function, subadditivity
    of t -> t^p turns that into a per-function bound, and the multiplicity
    cap lets the function sum be charged to kappa copies of the cost.
    """
    p = check_p(p)
    if cert.host is not m.host:
        raise CertificateError("certificate host differs from the element host")
    cert.validate()
    pairings = cert.functions @ m.as_full_vector()
    return float(((np.abs(pairings) ** p).sum() / cert.kappa) ** (1.0 / p))


# ---------------------------------------------------------------------------
# line-oriented text formats


def format_element(m: FreeElement) -> str:
    lines = [f"{w!r} {i}" for i, w in sorted(m.weights.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_element(host: PointedFiniteMetric, text: str) -> FreeElement:
    weights: dict[int, float] = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        toks = ln.split()
        if len(toks) != 2:
            raise ValueError(f"element line {ln!r} is not 'weight point-index'")
        w, idx = float(toks[0]), int(toks[1])
        weights[idx] = weights.get(idx, 0.0) + w
    return FreeElement(host, weights)


def format_decomposition(decomp: Decomposition) -> str:
    lines = [f"{a!r} {mol.x} {mol.y}" for a, mol in decomp.terms]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_decomposition(host: PointedFiniteMetric, text: str) -> Decomposition:
    terms = []
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        toks = ln.split()
        if len(toks) != 3:
            raise ValueError(f"decomposition line {ln!r} is not 'a x y'")
        terms.append((float(toks[0]), Molecule(host, int(toks[1]), int(toks[2]))))
    return Decomposition(host, tuple(terms))
