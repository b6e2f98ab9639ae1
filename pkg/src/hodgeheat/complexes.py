"""Weighted simplicial complexes and the basic calculus on their cochains.

A complex stores, for every degree, the list of simplices as tuples of
vertex ids in increasing order (the reference orientation), sorted
lexicographically so indexing is deterministic.  Every simplex carries a
strictly positive weight; the weights are the masses of the inner product

    <u, v>_W = sum_sigma w_sigma * u_sigma * v_sigma

on degree-ell cochains, and of the corresponding weighted p-norms.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

# Relative threshold separating exact-zero homology from double-precision
# noise.  Single source of truth for "harmonic" across the package.
RANK_TOL = 1e-10

_DEGREE_NAMES = {"vertices": 0, "edges": 1, "triangles": 2, "tetrahedra": 3}


@dataclass
class Cochain:
    """Real-valued function on the oriented ell-simplices of a complex."""

    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise ValueError("cochain values must be a 1-d array")

    def copy(self) -> "Cochain":
        return Cochain(self.degree, self.values.copy())


@dataclass
class OperatorMatrix:
    """Linear map between cochain spaces, tagged with its degrees.

    ``symmetric`` asserts self-adjointness with respect to the weighted
    inner product of the (common) degree; builders verify it before
    setting the flag.
    """

    entries: np.ndarray
    domain_degree: int
    codomain_degree: int
    symmetric: bool = False

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if self.entries.ndim != 2:
            raise ValueError("operator entries must be a matrix")

    @property
    def shape(self):
        return self.entries.shape

    def apply(self, omega: Cochain) -> Cochain:
        if omega.degree != self.domain_degree:
            raise ValueError(
                f"operator expects degree {self.domain_degree}, got {omega.degree}"
            )
        return Cochain(self.codomain_degree, self.entries @ omega.values)


class SimplicialComplex:
    """Oriented weighted simplicial complex, closed under taking faces."""

    def __init__(self, simplices, weights):
        if not simplices or not simplices[0]:
            raise ValueError("empty complex: at least one vertex is required")
        self.simplices: list[tuple[tuple[int, ...], ...]] = [
            tuple(tuple(int(v) for v in s) for s in level) for level in simplices
        ]
        self.weights: list[np.ndarray] = [
            np.asarray(w, dtype=float) for w in weights
        ]
        if len(self.weights) != len(self.simplices):
            raise ValueError("weights and simplices must cover the same degrees")
        for ell, (level, w) in enumerate(zip(self.simplices, self.weights)):
            if len(level) != len(w):
                raise ValueError(f"degree {ell}: {len(level)} simplices, {len(w)} weights")
            if np.any(w <= 0):
                bad = level[int(np.argmin(w))]
                raise ValueError(f"non-positive weight on simplex {bad}")
            for s in level:
                if len(s) != ell + 1 or list(s) != sorted(set(s)):
                    raise ValueError(f"invalid degree-{ell} simplex {s}")
            if len(set(level)) != len(level):
                raise ValueError(f"duplicate simplices in degree {ell}")
        self._index = [
            {s: i for i, s in enumerate(level)} for level in self.simplices
        ]

    @property
    def max_degree(self) -> int:
        return len(self.simplices) - 1

    @property
    def vertex_count(self) -> int:
        return len(self.simplices[0])

    def n_simplices(self, ell: int) -> int:
        self._check_degree(ell)
        return len(self.simplices[ell])

    def weight_vector(self, ell: int) -> np.ndarray:
        self._check_degree(ell)
        return self.weights[ell]

    def total_weight(self, ell: int) -> float:
        return float(self.weight_vector(ell).sum())

    def index_of(self, ell: int, simplex) -> int:
        self._check_degree(ell)
        return self._index[ell][tuple(simplex)]

    def check_cochain(self, omega: Cochain) -> None:
        self._check_degree(omega.degree)
        n = self.n_simplices(omega.degree)
        if omega.values.shape != (n,):
            raise ValueError(
                f"cochain of degree {omega.degree} must have {n} values, "
                f"got {omega.values.shape}"
            )

    def zero_cochain(self, ell: int) -> Cochain:
        return Cochain(ell, np.zeros(self.n_simplices(ell)))

    def vertex_adjacency(self) -> dict[int, set[int]]:
        """Adjacency of the 1-skeleton, keyed by vertex id."""
        adj: dict[int, set[int]] = {v: set() for (v,) in self.simplices[0]}
        if self.max_degree >= 1:
            for (u, v) in self.simplices[1]:
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def _check_degree(self, ell: int) -> None:
        if not 0 <= ell <= self.max_degree:
            raise ValueError(f"degree {ell} out of range [0, {self.max_degree}]")

    def __repr__(self):
        counts = ", ".join(str(len(s)) for s in self.simplices)
        return f"SimplicialComplex(counts=[{counts}])"


def build_complex(spec) -> SimplicialComplex:
    """Build a complex from a description mapping.

    Simplices are listed by degree, either under named keys (``vertices``,
    ``edges``, ``triangles``, ``tetrahedra``) or under integer / string
    degree keys.  ``weights`` maps a degree to a list of weights aligned
    with the listing order; unlisted simplices created by the face closure
    get weight 1.0, listed ones default to ``weights_default`` (1.0).
    """
    listed: dict[int, list[tuple[int, ...]]] = {}
    for key, value in spec.items():
        if key in ("weights", "weights_default"):
            continue
        ell = _degree_key(key)
        level = listed.setdefault(ell, [])
        for raw in value:
            raw = (raw,) if isinstance(raw, int) else tuple(int(v) for v in raw)
            s = tuple(sorted(raw))
            if len(s) != ell + 1:
                raise ValueError(f"simplex {raw} does not have degree {ell}")
            if len(set(s)) != len(s):
                raise ValueError(f"simplex {raw} repeats a vertex")
            level.append(s)
    if not listed:
        raise ValueError("empty complex description")

    default = float(spec.get("weights_default", 1.0))
    weight_spec = {_degree_key(k): v for k, v in spec.get("weights", {}).items()}

    weighted: dict[int, dict[tuple[int, ...], float]] = {}
    for ell, level in listed.items():
        given = weight_spec.get(ell)
        if given is not None and len(given) != len(level):
            raise ValueError(
                f"degree {ell}: {len(level)} simplices but {len(given)} weights"
            )
        table: dict[tuple[int, ...], float] = {}
        for i, s in enumerate(level):
            if s in table:
                raise ValueError(f"duplicate simplex {s} in degree {ell}")
            table[s] = float(given[i]) if given is not None else default
        weighted[ell] = table

    max_degree = max(weighted)
    levels = [weighted.get(ell, {}) for ell in range(max_degree + 1)]
    # Close under taking faces; faces added here carry weight 1.0.
    for ell in range(max_degree, 0, -1):
        for s in levels[ell]:
            for face in itertools.combinations(s, ell):
                levels[ell - 1].setdefault(face, 1.0)

    simplices, weights = [], []
    for table in levels:
        order = sorted(table)
        simplices.append(order)
        weights.append([table[s] for s in order])
    for ell, (level, w) in enumerate(zip(simplices, weights)):
        for s, wt in zip(level, w):
            if wt <= 0:
                raise ValueError(f"non-positive weight {wt} on simplex {s}")
    return SimplicialComplex(simplices, weights)


def _degree_key(key) -> int:
    if isinstance(key, str) and key in _DEGREE_NAMES:
        return _DEGREE_NAMES[key]
    try:
        ell = int(key)
    except (TypeError, ValueError):
        raise ValueError(f"unknown degree key {key!r}") from None
    if ell < 0:
        raise ValueError(f"negative degree key {key!r}")
    return ell


def coboundary(K: SimplicialComplex, ell: int) -> OperatorMatrix:
    """Signed incidence matrix d_ell: C^ell -> C^(ell+1).

    The entry for an (ell+1)-simplex and its i-th face (the sorted simplex
    with the i-th vertex removed) is (-1)^i; all other entries vanish.
    """
    if not 0 <= ell < K.max_degree:
        raise ValueError(f"coboundary degree {ell} out of range [0, {K.max_degree - 1}]")
    lo, hi = K.simplices[ell], K.simplices[ell + 1]
    D = np.zeros((len(hi), len(lo)))
    for row, s in enumerate(hi):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            D[row, K.index_of(ell, face)] = -1.0 if i % 2 else 1.0
    return OperatorMatrix(D, domain_degree=ell, codomain_degree=ell + 1)


def codifferential(K: SimplicialComplex, ell: int) -> OperatorMatrix:
    """Adjoint of the coboundary w.r.t. the weighted inner products.

    delta_ell = W_(ell-1)^-1 d_(ell-1)^T W_ell, mapping C^ell -> C^(ell-1).
    """
    if not 1 <= ell <= K.max_degree:
        raise ValueError(f"codifferential degree {ell} out of range [1, {K.max_degree}]")
    d = coboundary(K, ell - 1).entries
    entries = weighted_adjoint(d, K.weight_vector(ell - 1), K.weight_vector(ell))
    return OperatorMatrix(entries, domain_degree=ell, codomain_degree=ell - 1)


def hodge_laplacian(K: SimplicialComplex, ell: int) -> OperatorMatrix:
    """Hodge Laplacian d delta + delta d on degree ell (boundary terms dropped)."""
    K._check_degree(ell)
    n = K.n_simplices(ell)
    A = np.zeros((n, n))
    if ell >= 1:
        A += coboundary(K, ell - 1).entries @ codifferential(K, ell).entries
    if ell < K.max_degree:
        A += codifferential(K, ell + 1).entries @ coboundary(K, ell).entries
    w = K.weight_vector(ell)
    if not is_weighted_self_adjoint(A, w):
        raise AssertionError("assembled Laplacian is not W-self-adjoint")
    return OperatorMatrix(A, domain_degree=ell, codomain_degree=ell, symmetric=True)


def weighted_adjoint(A: np.ndarray, w_dom: np.ndarray, w_cod: np.ndarray) -> np.ndarray:
    """Adjoint of A: (C^dom, W_dom) -> (C^cod, W_cod)."""
    return (A.T * np.asarray(w_cod)[None, :]) / np.asarray(w_dom)[:, None]


def is_weighted_self_adjoint(A: np.ndarray, w: np.ndarray, tol: float = 1e-12) -> bool:
    diff = np.linalg.norm(A - weighted_adjoint(A, w, w))
    return diff <= tol * max(np.linalg.norm(A), 1e-300)


def inner_product(K: SimplicialComplex, u: Cochain, v: Cochain) -> float:
    if u.degree != v.degree:
        raise ValueError("inner product needs cochains of equal degree")
    K.check_cochain(u)
    K.check_cochain(v)
    return float(np.sum(K.weight_vector(u.degree) * u.values * v.values))


def lp_norm(K: SimplicialComplex, omega: Cochain, p) -> float:
    """Weighted p-norm (sum_sigma w_sigma |omega_sigma|^p)^(1/p); sup-norm at p=inf."""
    K.check_cochain(omega)
    p = float(p)
    if math.isinf(p):
        return float(np.max(np.abs(omega.values))) if omega.values.size else 0.0
    if p < 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    w = K.weight_vector(omega.degree)
    return float(np.sum(w * np.abs(omega.values) ** p) ** (1.0 / p))


def betti_numbers(K: SimplicialComplex) -> list[int]:
    """Cohomology dimensions b_ell = dim C^ell - rank d_ell - rank d_(ell-1).

    Ranks come from singular values of the integer incidence matrices with
    relative threshold RANK_TOL; weights do not affect them.
    """
    ranks = [
        _rank(coboundary(K, ell).entries) for ell in range(K.max_degree)
    ]
    betti = []
    for ell in range(K.max_degree + 1):
        b = K.n_simplices(ell)
        if ell < K.max_degree:
            b -= ranks[ell]
        if ell >= 1:
            b -= ranks[ell - 1]
        betti.append(int(b))
    return betti


def _rank(A: np.ndarray) -> int:
    if min(A.shape) == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.count_nonzero(sv > RANK_TOL * sv[0]))
