"""Ready-made complexes: small graphs, surfaces, and seeded random 2-complexes."""

import itertools

import numpy as np

from .complexes import Cochain, SimplicialComplex, build_complex


def interval() -> SimplicialComplex:
    """Single edge on two vertices."""
    return build_complex({"edges": [(0, 1)]})


def path_complex(n: int) -> SimplicialComplex:
    """Path graph on n vertices."""
    if n < 2:
        raise ValueError("a path needs at least 2 vertices")
    return build_complex({"edges": [(i, i + 1) for i in range(n - 1)]})


def cycle_complex(n: int) -> SimplicialComplex:
    """Cycle graph C_n (no 2-cells)."""
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return build_complex({"edges": [tuple(sorted((i, (i + 1) % n))) for i in range(n)]})


def filled_triangle() -> SimplicialComplex:
    return build_complex({"triangles": [(0, 1, 2)]})


def complete_graph(n: int) -> SimplicialComplex:
    return build_complex({"edges": list(itertools.combinations(range(n), 2))})


def simplex_boundary(n: int) -> SimplicialComplex:
    """Boundary of the n-simplex: all proper faces of {0, ..., n}.

    n = 3 gives the tetrahedron surface, a triangulated 2-sphere.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    top = list(itertools.combinations(range(n + 1), n))
    return build_complex({n - 1: top})


def flat_torus(nx: int = 6, ny: int = 6) -> SimplicialComplex:
    """Triangulated flat torus on an nx-by-ny vertex grid.

    Each grid square is split into two triangles; nx, ny >= 3 keeps the
    triangulation simplicial (no repeated vertices in a cell).
    """
    if nx < 3 or ny < 3:
        raise ValueError("flat torus triangulation needs nx, ny >= 3")

    def vid(i, j):
        return (i % nx) * ny + (j % ny)

    triangles = []
    for i in range(nx):
        for j in range(ny):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            triangles.append(tuple(sorted((a, b, d))))
            triangles.append(tuple(sorted((a, d, c))))
    return build_complex({"triangles": triangles})


def random_two_complex(seed: int) -> SimplicialComplex:
    """Seeded random weighted 2-complex on 5-9 vertices.

    A few triangles plus a few extra edges, closed under faces, with all
    weights drawn uniformly from [0.5, 2.0].  Connectivity is not forced,
    so some seeds exercise the multi-component code paths.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 10))
    all_triangles = list(itertools.combinations(range(n), 3))
    k = int(rng.integers(2, min(10, len(all_triangles)) + 1))
    tri_idx = rng.choice(len(all_triangles), size=k, replace=False)
    triangles = [all_triangles[i] for i in sorted(tri_idx)]

    all_edges = list(itertools.combinations(range(n), 2))
    m = int(rng.integers(1, 5))
    edge_idx = rng.choice(len(all_edges), size=m, replace=False)
    edges = [all_edges[i] for i in sorted(edge_idx)]

    skeleton = build_complex({
        "vertices": list(range(n)),
        "edges": edges,
        "triangles": triangles,
    })
    weights = [rng.uniform(0.5, 2.0, size=len(level)) for level in skeleton.simplices]
    return SimplicialComplex(skeleton.simplices, weights)


def random_cochain(K: SimplicialComplex, ell: int, seed: int) -> Cochain:
    """Seeded test cochain with entries uniform in [-1, 1]."""
    rng = np.random.default_rng(seed)
    return Cochain(ell, rng.uniform(-1.0, 1.0, size=K.n_simplices(ell)))
