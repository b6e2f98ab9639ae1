"""Shared corpus of test complexes and a session-wide spectral cache."""

import pytest

from hodgeheat import laplacian_spectrum
from hodgeheat import library as lib

RANDOM_SEEDS = tuple(range(101, 121))  # 20 seeded random 2-complexes


def _build_corpus():
    items = [
        ("interval", lib.interval()),
        ("P5", lib.path_complex(5)),
        ("C3", lib.cycle_complex(3)),
        ("C12", lib.cycle_complex(12)),
        ("filled_triangle", lib.filled_triangle()),
        ("tetra_boundary", lib.simplex_boundary(3)),
        ("torus_6x6", lib.flat_torus(6, 6)),
    ]
    items += [(f"random_{seed}", lib.random_two_complex(seed)) for seed in RANDOM_SEEDS]
    return items


CORPUS = _build_corpus()
NAMED = CORPUS[:7]
CORPUS_IDS = [name for name, _ in CORPUS]
NAMED_IDS = [name for name, _ in NAMED]

_SPECTRA = {}


def spectrum_of(name, K, ell):
    """Eigendecomposition cached per (corpus entry, degree) for the session."""
    key = (name, ell)
    if key not in _SPECTRA:
        _SPECTRA[key] = laplacian_spectrum(K, ell)
    return _SPECTRA[key]


def all_degrees(K):
    return range(K.max_degree + 1)


@pytest.fixture(scope="session")
def corpus():
    return CORPUS
