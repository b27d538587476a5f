import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siegel_jacobi.group import (
    DomainError,
    JacobiPoint,
    SiegelPoint,
    SymplecticMatrix,
    act_jacobi,
    act_siegel,
    is_symplectic,
)
from siegel_jacobi.reduction import (
    LatticeBasis,
    bernoulli,
    is_minkowski_reduced,
    is_siegel_reduced,
    jacobi_reduce,
    lattice_coords,
    minkowski_reduce,
    modular_words,
    siegel_reduce,
    siegel_volume,
    siegel_volume_exact,
)

seeds = st.integers(0, 2**32 - 1)


def random_form(n, rng, floor=1e-3):
    L = rng.normal(size=(n, n)) * rng.uniform(0.1, 3, n)
    return L @ L.T + floor * np.eye(n)


def random_siegel(n, rng):
    X = rng.uniform(-3, 3, (n, n))
    return SiegelPoint(0.5 * (X + X.T) + 1j * random_form(n, rng, 0.02) * rng.uniform(0.05, 1))


def brute_minimum(Y, bound=10):
    a = np.array(list(itertools.product(range(-bound, bound + 1), repeat=Y.shape[0])))
    a = a[np.any(a != 0, axis=1)]
    return np.min(np.einsum("ai,ij,aj->a", a, Y, a))


# Minkowski ------------------------------------------------------------------

def test_minkowski_check_examples():
    for n in (1, 2, 3):
        for bound in (1, 3, 5):
            assert is_minkowski_reduced(np.eye(n), bound)
    r = is_minkowski_reduced([[1, 0.6], [0.6, 1]])
    assert not r and r.certificate["violation"]["condition"] == "M.1"
    assert is_minkowski_reduced([[1, 0.3], [0.3, 2]], 5)
    assert not is_minkowski_reduced([[1, -0.3], [-0.3, 2]], 5)
    assert is_minkowski_reduced(np.eye(2)).certificate["bounds"]["search_bound"] == 5


def test_minkowski_check_rejects_bad_input():
    with pytest.raises(DomainError):
        is_minkowski_reduced([[1, 2], [2, 1]])
    with pytest.raises(DomainError):
        is_minkowski_reduced(np.eye(2), 0)


def test_minkowski_reduce_example():
    Y = np.array([[1, 0.6], [0.6, 1]])
    r = minkowski_reduce(Y)
    assert r.reduced[0, 0] == pytest.approx(brute_minimum(Y))
    assert r.reduced[0, 0] == pytest.approx(0.8)
    assert np.allclose(r.forward @ Y @ r.forward.T, r.reduced)
    assert np.allclose(r.transform @ r.reduced @ r.transform.T, Y)


def test_minkowski_reduce_small_cases():
    assert np.array_equal(minkowski_reduce([[2.5]]).forward, [[1]])
    r = minkowski_reduce(np.diag([3.0, 1.0]))
    assert abs(r.forward).tolist() == [[0, 1], [1, 0]]
    with pytest.raises(DomainError):
        minkowski_reduce(np.eye(4))


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_minkowski_reduce_properties(seed, n):
    Y = random_form(n, np.random.default_rng(seed))
    r = minkowski_reduce(Y)
    h = r.forward
    assert abs(round(np.linalg.det(h))) == 1
    assert is_minkowski_reduced(r.reduced)
    assert r.reduced[0, 0] == pytest.approx(brute_minimum(Y, 10 if n == 2 else 6), rel=1e-9)
    back = r.transform @ r.reduced @ r.transform.T
    assert np.max(np.abs(back - Y)) < 1e-9 * np.max(np.abs(Y))


# Siegel -------------------------------------------------------------------

def test_siegel_check_examples():
    for n in (1, 2, 3):
        assert is_siegel_reduced(1j * np.eye(n))
    r = is_siegel_reduced([[0.3 + 0.2j]])
    assert not r and r.certificate["violation"]["condition"] == "S.1"
    assert is_siegel_reduced([[0.25 + 2j]])
    assert not is_siegel_reduced([[0.7 + 2j]])
    c = is_siegel_reduced([[0.25 + 2j]], word_length=3, samples=50, rng_seed=9).certificate
    assert (c["word_length"], c["samples"], c["seed"]) == (3, 50, 9)
    assert "approximate" in c["conditions_checked"][0]


def test_modular_words_are_integral_symplectic():
    W = modular_words(2, 6, 100, 3)
    assert W.dtype.kind == "i"
    for M in W:
        assert is_symplectic(M.astype(float), 0)
    assert np.array_equal(W, modular_words(2, 6, 100, 3))


def test_siegel_reduce_classical_example():
    Z = SiegelPoint([[0.3 + 0.2j]])
    r = siegel_reduce(Z)
    z = complex(r.reduced.Z[0, 0])
    assert abs(z.real) <= 0.5 and abs(z) >= 1
    assert np.allclose(act_siegel(SymplecticMatrix(r.transform.astype(float)), r.reduced).Z, Z.Z)


def test_siegel_reduce_fixed_point():
    r = siegel_reduce(1j * np.eye(2))
    assert np.allclose(r.reduced.Z, 1j * np.eye(2))
    assert np.array_equal(np.abs(r.transform), np.eye(4, dtype=int))
    assert r.certificate["inversion_steps"] == 0


def test_siegel_reduce_unsupported_degree():
    with pytest.raises(DomainError):
        siegel_reduce(1j * np.eye(4))


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([1, 2, 3]))
def test_siegel_reduce_properties(seed, n):
    Z = random_siegel(n, np.random.default_rng(seed))
    r = siegel_reduce(Z)
    assert is_siegel_reduced(r.reduced)
    assert np.array_equal(r.transform @ r.forward, np.eye(2 * n, dtype=int))
    assert is_symplectic(r.transform.astype(float), 0)
    back = act_siegel(SymplecticMatrix(r.transform.astype(float)), r.reduced)
    assert np.max(np.abs(back.Z - Z.Z)) < 1e-9 * (1 + np.max(np.abs(Z.Z)))
    hist = r.certificate["det_im_history"]
    assert all(b > a for a, b in zip(hist, hist[1:]))


def test_siegel_reduce_classical_domain_n1():
    rng = np.random.default_rng(50)
    for _ in range(100):
        z = complex(siegel_reduce(random_siegel(1, rng)).reduced.Z[0, 0])
        assert abs(z.real) <= 0.5 + 1e-12 and abs(z) >= 1 - 1e-12


# lattice and Jacobi --------------------------------------------------------------

def test_lattice_coords_basis_vectors():
    O = SiegelPoint([[0.3 + 1.1j, 0.2 + 0.1j], [0.2 + 0.1j, -0.4 + 0.9j]])
    basis = LatticeBasis(O, 2)
    vecs = basis.vectors()
    assert len(vecs) == 8
    for k, v in enumerate(vecs):
        c = lattice_coords(basis, v)
        assert np.allclose(c, np.eye(8)[k], atol=1e-12)


def test_lattice_coords_round_trip():
    rng = np.random.default_rng(51)
    for n, m in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)]:
        O = random_siegel(n, rng)
        basis = LatticeBasis(O, m)
        Z = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        c = lattice_coords(basis, Z)
        rebuilt = sum(ck * v for ck, v in zip(c, basis.vectors()))
        assert np.max(np.abs(rebuilt - Z)) < 1e-10


def test_jacobi_reduce_base_point():
    p = JacobiPoint(1j * np.eye(2), np.zeros((1, 2)))
    r = jacobi_reduce(p)
    assert np.allclose(r.reduced.Z, p.Z) and np.allclose(r.reduced.W, 0)


def test_jacobi_reduce_example():
    p = JacobiPoint([[0.25 + 2j]], [[3.7 + 5.2j]])
    r = jacobi_reduce(p)
    c = np.array(r.certificate["lattice_coords"])
    assert np.all((c >= 0) & (c < 1))
    assert np.allclose(c, [0.05, 0.6])
    back = act_jacobi(r.transform, r.reduced)
    assert np.allclose(back.Z, p.Z, atol=1e-12) and np.allclose(back.W, p.W, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([(1, 1), (2, 1), (1, 2), (2, 2)]))
def test_jacobi_reduce_properties(seed, shape):
    n, m = shape
    rng = np.random.default_rng(seed)
    Z = random_siegel(n, rng)
    p = JacobiPoint(Z.Z, rng.uniform(-6, 6, (m, n)) + 1j * rng.uniform(-6, 6, (m, n)))
    r = jacobi_reduce(p)
    c = np.array(r.certificate["lattice_coords"])
    assert np.all((c >= 0) & (c < 1))
    assert is_siegel_reduced(r.reduced.siegel)
    back = act_jacobi(r.transform, r.reduced)
    assert np.max(np.abs(back.Z - p.Z)) < 1e-9 * (1 + np.max(np.abs(p.Z)))
    assert np.max(np.abs(back.W - p.W)) < 1e-9 * (1 + np.max(np.abs(p.W)))
    again = jacobi_reduce(r.reduced)
    assert np.allclose(again.certificate["lattice_coords"], c, atol=1e-9)


# volumes -------------------------------------------------------------------

def test_bernoulli_numbers():
    from fractions import Fraction

    assert [bernoulli(k) for k in (0, 1, 2, 4, 6, 12)] == [
        Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-691, 2730)
    ]


def test_siegel_volume_table():
    expected = [math.pi / 3, math.pi**3 / 270, math.pi**6 / 127575, math.pi**10 / 200930625]
    for n, v in enumerate(expected, start=1):
        assert siegel_volume(n) == pytest.approx(v, rel=1e-12)
    assert siegel_volume_exact(4)[1] == 10


def test_siegel_volume_against_series():
    mpmath.mp.dps = 40
    for n in range(1, 21):
        ref = 2 * mpmath.fprod(mpmath.pi ** (-k) * mpmath.gamma(k) * mpmath.zeta(2 * k) for k in range(1, n + 1))
        assert siegel_volume(n) == pytest.approx(float(ref), rel=1e-12)


def test_siegel_volume_range():
    for n in (0, 21):
        with pytest.raises(DomainError):
            siegel_volume(n)
