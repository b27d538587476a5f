"""Reduction theory: Minkowski forms, Siegel's domain, and its Jacobi extension.

Conventions used throughout (recorded in every certificate):

* ``ReductionResult.transform`` maps the reduced point back onto the input
  and ``forward`` maps the input onto the reduced point.
* ``X`` is translated into the half-open box ``[-1/2, 1/2)``.
* ``W`` is translated so its lattice coordinates lie in ``[0, 1)``.
* The condition ``det Im(g.Z) <= det Im Z`` over the whole modular group
  cannot be decided by enumeration.  It is tested over seeded random words
  in the generators, so membership certificates are marked approximate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .group import (
    DomainError,
    HeisenbergElement,
    JacobiGroupElement,
    JacobiPoint,
    SiegelPoint,
    SymplecticMatrix,
    act_jacobi,
    act_siegel,
    jacobi_inverse,
    jacobi_mul,
)

DEFAULT_SEARCH_BOUND = 5
DEFAULT_WORD_LENGTH = 6
DEFAULT_SAMPLES = 500
DEFAULT_SEED = 0
MAX_REDUCE_DEGREE = 3
_FORM_TOL = 1e-12
_DET_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    certificate: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class ReductionResult:
    reduced: object
    transform: object
    forward: object
    certificate: dict


def _positive_form(Y) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] != Y.shape[1] or np.max(np.abs(Y - Y.T)) > 1e-10 * (1 + np.max(np.abs(Y))):
        raise DomainError("positive form must be a symmetric matrix")
    try:
        np.linalg.cholesky(Y)
    except np.linalg.LinAlgError:
        raise DomainError("form is not positive definite") from None
    return 0.5 * (Y + Y.T)


def _box(n: int, bound: int) -> np.ndarray:
    r = np.arange(-bound, bound + 1)
    return np.array(list(itertools.product(r, repeat=n)), dtype=np.int64)


# Minkowski -------------------------------------------------------------------

def is_minkowski_reduced(Y, search_bound: int = DEFAULT_SEARCH_BOUND) -> CheckResult:
    """Test the Minkowski conditions on a positive form.

    ``y_{k,k+1} >= 0`` is checked exactly.  ``a Y a^T >= y_kk`` is checked
    for every integer ``a`` in ``[-search_bound, search_bound]^n`` with
    ``gcd(a_k, ..., a_n) = 1``.  A finite bound only tests necessary
    conditions (for ``n <= 4`` entries in ``{-1, 0, 1}`` already suffice).
    """
    Y = _positive_form(Y)
    if search_bound < 1:
        raise DomainError("search_bound must be at least 1")
    n = Y.shape[0]
    cert = {"conditions_checked": ["M.1", "M.2"], "bounds": {"search_bound": search_bound}}
    tol = _FORM_TOL * np.max(np.abs(Y))
    for k in range(n - 1):
        if Y[k, k + 1] < -tol:
            cert["violation"] = {"condition": "M.2", "k": k + 1}
            return CheckResult(False, cert)
    a = _box(n, search_bound)
    q = np.einsum("ai,ij,aj->a", a, Y, a)
    for k in range(n):
        primitive = np.gcd.reduce(np.abs(a[:, k:]), axis=1) == 1
        bad = primitive & (q < Y[k, k] - tol)
        if bad.any():
            idx = int(np.argmax(bad))
            cert["violation"] = {"condition": "M.1", "k": k + 1, "a": a[idx].tolist()}
            return CheckResult(False, cert)
    return CheckResult(True, cert)


def _gauss_reduce(Y: np.ndarray) -> np.ndarray:
    h = np.eye(2, dtype=np.int64)
    for _ in range(10_000):
        G = h @ Y @ h.T
        if G[1, 1] < G[0, 0]:
            h = h[::-1].copy()
            G = h @ Y @ h.T
        r = round(G[0, 1] / G[0, 0])
        if r == 0:
            return h
        h[1] -= r * h[0]
    raise DomainError("Gauss reduction did not terminate")


def _size_reduce(Y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Greedy pairwise reduction; a cheap preconditioner for the search."""
    n = h.shape[0]
    for _ in range(1000):
        changed = False
        G = h @ Y @ h.T
        h = h[np.argsort(np.diag(G), kind="stable")]
        for j in range(n):
            for i in range(n):
                if i == j:
                    continue
                G = h @ Y @ h.T
                r = round(G[i, j] / G[i, i])
                if r != 0 and G[j, j] - 2 * r * G[i, j] + r * r * G[i, i] < G[j, j] * (1 - 1e-14):
                    h[j] -= r * h[i]
                    changed = True
        if not changed:
            return h
    return h


def _successive_minima(Y: np.ndarray, h0: np.ndarray, bound: int) -> np.ndarray:
    """Pick rows one by one as the shortest vectors extending a basis."""
    n = h0.shape[0]
    c = _box(n, bound)
    c = c[np.any(c != 0, axis=1)]
    q = np.einsum("ai,ij,aj->a", c @ h0, Y, c @ h0)
    order = np.argsort(q, kind="stable")
    chosen: list[np.ndarray] = []
    for k in range(n):
        for idx in order:
            rows = np.array(chosen + [c[idx]])
            minors = [
                round(abs(np.linalg.det(rows[:, list(cols)])))
                for cols in itertools.combinations(range(n), k + 1)
            ]
            if math.gcd(*minors) == 1:
                chosen.append(c[idx])
                break
        else:
            raise DomainError("no basis extension found in the search box")
    return np.array(chosen) @ h0


def _fix_signs(Y: np.ndarray, h: np.ndarray) -> np.ndarray:
    h = h.copy()
    for k in range(h.shape[0] - 1):
        if (h[k] @ Y @ h[k + 1]) < 0:
            h[k + 1] *= -1
    return h


def minkowski_reduce(Y) -> ReductionResult:
    """Minkowski-reduce a positive form of degree at most 3.

    ``forward`` is an integral ``h`` with ``|det h| = 1`` and the reduced
    form is ``h Y h^T``; ``transform`` is ``h^-1``.
    """
    Y = _positive_form(Y)
    n = Y.shape[0]
    if n > MAX_REDUCE_DEGREE:
        raise DomainError(f"Minkowski reduction is only supported for n <= {MAX_REDUCE_DEGREE}")
    if n == 1:
        h = np.eye(1, dtype=np.int64)
        method = "trivial"
    elif n == 2:
        h = _gauss_reduce(Y)
        method = "lagrange-gauss"
    else:
        h = np.eye(n, dtype=np.int64)
        for _ in range(50):
            h = _size_reduce(Y, h)
            h_new = _successive_minima(Y, h, 2)
            if np.allclose(np.diag(h_new @ Y @ h_new.T), np.diag(h @ Y @ h.T), rtol=1e-13, atol=0):
                h = h_new
                break
            h = h_new
        method = "successive-minima"
    h = _fix_signs(Y, h)
    if n == 3 and not is_minkowski_reduced(h @ Y @ h.T):
        h = _fix_signs(Y, _successive_minima(Y, h, DEFAULT_SEARCH_BOUND))
    Yr = h @ Y @ h.T
    hinv = np.rint(np.linalg.inv(h)).astype(np.int64)
    cert = {"method": method, "conditions_checked": ["M.1", "M.2"],
            "bounds": {"search_bound": DEFAULT_SEARCH_BOUND}}
    return ReductionResult(0.5 * (Yr + Yr.T), hinv, h, cert)


# modular group ---------------------------------------------------------------

def _partial_inversion(n: int, subset) -> np.ndarray:
    s = np.zeros(n, dtype=np.int64)
    s[list(subset)] = 1
    E = np.eye(n, dtype=np.int64)
    return np.block([[E - np.diag(s), -np.diag(s)], [np.diag(s), E - np.diag(s)]])


def _translation(b: np.ndarray) -> np.ndarray:
    n = b.shape[0]
    E = np.eye(n, dtype=np.int64)
    return np.block([[E, b], [np.zeros((n, n), dtype=np.int64), E]])


def _gl_embed(U: np.ndarray) -> np.ndarray:
    """``[[U, 0], [0, U^-T]]``, which sends ``Z`` to ``U Z U^T``."""
    n = U.shape[0]
    Uit = np.rint(np.linalg.inv(U).T).astype(np.int64)
    Z0 = np.zeros((n, n), dtype=np.int64)
    return np.block([[U, Z0], [Z0, Uit]])


def _unimodular_letters(n: int) -> list[np.ndarray]:
    out = []
    for i, j in itertools.permutations(range(n), 2):
        for s in (1, -1):
            U = np.eye(n, dtype=np.int64)
            U[i, j] = s
            out.append(U)
    for i in range(n):
        U = np.eye(n, dtype=np.int64)
        U[i, i] = -1
        out.append(U)
    return out


def _random_letter(n: int, rng: np.random.Generator) -> np.ndarray:
    kind = rng.integers(3)
    if kind == 0:
        b = rng.integers(-1, 2, (n, n))
        b = np.triu(b) + np.triu(b, 1).T
        return _translation(b)
    if kind == 1 and n > 1:
        letters = _unimodular_letters(n)
        return _gl_embed(letters[rng.integers(len(letters))])
    subsets = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]
    return _partial_inversion(n, subsets[rng.integers(len(subsets))])


@lru_cache(maxsize=32)
def _modular_words_cached(n: int, word_length: int, samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty((samples, 2 * n, 2 * n), dtype=np.int64)
    for s in range(samples):
        g = np.eye(2 * n, dtype=np.int64)
        for _ in range(rng.integers(1, word_length + 1)):
            g = g @ _random_letter(n, rng)
        out[s] = g
    out.setflags(write=False)
    return out


def modular_words(n: int, word_length: int = DEFAULT_WORD_LENGTH, samples: int = DEFAULT_SAMPLES,
                  seed: int = DEFAULT_SEED) -> np.ndarray:
    """Seeded random words in generators of ``Sp(n, Z)``, shape ``(samples, 2n, 2n)``.

    Letters are integral translations, ``GL(n, Z)`` embeddings and partial
    inversions; word lengths are uniform in ``[1, word_length]``.
    """
    return _modular_words_cached(n, word_length, samples, seed)


@lru_cache(maxsize=8)
def _candidate_pool(n: int) -> np.ndarray:
    """Deterministic candidates ``sigma_S t(b)`` plus the default random words."""
    pool = []
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            cells = [(i, j) for i in S for j in S if i <= j]
            for vals in itertools.product((-1, 0, 1), repeat=len(cells)):
                b = np.zeros((n, n), dtype=np.int64)
                for (i, j), v in zip(cells, vals):
                    b[i, j] = b[j, i] = v
                pool.append(_partial_inversion(n, S) @ _translation(b))
    pool = np.concatenate([np.array(pool), modular_words(n)])
    pool.setflags(write=False)
    return pool


def _abs_dets(words: np.ndarray, Z: np.ndarray) -> np.ndarray:
    n = Z.shape[0]
    C = words[:, n:, :n].astype(float)
    D = words[:, n:, n:].astype(float)
    return np.abs(np.linalg.det(C @ Z + D))


# Siegel ----------------------------------------------------------------------

def is_siegel_reduced(Z, word_length: int = DEFAULT_WORD_LENGTH, samples: int = DEFAULT_SAMPLES,
                      rng_seed: int = DEFAULT_SEED, search_bound: int = DEFAULT_SEARCH_BOUND) -> CheckResult:
    """Test membership in Siegel's fundamental domain.

    The ``Y`` and ``X`` conditions are checked directly; the highest-point
    condition only over ``samples`` random words, using
    ``det Im(g.Z) = det Y / |det(CZ + D)|^2``.
    """
    Z = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    n = Z.n
    cert = {
        "conditions_checked": ["S.1 (sampled, approximate)", "S.2", "S.3"],
        "bounds": {"search_bound": search_bound, "x_box": "[-1/2, 1/2]"},
        "word_length": word_length,
        "samples": samples,
        "seed": rng_seed,
    }
    mk = is_minkowski_reduced(Z.Y, search_bound)
    if not mk:
        cert["violation"] = {"condition": "S.2", "detail": mk.certificate.get("violation")}
        return CheckResult(False, cert)
    if np.max(np.abs(Z.X)) > 0.5 + _FORM_TOL:
        cert["violation"] = {"condition": "S.3"}
        return CheckResult(False, cert)
    words = modular_words(n, word_length, samples, rng_seed)
    dets = _abs_dets(words, Z.Z)
    worst = int(np.argmin(dets))
    cert["min_abs_det"] = float(dets[worst])
    if dets[worst] < 1 - _DET_TOL:
        cert["violation"] = {"condition": "S.1", "word": words[worst].tolist()}
        return CheckResult(False, cert)
    return CheckResult(True, cert)


def _as_jacobi(M: np.ndarray, m: int) -> JacobiGroupElement:
    n = M.shape[0] // 2
    return JacobiGroupElement(SymplecticMatrix(M.astype(float)), HeisenbergElement.zero(n, m))


def siegel_reduce(Z, max_iter: int = 10_000) -> ReductionResult:
    """Move ``Z`` into Siegel's fundamental domain by the highest point method.

    Each round Minkowski-reduces ``Y``, translates ``X`` into
    ``[-1/2, 1/2)`` and then applies the candidate modular element that
    raises ``det Y`` the most.  The loop stops once no candidate raises it.
    Both ``transform`` and ``forward`` are integral symplectic matrices.
    """
    Z0 = Z if isinstance(Z, SiegelPoint) else SiegelPoint(Z)
    n = Z0.n
    if n > MAX_REDUCE_DEGREE:
        raise DomainError(f"Siegel reduction is only supported for n <= {MAX_REDUCE_DEGREE}")
    pool = _candidate_pool(n)
    T = np.eye(2 * n, dtype=np.int64)
    det_history = [float(np.linalg.det(Z0.Y))]
    inversions = 0
    for it in range(max_iter):
        Zc = act_siegel(SymplecticMatrix(T.astype(float)), Z0)
        U = minkowski_reduce(Zc.Y).forward
        T = _gl_embed(U) @ T
        Zc = act_siegel(SymplecticMatrix(T.astype(float)), Z0)
        b = -np.floor(Zc.X + 0.5).astype(np.int64)
        T = _translation(b) @ T
        Zc = act_siegel(SymplecticMatrix(T.astype(float)), Z0)
        dets = _abs_dets(pool, Zc.Z)
        best = int(np.argmin(dets))
        if dets[best] >= 1 - 1e-12:
            break
        T = pool[best] @ T
        inversions += 1
        det_history.append(float(np.linalg.det(act_siegel(SymplecticMatrix(T.astype(float)), Z0).Y)))
    else:
        raise DomainError(f"Siegel reduction did not converge in {max_iter} iterations; "
                          f"det Im history tail {det_history[-5:]}")
    Tinv = np.rint(SymplecticMatrix(T.astype(float)).inverse().M).astype(np.int64)
    cert = {
        "conditions_checked": ["S.1 (candidate pool + sampled words)", "S.2", "S.3"],
        "bounds": {"search_bound": DEFAULT_SEARCH_BOUND, "x_box": "[-1/2, 1/2)"},
        "word_length": DEFAULT_WORD_LENGTH,
        "samples": DEFAULT_SAMPLES,
        "seed": DEFAULT_SEED,
        "iterations": it + 1,
        "inversion_steps": inversions,
        "det_im_history": det_history,
    }
    return ReductionResult(Zc, Tinv, T, cert)


# lattices and the Jacobi domain ------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeBasis:
    """Integral basis ``f_kl, f_kl Omega`` of the lattice ``Z^(m,n) + Z^(m,n) Omega``."""

    omega: SiegelPoint
    m: int

    def __post_init__(self):
        if not isinstance(self.omega, SiegelPoint):
            object.__setattr__(self, "omega", SiegelPoint(self.omega))

    @property
    def n(self) -> int:
        return self.omega.n

    def vectors(self) -> list[np.ndarray]:
        m, n = self.m, self.n
        fs = []
        for k in range(m):
            for l in range(n):
                f = np.zeros((m, n), dtype=complex)
                f[k, l] = 1
                fs.append(f)
        return fs + [f @ self.omega.Z for f in fs]

    def real_matrix(self) -> np.ndarray:
        return np.array([np.concatenate([v.real.ravel(), v.imag.ravel()]) for v in self.vectors()]).T


def lattice_coords(basis: LatticeBasis, Z) -> np.ndarray:
    """Real coefficients of ``Z`` in the lattice basis.

    The first ``mn`` entries multiply ``f_kl`` and the last ``mn`` multiply
    ``f_kl Omega`` (both row-major in ``k, l``).
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    R = basis.real_matrix()
    if np.linalg.cond(R) > 1e12:
        raise DomainError("lattice basis is numerically singular")
    return np.linalg.solve(R, np.concatenate([Z.real.ravel(), Z.imag.ravel()]))


def jacobi_reduce(p: JacobiPoint, max_iter: int = 10_000) -> ReductionResult:
    """Move ``p`` into the fundamental domain of ``Sp(n, Z) x H_Z``.

    ``Z`` is Siegel-reduced and ``W`` is then translated by an integral
    Heisenberg element until its lattice coordinates lie in ``[0, 1)``.
    """
    m, n = p.m, p.n
    sres = siegel_reduce(p.siegel, max_iter)
    g = _as_jacobi(sres.forward, m)
    q = act_jacobi(g, p)
    basis = LatticeBasis(SiegelPoint(q.Z), m)
    for _ in range(4):
        c = lattice_coords(basis, q.W)
        shift = np.floor(c)
        if not shift.any() and np.all(c < 1):
            break
        mu = -shift[: m * n].reshape(m, n)
        lam = -shift[m * n:].reshape(m, n)
        t = JacobiGroupElement(SymplecticMatrix(np.eye(2 * n)), HeisenbergElement(lam, mu, -mu @ lam.T))
        g = jacobi_mul(t, g)
        q = act_jacobi(g, p)
    coords = lattice_coords(basis, q.W)
    cert = dict(sres.certificate)
    cert["conditions_checked"] = cert["conditions_checked"] + ["W lattice box"]
    cert["bounds"] = dict(cert["bounds"], w_box="[0, 1)")
    cert["lattice_coords"] = coords.tolist()
    return ReductionResult(q, jacobi_inverse(g), g, cert)


# volumes -------------------------------------------------------------------

@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Bernoulli number ``B_k`` (with ``B_1 = -1/2``)."""
    if k == 0:
        return Fraction(1)
    return -sum(math.comb(k + 1, j) * bernoulli(j) for j in range(k)) / (k + 1)


def zeta_even(k: int) -> tuple[Fraction, int]:
    """``zeta(2k) = r * pi^(2k)``; returns ``(r, 2k)``."""
    r = abs(bernoulli(2 * k)) * 2 ** (2 * k - 1) / math.factorial(2 * k)
    return r, 2 * k


def siegel_volume_exact(n: int) -> tuple[Fraction, int]:
    """``vol = r * pi^e`` for Siegel's fundamental domain; returns ``(r, e)``."""
    if not 1 <= n <= 20:
        raise DomainError("siegel_volume supports 1 <= n <= 20")
    r = Fraction(2)
    e = 0
    for k in range(1, n + 1):
        zr, ze = zeta_even(k)
        r *= math.factorial(k - 1) * zr
        e += ze - k
    return r, e


def siegel_volume(n: int) -> float:
    """``2 prod_{k<=n} pi^-k Gamma(k) zeta(2k)`` as a float."""
    r, e = siegel_volume_exact(n)
    try:
        value = float(r) * math.pi ** e
    except OverflowError:
        raise DomainError(f"siegel_volume({n}) overflows double precision") from None
    if not math.isfinite(value) or value == 0.0:
        raise DomainError(f"siegel_volume({n}) is not representable in double precision")
    return value
