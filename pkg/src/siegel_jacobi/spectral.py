"""Eigenfunctions of the invariant Laplacian for n = m = 1, the Bessel
integral, and Fourier analysis on the complex torus ``C^(m,n) / L_Omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import numdiff
from .geometry import MetricParams, ScalarField, laplacian_apply
from .group import (
    DomainError,
    HeisenbergElement,
    JacobiGroupElement,
    JacobiPoint,
    SiegelPoint,
    SymplecticMatrix,
    act_jacobi,
    standard_j,
)
from .reduction import modular_words

_GL_ORDER = 24
_TAIL_LOG = math.log(1e18)


# Bessel K --------------------------------------------------------------------

@lru_cache(maxsize=1)
def _gauss_legendre():
    return np.polynomial.legendre.leggauss(_GL_ORDER)


def _cutoff(s: complex, z: complex) -> float:
    """Smallest ``T`` with ``Re z (cosh T - 1) - |Re s| T`` beyond the tail budget."""
    a, b = z.real, abs(s.real)

    def excess(T):
        return a * (math.cosh(T) - 1.0) - b * T - _TAIL_LOG

    lo, hi = 0.0, 1.0
    while excess(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > 200:
            raise DomainError(f"Bessel integral does not decay fast enough for s={s}, z={z}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if excess(mid) < 0 else (lo, mid)
    return hi


def bessel_k(s: complex, z: complex) -> complex:
    """``K_s(z) = int_0^inf exp(-z cosh u) cosh(s u) du`` for ``Re z > 0``.

    This is the ``t = e^u`` form of ``1/2 int_0^inf exp(-z (t + 1/t) / 2) t^(s-1) dt``.
    The range is cut where the integrand falls below ``1e-18`` of its value
    at zero and split into Gauss-Legendre panels, enough of them to follow
    any oscillation coming from ``Im z`` or ``Im s``.
    """
    s, z = complex(s), complex(z)
    if not z.real > 0:
        raise DomainError("bessel_k requires Re z > 0")
    T = _cutoff(s, z)
    phase = abs(z.imag) * math.cosh(T) + abs(s.imag) * T
    panels = max(8, math.ceil(4 * T), math.ceil(2 * phase / math.pi))
    x, w = _gauss_legendre()
    edges = np.linspace(0.0, T, panels + 1)
    half = 0.5 * np.diff(edges)
    u = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    values = np.exp(-z * np.cosh(u)) * np.cosh(s * u)
    result = complex(np.sum(weights * values))
    if not np.isfinite(result):
        raise DomainError(f"Bessel integral did not converge for s={s}, z={z}")
    return result


# eigenfunction catalog --------------------------------------------------------

@dataclass(frozen=True)
class EigenCandidate:
    field: ScalarField
    claimed_eigenvalue: complex
    label: str


@dataclass(frozen=True)
class EigenReport:
    candidate: str
    points: int
    max_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return {"candidate": self.candidate, "points": self.points,
                "max_residual": self.max_residual, "pass": self.passed}


def _coords(p: JacobiPoint):
    if p.n != 1 or p.m != 1:
        raise DomainError("the eigenfunction catalog lives on H_1 x C")
    return p.X[0, 0], p.Y[0, 0], p.U[0, 0], p.V[0, 0]


def _field(label: str, fn, real: bool = False) -> ScalarField:
    return ScalarField(lambda p: fn(*_coords(p)), real=real, label=label)


def bessel_fourier(s: complex, a: float) -> ScalarField:
    """``y^(1/2) K_(s-1/2)(2 pi |a| y) e^(2 pi i a x)``."""
    if a == 0:
        raise DomainError("the Bessel family needs a != 0")
    return _field(
        f"bessel(s={s}, a={a})",
        lambda x, y, u, v: y ** 0.5 * bessel_k(s - 0.5, 2 * math.pi * abs(a) * y)
        * np.exp(2j * math.pi * a * x),
    )


def eigenfunction_catalog(s: complex, a: float) -> list[EigenCandidate]:
    """Known eigenfunctions of the Laplacian on ``H_1 x C`` (``A = B = 1``)."""
    s = complex(s) if complex(s).imag else float(np.real(s))
    lo = s * (s - 1)
    hi = s * (s + 1)
    real = isinstance(s, float)
    out = [EigenCandidate(bessel_fourier(s, a), lo, "y^1/2 K_(s-1/2)(2pi|a|y) e^(2pi i a x)")]
    out += [
        EigenCandidate(_field("y^s", lambda x, y, u, v: y ** s, real), lo, "y^s"),
        EigenCandidate(_field("y^s x", lambda x, y, u, v: y ** s * x, real), lo, "y^s x"),
        EigenCandidate(_field("y^s u", lambda x, y, u, v: y ** s * u, real), lo, "y^s u"),
        EigenCandidate(_field("y^s v", lambda x, y, u, v: y ** s * v, real), hi, "y^s v"),
        EigenCandidate(_field("y^s uv", lambda x, y, u, v: y ** s * u * v, real), hi, "y^s uv"),
        EigenCandidate(_field("y^s xv", lambda x, y, u, v: y ** s * x * v, real), hi, "y^s xv"),
    ]
    for name, fn in [
        ("x", lambda x, y, u, v: x),
        ("y", lambda x, y, u, v: y),
        ("u", lambda x, y, u, v: u),
        ("v", lambda x, y, u, v: v),
        ("xv", lambda x, y, u, v: x * v),
        ("uv", lambda x, y, u, v: u * v),
    ]:
        out.append(EigenCandidate(_field(name, fn, True), 0.0, name))
    return out


def check_eigenfunction(
    c: EigenCandidate,
    points,
    params: MetricParams = MetricParams(),
    tol: float = 1e-4,
    step: float | None = None,
) -> EigenReport:
    """Largest ``|Delta f - lambda f| / (1 + |lambda f|)`` over ``points``."""
    worst = 0.0
    lam = complex(c.claimed_eigenvalue)
    for p in points:
        lf = lam * complex(c.field(p))
        worst = max(worst, abs(laplacian_apply(c.field, p, params, step) - lf) / (1 + abs(lf)))
    return EigenReport(c.label, len(points), float(worst), bool(worst < tol))


# torus -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TorusBasisIndex:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        B = np.atleast_2d(np.asarray(self.B))
        if A.shape != B.shape:
            raise DomainError("index matrices must share a shape")
        if not (np.all(A == np.round(A)) and np.all(B == np.round(B))):
            raise DomainError("torus indices must be integral")
        object.__setattr__(self, "A", A.astype(np.int64))
        object.__setattr__(self, "B", B.astype(np.int64))

    @property
    def is_zero(self) -> bool:
        return not (self.A.any() or self.B.any())


@dataclass(frozen=True)
class QuadratureGrid:
    points: int = 32

    def __post_init__(self):
        if self.points < 2:
            raise DomainError("quadrature needs at least 2 points per direction")


def _omega(O) -> SiegelPoint:
    return O if isinstance(O, SiegelPoint) else SiegelPoint(O)


def torus_basis_fn(O, idx: TorusBasisIndex) -> ScalarField:
    """``E(Z) = exp(2 pi i (tr(A^T U) + tr((B - A X) Y^-1 V^T)))``.

    The returned field accepts a single ``m x n`` matrix or a stack of them.
    """
    O = _omega(O)
    if idx.A.shape[1] != O.n:
        raise DomainError("index shape does not match Omega")
    A = idx.A.astype(float)
    C = np.linalg.solve(O.Y.T, (idx.B - A @ O.X).T).T

    def fn(Z):
        Z = np.asarray(Z, dtype=complex)
        phase = np.einsum("kl,...kl->...", A, Z.real) + np.einsum("kl,...kl->...", C, Z.imag)
        return np.exp(2j * np.pi * phase)

    return ScalarField(fn, vectorized=True, label=f"E[A={idx.A.tolist()}, B={idx.B.tolist()}]")


def torus_laplacian_apply(O, f, Z, step: float = numdiff.SECOND_STEP) -> complex:
    """``tr(Y d/dZ (d/dZbar)^T) f`` at ``Z`` by central differences.

    Steps are absolute in ``(Re Z, Im Z)`` so that for exponentials the
    discretisation error is the same multiplicative factor everywhere.
    One Richardson step (``h`` and ``2h``) removes the ``h^2`` error term.
    """
    O = _omega(O)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    m, n = Z.shape
    k = m * n

    def g(t):
        return complex(f(Z + (t[:k] + 1j * t[k:]).reshape(m, n)))

    def trace_form(h):
        H = numdiff.hessian(g, np.zeros(2 * k), h)
        Huu, Huv, Hvu, Hvv = H[:k, :k], H[:k, k:], H[k:, :k], H[k:, k:]
        # d_z(p) d_zbar(q) = (d_u(p) - i d_v(p)) (d_u(q) + i d_v(q)) / 4
        mixed = 0.25 * (Huu + Hvv + 1j * (Huv - Hvu))
        return complex(np.einsum("ab,kbka->", O.Y, mixed.reshape(m, n, m, n)))

    return (4 * trace_form(step) - trace_form(2 * step)) / 3


def torus_eigenvalue(O, idx: TorusBasisIndex, samples: int = 50, rng_seed=0) -> tuple[complex, float]:
    """Measured eigenvalue of ``E_(A,B)`` and the spread of ``(Delta E)/E``.

    Returns the mean ratio and the largest deviation from it, relative to
    ``1 + |mean|``.
    """
    O = _omega(O)
    f = torus_basis_fn(O, idx)
    rng = np.random.default_rng(rng_seed)
    m = idx.A.shape[0]
    ratios = []
    for _ in range(samples):
        Z = rng.uniform(-2, 2, (m, O.n)) + 1j * rng.uniform(-2, 2, (m, O.n))
        ratios.append(torus_laplacian_apply(O, f, Z) / complex(f(Z)))
    ratios = np.array(ratios)
    mean = complex(np.mean(ratios))
    return mean, float(np.max(np.abs(ratios - mean)) / (1 + abs(mean)))


def _grid_chunks(O: SiegelPoint, m: int, grid: QuadratureGrid, chunk: int = 1 << 16):
    """Yield stacks of points ``a + b Omega`` with lattice coordinates on the grid."""
    n = O.n
    d = 2 * m * n
    N = grid.points
    total = N ** d
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total))
        digits = np.stack(np.unravel_index(flat, (N,) * d), axis=-1) / N
        a = digits[:, : m * n].reshape(-1, m, n)
        b = digits[:, m * n:].reshape(-1, m, n)
        yield a + b @ O.Z


def _evaluate(f, Zs: np.ndarray) -> np.ndarray:
    if getattr(f, "vectorized", False):
        return np.asarray(f(Zs), dtype=complex)
    return np.array([complex(f(Z)) for Z in Zs])


def torus_inner_product(O, f, g, grid: QuadratureGrid = QuadratureGrid(), m: int = 1) -> complex:
    """``(f, g) = int f conj(g) dv`` over one period box, normalised to volume 1.

    The rectangle rule in lattice coordinates is used; it is exact for
    trigonometric polynomials whose frequencies are below the grid size.
    """
    O = _omega(O)
    total = 0j
    count = 0
    for Zs in _grid_chunks(O, m, grid):
        total += np.sum(_evaluate(f, Zs) * np.conj(_evaluate(g, Zs)))
        count += len(Zs)
    return complex(total / count)


def torus_gram(O, indices, grid: QuadratureGrid = QuadratureGrid()) -> np.ndarray:
    """Gram matrix of ``E_(A,B)`` over ``indices`` in one pass over the grid."""
    O = _omega(O)
    indices = list(indices)
    m = indices[0].A.shape[0]
    fields = [torus_basis_fn(O, i) for i in indices]
    G = np.zeros((len(fields), len(fields)), dtype=complex)
    count = 0
    for Zs in _grid_chunks(O, m, grid, chunk=1 << 14):
        F = np.array([f(Zs) for f in fields])
        G += F @ F.conj().T
        count += len(Zs)
    return G / count


def index_range(m: int, n: int, bound: int = 2):
    """All ``TorusBasisIndex`` with entries in ``[-bound, bound]``."""
    r = np.arange(-bound, bound + 1)
    grids = np.meshgrid(*([r] * (2 * m * n)), indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=-1)
    return [TorusBasisIndex(row[: m * n].reshape(m, n), row[m * n:].reshape(m, n)) for row in flat]


def riemann_conditions(O, tol: float = 1e-10) -> dict:
    """Check the Riemann conditions for the period matrix ``(E, Omega)``.

    Non-symmetric input is accepted so the first residual can be observed.
    """
    O = np.atleast_2d(np.asarray(O.Z if isinstance(O, SiegelPoint) else O, dtype=complex))
    n = O.shape[0]
    P = np.hstack([np.eye(n), O])
    J = standard_j(n)
    rc1 = P @ J @ P.T
    herm = 1j * (P @ J @ P.conj().T)
    herm = 0.5 * (herm + herm.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    residual = float(np.max(np.abs(rc1)))
    return {"rc1_residual": residual, "rc2_min_eigenvalue": min_eig,
            "ok": bool(residual < tol and min_eig > 0)}


# invariance ---------------------------------------------------------------

def modular_jacobi_words(n: int, m: int, samples: int = 50, word_length: int = 4, rng_seed=0):
    """Random elements of ``Sp(n, Z)`` combined with integral Heisenberg parts."""
    rng = np.random.default_rng(rng_seed)
    out = []
    for M in modular_words(n, word_length, samples, int(rng.integers(2 ** 31))):
        lam = rng.integers(-2, 3, (m, n)).astype(float)
        mu = rng.integers(-2, 3, (m, n)).astype(float)
        out.append(JacobiGroupElement(SymplecticMatrix(M.astype(float)),
                                      HeisenbergElement(lam, mu, -mu @ lam.T)))
    return out


def invariance_defect(f, points, elements) -> float:
    """Largest ``|f(g.p) - f(p)|`` over the given points and group elements."""
    worst = 0.0
    for p in points:
        fp = complex(f(p))
        for g in elements:
            worst = max(worst, abs(complex(f(act_jacobi(g, p))) - fp))
    return worst
