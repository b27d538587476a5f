"""Invariant metrics, Laplacians and curvature on the Siegel-Jacobi space.

All matrix realizations use one real chart, ordered as

    x_{ij} (i <= j), y_{ij} (i <= j), u_{kl} (row-major), v_{kl} (row-major)

so a space of degree ``n`` and index ``m`` has ``N = n(n+1) + 2mn`` real
coordinates.  The basis tangent of an off-diagonal ``x_{ij}`` moves both the
``(i, j)`` and ``(j, i)`` entries of ``Z``.

The metric with parameters ``A, B > 0`` is

    A tr(Y^-1 dZ Y^-1 dZbar)
      + B { tr(Y^-1 V^T V Y^-1 dZ Y^-1 dZbar) + tr(Y^-1 dW^T dWbar)
            - tr(V Y^-1 dZ Y^-1 dWbar^T) - tr(V Y^-1 dZbar Y^-1 dW^T) }

and its Laplacian is written as a sum of five trace terms in the matrix
Wirtinger operators ``d/dZ`` (weights ``(1 + delta_ij)/2``) and ``d/dW``
(an ``n x m`` matrix whose ``(l, k)`` entry is ``d/dw_{kl}``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from . import numdiff
from .group import (
    DomainError,
    JacobiGroupElement,
    JacobiPoint,
    SiegelPoint,
    TangentVector,
    act_jacobi,
    tangent_map,
)


class NumericalError(ArithmeticError):
    """A numerical consistency check failed."""


@dataclass(frozen=True)
class MetricParams:
    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise DomainError(f"metric parameters must be positive, got A={self.A}, B={self.B}")


@dataclass(frozen=True)
class Chart:
    n: int
    m: int

    @property
    def dim(self) -> int:
        return self.n * (self.n + 1) + 2 * self.m * self.n

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i, self.n)]

    @cached_property
    def labels(self) -> list[str]:
        sym = [f"{i + 1}{j + 1}" for i, j in self.pairs]
        rect = [f"{k + 1}{l + 1}" for k in range(self.m) for l in range(self.n)]
        return (
            [f"x{s}" for s in sym] + [f"y{s}" for s in sym]
            + [f"u{s}" for s in rect] + [f"v{s}" for s in rect]
        )

    def _sym_index(self, i: int, j: int) -> int:
        i, j = min(i, j), max(i, j)
        return i * self.n - i * (i - 1) // 2 + (j - i)

    def ix(self, i: int, j: int) -> int:
        return self._sym_index(i, j)

    def iy(self, i: int, j: int) -> int:
        return self.n * (self.n + 1) // 2 + self._sym_index(i, j)

    def iu(self, k: int, l: int) -> int:
        return self.n * (self.n + 1) + k * self.n + l

    def iv(self, k: int, l: int) -> int:
        return self.n * (self.n + 1) + self.m * self.n + k * self.n + l

    def _split(self, vec):
        s = self.n * (self.n + 1) // 2
        r = self.m * self.n
        return vec[:s], vec[s:2 * s], vec[2 * s:2 * s + r], vec[2 * s + r:]

    def _sym_matrix(self, entries) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=np.result_type(entries, float))
        for t, (i, j) in enumerate(self.pairs):
            out[i, j] = out[j, i] = entries[t]
        return out

    def vector(self, p: JacobiPoint) -> np.ndarray:
        """Chart coordinates of a point."""
        iu = np.triu_indices(self.n)
        return np.concatenate([p.X[iu], p.Y[iu], p.U.ravel(), p.V.ravel()])

    def point(self, vec) -> JacobiPoint:
        x, y, u, v = self._split(np.asarray(vec, dtype=float))
        Z = self._sym_matrix(x) + 1j * self._sym_matrix(y)
        W = (u + 1j * v).reshape(self.m, self.n)
        return JacobiPoint(Z, W)

    def tangent_vector(self, t: TangentVector) -> np.ndarray:
        """Chart components of a tangent vector."""
        iu = np.triu_indices(self.n)
        return np.concatenate([t.dZ.real[iu], t.dZ.imag[iu], t.dW.real.ravel(), t.dW.imag.ravel()])

    def tangent(self, vec) -> TangentVector:
        x, y, u, v = self._split(np.asarray(vec, dtype=float))
        return TangentVector(
            self._sym_matrix(x) + 1j * self._sym_matrix(y),
            (u + 1j * v).reshape(self.m, self.n),
        )

    def basis_arrays(self):
        """Basis tangents as stacked arrays ``(dZ[N, n, n], dW[N, m, n])``."""
        N = self.dim
        dZ = np.zeros((N, self.n, self.n), dtype=complex)
        dW = np.zeros((N, self.m, self.n), dtype=complex)
        for i, j in self.pairs:
            dZ[self.ix(i, j), i, j] = dZ[self.ix(i, j), j, i] = 1.0
            dZ[self.iy(i, j), i, j] = dZ[self.iy(i, j), j, i] = 1j
        for k in range(self.m):
            for l in range(self.n):
                dW[self.iu(k, l), k, l] = 1.0
                dW[self.iv(k, l), k, l] = 1j
        return dZ, dW


def chart_for(p: JacobiPoint) -> Chart:
    return Chart(p.n, p.m)


@dataclass(frozen=True, eq=False)
class MetricTensor:
    g: np.ndarray
    chart: Chart
    basepoint: JacobiPoint

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        if np.max(np.abs(g - g.T)) > 1e-10 * (1 + np.max(np.abs(g))):
            raise NumericalError("metric tensor is not symmetric")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise NumericalError("metric tensor is not positive definite") from None
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "g", g)

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ self.g @ v)


@dataclass(frozen=True)
class ScalarField:
    """A function on points, with a flag telling whether it is real valued."""

    fn: Callable
    real: bool = False
    vectorized: bool = False
    label: str = ""

    def __call__(self, p):
        return self.fn(p)


# metric ---------------------------------------------------------------------

def _trace(a: np.ndarray) -> np.ndarray:
    return np.trace(a, axis1=-2, axis2=-1)


def metric_terms(p: JacobiPoint, dZ, dW) -> tuple:
    """The four trace terms ``(a), (b), (c), (d)`` of the invariant metric.

    ``dZ`` and ``dW`` may carry a leading batch axis.
    """
    Yinv = np.linalg.inv(p.Y)
    V = p.V
    dZ = np.asarray(dZ, dtype=complex)
    dW = np.asarray(dW, dtype=complex)
    dZb, dWb = dZ.conj(), dW.conj()
    dWt = np.swapaxes(dW, -1, -2)
    dWbt = np.swapaxes(dWb, -1, -2)
    YdZY = Yinv @ dZ @ Yinv
    a = _trace(YdZY @ dZb)
    b = _trace(Yinv @ V.T @ V @ YdZY @ dZb)
    c = _trace(Yinv @ dWt @ dWb)
    d = -_trace(V @ YdZY @ dWbt) - _trace(V @ Yinv @ dZb @ Yinv @ dWt)
    return a, b, c, d


def _quadratic(p, dZ, dW, params: MetricParams) -> np.ndarray:
    a, b, c, d = metric_terms(p, dZ, dW)
    q = params.A * a + params.B * (b + c + d)
    if np.max(np.abs(q.imag)) > 1e-10 * (1 + np.max(np.abs(q.real))):
        raise NumericalError("metric quadratic form has an imaginary residue")
    return q.real


def metric_quadratic_form(p: JacobiPoint, v: TangentVector, params: MetricParams = MetricParams()) -> float:
    """``ds^2`` evaluated on one tangent vector."""
    return float(_quadratic(p, v.dZ, v.dW, params))


def siegel_quadratic_form(Z: SiegelPoint, dZ) -> float:
    """Siegel's symplectic metric ``tr(Y^-1 dZ Y^-1 dZbar)`` on ``H_n``."""
    Yinv = np.linalg.inv(Z.Y)
    dZ = np.asarray(dZ, dtype=complex)
    return float(np.trace(Yinv @ dZ @ Yinv @ dZ.conj()).real)


def metric_matrix(p: JacobiPoint, params: MetricParams = MetricParams()) -> np.ndarray:
    """Chart matrix of the metric, assembled by polarization."""
    chart = chart_for(p)
    N = chart.dim
    bZ, bW = chart.basis_arrays()
    i, j = np.triu_indices(N)
    plus = _quadratic(p, bZ[i] + bZ[j], bW[i] + bW[j], params)
    minus = _quadratic(p, bZ[i] - bZ[j], bW[i] - bW[j], params)
    g = np.zeros((N, N))
    g[i, j] = 0.25 * (plus - minus)
    g[j, i] = g[i, j]
    return g


def metric_tensor(p: JacobiPoint, params: MetricParams = MetricParams()) -> MetricTensor:
    return MetricTensor(metric_matrix(p, params), chart_for(p), p)


def tangent_jacobian(g: JacobiGroupElement, p: JacobiPoint) -> np.ndarray:
    """Chart matrix of the differential of ``act_jacobi(g, .)`` at ``p``."""
    chart = chart_for(p)
    cols = [chart.tangent_vector(tangent_map(g, p, chart.tangent(e))) for e in np.eye(chart.dim)]
    return np.array(cols).T


def pullback_metric(g_elem: JacobiGroupElement, p: JacobiPoint, params: MetricParams = MetricParams()) -> MetricTensor:
    J = tangent_jacobian(g_elem, p)
    gs = metric_matrix(act_jacobi(g_elem, p), params)
    return MetricTensor(J.T @ gs @ J, chart_for(p), p)


def invariance_deviation(g_elem: JacobiGroupElement, p: JacobiPoint, params: MetricParams = MetricParams()) -> float:
    """Max entrywise deviation of the pullback, relative to the largest entry."""
    g0 = metric_matrix(p, params)
    g1 = pullback_metric(g_elem, p, params).g
    return float(np.max(np.abs(g1 - g0)) / np.max(np.abs(g0)))


def volume_density(p: JacobiPoint, n: int | None = None, m: int | None = None) -> float:
    """The invariant density ``det(Y)^-(n+m+1)``."""
    n = p.n if n is None else n
    m = p.m if m is None else m
    return float(np.linalg.det(p.Y) ** (-(n + m + 1)))


def volume_ratio(p: JacobiPoint, params: MetricParams = MetricParams()) -> float:
    """``sqrt(det g) / det(Y)^-(n+m+1)``; constant on the whole space."""
    sign, logdet = np.linalg.slogdet(metric_matrix(p, params))
    return float(np.exp(0.5 * logdet + (p.n + p.m + 1) * np.linalg.slogdet(p.Y)[1]))


# Wirtinger calculus ---------------------------------------------------------

def wirtinger_covectors(chart: Chart, kind: str) -> np.ndarray:
    """Complex covectors realizing a matrix Wirtinger operator in the chart.

    ``kind`` is one of ``Z, Zbar, W, Wbar``.  The result has shape
    ``(n, n, N)`` for ``Z``-type and ``(n, m, N)`` for ``W``-type kinds.
    """
    n, m, N = chart.n, chart.m, chart.dim
    sign = {"Z": -1, "Zbar": 1, "W": -1, "Wbar": 1}[kind]
    if kind in ("Z", "Zbar"):
        c = np.zeros((n, n, N), dtype=complex)
        for i in range(n):
            for j in range(n):
                w = 1.0 if i == j else 0.5
                c[i, j, chart.ix(i, j)] = 0.5 * w
                c[i, j, chart.iy(i, j)] = 0.5j * sign * w
        return c
    c = np.zeros((n, m, N), dtype=complex)
    for k in range(m):
        for l in range(n):
            c[l, k, chart.iu(k, l)] = 0.5
            c[l, k, chart.iv(k, l)] = 0.5j * sign
    return c


def _point_fn(f, chart: Chart):
    return lambda vec: f(chart.point(vec))


def wirtinger_apply(f, p: JacobiPoint, order, step: float | None = None) -> np.ndarray:
    """First or mixed second Wirtinger derivatives of ``f`` at ``p``.

    ``order`` is a single kind (``"Z"``, ``"Zbar"``, ``"W"``, ``"Wbar"``)
    giving a matrix in the operator's layout, or a pair of kinds giving the
    4-index array ``out[i, j, k, l] = D1_ij D2_kl f``.
    """
    chart = chart_for(p)
    x = chart.vector(p)
    fv = _point_fn(f, chart)
    if isinstance(order, str):
        grad = numdiff.gradient(fv, x, step or numdiff.FIRST_STEP)
        return np.einsum("ijx,x->ij", wirtinger_covectors(chart, order), grad)
    k1, k2 = order
    H = numdiff.hessian(fv, x, step or numdiff.SECOND_STEP)
    return np.einsum(
        "ijx,kly,xy->ijkl", wirtinger_covectors(chart, k1), wirtinger_covectors(chart, k2), H
    )


def _laplacian_terms(Y, V, second, printed: bool = False):
    """The five trace terms, given ``second(kind1, kind2)`` mixed derivatives.

    Returns ``(alpha, beta, gamma, delta, epsilon)`` without the factor 4.
    ``gamma`` is the ``W``-``W`` part of ``tr(Y (Y Dbar)^T D)`` with the
    symmetrized operator ``D = d/dZ + sym(d/dW V Y^-1)``:

        gamma = (tr(V Y^-1 V^T (Y d/dWbar)^T d/dW) + tr(V d/dWbar V d/dW)) / 2

    With ``printed=True`` only the first trace is kept (unhalved); the two
    agree when ``n = 1`` but the short form is not the Laplace-Beltrami
    operator for ``n >= 2``.
    """
    S = V @ np.linalg.inv(Y) @ V.T
    wbw = second("Wbar", "W")
    alpha = np.einsum("ab,cd,dbca...->...", Y, Y, second("Zbar", "Z"))
    beta = np.einsum("ab,bkak...->...", Y, second("W", "Wbar"))
    gamma = np.einsum("jk,cd,dkcj...->...", S, Y, wbw)
    if not printed:
        gamma = 0.5 * (gamma + np.einsum("ka,jd,dkaj...->...", V, V, wbw))
    delta = np.einsum("jb,cd,dbcj...->...", V, Y, second("Zbar", "W"))
    epsilon = np.einsum("ka,cd,dkca...->...", V, Y, second("Wbar", "Z"))
    return alpha, beta, gamma, delta, epsilon


def _combine(terms, params: MetricParams):
    alpha, beta, gamma, delta, epsilon = terms
    return 4.0 / params.A * (alpha + gamma + delta + epsilon) + 4.0 / params.B * beta


def laplacian_coefficients(p: JacobiPoint, params: MetricParams = MetricParams(), printed: bool = False) -> np.ndarray:
    """Complex matrix ``K`` with ``Laplacian f = sum_ij K_ij d_i d_j f``."""
    chart = chart_for(p)
    cov = {k: wirtinger_covectors(chart, k) for k in ("Z", "Zbar", "W", "Wbar")}

    def second(k1, k2):
        return np.einsum("ijx,kly->ijklxy", cov[k1], cov[k2])

    return _combine(_laplacian_terms(p.Y, p.V, second, printed), params)


def laplacian_apply(
    f,
    p: JacobiPoint,
    params: MetricParams = MetricParams(),
    step: float | None = None,
    printed: bool = False,
) -> complex:
    """The invariant Laplacian applied to ``f`` at ``p``.

    Mixed second Wirtinger derivatives come from one central-difference
    Hessian in the chart.  ``printed=True`` selects the short ``gamma``
    term (see ``_laplacian_terms``).
    """
    chart = chart_for(p)
    x = chart.vector(p)
    H = numdiff.hessian(_point_fn(f, chart), x, step or numdiff.SECOND_STEP)
    cov = {k: wirtinger_covectors(chart, k) for k in ("Z", "Zbar", "W", "Wbar")}

    def second(k1, k2):
        return np.einsum("ijx,kly,xy->ijkl", cov[k1], cov[k2], H)

    value = complex(_combine(_laplacian_terms(p.Y, p.V, second, printed), params))
    if getattr(f, "real", False) and abs(value.imag) > 1e-8 * (1 + abs(value.real)):
        raise NumericalError(f"Laplacian of a real field has imaginary part {value.imag:.3e}")
    return value


def maass_laplacian_apply(f, Z: SiegelPoint, step: float | None = None) -> complex:
    """Maass's Laplacian ``4 tr(Y (Y d/dZbar)^T d/dZ)`` for functions on ``H_n``."""
    n = Z.n
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    s = len(pairs)

    def from_vec(vec):
        X = np.zeros((n, n))
        Y = np.zeros((n, n))
        for t, (i, j) in enumerate(pairs):
            X[i, j] = X[j, i] = vec[t]
            Y[i, j] = Y[j, i] = vec[s + t]
        return SiegelPoint(X + 1j * Y)

    x = np.concatenate([Z.X[np.triu_indices(n)], Z.Y[np.triu_indices(n)]])
    H = numdiff.hessian(lambda v: f(from_vec(v)), x, step or numdiff.SECOND_STEP)
    d = np.zeros((n, n, 2 * s), dtype=complex)
    db = np.zeros((n, n, 2 * s), dtype=complex)
    for t, (i, j) in enumerate(pairs):
        w = 0.5 if i == j else 0.25
        for a, b in {(i, j), (j, i)}:
            d[a, b, t], d[a, b, s + t] = w, -1j * w
            db[a, b, t], db[a, b, s + t] = w, 1j * w
    Y = Z.Y
    T = np.einsum("dbx,cay,xy->dbca", db, d, H)
    return complex(4 * np.einsum("ab,cd,dbca->", Y, Y, T))


def laplace_beltrami_apply(
    f,
    p: JacobiPoint,
    params: MetricParams = MetricParams(),
    metric_field: Callable | None = None,
) -> float:
    """Coordinate Laplace-Beltrami operator of the chart metric.

    ``(det g)^-1/2 d_i ((det g)^1/2 g^ij d_j f)``, with every derivative
    taken by central differences.  ``metric_field`` maps chart vectors to
    metric matrices; by default it is the invariant metric itself.
    """
    chart = chart_for(p)
    x = chart.vector(p)
    if metric_field is None:
        metric_field = lambda vec: metric_matrix(chart.point(vec), params)  # noqa: E731

    def densitized(vec):
        g = metric_field(vec)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise NumericalError("metric is not positive definite") from None
        return np.sqrt(np.linalg.det(g)) * np.linalg.inv(g)

    fv = _point_fn(f, chart)
    f0 = fv(x)
    grad = numdiff.gradient(fv, x)
    H = numdiff.hessian(fv, x, f0=f0)
    dM = numdiff.gradient(densitized, x)
    M0 = densitized(x)
    g0 = metric_field(x)
    div = np.einsum("iij->j", dM)
    value = (np.sum(M0 * H) + div @ grad) / np.sqrt(np.linalg.det(g0))
    if np.iscomplexobj(value):
        return complex(value)
    return float(value)


# curvature ------------------------------------------------------------------

def scalar_from_derivatives(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> float:
    """Scalar curvature from ``g``, ``dg[k] = d_k g`` and ``ddg[k, l] = d_k d_l g``."""
    gi = np.linalg.inv(g)
    gam1 = 0.5 * (np.einsum("ijm->mij", dg) + np.einsum("jim->mij", dg) - dg)
    gam = np.einsum("km,mij->kij", gi, gam1)
    dgam1 = 0.5 * (
        np.einsum("lijm->lmij", ddg) + np.einsum("ljim->lmij", ddg) - ddg
    )
    dgi = -np.einsum("ka,lab,bm->lkm", gi, dg, gi)
    dgam = np.einsum("lkm,mij->lkij", dgi, gam1) + np.einsum("km,lmij->lkij", gi, dgam1)
    ric = (
        np.einsum("kkij->ij", dgam)
        - np.einsum("jkik->ij", dgam)
        + np.einsum("kkl,lij->ij", gam, gam)
        - np.einsum("kjl,lik->ij", gam, gam)
    )
    return float(np.einsum("ij,ij->", gi, ric))


def _curvature_at_step(field, x, h1, h2) -> float:
    g = field(x)
    dg = numdiff.gradient(field, x, h1)
    ddg = numdiff.hessian(field, x, h2, f0=g)
    return scalar_from_derivatives(g, dg, ddg)


def scalar_curvature(
    p: JacobiPoint,
    params: MetricParams = MetricParams(),
    step: float | None = None,
    richardson: bool = True,
) -> float:
    """Scalar curvature of the invariant metric by finite differences.

    Christoffel symbols and their derivatives come from central differences
    of the metric field; one Richardson level cancels the ``h^2`` error.
    """
    chart = chart_for(p)
    x = chart.vector(p)
    field = lambda vec: metric_matrix(chart.point(vec), params)  # noqa: E731
    h2 = step or numdiff.SECOND_STEP
    h1 = h2 * numdiff.FIRST_STEP / numdiff.SECOND_STEP
    r = _curvature_at_step(field, x, h1, h2)
    if not np.isfinite(r):
        raise NumericalError("curvature evaluation produced a non-finite value")
    if not richardson:
        return r
    r_double = _curvature_at_step(field, x, 2 * h1, 2 * h2)
    # error ~ c h^2: combine the steps h and 2h
    return (4 * r - r_double) / 3


# special cases --------------------------------------------------------------

def berndt_metric(p: JacobiPoint) -> np.ndarray:
    """Berndt's metric on ``H_1 x C`` in the chart ``(x, y, u, v)``."""
    if (p.n, p.m) != (1, 1):
        raise DomainError("Berndt's metric lives on n = m = 1")
    y, v = p.Y[0, 0], p.V[0, 0]
    a = (y + v * v) / y**3
    c = -v / y**2
    return np.array([
        [a, 0, c, 0],
        [0, a, 0, c],
        [c, 0, 1 / y, 0],
        [0, c, 0, 1 / y],
    ])


def berndt_laplacian_apply(f, p: JacobiPoint, step: float | None = None) -> complex:
    """``y^2 (f_xx + f_yy) + (y + v^2)(f_uu + f_vv) + 2yv (f_xu + f_yv)``."""
    if (p.n, p.m) != (1, 1):
        raise DomainError("Berndt's Laplacian lives on n = m = 1")
    y, v = p.Y[0, 0], p.V[0, 0]
    x0 = np.array([p.X[0, 0], y, p.U[0, 0], v])

    def fv(c):
        return f(JacobiPoint([[c[0] + 1j * c[1]]], [[c[2] + 1j * c[3]]]))

    H = numdiff.hessian(fv, x0, step or numdiff.SECOND_STEP)
    return complex(
        y * y * (H[0, 0] + H[1, 1]) + (y + v * v) * (H[2, 2] + H[3, 3]) + 2 * y * v * (H[0, 2] + H[1, 3])
    )
