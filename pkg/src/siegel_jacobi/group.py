"""Symplectic, Heisenberg and Jacobi groups and their actions.

Points of the Siegel-Jacobi space are pairs ``(Z, W)`` with ``Z`` in the
Siegel upper half space of degree ``n`` and ``W`` a complex ``m x n``
matrix.  The Jacobi group ``Sp(n, R) x H(n, m)`` acts by

    (M, (lam, mu; kappa)) . (Z, W) = (M.Z, (W + lam Z + mu) (CZ + D)^-1)

with ``M.Z = (AZ + B)(CZ + D)^-1``.  Everything here is dense numpy
linear algebra; values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TAU_SYM = 1e-10
COND_LIMIT = 1e12


class DomainError(ValueError):
    """Raised when an input leaves the domain of an operation."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _scale(a: np.ndarray) -> float:
    return 1.0 + (float(np.max(np.abs(a))) if a.size else 0.0)


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle of a square matrix onto the lower one."""
    a = np.array(a)
    iu = np.triu_indices(a.shape[0], 1)
    a[(iu[1], iu[0])] = a[iu]
    return a


def standard_j(n: int) -> np.ndarray:
    """The block matrix ``[[0, E], [-E, 0]]`` defining ``Sp(n, R)``."""
    e = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, e], [-e, z]])


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """Symmetric complex matrix with positive definite imaginary part."""

    Z: np.ndarray

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=complex))
        if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
            raise DomainError(f"Z must be square, got shape {Z.shape}")
        if np.max(np.abs(Z - Z.T)) > TAU_SYM * _scale(Z):
            raise DomainError("Z is not symmetric")
        Z = symmetrize(Z)
        try:
            np.linalg.cholesky(Z.imag)
        except np.linalg.LinAlgError:
            raise DomainError("Im Z is not positive definite") from None
        object.__setattr__(self, "Z", _frozen(Z, complex))

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def X(self) -> np.ndarray:
        return self.Z.real

    @property
    def Y(self) -> np.ndarray:
        return self.Z.imag


@dataclass(frozen=True, eq=False)
class JacobiPoint:
    """A point ``(Z, W)`` of the Siegel-Jacobi space."""

    Z: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        Z = self.Z.Z if isinstance(self.Z, SiegelPoint) else SiegelPoint(self.Z).Z
        W = np.atleast_2d(np.asarray(self.W, dtype=complex))
        if W.ndim != 2 or W.shape[1] != Z.shape[0]:
            raise DomainError(f"W must be m x {Z.shape[0]}, got shape {W.shape}")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "W", _frozen(W, complex))

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def siegel(self) -> SiegelPoint:
        return SiegelPoint(self.Z)

    X = property(lambda self: self.Z.real)
    Y = property(lambda self: self.Z.imag)
    U = property(lambda self: self.W.real)
    V = property(lambda self: self.W.imag)


@dataclass(frozen=True, eq=False)
class TangentVector:
    dZ: np.ndarray
    dW: np.ndarray

    def __post_init__(self):
        dZ = np.atleast_2d(np.asarray(self.dZ, dtype=complex))
        if np.max(np.abs(dZ - dZ.T), initial=0.0) > TAU_SYM * _scale(dZ):
            raise DomainError("dZ is not symmetric")
        object.__setattr__(self, "dZ", _frozen(symmetrize(dZ), complex))
        object.__setattr__(self, "dW", _frozen(np.atleast_2d(self.dW), complex))

    def __add__(self, other: TangentVector) -> TangentVector:
        return TangentVector(self.dZ + other.dZ, self.dW + other.dW)

    def __rmul__(self, alpha) -> TangentVector:
        return TangentVector(alpha * self.dZ, alpha * self.dW)


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """Real ``2n x 2n`` matrix ``M`` with ``M^T J M = J``."""

    M: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise DomainError(f"symplectic matrix must be 2n x 2n, got {M.shape}")
        J = standard_j(M.shape[0] // 2)
        if np.max(np.abs(M.T @ J @ M - J)) > TAU_SYM * _scale(M) ** 2:
            raise DomainError("matrix is not symplectic")
        object.__setattr__(self, "M", _frozen(M, float))

    @property
    def n(self) -> int:
        return self.M.shape[0] // 2

    @property
    def blocks(self):
        n = self.n
        M = self.M
        return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]

    def inverse(self) -> SymplecticMatrix:
        A, B, C, D = self.blocks
        return SymplecticMatrix(np.block([[D.T, -B.T], [-C.T, A.T]]))


@dataclass(frozen=True, eq=False)
class HeisenbergElement:
    """Triple ``(lam, mu; kappa)`` with ``kappa + mu lam^T`` symmetric."""

    lam: np.ndarray
    mu: np.ndarray
    kappa: np.ndarray

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        mu = np.atleast_2d(np.asarray(self.mu, dtype=float))
        kappa = np.atleast_2d(np.asarray(self.kappa, dtype=float))
        m, n = lam.shape
        if mu.shape != (m, n) or kappa.shape != (m, m):
            raise DomainError("inconsistent Heisenberg element shapes")
        s = kappa + mu @ lam.T
        if np.max(np.abs(s - s.T)) > TAU_SYM * _scale(s):
            raise DomainError("kappa + mu lam^T is not symmetric")
        object.__setattr__(self, "lam", _frozen(lam, float))
        object.__setattr__(self, "mu", _frozen(mu, float))
        object.__setattr__(self, "kappa", _frozen(kappa, float))

    @property
    def shape(self) -> tuple[int, int]:
        return self.lam.shape

    @classmethod
    def zero(cls, n: int, m: int) -> HeisenbergElement:
        return cls(np.zeros((m, n)), np.zeros((m, n)), np.zeros((m, m)))


@dataclass(frozen=True, eq=False)
class JacobiGroupElement:
    M: SymplecticMatrix
    h: HeisenbergElement

    def __post_init__(self):
        M = self.M if isinstance(self.M, SymplecticMatrix) else SymplecticMatrix(self.M)
        object.__setattr__(self, "M", M)
        if self.h.shape[1] != M.n:
            raise DomainError("Heisenberg part does not match the symplectic degree")

    @property
    def n(self) -> int:
        return self.M.n

    @property
    def m(self) -> int:
        return self.h.shape[0]


def heisenberg_mul(h1: HeisenbergElement, h2: HeisenbergElement) -> HeisenbergElement:
    if h1.shape != h2.shape:
        raise DomainError(f"shape mismatch {h1.shape} vs {h2.shape}")
    return HeisenbergElement(
        h1.lam + h2.lam,
        h1.mu + h2.mu,
        h1.kappa + h2.kappa + h1.lam @ h2.mu.T - h1.mu @ h2.lam.T,
    )


def jacobi_mul(g1: JacobiGroupElement, g2: JacobiGroupElement) -> JacobiGroupElement:
    """Product in the semidirect product; the symplectic part is ``M1 M2``.

    The Heisenberg part of ``g1`` is first moved through ``M2``:
    ``(lam~, mu~) = (lam1, mu1) M2``.
    """
    if (g1.n, g1.m) != (g2.n, g2.m):
        raise DomainError("elements belong to different Jacobi groups")
    n = g1.n
    lm = np.hstack([g1.h.lam, g1.h.mu]) @ g2.M.M
    lam_t, mu_t = lm[:, :n], lm[:, n:]
    h = HeisenbergElement(
        lam_t + g2.h.lam,
        mu_t + g2.h.mu,
        g1.h.kappa + g2.h.kappa + lam_t @ g2.h.mu.T - mu_t @ g2.h.lam.T,
    )
    return JacobiGroupElement(SymplecticMatrix(g1.M.M @ g2.M.M), h)


def jacobi_identity(n: int, m: int) -> JacobiGroupElement:
    return JacobiGroupElement(SymplecticMatrix(np.eye(2 * n)), HeisenbergElement.zero(n, m))


def jacobi_inverse(g: JacobiGroupElement) -> JacobiGroupElement:
    Minv = g.M.inverse()
    n = g.n
    lm = np.hstack([g.h.lam, g.h.mu]) @ Minv.M
    lam_t, mu_t = lm[:, :n], lm[:, n:]
    kappa = -g.h.kappa + lam_t @ mu_t.T - mu_t @ lam_t.T
    return JacobiGroupElement(Minv, HeisenbergElement(-lam_t, -mu_t, kappa))


def _denominator(M: SymplecticMatrix, Z: np.ndarray) -> np.ndarray:
    """Return ``CZ + D`` after checking its conditioning."""
    _, _, C, D = M.blocks
    Q = C @ Z + D
    if np.linalg.cond(Q) > COND_LIMIT:
        raise DomainError("CZ + D is too ill-conditioned")
    return Q


def act_siegel(M: SymplecticMatrix, Z: SiegelPoint) -> SiegelPoint:
    if not isinstance(M, SymplecticMatrix):
        M = SymplecticMatrix(M)
    Zm = Z.Z if isinstance(Z, SiegelPoint) else np.asarray(Z, dtype=complex)
    A, B, _, _ = M.blocks
    Q = _denominator(M, Zm)
    # (AZ + B) Q^-1 computed as a solve on the transposed system
    Zs = np.linalg.solve(Q.T, (A @ Zm + B).T).T
    return SiegelPoint(0.5 * (Zs + Zs.T))


def act_jacobi(g: JacobiGroupElement, p: JacobiPoint) -> JacobiPoint:
    Z, W = p.Z, p.W
    A, B, _, _ = g.M.blocks
    Q = _denominator(g.M, Z)
    Zs = np.linalg.solve(Q.T, (A @ Z + B).T).T
    Ws = np.linalg.solve(Q.T, (W + g.h.lam @ Z + g.h.mu).T).T
    return JacobiPoint(0.5 * (Zs + Zs.T), Ws)


def imaginary_part_transform(M: SymplecticMatrix, Z: SiegelPoint) -> np.ndarray:
    """``Im(M.Z) = (C Zbar + D)^-T Y (CZ + D)^-1``."""
    Zm = Z.Z if isinstance(Z, SiegelPoint) else np.asarray(Z)
    Qinv = np.linalg.inv(_denominator(M, Zm))
    return (Qinv.conj().T @ Zm.imag @ Qinv).real


def tangent_map(g: JacobiGroupElement, p: JacobiPoint, v: TangentVector) -> TangentVector:
    """Differential of ``act_jacobi(g, .)`` at ``p`` applied to ``v``."""
    _, _, C, _ = g.M.blocks
    Qinv = np.linalg.inv(_denominator(g.M, p.Z))
    dZs = Qinv.T @ v.dZ @ Qinv
    Ws = (p.W + g.h.lam @ p.Z + g.h.mu) @ Qinv
    dWs = v.dW @ Qinv + (g.h.lam - Ws @ C) @ v.dZ @ Qinv
    return TangentVector(0.5 * (dZs + dZs.T), dWs)


# generators ----------------------------------------------------------------

def translation(b, lam, mu, kappa) -> JacobiGroupElement:
    """The element ``t(b; lam, mu, kappa)``."""
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if np.max(np.abs(b - b.T)) > TAU_SYM * _scale(b):
        raise DomainError("b must be symmetric")
    n = b.shape[0]
    M = np.block([[np.eye(n), b], [np.zeros((n, n)), np.eye(n)]])
    return JacobiGroupElement(SymplecticMatrix(M), HeisenbergElement(lam, mu, kappa))


def dilation(h, m: int) -> JacobiGroupElement:
    """The element ``g(h) = (diag(h^T, h^-1), 0)``."""
    h = np.atleast_2d(np.asarray(h, dtype=float))
    n = h.shape[0]
    if abs(np.linalg.det(h)) < 1e-12:
        raise DomainError("h must be invertible")
    Z0 = np.zeros((n, n))
    M = np.block([[h.T, Z0], [Z0, np.linalg.inv(h)]])
    return JacobiGroupElement(SymplecticMatrix(M), HeisenbergElement.zero(n, m))


def inversion(n: int, m: int) -> JacobiGroupElement:
    """The element ``sigma_n = ([[0, -E], [E, 0]], 0)``."""
    e = np.eye(n)
    Z0 = np.zeros((n, n))
    M = np.block([[Z0, -e], [e, Z0]])
    return JacobiGroupElement(SymplecticMatrix(M), HeisenbergElement.zero(n, m))


def heisenberg_element(lam, mu, kappa=None) -> JacobiGroupElement:
    """Pure Heisenberg element ``(E, (lam, mu; kappa))``.

    With ``kappa=None`` the symmetric completion ``kappa = -mu lam^T`` is used.
    """
    lam = np.atleast_2d(np.asarray(lam, dtype=float))
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    if kappa is None:
        kappa = -mu @ lam.T
    n = lam.shape[1]
    return JacobiGroupElement(SymplecticMatrix(np.eye(2 * n)), HeisenbergElement(lam, mu, kappa))


def generators(n: int, m: int, b=None, lam=None, mu=None, kappa=None, h=None):
    """Instantiate ``[t(b; lam, mu, kappa), g(h), sigma_n]``.

    Omitted parameters default to zero (``h`` to the identity).
    """
    b = np.zeros((n, n)) if b is None else b
    lam = np.zeros((m, n)) if lam is None else lam
    mu = np.zeros((m, n)) if mu is None else mu
    if kappa is None:
        kappa = -np.asarray(mu, dtype=float) @ np.asarray(lam, dtype=float).T
    h = np.eye(n) if h is None else h
    return [translation(b, lam, mu, kappa), dilation(h, m), inversion(n, m)]


def _random_symmetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return symmetrize(rng.uniform(-scale, scale, (n, n)))


def random_generator(n: int, m: int, rng: np.random.Generator) -> JacobiGroupElement:
    kind = rng.integers(3)
    if kind == 0:
        lam = rng.uniform(-1, 1, (m, n))
        mu = rng.uniform(-1, 1, (m, n))
        kappa = _random_symmetric(rng, m) - mu @ lam.T
        return translation(_random_symmetric(rng, n), lam, mu, kappa)
    if kind == 1:
        while True:
            h = np.eye(n) + rng.uniform(-0.3, 0.3, (n, n))
            if abs(np.linalg.det(h)) >= 0.1:
                return dilation(h, m)
    return inversion(n, m)


def random_element(n: int, m: int, word_length: int, rng_seed=None) -> JacobiGroupElement:
    """Product of ``word_length`` random generators, reproducible from the seed."""
    if word_length < 0:
        raise DomainError("word_length must be non-negative")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    g = jacobi_identity(n, m)
    for _ in range(word_length):
        g = jacobi_mul(g, random_generator(n, m, rng))
    return g


def random_point(n: int, m: int, rng_seed=None, spread: float = 1.0) -> JacobiPoint:
    """A random point with moderately conditioned ``Y``."""
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    X = _random_symmetric(rng, n, spread)
    L = rng.uniform(-0.5, 0.5, (n, n))
    Y = L @ L.T + rng.uniform(0.4, 1.5) * np.eye(n)
    W = rng.uniform(-spread, spread, (m, n)) + 1j * rng.uniform(-spread, spread, (m, n))
    return JacobiPoint(X + 1j * Y, W)


def is_symplectic(M, tol: float = TAU_SYM) -> bool:
    M = np.asarray(M, dtype=float)
    J = standard_j(M.shape[0] // 2)
    return bool(np.max(np.abs(M.T @ J @ M - J)) <= tol * _scale(M) ** 2)
