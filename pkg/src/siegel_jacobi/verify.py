"""Bundled verification suites and their report records."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import geometry, reduction, spectral
from .geometry import MetricParams
from .group import (
    DomainError,
    JacobiPoint,
    SiegelPoint,
    SymplecticMatrix,
    act_jacobi,
    act_siegel,
    random_element,
    random_point,
)
from .jsonio import digest

SUITES = ("metric-invariance", "laplacian", "curvature", "volumes", "reduction", "spectral")

DEFAULT_TOLERANCES = {
    "metric_invariance": 1e-8,
    "laplacian": 1e-3,
    "curvature": 1e-3,
    "volume": 1e-12,
    "roundtrip": 1e-9,
    "eigen": 1e-4,
    "gram": 1e-8,
    "torus_ratio": 1e-6,
    "riemann": 1e-10,
}
DEFAULT_STEPS = {"first": 1e-5, "second": 1e-4}
DEFAULT_SHAPES = ((1, 1), (2, 1), (1, 2), (2, 2))


@dataclass
class RunConfig:
    n: int = 1
    m: int = 1
    A: float = 1.0
    B: float = 1.0
    seed: int = 0
    samples: int = 10
    shapes: tuple = DEFAULT_SHAPES
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    fd_steps: dict = field(default_factory=lambda: dict(DEFAULT_STEPS))

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DomainError("n and m must be positive")
        if not (self.A > 0 and self.B > 0):
            raise DomainError("A and B must be positive")
        if self.samples < 1:
            raise DomainError("samples must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        self.fd_steps = {**DEFAULT_STEPS, **self.fd_steps}
        for label, v in {**self.tolerances, **self.fd_steps}.items():
            if not v > 0:
                raise DomainError(f"{label} must be positive")
        self.shapes = tuple(tuple(int(k) for k in s) for s in self.shapes)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def params(self) -> MetricParams:
        return MetricParams(self.A, self.B)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["shapes"] = [list(s) for s in self.shapes]
        return d


@dataclass(frozen=True)
class CheckRecord:
    name: str
    inputs: dict
    measured: object
    expected: object
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs_digest": digest(self.inputs),
            "measured": self.measured,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _record(name, inputs, measured, expected, tol, passed) -> CheckRecord:
    return CheckRecord(name, inputs, measured, expected, tol, bool(passed))


def _rng(cfg: RunConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


# suites ------------------------------------------------------------------------

def suite_metric_invariance(cfg: RunConfig) -> list[CheckRecord]:
    tol = cfg.tolerances["metric_invariance"]
    out = []
    for n, m in cfg.shapes:
        for A, B in ((1.0, 1.0), (2.0, 0.5)):
            rng = _rng(cfg, 100 * n + 10 * m)
            worst = 0.0
            for _ in range(cfg.samples):
                g = random_element(n, m, 4, rng)
                p = random_point(n, m, rng)
                worst = max(worst, geometry.invariance_deviation(g, p, MetricParams(A, B)))
            out.append(_record(f"metric-invariance/n={n},m={m},A={A},B={B}",
                               {"n": n, "m": m, "A": A, "B": B, "samples": cfg.samples, "seed": cfg.seed},
                               worst, "deviation < tolerance", tol, worst < tol))
    return out


def smooth_fields(n: int, m: int):
    """Smooth test functions used by the Laplacian checks."""
    def f1(p):
        return np.exp(0.3 * np.trace(p.X)) * np.sin(np.sum(p.U)) + np.sum(p.V ** 2)

    def f2(p):
        return np.linalg.det(p.Y) ** 0.7 * np.cos(0.5 * np.sum(p.X) + np.sum(p.V))

    def f3(p):
        return np.sum(np.abs(p.W) ** 2) / (1 + np.trace(p.Y)) + p.X[0, -1] * p.V[-1, 0]

    return [("exp-sin", f1), ("det-cos", f2), ("rational", f3)]


def suite_laplacian(cfg: RunConfig) -> list[CheckRecord]:
    tol = cfg.tolerances["laplacian"]
    step = cfg.fd_steps["second"]
    out = []
    for n, m in cfg.shapes:
        rng = _rng(cfg, 200 + 10 * n + m)
        lb_worst = inv_worst = 0.0
        for label, f in smooth_fields(n, m):
            p = random_point(n, m, rng)
            a = geometry.laplacian_apply(f, p, cfg.params, step)
            b = geometry.laplace_beltrami_apply(f, p, cfg.params)
            lb_worst = max(lb_worst, abs(a - b) / max(abs(b), 1e-300))
            g = random_element(n, m, 3, rng)
            lhs = geometry.laplacian_apply(lambda q: f(act_jacobi(g, q)), p, cfg.params, step)
            rhs = geometry.laplacian_apply(f, act_jacobi(g, p), cfg.params, step)
            inv_worst = max(inv_worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        inputs = {"n": n, "m": m, "A": cfg.A, "B": cfg.B, "seed": cfg.seed, "step": step}
        out.append(_record(f"laplacian/laplace-beltrami/n={n},m={m}", inputs,
                           lb_worst, "relative difference < tolerance", tol, lb_worst < tol))
        out.append(_record(f"laplacian/invariance/n={n},m={m}", inputs,
                           inv_worst, "relative difference < tolerance", tol, inv_worst < tol))
    return out


def suite_curvature(cfg: RunConfig) -> list[CheckRecord]:
    tol = cfg.tolerances["curvature"]
    out = []
    for A, expected in ((1.0, -3.0), (2.0, -1.5)):
        rng = _rng(cfg, 300)
        values = [geometry.scalar_curvature(random_point(1, 1, rng), MetricParams(A, 1.0)) for _ in range(5)]
        worst = max(abs(v - expected) for v in values)
        out.append(_record(f"curvature/n=1,m=1,A={A},B=1.0", {"A": A, "B": 1.0, "seed": cfg.seed, "points": 5},
                           values, expected, tol, worst < tol and max(values) - min(values) < 2 * tol))
    return out


def suite_volumes(cfg: RunConfig) -> list[CheckRecord]:
    tol = cfg.tolerances["volume"]
    table = {1: (3, 1), 2: (270, 3), 3: (127575, 6), 4: (200930625, 10)}
    out = []
    for n, (den, e) in table.items():
        expected = math.pi ** e / den
        got = reduction.siegel_volume(n)
        out.append(_record(f"volumes/n={n}", {"n": n}, got, expected, tol,
                           abs(got - expected) / expected < tol))
    return out


def _random_siegel(n: int, rng: np.random.Generator) -> SiegelPoint:
    X = rng.uniform(-2, 2, (n, n))
    L = rng.normal(size=(n, n))
    Y = L @ L.T * rng.uniform(0.05, 2) + 0.02 * np.eye(n)
    return SiegelPoint(0.5 * (X + X.T) + 1j * Y)


def suite_reduction(cfg: RunConfig) -> list[CheckRecord]:
    tol = cfg.tolerances["roundtrip"]
    out = []
    for n in (1, 2):
        rng = _rng(cfg, 400 + n)
        worst = 0.0
        member = True
        for _ in range(cfg.samples):
            Z = _random_siegel(n, rng)
            r = reduction.siegel_reduce(Z)
            back = act_siegel(SymplecticMatrix(r.transform.astype(float)), r.reduced)
            worst = max(worst, float(np.max(np.abs(back.Z - Z.Z)) / np.max(np.abs(Z.Z))))
            member &= bool(reduction.is_siegel_reduced(r.reduced))
            if n == 1:
                z = complex(r.reduced.Z[0, 0])
                member &= abs(z.real) <= 0.5 + 1e-12 and abs(z) >= 1 - 1e-12
        inputs = {"n": n, "seed": cfg.seed, "samples": cfg.samples}
        out.append(_record(f"reduction/siegel-roundtrip/n={n}", inputs, worst, "error < tolerance", tol, worst < tol))
        out.append(_record(f"reduction/siegel-membership/n={n}", inputs, member, True, 0.0, member))
        rng = _rng(cfg, 410 + n)
        worst = 0.0
        inside = True
        for _ in range(cfg.samples):
            Z = _random_siegel(n, rng)
            p = JacobiPoint(Z.Z, rng.uniform(-5, 5, (1, n)) + 1j * rng.uniform(-5, 5, (1, n)))
            r = reduction.jacobi_reduce(p)
            c = np.array(r.certificate["lattice_coords"])
            inside &= bool(np.all((c >= 0) & (c < 1)))
            back = act_jacobi(r.transform, r.reduced)
            worst = max(worst, float(max(np.max(np.abs(back.Z - p.Z)), np.max(np.abs(back.W - p.W)))))
        out.append(_record(f"reduction/jacobi-roundtrip/n={n},m=1", inputs, worst, "error < tolerance", tol,
                           worst < tol))
        out.append(_record(f"reduction/jacobi-lattice-box/n={n},m=1", inputs, inside, True, 0.0, inside))
    return out


def suite_spectral(cfg: RunConfig) -> list[CheckRecord]:
    out = []
    rng = _rng(cfg, 500)
    points = [random_point(1, 1, rng) for _ in range(5)]
    eig_tol = cfg.tolerances["eigen"]
    for s, a in ((1.3, 1.0), (2 + 0.5j, -2.0)):
        for c in spectral.eigenfunction_catalog(s, a):
            rep = spectral.check_eigenfunction(c, points, tol=eig_tol, step=cfg.fd_steps["second"])
            out.append(_record(f"spectral/eigen/s={s},a={a}/{c.label}", {"s": s, "a": a, "seed": cfg.seed},
                               rep.max_residual, c.claimed_eigenvalue, eig_tol, rep.passed))
    gram_tol = cfg.tolerances["gram"]
    ratio_tol = cfg.tolerances["torus_ratio"]
    indices = spectral.index_range(1, 1)
    for k in range(3):
        O = _random_siegel(1, rng)
        inputs = {"Omega": O.Z, "seed": cfg.seed}
        G = spectral.torus_gram(O, indices)
        err = float(np.max(np.abs(G - np.eye(len(indices)))))
        out.append(_record(f"spectral/torus-gram/{k}", inputs, err, "identity", gram_tol, err < gram_tol))
        worst = 0.0
        zero_ok = True
        for idx in indices:
            lam, spread = spectral.torus_eigenvalue(O, idx, samples=5, rng_seed=k)
            worst = max(worst, spread)
            zero_ok &= (abs(lam) < 1e-6) == idx.is_zero
        out.append(_record(f"spectral/torus-eigen-ratio/{k}", inputs, worst, "constant ratio", ratio_tol,
                           worst < ratio_tol and zero_ok))
    rc_tol = cfg.tolerances["riemann"]
    for n in (1, 2, 3):
        ok = True
        worst = 0.0
        for _ in range(cfg.samples):
            rc = spectral.riemann_conditions(_random_siegel(n, rng), rc_tol)
            ok &= rc["ok"]
            worst = max(worst, rc["rc1_residual"])
        out.append(_record(f"spectral/riemann/n={n}", {"n": n, "seed": cfg.seed, "samples": cfg.samples},
                           worst, "RC.1 residual < tolerance and RC.2 positive", rc_tol, ok))
    return out


_RUNNERS = {
    "metric-invariance": suite_metric_invariance,
    "laplacian": suite_laplacian,
    "curvature": suite_curvature,
    "volumes": suite_volumes,
    "reduction": suite_reduction,
    "spectral": suite_spectral,
}


def run_suite(name: str, cfg: RunConfig, timing: bool = False) -> dict:
    """Run one suite (or ``"all"``) and build the report dictionary.

    Records are sorted by name.  The wall-clock duration is only included
    when ``timing`` is set, so that reports for a fixed config are
    byte-identical.
    """
    if name != "all" and name not in _RUNNERS:
        raise KeyError(name)
    names = SUITES if name == "all" else (name,)
    start = time.perf_counter()
    records = [r for s in names for r in _RUNNERS[s](cfg)]
    records = sorted((r.to_dict() for r in records), key=lambda r: r["name"])
    report = {
        "suite": name,
        "config": cfg.to_dict(),
        "records": records,
        "pass": all(r["pass"] for r in records),
    }
    if timing:
        report["duration_s"] = time.perf_counter() - start
    return report
