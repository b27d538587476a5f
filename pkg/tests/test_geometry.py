import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from siegel_jacobi.geometry import (
    Chart,
    MetricParams,
    MetricTensor,
    NumericalError,
    berndt_laplacian_apply,
    berndt_metric,
    chart_for,
    invariance_deviation,
    laplace_beltrami_apply,
    laplacian_apply,
    laplacian_coefficients,
    maass_laplacian_apply,
    metric_quadratic_form,
    metric_tensor,
    pullback_metric,
    scalar_curvature,
    siegel_quadratic_form,
    volume_density,
    volume_ratio,
    wirtinger_apply,
)
from siegel_jacobi.group import (
    DomainError,
    JacobiPoint,
    TangentVector,
    act_jacobi,
    dilation,
    jacobi_identity,
    random_element,
    random_point,
)

SHAPES = [(1, 1), (2, 1), (1, 2), (2, 2)]
seeds = st.integers(0, 2**32 - 1)


def random_tangent(n, m, rng):
    dZ = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return TangentVector(dZ + dZ.T, rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n)))


def base_point(n, m):
    return JacobiPoint(1j * np.eye(n), np.zeros((m, n)))


# chart -------------------------------------------------------------------

def test_chart_ordering():
    c = Chart(2, 1)
    assert c.labels == ["x11", "x12", "x22", "y11", "y12", "y22", "u11", "u12", "v11", "v12"]
    assert c.dim == 10
    assert Chart(3, 2).dim == 3 * 4 + 12


def test_chart_round_trip():
    rng = np.random.default_rng(0)
    p = random_point(2, 2, rng)
    c = chart_for(p)
    q = c.point(c.vector(p))
    assert np.allclose(p.Z, q.Z) and np.allclose(p.W, q.W)
    v = random_tangent(2, 2, rng)
    w = c.tangent(c.tangent_vector(v))
    assert np.allclose(v.dZ, w.dZ) and np.allclose(v.dW, w.dW)


def test_params_validation():
    with pytest.raises(DomainError):
        MetricParams(0, 1)
    with pytest.raises(DomainError):
        MetricParams(1, -2)


def test_metric_tensor_validation():
    p = base_point(1, 1)
    with pytest.raises(NumericalError):
        MetricTensor(-np.eye(4), Chart(1, 1), p)
    with pytest.raises(NumericalError):
        MetricTensor(np.eye(4) + np.triu(np.ones((4, 4)), 1), Chart(1, 1), p)


# metric --------------------------------------------------------------------

@pytest.mark.parametrize("n,m", SHAPES)
def test_quadratic_form_at_base_point(n, m):
    rng = np.random.default_rng(n + 10 * m)
    params = MetricParams(1.7, 0.4)
    p = base_point(n, m)
    for _ in range(5):
        v = random_tangent(n, m, rng)
        expected = params.A * np.trace(v.dZ @ v.dZ.conj()).real + params.B * np.trace(v.dW.T @ v.dW.conj()).real
        assert metric_quadratic_form(p, v, params) == pytest.approx(expected, rel=1e-12)
    zero = TangentVector(np.zeros((n, n)), np.zeros((m, n)))
    assert metric_quadratic_form(random_point(n, m, rng), zero, params) == 0


@pytest.mark.parametrize("n,m", SHAPES)
def test_metric_tensor_at_base_point(n, m):
    A, B = 2.0, 0.5
    g = metric_tensor(base_point(n, m), MetricParams(A, B))
    c = g.chart
    expected = np.zeros(c.dim)
    for i, j in c.pairs:
        w = A if i == j else 2 * A
        expected[c.ix(i, j)] = expected[c.iy(i, j)] = w
    for k in range(m):
        for l in range(n):
            expected[c.iu(k, l)] = expected[c.iv(k, l)] = B
    assert np.allclose(g.g, np.diag(expected), atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(SHAPES))
def test_quadratic_form_consistency(seed, shape):
    n, m = shape
    rng = np.random.default_rng(seed)
    p = random_point(n, m, rng)
    params = MetricParams(rng.uniform(0.2, 3), rng.uniform(0.2, 3))
    g = metric_tensor(p, params)
    v = random_tangent(n, m, rng)
    q = metric_quadratic_form(p, v, params)
    assert q > 0
    assert g(g.chart.tangent_vector(v)) == pytest.approx(q, rel=1e-10)


def test_berndt_anchor_point():
    g = metric_tensor(JacobiPoint([[1j]], [[1j]])).g
    # coefficients (y + v^2)/y^3 = 2, 1/y = 1 and cross term -2v/y^2 = -2
    assert np.allclose(np.diag(g), [2, 2, 1, 1])
    assert g[0, 2] == pytest.approx(-1) and g[1, 3] == pytest.approx(-1)


def test_berndt_metric_random_points():
    rng = np.random.default_rng(4)
    for _ in range(20):
        p = random_point(1, 1, rng, spread=2.0)
        assert np.allclose(metric_tensor(p).g, berndt_metric(p), rtol=1e-10, atol=1e-12)


def test_siegel_part_of_metric():
    rng = np.random.default_rng(5)
    for n, m in SHAPES:
        p = random_point(n, m, rng)
        v = random_tangent(n, m, rng)
        a_coeff = metric_quadratic_form(p, v, MetricParams(2, 1)) - metric_quadratic_form(p, v, MetricParams(1, 1))
        assert a_coeff == pytest.approx(siegel_quadratic_form(p.siegel, v.dZ), rel=1e-10)


# invariance ---------------------------------------------------------------

def test_pullback_identity_is_exact():
    p = random_point(2, 2, 1)
    assert np.array_equal(pullback_metric(jacobi_identity(2, 2), p).g, metric_tensor(p).g)


@pytest.mark.parametrize("n,m", SHAPES)
def test_dilation_invariance(n, m):
    rng = np.random.default_rng(6)
    h = np.eye(n) + rng.uniform(-0.3, 0.3, (n, n))
    p = random_point(n, m, rng)
    assert invariance_deviation(dilation(h, m), p, MetricParams(1.3, 0.7)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from(SHAPES))
def test_invariance_random_words(seed, shape):
    n, m = shape
    rng = np.random.default_rng(seed)
    g = random_element(n, m, 5, rng)
    assert invariance_deviation(g, random_point(n, m, rng), MetricParams(2, 0.5)) < 1e-8


def test_volume_density():
    assert volume_density(base_point(2, 1)) == pytest.approx(1)
    assert volume_density(JacobiPoint([[2j]], [[0.3]])) == pytest.approx(0.125)


@pytest.mark.parametrize("n,m", SHAPES)
def test_volume_ratio_constant(n, m):
    rng = np.random.default_rng(7)
    r = [volume_ratio(random_point(n, m, rng), MetricParams(1.5, 0.8)) for _ in range(10)]
    assert np.std(r) / np.mean(r) < 1e-10


# Wirtinger -----------------------------------------------------------------

def test_wirtinger_first_derivatives():
    rng = np.random.default_rng(8)
    n, m = 2, 2
    p = random_point(n, m, rng)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    M = M + M.T
    N = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))

    def f(q):
        return np.trace(q.Z @ M) + np.sum(N * q.W)

    assert np.allclose(wirtinger_apply(f, p, "Z"), M, atol=1e-8)
    assert np.allclose(wirtinger_apply(f, p, "Zbar"), 0, atol=1e-8)
    assert np.allclose(wirtinger_apply(f, p, "W"), N.T, atol=1e-8)
    assert np.allclose(wirtinger_apply(f, p, "Wbar"), 0, atol=1e-8)


def test_wirtinger_mixed_second_derivative():
    p = random_point(1, 1, 9)

    def f(q):
        return abs(q.W[0, 0]) ** 2

    d = wirtinger_apply(f, p, ("W", "Wbar"))
    assert d.shape == (1, 1, 1, 1)
    assert d[0, 0, 0, 0] == pytest.approx(1, abs=1e-6)


# Laplacian -------------------------------------------------------------------

def polynomial_fields():
    def c(q):
        return q.X[0, 0], q.Y[0, 0], q.U[0, 0], q.V[0, 0]

    return [
        lambda q: c(q)[0] ** 2 * c(q)[1],
        lambda q: c(q)[1] ** 3 * c(q)[3],
        lambda q: c(q)[2] ** 2 * c(q)[3] ** 2,
        lambda q: c(q)[0] * c(q)[2] + c(q)[1] * c(q)[3],
        lambda q: c(q)[0] ** 2 * c(q)[2] * c(q)[3],
    ]


def test_berndt_laplacian_polynomials():
    rng = np.random.default_rng(10)
    for _ in range(10):
        p = random_point(1, 1, rng)
        for f in polynomial_fields():
            a = laplacian_apply(f, p)
            b = berndt_laplacian_apply(f, p)
            assert abs(a - b) <= 1e-6 * (1 + abs(b))


def test_laplacian_constants_and_linear_fields():
    p = random_point(2, 1, 11)
    assert abs(laplacian_apply(lambda q: 3.0, p)) < 1e-8
    # y^s eigenfunction at s = 2 on n = m = 1
    q = random_point(1, 1, 12)
    f = lambda r: r.Y[0, 0] ** 2  # noqa: E731
    assert laplacian_apply(f, q) == pytest.approx(2 * f(q), rel=1e-6)


def smooth_fields():
    return [
        lambda q: np.exp(0.3 * np.trace(q.X)) * np.sin(np.sum(q.U)) + np.sum(q.V ** 2),
        lambda q: np.linalg.det(q.Y) ** 0.7 * np.cos(0.5 * np.sum(q.X) + np.sum(q.V)),
        lambda q: np.sum(np.abs(q.W) ** 2) / (1 + np.trace(q.Y)),
        lambda q: np.trace(q.Y @ q.Y) * q.U[0, 0] + q.V[-1, -1] ** 3,
    ]


@pytest.mark.parametrize("n,m", SHAPES)
def test_laplacian_matches_laplace_beltrami(n, m):
    rng = np.random.default_rng(13 + n + m)
    params = MetricParams(1.4, 0.6)
    for f in smooth_fields():
        p = random_point(n, m, rng)
        a = laplacian_apply(f, p, params)
        b = laplace_beltrami_apply(f, p, params)
        assert abs(a - b) < 1e-6 * (1 + abs(b))


@pytest.mark.parametrize("n,m", SHAPES)
def test_laplacian_invariance(n, m):
    rng = np.random.default_rng(20 + n + m)
    for f in smooth_fields():
        p = random_point(n, m, rng)
        g = random_element(n, m, 3, rng)
        lhs = laplacian_apply(lambda q: f(act_jacobi(g, q)), p)
        rhs = laplacian_apply(f, act_jacobi(g, p))
        assert abs(lhs - rhs) < 1e-5 * (1 + abs(rhs))


def test_laplacian_coefficients_invert_the_metric():
    rng = np.random.default_rng(30)
    for n, m in SHAPES + [(3, 2)]:
        p = random_point(n, m, rng)
        params = MetricParams(1.2, 2.5)
        K = laplacian_coefficients(p, params)
        sym = 0.5 * (K + K.T)
        assert np.allclose(sym, np.linalg.inv(metric_tensor(p, params).g), atol=1e-12)


def test_short_gamma_term_only_valid_for_n_equal_1():
    rng = np.random.default_rng(31)
    f = smooth_fields()[0]
    p = random_point(1, 2, rng)
    assert laplacian_apply(f, p, printed=True) == pytest.approx(laplacian_apply(f, p), rel=1e-12)
    p = random_point(2, 1, rng)
    p = JacobiPoint(p.Z, p.W + 1j)
    short = laplacian_apply(f, p, printed=True)
    lb = laplace_beltrami_apply(f, p)
    assert abs(short - lb) > 1e-3 * abs(lb)


def test_maass_laplacian_on_z_only_fields():
    rng = np.random.default_rng(32)
    fields = [
        lambda q: np.linalg.det(q.Y) ** 1.5,
        lambda q: np.trace(q.X @ q.X) * np.trace(q.Y),
        lambda q: np.exp(0.2 * np.trace(q.Y)) * np.cos(np.sum(q.X)),
    ]
    for n, m in SHAPES:
        for f in fields:
            p = random_point(n, m, rng)
            a = laplacian_apply(f, p, MetricParams(1, 1))
            b = maass_laplacian_apply(f, p.siegel)
            assert abs(a - b) < 1e-4 * (1 + abs(b))


def test_laplacian_scales_with_parameters():
    p = random_point(2, 2, 33)
    f = smooth_fields()[1]
    base = laplacian_apply(lambda q: np.linalg.det(q.Y) ** 0.5, p, MetricParams(1, 1))
    assert laplacian_apply(lambda q: np.linalg.det(q.Y) ** 0.5, p, MetricParams(2, 7)) == pytest.approx(base / 2)
    full = laplacian_apply(f, p, MetricParams(1, 1))
    assert laplacian_apply(f, p, MetricParams(3, 3)) == pytest.approx(full / 3, rel=1e-10)


def test_real_field_flag_guards_imaginary_output():
    from siegel_jacobi.geometry import ScalarField

    p = random_point(1, 1, 34)
    with pytest.raises(NumericalError):
        laplacian_apply(ScalarField(lambda q: 1j * q.Y[0, 0] ** 2, real=True), p)


# curvature -----------------------------------------------------------------

def test_scalar_curvature_anchor():
    rng = np.random.default_rng(40)
    values = [scalar_curvature(random_point(1, 1, rng)) for _ in range(3)]
    assert np.allclose(values, -3, atol=1e-4)


def test_scalar_curvature_scales_inversely_with_a():
    rng = np.random.default_rng(41)
    values = [scalar_curvature(random_point(1, 1, rng), MetricParams(2.0, 5.0)) for _ in range(3)]
    assert np.allclose(values, -1.5, atol=1e-4)


def test_scalar_curvature_constant_for_n2():
    rng = np.random.default_rng(42)
    values = [scalar_curvature(random_point(2, 1, rng)) for _ in range(3)]
    assert np.ptp(values) < 1e-3
