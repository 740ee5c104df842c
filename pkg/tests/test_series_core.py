import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fsgroupoid.series_core import (
    BasePolynomial, FibreMap, FibreSeries, Scalar, SC_ONE, SC_ZERO,
    invert_fibre_map, invert_scalar_matrix, invert_series_matrix, partial,
    poly_mul, solve_exact_linear, substitute_fibre, xi_component,
)


def P(dim, **monos):
    """Shorthand: P(2, _20=1, _01='1/2') -> x1^2 + 1/2*x2."""
    terms = {}
    for key, c in monos.items():
        mono = tuple(int(ch) for ch in key[1:])
        terms[mono] = Scalar(Fraction(c)) if not isinstance(c, Scalar) else c
    return BasePolynomial(dim, terms)


def xs(dim):
    return [BasePolynomial.var(dim, i) for i in range(dim)]


def xis(dim, order=None):
    return [FibreSeries.xi_var(dim, i, order=order) for i in range(dim)]


# --- Scalar ----------------------------------------------------------------

def test_scalar_field_ops():
    a = Scalar(Fraction(1, 2), Fraction(1, 3))
    b = Scalar(2, -1)
    assert a + b == Scalar(Fraction(5, 2), Fraction(-2, 3))
    assert a * b == Scalar(Fraction(1, 2) * 2 + Fraction(1, 3), Fraction(2, 3) - Fraction(1, 2))
    assert (a / b) * b == a
    assert -a + a == SC_ZERO
    assert Scalar(0, 1) * Scalar(0, 1) == Scalar(-1)


def test_scalar_strings():
    assert Scalar(3).to_string() == "3"
    assert Scalar(Fraction(-1, 2)).to_string() == "-1/2"
    assert Scalar(0, 1).to_string() == "I"
    assert Scalar(1, Fraction(-2, 3)).to_string() == "1-2/3*I"


# --- BasePolynomial ---------------------------------------------------------

def test_poly_arithmetic():
    x1, x2 = xs(2)
    p = (x1 + x2) * (x1 - x2)
    assert p == x1 * x1 - x2 * x2
    assert (x1 + 1) ** 2 == x1 * x1 + 2 * x1 + 1
    assert (p - p).is_zero()


def test_poly_diff():
    x1, x2 = xs(2)
    p = x1 ** 2 * x2 + 3 * x2
    assert p.diff(0) == 2 * x1 * x2
    assert p.diff(1) == x1 ** 2 + 3
    assert p.diff(0).diff(1) == p.diff(1).diff(0)


def test_poly_string_is_canonical():
    p = P(2, _11=1, _00="1/2", _20=-1)
    assert p.to_string() == "1/2 + x1*x2 - x1^2"


# --- FibreSeries ------------------------------------------------------------

def test_poly_mul_examples():
    xi1, xi2 = xis(2)
    assert poly_mul(xi1, xi2) == xi1 * xi2
    # (x1 + xi1)^2 at order 1 drops the xi1^2 term
    x1 = FibreSeries.from_poly(BasePolynomial.var(2, 0), order=1)
    s = (x1 + xi1.truncate(1))
    sq = poly_mul(s, s)
    assert sq.order == 1
    x1p = BasePolynomial.var(2, 0)
    assert sq == FibreSeries.from_poly(x1p * x1p, order=1) + xi1 * (2 * x1p)
    assert poly_mul(xi1 * Fraction(1, 2), xi1 * Fraction(1, 3)) == xi1 * xi1 * Fraction(1, 6)


def test_poly_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        poly_mul(FibreSeries.xi_var(2, 0), FibreSeries.xi_var(3, 0))


def test_partial_examples():
    xi1, xi2 = xis(2)
    x1 = BasePolynomial.var(2, 0)
    assert partial(xi1 * xi2, "fibre", 0) == xi2
    assert partial(FibreSeries.from_poly(x1 ** 2) * xi2, "base", 0) == xi2 * (2 * x1)
    assert partial(FibreSeries.from_poly(x1), "fibre", 1).is_zero()
    with pytest.raises(IndexError):
        partial(xi1, "fibre", 5)


def test_partial_fibre_lowers_order():
    f = FibreSeries.xi_var(2, 0, order=4)
    assert partial(f, "fibre", 0).order == 3
    assert partial(f, "base", 0).order == 4


def test_xi_component():
    xi1, xi2 = xis(2)
    x1 = BasePolynomial.var(2, 0)
    s = FibreSeries.from_poly(x1) + xi1 + xi1 * xi2
    assert xi_component(s, 1) == xi1
    assert xi_component(s, 0) == FibreSeries.from_poly(x1)
    assert xi_component(s.truncate(2), 2) == xi1 * xi2
    with pytest.raises(ValueError):
        xi_component(s.truncate(2), 3)


def test_fibre_shift_matches_composite_and_keeps_order():
    random.seed(7)
    dim = 2
    s = FibreSeries.zero(dim)
    for _ in range(8):
        mono = (random.randrange(3), random.randrange(3))
        xmono = (random.randrange(2), random.randrange(2))
        s = s + FibreSeries(dim, {mono: BasePolynomial.monomial(dim, xmono, random.randrange(1, 5))})
    s = s.truncate(4)
    for p in range(dim):
        for l in range(dim):
            direct = s.fibre_shift(p, l)
            composite = FibreSeries.xi_var(dim, p) * s.diff_xi(l)
            assert direct.order == 4
            assert composite.order == 3
            assert direct == composite  # compared at the weaker order


def test_substitute_examples():
    # F = xi1, map xi1 <- z1 + z1 z2 keeps the expression
    z1, z2 = xis(2, order=4)
    F = FibreSeries.xi_var(2, 0, order=4)
    out = substitute_fibre(F, (z1 + z1 * z2, z2))
    assert out == z1 + z1 * z2
    # flat closed form: x1 - xi2 at xi <- -zeta/2
    x1 = BasePolynomial.var(2, 0)
    F = FibreSeries.from_poly(x1, order=4) - FibreSeries.xi_var(2, 1, order=4)
    half = Fraction(-1, 2)
    out = substitute_fibre(F, (z1 * half, z2 * half))
    assert out == FibreSeries.from_poly(x1, order=4) + z2 * Fraction(1, 2)
    # xi-independent series pass through
    G = FibreSeries.from_poly(x1 ** 3, order=4)
    assert substitute_fibre(G, (z1 + z2 * z1, z2)) == G


def test_substitute_rejects_nonzero_zero_section():
    F = FibreSeries.xi_var(2, 0, order=3)
    bad = FibreSeries.const(2, 1, order=3) + FibreSeries.xi_var(2, 0, order=3)
    with pytest.raises(ValueError):
        substitute_fibre(F, (bad, FibreSeries.xi_var(2, 1, order=3)))


def test_invert_fibre_map_examples():
    ident = FibreMap.identity(2, order=5)
    assert invert_fibre_map(ident).is_identity()
    z1, z2 = xis(2, order=5)
    phi = FibreMap((z1 + z2 * z2, z2))
    psi = invert_fibre_map(phi)
    assert psi.components[0] == z1 - z2 * z2
    assert psi.components[1] == z2
    random.seed(3)
    comps = []
    for i in range(2):
        c = FibreSeries.xi_var(2, i, order=5)
        for _ in range(3):
            mono = (random.randrange(3), random.randrange(3))
            if sum(mono) < 2:
                continue
            c = c + FibreSeries(2, {mono: BasePolynomial.const(2, random.randrange(-2, 3))}, order=5)
        comps.append(c)
    phi = FibreMap(comps)
    psi = invert_fibre_map(phi)
    assert phi.compose(psi).is_identity()
    assert psi.compose(phi).is_identity()
    again = invert_fibre_map(psi)
    for i in range(2):
        assert again.components[i] == phi.components[i]


def test_fibre_map_requires_invertible_linear_part():
    z1, z2 = xis(2, order=3)
    with pytest.raises(ArithmeticError):
        FibreMap((z1, z1))
    x1 = BasePolynomial.var(2, 0)
    with pytest.raises(ValueError):
        FibreMap((z1 * x1, z2))


# --- property tests ---------------------------------------------------------

coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=7)


@st.composite
def series(draw, dim=2, order=3):
    n_terms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n_terms):
        mono = tuple(draw(st.integers(0, 2)) for _ in range(dim))
        if sum(mono) > order:
            continue
        xmono = tuple(draw(st.integers(0, 2)) for _ in range(dim))
        c = Scalar(draw(coeffs), draw(coeffs))
        p = terms.get(mono, BasePolynomial.zero(dim)) + BasePolynomial.monomial(dim, xmono, c)
        terms[mono] = p
    return FibreSeries(dim, terms, order=order)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(series(order=4))
def test_partials_commute(a):
    assert a.diff_xi(0).diff_xi(1) == a.diff_xi(1).diff_xi(0)
    assert a.diff_x(0).diff_xi(1) == a.diff_xi(1).diff_x(0)
    assert a.diff_x(0).diff_x(1) == a.diff_x(1).diff_x(0)


@settings(max_examples=30, deadline=None)
@given(series(order=4), series(order=4))
def test_substitute_is_morphism(a, b):
    z1, z2 = xis(2, order=4)
    comps = (z1 + z2 * z2 * Fraction(1, 2), z2 - z1 * z1)
    lhs = substitute_fibre(a * b, comps)
    rhs = substitute_fibre(a, comps) * substitute_fibre(b, comps)
    assert lhs == rhs
    assert substitute_fibre(a + b, comps) == substitute_fibre(a, comps) + substitute_fibre(b, comps)


# --- exact linear algebra ---------------------------------------------------

def test_scalar_matrix_inverse():
    m = [[Scalar(2), Scalar(1)], [Scalar(1), Scalar(1)]]
    inv = invert_scalar_matrix(m)
    assert inv[0][0] == Scalar(1) and inv[0][1] == Scalar(-1)
    assert inv[1][0] == Scalar(-1) and inv[1][1] == Scalar(2)
    with pytest.raises(ArithmeticError):
        invert_scalar_matrix([[Scalar(1), Scalar(1)], [Scalar(1), Scalar(1)]])


def test_series_matrix_inverse():
    dim, order = 2, 4
    xi1, xi2 = xis(dim, order=order)
    one = FibreSeries.const(dim, 1, order=order)
    m = [[one + xi1, xi2 * Fraction(1, 3)], [FibreSeries.zero(dim, order=order), one - xi2]]
    inv = invert_series_matrix(m, order)
    for i in range(dim):
        for j in range(dim):
            acc = FibreSeries.zero(dim, order=order)
            for k in range(dim):
                acc = acc + m[i][k] * inv[k][j]
            assert acc == (one if i == j else FibreSeries.zero(dim, order=order))


def test_solve_exact_linear_unique_and_infeasible():
    sol, cert = solve_exact_linear([
        ({"a": Scalar(1), "b": Scalar(1)}, Scalar(3)),
        ({"a": Scalar(1), "b": Scalar(-1)}, Scalar(1)),
    ])
    assert cert["feasible"]
    assert sol == {"a": Scalar(2), "b": Scalar(1)}
    sol, cert = solve_exact_linear([
        ({"a": Scalar(1)}, Scalar(1)),
        ({"a": Scalar(1)}, Scalar(2)),
    ])
    assert sol is None
    assert not cert["feasible"]
    assert not cert["residual"].is_zero()
    # the combination certificate reproduces the contradiction
    assert cert["combination"] == {0: Scalar(-1), 1: Scalar(1)} or \
        cert["combination"] == {0: Scalar(1), 1: Scalar(-1)}


def test_solve_exact_linear_underdetermined_sets_free_to_zero():
    sol, cert = solve_exact_linear([({"a": Scalar(1), "b": Scalar(2)}, Scalar(4))])
    assert cert["feasible"]
    assert sol["a"] == Scalar(4)
    assert "b" not in sol or sol["b"] == SC_ZERO
