"""Expression parsing, printing, and order-3 jet arithmetic."""

import math

import numpy as np
import pytest

import cottonlab.jets as jets
from cottonlab.errors import DomainError, ExprSyntaxError, UnknownSymbolError
from cottonlab.jets import (
    Add,
    Const,
    Func,
    Jet3,
    Mul,
    Var,
    eval_expr,
    eval_jet,
    parse,
    to_string,
)
from oracles import fd_partials


class TestParse:
    def test_reads_sum_of_products(self):
        e = parse("x1*x1 + sin(x2)")
        assert e == Add(Mul(Var(0), Var(0)), Func("sin", Var(1)))

    def test_single_literal(self):
        assert parse("1") == Const(1.0)

    def test_derived_exp_value(self):
        # independent calculator: math.exp
        e = parse("exp(2*(x1^2))")
        assert eval_expr(e, (0.3, 0.0, 0.0)) == pytest.approx(math.exp(0.18), rel=1e-15)

    def test_precedence_pow_tighter_than_unary_minus(self):
        assert eval_expr(parse("-x1^2"), (3.0, 0, 0)) == -9.0

    def test_left_associativity(self):
        assert eval_expr(parse("8/4/2"), (0, 0, 0)) == 1.0
        assert eval_expr(parse("8-4-2"), (0, 0, 0)) == 2.0

    def test_mul_div_bind_over_add(self):
        assert eval_expr(parse("1+2*3"), (0, 0, 0)) == 7.0

    def test_negative_exponent_forms(self):
        assert eval_expr(parse("x1^-2"), (2.0, 0, 0)) == 0.25
        assert eval_expr(parse("x1^(-2)"), (2.0, 0, 0)) == 0.25

    def test_syntax_error_carries_offset(self):
        with pytest.raises(ExprSyntaxError) as err:
            parse("x1 + * x2")
        assert err.value.offset == 5

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbolError) as err:
            parse("x1 + y")
        assert err.value.name == "y"

    def test_unknown_function(self):
        with pytest.raises(UnknownSymbolError):
            parse("foo(x1)")

    def test_unbalanced_parens(self):
        with pytest.raises(ExprSyntaxError):
            parse("sin(x1")

    def test_fractional_exponent_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse("x1^2.5")


def _random_expr(rng, depth=3):
    roll = rng.integers(0, 8 if depth > 0 else 2)
    if roll == 0:
        return Const(float(rng.uniform(0.5, 2.5)))
    if roll == 1:
        return Var(int(rng.integers(0, 3)))
    if roll == 2:
        return Add(_random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if roll == 3:
        return jets.Sub(_random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if roll == 4:
        return Mul(_random_expr(rng, depth - 1), _random_expr(rng, depth - 1))
    if roll == 5:
        # keep denominators away from zero
        return jets.Div(
            _random_expr(rng, depth - 1),
            Add(Const(2.0), Mul(Var(int(rng.integers(0, 3))), Var(int(rng.integers(0, 3))))),
        )
    if roll == 6:
        name = str(rng.choice(["sin", "cos", "tan", "exp", "sinh", "cosh", "tanh"]))
        arg = Mul(Const(float(rng.uniform(0.2, 0.9))), _random_expr(rng, depth - 1))
        if name == "tan":
            # keep tan well away from its poles so the FD oracle stays sane
            arg = Mul(Const(0.4), Func("tanh", arg))
        return Func(name, arg)
    # domain-guarded log/sqrt
    name = str(rng.choice(["log", "sqrt"]))
    guard = Add(Const(1.5), Mul(Var(int(rng.integers(0, 3))), Var(int(rng.integers(0, 3)))))
    return Func(name, guard)


class TestPrintRoundTrip:
    def test_structural_round_trip(self, rng):
        for _ in range(300):
            e = _random_expr(rng)
            assert parse(to_string(e)) == e

    def test_examples(self):
        for text in ("x1*(x2 + x3)", "-x1^2", "1/(x3*x3)", "sin(x1) + 0.2*x2^2"):
            e = parse(text)
            assert parse(to_string(e)) == e


class TestEval:
    def test_coordinate(self):
        assert eval_expr(parse("x3"), (1, 2, 5)) == 5.0

    def test_sin_zero(self):
        assert eval_expr(parse("sin(x1)"), (0, 0, 0)) == 0.0

    def test_inverse_square(self):
        assert eval_expr(parse("1/(x3*x3)"), (0, 0, 2)) == 0.25

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            eval_expr(parse("log(x1)"), (-1.0, 0, 0))
        with pytest.raises(DomainError):
            eval_expr(parse("sqrt(x1)"), (-1.0, 0, 0))
        with pytest.raises(DomainError):
            eval_expr(parse("1/x1"), (0.0, 0, 0))
        with pytest.raises(DomainError):
            eval_expr(parse("x1^(-1)"), (0.0, 0, 0))

    def test_sqrt_of_zero_value_ok(self):
        assert eval_expr(parse("sqrt(x1)"), (0.0, 0, 0)) == 0.0


class TestEvalJet:
    def test_constant_jet(self):
        j = eval_jet(Const(7.0), (0.3, -0.2, 1.1))
        assert j.value == 7.0
        assert np.count_nonzero(j.coeffs) == 1

    def test_bilinear_monomial(self):
        j = eval_jet(parse("x1*x2"), (0, 0, 0))
        assert j.coeff((1, 1, 0)) == 1.0
        nz = [m for m in jets.T.MULTI_INDICES if j.coeff(m) != 0.0]
        assert nz == [(1, 1, 0)]

    def test_sine_taylor(self):
        j = eval_jet(parse("sin(x1)"), (0, 0, 0))
        assert j.coeff((1, 0, 0)) == pytest.approx(1.0, abs=1e-15)
        assert j.coeff((3, 0, 0)) == pytest.approx(-1.0 / 6.0, abs=1e-15)
        assert abs(j.coeff((2, 0, 0))) < 1e-15
        assert abs(j.coeff((0, 0, 0))) < 1e-15

    def test_jet_domain_error(self):
        with pytest.raises(DomainError):
            eval_jet(parse("sqrt(x1)"), (0.0, 0, 0))


class TestJetsMatchFiniteDifferences:
    def test_thousand_random_expressions(self, rng):
        checked = 0
        for _ in range(1000):
            e = _random_expr(rng)
            p = rng.uniform(-0.8, 0.8, size=3)
            jet = eval_jet(e, p)
            ref = fd_partials(e, p)
            for alpha, want in ref.items():
                got = jet.derivative(alpha)
                scale = max(1.0, abs(want))
                if abs(want) > 1e-4:  # FD noise floor for tiny derivatives
                    assert abs(got - want) / scale < 1e-6, (to_string(e), alpha)
                    checked += 1
        assert checked > 5000

    def test_each_function_chain_rule(self, rng):
        for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh"):
            inner = parse("0.3*x1 + 0.2*x2*x3 + 1.8")
            e = Func(name, inner)
            p = np.array([0.4, -0.3, 0.25])
            jet = eval_jet(e, p)
            for alpha, want in fd_partials(e, p).items():
                assert jet.derivative(alpha) == pytest.approx(want, rel=2e-7, abs=1e-7)


def _int_jet(rng):
    return Jet3(rng.integers(-4, 5, size=20).astype(float))


class TestRingAxioms:
    def test_commutativity_exact_on_floats(self, rng):
        for _ in range(100):
            a = Jet3(rng.normal(size=20))
            b = Jet3(rng.normal(size=20))
            assert np.array_equal((a * b).coeffs, (b * a).coeffs)

    def test_associativity_exact_on_integer_jets(self, rng):
        for _ in range(200):
            a, b, c = _int_jet(rng), _int_jet(rng), _int_jet(rng)
            assert np.array_equal(((a * b) * c).coeffs, (a * (b * c)).coeffs)

    def test_distributivity_exact_on_integer_jets(self, rng):
        for _ in range(200):
            a, b, c = _int_jet(rng), _int_jet(rng), _int_jet(rng)
            lhs = (a * (b + c)).coeffs
            rhs = (a * b + a * c).coeffs
            assert np.array_equal(lhs, rhs)

    def test_value_slot_is_function_value(self, rng):
        a, b = Jet3(rng.normal(size=20)), Jet3(rng.normal(size=20))
        assert (a * b).value == a.value * b.value
        assert (a + b).value == a.value + b.value

    def test_division_inverts_multiplication(self, rng):
        for _ in range(50):
            a = Jet3(rng.normal(size=20))
            b = Jet3(rng.normal(size=20) + np.eye(20)[0] * 5.0)
            back = (a * b) / b
            assert np.allclose(back.coeffs, a.coeffs, atol=1e-12)

    def test_integer_powers(self, rng):
        a = Jet3(rng.normal(size=20) + np.eye(20)[0] * 3.0)
        assert np.allclose((a ** 3).coeffs, (a * a * a).coeffs, atol=0)
        assert np.allclose((a ** -2).coeffs, (1.0 / (a * a)).coeffs, atol=1e-14)
        assert (a ** 0).coeffs[0] == 1.0


class TestJetPartial:
    def test_partial_matches_lower_order(self, rng):
        e = parse("exp(0.3*x1)*sin(x2) + x3^3")
        pts = rng.uniform(-0.5, 0.5, size=(5, 3))
        coeffs = jets.eval_jet_many(e, pts)
        for axis in range(3):
            shifted = jets.jet_partial(coeffs, axis)
            v, d1, d2, _ = jets.derivatives_from_jets(shifted)
            _, full_d1, full_d2, full_d3 = jets.derivatives_from_jets(coeffs)
            assert np.allclose(v, full_d1[:, axis], atol=1e-14)
            assert np.allclose(d1, full_d2[:, axis], atol=1e-14)
            assert np.allclose(d2, full_d3[:, axis], atol=1e-13)
