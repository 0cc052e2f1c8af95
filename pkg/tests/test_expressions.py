import math
import random

import numpy as np
import pytest

from saddlekit.expressions import (
    EvalDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
    evaluate,
    evaluate_dual,
    parse,
)

ARCTAN_NUMERATOR = "x*(1+atan(x)^2)/(4+pi^2)"


def test_eval_basic_values():
    e = parse(ARCTAN_NUMERATOR)
    assert evaluate(e, x=0.0) == 0.0
    # frozen from independent evaluation of (1+(pi/4)^2)/(4+pi^2)
    assert evaluate(e, x=1.0) == pytest.approx(0.11657508233912518, abs=1e-15)
    assert evaluate(parse("y/3"), x=0.0, y=3.0) == 1.0
    c = parse("7")
    assert evaluate(c) == 7.0
    assert c.free_variables == frozenset()


def test_named_constants_and_variables():
    assert evaluate(parse("pi")) == math.pi
    assert evaluate(parse("e")) == math.e
    assert evaluate(parse("t"), t=2.5) == 2.5
    assert parse("x*y + t").free_variables == {"x", "y", "t"}


def test_dual_polynomial_example():
    d = evaluate_dual(parse("2*x*(1+y^2)"), x=1.0, y=1.0)
    assert d.v == pytest.approx(4.0, abs=1e-15)
    assert d.dx == pytest.approx(4.0, abs=1e-15)
    assert d.dy == pytest.approx(4.0, abs=1e-15)


def test_dual_arctan_derivative_at_origin():
    d = evaluate_dual(parse(ARCTAN_NUMERATOR), x=0.0)
    exact = 1.0 / (4.0 + math.pi**2)  # = 0.07210010978550024
    assert d.v == 0.0
    assert d.dx == pytest.approx(exact, abs=1e-15)
    assert d.dy == 0.0
    # cross-check against central finite differences
    e = parse(ARCTAN_NUMERATOR)
    h = 1e-6
    fd = (evaluate(e, x=h) - evaluate(e, x=-h)) / (2 * h)
    assert d.dx == pytest.approx(fd, abs=1e-10)


def test_syntax_error_offset_and_expected():
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse("2*x*(1+y^2")
    assert exc.value.offset == 10
    assert ")" in exc.value.expected


def test_unknown_identifier_rejected():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("x + frob(y)")
    assert exc.value.name == "frob"
    assert exc.value.offset == 4
    for bad in ("z", "sinh(x)", "x + q*y", "foo"):
        with pytest.raises(UnknownIdentifierError):
            parse(bad)


def test_trailing_and_malformed_input():
    with pytest.raises(ExpressionSyntaxError):
        parse("1 + ")
    with pytest.raises(ExpressionSyntaxError):
        parse("x 2")
    with pytest.raises(ExpressionSyntaxError):
        parse("(x")
    with pytest.raises(ExpressionSyntaxError):
        parse("x @ y")


def test_domain_errors_located():
    with pytest.raises(EvalDomainError) as exc:
        evaluate(parse("1 + ln(0-1)"), x=0.0)
    assert exc.value.offset == 4
    with pytest.raises(EvalDomainError):
        evaluate(parse("sqrt(0-4)"))
    with pytest.raises(EvalDomainError):
        evaluate(parse("(0-8)^0.5"))
    # 0/0 is diagnosable; 1/0 follows IEEE and yields inf
    with pytest.raises(EvalDomainError):
        evaluate(parse("(x-x)/(x-x)"), x=1.0)
    assert math.isinf(evaluate(parse("1/(x-x)"), x=1.0))


def test_power_is_right_associative_and_unary_minus_binds_loosely():
    assert evaluate(parse("2^3^2")) == 512.0  # 2^(3^2)
    assert evaluate(parse("(2^3)^2")) == 64.0
    assert evaluate(parse("-x^2"), x=3.0) == -9.0
    assert evaluate(parse("(-x)^2"), x=3.0) == 9.0
    assert evaluate(parse("2^-1")) == 0.5


def test_pretty_roundtrip_targeted_shapes():
    for src in (
        "x-(y-1)",
        "x-y-1",
        "x/(y/2)",
        "x/y/2",
        "x^y^2",
        "(x^y)^2",
        "-x^2",
        "(-x)^2",
        "2*(3+x)",
        "-(x+y)",
        "sin(x)*cos(y)+atan(t)",
        ARCTAN_NUMERATOR,
    ):
        first = parse(src)
        second = parse(first.pretty())
        assert first.equivalent_tree(second), src


def _random_source(rng: random.Random, depth: int) -> str:
    """Generate a formula from a small grammar with explicit parentheses."""
    if depth <= 0:
        leaf = rng.randrange(5)
        if leaf == 0:
            return format(rng.uniform(-3.0, 3.0), ".4f")
        if leaf == 1:
            return "pi" if rng.random() < 0.5 else "e"
        return rng.choice(("x", "y", "t"))
    kind = rng.randrange(8)
    if kind < 4:
        op = rng.choice(("+", "-", "*", "/"))
        a = _random_source(rng, depth - 1)
        b = _random_source(rng, depth - 1)
        if op == "/":
            b = f"({b})^2+0.5"  # keep the denominator away from zero
        return f"({a}){op}({b})"
    if kind == 4:
        return f"-({_random_source(rng, depth - 1)})"
    if kind == 5:
        return f"({_random_source(rng, depth - 1)})^{rng.choice((2, 3))}"
    fn = rng.choice(("sin", "cos", "atan", "exp", "sqrt", "abs", "tan", "ln"))
    inner = _random_source(rng, depth - 1)
    if fn == "exp":
        inner = f"sin({inner})"  # bounded argument
    elif fn in ("sqrt", "ln"):
        inner = f"abs({inner})+0.5"
    return f"{fn}({inner})"


def test_roundtrip_and_dual_vs_finite_difference_on_random_expressions():
    rng = random.Random(20260814)
    checked = 0
    attempts = 0
    while checked < 1000:
        attempts += 1
        assert attempts < 8000, "generator grammar produced too few usable cases"
        src = _random_source(rng, rng.randrange(1, 4))
        e = parse(src)

        # round-trip stability
        again = parse(e.pretty())
        assert e.equivalent_tree(again), src

        x = rng.uniform(-2.0, 2.0)
        y = rng.uniform(-2.0, 2.0)
        t = rng.uniform(-2.0, 2.0)
        try:
            d = evaluate_dual(e, x, y, t)
        except EvalDomainError:
            continue
        if not all(map(math.isfinite, (d.v, d.dx, d.dy))):
            continue
        if max(abs(d.dx), abs(d.dy)) > 1e5 or abs(d.v) > 1e8:
            continue  # finite differences are unreliable out here

        h = 1e-6
        try:
            fx = (evaluate(e, x + h, y, t) - evaluate(e, x - h, y, t)) / (2 * h)
            fy = (evaluate(e, x, y + h, t) - evaluate(e, x, y - h, t)) / (2 * h)
        except EvalDomainError:
            continue
        if not (math.isfinite(fx) and math.isfinite(fy)):
            continue
        assert abs(d.dx - fx) <= 1e-5 * (1.0 + abs(d.dx)), src
        assert abs(d.dy - fy) <= 1e-5 * (1.0 + abs(d.dy)), src
        checked += 1


def test_vectorized_evaluation_matches_scalar():
    e = parse(ARCTAN_NUMERATOR)
    xs = np.linspace(-2, 2, 41)
    vec = e(xs, 0.0, 0.0)
    for xi, vi in zip(xs, vec):
        assert vi == pytest.approx(evaluate(e, float(xi)), abs=1e-15)


def test_evaluation_is_deterministic():
    e = parse("sin(x)*exp(y/3)+t^2")
    a = evaluate(e, 0.3, -1.2, 0.7)
    b = evaluate(e, 0.3, -1.2, 0.7)
    assert a == b
    d1 = evaluate_dual(e, 0.3, -1.2, 0.7)
    d2 = evaluate_dual(e, 0.3, -1.2, 0.7)
    assert (d1.v, d1.dx, d1.dy) == (d2.v, d2.dx, d2.dy)
