"""Fixture maps shared across test modules."""

from saddlekit.planarmap import MapSpec, Region

R3 = Region(-3.0, 3.0, -3.0, 3.0)
R10 = Region(-10.0, 10.0, -10.0, 10.0)


def linear_saddle():
    return MapSpec("linear-saddle", "2*x", "y/2", "x/2", "2*y")


def coupled_expansion():
    """Expands in x with a y-dependent factor, contracts y by 3; exactly invertible."""
    return MapSpec(
        "coupled-expansion",
        "2*x*(1+y^2)",
        "y/3",
        "x/(2*(1+9*y^2))",
        "3*y",
    )


def twisted_cubic(region=R3):
    """Odd cubic with both multipliers negative at the origin (-1/2, -2)."""
    return MapSpec("twisted-cubic", "-0.5*x^3 - 0.5*x", "-2*y", declared_region=region)


def folded_quartic():
    # the first coordinate folds at |x| = 1 (its maximum is exactly 1/2),
    # which makes this map non-injective on any large region
    body = "(4 + x^2*(1+x^2)^2)"
    return MapSpec(
        "folded-quartic",
        f"2*x*(1+x^2)/{body}",
        f"8*y*(1+x^2)/{body}",
        declared_region=R10,
    )


def arctan_direct():
    """Odd sigmoid-flattened x together with plain doubling in y; multipliers
    at the origin are 1/(4+pi^2) and 2."""
    return MapSpec("arctan-direct", "x*(1+atan(x)^2)/(4+pi^2)", "2*y")


def arctan_twisted():
    return MapSpec("arctan-twisted", "x*(1+atan(x)^2)/(4+pi^2)", "-2*y")


def kinked_two_fixed():
    # two fixed points (+-1, 0) although the sampled spectrum never touches
    # [1, 1.4): the x-derivative jumps across the |x| kink (1.5 vs 0.5)
    return MapSpec("kinked", "x + (abs(x) - 1)/2", "y/2")
