from __future__ import annotations

import logging
from fractions import Fraction
from math import comb, factorial
from typing import Optional, List, Tuple, Dict, Sequence, Iterator

import sympy
from pretty_utils.type_functions.classes import AutoRepr

from py_gl_preservers import exceptions
from py_gl_preservers.fields import Fields
from py_gl_preservers.matrices import Matrix

logger = logging.getLogger(__name__)


def coordinate_symbols(count: int) -> Tuple[sympy.Symbol, ...]:
    """The coordinates x1, ..., x_count of a subspace or an algebra."""
    return tuple(sympy.symbols(f'x1:{count + 1}')) if count else ()


def monomial_count(degree: int, variables: int) -> int:
    """The number of monomials of a given degree in a number of variables."""
    return comb(degree + variables - 1, variables - 1)


def simplex_points(variables: int, degree: int) -> Iterator[Tuple[int, ...]]:
    """
    Iterate over the points s of N^variables with s_1 + ... + s_variables <= degree, lexicographically.

    Args:
        variables (int): the number of coordinates.
        degree (int): the bound on the coordinate sum.

    Returns:
        Iterator[Tuple[int, ...]]: the points.

    """
    if variables == 0:
        yield ()
        return

    for first in range(degree + 1):
        for rest in simplex_points(variables - 1, degree - first):
            yield (first,) + rest


def _binomial_to_monomial(degree: int) -> List[List[Fraction]]:
    """Row k holds the coefficients of binom(s, k) in powers of s, lowest first."""
    rows = []
    falling = [1]
    for k in range(degree + 1):
        rows.append([Fraction(coeff, factorial(k)) for coeff in falling] + [Fraction(0)] * (degree - k))
        shifted = [0] + falling
        falling = [shifted[i] - k * (falling[i] if i < len(falling) else 0) for i in range(len(shifted))]

    return rows


class GenericDeterminant(AutoRepr):
    """
    The generic determinant det(x1 B1 + ... + xd Bd) of a family of square matrices.

    Attributes:
        poly (sympy.Poly): the homogeneous polynomial of degree n over QQ in x1, ..., xd.
        witness (Optional[Matrix]): an invertible combination found while evaluating.
        singular_point (Optional[Matrix]): a nonzero singular combination found while evaluating.
        points (int): the number of evaluation points.

    """
    poly: sympy.Poly
    witness: Optional[Matrix]
    singular_point: Optional[Matrix]
    points: int

    def __init__(
            self, poly: sympy.Poly, witness: Optional[Matrix], singular_point: Optional[Matrix], points: int
    ) -> None:
        self.poly = poly
        self.witness = witness
        self.singular_point = singular_point
        self.points = points

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero


def generic_determinant(basis: Sequence[Matrix], monomial_cap: int) -> GenericDeterminant:
    """
    Expand det(x1 B1 + ... + xd Bd) over the rationals.

    Setting xd = 1 leaves a polynomial of total degree at most n in d - 1 variables, which is determined by its
        values on the lattice points with coordinate sum at most n. Those values are turned into Newton
        coefficients by forward differences, converted to monomials, and homogenized again.

    Args:
        basis (Sequence[Matrix]): d >= 1 square rational matrices of the same size.
        monomial_cap (int): the largest acceptable number of monomials of degree n in d variables.

    Returns:
        GenericDeterminant: the expansion.

    """
    if not basis:
        raise exceptions.SubspaceException('The generic determinant needs at least one matrix!')

    field = basis[0].field
    if field.is_finite:
        raise exceptions.SubspaceException('The generic determinant is expanded over the rationals only!')

    n = basis[0].rows
    d = len(basis)
    monomials = monomial_count(n, d)
    if monomials > monomial_cap:
        raise exceptions.BudgetExceeded(
            f'det of a {d}-dimensional family of {n}x{n} matrices has up to {monomials} monomials, '
            f'the cap is {monomial_cap}!'
        )

    free = d - 1
    values: Dict[Tuple[int, ...], Fraction] = {}
    witness = None
    singular_point = None
    last = basis[-1]
    for point in simplex_points(free, n):
        combination = last
        for coeff, matrix in zip(point, basis):
            if coeff:
                combination = combination + matrix.scale(coeff)

        value = combination.det_raw()
        values[point] = value
        if value and witness is None:
            witness = combination

        elif not value and singular_point is None and not combination.is_zero():
            singular_point = combination

    # Forward differences along each axis turn values into Newton coefficients.
    for axis in range(free):
        table = {}
        for point in values:
            top = point[axis]
            total = Fraction(0)
            for k in range(top + 1):
                shifted = point[:axis] + (k,) + point[axis + 1:]
                term = comb(top, k) * values[shifted]
                total += term if (top - k) % 2 == 0 else -term

            table[point] = total

        values = table

    # Newton basis binom(s, k) to monomials s^j, axis by axis.
    conversion = _binomial_to_monomial(n)
    for axis in range(free):
        table = {}
        for point, coeff in values.items():
            if not coeff:
                continue

            for power, factor in enumerate(conversion[point[axis]][:point[axis] + 1]):
                if factor:
                    target = point[:axis] + (power,) + point[axis + 1:]
                    table[target] = table.get(target, Fraction(0)) + coeff * factor

        values = table

    terms = {}
    for point, coeff in values.items():
        if coeff:
            terms[point + (n - sum(point),)] = sympy.Rational(coeff.numerator, coeff.denominator)

    symbols = coordinate_symbols(d)
    poly = sympy.Poly.from_dict(terms, *symbols, domain=sympy.QQ) if terms else sympy.Poly(0, *symbols,
                                                                                               domain=sympy.QQ)
    logger.debug(f'Generic determinant of {d} matrices of size {n}: {len(terms)} monomials')
    return GenericDeterminant(poly=poly, witness=witness, singular_point=singular_point, points=len(values))


def sum_of_squares(count: int) -> sympy.Poly:
    symbols = coordinate_symbols(count)
    return sympy.Poly(sum(symbol ** 2 for symbol in symbols), *symbols, domain=sympy.QQ)


def gram_matrix(form: sympy.Poly) -> Matrix:
    """
    Build the symmetric matrix G with form(x) = x^t G x.

    Args:
        form (sympy.Poly): a homogeneous quadratic form.

    Returns:
        Matrix: the Gram matrix over the rationals.

    """
    d = len(form.gens)
    entries = [[Fraction(0)] * d for _ in range(d)]
    for monomial, coeff in form.terms():
        coeff = Fraction(int(coeff.p), int(coeff.q))
        indices = [i for i, power in enumerate(monomial) for _ in range(power)]
        if len(indices) != 2:
            raise exceptions.SubspaceException(f'{form.as_expr()} is not a quadratic form!')

        i, j = indices
        if i == j:
            entries[i][i] += coeff

        else:
            entries[i][j] += coeff / 2
            entries[j][i] += coeff / 2

    return Matrix.from_rows(Fields.Q, entries)


def is_positive_definite(form: sympy.Poly) -> bool:
    """Sylvester's criterion: every leading principal minor of the Gram matrix is positive."""
    gram = gram_matrix(form)
    for size in range(1, gram.rows + 1):
        minor = Matrix.from_rows(Fields.Q, [gram.row(i)[:size] for i in range(size)])
        if minor.det_raw() <= 0:
            return False

    return True


def matches_form_power(poly: sympy.Poly, form: sympy.Poly, power: int, scale: Fraction) -> bool:
    """Check det = scale * form^power coefficient by coefficient."""
    if poly.gens != form.gens:
        return False

    expected = form ** power * sympy.Rational(scale.numerator, scale.denominator)
    return (poly - expected).is_zero


def _layer(poly: sympy.Poly, power: int) -> sympy.Poly:
    """The coefficient of x1^power in poly, as a polynomial in the same generators."""
    terms = {(0,) + monomial[1:]: coeff for monomial, coeff in poly.terms() if monomial[0] == power}
    if not terms:
        return sympy.Poly(0, *poly.gens, domain=sympy.QQ)

    return sympy.Poly.from_dict(terms, *poly.gens, domain=sympy.QQ)


def positive_definite_power(poly: sympy.Poly) -> Optional[Tuple[sympy.Poly, int, Fraction]]:
    """
    Write a polynomial as scale * Q^k with Q a positive definite quadratic form, if possible.

    A positive definite Q has a positive x1^2 coefficient, so Q can be taken as x1^2 + x1 L + R. The top three
        layers of scale * Q^k in x1 are scale, k scale L and scale (k R + binom(k, 2) L^2), which give L and R
        without factoring. The candidate is then checked coefficient by coefficient.

    Args:
        poly (sympy.Poly): a homogeneous polynomial over QQ.

    Returns:
        Optional[Tuple[sympy.Poly, int, Fraction]]: (Q, k, scale) or None.

    """
    if poly.is_zero or not poly.is_homogeneous:
        return None

    degree = poly.total_degree()
    if not degree or degree % 2:
        return None

    power = degree // 2
    gens = poly.gens
    leading = _layer(poly, degree)
    if leading.is_zero:
        return None

    lead = leading.LC()
    inverse = sympy.Rational(1) / lead
    linear = _layer(poly, degree - 1) * (inverse / power)
    rest = (_layer(poly, degree - 2) * inverse - linear ** 2 * comb(power, 2)) * sympy.Rational(1, power)
    x1 = sympy.Poly(gens[0], *gens, domain=sympy.QQ)
    form = x1 ** 2 + x1 * linear + rest
    if not is_positive_definite(form):
        return None

    scale = Fraction(int(lead.p), int(lead.q))
    if not matches_form_power(poly, form, power, scale):
        return None

    return form, power, scale
