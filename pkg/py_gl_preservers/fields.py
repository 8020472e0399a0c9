from __future__ import annotations

import itertools
import logging
import random
from fractions import Fraction
from functools import reduce
from typing import Optional, Union, List, Tuple, Iterator, Sequence

import sympy
from pretty_utils.type_functions.classes import AutoRepr

from py_gl_preservers import exceptions
from py_gl_preservers.data.models import FieldKind, IrreducibilityVerdict, VerdictKind
from py_gl_preservers.data.types import Raw

logger = logging.getLogger(__name__)

MAX_MODULUS = 2 ** 31
IRREDUCIBILITY_MAX_DEGREE = 8
IRREDUCIBILITY_MAX_MODULUS = 13
REDUCTION_PRIMES = (2, 3, 5, 7, 11, 13)


def is_prime(number: int) -> bool:
    """
    Check whether a number is prime by trial division.

    Args:
        number (int): the number.

    Returns:
        bool: True if the number is prime.

    """
    if number < 2:
        return False

    if number % 2 == 0:
        return number == 2

    divisor = 3
    while divisor * divisor <= number:
        if number % divisor == 0:
            return False

        divisor += 2

    return True


class FieldSpec(AutoRepr):
    """
    The ground field: a prime field GF(p) or the rationals.

    Raw elements are plain Python values: residues in [0, p) for GF(p), reduced Fractions for the rationals.
    Matrices and polynomials store raw values and delegate arithmetic to their FieldSpec.

    Attributes:
        kind (str): either 'prime-field' or 'rationals'.
        modulus (Optional[int]): the prime modulus, only for prime fields.

    """
    kind: str
    modulus: Optional[int]

    def __init__(self, kind: str, modulus: Optional[int] = None) -> None:
        """
        Initialize the class.

        Args:
            kind (str): either 'prime-field' or 'rationals'.
            modulus (Optional[int]): the prime modulus, only for prime fields. (None)

        """
        if kind == FieldKind.Prime:
            if modulus is not None and int(modulus) > MAX_MODULUS:
                raise exceptions.BoundExceeded(f'The modulus must not exceed 2^31, got {modulus}!')

            if modulus is None or not is_prime(int(modulus)):
                raise exceptions.NotPrime(f'{modulus} is not a prime number!')

            modulus = int(modulus)

        elif kind == FieldKind.Rationals:
            if modulus is not None:
                raise exceptions.FieldException('The rationals take no modulus!')

        else:
            raise exceptions.FieldException(f'Unknown field kind: {kind}')

        self.kind = kind
        self.modulus = modulus

    @classmethod
    def gf(cls, modulus: int) -> FieldSpec:
        return cls(FieldKind.Prime, modulus)

    @classmethod
    def rationals(cls) -> FieldSpec:
        return cls(FieldKind.Rationals)

    @classmethod
    def parse(cls, text: str) -> FieldSpec:
        """
        Parse a field in the 'gf:p' or 'q' text format.

        Args:
            text (str): the text.

        Returns:
            FieldSpec: the field.

        """
        text = text.strip().lower()
        if text in ('q', 'qq', 'rationals'):
            return cls.rationals()

        if text.startswith('gf:'):
            try:
                return cls.gf(int(text[3:]))

            except ValueError:
                pass

        raise exceptions.FieldException(f"Unknown field '{text}', expected 'gf:p' or 'q'!")

    @property
    def is_finite(self) -> bool:
        return self.kind == FieldKind.Prime

    @property
    def size(self) -> Optional[int]:
        return self.modulus

    @property
    def zero(self) -> Raw:
        return 0 if self.is_finite else Fraction(0)

    @property
    def one(self) -> Raw:
        return 1 if self.is_finite else Fraction(1)

    def coerce(self, value) -> Raw:
        """
        Convert an int, Fraction, text or Scalar into a raw element of this field.

        Args:
            value: the value.

        Returns:
            Raw: the raw element.

        """
        if isinstance(value, Scalar):
            if value.field != self:
                raise exceptions.FieldMismatch(f'Cannot use an element of {value.field} in {self}!')

            return value.value

        if isinstance(value, str):
            value = Fraction(value.strip())

        if self.is_finite:
            if isinstance(value, Fraction):
                if value.denominator % self.modulus == 0:
                    raise exceptions.DivisionByZero(f'{value} has no image in {self}!')

                return value.numerator * pow(value.denominator, -1, self.modulus) % self.modulus

            return int(value) % self.modulus

        return Fraction(value)

    def add(self, a: Raw, b: Raw) -> Raw:
        if self.modulus:
            return (a + b) % self.modulus

        return a + b

    def sub(self, a: Raw, b: Raw) -> Raw:
        if self.modulus:
            return (a - b) % self.modulus

        return a - b

    def neg(self, a: Raw) -> Raw:
        if self.modulus:
            return -a % self.modulus

        return -a

    def mul(self, a: Raw, b: Raw) -> Raw:
        if self.modulus:
            return a * b % self.modulus

        return a * b

    def inv(self, a: Raw) -> Raw:
        if not a:
            raise exceptions.DivisionByZero(f'Zero has no inverse in {self}!')

        if self.modulus:
            return pow(a, -1, self.modulus)

        return 1 / a

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def elements(self) -> range:
        if not self.is_finite:
            raise exceptions.FieldException('The rationals cannot be enumerated!')

        return range(self.modulus)

    def random(self, rng: random.Random, bound: int = 5) -> Raw:
        """
        Draw a random element: uniform over GF(p), an integer in [-bound, bound] over the rationals.

        Args:
            rng (random.Random): the random generator.
            bound (int): the integer bound for the rationals. (5)

        Returns:
            Raw: the element.

        """
        if self.is_finite:
            return rng.randrange(self.modulus)

        return Fraction(rng.randint(-bound, bound))

    def format(self, value: Raw) -> str:
        return str(value)

    def __eq__(self, other):
        if isinstance(other, FieldSpec):
            return self.kind == other.kind and self.modulus == other.modulus

        return False

    def __hash__(self):
        return hash((self.kind, self.modulus))

    def __str__(self):
        if self.is_finite:
            return f'gf:{self.modulus}'

        return 'q'


class Fields:
    """
    An instance with the fields used throughout the library.
    """
    GF2 = FieldSpec.gf(2)
    GF3 = FieldSpec.gf(3)
    GF5 = FieldSpec.gf(5)
    GF7 = FieldSpec.gf(7)
    Q = FieldSpec.rationals()


class Scalar(AutoRepr):
    """
    An exact element of a FieldSpec.

    Attributes:
        field (FieldSpec): the field.
        value (Raw): a residue in [0, p) or a reduced Fraction.

    """
    field: FieldSpec
    value: Raw

    def __init__(self, field: FieldSpec, value) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the field.
            value: an int, Fraction, text or Scalar of the same field.

        """
        self.field = field
        self.value = field.coerce(value)

    def _other(self, other) -> Raw:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise exceptions.FieldMismatch(f'The values belong to different fields: {self.field}, {other.field}!')

            return other.value

        if isinstance(other, (int, Fraction)):
            return self.field.coerce(other)

        raise exceptions.FieldException(f"{type(other)} type isn't supported!")

    def __add__(self, other):
        return Scalar(self.field, self.field.add(self.value, self._other(other)))

    def __radd__(self, other):
        return Scalar(self.field, self.field.add(self._other(other), self.value))

    def __sub__(self, other):
        return Scalar(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return Scalar(self.field, self.field.sub(self._other(other), self.value))

    def __mul__(self, other):
        return Scalar(self.field, self.field.mul(self.value, self._other(other)))

    def __rmul__(self, other):
        return Scalar(self.field, self.field.mul(self._other(other), self.value))

    def __truediv__(self, other):
        return Scalar(self.field, self.field.div(self.value, self._other(other)))

    def __rtruediv__(self, other):
        return Scalar(self.field, self.field.div(self._other(other), self.value))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def inverse(self) -> Scalar:
        return Scalar(self.field, self.field.inv(self.value))

    def is_zero(self) -> bool:
        return not self.value

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.field == other.field and self.value == other.value

        if isinstance(other, (int, Fraction)):
            try:
                return self.value == self.field.coerce(other)

            except exceptions.FieldException:
                return False

        return False

    def __hash__(self):
        return hash((self.field, self.value))

    def __str__(self):
        return self.field.format(self.value)


def field_add(a: Scalar, b: Scalar) -> Scalar:
    return a + b


def field_neg(a: Scalar) -> Scalar:
    return -a


def field_mul(a: Scalar, b: Scalar) -> Scalar:
    return a * b


def field_inv(a: Scalar) -> Scalar:
    return a.inverse()


class Polynomial(AutoRepr):
    """
    A univariate polynomial over a FieldSpec.

    Attributes:
        field (FieldSpec): the field.
        coeffs (Tuple[Raw, ...]): raw coefficients, lowest degree first, trailing zeros trimmed.

    """
    field: FieldSpec
    coeffs: Tuple[Raw, ...]

    def __init__(self, field: FieldSpec, coeffs: Sequence) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the field.
            coeffs (Sequence): coefficients, lowest degree first.

        """
        self.field = field
        values = [field.coerce(coeff) for coeff in coeffs]
        while values and not values[-1]:
            values.pop()

        self.coeffs = tuple(values)

    @classmethod
    def parse(cls, field: FieldSpec, text: str) -> Polynomial:
        """
        Parse a polynomial either from an expression in x, e.g. 'x^3 - 2', or from a comma separated coefficient
            list, lowest degree first, e.g. '-2,0,0,1'.

        Args:
            field (FieldSpec): the field.
            text (str): the text.

        Returns:
            Polynomial: the polynomial.

        """
        text = text.strip()
        if ',' in text or 'x' not in text:
            return cls(field, [part for part in text.split(',') if part.strip()])

        x = sympy.Symbol('x')
        expression = sympy.sympify(text.replace('^', '**'), locals={'x': x})
        coeffs = sympy.Poly(expression, x, domain='QQ').all_coeffs()[::-1]
        return cls(field, [Fraction(int(coeff.p), int(coeff.q)) for coeff in coeffs])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Raw:
        return self.coeffs[-1]

    @property
    def coefficients(self) -> List[Scalar]:
        return [Scalar(self.field, coeff) for coeff in self.coeffs]

    def is_zero(self) -> bool:
        return not self.coeffs

    def monic(self) -> Polynomial:
        if self.is_zero():
            raise exceptions.DegreeZero('The zero polynomial cannot be made monic!')

        inverse = self.field.inv(self.lead)
        return Polynomial(self.field, [self.field.mul(coeff, inverse) for coeff in self.coeffs])

    def _check(self, other: Polynomial) -> None:
        if self.field != other.field:
            raise exceptions.FieldMismatch(f'The polynomials belong to different fields: {self.field}, {other.field}!')

    def __add__(self, other):
        self._check(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (self.field.zero,) * (size - len(self.coeffs))
        b = other.coeffs + (self.field.zero,) * (size - len(other.coeffs))
        return Polynomial(self.field, [self.field.add(x, y) for x, y in zip(a, b)])

    def __neg__(self):
        return Polynomial(self.field, [self.field.neg(coeff) for coeff in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        if self.is_zero() or other.is_zero():
            return Polynomial(self.field, [])

        product = [self.field.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue

            for j, b in enumerate(other.coeffs):
                product[i + j] = self.field.add(product[i + j], self.field.mul(a, b))

        return Polynomial(self.field, product)

    def __pow__(self, exponent: int):
        result = Polynomial(self.field, [self.field.one])
        for _ in range(exponent):
            result = result * self

        return result

    def __divmod__(self, other):
        self._check(other)
        if other.is_zero():
            raise exceptions.DivisionByZero('Division by the zero polynomial!')

        remainder = list(self.coeffs)
        quotient = [self.field.zero] * max(len(remainder) - len(other.coeffs) + 1, 0)
        inverse = self.field.inv(other.lead)
        for shift in range(len(quotient) - 1, -1, -1):
            factor = self.field.mul(remainder[shift + other.degree], inverse)
            quotient[shift] = factor
            if not factor:
                continue

            for i, coeff in enumerate(other.coeffs):
                remainder[shift + i] = self.field.sub(remainder[shift + i], self.field.mul(factor, coeff))

        return Polynomial(self.field, quotient), Polynomial(self.field, remainder)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, value: Raw) -> Raw:
        result = self.field.zero
        for coeff in reversed(self.coeffs):
            result = self.field.add(self.field.mul(result, value), coeff)

        return result

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.field == other.field and self.coeffs == other.coeffs

        return False

    def __hash__(self):
        return hash((self.field, self.coeffs))

    def __str__(self):
        if self.is_zero():
            return '0'

        terms = []
        for power in range(self.degree, -1, -1):
            coeff = self.coeffs[power]
            if not coeff:
                continue

            monomial = '' if power == 0 else ('x' if power == 1 else f'x^{power}')
            if monomial and coeff == 1:
                terms.append(monomial)

            elif monomial:
                terms.append(f'{coeff}*{monomial}')

            else:
                terms.append(str(coeff))

        return ' + '.join(terms).replace('+ -', '- ')

    def to_list(self) -> List[str]:
        return [self.field.format(coeff) for coeff in self.coeffs]


def monic_polynomials(field: FieldSpec, degree: int) -> Iterator[Polynomial]:
    """
    Iterate over all monic polynomials of a given degree over a prime field.

    Args:
        field (FieldSpec): the prime field.
        degree (int): the degree.

    Returns:
        Iterator[Polynomial]: the polynomials.

    """
    for lower in itertools.product(field.elements(), repeat=degree):
        yield Polynomial(field, list(lower) + [1])


def _irreducible_over_prime_field(poly: Polynomial) -> IrreducibilityVerdict:
    if poly.degree > IRREDUCIBILITY_MAX_DEGREE or poly.field.modulus > IRREDUCIBILITY_MAX_MODULUS:
        raise exceptions.BoundExceeded(
            f'Irreducibility over {poly.field} is decided by enumeration up to degree {IRREDUCIBILITY_MAX_DEGREE} '
            f'and modulus {IRREDUCIBILITY_MAX_MODULUS}!'
        )

    for degree in range(1, poly.degree // 2 + 1):
        for candidate in monic_polynomials(poly.field, degree):
            if (poly % candidate).is_zero():
                return IrreducibilityVerdict(kind=VerdictKind.Reducible, factor=candidate)

    return IrreducibilityVerdict(kind=VerdictKind.Irreducible)


def _integer_coefficients(poly: Polynomial) -> List[int]:
    denominators = [coeff.denominator for coeff in poly.coeffs]
    lcm = reduce(sympy.ilcm, denominators, 1)
    return [int(coeff * lcm) for coeff in poly.coeffs]


def rational_root(poly: Polynomial) -> Optional[Fraction]:
    """
    Find a rational root of a polynomial over the rationals by the rational root theorem.

    Args:
        poly (Polynomial): the polynomial.

    Returns:
        Optional[Fraction]: a root or None.

    """
    integers = _integer_coefficients(poly)
    if integers[0] == 0:
        return Fraction(0)

    for numerator in sympy.divisors(abs(integers[0])):
        for denominator in sympy.divisors(abs(integers[-1])):
            for sign in (1, -1):
                candidate = Fraction(sign * numerator, denominator)
                if not poly(candidate):
                    return candidate

    return None


def poly_is_irreducible(poly: Polynomial) -> IrreducibilityVerdict:
    """
    Decide whether a polynomial is irreducible.

    Over GF(p) all monic divisors up to half the degree are enumerated. Over the rationals the rational root theorem
        decides degrees 2 and 3; higher degrees are certified irreducible when the reduction modulo a small prime
        not dividing the leading coefficient is irreducible, refuted by a rational root, and Unknown otherwise.

    Args:
        poly (Polynomial): the polynomial.

    Returns:
        IrreducibilityVerdict: the verdict, with a witness factor when reducible.

    """
    if poly.degree < 1:
        raise exceptions.DegreeZero('Irreducibility is defined for polynomials of degree at least 1!')

    if poly.degree == 1:
        return IrreducibilityVerdict(kind=VerdictKind.Irreducible)

    if poly.field.is_finite:
        return _irreducible_over_prime_field(poly)

    root = rational_root(poly)
    if root is not None:
        return IrreducibilityVerdict(kind=VerdictKind.Reducible, factor=Polynomial(poly.field, [-root, 1]))

    if poly.degree <= 3:
        return IrreducibilityVerdict(kind=VerdictKind.Irreducible)

    integers = _integer_coefficients(poly)
    for prime in REDUCTION_PRIMES:
        if integers[-1] % prime == 0 or poly.degree > IRREDUCIBILITY_MAX_DEGREE:
            continue

        reduced = Polynomial(FieldSpec.gf(prime), integers)
        if _irreducible_over_prime_field(reduced).kind == VerdictKind.Irreducible:
            return IrreducibilityVerdict(kind=VerdictKind.Irreducible, note=f'irreducible modulo {prime}')

    logger.info(f'Irreducibility of {poly} over the rationals is undecided')
    return IrreducibilityVerdict(kind=VerdictKind.Unknown)
