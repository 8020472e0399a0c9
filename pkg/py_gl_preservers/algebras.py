from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional, List, Dict, Any, Sequence, Union, TYPE_CHECKING

from pretty_utils.type_functions.classes import AutoRepr

from py_gl_preservers import exceptions
from py_gl_preservers.data.models import (
    VerdictKind, CertificateKind, NonSingularityCertificate, DivisionVerdict, CayleyTable, DefaultTables, dump
)
from py_gl_preservers.data.types import Raw, VectorLike
from py_gl_preservers.fields import FieldSpec, Polynomial, poly_is_irreducible
from py_gl_preservers.matrices import Matrix, companion_matrix, hstack, all_nonzero_vectors
from py_gl_preservers.polynomials import sum_of_squares
from py_gl_preservers.subspaces import MatrixSubspace, certificate_from_dict
from py_gl_preservers.utils import check_budget

if TYPE_CHECKING:
    from py_gl_preservers.workbench import Workbench

logger = logging.getLogger(__name__)


class PresetName:
    """
    An instance with the names of the shipped algebras.
    """
    Companion: str = 'companion'
    GaussianPair: str = 'gaussian_pair'
    HamiltonQuaternions: str = 'hamilton_quaternions'
    Octonions: str = 'octonions'

    All = (Companion, GaussianPair, HamiltonQuaternions, Octonions)


class DivisionAlgebraSpec(AutoRepr):
    """
    A bilinear product on K^n given by structure constants: (x * y)_k = sum_ij c[i][j][k] x_i y_j.

    Attributes:
        field (FieldSpec): the field.
        n (int): the dimension.
        c (tuple): the n x n x n structure constants as raw field elements.
        certificate (Optional[NonSingularityCertificate]): a proof that every nonzero left multiplication is
            invertible, if known.
        name (Optional[str]): the preset name.

    """
    field: FieldSpec
    n: int
    c: tuple
    certificate: Optional[NonSingularityCertificate]
    name: Optional[str]

    def __init__(
            self, field: FieldSpec, c: Sequence, certificate: Optional[NonSingularityCertificate] = None,
            name: Optional[str] = None
    ) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the field.
            c (Sequence): the n x n x n structure constants.
            certificate (Optional[NonSingularityCertificate]): a proof of the division property. (None)
            name (Optional[str]): the preset name. (None)

        """
        n = len(c)
        if any(len(plane) != n or any(len(line) != n for line in plane) for plane in c):
            raise exceptions.DimensionMismatch('The structure constants must form an n x n x n array!')

        self.field = field
        self.n = n
        self.c = tuple(tuple(tuple(field.coerce(value) for value in line) for line in plane) for plane in c)
        self.certificate = certificate
        self.name = name

    @classmethod
    def from_table(cls, field: FieldSpec, table: CayleyTable) -> DivisionAlgebraSpec:
        """
        Build a unital algebra from oriented triples of imaginary units: e_0 is the unit, e_i e_i = -e_0, and each
            triple (a, b, c) gives e_a e_b = e_c, e_b e_c = e_a, e_c e_a = e_b with the reversed products negated.

        Args:
            field (FieldSpec): the field.
            table (CayleyTable): the multiplication table.

        Returns:
            DivisionAlgebraSpec: the algebra.

        """
        n = table.dimension
        c = [[[0] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            c[0][i][i] = 1
            c[i][0][i] = 1

        for i in range(1, n):
            c[i][i][0] = -1

        for a, b, d in table.triples:
            for x, y, z in ((a, b, d), (b, d, a), (d, a, b)):
                c[x][y][z] = 1
                c[y][x][z] = -1

        return cls(field, c, name=table.name)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field: Optional[FieldSpec] = None) -> DivisionAlgebraSpec:
        if 'field' in data:
            field = FieldSpec.parse(data['field'])

        c = [[[value if isinstance(value, int) else str(value) for value in line] for line in plane]
             for plane in data['c']]
        certificate = certificate_from_dict(data['certificate'], field, len(c)) if 'certificate' in data else None
        algebra = cls(field, c, certificate=certificate, name=data.get('name'))
        if 'n' in data and int(data['n']) != algebra.n:
            raise exceptions.DimensionMismatch(f"The structure constants have dimension {algebra.n}, not {data['n']}!")

        return algebra

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'field': str(self.field), 'n': self.n,
            'c': [[[self.field.format(value) for value in line] for line in plane] for plane in self.c]
        }
        if self.name:
            data['name'] = self.name

        if self.certificate and not self.certificate.is_empty:
            data['certificate'] = dump(self.certificate)

        return data

    def _vector(self, value: Union[Matrix, VectorLike]) -> List[Raw]:
        if isinstance(value, Matrix):
            if value.field != self.field:
                raise exceptions.FieldMismatch(f'A vector over {value.field} cannot act on an algebra over {self.field}!')

            values = list(value.entries)

        else:
            values = [self.field.coerce(item) for item in value]

        if len(values) != self.n:
            raise exceptions.DimensionMismatch(f'A vector of length {len(values)} in an {self.n}-dimensional algebra!')

        return values

    def left_mult(self, a: Union[Matrix, VectorLike]) -> Matrix:
        """The matrix of y -> a * y."""
        a = self._vector(a)
        field = self.field
        entries = []
        for k in range(self.n):
            for j in range(self.n):
                total = field.zero
                for i in range(self.n):
                    if a[i] and self.c[i][j][k]:
                        total = field.add(total, field.mul(self.c[i][j][k], a[i]))

                entries.append(total)

        return Matrix.raw(field, self.n, self.n, entries)

    def right_mult(self, b: Union[Matrix, VectorLike]) -> Matrix:
        """The matrix of x -> x * b."""
        b = self._vector(b)
        field = self.field
        entries = []
        for k in range(self.n):
            for i in range(self.n):
                total = field.zero
                for j in range(self.n):
                    if b[j] and self.c[i][j][k]:
                        total = field.add(total, field.mul(self.c[i][j][k], b[j]))

                entries.append(total)

        return Matrix.raw(field, self.n, self.n, entries)

    def product(self, x: Union[Matrix, VectorLike], y: Union[Matrix, VectorLike]) -> Matrix:
        return self.left_mult(x) @ Matrix.raw(self.field, self.n, 1, self._vector(y))

    def basis_vector(self, i: int) -> Matrix:
        return Matrix.basis_vector(self.field, self.n, i)

    def left_basis(self) -> List[Matrix]:
        return [self.left_mult(self.basis_vector(i)) for i in range(self.n)]

    def __eq__(self, other):
        if isinstance(other, DivisionAlgebraSpec):
            return self.field == other.field and self.c == other.c

        return False

    def __hash__(self):
        return hash((self.field, self.c))


def left_mult(algebra: DivisionAlgebraSpec, a: Union[Matrix, VectorLike]) -> Matrix:
    return algebra.left_mult(a)


def right_mult(algebra: DivisionAlgebraSpec, b: Union[Matrix, VectorLike]) -> Matrix:
    return algebra.right_mult(b)


class Algebras:
    """
    Division tests, presets and the bridge between division algebras and full non-singular subspaces.
    """

    def __init__(self, workbench: Workbench) -> None:
        """
        Initialize the class.

        Args:
            workbench (Workbench): the Workbench instance.

        """
        self.workbench = workbench

    def is_division(self, algebra: DivisionAlgebraSpec, budget: Optional[int] = None,
                    samples: Optional[int] = None) -> DivisionVerdict:
        """
        Decide whether every nonzero left multiplication is invertible, which suffices in finite dimension.

        Args:
            algebra (DivisionAlgebraSpec): the algebra.
            budget (Optional[int]): the enumeration budget. (workbench budget)
            samples (Optional[int]): the number of random elements over the rationals. (workbench samples)

        Returns:
            DivisionVerdict: Division with a certificate, NotDivision with a zero divisor pair, or Unknown.

        """
        field = algebra.field
        if field.is_finite:
            check_budget(field.size ** algebra.n, budget or self.workbench.budget, 'The division scan')
            checked = 0
            for a in all_nonzero_vectors(field, algebra.n):
                checked += 1
                if not algebra.left_mult(a).is_invertible():
                    return self._zero_divisor(algebra, a, checked)

            certificate = NonSingularityCertificate(kind=CertificateKind.FiniteFieldExhaustive, count=checked)
            return DivisionVerdict(kind=VerdictKind.Division, certificate=certificate, samples_tested=checked)

        subspace = MatrixSubspace(field, algebra.n, algebra.left_basis(), certificate=algebra.certificate)
        if subspace.dim < algebra.n:
            # Some nonzero a has left_mult(a) = 0.
            relation = hstack([matrix.vec() for matrix in algebra.left_basis()]).kernel_basis()[0]
            return self._zero_divisor(algebra, relation, 0)

        verdict = self.workbench.subspaces.is_full_nonsingular(subspace, budget, samples)
        if verdict.kind == VerdictKind.Verified:
            return DivisionVerdict(kind=VerdictKind.Division, certificate=verdict.certificate,
                                   samples_tested=verdict.samples_tested)

        if verdict.kind == VerdictKind.Refuted and verdict.witness is not None:
            coordinates = hstack([matrix.vec() for matrix in subspace.generators]).solve(verdict.witness.vec())
            return self._zero_divisor(algebra, coordinates, verdict.samples_tested)

        return DivisionVerdict(kind=VerdictKind.Unknown, samples_tested=verdict.samples_tested)

    @staticmethod
    def _zero_divisor(algebra: DivisionAlgebraSpec, a: Matrix, checked: int) -> DivisionVerdict:
        partner = algebra.left_mult(a).kernel_basis()[0]
        if not algebra.product(a, partner).is_zero():
            raise exceptions.AlgebraException('The zero divisor pair does not multiply to zero!')

        return DivisionVerdict(kind=VerdictKind.NotDivision, witness=a, partner=partner, samples_tested=checked)

    def to_subspace(self, algebra: DivisionAlgebraSpec, override: bool = False) -> MatrixSubspace:
        """
        Map an algebra to the span of its left multiplications.

        Args:
            algebra (DivisionAlgebraSpec): the algebra.
            override (bool): skip the division check. (False)

        Returns:
            MatrixSubspace: the subspace, carrying the algebra's certificate.

        """
        certificate = algebra.certificate
        if not override:
            verdict = self.is_division(algebra)
            if verdict.kind != VerdictKind.Division:
                raise exceptions.AlgebraException(
                    f'The algebra is not a certified division algebra ({verdict.kind}), use the override!'
                )

            certificate = verdict.certificate

        subspace = MatrixSubspace(algebra.field, algebra.n, algebra.left_basis(), certificate=certificate)
        if subspace.dim != algebra.n:
            raise exceptions.DependentBasis(f'The left multiplications span only {subspace.dim} dimensions!')

        return subspace

    def from_subspace(self, subspace: MatrixSubspace) -> DivisionAlgebraSpec:
        """
        Define x * y = (sum_i x_i B_i) y over the generators B_i of an n-dimensional subspace of M_n.

        Args:
            subspace (MatrixSubspace): the subspace.

        Returns:
            DivisionAlgebraSpec: the algebra with c[i][j][k] = (B_i e_j)_k.

        """
        n = subspace.n
        if subspace.dim != n:
            raise exceptions.DimensionMismatch(f'An algebra needs an {n}-dimensional subspace, got {subspace.dim}!')

        c = [[[matrix[k, j] for k in range(n)] for j in range(n)] for matrix in subspace.generators]
        return DivisionAlgebraSpec(subspace.field, c, certificate=subspace.certificate)

    def preset(self, name: str, field: Optional[FieldSpec] = None,
               poly: Optional[Polynomial] = None) -> DivisionAlgebraSpec:
        """
        Build a shipped algebra with the strongest certificate available.

        Args:
            name (str): 'companion', 'gaussian_pair', 'hamilton_quaternions' or 'octonions'.
            field (Optional[FieldSpec]): the field. (workbench field)
            poly (Optional[Polynomial]): the irreducible polynomial of a companion algebra. (None)

        Returns:
            DivisionAlgebraSpec: the algebra.

        """
        field = field or (poly.field if poly else self.workbench.field)
        if name == PresetName.Companion:
            return self._companion(field, poly)

        if name == PresetName.GaussianPair:
            return self._gaussian_pair(field)

        if name in (PresetName.HamiltonQuaternions, PresetName.Octonions):
            if field.is_finite:
                raise exceptions.UnsupportedField(f'{name} is offered over the rationals only!')

            table = DefaultTables.Quaternions if name == PresetName.HamiltonQuaternions else DefaultTables.Octonions
            algebra = DivisionAlgebraSpec.from_table(field, table)
            return self._with_form(algebra, power=table.dimension // 2)

        raise exceptions.AlgebraException(f"Unknown preset '{name}', expected one of {', '.join(PresetName.All)}!")

    def _companion(self, field: FieldSpec, poly: Optional[Polynomial]) -> DivisionAlgebraSpec:
        if poly is None:
            raise exceptions.AlgebraException('The companion preset needs a polynomial!')

        if poly.field != field:
            raise exceptions.FieldMismatch(f'The polynomial is over {poly.field}, not {field}!')

        verdict = poly_is_irreducible(poly)
        if verdict.kind != VerdictKind.Irreducible:
            raise exceptions.NotIrreducible(f'{poly} is not certified irreducible over {field} ({verdict.kind})!')

        generator = companion_matrix(poly)
        powers = [Matrix.identity(field, generator.rows)]
        for _ in range(1, generator.rows):
            powers.append(powers[-1] @ generator)

        certificate = NonSingularityCertificate(
            kind=CertificateKind.IrreduciblePolynomial, poly=poly.monic(), generator=generator
        )
        subspace = MatrixSubspace(field, generator.rows, powers, certificate=certificate)
        algebra = self.from_subspace(subspace)
        algebra.name = PresetName.Companion
        return algebra

    def _gaussian_pair(self, field: FieldSpec) -> DivisionAlgebraSpec:
        if field.is_finite and any(field.mul(x, x) == field.neg(field.one) for x in field.elements()):
            raise exceptions.MinusOneIsSquare(f'-1 is a square in {field}, so x^2 + 1 splits!')

        identity = Matrix.identity(field, 2)
        rotation = Matrix.from_rows(field, [[0, -1], [1, 0]])
        subspace = MatrixSubspace(field, 2, [identity, rotation])
        algebra = self.from_subspace(subspace)
        algebra.name = PresetName.GaussianPair
        if field.is_finite:
            algebra.certificate = self.is_division(algebra).certificate
            return algebra

        return self._with_form(algebra, power=1)

    def _with_form(self, algebra: DivisionAlgebraSpec, power: int) -> DivisionAlgebraSpec:
        """Attach det(left_mult(x)) = (x1^2 + ... + xn^2)^power, verified by expanding the determinant."""
        certificate = NonSingularityCertificate(
            kind=CertificateKind.PositiveDefiniteForm, form=sum_of_squares(algebra.n), power=power, scale=Fraction(1)
        )
        subspace = MatrixSubspace(algebra.field, algebra.n, algebra.left_basis())
        try:
            verified = self.workbench.subspaces.verify_certificate(subspace, certificate)

        except exceptions.BudgetExceeded as e:
            logger.info(f'The {algebra.name} determinant was not expanded: {e}')
            algebra.certificate = NonSingularityCertificate.empty()
            return algebra

        if not verified:
            raise exceptions.AlgebraException(f'The {algebra.name} table does not give det = (sum x_i^2)^{power}!')

        algebra.certificate = certificate
        return algebra
