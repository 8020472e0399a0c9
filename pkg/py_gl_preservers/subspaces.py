from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from typing import Optional, List, Sequence, Iterator, Dict, Any, TYPE_CHECKING

import sympy

from py_gl_preservers import exceptions
from py_gl_preservers.data.models import (
    VerdictKind, CertificateKind, MaximalSingularKind, SingularityVerdict, NonSingularityCertificate,
    FullNonSingularityVerdict, MaximalSingularType, AuditReport
)
from py_gl_preservers.fields import FieldSpec, Polynomial, poly_is_irreducible
from py_gl_preservers.matrices import Matrix, hstack, vstack, kron, unvec, all_nonzero_vectors, general_linear_group
from py_gl_preservers.polynomials import generic_determinant, positive_definite_power, is_positive_definite, \
    matches_form_power, coordinate_symbols
from py_gl_preservers.utils import check_budget, gaussian_binomial

if TYPE_CHECKING:
    from py_gl_preservers.workbench import Workbench

logger = logging.getLogger(__name__)

LATTICE_CAP = 10 ** 5


class MatrixSubspace:
    """
    A linear subspace of M_n(K).

    Attributes:
        field (FieldSpec): the field.
        n (int): the matrix size.
        basis (List[Matrix]): the canonical basis, read off the reduced row echelon form of the vectorized spanning set.
        generators (List[Matrix]): the spanning matrices as given when they are independent, the canonical basis
            otherwise.
        certificate (Optional[NonSingularityCertificate]): a proof of full non-singularity, if known.

    """
    field: FieldSpec
    n: int
    basis: List[Matrix]
    generators: List[Matrix]
    certificate: Optional[NonSingularityCertificate]

    def __init__(
            self, field: FieldSpec, n: int, matrices: Sequence[Matrix],
            certificate: Optional[NonSingularityCertificate] = None
    ) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the field.
            n (int): the matrix size.
            matrices (Sequence[Matrix]): a spanning set of n x n matrices.
            certificate (Optional[NonSingularityCertificate]): a proof of full non-singularity. (None)

        """
        for matrix in matrices:
            if matrix.field != field:
                raise exceptions.FieldMismatch(f'A matrix over {matrix.field} cannot span a subspace over {field}!')

            if matrix.shape != (n, n):
                raise exceptions.DimensionMismatch(f'A {matrix.shape} matrix does not belong to M_{n}!')

        self.field = field
        self.n = n
        if matrices:
            reduced, pivots = vstack([matrix.vec().transpose() for matrix in matrices]).rref()

        else:
            reduced, pivots = Matrix.zeros(field, 0, n * n), ()

        self.pivots = pivots
        self.canonical = Matrix.raw(field, len(pivots), n * n, reduced.entries[:len(pivots) * n * n])
        self.basis = [unvec(Matrix.raw(field, n * n, 1, self.canonical.row(i)), n) for i in range(len(pivots))]
        self.generators = list(matrices) if len(matrices) == len(pivots) else list(self.basis)
        self.certificate = certificate

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field: Optional[FieldSpec] = None) -> MatrixSubspace:
        if 'field' in data:
            field = FieldSpec.parse(data['field'])

        matrices = [Matrix.from_dict(matrix, field=field) for matrix in data['basis']]
        n = int(data['n']) if 'n' in data else matrices[0].rows
        certificate = certificate_from_dict(data['certificate'], field, len(matrices)) if 'certificate' in data else None
        return cls(field, n, matrices, certificate)

    def to_dict(self) -> Dict[str, Any]:
        data = {'field': str(self.field), 'n': self.n, 'basis': [matrix.to_dict() for matrix in self.generators]}
        if self.certificate and not self.certificate.is_empty:
            data['certificate'] = self.certificate.to_dict()

        return data

    @property
    def dim(self) -> int:
        return len(self.basis)

    def with_certificate(self, certificate: Optional[NonSingularityCertificate]) -> MatrixSubspace:
        return MatrixSubspace(self.field, self.n, self.generators, certificate=certificate)

    def _reduce(self, vector: Matrix) -> List:
        """Subtract the canonical rows, leaving zero exactly for members."""
        field = self.field
        values = list(vector.entries)
        for i, pivot in enumerate(self.pivots):
            factor = values[pivot]
            if factor:
                row = self.canonical.row(i)
                values = [field.sub(a, field.mul(factor, b)) for a, b in zip(values, row)]

        return values

    def member(self, matrix: Matrix) -> bool:
        if matrix.shape != (self.n, self.n):
            raise exceptions.DimensionMismatch(f'A {matrix.shape} matrix does not belong to M_{self.n}!')

        return not any(self._reduce(matrix.vec()))

    def __contains__(self, matrix: Matrix) -> bool:
        return self.member(matrix)

    def coordinates(self, matrix: Matrix) -> Matrix:
        """
        Compute the coordinates of a member in the canonical basis.

        Args:
            matrix (Matrix): a member of the subspace.

        Returns:
            Matrix: the dim x 1 coordinate vector.

        """
        if not self.member(matrix):
            raise exceptions.NoSolution('The matrix does not belong to the subspace!')

        vector = matrix.vec()
        return Matrix.raw(self.field, self.dim, 1, [vector.entries[pivot] for pivot in self.pivots])

    def combination(self, coeffs: Sequence, generators: bool = False) -> Matrix:
        """The combination sum c_i B_i of the canonical basis (or of the generators)."""
        matrices = self.generators if generators else self.basis
        if len(coeffs) != len(matrices):
            raise exceptions.DimensionMismatch(f'{len(coeffs)} coefficients for a {len(matrices)}-dimensional space!')

        result = Matrix.zeros(self.field, self.n)
        for coeff, matrix in zip(coeffs, matrices):
            coeff = self.field.coerce(coeff)
            if coeff:
                result = result + matrix.scale(coeff)

        return result

    def nonzero_elements(self) -> Iterator[Matrix]:
        """Iterate over the nonzero elements of a subspace over a prime field."""
        for coeffs in itertools.product(self.field.elements(), repeat=self.dim):
            if any(coeffs):
                yield self.combination(coeffs)

    def sum(self, other: MatrixSubspace) -> MatrixSubspace:
        self._check(other)
        return MatrixSubspace(self.field, self.n, self.basis + other.basis)

    def intersect(self, other: MatrixSubspace) -> MatrixSubspace:
        """
        Intersect two subspaces through the kernel of [V | -W] on their vectorized bases.

        Args:
            other (MatrixSubspace): the other subspace.

        Returns:
            MatrixSubspace: the intersection.

        """
        self._check(other)
        if not self.dim or not other.dim:
            return MatrixSubspace(self.field, self.n, [])

        system = hstack([matrix.vec() for matrix in self.basis] + [(-matrix).vec() for matrix in other.basis])
        matrices = [self.combination(vector.entries[:self.dim]) for vector in system.kernel_basis()]
        return MatrixSubspace(self.field, self.n, matrices)

    def _check(self, other: MatrixSubspace) -> None:
        if self.field != other.field:
            raise exceptions.FieldMismatch(f'The subspaces belong to different fields: {self.field}, {other.field}!')

        if self.n != other.n:
            raise exceptions.DimensionMismatch(f'Cannot combine subspaces of M_{self.n} and M_{other.n}!')

    def __eq__(self, other):
        if isinstance(other, MatrixSubspace):
            return self.field == other.field and self.n == other.n and self.canonical == other.canonical

        return False

    def __hash__(self):
        return hash((self.field, self.n, self.canonical))

    def __repr__(self):
        return f'MatrixSubspace({self.field}, n={self.n}, dim={self.dim})'


def certificate_from_dict(data: Dict[str, Any], field: FieldSpec, variables: int) -> NonSingularityCertificate:
    """
    Parse a non-singularity certificate from its JSON form.

    Args:
        data (Dict[str, Any]): the JSON form.
        field (FieldSpec): the field of the subspace or algebra.
        variables (int): the number of generator coordinates a form is written in.

    Returns:
        NonSingularityCertificate: the certificate, not yet verified.

    """
    certificate = NonSingularityCertificate(kind=data['kind'], count=data.get('count'))
    if data.get('poly') is not None:
        certificate.poly = Polynomial(field, data['poly'])

    if data.get('generator') is not None:
        certificate.generator = Matrix.from_dict(data['generator'], field=field)

    if data.get('form') is not None:
        symbols = coordinate_symbols(variables)
        expression = sympy.sympify(data['form'], locals={str(symbol): symbol for symbol in symbols})
        certificate.form = sympy.Poly(expression, *symbols, domain=sympy.QQ)
        certificate.power = int(data.get('power', 1))
        certificate.scale = Fraction(str(data.get('scale', 1)))

    return certificate


def subspace_from_basis(matrices: Sequence[Matrix], n: Optional[int] = None,
                        field: Optional[FieldSpec] = None) -> MatrixSubspace:
    if matrices:
        field = matrices[0].field
        n = matrices[0].rows

    if field is None or n is None:
        raise exceptions.SubspaceException('An empty spanning set needs an explicit field and size!')

    return MatrixSubspace(field, n, matrices)


def member(subspace: MatrixSubspace, matrix: Matrix) -> bool:
    return subspace.member(matrix)


def make_LD(x: Matrix) -> MatrixSubspace:
    """
    Build L_D = {M : M x = 0}, the kernel-type subspace of the line D = span(x).

    Args:
        x (Matrix): a nonzero column vector.

    Returns:
        MatrixSubspace: the subspace of dimension n^2 - n.

    """
    if x.is_zero():
        raise exceptions.ZeroVector('L_D needs a nonzero vector!')

    n = x.rows
    system = kron(x.transpose(), Matrix.identity(x.field, n))
    return MatrixSubspace(x.field, n, [unvec(vector, n) for vector in system.kernel_basis()])


def make_LH(y: Matrix) -> MatrixSubspace:
    """
    Build L^H = {M : y^t M = 0}, the image-type subspace of the hyperplane H with normal vector y.

    Args:
        y (Matrix): a nonzero column vector.

    Returns:
        MatrixSubspace: the subspace of dimension n^2 - n.

    """
    if y.is_zero():
        raise exceptions.ZeroVector('L^H needs a nonzero normal vector!')

    n = y.rows
    system = kron(Matrix.identity(y.field, n), y.transpose())
    return MatrixSubspace(y.field, n, [unvec(vector, n) for vector in system.kernel_basis()])


def first_column_normal_forms(field: FieldSpec, n: int) -> Iterator[MatrixSubspace]:
    """
    Iterate over the n-dimensional subspaces of M_n(GF(p)) whose first-column projection is an isomorphism,
        each spanned by B_i = [e_i | R_i] for an arbitrary choice of the remaining columns R_i.

    Args:
        field (FieldSpec): the prime field.
        n (int): the matrix size.

    Returns:
        Iterator[MatrixSubspace]: the subspaces.

    """
    tail = n * (n - 1)
    for values in itertools.product(field.elements(), repeat=n * tail):
        matrices = []
        for i in range(n):
            rest = values[i * tail:(i + 1) * tail]
            entries = []
            for row in range(n):
                entries.append(field.one if row == i else field.zero)
                entries.extend(rest[row * (n - 1):(row + 1) * (n - 1)])

            matrices.append(Matrix.raw(field, n, n, entries))

        yield MatrixSubspace(field, n, matrices)


class Subspaces:
    """
    Singularity tests, certificates and the classification of maximal singular subspaces.
    """

    def __init__(self, workbench: Workbench) -> None:
        """
        Initialize the class.

        Args:
            workbench (Workbench): the Workbench instance.

        """
        self.workbench = workbench

    def from_basis(self, matrices: Sequence[Matrix], n: Optional[int] = None) -> MatrixSubspace:
        return subspace_from_basis(matrices, n=n if n is not None else self.workbench.n, field=self.workbench.field)

    def make_LD(self, x: Matrix) -> MatrixSubspace:
        return make_LD(x)

    def make_LH(self, y: Matrix) -> MatrixSubspace:
        return make_LH(y)

    def generic_determinant(self, subspace: MatrixSubspace) -> sympy.Poly:
        """det(x1 B1 + ... + xd Bd) over the generators of a rational subspace."""
        return generic_determinant(subspace.generators, self.workbench.monomial_cap).poly

    def is_singular_subspace(self, subspace: MatrixSubspace, budget: Optional[int] = None) -> SingularityVerdict:
        """
        Decide whether a subspace contains no invertible matrix.

        Args:
            subspace (MatrixSubspace): the subspace.
            budget (Optional[int]): the enumeration budget. (workbench budget)

        Returns:
            SingularityVerdict: Singular, or ContainsInvertible with an invertible element.

        """
        if not subspace.dim:
            return SingularityVerdict(kind=VerdictKind.Singular)

        if subspace.field.is_finite:
            check_budget(subspace.field.size ** subspace.dim, budget or self.workbench.budget, 'The singularity scan')
            checked = 0
            for element in subspace.nonzero_elements():
                checked += 1
                if element.is_invertible():
                    return SingularityVerdict(kind=VerdictKind.ContainsInvertible, witness=element, checked=checked)

            return SingularityVerdict(kind=VerdictKind.Singular, checked=checked)

        expansion = generic_determinant(subspace.basis, self.workbench.monomial_cap)
        if expansion.is_zero:
            return SingularityVerdict(kind=VerdictKind.Singular, checked=expansion.points)

        return SingularityVerdict(
            kind=VerdictKind.ContainsInvertible, witness=expansion.witness, checked=expansion.points
        )

    def is_full_nonsingular(self, subspace: MatrixSubspace, budget: Optional[int] = None,
                            samples: Optional[int] = None) -> FullNonSingularityVerdict:
        """
        Decide whether an n-dimensional subspace has only invertible nonzero elements.

        Over GF(p) the nonzero elements are scanned exhaustively. Over the rationals a verdict is Verified only with
            a certificate, found by verifying an attached one or by detecting a companion structure or a positive
            definite determinant; sampled singular elements refute, anything else stays Unknown.

        Args:
            subspace (MatrixSubspace): the subspace.
            budget (Optional[int]): the enumeration budget. (workbench budget)
            samples (Optional[int]): the number of random combinations tried over the rationals. (workbench samples)

        Returns:
            FullNonSingularityVerdict: the verdict.

        """
        if subspace.dim != subspace.n:
            return FullNonSingularityVerdict(
                kind=VerdictKind.Refuted, reason=f'dimension {subspace.dim} differs from n = {subspace.n}'
            )

        if subspace.field.is_finite:
            return self._scan_nonsingular(subspace, budget or self.workbench.budget)

        if subspace.certificate and not subspace.certificate.is_empty:
            if self.verify_certificate(subspace, subspace.certificate):
                return FullNonSingularityVerdict(kind=VerdictKind.Verified, certificate=subspace.certificate)

            logger.warning(f'The attached {subspace.certificate.kind} certificate does not verify, searching again')

        tested = 0
        try:
            expansion = generic_determinant(subspace.generators, self.workbench.monomial_cap)
            tested += expansion.points
            if expansion.singular_point is not None:
                return FullNonSingularityVerdict(
                    kind=VerdictKind.Refuted, witness=expansion.singular_point, samples_tested=tested
                )

            found = positive_definite_power(expansion.poly)
            if found:
                form, power, scale = found
                certificate = NonSingularityCertificate(
                    kind=CertificateKind.PositiveDefiniteForm, form=form, power=power, scale=scale
                )
                return FullNonSingularityVerdict(kind=VerdictKind.Verified, certificate=certificate,
                                                 samples_tested=tested)

        except exceptions.BudgetExceeded as e:
            logger.info(f'Generic determinant skipped: {e}')

        verdict = self._companion_certificate(subspace)
        if verdict:
            verdict.samples_tested = tested
            return verdict

        rng = self.workbench.rng
        for _ in range(samples if samples is not None else self.workbench.samples):
            coeffs = [subspace.field.random(rng) for _ in range(subspace.dim)]
            if not any(coeffs):
                continue

            tested += 1
            element = subspace.combination(coeffs, generators=True)
            if not element.is_invertible():
                return FullNonSingularityVerdict(kind=VerdictKind.Refuted, witness=element, samples_tested=tested)

        return FullNonSingularityVerdict(kind=VerdictKind.Unknown, samples_tested=tested)

    def _scan_nonsingular(self, subspace: MatrixSubspace, budget: int) -> FullNonSingularityVerdict:
        q = subspace.field.size
        check_budget(q ** subspace.dim, budget, 'The full non-singularity scan')
        checked = 0
        for element in subspace.nonzero_elements():
            checked += 1
            if not element.is_invertible():
                return FullNonSingularityVerdict(kind=VerdictKind.Refuted, witness=element, samples_tested=checked)

        certificate = NonSingularityCertificate(kind=CertificateKind.FiniteFieldExhaustive, count=checked)
        return FullNonSingularityVerdict(kind=VerdictKind.Verified, certificate=certificate, samples_tested=checked)

    def _companion_certificate(self, subspace: MatrixSubspace) -> Optional[FullNonSingularityVerdict]:
        """
        Look for a generator B with V = span(I, B, ..., B^(n-1)). Then V = K[B] is a field exactly when the minimal
            polynomial of B is irreducible, and a reducible one exhibits a singular element g(B) for a factor g.

        Args:
            subspace (MatrixSubspace): an n-dimensional subspace.

        Returns:
            Optional[FullNonSingularityVerdict]: Verified, Refuted, or None when no generator was found.

        """
        n = subspace.n
        identity = Matrix.identity(subspace.field, n)
        if not subspace.member(identity):
            return None

        for generator in subspace.generators + subspace.basis:
            poly = minimal_polynomial_in(subspace, generator)
            if poly is None:
                continue

            verdict = poly_is_irreducible(poly)
            if verdict.kind == VerdictKind.Irreducible:
                certificate = NonSingularityCertificate(
                    kind=CertificateKind.IrreduciblePolynomial, poly=poly, generator=generator
                )
                return FullNonSingularityVerdict(kind=VerdictKind.Verified, certificate=certificate)

            if verdict.kind == VerdictKind.Reducible:
                witness = generator.polynomial_at(verdict.factor)
                return FullNonSingularityVerdict(kind=VerdictKind.Refuted, witness=witness)

        return None

    def verify_certificate(self, subspace: MatrixSubspace, certificate: NonSingularityCertificate) -> bool:
        """
        Check a non-singularity certificate against a subspace.

        Args:
            subspace (MatrixSubspace): the subspace.
            certificate (NonSingularityCertificate): the certificate.

        Returns:
            bool: True if the certificate proves that every nonzero element is invertible.

        """
        if subspace.dim != subspace.n:
            return False

        if certificate.kind == CertificateKind.FiniteFieldExhaustive:
            if not subspace.field.is_finite:
                return False

            verdict = self._scan_nonsingular(subspace, self.workbench.budget)
            return verdict.kind == VerdictKind.Verified and verdict.certificate.count == certificate.count

        if certificate.kind == CertificateKind.IrreduciblePolynomial:
            generator = certificate.generator
            if generator is None or certificate.poly is None or not subspace.member(generator):
                return False

            poly = minimal_polynomial_in(subspace, generator)
            return poly == certificate.poly.monic() and poly_is_irreducible(poly).kind == VerdictKind.Irreducible

        if certificate.kind == CertificateKind.PositiveDefiniteForm:
            if subspace.field.is_finite or certificate.form is None:
                return False

            if not is_positive_definite(certificate.form) or not certificate.scale:
                return False

            expansion = generic_determinant(subspace.generators, self.workbench.monomial_cap)
            return matches_form_power(expansion.poly, certificate.form, certificate.power, certificate.scale)

        return False

    def classify_maximal_singular(self, subspace: MatrixSubspace) -> MaximalSingularType:
        """
        Tell a singular subspace of dimension n^2 - n apart as L_D or L^H.

        With K the common kernel and S the sum of the images of the basis, exactly one of dim K = 1 (kernel type,
            D = K) and dim S = n - 1 (image type, H = S) holds.

        Args:
            subspace (MatrixSubspace): a singular subspace of dimension n^2 - n, n >= 2.

        Returns:
            MaximalSingularType: the type with its normalized vector.

        """
        n = subspace.n
        if n < 2 or subspace.dim != n * n - n:
            raise exceptions.NotMaximalSingular(
                f'A maximal singular subspace of M_{n} has dimension {n * n - n}, got {subspace.dim}!'
            )

        kernel = vstack(subspace.basis).kernel_basis()
        image = hstack(subspace.basis).image_basis()
        kernel_type = len(kernel) == 1 and len(image) == n
        image_type = len(image) == n - 1 and not kernel
        if kernel_type == image_type:
            raise exceptions.NotMaximalSingular(
                f'The subspace has a {len(kernel)}-dimensional common kernel and a {len(image)}-dimensional image sum!'
            )

        if kernel_type:
            return MaximalSingularType(kind=MaximalSingularKind.Kernel, vector=kernel[0].normalized())

        normal = vstack([vector.transpose() for vector in image]).kernel_basis()[0]
        return MaximalSingularType(kind=MaximalSingularKind.Image, vector=normal.normalized())

    def enumerate(self, n: Optional[int] = None, field: Optional[FieldSpec] = None,
                  dim: Optional[int] = None) -> Iterator[MatrixSubspace]:
        """
        Iterate over the subspaces of M_n(GF(p)) through their reduced row echelon forms: every set of pivot columns
            combined with every filling of the free positions.

        Args:
            n (Optional[int]): the matrix size. (workbench n)
            field (Optional[FieldSpec]): the prime field. (workbench field)
            dim (Optional[int]): only this dimension. (all dimensions)

        Returns:
            Iterator[MatrixSubspace]: the subspaces.

        """
        n = n or self.workbench.n
        field = field or self.workbench.field
        if not field.is_finite:
            raise exceptions.SubspaceException('Only subspaces over prime fields can be enumerated!')

        size = n * n
        dims = range(size + 1) if dim is None else [dim]
        check_budget(sum(gaussian_binomial(size, k, field.size) for k in dims), self.workbench.budget,
                     'The subspace enumeration')
        for k in dims:
            for pivots in itertools.combinations(range(size), k):
                free = [(i, j) for i, pivot in enumerate(pivots) for j in range(pivot + 1, size) if j not in pivots]
                for values in itertools.product(field.elements(), repeat=len(free)):
                    rows = [[field.zero] * size for _ in range(k)]
                    for i, pivot in enumerate(pivots):
                        rows[i][pivot] = field.one

                    for (i, j), value in zip(free, values):
                        rows[i][j] = value

                    yield MatrixSubspace(field, n, [unvec(Matrix.raw(field, size, 1, row), n) for row in rows])

    def full_nonsingular_scan(self, n: Optional[int] = None,
                              field: Optional[FieldSpec] = None) -> List[MatrixSubspace]:
        """
        Find every full non-singular subspace of M_n(GF(p)). The first-column projection of such a subspace is an
            isomorphism, so only subspaces in first-column normal form are scanned.

        Args:
            n (Optional[int]): the matrix size. (workbench n)
            field (Optional[FieldSpec]): the prime field. (workbench field)

        Returns:
            List[MatrixSubspace]: the subspaces, each with a FiniteFieldExhaustive certificate.

        """
        n = n or self.workbench.n
        field = field or self.workbench.field
        if not field.is_finite:
            raise exceptions.SubspaceException('Only subspaces over prime fields can be scanned!')

        q = field.size
        check_budget(q ** (n * n * (n - 1)) * q ** n, self.workbench.budget, 'The full non-singular scan')
        found = []
        for subspace in first_column_normal_forms(field, n):
            verdict = self._scan_nonsingular(subspace, self.workbench.budget)
            if verdict.kind == VerdictKind.Verified:
                found.append(subspace.with_certificate(verdict.certificate))

        logger.info(f'{len(found)} full non-singular subspaces of M_{n}({field})')
        return found

    def dieudonne_audit(self, n: Optional[int] = None, field: Optional[FieldSpec] = None) -> AuditReport:
        """
        Check that singular subspaces have dimension at most n^2 - n and that those of that dimension are of exactly
            one of the two types. The whole subspace lattice is scanned when it is small enough, random subspaces
            are sampled otherwise.

        Args:
            n (Optional[int]): the matrix size, at least 2. (workbench n)
            field (Optional[FieldSpec]): the prime field. (workbench field)

        Returns:
            AuditReport: counts per dimension and type, and the anomalies.

        """
        n = n or self.workbench.n
        field = field or self.workbench.field
        if n < 2:
            raise exceptions.SubspaceException('The singular subspace bound is stated for n >= 2!')

        if not field.is_finite:
            raise exceptions.SubspaceException('The audit runs over prime fields only!')

        size = n * n
        q = field.size
        lattice = sum(gaussian_binomial(size, k, q) for k in range(size + 1))
        report = AuditReport(name='dieudonne', field=str(field), n=n)
        invertible = {matrix.vec() for matrix in _invertible_matrices(field, n, self.workbench.budget)}
        if lattice <= LATTICE_CAP:
            subspaces = self.enumerate(n, field)
            report.details['mode'] = 'exhaustive'

        else:
            subspaces = self._random_subspaces(n, field, self.workbench.samples)
            report.details['mode'] = 'sampled'

        per_dimension = {}
        singular_per_dimension = {}
        types = []
        for subspace in subspaces:
            per_dimension[subspace.dim] = per_dimension.get(subspace.dim, 0) + 1
            if any(element.vec() in invertible for element in subspace.nonzero_elements()):
                continue

            singular_per_dimension[subspace.dim] = singular_per_dimension.get(subspace.dim, 0) + 1
            if subspace.dim > size - n:
                report.add_anomaly(f'a singular subspace of dimension {subspace.dim} > {size - n}')

            elif subspace.dim == size - n:
                try:
                    types.append(self.classify_maximal_singular(subspace))

                except exceptions.NotMaximalSingular as e:
                    logger.error(f'Unclassifiable maximal singular subspace: {e}')
                    report.add_anomaly(f'unclassifiable maximal singular subspace: {e}')

        if report.details['mode'] == 'exhaustive':
            expected = {k: gaussian_binomial(size, k, q) for k in range(size + 1)}
            report.details['gaussian_binomials'] = expected
            if per_dimension != expected:
                report.add_anomaly(f'subspace counts {per_dimension} differ from the Gaussian binomials {expected}')

        if report.details['mode'] == 'exhaustive' and len(set(types)) != len(types):
            report.add_anomaly('two maximal singular subspaces share a classification')

        expected_maximal = 2 * (q ** n - 1) // (q - 1)
        if report.details['mode'] == 'exhaustive' and len(types) != expected_maximal:
            report.add_anomaly(f'{len(types)} maximal singular subspaces instead of {expected_maximal}')

        report.details.update({
            'subspaces': sum(per_dimension.values()),
            'per_dimension': per_dimension,
            'singular_per_dimension': singular_per_dimension,
            'max_singular_dimension': max(singular_per_dimension) if singular_per_dimension else 0,
            'maximal_singular': len(types),
            'kernel_type': sum(1 for kind in types if kind.kind == MaximalSingularKind.Kernel),
            'image_type': sum(1 for kind in types if kind.kind == MaximalSingularKind.Image),
            'types': types
        })
        return report

    def _random_subspaces(self, n: int, field: FieldSpec, count: int) -> Iterator[MatrixSubspace]:
        """
        Random subspaces for the sampled audit, in turn: L_D(x) or L_H(x) for a random x, such a subspace plus one
            matrix outside it, and a random span of dimension 1 to n^2 - n + 1.
        """
        rng = self.workbench.rng
        for index in range(count):
            if index % 3 == 2:
                dim = rng.randint(1, n * n - n + 1)
                yield MatrixSubspace(field, n, [Matrix.random(field, n, n, rng) for _ in range(dim)])
                continue

            x = Matrix.random_nonzero_vector(field, n, rng)
            maximal = make_LD(x) if rng.random() < 0.5 else make_LH(x)
            if index % 3 == 0:
                yield maximal
                continue

            extra = Matrix.random(field, n, n, rng)
            while maximal.member(extra):
                extra = Matrix.random(field, n, n, rng)

            yield MatrixSubspace(field, n, list(maximal.generators) + [extra])


def minimal_polynomial_in(subspace: MatrixSubspace, generator: Matrix) -> Optional[Polynomial]:
    """
    Return the minimal polynomial of B when I, B, ..., B^(n-1) form a basis of the subspace, None otherwise.

    Args:
        subspace (MatrixSubspace): an n-dimensional subspace.
        generator (Matrix): the candidate B.

    Returns:
        Optional[Polynomial]: the monic polynomial of degree n annihilating B.

    """
    n = subspace.n
    powers = [Matrix.identity(subspace.field, n)]
    for _ in range(1, n):
        powers.append(powers[-1] @ generator)

    if MatrixSubspace(subspace.field, n, powers) != subspace or len(powers) != subspace.dim:
        return None

    top = powers[-1] @ generator
    try:
        coeffs = hstack([power.vec() for power in powers]).solve(top.vec())

    except exceptions.NoSolution:
        return None

    field = subspace.field
    return Polynomial(field, [field.neg(coeff) for coeff in coeffs.entries] + [field.one])


def _invertible_matrices(field: FieldSpec, n: int, budget: int) -> Iterator[Matrix]:
    check_budget(field.size ** (n * n), budget, 'Listing GL_n')
    return iter(general_linear_group(field, n))


def nonzero_vectors(field: FieldSpec, n: int, normalized: bool = True) -> List[Matrix]:
    return list(all_nonzero_vectors(field, n, normalized=normalized))
