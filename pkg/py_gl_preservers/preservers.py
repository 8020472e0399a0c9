from __future__ import annotations

import logging
from typing import Optional, List, Dict, Any, Sequence, TYPE_CHECKING

from py_gl_preservers import exceptions
from py_gl_preservers.data.models import (
    VerdictKind, MaximalSingularKind, ClassificationTag, PreservationVerdict, PreserverClassification, LineReport,
    AuditReport
)
from py_gl_preservers.fields import FieldSpec
from py_gl_preservers.matrices import (
    Matrix, VEC_CONVENTION, hstack, kron, unvec, commutation_matrix, general_linear_group, gl_order, all_matrices,
    complete_to_basis
)
from py_gl_preservers.subspaces import MatrixSubspace, make_LD, make_LH
from py_gl_preservers.utils import check_budget

if TYPE_CHECKING:
    from py_gl_preservers.workbench import Workbench

logger = logging.getLogger(__name__)

RANDOM_BOUND = 5


class MatEndo:
    """
    A linear endomorphism f of M_n(K), stored as the n^2 x n^2 matrix acting on column-major vectorizations.

    Attributes:
        field (FieldSpec): the field.
        n (int): the matrix size.
        op (Matrix): the matrix with vec(f(M)) = op vec(M).

    """
    __slots__ = ('field', 'n', 'op')

    field: FieldSpec
    n: int
    op: Matrix

    def __init__(self, op: Matrix, n: Optional[int] = None) -> None:
        """
        Initialize the class.

        Args:
            op (Matrix): an n^2 x n^2 matrix.
            n (Optional[int]): the matrix size. (the square root of the size of op)

        """
        if n is None:
            n = int(round(op.rows ** 0.5))

        if op.shape != (n * n, n * n):
            raise exceptions.DimensionMismatch(f'A {op.shape} matrix is not an endomorphism of M_{n}!')

        self.field = op.field
        self.n = n
        self.op = op

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> MatEndo:
        return cls(Matrix.identity(field, n * n), n)

    @classmethod
    def transposition(cls, field: FieldSpec, n: int) -> MatEndo:
        return cls(commutation_matrix(field, n), n)

    @classmethod
    def from_images(cls, images: Sequence[Matrix]) -> MatEndo:
        """Build f from f(E_k), k in vec basis order (E_k has its 1 at row k % n, column k // n)."""
        if not images:
            raise exceptions.DimensionMismatch('An endomorphism needs n^2 images!')

        n = images[0].rows
        if len(images) != n * n:
            raise exceptions.DimensionMismatch(f'{len(images)} images given for an endomorphism of M_{n}!')

        return cls(hstack([image.vec() for image in images]), n)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field: Optional[FieldSpec] = None) -> MatEndo:
        """
        Parse an endomorphism from {"field", "n", "vec": "col-major", "op": rows} or from {"field", "n", "images"}.

        Args:
            data (Dict[str, Any]): the JSON form.
            field (Optional[FieldSpec]): the field to use when the document does not name one. (None)

        Returns:
            MatEndo: the endomorphism.

        """
        if 'field' in data:
            field = FieldSpec.parse(data['field'])

        if data.get('vec', VEC_CONVENTION) != VEC_CONVENTION:
            raise exceptions.PreserverException(f"Only the '{VEC_CONVENTION}' vectorization is supported!")

        if 'op' in data:
            return cls(Matrix.from_dict({'rows': data['op']}, field=field), data.get('n'))

        if 'images' in data:
            return cls.from_images([Matrix.from_dict(image, field=field) for image in data['images']])

        raise exceptions.PreserverException("An endomorphism document needs either 'op' or 'images'!")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'field': str(self.field), 'n': self.n, 'vec': VEC_CONVENTION,
            'op': [[self.field.format(entry) for entry in row] for row in self.op.row_list()]
        }

    def apply(self, matrix: Matrix) -> Matrix:
        return unvec(self.op @ matrix.vec(), self.n)

    def __call__(self, matrix: Matrix) -> Matrix:
        return self.apply(matrix)

    def images(self) -> List[Matrix]:
        return [unvec(column, self.n) for column in self.op.columns()]

    def rank(self) -> int:
        return self.op.rank()

    def is_bijective(self) -> bool:
        return self.rank() == self.n * self.n

    def compose(self, other: MatEndo) -> MatEndo:
        """The endomorphism self after other."""
        return MatEndo(self.op @ other.op, self.n)

    def kernel(self) -> MatrixSubspace:
        return MatrixSubspace(self.field, self.n, [unvec(vector, self.n) for vector in self.op.kernel_basis()])

    def image(self) -> MatrixSubspace:
        return MatrixSubspace(self.field, self.n, [unvec(vector, self.n) for vector in self.op.image_basis()])

    def preimage(self, subspace: MatrixSubspace) -> MatrixSubspace:
        """
        Compute f^-1(W) by solving op x = w jointly over x and w in W, which works for singular f as well.

        Args:
            subspace (MatrixSubspace): the subspace W.

        Returns:
            MatrixSubspace: the preimage.

        """
        size = self.n * self.n
        if not subspace.dim:
            return self.kernel()

        system = hstack([self.op] + [(-matrix).vec() for matrix in subspace.basis])
        matrices = [
            unvec(Matrix.raw(self.field, size, 1, vector.entries[:size]), self.n) for vector in system.kernel_basis()
        ]
        return MatrixSubspace(self.field, self.n, matrices)

    def __eq__(self, other):
        if isinstance(other, MatEndo):
            return self.n == other.n and self.op == other.op

        return False

    def __hash__(self):
        return hash(self.op)

    def __repr__(self):
        return f'MatEndo({self.field}, n={self.n}, rank={self.rank()})'


def _check_invertible(name: str, matrix: Matrix, n: Optional[int] = None) -> None:
    if not matrix.is_square or (n is not None and matrix.rows != n):
        raise exceptions.DimensionMismatch(f'{name} must be a square matrix of size {n}, got {matrix.shape}!')

    if not matrix.is_invertible():
        raise exceptions.SingularInput(f'{name} must be invertible!')


def build_u(p: Matrix, q: Matrix) -> MatEndo:
    """M -> P M Q."""
    _check_invertible('P', p)
    _check_invertible('Q', q, p.rows)
    return MatEndo(kron(q.transpose(), p), p.rows)


def build_v(p: Matrix, q: Matrix) -> MatEndo:
    """M -> P M^t Q."""
    _check_invertible('P', p)
    _check_invertible('Q', q, p.rows)
    return MatEndo(kron(q.transpose(), p) @ commutation_matrix(p.field, p.rows), p.rows)


def build_pinch(subspace: MatrixSubspace, a: Matrix, x: Matrix, twisted: bool = False) -> MatEndo:
    """
    Build the singular endomorphism M -> alpha(M x), or M -> alpha(M^t x) when twisted, where
        alpha(y) = sum_k (A y)_k B_k over the canonical basis B_k of V.

    Args:
        subspace (MatrixSubspace): an n-dimensional subspace V.
        a (Matrix): the invertible coordinate matrix A.
        x (Matrix): a nonzero column vector.
        twisted (bool): transpose M first. (False)

    Returns:
        MatEndo: the pinch map.

    """
    n = subspace.n
    if subspace.dim != n:
        raise exceptions.DimensionMismatch(f'A pinch map needs an {n}-dimensional subspace, got {subspace.dim}!')

    _check_invertible('A', a, n)
    if x.shape != (n, 1):
        raise exceptions.DimensionMismatch(f'X must be a column vector of length {n}, got {x.shape}!')

    if x.is_zero():
        raise exceptions.ZeroVector('A pinch map needs a nonzero vector X!')

    basis = hstack([matrix.vec() for matrix in subspace.basis])
    op = basis @ a @ kron(x.transpose(), Matrix.identity(subspace.field, n))
    if twisted:
        op = op @ commutation_matrix(subspace.field, n)

    return MatEndo(op, n)


def unit_vector(field: FieldSpec, n: int, i: int = 0) -> Matrix:
    return Matrix.basis_vector(field, n, i)


class Preservers:
    """
    Building, testing and classifying GL-preservers.
    """

    def __init__(self, workbench: Workbench) -> None:
        """
        Initialize the class.

        Args:
            workbench (Workbench): the Workbench instance.

        """
        self.workbench = workbench

    def build_u(self, p: Matrix, q: Matrix) -> MatEndo:
        return build_u(p, q)

    def build_v(self, p: Matrix, q: Matrix) -> MatEndo:
        return build_v(p, q)

    def build_pinch(self, subspace: MatrixSubspace, a: Matrix, x: Matrix, twisted: bool = False) -> MatEndo:
        return build_pinch(subspace, a, x, twisted)

    def _gl(self, field: FieldSpec, n: int, budget: Optional[int] = None) -> Sequence[Matrix]:
        budget = budget or self.workbench.budget
        check_budget(gl_order(field.size, n), budget, f'GL_{n}({field})')
        check_budget(field.size ** (n * n), budget, f'Filtering GL_{n}({field})')
        return general_linear_group(field, n)

    def preserves_GL(self, endo: MatEndo, budget: Optional[int] = None,
                     samples: Optional[int] = None) -> PreservationVerdict:
        """
        Test f(GL_n) inside GL_n.

        Args:
            endo (MatEndo): the endomorphism.
            budget (Optional[int]): the enumeration budget. (workbench budget)
            samples (Optional[int]): the number of random invertible matrices over the rationals. (workbench samples)

        Returns:
            PreservationVerdict: ExhaustivePass over GF(p), SampledPass over the rationals, or Refuted with an
                invertible matrix whose image is singular.

        """
        if endo.field.is_finite:
            count = 0
            for matrix in self._gl(endo.field, endo.n, budget):
                count += 1
                if not endo.apply(matrix).det_raw():
                    return PreservationVerdict(kind=VerdictKind.Refuted, count=count, witness=matrix)

            return PreservationVerdict(kind=VerdictKind.ExhaustivePass, count=count)

        rng = self.workbench.rng
        samples = samples if samples is not None else self.workbench.samples
        matrix = Matrix.identity(endo.field, endo.n)
        for count in range(1, samples + 1):
            if not endo.apply(matrix).det_raw():
                return PreservationVerdict(kind=VerdictKind.Refuted, count=count, witness=matrix)

            matrix = Matrix.random_invertible(endo.field, endo.n, rng, RANDOM_BOUND)

        return PreservationVerdict(kind=VerdictKind.SampledPass, count=samples)

    def classify(self, endo: MatEndo, budget: Optional[int] = None,
                 samples: Optional[int] = None) -> PreserverClassification:
        """
        Decompose a GL-preserver as a Frobenius map M -> P M Q, M -> P M^t Q or as a pinch map
            M -> alpha(M X), M -> alpha(M^t X) through a full non-singular subspace.

        Args:
            endo (MatEndo): the endomorphism, n >= 2.
            budget (Optional[int]): the enumeration budget. (workbench budget)
            samples (Optional[int]): the number of random samples over the rationals. (workbench samples)

        Returns:
            PreserverClassification: the classification.

        """
        if endo.n < 2:
            raise exceptions.PreserverException('Only endomorphisms of M_n with n >= 2 are classified!')

        verdict = self.preserves_GL(endo, budget, samples)
        if not verdict.passed:
            return PreserverClassification(
                tag=ClassificationTag.NotPreserver, witness=verdict.witness, preservation=verdict
            )

        if endo.is_bijective():
            return self._classify_bijective(endo, verdict)

        return self._classify_singular(endo, verdict, budget, samples)

    def _inconsistent(self, endo: MatEndo, verdict: PreservationVerdict, stage: str,
                      details: str) -> PreserverClassification:
        if verdict.certified:
            logger.error(f'Certified preserver failed at {stage}: {details}')
            raise exceptions.ClassificationAnomaly(f'A certified preserver failed at {stage}: {details}')

        logger.info(f'Sampled map rejected at {stage}: {details}')
        return PreserverClassification(
            tag=ClassificationTag.NotPreserver, preservation=verdict,
            report={'stage': stage, 'details': details, 'candidate': True}
        )

    def _classify_bijective(self, endo: MatEndo, verdict: PreservationVerdict) -> PreserverClassification:
        field = endo.field
        n = endo.n
        try:
            kind = self.workbench.subspaces.classify_maximal_singular(endo.preimage(make_LD(unit_vector(field, n))))

        except exceptions.NotMaximalSingular as e:
            return self._inconsistent(endo, verdict, 'twist detection', str(e))

        twisted = kind.kind == MaximalSingularKind.Image
        logger.debug(f'Bijective map, preimage of L_D(e1) is of {kind.kind}')
        direct = endo.compose(MatEndo.transposition(field, n)) if twisted else endo
        factors = recover_factors(direct)
        if factors is None:
            return self._inconsistent(endo, verdict, 'factor recovery', 'f(E_ij) is not of the form p_i q_j^t')

        p, q = factors
        scale = p.entries[p.first_nonzero()]
        p = p.scale(field.inv(scale))
        q = q.scale(scale)
        rebuilt = build_v(p, q) if twisted else build_u(p, q)
        if rebuilt != endo:
            return self._inconsistent(endo, verdict, 'reconstruction', 'the recovered factors give another map')

        tag = ClassificationTag.FrobeniusTwisted if twisted else ClassificationTag.FrobeniusDirect
        return PreserverClassification(tag=tag, P=p, Q=q, preservation=verdict)

    def _classify_singular(self, endo: MatEndo, verdict: PreservationVerdict, budget: Optional[int],
                           samples: Optional[int]) -> PreserverClassification:
        field = endo.field
        n = endo.n
        kernel = endo.kernel()
        if kernel.dim != n * n - n:
            return self._inconsistent(endo, verdict, 'kernel', f'the kernel has dimension {kernel.dim}')

        try:
            kind = self.workbench.subspaces.classify_maximal_singular(kernel)

        except exceptions.NotMaximalSingular as e:
            return self._inconsistent(endo, verdict, 'kernel classification', str(e))

        x = kind.vector
        twisted = kind.kind == MaximalSingularKind.Image
        pivot = x.first_nonzero()
        # M_k X = e_k (or M_k^t X = e_k) because X[pivot] = 1.
        images = [
            endo.apply(Matrix.unit(field, n, pivot, k) if twisted else Matrix.unit(field, n, k, pivot))
            for k in range(n)
        ]
        subspace = MatrixSubspace(field, n, images)
        if subspace.dim != n:
            return self._inconsistent(endo, verdict, 'image', f'alpha has rank {subspace.dim}')

        a = hstack([subspace.coordinates(image) for image in images])
        vstatus = self.workbench.subspaces.is_full_nonsingular(subspace, budget, samples)
        rebuilt = build_pinch(subspace, a, x, twisted)
        if rebuilt != endo:
            return self._inconsistent(endo, verdict, 'reconstruction', 'the recovered pinch data give another map')

        details = dict(X=x, A=a, V=subspace, vstatus=vstatus, preservation=verdict)
        if vstatus.kind == VerdictKind.Verified:
            tag = ClassificationTag.PinchTwisted if twisted else ClassificationTag.PinchDirect
            return PreserverClassification(tag=tag, **details)

        if vstatus.kind == VerdictKind.Refuted:
            if verdict.certified:
                raise exceptions.ClassificationAnomaly('A certified preserver factors through a singular subspace!')

            witness = self._pinch_witness(subspace, a, x, twisted, vstatus.witness)
            return PreserverClassification(tag=ClassificationTag.NotPreserver, witness=witness, **details)

        return PreserverClassification(
            tag=ClassificationTag.Unverified, report={'twisted': twisted, 'reason': 'V is not certified'}, **details
        )

    @staticmethod
    def _pinch_witness(subspace: MatrixSubspace, a: Matrix, x: Matrix, twisted: bool,
                       singular: Optional[Matrix]) -> Optional[Matrix]:
        """An invertible M with M X = y (or M^t X = y) where alpha(y) is the singular element."""
        if singular is None or singular.is_zero():
            return None

        y = a.inverse() @ subspace.coordinates(singular)
        witness = complete_to_basis(y) @ complete_to_basis(x).inverse()
        return witness.transpose() if twisted else witness

    def onto_column_audit(self, endo: MatEndo, x: Matrix, certified: bool = False) -> bool:
        """
        Check that M -> f(M) X is onto K^n for a preserver f.

        Args:
            endo (MatEndo): the preserver.
            x (Matrix): a nonzero column vector.
            certified (bool): the caller already knows f passes the exhaustive test. (False)

        Returns:
            bool: True if the induced n x n^2 matrix has rank n.

        """
        if not endo.field.is_finite:
            raise exceptions.PreserverException('The onto-column audit runs over prime fields only!')

        if x.is_zero():
            raise exceptions.ZeroVector('The onto-column audit needs a nonzero vector!')

        if not certified and not self.preserves_GL(endo).certified:
            raise exceptions.PreserverException('The onto-column audit needs a certified preserver!')

        induced = kron(x.transpose(), Matrix.identity(endo.field, endo.n)) @ endo.op
        return induced.rank() == endo.n

    def span_GL_audit(self, n: Optional[int] = None, field: Optional[FieldSpec] = None) -> AuditReport:
        """
        Check that GL_n spans M_n, by rank over small prime fields and through explicit invertible generators:
            E_ij = (I + E_ij) - I for i != j and E_ii = I - (I + E_ij + E_ji - E_ii) + E_ij + E_ji.

        Args:
            n (Optional[int]): the matrix size. (workbench n)
            field (Optional[FieldSpec]): the field. (workbench field)

        Returns:
            AuditReport: the audit report.

        """
        n = n or self.workbench.n
        field = field or self.workbench.field
        report = AuditReport(name='span', field=str(field), n=n)
        if field.is_finite and field.size ** (n * n) <= self.workbench.budget:
            group = general_linear_group(field, n)
            rank = hstack([matrix.vec() for matrix in group]).rank()
            report.details.update({'gl_order': len(group), 'span_dimension': rank})
            if rank != n * n:
                report.add_anomaly(f'GL_{n}({field}) spans a space of dimension {rank} < {n * n}')

        identity = Matrix.identity(field, n)
        checked = 0
        for i in range(n):
            for j in range(n):
                unit = Matrix.unit(field, n, i, j)
                if i != j:
                    shear = identity + unit
                    if not shear.is_invertible() or shear - identity != unit:
                        report.add_anomaly(f'I + E_{i}{j} does not generate E_{i}{j}')

                    checked += 1
                    continue

                if n == 1:
                    if not identity.is_invertible() or identity != unit:
                        report.add_anomaly('I does not generate E_00')

                    checked += 1
                    continue

                k = (i + 1) % n
                upper = Matrix.unit(field, n, i, k)
                lower = Matrix.unit(field, n, k, i)
                middle = identity + upper + lower - unit
                if not middle.is_invertible() or identity - middle + upper + lower != unit:
                    report.add_anomaly(f'E_{i}{i} is not generated through I + E_{i}{k} + E_{k}{i} - E_{i}{i}')

                checked += 1

        report.details['generator_identities'] = checked
        return report

    def preimage_lines(self, endo: MatEndo) -> LineReport:
        """
        Classify the preimages of L_{D_i}, D_i = span(e_i), under a preserver: they all share one type, and the
            lines D'_i they determine span a space of dimension n for bijective maps and 1 for singular ones.

        Args:
            endo (MatEndo): the preserver.

        Returns:
            LineReport: the report.

        """
        field = endo.field
        n = endo.n
        classify = self.workbench.subspaces.classify_maximal_singular
        types = [classify(endo.preimage(make_LD(unit_vector(field, n, i)))) for i in range(n)]
        kinds = {kind.kind for kind in types}
        twisted = kinds == {MaximalSingularKind.Image}
        direct = endo.compose(MatEndo.transposition(field, n)) if twisted else endo
        lines = types if not twisted else [
            classify(direct.preimage(make_LD(unit_vector(field, n, i)))) for i in range(n)
        ]
        p = hstack([kind.vector for kind in lines]).rank()
        bijective = endo.is_bijective()
        passed = len(kinds) == 1 and p == (n if bijective else 1)
        return LineReport(types=types, twisted=twisted, p=p, bijective=bijective, passed=passed)

    def reduction_audit(self, endo: MatEndo, p: Matrix, q: Matrix) -> bool:
        """
        Check that composing a preserver with u_{P,Q} on either side, or with the transposition, gives preservers of
            the same family (bijective or singular).

        Args:
            endo (MatEndo): a preserver.
            p (Matrix): an invertible matrix.
            q (Matrix): an invertible matrix.

        Returns:
            bool: True if all three compositions pass.

        """
        frobenius = build_u(p, q)
        transposition = MatEndo.transposition(endo.field, endo.n)
        rank = endo.rank()
        for composed in (frobenius.compose(endo), endo.compose(frobenius), transposition.compose(endo)):
            if not self.preserves_GL(composed).passed or composed.rank() != rank:
                return False

        return True

    def maps_gl_onto(self, endo: MatEndo) -> bool:
        """f(GL_n) = GL_n, exhaustively over GF(p)."""
        group = self._gl(endo.field, endo.n)
        images = {endo.apply(matrix) for matrix in group}
        return images == set(group)

    def preimage_gl_is_gl(self, endo: MatEndo) -> bool:
        """f^-1(GL_n) = GL_n, exhaustively over GF(p)."""
        group = set(self._gl(endo.field, endo.n))
        return all((endo.apply(matrix).det_raw() != 0) == (matrix in group)
                   for matrix in all_matrices(endo.field, endo.n))

    def first_column_pinch(self, subspace: MatrixSubspace) -> MatEndo:
        """
        Build psi(M) = pi^-1(C_1(M)), where pi sends an element of V to its first column.

        Args:
            subspace (MatrixSubspace): an n-dimensional subspace whose first-column projection is an isomorphism.

        Returns:
            MatEndo: the pinch map.

        """
        n = subspace.n
        if subspace.dim != n:
            raise exceptions.DimensionMismatch(f'The subspace must have dimension {n}, got {subspace.dim}!')

        projection = hstack([matrix.column_at(0) for matrix in subspace.basis])
        if not projection.is_invertible():
            raise exceptions.SingularInput('The first-column projection of the subspace is not an isomorphism!')

        return build_pinch(subspace, projection.inverse(), unit_vector(subspace.field, n))

    def reconstruct(self, classification: PreserverClassification) -> Optional[MatEndo]:
        """Rebuild the map a classification describes, None for NotPreserver."""
        if classification.is_frobenius:
            build = build_v if classification.twisted else build_u
            return build(classification.P, classification.Q)

        if classification.V is not None and classification.tag != ClassificationTag.NotPreserver:
            return build_pinch(classification.V, classification.A, classification.X, classification.twisted)

        return None


def recover_factors(endo: MatEndo) -> Optional[tuple]:
    """
    Read P and Q off a map with f(E_ij) = p_i q_j^t: p_1 q_1^t from f(E_11), then p_i from f(E_i1) and q_j from
        f(E_1j).

    Args:
        endo (MatEndo): the map.

    Returns:
        Optional[tuple]: (P, Q) or None if f(E_11) is not of rank 1.

    """
    field = endo.field
    n = endo.n
    corner = endo.apply(Matrix.unit(field, n, 0, 0))
    if corner.rank() != 1:
        return None

    column = next(j for j in range(n) if any(corner.column_values(j)))
    p1 = corner.column_at(column)
    row = p1.first_nonzero()
    inverse = field.inv(p1.entries[row])
    q1 = Matrix.raw(field, 1, n, [field.mul(value, inverse) for value in corner.row(row)])
    pivot_inverse = field.inv(q1.entries[column])
    columns = [p1] + [
        endo.apply(Matrix.unit(field, n, i, 0)).column_at(column).scale(pivot_inverse) for i in range(1, n)
    ]
    rows = [q1] + [
        Matrix.raw(field, 1, n, [field.mul(value, inverse) for value in endo.apply(Matrix.unit(field, n, 0, j)).row(row)])
        for j in range(1, n)
    ]
    p = hstack(columns)
    q = Matrix.raw(field, n, n, [entry for matrix in rows for entry in matrix.entries])
    if not p.is_invertible() or not q.is_invertible():
        return None

    return p, q
