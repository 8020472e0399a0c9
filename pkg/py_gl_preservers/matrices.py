from __future__ import annotations

import itertools
import logging
import random
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Optional, List, Tuple, Sequence, Iterator, Union, Dict, Any

import sympy

from py_gl_preservers import exceptions
from py_gl_preservers.data.types import Raw, RowsLike, VectorLike
from py_gl_preservers.fields import FieldSpec, Scalar, Polynomial

logger = logging.getLogger(__name__)

# vec(M) stacks the columns of M: index k of an n x n matrix is the entry (k % n, k // n).
VEC_CONVENTION = 'col-major'


class Matrix:
    """
    A dense, immutable matrix of raw elements of a FieldSpec.

    Attributes:
        field (FieldSpec): the field.
        rows (int): the number of rows.
        cols (int): the number of columns.
        entries (Tuple[Raw, ...]): the entries in row-major order.

    """
    __slots__ = ('field', 'rows', 'cols', 'entries', '_rref', '_hash')

    field: FieldSpec
    rows: int
    cols: int
    entries: Tuple[Raw, ...]

    def __init__(self, field: FieldSpec, rows: int, cols: int, entries: Sequence) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the field.
            rows (int): the number of rows.
            cols (int): the number of columns.
            entries (Sequence): rows * cols values in row-major order (ints, Fractions, texts or Scalars).

        """
        if len(entries) != rows * cols:
            raise exceptions.DimensionMismatch(f'{len(entries)} entries do not fill a {rows}x{cols} matrix!')

        self.field = field
        self.rows = rows
        self.cols = cols
        self.entries = tuple(field.coerce(entry) for entry in entries)
        self._rref = None
        self._hash = None

    @classmethod
    def raw(cls, field: FieldSpec, rows: int, cols: int, entries: Sequence[Raw]) -> Matrix:
        """Build a matrix from entries that are already raw elements of the field."""
        matrix = cls.__new__(cls)
        matrix.field = field
        matrix.rows = rows
        matrix.cols = cols
        matrix.entries = tuple(entries)
        matrix._rref = None
        matrix._hash = None
        return matrix

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: RowsLike) -> Matrix:
        rows = [list(row) for row in rows]
        cols = len(rows[0]) if rows else 0
        if any(len(row) != cols for row in rows):
            raise exceptions.DimensionMismatch('The rows have different lengths!')

        return cls(field, len(rows), cols, [entry for row in rows for entry in row])

    @classmethod
    def column(cls, field: FieldSpec, values: VectorLike) -> Matrix:
        return cls(field, len(values), 1, list(values))

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: Optional[int] = None) -> Matrix:
        cols = rows if cols is None else cols
        return cls.raw(field, rows, cols, [field.zero] * (rows * cols))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> Matrix:
        return cls.raw(field, n, n, [field.one if i == j else field.zero for i in range(n) for j in range(n)])

    @classmethod
    def unit(cls, field: FieldSpec, n: int, i: int, j: int, cols: Optional[int] = None) -> Matrix:
        """The matrix E_{i,j} (0-based) with a single 1 at row i, column j."""
        cols = n if cols is None else cols
        entries = [field.zero] * (n * cols)
        entries[i * cols + j] = field.one
        return cls.raw(field, n, cols, entries)

    @classmethod
    def basis_vector(cls, field: FieldSpec, n: int, i: int) -> Matrix:
        return cls.unit(field, n, i, 0, cols=1)

    @classmethod
    def random(
            cls, field: FieldSpec, rows: int, cols: Optional[int] = None, rng: Optional[random.Random] = None,
            bound: int = 5
    ) -> Matrix:
        rng = rng or random.Random()
        cols = rows if cols is None else cols
        return cls.raw(field, rows, cols, [field.random(rng, bound) for _ in range(rows * cols)])

    @classmethod
    def random_invertible(cls, field: FieldSpec, n: int, rng: Optional[random.Random] = None, bound: int = 5) -> Matrix:
        rng = rng or random.Random()
        while True:
            matrix = cls.random(field, n, n, rng, bound)
            if matrix.is_invertible():
                return matrix

    @classmethod
    def random_nonzero_vector(
            cls, field: FieldSpec, n: int, rng: Optional[random.Random] = None, bound: int = 5
    ) -> Matrix:
        rng = rng or random.Random()
        while True:
            vector = cls.random(field, n, 1, rng, bound)
            if not vector.is_zero():
                return vector

    @classmethod
    def from_dict(cls, data: Dict[str, Any], field: Optional[FieldSpec] = None) -> Matrix:
        """
        Parse a matrix from its JSON form: {"field": "gf:2", "rows": [[...], [...]]}.

        Args:
            data (Dict[str, Any]): the JSON form.
            field (Optional[FieldSpec]): the field to use when the document does not name one. (None)

        Returns:
            Matrix: the matrix.

        """
        if 'field' in data:
            field = FieldSpec.parse(data['field'])

        if field is None:
            raise exceptions.MatrixException('The matrix document does not specify a field!')

        return cls.from_rows(field, [[entry if isinstance(entry, int) else str(entry) for entry in row]
                                     for row in data['rows']])

    def to_dict(self) -> Dict[str, Any]:
        return {'field': str(self.field), 'rows': [[self.field.format(entry) for entry in row] for row in self.row_list()]}

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, index: Tuple[int, int]) -> Raw:
        i, j = index
        return self.entries[i * self.cols + j]

    def scalar(self, i: int, j: int) -> Scalar:
        return Scalar(self.field, self[i, j])

    def row(self, i: int) -> Tuple[Raw, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def row_list(self) -> List[Tuple[Raw, ...]]:
        return [self.row(i) for i in range(self.rows)]

    def column_values(self, j: int) -> Tuple[Raw, ...]:
        return self.entries[j::self.cols]

    def column_at(self, j: int) -> Matrix:
        return Matrix.raw(self.field, self.rows, 1, self.column_values(j))

    def columns(self) -> List[Matrix]:
        return [self.column_at(j) for j in range(self.cols)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def first_nonzero(self) -> Optional[int]:
        """The row-major index of the first nonzero entry."""
        return next((index for index, entry in enumerate(self.entries) if entry), None)

    def normalized(self) -> Matrix:
        """Scale so that the first nonzero entry in row-major order equals 1."""
        index = self.first_nonzero()
        if index is None:
            raise exceptions.ZeroVector('The zero matrix cannot be normalized!')

        return self.scale(self.field.inv(self.entries[index]))

    def _check(self, other: Matrix) -> None:
        if self.field != other.field:
            raise exceptions.FieldMismatch(f'The matrices belong to different fields: {self.field}, {other.field}!')

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise exceptions.DimensionMismatch(f'Cannot add {self.shape} and {other.shape} matrices!')

        add = self.field.add
        return Matrix.raw(self.field, self.rows, self.cols, [add(a, b) for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        neg = self.field.neg
        return Matrix.raw(self.field, self.rows, self.cols, [neg(a) for a in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        self._check(other)
        if self.cols != other.rows:
            raise exceptions.DimensionMismatch(f'Cannot multiply {self.shape} and {other.shape} matrices!')

        modulus = self.field.modulus
        columns = [other.column_values(j) for j in range(other.cols)]
        entries = []
        for i in range(self.rows):
            row = self.row(i)
            for column in columns:
                total = sum(a * b for a, b in zip(row, column) if a and b)
                entries.append(total % modulus if modulus else Fraction(total))

        return Matrix.raw(self.field, self.rows, other.cols, entries)

    def scale(self, factor) -> Matrix:
        factor = self.field.coerce(factor)
        mul = self.field.mul
        return Matrix.raw(self.field, self.rows, self.cols, [mul(factor, a) for a in self.entries])

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return self @ other

        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, exponent: int):
        if not self.is_square:
            raise exceptions.NotSquare('Only square matrices have powers!')

        result = Matrix.identity(self.field, self.rows)
        for _ in range(exponent):
            result = result @ self

        return result

    def transpose(self) -> Matrix:
        return Matrix.raw(self.field, self.cols, self.rows, [
            self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)
        ])

    @property
    def T(self) -> Matrix:
        return self.transpose()

    def __eq__(self, other):
        if isinstance(other, Matrix):
            return self.field == other.field and self.shape == other.shape and self.entries == other.entries

        return False

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.rows, self.cols, self.entries))

        return self._hash

    def __repr__(self):
        return f'Matrix({self.field}, {[list(map(str, row)) for row in self.row_list()]})'

    def __str__(self):
        return '\n'.join(' '.join(self.field.format(entry) for entry in row) for row in self.row_list())

    def rref(self) -> Tuple[Matrix, Tuple[int, ...]]:
        """
        Compute the reduced row echelon form.

        Returns:
            Tuple[Matrix, Tuple[int, ...]]: the unique reduced row echelon form and its pivot columns.

        """
        if self._rref is not None:
            return self._rref

        field = self.field
        modulus = field.modulus
        rows = [list(row) for row in self.row_list()]
        pivots = []
        r = 0
        for c in range(self.cols):
            if r == self.rows:
                break

            pivot = next((i for i in range(r, self.rows) if rows[i][c]), None)
            if pivot is None:
                continue

            rows[r], rows[pivot] = rows[pivot], rows[r]
            inverse = field.inv(rows[r][c])
            if modulus:
                rows[r] = [a * inverse % modulus for a in rows[r]]

            else:
                rows[r] = [a * inverse for a in rows[r]]

            pivot_row = rows[r]
            for i in range(self.rows):
                factor = rows[i][c]
                if i == r or not factor:
                    continue

                if modulus:
                    rows[i] = [(a - factor * b) % modulus for a, b in zip(rows[i], pivot_row)]

                else:
                    rows[i] = [a - factor * b for a, b in zip(rows[i], pivot_row)]

            pivots.append(c)
            r += 1

        self._rref = (Matrix.raw(field, self.rows, self.cols, [a for row in rows for a in row]), tuple(pivots))
        return self._rref

    def rank(self) -> int:
        return len(self.rref()[1])

    def det(self) -> Scalar:
        """
        Compute the determinant: Gaussian elimination over GF(p), Bareiss fraction-free elimination over the rationals.

        Returns:
            Scalar: the determinant.

        """
        if not self.is_square:
            raise exceptions.NotSquare(f'Only square matrices have a determinant, got {self.shape}!')

        return Scalar(self.field, self.det_raw())

    def det_raw(self) -> Raw:
        if not self.is_square:
            raise exceptions.NotSquare(f'Only square matrices have a determinant, got {self.shape}!')

        if self.field.modulus:
            return _det_mod_p(self.row_list(), self.field.modulus)

        return _det_rational(self.row_list())

    def is_invertible(self) -> bool:
        return self.is_square and self.rank() == self.rows

    def inverse(self) -> Matrix:
        if not self.is_square:
            raise exceptions.NotSquare(f'Only square matrices can be inverted, got {self.shape}!')

        augmented = hstack([self, Matrix.identity(self.field, self.rows)])
        reduced, pivots = augmented.rref()
        if pivots[:self.rows] != tuple(range(self.rows)):
            raise exceptions.SingularMatrix('The matrix is singular!')

        return Matrix.raw(self.field, self.rows, self.rows, [
            reduced[i, self.rows + j] for i in range(self.rows) for j in range(self.rows)
        ])

    def kernel_basis(self) -> List[Matrix]:
        """
        Compute the canonical basis of the kernel, one vector per free column of the reduced row echelon form.

        Returns:
            List[Matrix]: column vectors.

        """
        reduced, pivots = self.rref()
        field = self.field
        basis = []
        for free in range(self.cols):
            if free in pivots:
                continue

            vector = [field.zero] * self.cols
            vector[free] = field.one
            for i, pivot in enumerate(pivots):
                vector[pivot] = field.neg(reduced[i, free])

            basis.append(Matrix.raw(field, self.cols, 1, vector))

        return basis

    def image_basis(self) -> List[Matrix]:
        """
        Compute the canonical basis of the column space: the nonzero rows of the reduced row echelon form of the
            transpose.

        Returns:
            List[Matrix]: column vectors.

        """
        reduced, pivots = self.transpose().rref()
        return [Matrix.raw(self.field, self.rows, 1, reduced.row(i)) for i in range(len(pivots))]

    def solve(self, b: Matrix) -> Matrix:
        """
        Solve M x = b, returning the solution with free variables set to zero.

        Args:
            b (Matrix): the right-hand side, with one column per system.

        Returns:
            Matrix: the solution.

        """
        self._check(b)
        if b.rows != self.rows:
            raise exceptions.DimensionMismatch(f'The right-hand side has {b.rows} rows instead of {self.rows}!')

        reduced, pivots = hstack([self, b]).rref()
        if any(pivot >= self.cols for pivot in pivots):
            raise exceptions.NoSolution('The system is inconsistent!')

        entries = [self.field.zero] * (self.cols * b.cols)
        for i, pivot in enumerate(pivots):
            for j in range(b.cols):
                entries[pivot * b.cols + j] = reduced[i, self.cols + j]

        return Matrix.raw(self.field, self.cols, b.cols, entries)

    def vec(self) -> Matrix:
        """Stack the columns into a (rows * cols) x 1 vector."""
        return Matrix.raw(self.field, self.rows * self.cols, 1, [
            self.entries[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)
        ])

    def polynomial_at(self, poly: Polynomial) -> Matrix:
        """Evaluate p(M) by Horner's rule."""
        if poly.field != self.field:
            raise exceptions.FieldMismatch('The polynomial and the matrix belong to different fields!')

        result = Matrix.zeros(self.field, self.rows)
        identity = Matrix.identity(self.field, self.rows)
        for coeff in reversed(poly.coeffs):
            result = result @ self + identity.scale(coeff)

        return result


def _det_mod_p(rows: List[Sequence[int]], modulus: int) -> int:
    rows = [list(row) for row in rows]
    n = len(rows)
    det = 1
    for c in range(n):
        pivot = next((i for i in range(c, n) if rows[i][c]), None)
        if pivot is None:
            return 0

        if pivot != c:
            rows[c], rows[pivot] = rows[pivot], rows[c]
            det = -det

        det = det * rows[c][c] % modulus
        inverse = pow(rows[c][c], -1, modulus)
        for i in range(c + 1, n):
            factor = rows[i][c] * inverse % modulus
            if factor:
                rows[i] = [(a - factor * b) % modulus for a, b in zip(rows[i], rows[c])]

    return det % modulus


def _det_rational(rows: List[Sequence[Fraction]]) -> Fraction:
    scale = Fraction(1)
    integers = []
    for row in rows:
        lcm = reduce(sympy.ilcm, (Fraction(a).denominator for a in row), 1)
        scale *= lcm
        integers.append([int(Fraction(a) * lcm) for a in row])

    return Fraction(bareiss_det(integers)) / scale


def bareiss_det(rows: List[List[int]]) -> int:
    """
    Compute the determinant of an integer matrix by Bareiss fraction-free elimination.

    Args:
        rows (List[List[int]]): the rows.

    Returns:
        int: the determinant.

    """
    rows = [list(row) for row in rows]
    n = len(rows)
    if n == 0:
        return 1

    sign = 1
    previous = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if rows[i][k]), None)
            if swap is None:
                return 0

            rows[k], rows[swap] = rows[swap], rows[k]
            sign = -sign

        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                rows[i][j] = (rows[i][j] * pivot - rows[i][k] * rows[k][j]) // previous

        previous = pivot

    return sign * rows[n - 1][n - 1]


def hstack(matrices: Sequence[Matrix]) -> Matrix:
    first = matrices[0]
    if any(matrix.rows != first.rows for matrix in matrices):
        raise exceptions.DimensionMismatch('Matrices stacked horizontally need the same number of rows!')

    entries = []
    for i in range(first.rows):
        for matrix in matrices:
            entries.extend(matrix.row(i))

    return Matrix.raw(first.field, first.rows, sum(matrix.cols for matrix in matrices), entries)


def vstack(matrices: Sequence[Matrix]) -> Matrix:
    first = matrices[0]
    if any(matrix.cols != first.cols for matrix in matrices):
        raise exceptions.DimensionMismatch('Matrices stacked vertically need the same number of columns!')

    return Matrix.raw(first.field, sum(matrix.rows for matrix in matrices), first.cols, [
        entry for matrix in matrices for entry in matrix.entries
    ])


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return a @ b


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return a + b


def mat_transpose(a: Matrix) -> Matrix:
    return a.transpose()


def mat_scale(a: Matrix, factor) -> Matrix:
    return a.scale(factor)


def det(matrix: Matrix) -> Scalar:
    return matrix.det()


def rank(matrix: Matrix) -> int:
    return matrix.rank()


def rref(matrix: Matrix) -> Tuple[Matrix, Tuple[int, ...]]:
    return matrix.rref()


def inverse(matrix: Matrix) -> Matrix:
    return matrix.inverse()


def kernel_basis(matrix: Matrix) -> List[Matrix]:
    return matrix.kernel_basis()


def image_basis(matrix: Matrix) -> List[Matrix]:
    return matrix.image_basis()


def solve(matrix: Matrix, b: Matrix) -> Matrix:
    return matrix.solve(b)


def vec(matrix: Matrix) -> Matrix:
    return matrix.vec()


def unvec(vector: Union[Matrix, VectorLike], n: int, cols: Optional[int] = None, field: Optional[FieldSpec] = None) -> Matrix:
    """
    Rebuild a matrix from its column-major vectorization.

    Args:
        vector (Union[Matrix, VectorLike]): a column or row vector, or a plain sequence (then 'field' is required).
        n (int): the number of rows.
        cols (Optional[int]): the number of columns. (n)
        field (Optional[FieldSpec]): the field of a plain sequence. (None)

    Returns:
        Matrix: the matrix.

    """
    cols = n if cols is None else cols
    if isinstance(vector, Matrix):
        if 1 not in vector.shape:
            raise exceptions.DimensionMismatch(f'A {vector.shape} matrix is not a vector!')

        field = vector.field
        values = vector.entries

    else:
        if field is None:
            raise exceptions.MatrixException('A field is required to unvec a plain sequence!')

        values = tuple(field.coerce(value) for value in vector)

    if len(values) != n * cols:
        raise exceptions.DimensionMismatch(f'A vector of length {len(values)} cannot be reshaped to {n}x{cols}!')

    return Matrix.raw(field, n, cols, [values[j * n + i] for i in range(n) for j in range(cols)])


def kron(a: Matrix, b: Matrix) -> Matrix:
    """
    Compute the Kronecker product, so that vec(P M Q) = kron(Q^t, P) vec(M).

    Args:
        a (Matrix): the left factor.
        b (Matrix): the right factor.

    Returns:
        Matrix: the (a.rows * b.rows) x (a.cols * b.cols) product.

    """
    a._check(b)
    mul = a.field.mul
    entries = []
    for i in range(a.rows):
        for k in range(b.rows):
            for j in range(a.cols):
                x = a[i, j]
                entries.extend(mul(x, y) for y in b.row(k))

    return Matrix.raw(a.field, a.rows * b.rows, a.cols * b.cols, entries)


@lru_cache(maxsize=None)
def commutation_matrix(field: FieldSpec, n: int) -> Matrix:
    """
    Build the permutation matrix K with K vec(M) = vec(M^t) for n x n matrices.

    Args:
        field (FieldSpec): the field.
        n (int): the matrix size.

    Returns:
        Matrix: the n^2 x n^2 commutation matrix.

    """
    size = n * n
    entries = [field.zero] * (size * size)
    for k in range(size):
        entries[k * size + (k // n) + n * (k % n)] = field.one

    return Matrix.raw(field, size, size, entries)


def companion_matrix(poly: Polynomial) -> Matrix:
    """
    Build the companion matrix with ones on the subdiagonal and the negated coefficients of the monic polynomial in
        the last column; for x^3 - 2 that is [[0, 0, 2], [1, 0, 0], [0, 1, 0]].

    Args:
        poly (Polynomial): a polynomial of degree at least 1.

    Returns:
        Matrix: the companion matrix, whose minimal polynomial is the monic polynomial.

    """
    if poly.degree < 1:
        raise exceptions.DegreeZero('A companion matrix needs a polynomial of degree at least 1!')

    monic = poly.monic()
    field = poly.field
    n = monic.degree
    entries = [field.zero] * (n * n)
    for i in range(1, n):
        entries[i * n + i - 1] = field.one

    for i in range(n):
        entries[i * n + n - 1] = field.neg(monic.coeffs[i])

    return Matrix.raw(field, n, n, entries)


def all_matrices(field: FieldSpec, rows: int, cols: Optional[int] = None) -> Iterator[Matrix]:
    cols = rows if cols is None else cols
    for entries in itertools.product(field.elements(), repeat=rows * cols):
        yield Matrix.raw(field, rows, cols, entries)


def all_nonzero_vectors(field: FieldSpec, n: int, normalized: bool = False) -> Iterator[Matrix]:
    """
    Iterate over the nonzero column vectors of GF(p)^n.

    Args:
        field (FieldSpec): the prime field.
        n (int): the length.
        normalized (bool): only yield vectors whose first nonzero coordinate is 1, one per line. (False)

    Returns:
        Iterator[Matrix]: the vectors.

    """
    for entries in itertools.product(field.elements(), repeat=n):
        if not any(entries):
            continue

        if normalized and next(entry for entry in entries if entry) != 1:
            continue

        yield Matrix.raw(field, n, 1, entries)


def gl_order(q: int, n: int) -> int:
    """The order of GL_n(GF(q)), the product of q^n - q^i for i < n."""
    order = 1
    for i in range(n):
        order *= q ** n - q ** i

    return order


@lru_cache(maxsize=32)
def general_linear_group(field: FieldSpec, n: int) -> Tuple[Matrix, ...]:
    """
    List GL_n(GF(p)), identity first and then the remaining invertible matrices in lexicographic order.

    Args:
        field (FieldSpec): the prime field.
        n (int): the matrix size.

    Returns:
        Tuple[Matrix, ...]: the invertible matrices.

    """
    identity = Matrix.identity(field, n)
    group = [identity]
    for matrix in all_matrices(field, n):
        if matrix != identity and matrix.is_invertible():
            group.append(matrix)

    logger.debug(f'GL_{n}({field}) has {len(group)} elements')
    return tuple(group)


def complete_to_basis(vector: Matrix) -> Matrix:
    """
    Build an invertible matrix whose first column is the given nonzero vector, completing it with standard basis
        vectors.

    Args:
        vector (Matrix): a nonzero column vector.

    Returns:
        Matrix: the invertible matrix.

    """
    if vector.is_zero():
        raise exceptions.ZeroVector('The zero vector cannot be completed to a basis!')

    n = vector.rows
    columns = [vector]
    for i in range(n):
        candidate = Matrix.basis_vector(vector.field, n, i)
        if hstack(columns + [candidate]).rank() == len(columns) + 1:
            columns.append(candidate)

        if len(columns) == n:
            break

    return hstack(columns)
