from __future__ import annotations

import logging
import random
from functools import lru_cache
from typing import List, Tuple, Sequence, Optional, Iterator

from py_gl_preservers import exceptions
from py_gl_preservers.data.types import MapCode
from py_gl_preservers.fields import FieldSpec
from py_gl_preservers.matrices import Matrix, unvec, hstack
from py_gl_preservers.preservers import MatEndo
from py_gl_preservers.utils import check_budget

logger = logging.getLogger(__name__)

CROSS_CHECK_SAMPLES = 10 ** 5


class PackedSpace:
    """
    M_n(GF(q)) with every matrix packed into an integer: the digits of the code in base q are the entries of vec(M).
        Over GF(2) addition is XOR of codes; otherwise it goes through addition and scaling tables. A linear
        endomorphism is packed into the tuple of the codes of f(E_k), k in vec basis order.

    Attributes:
        field (FieldSpec): the prime field.
        n (int): the matrix size.
        q (int): the field size.
        m (int): n^2, the number of digits of a code.
        size (int): q^m, the number of matrices.
        digits (List[Tuple[int, ...]]): the vec entries of every code.
        invertible (bytearray): 1 for the codes of invertible matrices.

    """

    def __init__(self, field: FieldSpec, n: int, budget: int) -> None:
        """
        Initialize the class.

        Args:
            field (FieldSpec): the prime field.
            n (int): the matrix size.
            budget (int): the enumeration budget.

        """
        if not field.is_finite:
            raise exceptions.HarnessException('Packed matrices exist over prime fields only!')

        self.field = field
        self.n = n
        self.q = field.size
        self.m = n * n
        self.size = self.q ** self.m
        check_budget(self.size, budget, f'Packing M_{n}({field})')
        self.powers = [self.q ** k for k in range(self.m)]
        self.digits = []
        for code in range(self.size):
            values = []
            for _ in range(self.m):
                code, digit = divmod(code, self.q)
                values.append(digit)

            self.digits.append(tuple(values))

        self.binary = self.q == 2
        if self.binary:
            self.add_table = None
            self.scale_table = None

        else:
            self.add_table = [
                [self._pack([(x + y) % self.q for x, y in zip(self.digits[a], self.digits[b])])
                 for b in range(self.size)] for a in range(self.size)
            ]
            self.scale_table = [
                [self._pack([c * x % self.q for x in self.digits[a]]) for a in range(self.size)]
                for c in range(self.q)
            ]

        self.invertible = bytearray(1 if self.decode(code).det_raw() else 0 for code in range(self.size))
        logger.debug(f'Packed M_{n}({field}): {self.size} codes, {sum(self.invertible)} invertible')

    def _pack(self, values: Sequence[int]) -> int:
        return sum(value * power for value, power in zip(values, self.powers))

    def encode(self, matrix: Matrix) -> int:
        if matrix.field != self.field or matrix.shape != (self.n, self.n):
            raise exceptions.DimensionMismatch(f'A {matrix.shape} matrix over {matrix.field} is not in this space!')

        return self._pack(matrix.vec().entries)

    def decode(self, code: int) -> Matrix:
        return unvec(Matrix.raw(self.field, self.m, 1, self.digits[code]), self.n)

    def add(self, a: int, b: int) -> int:
        if self.binary:
            return a ^ b

        return self.add_table[a][b]

    def scale(self, c: int, a: int) -> int:
        if self.binary:
            return a if c else 0

        return self.scale_table[c][a]

    def encode_endo(self, endo: MatEndo) -> MapCode:
        return tuple(self._pack(column.entries) for column in endo.op.columns())

    def decode_endo(self, code: MapCode) -> MatEndo:
        return MatEndo(hstack([self.decode(column).vec() for column in code]), self.n)

    def apply(self, code: MapCode, matrix: int) -> int:
        """The code of f(M) = sum_k M_k f(E_k)."""
        total = 0
        for digit, column in zip(self.digits[matrix], code):
            if digit:
                total = self.add(total, self.scale(digit, column))

        return total

    def gl_codes(self) -> List[int]:
        return [code for code in range(self.size) if self.invertible[code]]

    def identity_code(self) -> int:
        return self.encode(Matrix.identity(self.field, self.n))

    def test_order(self, seed: int) -> List[int]:
        """GL_n codes with the identity first and the rest in a fixed pseudorandom order."""
        identity = self.identity_code()
        rest = [code for code in self.gl_codes() if code != identity]
        random.Random(seed).shuffle(rest)
        return [identity] + rest

    def preserves(self, code: MapCode, tests: Sequence[int], early_exit: bool = True) -> Optional[int]:
        """
        Check a packed map on the test matrices.

        Args:
            code (MapCode): the packed map.
            tests (Sequence[int]): the codes of the invertible test matrices.
            early_exit (bool): stop at the first test matrix with a singular image. (True)

        Returns:
            Optional[int]: the first test matrix with a singular image, None if there is none.

        """
        witness = None
        for test in tests:
            if not self.invertible[self.apply(code, test)] and witness is None:
                witness = test
                if early_exit:
                    break

        return witness

    def maps_gl_onto(self, code: MapCode) -> bool:
        gl = set(self.gl_codes())
        return {self.apply(code, matrix) for matrix in gl} == gl

    def preimage_gl_is_gl(self, code: MapCode) -> bool:
        return all(bool(self.invertible[self.apply(code, matrix)]) == bool(self.invertible[matrix])
                   for matrix in range(self.size))

    def maps(self) -> Iterator[MapCode]:
        """Every packed map, in odometer order."""
        code = [0] * self.m
        while True:
            yield tuple(code)
            for k in range(self.m - 1, -1, -1):
                code[k] += 1
                if code[k] < self.size:
                    break

                code[k] = 0

            else:
                return

    def random_map(self, rng: random.Random) -> MapCode:
        return tuple(rng.randrange(self.size) for _ in range(self.m))

    def scan(self, first: int, tests: Sequence[int], early_exit: bool = True) -> Tuple[List[MapCode], int]:
        """
        Scan every map whose first column code is fixed, in odometer order over the remaining columns. Each test
            matrix keeps the partial sum of its image over the columns fixed so far, so moving one digit of the
            odometer updates one column contribution.

        Args:
            first (int): the code of f(E_0).
            tests (Sequence[int]): the codes of the test matrices.
            early_exit (bool): stop testing a map at its first singular image. (True)

        Returns:
            Tuple[List[MapCode], int]: the maps passing every test, and the number of maps scanned.

        """
        digits = [self.digits[test] for test in tests]
        invertible = self.invertible
        add = self.add
        scale = self.scale
        found = []
        last = self.m - 1

        def descend(level: int, partials: List[int], prefix: Tuple[int, ...]) -> None:
            if level == last:
                for code in range(self.size):
                    images = (add(partial, scale(digit[level], code)) for partial, digit in zip(partials, digits))
                    if early_exit:
                        passed = all(invertible[image] for image in images)

                    else:
                        passed = sum(invertible[image] for image in images) == len(digits)

                    if passed:
                        found.append(prefix + (code,))

                return

            for code in range(self.size):
                descend(level + 1, [add(partial, scale(digit[level], code)) for partial, digit in zip(partials, digits)],
                        prefix + (code,))

        start = [scale(digit[0], first) for digit in digits]
        if self.m == 1:
            if all(invertible[image] for image in start):
                found.append((first,))

        else:
            descend(1, start, (first,))

        return found, self.size ** (self.m - 1)

    def cross_check(self, rng: random.Random, samples: int = CROSS_CHECK_SAMPLES) -> List[str]:
        """Compare the invertibility table with the generic determinant, on every code when there are few enough."""
        anomalies = []
        codes = range(self.size) if self.size <= samples else (rng.randrange(self.size) for _ in range(samples))
        for code in codes:
            if bool(self.invertible[code]) != bool(self.decode(code).det_raw()):
                anomalies.append(f'the invertibility table is wrong for code {code}')

        return anomalies


@lru_cache(maxsize=8)
def packed_space(field: FieldSpec, n: int, budget: int) -> PackedSpace:
    return PackedSpace(field, n, budget)
