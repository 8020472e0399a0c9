from fractions import Fraction
from typing import Union, Sequence

# A raw field element: a residue for GF(p), a Fraction for the rationals.
Raw = Union[int, Fraction]
ScalarLike = Union[int, Fraction, str]
VectorLike = Sequence[ScalarLike]
RowsLike = Sequence[Sequence[ScalarLike]]
MapCode = tuple
