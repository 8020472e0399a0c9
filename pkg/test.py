import asyncio
import contextlib
import io
import itertools
import json
import os
import random
import tempfile
import time
from fractions import Fraction
from functools import lru_cache
from unittest import mock

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from py_gl_preservers import exceptions
from py_gl_preservers.algebras import DivisionAlgebraSpec, PresetName
from py_gl_preservers.cli import main as cli_main
from py_gl_preservers.data.models import (
    VerdictKind, CertificateKind, MaximalSingularKind, ClassificationTag, CampaignConfig, EnumerationReport
)
from py_gl_preservers.fields import (
    Fields, FieldSpec, Polynomial, Scalar, field_add, field_neg, field_inv, field_mul, poly_is_irreducible
)
from py_gl_preservers.harness import Harness, scan_partition
from py_gl_preservers.matrices import (
    Matrix, kron, commutation_matrix, companion_matrix, general_linear_group, gl_order, unvec, all_matrices,
    all_nonzero_vectors
)
from py_gl_preservers.packed import PackedSpace
from py_gl_preservers.polynomials import (
    generic_determinant, sum_of_squares, matches_form_power, coordinate_symbols, positive_definite_power
)
from py_gl_preservers.preservers import MatEndo, Preservers, build_u, build_v, build_pinch, unit_vector
from py_gl_preservers.subspaces import MatrixSubspace, make_LD, make_LH
from py_gl_preservers.utils import write_json, read_json, gaussian_binomial
from py_gl_preservers.workbench import Workbench

GF2 = Fields.GF2
GF3 = Fields.GF3
GF5 = Fields.GF5
Q = Fields.Q


def rows(field: FieldSpec, values) -> Matrix:
    return Matrix.from_rows(field, values)


def run_cli(*argv) -> tuple:
    output = io.StringIO()
    with contextlib.redirect_stdout(output):
        code = cli_main(list(argv))

    return code, output.getvalue()


def check_pinch_roundtrip(workbench: Workbench, algebra: DivisionAlgebraSpec, twisted: bool, rng: random.Random):
    """Build a pinch map through the algebra with random A and X, classify it and rebuild it."""
    subspace = workbench.algebras.to_subspace(algebra)
    a = Matrix.random_invertible(subspace.field, subspace.n, rng)
    x = Matrix.random_nonzero_vector(subspace.field, subspace.n, rng)
    endo = build_pinch(subspace, a, x, twisted)
    classification = workbench.preservers.classify(endo)
    assert classification.tag == (ClassificationTag.PinchTwisted if twisted else ClassificationTag.PinchDirect)
    assert classification.X == x.normalized()
    assert classification.V == subspace == endo.image()
    assert workbench.preservers.reconstruct(classification) == endo
    return classification


@lru_cache(maxsize=1)
def gf2_campaign() -> tuple:
    workbench = Workbench(field='gf:2', n=2)
    report = asyncio.run(workbench.harness.enumerate_preservers())
    return workbench, report


class FieldTests:
    @staticmethod
    def test_examples():
        """Arithmetic on the three kinds of fields."""
        print('\n--- test_examples ---')
        assert Fields.GF7.inv(3) == 5
        assert Q.add(Fraction(2, 3), Fraction(1, 6)) == Fraction(5, 6)
        assert GF2.add(1, 1) == 0
        assert Scalar(Q, '2/3') + Scalar(Q, '1/6') == Scalar(Q, '5/6')

    @staticmethod
    def test_errors():
        """Mismatched fields, zero inverses and composite moduli."""
        print('\n--- test_errors ---')
        with pytest.raises(exceptions.FieldMismatch):
            Scalar(GF2, 1) + Scalar(GF3, 1)

        with pytest.raises(exceptions.DivisionByZero):
            field_inv(Scalar(GF5, 0))

        with pytest.raises(exceptions.NotPrime):
            FieldSpec.parse('gf:4')

    @staticmethod
    def test_modulus_bound():
        """A modulus above 2^31 is rejected before any primality test."""
        print('\n--- test_modulus_bound ---')
        started = time.monotonic()
        with pytest.raises(exceptions.BoundExceeded):
            FieldSpec.parse('gf:1000000000000037')

        with pytest.raises(exceptions.BoundExceeded):
            FieldSpec.gf(2 ** 61 - 1)

        assert time.monotonic() - started < 1
        assert FieldSpec.gf(2 ** 31 - 1).size == 2 ** 31 - 1

    @staticmethod
    @settings(max_examples=300, deadline=None)
    @given(st.sampled_from(['gf:2', 'gf:3', 'gf:5', 'gf:7', 'gf:2147483647', 'q']), st.integers(0, 10 ** 6))
    def test_axioms(field, seed):
        """Field axioms over prime fields of every size and the rationals."""
        field = FieldSpec.parse(field)
        rng = random.Random(seed)
        if field.is_finite:
            a, b, c = (field.random(rng) for _ in range(3))

        else:
            a, b, c = (Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(3))

        assert field.add(a, b) == field.add(b, a) and field.mul(a, b) == field.mul(b, a)
        assert field.add(field.add(a, b), c) == field.add(a, field.add(b, c))
        assert field.mul(field.mul(a, b), c) == field.mul(a, field.mul(b, c))
        assert field.mul(field.add(a, b), c) == field.add(field.mul(a, c), field.mul(b, c))
        assert field.add(a, field.zero) == a and field.mul(a, field.one) == a
        assert field_add(Scalar(field, a), field_neg(Scalar(field, a))) == Scalar(field, 0)
        if a:
            assert field_mul(Scalar(field, a), field_inv(Scalar(field, a))) == Scalar(field, 1)

    @staticmethod
    def test_irreducibility():
        """Irreducibility over prime fields and the rationals."""
        print('\n--- test_irreducibility ---')
        assert poly_is_irreducible(Polynomial.parse(Q, 'x^3 - 2')).kind == VerdictKind.Irreducible
        assert poly_is_irreducible(Polynomial.parse(GF2, 'x^2 + x + 1')).kind == VerdictKind.Irreducible
        verdict = poly_is_irreducible(Polynomial.parse(GF2, 'x^2 + 1'))
        assert verdict.kind == VerdictKind.Reducible
        assert verdict.factor == Polynomial(GF2, [1, 1])
        assert poly_is_irreducible(Polynomial.parse(Q, 'x^2 - 4')).kind == VerdictKind.Reducible

    @staticmethod
    def test_irreducibility_against_products():
        """A monic polynomial of degree at most 4 over GF(2) or GF(3) is irreducible exactly when it is not a
        product of two monic polynomials of positive degree."""
        print('\n--- test_irreducibility_against_products ---')
        for field in (GF2, GF3):
            monic = {
                degree: [
                    Polynomial(field, list(low) + [1]) for low in itertools.product(field.elements(), repeat=degree)
                ]
                for degree in range(1, 5)
            }
            products = {
                a * b for first in range(1, 4) for second in range(1, 5 - first)
                for a in monic[first] for b in monic[second]
            }
            for degree in range(1, 5):
                for poly in monic[degree]:
                    verdict = poly_is_irreducible(poly)
                    assert (verdict.kind == VerdictKind.Irreducible) == (poly not in products)
                    if verdict.kind == VerdictKind.Reducible:
                        assert 0 < verdict.factor.degree < degree
                        assert divmod(poly, verdict.factor)[1].is_zero()


class MatrixTests:
    @staticmethod
    def test_arithmetic():
        """Products, determinants and inverses."""
        print('\n--- test_arithmetic ---')
        a = rows(GF2, [[1, 1], [0, 1]])
        assert a @ a == Matrix.identity(GF2, 2)
        assert a.T.T == a
        assert rows(Q, [[1, 2], [3, 4]]).det_raw() == -2
        assert companion_matrix(Polynomial.parse(Q, 'x^3 - 2')).det_raw() == 2
        assert rows(GF3, [[1, 1], [0, 1]]).inverse() == rows(GF3, [[1, 2], [0, 1]])
        with pytest.raises(exceptions.SingularMatrix):
            rows(Q, [[1, 0], [0, 0]]).inverse()

        kernel = rows(GF2, [[0, 1], [0, 0]]).kernel_basis()
        assert kernel == [Matrix.column(GF2, [1, 0])]

    @staticmethod
    def test_companion_layout():
        """Ones on the subdiagonal and the coefficients in the last column."""
        print('\n--- test_companion_layout ---')
        cubic = Polynomial.parse(Q, 'x^3 - 2')
        a = companion_matrix(cubic)
        assert a == rows(Q, [[0, 0, 2], [1, 0, 0], [0, 1, 0]])
        assert a.polynomial_at(cubic).is_zero()
        assert companion_matrix(Polynomial.parse(Q, 'x^2 + 1')) == rows(Q, [[0, -1], [1, 0]])

    @staticmethod
    def test_vec_convention():
        """vec stacks columns and the commutation matrix transposes."""
        print('\n--- test_vec_convention ---')
        m = rows(Q, [[1, 3], [2, 4]])
        assert m.vec() == Matrix.column(Q, [1, 2, 3, 4])
        assert unvec(Matrix.column(Q, [1, 0, 0, 1]), 2) == Matrix.identity(Q, 2)
        k = commutation_matrix(GF2, 2)
        assert [k[i, i] for i in range(4)] == [1, 0, 0, 1]
        for matrix in all_matrices(GF2, 2):
            assert k @ matrix.vec() == matrix.T.vec()

    @staticmethod
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_kron_identity(seed):
        """vec(P M Q) = kron(Q^t, P) vec(M) over GF(5) and the rationals."""
        rng = random.Random(seed)
        for field in (GF5, Q):
            p, m, q = (Matrix.random(field, 3, rng=rng) for _ in range(3))
            assert (p @ m @ q).vec() == kron(q.T, p) @ m.vec()

    @staticmethod
    @settings(max_examples=80, deadline=None)
    @given(st.sampled_from(['gf:2', 'gf:3', 'gf:7', 'q']), st.integers(1, 4), st.integers(0, 10 ** 6))
    def test_det_multiplicative(field, n, seed):
        """det(AB) = det(A) det(B)."""
        field = FieldSpec.parse(field)
        rng = random.Random(seed)
        a = Matrix.random(field, n, rng=rng)
        b = Matrix.random(field, n, rng=rng)
        assert (a @ b).det_raw() == field.mul(a.det_raw(), b.det_raw())
        assert (a @ b).is_invertible() == (a.is_invertible() and b.is_invertible())

    @staticmethod
    @settings(max_examples=80, deadline=None)
    @given(st.sampled_from(['gf:2', 'gf:3', 'gf:7', 'q']), st.integers(1, 4), st.integers(1, 4),
           st.integers(0, 10 ** 6))
    def test_rank_nullity(field, rows_count, cols_count, seed):
        """rank + dim ker = number of columns, and the kernel basis is annihilated."""
        field = FieldSpec.parse(field)
        m = Matrix.random(field, rows_count, cols_count, random.Random(seed))
        kernel = m.kernel_basis()
        assert m.rank() + len(kernel) == cols_count
        assert all((m @ vector).is_zero() for vector in kernel)

    @staticmethod
    def test_general_linear_group():
        """GL_2(GF(2)) has 6 elements with the identity first."""
        print('\n--- test_general_linear_group ---')
        group = general_linear_group(GF2, 2)
        assert len(group) == gl_order(2, 2) == 6
        assert group[0] == Matrix.identity(GF2, 2)
        assert gl_order(3, 2) == 48


class SubspaceTests:
    @staticmethod
    def test_maximal_singular_roundtrip():
        """make_LD and make_LH classify back to their vectors."""
        print('\n--- test_maximal_singular_roundtrip ---')
        workbench = Workbench(field='gf:3', n=3)
        e1 = unit_vector(GF2, 2)
        ld = make_LD(e1)
        assert ld.dim == 2
        assert ld == MatrixSubspace(GF2, 2, [Matrix.unit(GF2, 2, 0, 1), Matrix.unit(GF2, 2, 1, 1)])
        assert make_LH(e1) == MatrixSubspace(GF2, 2, [Matrix.unit(GF2, 2, 1, 0), Matrix.unit(GF2, 2, 1, 1)])
        kind = workbench.subspaces.classify_maximal_singular(ld)
        assert kind.kind == MaximalSingularKind.Kernel and kind.vector == e1
        for field, n in itertools.product((GF2, GF3), (2, 3)):
            lines = [x for x in all_nonzero_vectors(field, n) if x == x.normalized()]
            assert len(lines) == (field.size ** n - 1) // (field.size - 1)
            for x in lines:
                kind = workbench.subspaces.classify_maximal_singular(make_LD(x))
                assert kind.kind == MaximalSingularKind.Kernel and kind.vector == x
                kind = workbench.subspaces.classify_maximal_singular(make_LH(x))
                assert kind.kind == MaximalSingularKind.Image and kind.vector == x

            assert len({make_LD(x) for x in lines} | {make_LH(x) for x in lines}) == 2 * len(lines)

    @staticmethod
    def test_not_maximal_singular():
        """A subspace of the wrong dimension is rejected."""
        print('\n--- test_not_maximal_singular ---')
        workbench = Workbench()
        with pytest.raises(exceptions.NotMaximalSingular):
            workbench.subspaces.classify_maximal_singular(MatrixSubspace(GF2, 2, [Matrix.identity(GF2, 2)]))

    @staticmethod
    def test_sum_and_intersection():
        """dim(V + W) + dim(V & W) = dim V + dim W."""
        print('\n--- test_sum_and_intersection ---')
        d1 = make_LD(unit_vector(GF2, 2, 0))
        d2 = make_LD(unit_vector(GF2, 2, 1))
        d3 = make_LD(Matrix.column(GF2, [1, 1]))
        assert d1.intersect(d2).dim == 0
        assert d1.sum(d2).sum(d3).dim == 4
        assert d1.sum(d3).dim + d1.intersect(d3).dim == d1.dim + d3.dim

    @staticmethod
    def test_rational_verdicts():
        """Singularity and full non-singularity over the rationals."""
        print('\n--- test_rational_verdicts ---')
        workbench = Workbench(field='q', samples=50)
        identity = Matrix.identity(Q, 2)
        j = rows(Q, [[0, -1], [1, 0]])
        assert workbench.subspaces.is_singular_subspace(MatrixSubspace(Q, 2, [identity])).kind == \
            VerdictKind.ContainsInvertible
        gaussian = MatrixSubspace(Q, 2, [identity, j])
        verdict = workbench.subspaces.is_full_nonsingular(gaussian)
        assert verdict.kind == VerdictKind.Verified
        assert verdict.certificate.kind == CertificateKind.PositiveDefiniteForm
        assert verdict.certificate.power == 1
        assert verdict.certificate.form == sum_of_squares(2)
        a = companion_matrix(Polynomial.parse(Q, 'x^3 - 2'))
        verdict = workbench.subspaces.is_full_nonsingular(MatrixSubspace(Q, 3, [Matrix.identity(Q, 3), a, a @ a]))
        assert verdict.kind == VerdictKind.Verified
        assert verdict.certificate.kind == CertificateKind.IrreduciblePolynomial
        verdict = workbench.subspaces.is_full_nonsingular(MatrixSubspace(Q, 2, [identity, Matrix.unit(Q, 2, 0, 1)]))
        assert verdict.kind == VerdictKind.Refuted
        assert not verdict.witness.is_invertible() and not verdict.witness.is_zero()

    @staticmethod
    def test_generic_determinant():
        """det(x1 I + x2 J) = x1^2 + x2^2."""
        print('\n--- test_generic_determinant ---')
        expansion = generic_determinant([Matrix.identity(Q, 2), rows(Q, [[0, -1], [1, 0]])], 10 ** 6)
        assert expansion.poly == sum_of_squares(2)
        assert expansion.singular_point is None
        shear = MatrixSubspace(Q, 2, [Matrix.identity(Q, 2), Matrix.unit(Q, 2, 0, 1)])
        x1, x2 = coordinate_symbols(2)
        assert Workbench(field='q').subspaces.generic_determinant(shear) == sympy.Poly(x1 ** 2, x1, x2, domain=sympy.QQ)
        with pytest.raises(exceptions.BudgetExceeded):
            generic_determinant([Matrix.identity(Q, 3)] * 3, 5)

    @staticmethod
    def test_positive_definite_power():
        """scale * Q^k is recognized in many variables, indefinite forms and odd degrees are not."""
        print('\n--- test_positive_definite_power ---')
        symbols = coordinate_symbols(6)
        x1, x2, x3, _, x5, _ = symbols
        form = sympy.Poly(sum(symbol ** 2 for symbol in symbols) + x1 * x2 + x3 * x5, *symbols, domain=sympy.QQ)
        assert positive_definite_power(form ** 3 * 5) == (form, 3, Fraction(5))
        assert positive_definite_power(sum_of_squares(8) ** 4) == (sum_of_squares(8), 4, Fraction(1))
        indefinite = sympy.Poly(x1 ** 2 - x2 ** 2, *symbols, domain=sympy.QQ)
        assert positive_definite_power(indefinite ** 2) is None
        assert positive_definite_power(form * sympy.Poly(x1, *symbols, domain=sympy.QQ)) is None
        assert positive_definite_power(form * indefinite) is None

    @staticmethod
    def test_enumeration_and_scan():
        """67 subspaces of M_2(GF(2)), 2 of them full non-singular."""
        print('\n--- test_enumeration_and_scan ---')
        workbench = Workbench()
        assert sum(1 for _ in workbench.subspaces.enumerate()) == 67
        assert sum(1 for _ in workbench.subspaces.enumerate(dim=2)) == 35
        found = workbench.subspaces.full_nonsingular_scan()
        assert len(found) == 2
        assert all(subspace.certificate.count == 3 for subspace in found)

    @staticmethod
    def test_dieudonne_audit():
        """6 maximal singular subspaces of M_2(GF(2)), 3 of each type."""
        print('\n--- test_dieudonne_audit ---')
        report = Workbench().subspaces.dieudonne_audit()
        assert report.passed
        assert report.details['subspaces'] == 67
        assert report.details['max_singular_dimension'] == 2
        assert report.details['maximal_singular'] == 6
        assert report.details['kernel_type'] == 3 and report.details['image_type'] == 3
        with pytest.raises(exceptions.SubspaceException):
            Workbench(n=1).subspaces.dieudonne_audit()

    @staticmethod
    def test_dieudonne_audit_gf3():
        """The 212 subspaces of M_2(GF(3)) follow the Gaussian binomials, with 4 singular planes of each type."""
        print('\n--- test_dieudonne_audit_gf3 ---')
        report = Workbench(field='gf:3', n=2).subspaces.dieudonne_audit()
        assert report.passed and report.details['mode'] == 'exhaustive'
        assert report.details['per_dimension'] == {k: gaussian_binomial(4, k, 3) for k in range(5)}
        assert report.details['subspaces'] == 212
        assert report.details['max_singular_dimension'] == 2
        assert report.details['maximal_singular'] == 8
        assert report.details['kernel_type'] == report.details['image_type'] == 4

    @staticmethod
    def test_sampled_dieudonne_audit():
        """Sampled audits reach dimension n^2 - n + 1, where every subspace contains an invertible matrix."""
        print('\n--- test_sampled_dieudonne_audit ---')
        report = Workbench(field='gf:2', n=3, samples=30, seed=5).subspaces.dieudonne_audit()
        assert report.details['mode'] == 'sampled'
        assert report.passed
        assert 7 in report.details['per_dimension']
        assert 7 not in report.details['singular_per_dimension']
        assert report.details['max_singular_dimension'] == 6
        assert report.details['maximal_singular'] >= 10

    @staticmethod
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6), st.booleans())
    def test_rational_singularity_reduces(seed, singular):
        """An integer subspace singular over the rationals stays singular mod 5 and mod 7."""
        rng = random.Random(seed)
        generators = []
        for _ in range(rng.randint(1, 3)):
            entries = [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)]
            if singular:
                entries[0] = [2 * value for value in entries[1]]

            generators.append(entries)

        verdicts = {}
        for field in (Q, GF5, Fields.GF7):
            subspace = MatrixSubspace(field, 3, [rows(field, entries) for entries in generators])
            verdicts[field] = Workbench(field=field, n=3).subspaces.is_singular_subspace(subspace).kind

        if verdicts[Q] == VerdictKind.Singular:
            assert verdicts[GF5] == verdicts[Fields.GF7] == VerdictKind.Singular

        if singular:
            assert verdicts[Q] == VerdictKind.Singular


class PreserverTests:
    @staticmethod
    def test_preserves_gl():
        """The identity passes, the zero map and the lower-left killer fail."""
        print('\n--- test_preserves_gl ---')
        workbench = Workbench()
        verdict = workbench.preservers.preserves_GL(MatEndo.identity(GF2, 2))
        assert verdict.kind == VerdictKind.ExhaustivePass and verdict.count == 6
        zero = MatEndo(Matrix.zeros(GF2, 4), 2)
        verdict = workbench.preservers.preserves_GL(zero)
        assert verdict.kind == VerdictKind.Refuted and verdict.witness == Matrix.identity(GF2, 2)
        killer = MatEndo.from_images([
            Matrix.zeros(GF2, 2) if k == 1 else Matrix.unit(GF2, 2, k % 2, k // 2) for k in range(4)
        ])
        verdict = workbench.preservers.preserves_GL(killer)
        assert verdict.kind == VerdictKind.Refuted
        assert not killer.apply(verdict.witness).is_invertible()

    @staticmethod
    def test_frobenius_maps():
        """u and v act as P M Q and P M^t Q and compose as a group."""
        print('\n--- test_frobenius_maps ---')
        rng = random.Random(7)
        p, q, p2, q2 = (Matrix.random_invertible(GF5, 3, rng) for _ in range(4))
        m = Matrix.random(GF5, 3, rng=rng)
        assert build_u(p, q).apply(m) == p @ m @ q
        assert build_v(p, q).apply(m) == p @ m.T @ q
        assert build_u(p, q).compose(build_u(p2, q2)) == build_u(p @ p2, q2 @ q)
        transposition = build_v(Matrix.identity(GF5, 3), Matrix.identity(GF5, 3))
        assert transposition.compose(transposition) == MatEndo.identity(GF5, 3)
        with pytest.raises(exceptions.SingularInput):
            build_u(Matrix.zeros(GF5, 3), q)

        group = general_linear_group(GF2, 2)
        identity = Matrix.identity(GF2, 2)
        assert all(build_v(identity, identity) != build_u(a, b) for a in group for b in group)

    @staticmethod
    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(['gf:2', 'gf:3', 'gf:5']), st.integers(2, 3), st.booleans(), st.integers(0, 10 ** 6))
    def test_frobenius_roundtrip(field, n, twisted, seed):
        """classify recovers the twist and factors that rebuild the map."""
        workbench = Workbench(field=field, n=n, seed=seed)
        rng = random.Random(seed)
        p = Matrix.random_invertible(workbench.field, n, rng)
        q = Matrix.random_invertible(workbench.field, n, rng)
        endo = (build_v if twisted else build_u)(p, q)
        classification = workbench.preservers.classify(endo)
        assert classification.tag == (ClassificationTag.FrobeniusTwisted if twisted else ClassificationTag.FrobeniusDirect)
        assert workbench.preservers.reconstruct(classification) == endo
        assert classification.P.entries[classification.P.first_nonzero()] == 1

    @staticmethod
    def test_frobenius_over_rationals():
        """Frobenius roundtrip over the rationals with small entries."""
        print('\n--- test_frobenius_over_rationals ---')
        workbench = Workbench(field='q', samples=30, seed=3)
        rng = random.Random(3)
        for twisted in (False, True) * 5:
            p = Matrix.random_invertible(Q, 2, rng)
            q = Matrix.random_invertible(Q, 2, rng)
            endo = (build_v if twisted else build_u)(p, q)
            classification = workbench.preservers.classify(endo)
            assert classification.twisted == twisted
            assert workbench.preservers.reconstruct(classification) == endo

        transposition = MatEndo.transposition(Q, 2)
        classification = workbench.preservers.classify(transposition)
        assert classification.tag == ClassificationTag.FrobeniusTwisted
        assert classification.P == Matrix.identity(Q, 2) and classification.Q == Matrix.identity(Q, 2)

    @staticmethod
    def test_gaussian_pinch():
        """The pinch map through span{I, J} over the rationals."""
        print('\n--- test_gaussian_pinch ---')
        workbench = Workbench(field='q', samples=100)
        subspace = MatrixSubspace(Q, 2, [Matrix.identity(Q, 2), rows(Q, [[0, -1], [1, 0]])])
        endo = build_pinch(subspace, Matrix.identity(Q, 2), unit_vector(Q, 2))
        assert endo.apply(rows(Q, [[1, 2], [3, 4]])) == rows(Q, [[1, -3], [3, 1]])
        assert endo.rank() == 2
        assert endo.kernel() == make_LD(unit_vector(Q, 2))
        classification = workbench.preservers.classify(endo)
        assert classification.tag == ClassificationTag.PinchDirect
        assert classification.X == unit_vector(Q, 2)
        assert classification.V == subspace
        assert classification.vstatus.kind == VerdictKind.Verified
        twisted = build_pinch(subspace, Matrix.identity(Q, 2), unit_vector(Q, 2), twisted=True)
        assert twisted.kernel() == make_LH(unit_vector(Q, 2))
        assert workbench.preservers.classify(twisted).tag == ClassificationTag.PinchTwisted

    @staticmethod
    def test_cubic_pinch():
        """M -> m11 I + m21 A + m31 A^2 for the companion matrix A of x^3 - 2."""
        print('\n--- test_cubic_pinch ---')
        workbench = Workbench(field='q', n=3, samples=50)
        a = companion_matrix(Polynomial.parse(Q, 'x^3 - 2'))
        subspace = MatrixSubspace(Q, 3, [Matrix.identity(Q, 3), a, a @ a])
        endo = build_pinch(subspace, Matrix.identity(Q, 3), unit_vector(Q, 3))
        m = rows(Q, [[1, 5, 6], [2, 7, 8], [3, 9, 0]])
        assert endo.apply(m) == Matrix.identity(Q, 3) + a.scale(2) + (a @ a).scale(3)
        classification = workbench.preservers.classify(endo)
        assert classification.tag == ClassificationTag.PinchDirect
        assert classification.V == subspace

    @staticmethod
    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from([('gf:2', 'x^2 + x + 1'), ('gf:3', 'x^2 + 1')]), st.booleans(), st.integers(0, 10 ** 6))
    def test_pinch_roundtrip(preset, twisted, seed):
        """Random pinch maps through companion subspaces classify back."""
        field, poly = preset
        workbench = Workbench(field=field, seed=seed)
        algebra = workbench.algebras.preset(PresetName.Companion, poly=Polynomial.parse(workbench.field, poly))
        check_pinch_roundtrip(workbench, algebra, twisted, random.Random(seed))

    @staticmethod
    @settings(max_examples=12, deadline=None)
    @given(st.sampled_from(['x^3 - 2', PresetName.GaussianPair, PresetName.HamiltonQuaternions]), st.booleans(),
           st.integers(0, 10 ** 6))
    def test_rational_pinch_roundtrip(name, twisted, seed):
        """Random pinch maps through the rational presets classify back with a certified V."""
        if name == 'x^3 - 2':
            workbench = Workbench(field='q', n=3, samples=30, seed=seed)
            algebra = workbench.algebras.preset(PresetName.Companion, poly=Polynomial.parse(Q, name))

        else:
            workbench = Workbench(field='q', n=2 if name == PresetName.GaussianPair else 4, samples=30, seed=seed)
            algebra = workbench.algebras.preset(name, Q)

        classification = check_pinch_roundtrip(workbench, algebra, twisted, random.Random(seed))
        assert classification.vstatus.kind == VerdictKind.Verified

    @staticmethod
    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(['gf:3', 'gf:5', 'q']), st.booleans(), st.integers(0, 10 ** 6))
    def test_scaled_factors(field, twisted, seed):
        """Replacing P, Q by cP, Q/c changes neither the map nor its classification."""
        workbench = Workbench(field=field, n=2, samples=20, seed=seed)
        field = workbench.field
        rng = random.Random(seed)
        p = Matrix.random_invertible(field, 2, rng)
        q = Matrix.random_invertible(field, 2, rng)
        c = field.random(rng)
        while not c:
            c = field.random(rng)

        build = build_v if twisted else build_u
        scaled = build(p.scale(c), q.scale(field.inv(c)))
        assert scaled == build(p, q)
        first = workbench.preservers.classify(build(p, q))
        second = workbench.preservers.classify(scaled)
        assert (first.tag, first.P, first.Q) == (second.tag, second.P, second.Q)

    @staticmethod
    def test_audits():
        """Span, onto-column, preimage lines and the reduction principle."""
        print('\n--- test_audits ---')
        workbench = Workbench()
        for n, field in ((1, GF2), (2, GF2), (2, GF3), (3, GF3)):
            assert workbench.preservers.span_GL_audit(n, field).passed

        assert workbench.preservers.span_GL_audit(2, GF2).details['span_dimension'] == 4
        identity = MatEndo.identity(GF2, 2)
        assert workbench.preservers.onto_column_audit(identity, unit_vector(GF2, 2))
        subspace = workbench.subspaces.full_nonsingular_scan()[0]
        pinch = workbench.preservers.first_column_pinch(subspace)
        assert workbench.preservers.preserves_GL(pinch).certified
        assert workbench.preservers.onto_column_audit(pinch, unit_vector(GF2, 2, 1))
        lines = workbench.preservers.preimage_lines(build_v(*general_linear_group(GF2, 2)[1:3]))
        assert lines.passed and lines.twisted and lines.p == 2
        lines = workbench.preservers.preimage_lines(pinch)
        assert lines.passed and lines.p == 1 and not lines.bijective
        p, q = general_linear_group(GF2, 2)[1:3]
        assert workbench.preservers.reduction_audit(pinch, p, q)
        assert workbench.preservers.maps_gl_onto(identity) and not workbench.preservers.maps_gl_onto(pinch)
        assert workbench.preservers.preimage_gl_is_gl(identity)

    @staticmethod
    def test_classify_small_n():
        """n = 1 endomorphisms are not classified."""
        print('\n--- test_classify_small_n ---')
        with pytest.raises(exceptions.PreserverException):
            Workbench(n=1).preservers.classify(MatEndo.identity(GF2, 1))


class AlgebraTests:
    @staticmethod
    def test_presets():
        """Certificates of the shipped algebras."""
        print('\n--- test_presets ---')
        workbench = Workbench()
        f4 = workbench.algebras.preset(PresetName.Companion, poly=Polynomial.parse(GF2, 'x^2 + x + 1'))
        verdict = workbench.algebras.is_division(f4)
        assert verdict.kind == VerdictKind.Division and verdict.certificate.count == 3
        assert workbench.algebras.preset(PresetName.GaussianPair, GF3).certificate.kind == \
            CertificateKind.FiniteFieldExhaustive
        with pytest.raises(exceptions.MinusOneIsSquare):
            workbench.algebras.preset(PresetName.GaussianPair, GF5)

        with pytest.raises(exceptions.NotIrreducible):
            workbench.algebras.preset(PresetName.Companion, poly=Polynomial.parse(GF2, 'x^2 + 1'))

        with pytest.raises(exceptions.UnsupportedField):
            workbench.algebras.preset(PresetName.HamiltonQuaternions, GF3)

        cubic = workbench.algebras.preset(PresetName.Companion, poly=Polynomial.parse(Q, 'x^3 - 2'))
        assert cubic.certificate.kind == CertificateKind.IrreduciblePolynomial
        a = companion_matrix(Polynomial.parse(Q, 'x^3 - 2'))
        assert workbench.algebras.to_subspace(cubic) == MatrixSubspace(Q, 3, [Matrix.identity(Q, 3), a, a @ a])

    @staticmethod
    def test_gaussian_algebra():
        """The algebra of span{I, J}: e2 * e2 = -e1."""
        print('\n--- test_gaussian_algebra ---')
        workbench = Workbench(field='q')
        j = rows(Q, [[0, -1], [1, 0]])
        algebra = workbench.algebras.from_subspace(MatrixSubspace(Q, 2, [Matrix.identity(Q, 2), j]))
        assert algebra.product([0, 1], [0, 1]) == Matrix.column(Q, [-1, 0])
        assert algebra.left_mult([0, 1]) == j
        assert algebra.left_mult([0, 0]).is_zero()
        preset = workbench.algebras.preset(PresetName.GaussianPair, Q)
        assert preset.certificate.kind == CertificateKind.PositiveDefiniteForm
        assert workbench.algebras.to_subspace(preset) == MatrixSubspace(Q, 2, [Matrix.identity(Q, 2), j])

    @staticmethod
    def test_quaternions():
        """det(left_mult(x)) = (x1^2 + x2^2 + x3^2 + x4^2)^2 and the induced pinch map preserves GL."""
        print('\n--- test_quaternions ---')
        workbench = Workbench(field='q', n=4, samples=200)
        quaternions = workbench.algebras.preset(PresetName.HamiltonQuaternions, Q)
        assert quaternions.left_mult([1, 0, 0, 0]) == Matrix.identity(Q, 4)
        assert quaternions.certificate.kind == CertificateKind.PositiveDefiniteForm
        assert quaternions.certificate.power == 2
        expansion = generic_determinant(quaternions.left_basis(), 10 ** 6)
        assert matches_form_power(expansion.poly, sum_of_squares(4), 2, Fraction(1))
        subspace = workbench.algebras.to_subspace(quaternions)
        endo = build_pinch(subspace, Matrix.identity(Q, 4), unit_vector(Q, 4))
        verdict = workbench.preservers.preserves_GL(endo)
        assert verdict.kind == VerdictKind.SampledPass and verdict.count == 200
        assert workbench.preservers.classify(endo).tag == ClassificationTag.PinchDirect

    @staticmethod
    def test_octonions():
        """det(left_mult(x)) = (x1^2 + ... + x8^2)^4."""
        print('\n--- test_octonions ---')
        workbench = Workbench(field='q', n=8)
        octonions = workbench.algebras.preset(PresetName.Octonions, Q)
        assert octonions.certificate.kind == CertificateKind.PositiveDefiniteForm
        assert octonions.certificate.power == 4
        assert workbench.algebras.is_division(octonions).kind == VerdictKind.Division

    @staticmethod
    @pytest.mark.long
    def test_quaternion_preservation_long():
        """10^5 random invertible matrices stay invertible under the quaternion pinch map."""
        print('\n--- test_quaternion_preservation_long ---')
        workbench = Workbench(field='q', n=4, samples=10 ** 5, seed=11)
        quaternions = workbench.algebras.preset(PresetName.HamiltonQuaternions, Q)
        endo = build_pinch(workbench.algebras.to_subspace(quaternions), Matrix.identity(Q, 4), unit_vector(Q, 4))
        verdict = workbench.preservers.preserves_GL(endo)
        assert verdict.kind == VerdictKind.SampledPass and verdict.count == 10 ** 5

    @staticmethod
    @pytest.mark.long
    def test_octonion_pinch():
        """Pinch maps through the octonions classify as pinch maps with a positive definite certificate."""
        print('\n--- test_octonion_pinch ---')
        workbench = Workbench(field='q', n=8, samples=20, seed=2)
        octonions = workbench.algebras.preset(PresetName.Octonions, Q)
        subspace = workbench.algebras.to_subspace(octonions)
        endo = build_pinch(subspace, Matrix.identity(Q, 8), unit_vector(Q, 8))
        classification = workbench.preservers.classify(endo)
        assert classification.tag == ClassificationTag.PinchDirect
        assert classification.vstatus.certificate.kind == CertificateKind.PositiveDefiniteForm
        assert classification.vstatus.certificate.power == 4
        rng = random.Random(2)
        for twisted in (False, True):
            check_pinch_roundtrip(workbench, octonions, twisted, rng)

    @staticmethod
    def test_zero_divisors():
        """The componentwise product on K^2 has zero divisors."""
        print('\n--- test_zero_divisors ---')
        c = [[[1 if i == j == k else 0 for k in range(2)] for j in range(2)] for i in range(2)]
        for field in ('gf:2', 'q'):
            workbench = Workbench(field=field)
            algebra = DivisionAlgebraSpec(workbench.field, c)
            verdict = workbench.algebras.is_division(algebra)
            assert verdict.kind == VerdictKind.NotDivision
            assert algebra.product(verdict.witness, verdict.partner).is_zero()
            with pytest.raises(exceptions.AlgebraException):
                workbench.algebras.to_subspace(algebra)

    @staticmethod
    def test_bridge_roundtrip():
        """Subspace to algebra and back over every full non-singular subspace of M_2(GF(2))."""
        print('\n--- test_bridge_roundtrip ---')
        workbench = Workbench()
        for subspace in workbench.subspaces.full_nonsingular_scan():
            algebra = workbench.algebras.from_subspace(subspace)
            assert workbench.algebras.is_division(algebra).kind == VerdictKind.Division
            assert workbench.algebras.to_subspace(algebra) == subspace
            again = workbench.algebras.from_subspace(workbench.algebras.to_subspace(algebra))
            assert again.c == algebra.c

    @staticmethod
    def test_left_implies_right():
        """Every 2-dimensional algebra over GF(2) and GF(3) with invertible left multiplications has invertible
        right multiplications."""
        print('\n--- test_left_implies_right ---')
        for field in (GF2, GF3):
            workbench = Workbench(field=field)
            divisions = 0
            for values in itertools.product(field.elements(), repeat=8):
                c = [[[values[4 * i + 2 * j + k] for k in range(2)] for j in range(2)] for i in range(2)]
                algebra = DivisionAlgebraSpec(field, c)
                if workbench.algebras.is_division(algebra).kind != VerdictKind.Division:
                    continue

                divisions += 1
                for b in all_nonzero_vectors(field, 2):
                    assert algebra.right_mult(b).is_invertible()

            assert divisions > 0


class PackedTests:
    @staticmethod
    def test_codes():
        """Packed codes agree with the generic matrices."""
        print('\n--- test_codes ---')
        space = PackedSpace(GF3, 2, 10 ** 6)
        assert sum(space.invertible) == 48
        rng = random.Random(1)
        p = Matrix.random_invertible(GF3, 2, rng)
        q = Matrix.random_invertible(GF3, 2, rng)
        endo = build_v(p, q)
        code = space.encode_endo(endo)
        assert space.decode_endo(code) == endo
        for _ in range(50):
            m = rng.randrange(space.size)
            assert space.decode(space.apply(code, m)) == endo.apply(space.decode(m))

        assert space.preserves(code, space.test_order(0)) is None
        assert space.maps_gl_onto(code) and space.preimage_gl_is_gl(code)
        assert space.cross_check(rng, 81) == []
        assert space.test_order(5)[0] == space.identity_code()

    @staticmethod
    def test_cross_check_covers_every_code():
        """A single wrong entry of the invertibility table is found on small spaces."""
        print('\n--- test_cross_check_covers_every_code ---')
        space = PackedSpace(GF2, 2, 10 ** 6)
        assert space.cross_check(random.Random(0)) == []
        for code in (0, 6, space.size - 1):
            space.invertible[code] ^= 1
            anomalies = space.cross_check(random.Random(0))
            assert anomalies == [f'the invertibility table is wrong for code {code}']
            space.invertible[code] ^= 1


class HarnessTests:
    @staticmethod
    def test_enumeration():
        """All 65536 endomorphisms of M_2(GF(2)): 72 bijective and 72 singular preservers."""
        print('\n--- test_enumeration ---')
        _, report = gf2_campaign()
        assert report.total_maps == report.scanned_maps == 65536
        assert report.complete and report.anomalies == [] and report.passed
        assert report.preserver_count == 144
        assert report.bijective_count == 72 and report.singular_count == 72
        assert report.frobenius_expected == 72 and report.pinch_expected == 72
        assert report.full_nonsingular_subspaces == 2
        histogram = report.class_histogram
        assert histogram[ClassificationTag.FrobeniusDirect] == histogram[ClassificationTag.FrobeniusTwisted] == 36
        assert histogram[ClassificationTag.PinchDirect] == histogram[ClassificationTag.PinchTwisted] == 36
        data = report.to_dict()
        assert data['format'] == 1 and 'records' not in data

    @staticmethod
    def test_partition_soundness():
        """One and two workers give the same report."""
        print('\n--- test_partition_soundness ---')
        _, report = gf2_campaign()
        workbench = Workbench(jobs=2)
        parallel = asyncio.run(workbench.harness.enumerate_preservers())
        first = report.to_dict()
        second = parallel.to_dict()
        first.pop('wall_time')
        second.pop('wall_time')
        assert first == second

    @staticmethod
    def test_resume():
        """A campaign resumed from half of its partitions reproduces the full one."""
        print('\n--- test_resume ---')
        _, report = gf2_campaign()
        workbench = Workbench()
        space = PackedSpace(GF2, 2, workbench.budget)
        partial = EnumerationReport(field='gf:2', n=2, total_maps=65536, partition_count=16, seed=0)
        tests = space.test_order(0)
        for first in range(8):
            Harness._merge(partial, scan_partition({
                'field': 'gf:2', 'n': 2, 'budget': workbench.budget, 'samples': workbench.samples, 'seed': 0,
                'early_exit': True, 'tests': tests, 'first': first
            }))

        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'partial.json')
            write_json(path, partial.to_dict())
            assert read_json(path)['records']
            resumed = asyncio.run(workbench.harness.enumerate_preservers(workbench.harness.config(resume=path)))

        assert resumed.passed
        assert resumed.scanned_maps == 65536
        assert resumed.preserver_digest == report.preserver_digest

    @staticmethod
    def test_classification_errors_stay_per_map():
        """A subspace or matrix error while classifying one map is recorded on that map only."""
        print('\n--- test_classification_errors_stay_per_map ---')
        workbench = Workbench()
        space = PackedSpace(GF2, 2, workbench.budget)
        task = {
            'field': 'gf:2', 'n': 2, 'budget': workbench.budget, 'samples': workbench.samples, 'seed': 0,
            'early_exit': True, 'tests': space.test_order(0), 'first': space.encode(Matrix.unit(GF2, 2, 0, 0))
        }
        for error in (exceptions.NotMaximalSingular('no kernel vector'), exceptions.SingularMatrix('no inverse')):
            with mock.patch.object(Preservers, 'classify', side_effect=error):
                result = scan_partition(task)

            assert result['partition'] == task['first'] and result['records']
            assert all(record['error'].startswith(type(error).__name__) for record in result['records'])
            assert all(record['tag'] is None for record in result['records'])

    @staticmethod
    def test_cap():
        """Long campaigns need explicit flags."""
        print('\n--- test_cap ---')
        with pytest.raises(exceptions.CapExceeded):
            Harness.check_cap(CampaignConfig(field='gf:3'), 3 ** 16)

        Harness.check_cap(CampaignConfig(field='gf:3', allow_long=True), 3 ** 16)
        with pytest.raises(exceptions.CapExceeded):
            Harness.check_cap(CampaignConfig(field='gf:5', allow_long=True), 5 ** 16)

        Harness.check_cap(CampaignConfig(field='gf:5', allow_long=True, ignore_cap=True), 5 ** 16)
        with pytest.raises(exceptions.CapExceeded):
            asyncio.run(Workbench(field='gf:3').harness.enumerate_preservers())

    @staticmethod
    def test_theorem1():
        """f(GL) = GL, f^-1(GL) = GL and bijectivity pick out the same 72 preservers."""
        print('\n--- test_theorem1 ---')
        workbench, _ = gf2_campaign()
        report = asyncio.run(workbench.harness.verify_theorem1())
        assert report.passed
        assert report.details['onto'] == report.details['preimage'] == report.details['bijective'] == 72
        sampled = asyncio.run(Workbench(field='gf:3', samples=200).harness.verify_theorem1(sampled=True))
        assert sampled.passed

    @staticmethod
    def test_audits():
        """Audits over the preserver set of the campaign."""
        print('\n--- test_audits ---')
        workbench, _ = gf2_campaign()
        onto = asyncio.run(workbench.harness.run_onto())
        assert onto.passed and onto.details['preservers'] == 144 and onto.details['vectors'] == 3
        lines = asyncio.run(workbench.harness.run_lines())
        assert lines.passed and lines.details['span_dimensions'] == {'1': 72, '2': 72}
        assert workbench.harness.run_dieudonne().passed
        assert workbench.harness.run_span().passed
        early = workbench.harness.early_exit_audit(samples=2000)
        assert early.passed and early.details['preservers'] >= 1
        assert 'PASSED' in Harness.render(onto.to_dict())


class CLITests:
    @staticmethod
    def test_subspace_commands():
        """make-ld output classifies back to its vector."""
        print('\n--- test_subspace_commands ---')
        code, output = run_cli('subspace', 'make-ld', '--X', '[1, 0]')
        assert code == 0
        code, output = run_cli('subspace', 'classify', '--in', output)
        assert code == 0
        data = json.loads(output)
        assert data['kind'] == MaximalSingularKind.Kernel
        assert data['vector']['rows'] == [['1'], ['0']]

    @staticmethod
    def test_build_and_classify():
        """The gaussian pinch map from the command line."""
        print('\n--- test_build_and_classify ---')
        code, output = run_cli('build', 'pinch', '--field', 'q', '--preset', 'gaussian_pair')
        assert code == 0
        code, output = run_cli('classify', '--field', 'q', '--samples', '50', '--endo', output)
        assert code == 0
        data = json.loads(output)
        assert data['tag'] == ClassificationTag.PinchDirect
        assert data['seed'] == 0
        code, output = run_cli('build', 'u', '--P', '[[1, 1], [0, 1]]', '--Q', '[[1, 0], [1, 1]]')
        assert code == 0
        code, output = run_cli('preserves', '--endo', output)
        assert json.loads(output)['kind'] == VerdictKind.ExhaustivePass

    @staticmethod
    def test_algebra_commands():
        """Preset, to-subspace and is-division."""
        print('\n--- test_algebra_commands ---')
        code, output = run_cli('algebra', 'preset', '--name', 'companion', '--poly', 'x^2 + x + 1')
        assert code == 0
        code, verdict = run_cli('algebra', 'is-division', '--in', output)
        assert json.loads(verdict)['kind'] == VerdictKind.Division
        code, subspace = run_cli('algebra', 'to-subspace', '--in', output)
        assert code == 0 and len(json.loads(subspace)['basis']) == 2

    @staticmethod
    def test_errors():
        """Usage and library errors exit with code 2, as JSON on demand."""
        print('\n--- test_errors ---')
        code, output = run_cli('bogus', '--json-errors')
        assert code == 2
        assert json.loads(output)['error'] == 'CLIException'
        code, output = run_cli('subspace', 'make-ld', '--X', '[0, 0]', '--json-errors')
        assert code == 2
        assert json.loads(output)['details']['type'] == 'ZeroVector'

    @staticmethod
    def test_enumerate_and_render():
        """enumerate writes a passing report that renders as text."""
        print('\n--- test_enumerate_and_render ---')
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'report.json')
            code, _ = run_cli('enumerate', '--field', 'gf:2', '--n', '2', '--quiet', '--out', path)
            assert code == 0
            assert read_json(path)['passed']
            code, output = run_cli('report', 'render', '--in', path)

        assert code == 0
        assert 'PASSED' in output and 'preservers:         144' in output


def main() -> None:
    for group in (FieldTests, MatrixTests, SubspaceTests, PreserverTests, AlgebraTests, PackedTests, HarnessTests,
                  CLITests):
        print(f'\n--------- {group.__name__} ---------')
        for name, test in vars(group).items():
            if name.startswith('test_'):
                test.__func__()


if __name__ == '__main__':
    main()
