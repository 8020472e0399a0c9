from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Optional, Dict, List, Any, Set

from pretty_utils.type_functions.classes import AutoRepr

from py_gl_preservers.data.types import MapCode

REPORT_FORMAT = 1


def dump(value: Any) -> Any:
    """
    Convert a value into something JSON serializable.

    Args:
        value (Any): a model, matrix, list, dictionary or scalar value.

    Returns:
        Any: the serializable value.

    """
    if value is None or isinstance(value, (bool, int, str, float)):
        return value

    if isinstance(value, Fraction):
        return str(value)

    if hasattr(value, 'to_dict'):
        return value.to_dict()

    if hasattr(value, 'as_expr'):
        return str(value.as_expr())

    if isinstance(value, dict):
        return {str(key): dump(item) for key, item in value.items()}

    if isinstance(value, (list, tuple, set, frozenset)):
        return [dump(item) for item in value]

    return str(value)


class FieldKind:
    """
    An instance with field kind values.
    """
    Prime: str = 'prime-field'
    Rationals: str = 'rationals'


class VerdictKind:
    """
    An instance with verdict values.
    """
    Irreducible: str = 'irreducible'
    Reducible: str = 'reducible'
    Unknown: str = 'unknown'
    Singular: str = 'singular'
    ContainsInvertible: str = 'contains_invertible'
    Verified: str = 'verified'
    Refuted: str = 'refuted'
    ExhaustivePass: str = 'exhaustive_pass'
    SampledPass: str = 'sampled_pass'
    Division: str = 'division'
    NotDivision: str = 'not_division'


class CertificateKind:
    """
    An instance with non-singularity certificate kinds.
    """
    FiniteFieldExhaustive: str = 'finite_field_exhaustive'
    IrreduciblePolynomial: str = 'irreducible_polynomial'
    PositiveDefiniteForm: str = 'positive_definite_form'
    Empty: str = 'none'


class MaximalSingularKind:
    """
    An instance with the two types of maximal singular subspaces.
    """
    Kernel: str = 'kernel_type'
    Image: str = 'image_type'


class ClassificationTag:
    """
    An instance with preserver classification tags.
    """
    FrobeniusDirect: str = 'frobenius_direct'
    FrobeniusTwisted: str = 'frobenius_twisted'
    PinchDirect: str = 'pinch_direct'
    PinchTwisted: str = 'pinch_twisted'
    NotPreserver: str = 'not_preserver'
    Unverified: str = 'unverified'

    Frobenius = (FrobeniusDirect, FrobeniusTwisted)
    Pinch = (PinchDirect, PinchTwisted)
    All = (FrobeniusDirect, FrobeniusTwisted, PinchDirect, PinchTwisted, NotPreserver, Unverified)


class IrreducibilityVerdict(AutoRepr):
    """
    The verdict of an irreducibility test.

    Attributes:
        kind (str): 'irreducible', 'reducible' or 'unknown'.
        factor (Optional[Polynomial]): a witness factor of a reducible polynomial.
        note (Optional[str]): how the verdict was reached when not by direct enumeration.

    """
    kind: str
    factor: Optional[Any]
    note: Optional[str]

    def __init__(self, kind: str, factor: Optional[Any] = None, note: Optional[str] = None) -> None:
        self.kind = kind
        self.factor = factor
        self.note = note

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'factor': self.factor.to_list() if self.factor else None, 'note': self.note}


class SingularityVerdict(AutoRepr):
    """
    The verdict of a singular subspace test.

    Attributes:
        kind (str): 'singular' or 'contains_invertible'.
        witness (Optional[Matrix]): an invertible element of the subspace.
        checked (int): the number of elements or evaluation points examined.

    """
    kind: str
    witness: Optional[Any]
    checked: int

    def __init__(self, kind: str, witness: Optional[Any] = None, checked: int = 0) -> None:
        self.kind = kind
        self.witness = witness
        self.checked = checked

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'witness': dump(self.witness), 'checked': self.checked}


class NonSingularityCertificate(AutoRepr):
    """
    A proof that every nonzero element of a subspace (or every nonzero left multiplication of an algebra)
        is invertible.

    Attributes:
        kind (str): one of the CertificateKind values.
        count (Optional[int]): the number of nonzero elements checked, for exhaustive certificates.
        poly (Optional[Polynomial]): the irreducible minimal polynomial, for companion subspaces.
        generator (Optional[Matrix]): the matrix whose powers span the subspace, for companion subspaces.
        form (Optional[sympy.Poly]): the positive definite quadratic form Q.
        power (Optional[int]): the exponent k in det = scale * Q^k.
        scale (Optional[Fraction]): the nonzero scale in det = scale * Q^k.

    """
    kind: str
    count: Optional[int]
    poly: Optional[Any]
    generator: Optional[Any]
    form: Optional[Any]
    power: Optional[int]
    scale: Optional[Fraction]

    def __init__(
            self, kind: str, count: Optional[int] = None, poly: Optional[Any] = None, generator: Optional[Any] = None,
            form: Optional[Any] = None, power: Optional[int] = None, scale: Optional[Fraction] = None
    ) -> None:
        self.kind = kind
        self.count = count
        self.poly = poly
        self.generator = generator
        self.form = form
        self.power = power
        self.scale = scale

    @classmethod
    def empty(cls) -> NonSingularityCertificate:
        return cls(CertificateKind.Empty)

    @property
    def is_empty(self) -> bool:
        return self.kind == CertificateKind.Empty

    def to_dict(self) -> Dict[str, Any]:
        data = {'kind': self.kind}
        if self.count is not None:
            data['count'] = self.count

        if self.poly is not None:
            data['poly'] = self.poly.to_list()

        if self.generator is not None:
            data['generator'] = self.generator.to_dict()

        if self.form is not None:
            data['form'] = str(self.form.as_expr())
            data['power'] = self.power
            data['scale'] = str(self.scale)

        return data


class FullNonSingularityVerdict(AutoRepr):
    """
    The verdict of a full non-singularity test.

    Attributes:
        kind (str): 'verified', 'refuted' or 'unknown'.
        witness (Optional[Matrix]): a nonzero singular element of the subspace.
        certificate (Optional[NonSingularityCertificate]): the proof attached to a Verified verdict.
        samples_tested (int): the number of elements examined.
        reason (Optional[str]): why a subspace was refuted without a witness.

    """
    kind: str
    witness: Optional[Any]
    certificate: Optional[NonSingularityCertificate]
    samples_tested: int
    reason: Optional[str]

    def __init__(
            self, kind: str, witness: Optional[Any] = None, certificate: Optional[NonSingularityCertificate] = None,
            samples_tested: int = 0, reason: Optional[str] = None
    ) -> None:
        self.kind = kind
        self.witness = witness
        self.certificate = certificate
        self.samples_tested = samples_tested
        self.reason = reason

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind, 'witness': dump(self.witness), 'certificate': dump(self.certificate),
            'samples_tested': self.samples_tested, 'reason': self.reason
        }


class MaximalSingularType(AutoRepr):
    """
    The type of a maximal singular subspace.

    Attributes:
        kind (str): 'kernel_type' (V = L_D with D = span(vector)) or 'image_type' (V = L^H with H the hyperplane
            of normal vector 'vector').
        vector (Matrix): the normalized column vector, first nonzero coordinate equal to 1.

    """
    kind: str
    vector: Any

    def __init__(self, kind: str, vector: Any) -> None:
        self.kind = kind
        self.vector = vector

    def __eq__(self, other):
        if isinstance(other, MaximalSingularType):
            return self.kind == other.kind and self.vector == other.vector

        return False

    def __hash__(self):
        return hash((self.kind, self.vector))

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'vector': dump(self.vector)}


class PreservationVerdict(AutoRepr):
    """
    The verdict of a GL-preservation test.

    Attributes:
        kind (str): 'exhaustive_pass', 'sampled_pass' or 'refuted'.
        count (int): the number of invertible matrices checked.
        witness (Optional[Matrix]): an invertible matrix with a singular image.

    """
    kind: str
    count: int
    witness: Optional[Any]

    def __init__(self, kind: str, count: int = 0, witness: Optional[Any] = None) -> None:
        self.kind = kind
        self.count = count
        self.witness = witness

    @property
    def passed(self) -> bool:
        return self.kind != VerdictKind.Refuted

    @property
    def certified(self) -> bool:
        return self.kind == VerdictKind.ExhaustivePass

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'count': self.count, 'witness': dump(self.witness)}


class PreserverClassification(AutoRepr):
    """
    The structure of a linear endomorphism of M_n(K) with respect to GL-preservation.

    Attributes:
        tag (str): one of the ClassificationTag values.
        P (Optional[Matrix]): the left factor of a Frobenius map, first nonzero entry in row-major order equal to 1.
        Q (Optional[Matrix]): the right factor of a Frobenius map.
        X (Optional[Matrix]): the normalized column of a pinch map.
        A (Optional[Matrix]): the coordinate matrix of alpha in the canonical basis of V.
        V (Optional[MatrixSubspace]): the image of a pinch map.
        vstatus (Optional[FullNonSingularityVerdict]): the full non-singularity verdict of V.
        witness (Optional[Matrix]): an invertible matrix with a singular image.
        report (Optional[Dict[str, Any]]): details for NotPreserver candidates and Unverified results.
        preservation (Optional[PreservationVerdict]): the preservation verdict the classification started from.

    """
    tag: str
    P: Optional[Any]
    Q: Optional[Any]
    X: Optional[Any]
    A: Optional[Any]
    V: Optional[Any]
    vstatus: Optional[FullNonSingularityVerdict]
    witness: Optional[Any]
    report: Optional[Dict[str, Any]]
    preservation: Optional[PreservationVerdict]

    def __init__(
            self, tag: str, P: Optional[Any] = None, Q: Optional[Any] = None, X: Optional[Any] = None,
            A: Optional[Any] = None, V: Optional[Any] = None, vstatus: Optional[FullNonSingularityVerdict] = None,
            witness: Optional[Any] = None, report: Optional[Dict[str, Any]] = None,
            preservation: Optional[PreservationVerdict] = None
    ) -> None:
        self.tag = tag
        self.P = P
        self.Q = Q
        self.X = X
        self.A = A
        self.V = V
        self.vstatus = vstatus
        self.witness = witness
        self.report = report
        self.preservation = preservation

    @property
    def twisted(self) -> bool:
        return self.tag in (ClassificationTag.FrobeniusTwisted, ClassificationTag.PinchTwisted) or bool(
            self.tag == ClassificationTag.Unverified and self.report and self.report.get('twisted')
        )

    @property
    def is_frobenius(self) -> bool:
        return self.tag in ClassificationTag.Frobenius

    @property
    def is_pinch(self) -> bool:
        return self.tag in ClassificationTag.Pinch

    def to_dict(self) -> Dict[str, Any]:
        data = {'tag': self.tag}
        for name in ('P', 'Q', 'X', 'A', 'V', 'vstatus', 'witness', 'report', 'preservation'):
            value = getattr(self, name)
            if value is not None:
                data[name] = dump(value)

        return data


class DivisionVerdict(AutoRepr):
    """
    The verdict of a division test on a structure-constant algebra.

    Attributes:
        kind (str): 'division', 'not_division' or 'unknown'.
        certificate (Optional[NonSingularityCertificate]): the proof attached to a Division verdict.
        witness (Optional[Matrix]): a nonzero element a with a singular left multiplication.
        partner (Optional[Matrix]): a nonzero y with a * y = 0.
        samples_tested (int): the number of elements examined.

    """
    kind: str
    certificate: Optional[NonSingularityCertificate]
    witness: Optional[Any]
    partner: Optional[Any]
    samples_tested: int

    def __init__(
            self, kind: str, certificate: Optional[NonSingularityCertificate] = None, witness: Optional[Any] = None,
            partner: Optional[Any] = None, samples_tested: int = 0
    ) -> None:
        self.kind = kind
        self.certificate = certificate
        self.witness = witness
        self.partner = partner
        self.samples_tested = samples_tested

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind, 'certificate': dump(self.certificate), 'witness': dump(self.witness),
            'partner': dump(self.partner), 'samples_tested': self.samples_tested
        }


class LineReport(AutoRepr):
    """
    The preimages of the kernel-type subspaces L_{D_i}, D_i = span(e_i), under a preserver.

    Attributes:
        types (List[MaximalSingularType]): the type of each preimage.
        twisted (bool): True if the preimages are of image type.
        p (int): the dimension of the span of the lines D'_i.
        bijective (bool): True if the map is bijective.
        passed (bool): True if all types agree and p = n for bijective maps, p = 1 for singular ones.

    """
    types: List[MaximalSingularType]
    twisted: bool
    p: int
    bijective: bool
    passed: bool

    def __init__(self, types: List[MaximalSingularType], twisted: bool, p: int, bijective: bool, passed: bool) -> None:
        self.types = types
        self.twisted = twisted
        self.p = p
        self.bijective = bijective
        self.passed = passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            'types': dump(self.types), 'twisted': self.twisted, 'p': self.p, 'bijective': self.bijective,
            'passed': self.passed
        }


class AuditReport(AutoRepr):
    """
    A generic audit outcome.

    Attributes:
        name (str): the audit name.
        field (str): the field in text format.
        n (int): the matrix size.
        passed (bool): True if no anomaly was found.
        details (Dict[str, Any]): counts and other audit specific data.
        anomalies (List[str]): descriptions of everything that went wrong.

    """
    name: str
    field: str
    n: int
    passed: bool
    details: Dict[str, Any]
    anomalies: List[str]

    def __init__(
            self, name: str, field: str, n: int, details: Optional[Dict[str, Any]] = None,
            anomalies: Optional[List[str]] = None
    ) -> None:
        self.name = name
        self.field = field
        self.n = n
        self.details = details or {}
        self.anomalies = anomalies or []
        self.passed = not self.anomalies

    def add_anomaly(self, anomaly: str) -> None:
        self.anomalies.append(anomaly)
        self.passed = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            'format': REPORT_FORMAT, 'name': self.name, 'field': self.field, 'n': self.n, 'passed': self.passed,
            'details': dump(self.details), 'anomalies': list(self.anomalies)
        }


@dataclass
class CampaignConfig:
    """
    The configuration of an enumeration campaign.

    Attributes:
        field (str): the field in 'gf:p' format.
        n (int): the matrix size.
        budget (int): the enumeration budget in field elements.
        samples (int): the number of random samples for sampled checks.
        jobs (int): the number of worker processes.
        seed (int): the random seed.
        out (Optional[str]): the report output path.
        resume (Optional[str]): the path of an incomplete report to resume from.
        allow_long (bool): allow campaigns above the long job threshold.
        ignore_cap (bool): allow campaigns above the hard map cap (needs allow_long as well).
        early_exit (bool): stop testing a map at its first refuting matrix.
        quiet (bool): disable progress bars.

    """
    field: str = 'gf:2'
    n: int = 2
    budget: int = 2 ** 24
    samples: int = 1000
    jobs: int = 1
    seed: int = 0
    out: Optional[str] = None
    resume: Optional[str] = None
    allow_long: bool = False
    ignore_cap: bool = False
    early_exit: bool = True
    quiet: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class EnumerationReport(AutoRepr):
    """
    The outcome of an exhaustive scan of all linear endomorphisms of M_n(GF(p)).

    Attributes:
        field (str): the field in text format.
        n (int): the matrix size.
        total_maps (int): the number of endomorphisms, p^(n^4).
        scanned_maps (int): the number of endomorphisms actually scanned.
        preserver_count (int): the number of GL-preservers found.
        bijective_count (int): the number of bijective preservers.
        singular_count (int): the number of singular preservers.
        class_histogram (Dict[str, int]): the number of preservers per classification tag.
        frobenius_expected (int): the size of the constructively generated Frobenius set.
        pinch_expected (int): the size of the constructively generated pinch set.
        full_nonsingular_subspaces (int): the number of full non-singular subspaces found by the scan.
        anomalies (List[str]): descriptions of everything that went wrong; empty on success.
        wall_time (float): the campaign duration in seconds.
        partitions (List[int]): the completed partitions.
        partition_count (int): the number of partitions of the scan.
        complete (bool): False if a partition was dropped.
        preserver_digest (str): the SHA-256 digest of the sorted preserver codes.
        seed (int): the seed used for the matrix test order.
        records (List[Dict[str, Any]]): the per-preserver records of the completed partitions, kept while incomplete.

    """
    field: str
    n: int
    total_maps: int
    scanned_maps: int
    preserver_count: int
    bijective_count: int
    singular_count: int
    class_histogram: Dict[str, int]
    frobenius_expected: int
    pinch_expected: int
    full_nonsingular_subspaces: int
    anomalies: List[str]
    wall_time: float
    partitions: List[int]
    partition_count: int
    complete: bool
    preserver_digest: str
    seed: int
    records: List[Dict[str, Any]]

    def __init__(self, field: str, n: int, total_maps: int, partition_count: int, seed: int = 0) -> None:
        self.field = field
        self.n = n
        self.total_maps = total_maps
        self.scanned_maps = 0
        self.preserver_count = 0
        self.bijective_count = 0
        self.singular_count = 0
        self.class_histogram = {tag: 0 for tag in ClassificationTag.All}
        self.frobenius_expected = 0
        self.pinch_expected = 0
        self.full_nonsingular_subspaces = 0
        self.anomalies = []
        self.wall_time = 0.0
        self.partitions = []
        self.partition_count = partition_count
        self.complete = False
        self.preserver_digest = ''
        self.seed = seed
        self.records = []

    @property
    def passed(self) -> bool:
        return self.complete and not self.anomalies

    def to_dict(self) -> Dict[str, Any]:
        data = {name: dump(value) for name, value in vars(self).items()}
        data['format'] = REPORT_FORMAT
        data['passed'] = self.passed
        data['partitions'] = sorted(self.partitions)
        if self.complete:
            del data['records']

        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> EnumerationReport:
        report = cls(
            field=data['field'], n=data['n'], total_maps=data['total_maps'], partition_count=data['partition_count'],
            seed=data.get('seed', 0)
        )
        for name in vars(report):
            if name in data:
                setattr(report, name, data[name])

        return report


@dataclass
class ExpectedSets:
    """
    The constructively generated preservers of a campaign, as packed map codes.

    Attributes:
        frobenius (Set[MapCode]): every u_{P,Q} and v_{P,Q}.
        pinch (Set[MapCode]): every pinch map.
        subspaces (int): the number of full non-singular subspaces the pinch maps go through.

    """
    frobenius: Set[MapCode] = field(default_factory=set)
    pinch: Set[MapCode] = field(default_factory=set)
    subspaces: int = 0

    @property
    def all(self) -> Set[MapCode]:
        return self.frobenius | self.pinch


@dataclass
class CayleyTable:
    """
    A multiplication table of a unital algebra on e_0 = 1, e_1, ..., e_{n-1} given by oriented triples:
        for every triple (a, b, c), e_a e_b = e_c, e_b e_c = e_a, e_c e_a = e_b, the reversed products are negated,
        and e_i e_i = -1 for i > 0.

    Attributes:
        name (str): the algebra name.
        dimension (int): the dimension n.
        triples (List[List[int]]): the oriented triples of imaginary units.

    """
    name: str
    dimension: int
    triples: List[List[int]] = field(default_factory=list)


@dataclass
class DefaultTables:
    """
    An instance with shipped multiplication tables.
    """
    Quaternions = CayleyTable(**json.loads('''{"name": "hamilton_quaternions", "dimension": 4, "triples": [[1, 2, 3]]}'''))
    Octonions = CayleyTable(**json.loads(
        '''{"name": "octonions", "dimension": 8, "triples": [[1, 2, 4], [2, 3, 5], [3, 4, 6], [4, 5, 7], [5, 6, 1],
        [6, 7, 2], [7, 1, 3]]}'''
    ))
