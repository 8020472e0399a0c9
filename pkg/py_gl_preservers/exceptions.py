import json
from typing import Optional, Dict, Any


class FieldException(Exception):
    pass


class FieldMismatch(FieldException):
    pass


class DivisionByZero(FieldException):
    pass


class DegreeZero(FieldException):
    pass


class BoundExceeded(FieldException):
    pass


class NotPrime(FieldException):
    pass


class MatrixException(Exception):
    pass


class DimensionMismatch(MatrixException):
    pass


class NotSquare(MatrixException):
    pass


class SingularMatrix(MatrixException):
    pass


class NoSolution(MatrixException):
    pass


class SubspaceException(Exception):
    pass


class ZeroVector(SubspaceException):
    pass


class BudgetExceeded(SubspaceException):
    pass


class NotMaximalSingular(SubspaceException):
    pass


class PreserverException(Exception):
    pass


class SingularInput(PreserverException):
    pass


class ClassificationAnomaly(PreserverException):
    pass


class AlgebraException(Exception):
    pass


class NotIrreducible(AlgebraException):
    pass


class MinusOneIsSquare(AlgebraException):
    pass


class UnsupportedField(AlgebraException):
    pass


class DependentBasis(AlgebraException):
    pass


class HarnessException(Exception):
    pass


class WorkerFailure(HarnessException):
    pass


class CapExceeded(HarnessException):
    pass


class CLIException(Exception):
    """
    An exception that occurs when a command cannot be carried out.

    Attributes:
        payload (Optional[Dict[str, Any]]): a machine-readable description of the error.
        exit_code (int): the process exit code.

    """
    payload: Optional[Dict[str, Any]]
    exit_code: int

    def __init__(self, message: str, payload: Optional[Dict[str, Any]] = None, exit_code: int = 2) -> None:
        """
        Initialize the class.

        Args:
            message (str): a human-readable message.
            payload (Optional[Dict[str, Any]]): a machine-readable description of the error. (None)
            exit_code (int): the process exit code. (2)

        """
        super().__init__(message)
        self.payload = payload
        self.exit_code = exit_code

    def to_json(self) -> str:
        data = {'error': type(self).__name__, 'message': str(self)}
        if self.payload:
            data['details'] = self.payload

        return json.dumps(data, sort_keys=True)

    def __str__(self):
        return self.args[0] if self.args else ''
