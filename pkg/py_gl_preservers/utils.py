import hashlib
import json
import os
from typing import Any, Optional, Iterable

from py_gl_preservers import exceptions


def check_budget(required: int, budget: int, what: str) -> None:
    """
    Check that an exhaustive scan fits into the enumeration budget.

    Args:
        required (int): the number of items the scan would visit.
        budget (int): the budget.
        what (str): a description of the scan for the error message.

    """
    if required > budget:
        raise exceptions.BudgetExceeded(f'{what} needs {required} steps, the budget is {budget}!')


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """
    Count the k-dimensional subspaces of GF(q)^n.

    Args:
        n (int): the ambient dimension.
        k (int): the subspace dimension.
        q (int): the field size.

    Returns:
        int: the Gaussian binomial coefficient.

    """
    if k < 0 or k > n:
        return 0

    numerator = 1
    denominator = 1
    for i in range(k):
        numerator *= q ** (n - i) - 1
        denominator *= q ** (i + 1) - 1

    return numerator // denominator


def to_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, indent=2)


def read_json(path: str) -> Any:
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def write_json(path: str, data: Any) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(to_json(data) + '\n')


def load_document(value: Optional[str]) -> Any:
    """
    Load a JSON document given either as a path to a file or inline.

    Args:
        value (Optional[str]): the path or the JSON text.

    Returns:
        Any: the parsed document.

    """
    if value is None:
        raise exceptions.CLIException('A JSON document is required!')

    if os.path.isfile(value):
        return read_json(value)

    try:
        return json.loads(value)

    except json.JSONDecodeError as e:
        raise exceptions.CLIException(f"'{value}' is neither a file nor valid JSON!", payload={'reason': str(e)})


def digest(items: Iterable[Any]) -> str:
    """The SHA-256 digest of the canonical JSON of the sorted items."""
    payload = json.dumps(sorted(items), separators=(',', ':')).encode('utf-8')
    return hashlib.sha256(payload).hexdigest()
