import random
from typing import Union

from py_gl_preservers.algebras import Algebras
from py_gl_preservers.data import config
from py_gl_preservers.fields import FieldSpec
from py_gl_preservers.harness import Harness
from py_gl_preservers.preservers import Preservers
from py_gl_preservers.subspaces import Subspaces


class Workbench:
    """
    The workbench that is used to interact with all library functions.

    Attributes:
        field (FieldSpec): the default field.
        n (int): the default matrix size.
        budget (int): the enumeration budget.
        samples (int): the number of random samples for checks over the rationals.
        jobs (int): the number of worker processes for campaigns.
        seed (int): the random seed.
        monomial_cap (int): the largest generic determinant to expand.
        quiet (bool): disable progress bars.
        rng (random.Random): the seeded random number generator.

    """
    field: FieldSpec
    n: int
    budget: int
    samples: int
    jobs: int
    seed: int
    monomial_cap: int
    quiet: bool
    rng: random.Random

    def __init__(
            self, field: Union[str, FieldSpec] = 'gf:2', n: int = 2, budget: int = config.BUDGET,
            samples: int = config.SAMPLES, jobs: int = config.JOBS, seed: int = config.SEED,
            monomial_cap: int = config.MONOMIAL_CAP, quiet: bool = True
    ) -> None:
        """
        Initialize the class.

        Args:
            field (Union[str, FieldSpec]): the default field, either an instance or in the 'gf:p' or 'q' format.
                ('gf:2')
            n (int): the default matrix size. (2)
            budget (int): the enumeration budget. (GLP_BUDGET)
            samples (int): the number of random samples for checks over the rationals. (GLP_SAMPLES)
            jobs (int): the number of worker processes for campaigns. (GLP_JOBS)
            seed (int): the random seed. (GLP_SEED)
            monomial_cap (int): the largest generic determinant to expand. (GLP_MONOMIAL_CAP)
            quiet (bool): disable progress bars. (True)

        """
        self.field = FieldSpec.parse(field) if isinstance(field, str) else field
        self.n = n
        self.budget = budget
        self.samples = samples
        self.jobs = jobs
        self.seed = seed
        self.monomial_cap = monomial_cap
        self.quiet = quiet
        self.rng = random.Random(seed)

        self.subspaces = Subspaces(self)
        self.preservers = Preservers(self)
        self.algebras = Algebras(self)
        self.harness = Harness(self)

    def __repr__(self):
        return f'Workbench(field={self.field}, n={self.n}, seed={self.seed})'
