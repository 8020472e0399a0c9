import os

from dotenv import load_dotenv

load_dotenv()

BUDGET = int(os.getenv('GLP_BUDGET', 2 ** 24))
SAMPLES = int(os.getenv('GLP_SAMPLES', 1000))
JOBS = int(os.getenv('GLP_JOBS', 1))
SEED = int(os.getenv('GLP_SEED', 0))
MAP_CAP = int(os.getenv('GLP_MAP_CAP', 2 ** 26))
LONG_JOB = int(os.getenv('GLP_LONG_JOB', 2 ** 20))
MONOMIAL_CAP = int(os.getenv('GLP_MONOMIAL_CAP', 10 ** 6))
LOG_LEVEL = str(os.getenv('GLP_LOG_LEVEL', 'WARNING')).upper()
