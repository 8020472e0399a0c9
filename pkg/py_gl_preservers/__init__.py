from .data import config
from .workbench import Workbench
