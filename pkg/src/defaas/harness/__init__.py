"""Declarative experiment harness: phased load profiles, the document
preparation workflow, metric collection, and the `experiment` CLI."""

from .config import ExperimentConfig, from_dict, load  # noqa: F401
from .loadprofile import Constant, Phase, Ramp, artificial_load, phase_label  # noqa: F401
from .metrics import percentile, summarize  # noqa: F401
from .runner import run_experiment  # noqa: F401
from .usecase import default_use_case  # noqa: F401
