"""Online binary classification under drift with selective label sampling.

Core learner (:class:`lasec.learner.Lasec`), perceptron-family and
variance-query baselines, brute-force validation oracles, mistake-bound
evaluators, stream generators and the benchmark harness / CLI.
"""

from .learner import Lasec, LasecParams, RoundOutcome, query_decision, sign
from .data import DriftScenario, ReferenceSequence, ShiftSpec, Stream
from .harness import ExperimentConfig, RunTrace, run_experiment, sweep_query_rate

__all__ = [
    "Lasec",
    "LasecParams",
    "RoundOutcome",
    "query_decision",
    "sign",
    "DriftScenario",
    "ReferenceSequence",
    "ShiftSpec",
    "Stream",
    "ExperimentConfig",
    "RunTrace",
    "run_experiment",
    "sweep_query_rate",
]

__version__ = "0.1.0"
