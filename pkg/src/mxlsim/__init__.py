"""Matrix exponential learning on trace-constrained PSD action sets.

Subpackages:

* :mod:`mxlsim.hermitian` -- eigendecomposition-backed matrix functions,
  norms and block-diagonal helpers;
* :mod:`mxlsim.geometry` -- the entropic mirror map, quantum KL
  divergence and Fenchel coupling on the spectrahedron;
* :mod:`mxlsim.schedule` -- power-law step schedules and every derived
  convergence quantity (effective-step moments, ratio bounds,
  divergence recursions);
* :mod:`mxlsim.learner` -- the full, entrywise-masked and sporadic
  update engines over per-link states;
* :mod:`mxlsim.mimo` -- the multicarrier multi-user MIMO
  energy-efficiency game (channels, rates, variable change, analytic
  gradient, signaling costs);
* :mod:`mxlsim.engine` / :mod:`mxlsim.harness` -- batched seeded
  simulation, equilibrium reference estimation, strategy comparison,
  bound verification and the CSV/CLI interfaces.
"""

__version__ = "0.1.0"

from . import engine, geometry, harness, hermitian, learner, mimo, schedule
from .learner import FeedbackStrategy, LearnerState
from .mimo import NetworkConfig, default_network
from .schedule import RateBoundParams, StepSchedule

__all__ = [
    "__version__",
    "engine", "geometry", "harness", "hermitian", "learner", "mimo", "schedule",
    "FeedbackStrategy", "LearnerState", "NetworkConfig", "default_network",
    "RateBoundParams", "StepSchedule",
]
