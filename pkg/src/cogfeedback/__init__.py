"""Delay-driven joint feedback-bit and transmit-power control for
multi-antenna cognitive ad hoc networks."""

__version__ = "0.1.0"

from .config import ScenarioConfig, default_config, load_config
from .control import (
    Allocation,
    ControlResult,
    Shortcut,
    exhaustive_allocate,
    feedback_gain,
    greedy_allocate,
    interference_term,
    min_safe_distance,
    total_cost,
)
from .delay_power import LinkDelaySpec, PowerSolution, avg_rate, min_power, rate_threshold
from .errors import (
    BracketError,
    CogFeedbackError,
    ConfigError,
    ConvergenceError,
    DomainError,
    InfeasibleError,
    InstabilityError,
    ResourceLimitError,
)
