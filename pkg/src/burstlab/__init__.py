"""burstlab: build, simulate, dissect and classify slow-fast bursters."""

from .params import ParamSet, UnknownParameterError, load_config
from .system import (DimensionError, EventRecord, SlowFastSystem, Trajectory,
                     eval_fast_time, eval_slow_time, fast_subsystem)
from .integrate import (EventSpec, IntegratorConfig, IntegrationError,
                        convergence_order, integrate, save_trajectory,
                        section_event, spike_events)
from .models import Model, ModelPreset, UnknownModelError, build, list_models, MODEL_IDS

__version__ = "0.1.0"

__all__ = [
    "ParamSet", "UnknownParameterError", "load_config",
    "SlowFastSystem", "Trajectory", "EventRecord", "DimensionError",
    "eval_fast_time", "eval_slow_time", "fast_subsystem",
    "EventSpec", "IntegratorConfig", "IntegrationError",
    "integrate", "convergence_order", "save_trajectory",
    "section_event", "spike_events",
    "Model", "ModelPreset", "UnknownModelError", "build", "list_models", "MODEL_IDS",
    "__version__",
]
