from .network import LeoMec, SweepSpec, evaluate_scenario
from .params import from_config, load_config

__all__ = ["LeoMec", "SweepSpec", "evaluate_scenario", "from_config", "load_config"]
