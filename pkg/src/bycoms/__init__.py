"""Sequential-deployment swarm navigation on grid terrain with virtual potential fields."""

from .agent import AgentParams, AgentState, Mode, NoiseConfig
from .field import FieldSet, FieldSource, epsilon_to_threshold, gradient_at, strength_at
from .sim import SimConfig, SimResult, SimTrace, load_trace, run_trial, serialize_trace
from .terrain import GridTerrain, PerlinConfig, generate_terrain, min_path_width, path_exists

__version__ = "0.1.0"

__all__ = [
    "AgentParams", "AgentState", "Mode", "NoiseConfig",
    "FieldSet", "FieldSource", "epsilon_to_threshold", "gradient_at", "strength_at",
    "SimConfig", "SimResult", "SimTrace", "load_trace", "run_trial", "serialize_trace",
    "GridTerrain", "PerlinConfig", "generate_terrain", "min_path_width", "path_exists",
]
