"""Forward model: flow simulation, observations and measurement noise."""

from .observation import (
    CHANNELS,
    PRESSURE,
    SATURATION,
    DataVector,
    NoiseModel,
    ObservationSchedule,
    add_noise,
    observe,
    stack_values,
)
from .simulator import SimConfig, SimOutput, simulate
from .accuracy import convergence_error_table, self_convergence_errors
from .model import AugmentedStateForward, FieldStateForward, ForwardModel

__all__ = [
    'CHANNELS',
    'PRESSURE',
    'SATURATION',
    'DataVector',
    'NoiseModel',
    'ObservationSchedule',
    'add_noise',
    'observe',
    'stack_values',
    'SimConfig',
    'SimOutput',
    'simulate',
    'convergence_error_table',
    'self_convergence_errors',
    'AugmentedStateForward',
    'FieldStateForward',
    'ForwardModel',
]
