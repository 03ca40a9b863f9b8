"""Numerical lab for the damped p-system in Riemann-invariant form."""
from .thermo import PressureLaw, DomainError
from .damping import (NoDamping, PowerTime, SpaceTimeBuiltin, Tabulated, TimeDecay, SpaceDecay,
                      amplification, path_amplification, validate_bounds)
from .shapes import Shape
from .solver import (Grid1D, FieldState, SmallPerturbation, Explicit, InitialDataFamily,
                     make_initial, cfl_dt, step, run, Trajectory, ConfigError,
                     VacuumEvent, NonFiniteEvent)
from .config import RunConfig, parse_config, load_config, ConfigErrors

__version__ = "0.1.0"
