"""Three-dimensional hydrostatic free-surface model with a semi-implicit
surface and an O(nk) coupling of the implicit vertical columns."""

from .analytic import (
    StandingWaveParams,
    WindDrivenParams,
    error_norms,
    standing_wave_analytic,
    wind_driven_analytic,
)
from .coupling import (
    ColumnSystem,
    assemble_column,
    couple_columns,
    direct_column_solve,
    direct_coupling,
    recover_velocity,
)
from .explicit import ExplicitParams, explicit_operator, update_eddy_viscosity
from .grid import DriedLayerError, Grid, GridError, GridSpec, State, build_grid
from .stepper import StepConfig, integrate, step, total_volume
from .surface import SurfaceSystem, assemble_surface, cg_solve

__version__ = "0.1.0"
