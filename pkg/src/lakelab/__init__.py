"""lakelab: numerical laboratory for shallow lake flows over degenerate topography.

Solves the depth-weighted stream-function problems of the lake equations,
reconstructs velocity through the Hodge splitting, transports potential
vorticity conservatively, estimates weighted capacities, and runs the two
singular-limit studies: an island shrinking to a point (whose circulation
survives as a point vortex) and an island emerging from a rising bottom.
"""

from .elliptic import BoundaryValues, EllipticOperator, SolveReport, assemble, gradient, hardy_ratio, solve
from .errors import (BadCutoff, BadTestFunction, ConfigError, DegenerateCoefficient,
                     DegenerateWeight, EmptyBand, InvalidDepth, InvalidSequence,
                     IterationLimit, LakeError, NoIsland, TimeStepTooLarge)
from .fields import DepthSamples, sample_depth, weighted_norm
from .geometry import (Annulus, CutoffChi, Disk, Flat, Flooded, LakeSpec,
                       MaskedJordan, PowerRadial, Raised, Tabulated, Volcano,
                       island_radius, make_eps_sequence, probe_cutoff)
from .grid import Grid, cartesian_masked_grid, disk_mask, grid_for, polar_grid
from .hodge import (HodgeBasis, VelocityField, capacity, capacity_floor,
                    circle_circulation, default_cutoff, dirac_diagnostic_row,
                    enclosed_mass, generalized_circulation, harmonic_basis,
                    probe_circulation, reconstruct_velocity, velocity_from_stream)
from .limits import (ConvergenceReport, EpsRow, StudySpec, dirac_diagnostic,
                     radial_velocity_reference, run_emergent, run_evanescent,
                     run_study)
from .transport import (FlowState, TimeStepper, bump_scalar_test, divfree_bump_test,
                        evolve, flow_diagnostics, initial_state, stable_dt, step,
                        weak_velocity_residual, weak_vorticity_residual)

__version__ = "0.1.0"
