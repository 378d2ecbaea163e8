"""Dynamical van der Waals phases of multi-arm atom interferometers near a mirror."""

from .core import (Atom, DipoleCorrelation, DomainError, ExternalPotential,
                   PhysicalConstants, external_potential_value, short_distance_ratio,
                   sodium_like, vdw_gradient, vdw_potential)
from .interferometer import (AdditivityReport, CoherenceMatrix, Extraction, Limits,
                             MagnitudeReport, Scenario, ScenarioError, additivity_report,
                             coherence_matrix, extract_dp12, magnitude_report)
from .numerics import (ConvergenceError, QuadratureConfig, RootConfig, RootError,
                       find_root, integrate)
from .phases import (DoublePathPhase, PhaseBreakdown, coarse_grained_potential,
                     phi_coarse_grained, phi_dp_first_order, phi_dp_retarded, phi_external,
                     phi_sp_first_order, phi_sp_retarded, phi_vdw, sp_endpoint_correction)
from .retardation import DelaySolution, roundtrip_delay_pair, roundtrip_delay_self
from .trajectory import (ScenarioWindow, Segment, Trajectory, TrajectoryError,
                         check_acceleration_bound, make_primitive, validate_eom)

__version__ = "0.1.0"
