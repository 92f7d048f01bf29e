"""satdp: satellite 6-DOF on-off thruster control via grid dynamic programming,
enumeration-based control allocation, and fault reconfiguration, with a
closed-loop maneuver simulator and a reference-model comparison baseline."""

from .params import (CHANNELS, ISS_ELEMENTS, MU_EARTH, Channel, OrbitModel,
                     SatelliteParams, SatelliteState, ThrusterConfig,
                     channel_of_thruster, elements_to_rv, make_orbit)
from .dynamics import (DegenerateOrbitError, body_wrench, controller_angles,
                       dcm_from_quat, omega_rate, quat_rate, relative_accel,
                       rk4_step, rsw_from_rv)
from .dp import (DPGrid, DPNumericalError, DPProblem, PolicyTable,
                 build_action_grid, build_grid, error_transform, load_policy,
                 lookup, precompute_successors, save_policy, stage_cost,
                 value_iterate)
from .allocation import (FeasibleSet, ThrusterSchedule, allocate, allocate_all,
                         build_feasible, desired_wrench_to_body, pulse_modulate)
from .fault import (FaultConfig, SideClassification, classify_side,
                    reconfigure_bounds, schedule_wmf, tune_distance_table)
from .baseline import (BaselineGains, PatternSearchResult, ReferenceModels,
                       baseline_select, ideal_controls, mrp_from_quat,
                       pattern_search, reference_step, tune_baseline)
from .sim import (ManeuverMetrics, PolicyBundle, Scenario, SimulationError,
                  Trajectory, compare, compute_metrics, run, sweep)
from .solve import (DEFAULT_CONFIG, FAULT_CONFIG, build_problems, load_config,
                    load_policy_set, save_policy_set, solve_policy_set)

__version__ = "0.1.0"
