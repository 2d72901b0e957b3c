"""Numerical Lyapunov exponents of rational maps on the projective line.

Two estimator families, log-multiplier averages over repelling periodic
points and log-derivative averages over iterated preimage trees, plus
independent oracles (closed forms, polynomial escape rates, backward-orbit
Monte Carlo) and empirical checks of the side conditions they rely on.
"""

__version__ = "0.1.0"

from .errors import (BudgetExceeded, ConfigError, DegenerateMap,
                     LyapmapError, NoConvergence, RootFindingFailure,
                     TargetRejected, UnknownPreset)
from .geometry import (COMPLEX, INFINITY, ProjectivePoint, ValuedField,
                       chordal_derivative, chordal_dist, complex_field,
                       normalize_point, padic_field, sup_chordal_derivative)
from .ratmap import (RationalMap, build_map, classify_critical_orbits,
                     compose, critical_points, evaluate, exceptional_points,
                     iterate_map, preset_map)
from .roots import RootSet, SolverOptions, polish, solve
from .periodic import (PeriodicPointRecord, estimator_rep,
                       fixed_point_polynomial, nonrepelling_census,
                       periodic_points)
from .preimage import (PreimageTree, backward_orbit_sample, build_tree,
                       estimator_preimage, preimages)
from .oracle import (GreenResult, OracleResult, closed_form, green_function,
                     lyapunov_birkhoff, lyapunov_green)
from .diagnostics import (AtomicMeasure, TargetReport, bad_target_scan,
                          bezout_overlap_check, chordal_potential,
                          potential_convergence_check, przytycki_bound_check)
from .padic import (Disk, PAdicRational, disk_point, gauss_point,
                    good_reduction_test, hsia_kernel, join_disks,
                    padic_chordal_derivative, padic_point)
from .series import EstimateRow, EstimateSeries
