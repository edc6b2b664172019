"""Weierstrass elliptic functions, critical-value flows, sheet partitions.

The package has three layers:

- ``lattice``, ``period_derivs``: numerical Weierstrass functions on
  arbitrary lattices and closed-form derivatives of their quasi-periods.
- ``jets``, ``ode``, ``quadrature``: truncated Taylor arithmetic, an
  embedded adaptive Runge–Kutta integrator for complex systems, and
  adaptive contour quadrature.
- ``rational``, ``torus``, ``nuttall``, ``fileio``, ``cli``: critical-point
  dynamics for rational and elliptic families, the three-sheet partition
  of the hexagonal torus, and the I/O surface.
"""

from .errors import (BranchPathCrossesSingularity, CollinearPeriods,
                     ContourBlocked, DegenerateCriticalPoint,
                     DegenerateTriangle, DivisionByZeroGerm, DivisorMismatch,
                     EllipflowError, IoError, LatticeDegenerate,
                     MaxStepsExceeded, NoConvergence, NotPrincipal,
                     ParameterCollision, ParseError, PoleAtLatticePoint,
                     PoleHit, RhsFailure, SchemaError, SingularPoint,
                     StepUnderflow, ToleranceUnreachable, ValidationError)
from .fileio import emit, load_family_config, spec_document
from .jets import Jet
from .lattice import (EvalOptions, Lattice, LatticeInvariants, invariants,
                      log_abs_sigma, log_sigma, make_lattice, reduce_to_cell,
                      sigma, wp, wp_inverse, wp_prime, zeta_w)
from .nuttall import (NuttallContext, SheetField, TriangleConfig,
                      classify_sheets, critical_points,
                      hexagonal_invariants, make_context, normalize_triangle,
                      psi, psi_root, schwarz_christoffel_inverse,
                      sheet_component_counts, u_value, uniformizer_pi)
from .ode import IntegratorConfig, TargetPath, Trajectory, integrate
from .period_derivs import dlnsigma_domega, dwp_domega, dzeta_domega
from .quadrature import integrate_polyline, integrate_segment, route_polyline
from .rational import (RationalFamilySpec, RationalFamilyState,
                       RationalTrajectory, critical_values_quadrature,
                       moment_residual, rational_rhs, solve_rational_family)
from .torus import (TorusFamilySpec, TorusFamilyState, TorusTrajectory,
                    critical_point_scales, solve_torus_family, torus_rhs,
                    torus_critical_values, torus_initial_p2m4p,
                    wp_inverse_normalized)

__version__ = "0.1.0"
