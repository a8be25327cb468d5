"""Weighted (psi-) densities of radial sets, growth orders, and limits in
psi-density, with a verification catalog for the associated bound family."""

from .density import (BoundReport, DensityEstimate, avoid_exceptional,
                      check_chain, check_finite_measure_zero_density,
                      density_trajectory, estimate_density, extract_set)
from .errors import (ConvergenceError, DomainMismatchError, EvalDomainError,
                     ParseError, PreconditionError, PsiDensityError)
from .expr import Expression, evaluate, parse, to_text
from .functions import (ConstFn, ExpressionFn, FuncFn, LogrFn, ScalarFn,
                        SpikeTrainFn, parse_fn_spec)
from .growth import (GrowthFunction, OrderEstimate, estimate_orders,
                     estimate_type, growth_from_fn, make_unbounded_zigzag,
                     make_zigzag, power_growth)
from .intervals import (IntervalSet, accel4, combine, finlog, geo2,
                        parse_set_spec, psi_measure, random_block_set)
from .limits import (LimitVerdict, cesaro_psi_average, density_limit_certify,
                     dichotomy_check, divergence_witness, integrate,
                     plain_limit_probe, usual_limit_certify)
from .radius import Radius, parse_radius
from .scales import Domain, PsiScale, exp_lift, make_scale, parse_psi_spec
from .verify import (LimitSetSpec, spec_from_zigzag, verify_comparison,
                     verify_growth_corollary, verify_limsup_sets)

__version__ = "0.1.0"
