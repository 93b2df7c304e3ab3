"""Exact-arithmetic workbench for robust linear semi-infinite programming duality."""

from .rationals import rat, parse_rat, rat_str, RAT_BACKEND
from .model import (Instance, UPoint, USet, ExtValue, NEG_INF, POS_INF,
                    ParseError, ValidationError, CapExceeded,
                    load_instance, save_instance, instance_from_dict,
                    instance_to_dict, expand_constraints, enumerate_selections,
                    gen_random)
from .lp import (LinearProgram, make_lp, lp_solve, Optimal, Unbounded, Infeasible,
                 feasible, strict_feasible, verify_optimal, verify_unbounded,
                 verify_farkas)
from .cones import (GenCone, UnionCone, HalfspaceCone, ConvexityVerdict, Caps,
                    build_cone, member, dd_convert, dd_generators,
                    union_convex_decide, union_contains, value_query,
                    DimensionLimit, NotSingleton)
from .duals import (DualOutcome, DualCertificate, DiagramReport, primal_value,
                    dual_value, diagram_check, lip_dual_value,
                    verify_dual_certificate, RouteUnavailable)
from .verify import (theorem_check, farkas_check, slater_check, hypothesis_report,
                     TheoremReport, FarkasReport, SlaterReport, HypothesisReport,
                     VariantMismatch, default_objectives)
from .subaffine import (SAPoint, SAInstance, expand_subaffine, build_R, rsad_value,
                        subaffine_farkas, load_sa_instance, save_sa_instance,
                        sa_primal_value)

__version__ = "0.1.0"
