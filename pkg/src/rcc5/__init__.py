"""RCC5 constraint reasoning: relation algebra, network solving, order
expansion combinatorics and a polymorphism-based tractability classifier."""
from .algebra import (BASIC_NAMES, ORDERED, ORDERED_NAMES, RCC5, compose,
                      compose_ordered, converse, converse_ordered,
                      enumerate_orbits, parse_relation, triangle_consistent)
from .clone import (BASIC, Behaviour, BooleanOp, Classification, ExpansionSpec,
                    build_h_cyclic, classify, compose_behaviours, eta,
                    find_cyclic_rho, find_wedge_behaviour, find_wnu_behaviour,
                    is_realizable, rho)
from .network import (AtomicNetwork, Constraint, Instance, RelationSpec,
                      build_model, evaluate, independent_copies, path_consistency,
                      pc_decide, reduce_to_type_csp, solve, solve_atomic)
from .ramsey import (OrderedStructure, amalgamate_one_point, boolean_embed,
                     check_ordered_age, eval_Okde, eval_Rkl, order_realize)

__version__ = "0.1.0"
