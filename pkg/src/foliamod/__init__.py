"""p-modulus of codimension-one foliations on warped products.

Submodules: ``geometry`` (warped-product metrics and grids), ``foliation``
(graph foliations, leaf integrals, normal flows), ``modulus`` (p-modulus and
extremal functions), ``variation`` (first and second variation, stability),
``capacity`` (q-capacity of radial condensers) and ``cli``.
"""

from .capacity import Condenser, capacity_q, modulus_capacity_check, q_harmonic_radial
from .errors import (DomainError, FlowDegeneracyError, NumericalError, SingularityError,
                     UnsupportedExponentError)
from .foliation import (GeneralField, GraphFoliation, LevelSetFunction, NormalField,
                        ScalarField, flow_normal_field, graph_foliation, hat,
                        radial_foliation, random_fields, shear_foliation)
from .geometry import GridChart, WarpProfile, bko_residual, leaf_volume
from .modulus import ModulusParams, extremal_function, p_modulus
from .variation import (first_variation, hardy_residual, jacobian_derivatives,
                        jacobian_flow_check, second_variation, stability_scan)

__version__ = "0.1.0"
