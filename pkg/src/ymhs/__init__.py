"""Numerical laboratory for Yang-Mills-Higgs-Schrodinger flows.

Finite-difference discretization of the coupled Hamiltonian flow of
the Yang-Mills-Higgs energy on the flat 2-torus (gauge group U(1)
acting on sphere-valued sections), together with its frozen-connection
variant, viscous regularizations, and the gauge-fixed parabolic form.
Every structural identity the schemes rely on (exact discrete
adjointness, energy conservation/dissipation, gauge covariance,
equivalence of the gauge-fixed system, variational consistency) is
certified by the test suite.
"""

from .algebra import LieAlgebra, so3, u1
from .energy import (EnergyReport, VariationalResult, energy_hierarchy,
                     make_report, sobolev_norm, variational_check, ymh_functional)
from .flows import (DeTurckState, FlowConfig, FlowState, Trajectory, cfl_dt,
                    deturck_reconstruct, gauge_ode_step, gradient_pair, integrate,
                    make_preset, preset_pole, preset_twist, rhs_asf, rhs_deturck,
                    rhs_viscous, rhs_ymhs, step_rk4)
from .gauge import (Connection, Curvature, codifferential, covariant_derivative_ad,
                    curvature, exterior_derivative, gauge_transform, rotate_z,
                    yang_mills_energy)
from .grid import TorusGrid, j_on_oneform, l2_inner, l2_norm, partial_derivative
from .kernels import BACKEND
from .matter import (BlowUpError, commutator_check, complex_structure_apply,
                     covariant_derivative_section, covariant_derivative_vertical,
                     killing_field, moment_term, phi_star, project_to_sphere,
                     rough_laplacian, unit_violation, vertical_codifferential)

__version__ = "0.1.0"
