"""Cartesian stiffness of serial chains and parallel manipulators with
passive joints, by the virtual-joint method."""
from .chain import (ActuatedJoint, ChainModel, JacobianPair, PassiveJoint, RigidLink,
                    VirtualSpring6, forward_kinematics, jacobians)
from .errors import (DegenerateGeometry, DeficientSprings, InputError, ModelValidationError,
                     NotSymmetric, NumericalError, RedundantPassiveJoint, RedundantPassiveJoints,
                     SingularBlock, SingularSystem, StiffkitError)
from .kernels import BACKEND
from .linalg import RigidTransform, SymEig, frobenius_block_inverse, skew, sym_eig
from .parallel import (Assembly, LegAttachment, aggregate, assembly_stiffness, transport_matrix,
                       transport_stiffness)
from .serial import (JointClass, ReductionTrace, StiffnessMatrix, base_stiffness, chain_stiffness,
                     classify_passive_joint, closed_form_stiffness, dense_kkt_stiffness,
                     naive_zeroed_stiffness, rank1_update, recursive_reduce, soft_spring_check,
                     trivial_update)
from .stewart import (LegGeometry, StewartParams, analytic_case_matrix, analytic_rank1_sum,
                      build_case, build_leg_model)

__version__ = "0.1.0"
