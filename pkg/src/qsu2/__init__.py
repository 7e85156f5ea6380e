"""Truncated spectral triples for the quantum SU(2).

Finite-dimensional models of the q-deformed 3-sphere: exact left and
right actions on the regular and spinor spaces, equivariant real
structure, linear Dirac operators with integer spectrum, diagonal
approximants with certified block-norm decay, and a deterministic
verification suite behind the ``qsu2`` command-line tool.
"""

from .approx import (
    DecayCertificate,
    EigenvalueSequence,
    HatCoefficients,
    analyze_eigenvalue_sequence,
    build_Lq,
    build_pi_hat,
    build_piiop_hat,
    build_T,
    certify_Kq,
    coefficient_difference_check,
    first_order_check,
    hat_coefficients,
)
from .hilbert import (
    ProductIndex,
    RegularIndex,
    SpinorIndex,
    TruncatedBasis,
    TruncatedOperator,
    WeightIndex,
    block_norms,
    commutator,
    enumerate_basis,
    frobenius_norm,
    interior_projector,
    load_operator,
    operator_norm,
    save_operator,
)
from .qnum import DeformationParameter, HalfInteger, cg_half, half_range, q_int, spinor_cs
from .regrep import (
    build_pi,
    build_piop,
    build_tomita,
    check_product_rule_halfspin,
    relation_defects,
    star_name,
)
from .spingeom import (
    DiracSpec,
    GrowthResult,
    SpectralLine,
    SpinCoefficients,
    build_basis_transform,
    build_dirac,
    build_J,
    build_pi_prime,
    build_piiop,
    build_q_dirac,
    classical_spec,
    commutator_growth,
    isospectral_spec,
    nice_spec,
    opposite_spin_coefficients,
    spectrum,
    spin_coefficients,
)
from .symmetry import (
    AlgebraElement,
    act,
    build_symmetry,
    casimir,
    check_equivariance,
    represent_element,
    sigma_l,
)
from .verify import CHECK_NAMES, CheckRecord, SuiteConfig, VerificationReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "CHECK_NAMES",
    "CheckRecord",
    "DecayCertificate",
    "DeformationParameter",
    "DiracSpec",
    "EigenvalueSequence",
    "GrowthResult",
    "HalfInteger",
    "HatCoefficients",
    "ProductIndex",
    "RegularIndex",
    "SpectralLine",
    "SpinCoefficients",
    "SpinorIndex",
    "SuiteConfig",
    "TruncatedBasis",
    "TruncatedOperator",
    "VerificationReport",
    "WeightIndex",
    "act",
    "analyze_eigenvalue_sequence",
    "block_norms",
    "build_J",
    "build_Lq",
    "build_T",
    "build_basis_transform",
    "build_dirac",
    "build_pi",
    "build_pi_hat",
    "build_pi_prime",
    "build_piiop",
    "build_piiop_hat",
    "build_piop",
    "build_q_dirac",
    "build_symmetry",
    "build_tomita",
    "casimir",
    "certify_Kq",
    "cg_half",
    "check_equivariance",
    "check_product_rule_halfspin",
    "classical_spec",
    "coefficient_difference_check",
    "commutator",
    "commutator_growth",
    "enumerate_basis",
    "first_order_check",
    "frobenius_norm",
    "half_range",
    "hat_coefficients",
    "interior_projector",
    "isospectral_spec",
    "load_operator",
    "nice_spec",
    "operator_norm",
    "opposite_spin_coefficients",
    "q_int",
    "relation_defects",
    "represent_element",
    "run_suite",
    "save_operator",
    "sigma_l",
    "spectrum",
    "spin_coefficients",
    "spinor_cs",
    "star_name",
]
