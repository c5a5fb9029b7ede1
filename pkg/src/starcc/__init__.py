"""Star central configurations of five equal masses, reduced to (r3, r5).

The public surface mirrors the layering: geometry (domain + closure),
forces (floating evaluation), intervals (rigorous enclosures), regions
(the 16-piece partition and its proof plans), certify (branch-and-bound +
local uniqueness certificates and their verifier), solver (floating
companion), cli (console entry point).
"""

from .geometry import (
    A,
    B,
    CollisionError,
    DomainError,
    Family,
    FamilyParam,
    FreePoint,
    RangeError,
    StarRadii,
    close_center_of_mass,
    closure_r2,
    closure_r4,
    family_to_point,
    in_domain,
    mutual_distances,
    nd,
    nz,
    positions,
)
from .forces import (
    HESSIAN_CLOSED_FORM,
    HESSIAN_CLOSED_FORM_DET,
    LAMBDA_STAR,
    NearZeroDenominator,
    ResidualVector,
    config_measure,
    gradient_measure,
    hessian_measure,
    lambda_component,
    moment_I,
    potential_U,
    residual_vector,
    y1_residual,
)
from .intervals import (
    Box2,
    DivisionByZeroInterval,
    Interval,
    NegativeArgument,
    gap_interval,
    lambda_interval,
    pentagon_constants,
    y1_interval,
)
from .regions import (
    DELTA_B0,
    REGION_IDS,
    TRUNCATION_R5,
    PartitionReport,
    Region,
    RegionPlan,
    cover,
    partition_audit,
    region_def,
    region_excises_b0,
    region_plan,
)
from .certify import (
    BudgetExhausted,
    Certificate,
    CertificationManifest,
    CertificationRefuted,
    ContractionFailure,
    CoverageGap,
    LeafBoundViolation,
    LocalUniquenessCertificate,
    MalformedCertificate,
    RunConfig,
    certify_all,
    certify_inequality,
    certify_local_uniqueness,
    verify_certificate,
    verify_local_certificate,
)
from .solver import (
    Diverged,
    LeftDomain,
    MaxIterations,
    RefinedRoot,
    RootReport,
    ScanRoot,
    grid_scan,
    newton_refine,
)

__version__ = "1.0.0"

__all__ = [
    "A", "B", "CollisionError", "DomainError", "Family", "FamilyParam",
    "FreePoint", "RangeError", "StarRadii", "close_center_of_mass",
    "closure_r2", "closure_r4", "family_to_point", "in_domain",
    "mutual_distances", "nd", "nz", "positions",
    "HESSIAN_CLOSED_FORM", "HESSIAN_CLOSED_FORM_DET", "LAMBDA_STAR",
    "NearZeroDenominator", "ResidualVector", "config_measure",
    "gradient_measure", "hessian_measure", "lambda_component", "moment_I",
    "potential_U", "residual_vector", "y1_residual",
    "Box2", "DivisionByZeroInterval", "Interval", "NegativeArgument",
    "gap_interval", "lambda_interval", "pentagon_constants", "y1_interval",
    "DELTA_B0", "REGION_IDS", "TRUNCATION_R5", "PartitionReport", "Region",
    "RegionPlan", "cover", "partition_audit", "region_def",
    "region_excises_b0", "region_plan",
    "BudgetExhausted", "Certificate", "CertificationManifest",
    "CertificationRefuted", "ContractionFailure", "CoverageGap",
    "LeafBoundViolation", "LocalUniquenessCertificate",
    "MalformedCertificate", "RunConfig", "certify_all",
    "certify_inequality", "certify_local_uniqueness", "verify_certificate",
    "verify_local_certificate",
    "Diverged", "LeftDomain", "MaxIterations", "RefinedRoot", "RootReport",
    "ScanRoot", "grid_scan", "newton_refine",
    "__version__",
]
