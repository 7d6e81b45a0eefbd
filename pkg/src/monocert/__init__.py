"""Certificates that no mono-unstable 0-skeleton has fewer than 11 vertices."""

from .errors import (
    CampaignError,
    InvalidParameter,
    MonocertError,
    NumericFailure,
    ParseError,
    RoundingFailure,
    SchemaError,
)
from .system import (
    QuadraticSystem,
    SymmetricRationalMatrix,
    VertexAssignment,
    assignment_at,
    build_reduced_system,
    count_assignments,
    enumerate_assignments,
    expand_to_dimension,
)
from .solver import CertificateCandidate, SolverConfig, Status, min_eigenvalue, solve_certificate
from .verifier import (
    IntegerCertificate,
    Verdict,
    VerificationReport,
    check_positive_definite,
    round_to_integer_certificate,
    verify_certificate,
    verify_gram_conditions,
)
from .oracle import ProbePoint, brute_force_scan, search_feasible_point
from .pipeline import CampaignConfig, CampaignSummary, report_summary, run_campaign, verify_file

__version__ = "0.1.0"
