"""Sum-of-squares programming: modeling, SDP compilation, an interior-point solver and certificates."""

from .certify import (
    BoundResult,
    RationalCertificate,
    RoundingError,
    exact_psd,
    findbound,
    findbound_constrained,
    findlyap,
    findsos,
    rational_round,
    sos_matrix_decompose,
)
from .compiler import CompileError, Cone, GramBasis, SdpProblem, assemble, heuristic_reduce, multipartite_reduce, newton_reduce
from .extract import GramCertificate, SosSolution, gram_of, moment_matrix, residuals, sosgetsol, sossolve
from .model import (
    ModelError,
    SchemaError,
    SosProgram,
    parse,
    program_from_dict,
    program_to_dict,
    serialize,
    sosdecvar,
    soseq,
    sosineq,
    sosmatrixineq,
    sospolymatrixvar,
    sospolyvar,
    sosprogram,
    sossetobj,
    sossosmatrixvar,
    sossosvar,
)
from .polynomial import (
    PolyMatrix,
    Polynomial,
    PolynomialError,
    VarTable,
    diff,
    evaluate,
    monomials,
    mpmonomials,
    poly_add,
    poly_mul,
    poly_parse,
    poly_pow,
    poly_sub,
)
from .sdp import SdpError, SdpSolution, SolveOptions, SolveReport, sdp_solve
from .sdpa import SdpaError, sdpa_export, sdpa_import, sdpa_import_solution, sdpa_write_solution

__version__ = "0.1.0"
