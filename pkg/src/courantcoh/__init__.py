"""Exact symbolic engine for regular Courant algebroids in finite character
models: graded Poisson algebra, generating Hamiltonian, semifull contraction
onto the minimal model, and standard cohomology by brute force and by the
transgression spectral sequence, cross-validated."""

from .fields import QQ, FunctionField
from .model import (TorusBase, QuadraticLieAlgebraData, DissectionData,
                    ConnectionTriple, CourantSpec, dorfman,
                    validate_quadratic_bundle, validate_courant_axioms,
                    build_ample, apply_dissection_change)
from .rothstein import (build_rothstein, build_theta, torsion_cnabla,
                        master_equation_check, d_standard,
                        derived_structures_check, naive_differential)
from .contraction import (build_contraction, verify_contraction_semifull,
                          phi_theta_check)
from .minimal_model import (build_minimal_model, lambda_brackets,
                            gauge_primitive, verify_gauge)
from .cohomology import (brute_standard_cohomology, minimal_model_cohomology,
                         naive_cohomology, truncated_cohomology, spectral_pages,
                         compare_reports)
from .catalog import catalog, CATALOG_NAMES
from .specfile import load_spec, save_spec

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
