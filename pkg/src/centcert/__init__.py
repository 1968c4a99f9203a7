"""Exact certificates for central-sequence and stability constructions.

Subpackages cover: alternating-group representation data (`groups`,
`repalg`), block operator calculus and tensor traces (`blockop`,
`tensortrace`), substitution subshifts with their topological full groups
(`cantor`), certificate drivers (`verify`), measured stability checks
(`jsstab`) and the command line front end (`cli`).
"""

from .exact import (
    ComplexExact,
    ExactScalar,
    GaussianRational,
    NotRepresentable,
    PrecisionExhausted,
    RootScalar,
    certified_sign,
)
from .certificate import Certificate, CertItem
from .jsstab import stability_report, standard_model
from .verify import (
    McDuffParams,
    choose_delta,
    free_example_check,
    mcduff_certificate,
    shift_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "ExactScalar",
    "RootScalar",
    "GaussianRational",
    "ComplexExact",
    "PrecisionExhausted",
    "NotRepresentable",
    "certified_sign",
    "Certificate",
    "CertItem",
    "McDuffParams",
    "choose_delta",
    "mcduff_certificate",
    "shift_certificate",
    "free_example_check",
    "standard_model",
    "stability_report",
    "__version__",
]
