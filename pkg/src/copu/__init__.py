"""Coherence and purity of qubit channels via their Choi states.

Channels enter as Kraus operators, as diagonal affine maps ``(lambda, tau)``
or as named families; every metric is computed on the normalized Choi state
and cross-checked against closed forms where those are trusted.
"""
from .channels import (
    AffineChannel,
    ChoiMatrix,
    GeneralAffine,
    KrausChannel,
    affine_to_choi,
    kraus_to_affine,
    kraus_to_choi,
)
from .classify import (
    is_coherence_breaking,
    is_cp,
    is_degradable_family,
    is_entanglement_breaking,
    is_incoherent_kraus,
    is_strictly_incoherent_kraus,
    is_unital,
    nonunital_cp,
    unital_cp,
)
from .errors import CopuError
from .explorer import boundary, containment, duality_fit, region_envelope, sample_family
from .families import Family, FamilySpec, construct
from .linalg import DEFAULT_TOL, Tolerance
from .metrics import (
    CoherenceReport,
    channel_report,
    concurrence,
    l1_coherence,
    purity,
    rel_entropy_coherence,
)

__version__ = "0.1.0"

__all__ = [
    "AffineChannel",
    "ChoiMatrix",
    "CoherenceReport",
    "CopuError",
    "DEFAULT_TOL",
    "Family",
    "FamilySpec",
    "GeneralAffine",
    "KrausChannel",
    "Tolerance",
    "affine_to_choi",
    "boundary",
    "channel_report",
    "concurrence",
    "construct",
    "containment",
    "duality_fit",
    "is_coherence_breaking",
    "is_cp",
    "is_degradable_family",
    "is_entanglement_breaking",
    "is_incoherent_kraus",
    "is_strictly_incoherent_kraus",
    "is_unital",
    "kraus_to_affine",
    "kraus_to_choi",
    "l1_coherence",
    "nonunital_cp",
    "purity",
    "region_envelope",
    "rel_entropy_coherence",
    "sample_family",
    "unital_cp",
]
