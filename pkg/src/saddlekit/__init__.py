"""saddlekit: numerical evidence for global saddle behaviour of planar maps.

The extended workflow lives in the submodules; the names re-exported here are
the ones a script actually needs: build a map (``MapSpec``) or a time-T map of
a forced system (``TimeTMap``), census and classify its fixed points, grow the
invariant curves, and ask ``certify`` for an auditable verdict.
"""

from .certify import Certificate, CertifyConfig, CertVerdict, certify
from .degree import Circle, Polygon, fixed_point_index, hyperbolic_index, index_at_point
from .expressions import Expression, ExpressionSyntaxError, parse
from .fixedpoints import (
    FixedPointCensus,
    FixedPointRecord,
    SaddleKind,
    classify_local,
    find_fixed_points,
    orientation,
    spectrum_gap,
)
from .flows import (
    LienardSystem,
    PeriodicSystem,
    TimeTMap,
    build_lienard,
    find_periodic_orbit,
    integrate,
    monodromy,
)
from .manifolds import ManifoldPolyline, find_contacts, grow_stable, grow_unstable
from .planarmap import (
    InverseView,
    MapSpec,
    Region,
    TranslatedMap,
    classify_omega_batch,
    square,
)
from .symmetry import detect_symmetry

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "CertifyConfig",
    "CertVerdict",
    "certify",
    "Circle",
    "Polygon",
    "fixed_point_index",
    "hyperbolic_index",
    "index_at_point",
    "ExpressionError",
    "parse_expression",
    "FixedPointCensus",
    "FixedPointRecord",
    "SaddleKind",
    "classify_local",
    "find_fixed_points",
    "orientation",
    "spectrum_gap",
    "LienardSystem",
    "PeriodicSystem",
    "TimeTMap",
    "build_lienard",
    "find_periodic_orbit",
    "integrate",
    "monodromy",
    "ManifoldPolyline",
    "find_contacts",
    "grow_stable",
    "grow_unstable",
    "InverseView",
    "MapSpec",
    "Region",
    "TranslatedMap",
    "classify_omega_batch",
    "square",
    "detect_symmetry",
    "__version__",
]
