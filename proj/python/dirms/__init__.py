"""Kernel density estimation and mean-shift mode clustering on unit hyperspheres.

The heavy lifting lives in the compiled extension ``_dirms``; this package
re-exports its public surface under one flat namespace:

- ``KdeModel`` — immutable density estimate with value/gradient/Hessian
  evaluation and single-start mode ascent,
- ``rot_bandwidth`` — automatic bandwidth selection,
- ``cluster`` / ``blurring`` — batch mode clustering,
- ``sample_uniform`` / ``sample_vmf`` / ``sample_mixture`` /
  ``sample_circular`` — seeded, reproducible samplers,
- ``misclassification_rate`` / ``confusion_matrix`` / ``hausdorff_distance``
  — clustering-quality metrics,
- ``lonlat_to_unit`` / ``unit_to_lonlat`` / ``geodesic_distance`` /
  ``embed_angles`` — coordinate helpers,
- ``Error`` — base class of every library-raised exception,
- ``UNASSIGNED`` — the label given to points whose ascent did not converge.
"""

from ._dirms import (
    UNASSIGNED,
    BandwidthSelection,
    ClusterResult,
    Error,
    KdeModel,
    __version__,
    blurring,
    circular_density,
    cluster,
    confusion_matrix,
    embed_angles,
    geodesic_distance,
    hausdorff_distance,
    lonlat_to_unit,
    misclassification_rate,
    rot_bandwidth,
    sample_circular,
    sample_mixture,
    sample_uniform,
    sample_vmf,
    unit_to_lonlat,
)

__all__ = [
    "UNASSIGNED",
    "BandwidthSelection",
    "ClusterResult",
    "Error",
    "KdeModel",
    "__version__",
    "blurring",
    "circular_density",
    "cluster",
    "confusion_matrix",
    "embed_angles",
    "geodesic_distance",
    "hausdorff_distance",
    "lonlat_to_unit",
    "misclassification_rate",
    "rot_bandwidth",
    "sample_circular",
    "sample_mixture",
    "sample_uniform",
    "sample_vmf",
    "unit_to_lonlat",
]
