"""Grid-based fixed point detection, winding indices and sphere degrees."""

from .degree import (
    classify_2valued_sphere,
    classify_rp2,
    degree_sphere,
    lift_parity,
    preimages,
)
from .fixedpoints import (
    UNRELIABLE,
    FixedPointCluster,
    FixedPointReport,
    Unreliable,
    coincidence_min_distance,
    displacement_field,
    find_fixed_points,
    fixed_point_index,
    winding_number,
)
from .grid import GridSpec, fibonacci_sphere, get_surface, sphere_sample
from .scan import CoincidenceResult, merge_points, scan_zeros

__all__ = [
    "GridSpec", "FixedPointReport", "FixedPointCluster", "Unreliable", "UNRELIABLE",
    "find_fixed_points", "fixed_point_index", "coincidence_min_distance", "winding_number",
    "degree_sphere", "classify_2valued_sphere", "classify_rp2", "lift_parity", "preimages",
    "scan_zeros", "merge_points", "CoincidenceResult", "displacement_field",
    "get_surface", "sphere_sample", "fibonacci_sphere",
]
