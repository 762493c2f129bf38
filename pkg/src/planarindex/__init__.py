"""Rotation numbers, Conley-Zehnder indices and subharmonics of planar Hamiltonian systems."""

__version__ = "0.1.0"

from .coeffs import CoeffPath, SampledTable, TrigPoly
from .errors import PlanarIndexError
from .flow import angle_lift, angle_map, integrate_fundamental, monodromy, winding, winding_derivative
from .hill import HillProblem, SpectrumReport, hill_to_coeffpath, morse_indices, periodic_eigenvalues
from .index import (
    ClassLabel,
    IndexReport,
    IterationReport,
    RotationInterval,
    classify,
    cz_index,
    cz_index_via_polar,
    index_report,
    iterate_index,
    mean_index,
    rotation_number,
    rotation_vs_winding,
    stability,
    stability_via_second_iterate,
    winding_extrema,
)
from .sp1 import lambda_stratum, multipliers, polar_decompose, rotation_function
from .subharmonics import (
    OrbitResult,
    PlanarSystem,
    SubharmonicCandidate,
    candidates,
    find_orbits,
    k_star_scan,
    poincare_map,
    twist_radii,
    verify_hsub,
)
