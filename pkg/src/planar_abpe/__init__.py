"""Planar measures, Cauchy transforms, dyadic coloring schemes, harmonic measures and
bounded point evaluations of polynomial/rational spans in L^2(mu)."""
from .abpe import (FunctionBasis, decompose, density_test, evaluation_bound, gram_matrix,
                   kernel_function, scan_abpe)
from .cauchy import (build_cover, cauchy_transform, coefficients_at_infinity, elementary_check,
                     localize)
from .coloring import (CauchyPhi, ConstantPhi, FunctionPhi, classify_point, is_light_square,
                       run_scheme, vanishing_consistency)
from .geometry import (DyadicSquare, SquareSet, is_path_of_squares, locate_square,
                       polynomial_hull_boundary)
from .harmonic import (annulus_domain, disk_domain, harmonic_measure, mutually_singular, sweep)
from .measure import (annulus_measure, atom, circle_measure, disk_measure, integrate, measure,
                      restrict, segment_measure, total_mass)
from .scene import load_scene, parse_scene, serialize_scene

__version__ = "0.1.0"
