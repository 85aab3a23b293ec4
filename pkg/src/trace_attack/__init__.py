"""Simulator and cryptanalysis toolkit for the TRACE ride-hailing masking protocol."""

from .attacks import (
    build_pair_system,
    build_quad_system,
    candidate_locations,
    recover_location,
    recover_pickup,
    recover_quadtree,
    recover_takeoff,
)
from .modmath import SeededRng, gen_prime, mod_inv, rand_bits, signed_rep
from .protocol import LARGE_PARAMS, PAPER_PARAMS, SecurityParams
from .quadtree import Point, Quadtree, gen_random_quadtree, locate

__version__ = "0.1.0"
