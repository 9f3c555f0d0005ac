"""Influences and sharp thresholds for monotonic measures on the discrete cube.

Submodules
----------
lattice        configurations, events, up-sets
measure        positive measures, FKG and monotonicity checks, tilting, Russo derivative
influence      conditional and absolute influences, symmetry groups, threshold bounds
encoding       monotone encoding of a monotonic measure by uniform measure on [0,1]^n
random_cluster random-cluster measures on finite graphs and heat-bath sampling
torus          square-lattice torus, crossing events and threshold estimates
continuous     grid densities and a continuous family with no sharp threshold
"""
__version__ = "0.1.0"

from .lattice import Configuration, Event, all_upsets, is_increasing
from .measure import (PositiveMeasure, TiltedFamily, check_fkg_lattice, check_monotonic,
                      check_strong_positive_association, russo_derivative, stochastically_dominates,
                      tilt)
from .influence import (InfluenceReport, SymmetryGroup, absolute_influence, conditional_influence,
                        influence_report)
from .encoding import MonotoneEncoder
from .random_cluster import FiniteGraph, RCParameters, exact_rc_measure, rc_weights, sample_rc
from .torus import TorusLattice, build_torus, estimate_crossing

__all__ = [
    "Configuration", "Event", "all_upsets", "is_increasing", "PositiveMeasure", "TiltedFamily",
    "check_fkg_lattice", "check_monotonic", "check_strong_positive_association", "russo_derivative",
    "stochastically_dominates", "tilt", "InfluenceReport", "SymmetryGroup", "absolute_influence",
    "conditional_influence", "influence_report", "MonotoneEncoder", "FiniteGraph", "RCParameters",
    "exact_rc_measure", "rc_weights", "sample_rc", "TorusLattice", "build_torus", "estimate_crossing",
]
