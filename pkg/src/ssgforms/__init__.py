"""Resistance forms on the stretched Sierpinski gasket: networks, matching pairs, checks."""

from .topology import Address, Segment, SgClass, Symmetry, canonicalize, vertex_set, sg_class
from .mp_sequence import (
    Constant,
    Explicit,
    Geometric,
    Harmonic,
    MatchingPair,
    MatchingSequence,
    derive,
    make_pair,
    project,
    r_star,
    unproject,
)
from .network import DiscretizedFunction, ResistorNetwork, build_sg, build_ssg, energy, form_components
from .engine import effective_resistance, harmonic_extend, resistance_diameter, trace

__all__ = [
    "Address",
    "Segment",
    "SgClass",
    "Symmetry",
    "canonicalize",
    "vertex_set",
    "sg_class",
    "Constant",
    "Explicit",
    "Geometric",
    "Harmonic",
    "MatchingPair",
    "MatchingSequence",
    "derive",
    "make_pair",
    "project",
    "r_star",
    "unproject",
    "DiscretizedFunction",
    "ResistorNetwork",
    "build_sg",
    "build_ssg",
    "energy",
    "form_components",
    "effective_resistance",
    "harmonic_extend",
    "resistance_diameter",
    "trace",
]
