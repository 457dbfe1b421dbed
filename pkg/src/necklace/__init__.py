"""Fractal necklace iterated function systems.

A necklace system is an ordered family of n >= 3 contractions whose
attractor's 1-level copies F_1..F_n meet cyclically: F_k and F_{k+1} share
exactly one point z_k (a main node) and other pairs are disjoint.  The
package validates that pattern, counts the copies containing a point,
classifies systems (good, stable, bounded ramification, Property I, open set
witnesses), scans for cut points and renders SVG pictures.
"""
from .geometry import AffineMap, Ball, NotContractive, Point, SingularMap
from .system import (BudgetExceeded, NecklaceSystem, NecklaceVerdict, NodeAmbiguityError,
                     PointNotInAttractor, Status, SystemSpecError, attractor_enclosure,
                     contains_point, main_nodes, sample_attractor, validate_necklace)
from .addresses import (DISJOINT, AddressSet, Anchor, CopyGraph, CountInterval,
                        IncidenceAutomaton, NodeRef, PointAddress, SharedNode,
                        UnknownIntersection, UnresolvedMembership, address_set,
                        build_incidence_automaton, copy_graph, copy_intersection,
                        metric_address_set, parse_node_ref, parse_point_address,
                        ramification_sequence, resolve)
from .classify import (ClassificationReport, PolygonWitness, Verdict, bounded_ramification,
                       build_osc_witness_from_component, check_osc_witness,
                       check_property_I, classify, complement_components, is_good,
                       is_stable)
from .topology import (Chain, CutStatus, CutVerdict, approximate_arc, build_chain,
                       check_chain, cut_point_scan, global_cut_point_search)
from .library import BUILTINS, builtin, load_system, parse_system_file, serialize
from .render import RenderOptions, render_svg

__version__ = "0.1.0"

__all__ = ["AffineMap", "Ball", "NotContractive", "Point", "SingularMap", "BudgetExceeded",
           "NecklaceSystem", "NecklaceVerdict", "NodeAmbiguityError", "PointNotInAttractor",
           "Status", "SystemSpecError", "attractor_enclosure", "contains_point", "main_nodes",
           "sample_attractor", "validate_necklace", "DISJOINT", "AddressSet", "Anchor",
           "CopyGraph", "CountInterval", "IncidenceAutomaton", "NodeRef", "PointAddress",
           "SharedNode", "UnknownIntersection", "UnresolvedMembership", "address_set",
           "build_incidence_automaton", "copy_graph", "copy_intersection",
           "metric_address_set", "parse_node_ref", "parse_point_address",
           "ramification_sequence", "resolve", "ClassificationReport", "PolygonWitness",
           "Verdict", "bounded_ramification", "build_osc_witness_from_component",
           "check_osc_witness", "check_property_I", "classify", "complement_components",
           "is_good", "is_stable", "Chain", "CutStatus", "CutVerdict", "approximate_arc",
           "build_chain", "check_chain", "cut_point_scan", "global_cut_point_search",
           "BUILTINS", "builtin", "load_system", "parse_system_file", "serialize",
           "RenderOptions", "render_svg"]
