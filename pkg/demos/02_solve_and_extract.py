"""Solve a boundary-aligned frame field and extract its singularity graph.

The notch model is a box with a curved step cut around one corner.  Its
frame field contains a single singular curve whose hexahedral valence is 3
at one end and 5 at the other; such 3-5 curves are incompatible with hex
meshing.  Writes the graph as a legacy VTK file next to this script.
"""

import os

import numpy as np

from hexframe.meshio import read_medit, write_vtk_graph
from hexframe.singularities import detect_35, extract_graph, stable_direction
from hexframe.solver import compute_field

HERE = os.path.dirname(__file__)

mesh = read_medit(os.path.join(HERE, "..", "fixtures", "notch.mesh"))
print(mesh)
print("feature curves:", len(mesh.feature_curves))

field = compute_field(mesh)
print("dirichlet energy: %.4f" % field.report["dirichlet_energy"])

graph = extract_graph(field)
print(graph)
for chain in graph.chains:
    print("  %s  from %s to %s" % (
        chain, np.round(chain.points[0], 3), np.round(chain.points[-1], 3)))

flagged = detect_35(graph)
print("3-5 chains:", len(flagged))
for chain in flagged:
    for end in ("start", "end"):
        d = stable_direction(field, chain, end)
        print("  stable direction at %s: %s" % (end, np.round(d, 3)))

out = os.path.join(HERE, "notch_graph.vtk")
write_vtk_graph(graph, out)
print("wrote", out)
