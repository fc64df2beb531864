"""Singularity graph extraction and classification.

Faces whose three vertex frames compose to a non-identity octahedral
matching are singular; chains of tetrahedra connected through singular
faces form the singularity graph.  Chain valences follow from the quarter
turn holonomy: valence = 4 - 4*index with index +-1/4.
"""

from fractions import Fraction

import numpy as np

from . import frames as fr
from .errors import AmbiguousAxis, UnprojectableVertex

QUALITY_CUTOFF = 0.5


class SingularFace:
    """Interior triangle with non-trivial holonomy."""

    __slots__ = ("face_id", "tri", "tets", "group_elem", "index", "world_rotation")

    def __init__(self, face_id, tri, tets, group_elem, index, world_rotation):
        self.face_id = face_id
        self.tri = tri
        self.tets = tets
        self.group_elem = group_elem
        self.index = index            # Fraction(+-1, 4) or the string "other"
        self.world_rotation = world_rotation

    def __repr__(self):
        return "SingularFace(%s, g=%d, index=%s)" % (self.tri, self.group_elem, self.index)


class SingularChain:
    """Connected chain of tets traversed through singular faces."""

    def __init__(self, chain_id, tets, faces, points, valence_start, valence_end,
                 endpoint_start, endpoint_end):
        self.chain_id = chain_id
        self.tets = tets
        self.faces = faces            # SingularFace list along the traversal
        self.points = np.asarray(points, dtype=float)
        self.valence_start = valence_start
        self.valence_end = valence_end
        self.endpoint_start = endpoint_start  # ("boundary", point) | ("junction", tet) | ("closed", None)
        self.endpoint_end = endpoint_end
        self.is_35 = (
            isinstance(valence_start, int)
            and isinstance(valence_end, int)
            and {valence_start, valence_end} == {3, 5}
        )

    @property
    def closed(self):
        return self.endpoint_start[0] == "closed"

    def __repr__(self):
        return "SingularChain(id=%d, tets=%d, valences=(%s,%s), ends=(%s,%s))" % (
            self.chain_id,
            len(self.tets),
            self.valence_start,
            self.valence_end,
            self.endpoint_start[0],
            self.endpoint_end[0],
        )


class SingularityGraph:
    def __init__(self, chains, junction_tets, boundary_nodes, defects, singular_faces):
        self.chains = chains
        self.junction_tets = junction_tets
        self.boundary_nodes = boundary_nodes   # list of (chain_id, end, point)
        self.defects = defects
        self.singular_faces = singular_faces   # face_id -> SingularFace

    def __repr__(self):
        return "SingularityGraph(chains=%d, junctions=%d, boundary_nodes=%d)" % (
            len(self.chains),
            len(self.junction_tets),
            len(self.boundary_nodes),
        )


def _face_holonomy(frames, a, b, c):
    """Octahedral element composing the matchings around oriented (a, b, c)."""
    g1 = fr.octa_matching(frames[a], frames[b])
    g2 = fr.octa_matching(frames[b], frames[c])
    g3 = fr.octa_matching(frames[c], frames[a])
    return fr.octa_compose(fr.octa_compose(g1, g2), g3)


def _rotation_angle_axis(W):
    cos = np.clip((np.trace(W) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos)
    axis = np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]])
    n = np.linalg.norm(axis)
    if n < 1e-12:
        return angle, None
    return angle, axis / n


def face_singularity(field, triangle, frames=None, quality=None, face_id=None):
    """Classify one oriented interior triangle; None when non-singular."""
    if frames is None:
        frames, quality = field.vertex_frames()
    a, b, c = triangle
    for v in (a, b, c):
        if np.linalg.norm(field.coeffs[v]) < 1e-9:
            raise UnprojectableVertex("vertex %d has near-zero coefficients" % v)
    h = _face_holonomy(frames, a, b, c)
    if h == 0:
        return None
    # the matching holonomy is the inverse of the field's rotation around
    # the loop; report the field rotation in world coordinates
    G = fr.OCTA_GROUP[fr.octa_inverse(h)]
    Ra = frames[a]
    W = Ra @ G @ Ra.T
    angle, axis = _rotation_angle_axis(W)
    p = field.mesh.vertices
    n = np.cross(p[b] - p[a], p[c] - p[a])
    n /= np.linalg.norm(n)
    if axis is not None and abs(angle - np.pi / 2) < 1e-6:
        sign = 1.0 if axis @ n >= 0 else -1.0
        index = Fraction(1, 4) if sign > 0 else Fraction(-1, 4)
    else:
        index = "other"
    adj = field.mesh.adjacency
    fid = face_id if face_id is not None else adj.face_id((a, b, c))
    tets = adj.tets_of_face((a, b, c))
    return SingularFace(fid, (a, b, c), tets, h, index, W)


def _valence_from_index(index):
    if index == "other":
        return "other"
    return int(4 - 4 * index)


def extract_graph(field):
    """Chains, junctions, and boundary nodes of the field's singular set."""
    mesh = field.mesh
    adj = mesh.adjacency
    frames, quality = field.vertex_frames()
    hot = set(np.nonzero(quality < QUALITY_CUTOFF)[0])
    singular = {}
    defects = []
    for fid in np.nonzero(adj.interior_mask)[0]:
        a, b, c = adj.faces[fid]
        if a in hot or b in hot or c in hot:
            defects.append(("hot_face", int(fid)))
            continue
        sf = face_singularity(field, (a, b, c), frames, quality, face_id=fid)
        if sf is not None:
            singular[fid] = sf
    tet_sing = {}
    for fid, sf in singular.items():
        for t in adj.face_tets[fid]:
            if t >= 0:
                tet_sing.setdefault(int(t), []).append(fid)
    junction_tets = sorted(t for t, fs in tet_sing.items() if len(fs) >= 3)
    centroids = mesh.vertices[mesh.tets].mean(axis=1)

    def boundary_point(tet, near):
        # centroid of the tet's boundary face closest to the chain end
        best = None
        for li in range(4):
            fid = adj.tet_faces[tet, li]
            if adj.interior_mask[fid]:
                continue
            pt = mesh.vertices[adj.faces[fid]].mean(axis=0)
            d = np.linalg.norm(pt - near)
            if best is None or d < best[0]:
                best = (d, pt, fid)
        return best

    visited = set()
    raw_chains = []
    junction_set = set(junction_tets)

    def face_centroid(fid):
        return mesh.vertices[adj.faces[fid]].mean(axis=0)

    def walk(start_fid, start_tet):
        """Walk a chain from a face into a tet until an endpoint."""
        tets = []
        faces = [start_fid]
        tet = start_tet
        fid = start_fid
        while True:
            tets.append(tet)
            if tet in junction_set:
                return tets, faces, ("junction", tet)
            sfs = tet_sing.get(tet, [])
            nxt = [f for f in sfs if f != fid]
            if len(nxt) == 0:
                bp = boundary_point(tet, face_centroid(fid))
                if bp is not None:
                    return tets, faces, ("boundary", bp[1])
                return tets, faces, ("defect", None)
            fid = nxt[0]
            faces.append(fid)
            if fid == faces[0] and len(faces) > 1:
                return tets, faces, ("closed", None)
            pair = adj.face_tets[fid]
            tet = int(pair[0]) if int(pair[1]) == tet else int(pair[1])

    chain_id = 0
    chains = []
    boundary_nodes = []
    # seed at chain terminals first (tets with exactly one or >=3 singular faces)
    seeds = []
    for t in sorted(tet_sing):
        k = len(tet_sing[t])
        if k == 1 or t in junction_set:
            for f in sorted(tet_sing[t]):
                seeds.append((t, f))
    for t, f in seeds:
        if f in visited:
            continue
        # start from terminal tet t through face f
        pair = adj.face_tets[f]
        other = int(pair[0]) if int(pair[1]) == t else int(pair[1])
        visited.add(f)
        tets_fwd, faces_fwd, end_fwd = walk(f, other)
        for ff in faces_fwd:
            visited.add(ff)
        if t in junction_set:
            start_pt = centroids[t]
            start_desc = ("junction", t)
        else:
            bp = boundary_point(t, face_centroid(f))
            if bp is not None:
                start_desc = ("boundary", bp[1])
                start_pt = bp[1]
            else:
                start_desc = ("defect", None)
                start_pt = centroids[t]
        raw_chains.append(([t] + tets_fwd, faces_fwd, start_desc, end_fwd, start_pt))
    # remaining faces belong to closed loops
    for fid in sorted(singular):
        if fid in visited:
            continue
        pair = adj.face_tets[fid]
        visited.add(fid)
        tets_fwd, faces_fwd, end = walk(fid, int(pair[0]))
        for ff in faces_fwd:
            visited.add(ff)
        raw_chains.append((tets_fwd, faces_fwd, ("closed", None), ("closed", None),
                           face_centroid(fid)))

    for tets, faces, start_desc, end_desc, start_pt in raw_chains:
        if start_desc[0] == "closed" and len(faces) > 1 and faces[-1] == faces[0]:
            faces = faces[:-1]
        sfaces = [singular[f] for f in faces]
        if start_desc[0] == "closed":
            pts = [face_centroid(f) for f in faces] + [face_centroid(faces[0])]
        else:
            pts = [start_pt] + [face_centroid(f) for f in faces]
        if end_desc[0] == "junction":
            pts.append(centroids[end_desc[1]])
        elif end_desc[0] == "boundary":
            pts.append(end_desc[1])
        # the face index is loop-orientation invariant, so the endpoint
        # valences read directly off the first and last faces
        v_start = _valence_from_index(sfaces[0].index)
        v_end = _valence_from_index(sfaces[-1].index)
        if start_desc[0] == "defect" or end_desc[0] == "defect":
            defects.append(("dangling_chain", tuple(tets)))
        ch = SingularChain(chain_id, tets, sfaces, pts, v_start, v_end,
                           start_desc, end_desc)
        chains.append(ch)
        if start_desc[0] == "boundary":
            boundary_nodes.append((chain_id, "start", start_desc[1]))
        if end_desc[0] == "boundary":
            boundary_nodes.append((chain_id, "end", end_desc[1]))
        chain_id += 1
    return SingularityGraph(chains, junction_tets, boundary_nodes, defects, singular)


def detect_35(graph):
    """Chains whose endpoint valences are exactly {3, 5}."""
    return [ch for ch in graph.chains if ch.is_35]


def _cross_angle_in_plane(R, u, v):
    """Angle (mod pi/2) of the frame's dominant tangent axis in plane (u, v)."""
    axes = R.T
    best = None
    for a in axes:
        ip = np.hypot(a @ u, a @ v)
        if best is None or ip > best[0]:
            best = (ip, a)
    a = best[1]
    return np.arctan2(a @ v, a @ u) % (np.pi / 2)


def _wrap_quarter(x):
    # wrap to (-pi/4, pi/4]
    return x - np.pi / 2 * np.ceil((x - np.pi / 4) / (np.pi / 2) - 1e-12)


def surface_cross_indices(field, mesh=None):
    """Per-triangle tangent cross indices and per-vertex quarter charges.

    Returns (per_triangle, per_vertex_quarters, total) where ``total`` is the
    exact quarter-unit sum of the vertex charges; for a closed surface it
    equals 4 * Euler characteristic quarters, i.e. ``total == chi``.
    """
    mesh = mesh or field.mesh
    frames, _ = field.vertex_frames()
    p = mesh.vertices
    tris = mesh.boundary_tris

    # per-triangle index from in-plane matchings around the triangle
    per_triangle = []
    for ti, (a, b, c) in enumerate(tris):
        n = np.cross(p[b] - p[a], p[c] - p[a])
        n /= np.linalg.norm(n)
        u = p[b] - p[a]
        u = u - (u @ n) * n
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        th = [_cross_angle_in_plane(frames[x], u, v) for x in (a, b, c)]
        s = (
            _wrap_quarter(th[1] - th[0])
            + _wrap_quarter(th[2] - th[1])
            + _wrap_quarter(th[0] - th[2])
        )
        k = int(round(s / (np.pi / 2)))
        per_triangle.append((ti, Fraction(k, 4)))

    # per-vertex quarter charges from unfolding holonomy (exact integers)
    incident = {}
    for ti, tri in enumerate(tris):
        for k in range(3):
            incident.setdefault(int(tri[k]), []).append((ti, k))
    per_vertex = {}
    for vtx, occ in incident.items():
        # cyclic order around the vertex by following shared edges
        nxt = {}
        for ti, k in occ:
            a = int(tris[ti][(k + 1) % 3])
            b = int(tris[ti][(k + 2) % 3])
            nxt[a] = (ti, a, b)
        start = occ[0]
        a0 = int(tris[start[0]][(start[1] + 1) % 3])
        order = []
        cur = a0
        for _ in range(len(occ)):
            ti, a, b = nxt[cur]
            order.append((ti, a, b))
            cur = b
        if cur != a0:
            continue  # open fan (should not happen on a watertight surface)
        theta_sum = 0.0
        delta_sum = 0.0
        prev_theta = None
        first_theta = None
        prev_alpha = None
        for ti, a, b in order:
            e1 = p[a] - p[vtx]
            e2 = p[b] - p[vtx]
            n = np.cross(e1, e2)
            n /= np.linalg.norm(n)
            u = e1 / np.linalg.norm(e1)
            w = np.cross(n, u)
            alpha = np.arctan2(e2 @ w, e2 @ u) % (2 * np.pi)
            # one representative cross per triangle, so that edge mismatch
            # terms cancel pairwise across the closed surface
            Rm = frames[int(tris[ti][0])]
            th = _cross_angle_in_plane(Rm, u, w)
            theta_sum += alpha
            if prev_theta is not None:
                delta_sum += _wrap_quarter(th - (prev_theta - prev_alpha))
            else:
                first_theta = th
            prev_theta = th
            prev_alpha = alpha
        delta_sum += _wrap_quarter(first_theta - (prev_theta - prev_alpha))
        q = int(round((2 * np.pi - theta_sum + delta_sum) / (np.pi / 2)))
        if q:
            per_vertex[vtx] = q
    total = Fraction(sum(per_vertex.values()), 4)
    return per_triangle, per_vertex, total


def stable_direction(field, chain, endpoint):
    """Frame axis invariant under the chain's holonomy near an endpoint.

    ``endpoint`` is "start" or "end".  At boundary endpoints the returned
    vector points into the volume.
    """
    face = chain.faces[0] if endpoint == "start" else chain.faces[-1]
    angle, axis = _rotation_angle_axis(face.world_rotation)
    if axis is None or abs(angle - np.pi / 2) > 1e-6:
        raise AmbiguousAxis("holonomy is not a single-axis quarter turn")
    frames, quality = field.vertex_frames()
    best = max(face.tri, key=lambda v: quality[v])
    d = fr.closest_direction(axis, fr.Frame(frames[best]))
    desc = chain.endpoint_start if endpoint == "start" else chain.endpoint_end
    if desc[0] == "boundary":
        inward = _inward_normal_at(field.mesh, desc[1])
        if d @ inward < 0:
            d = -d
    return d


def _inward_normal_at(mesh, point):
    tris = mesh.boundary_tris
    p = mesh.vertices
    cents = p[tris].mean(axis=1)
    ti = int(np.argmin(np.linalg.norm(cents - point, axis=1)))
    a, b, c = tris[ti]
    n = np.cross(p[b] - p[a], p[c] - p[a])
    return -n / np.linalg.norm(n)
