import numpy as np
import pytest

from hexframe.boxgen import generate_box
from hexframe.errors import DegenerateDihedral, NonManifold
from hexframe.mesh import TetMesh, build_adjacency, classify_feature_valence
from hexframe.meshio import read_medit, write_medit


SINGLE_TET = TetMesh(
    np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float),
    np.array([[0, 1, 2, 3]]),
)


class TestAdjacency:
    def test_single_tet(self):
        adj = build_adjacency(SINGLE_TET)
        assert len(adj.boundary_face_ids) == 4
        assert adj.interior_mask.sum() == 0

    def test_two_tets_share_one_face(self):
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
        )
        mesh = TetMesh(verts, np.array([[0, 1, 2, 3], [1, 2, 3, 4]]))
        adj = mesh.adjacency
        assert adj.interior_mask.sum() == 1
        assert len(adj.tets_of_face((1, 2, 3))) == 2

    def test_three_tets_on_one_face_nonmanifold(self):
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1], [-1, -1, 1]],
            dtype=float,
        )
        with pytest.raises(NonManifold):
            TetMesh(verts, np.array([[0, 1, 2, 3], [1, 2, 3, 4], [1, 2, 3, 5]]))

    def test_positive_volumes(self):
        mesh = generate_box(3, 3, 3)
        assert (mesh.tet_volumes() > 0).all()


class TestFeatureValence:
    def test_bins(self):
        assert classify_feature_valence(90.0) == 1
        assert classify_feature_valence(180.0) == 2
        assert classify_feature_valence(270.0) == 3
        assert classify_feature_valence(330.0) == 4

    def test_degenerate(self):
        with pytest.raises(DegenerateDihedral):
            classify_feature_valence(30.0)


class TestBoxFeatures:
    def test_cube_counts(self):
        mesh = generate_box(2, 2, 2)
        assert len(mesh.tets) == 48
        mesh.detect_features(30.0)
        assert len(mesh.feature_curves) == 12
        assert len(mesh.corners) == 8
        assert len(mesh.patches) == 6
        for c in mesh.feature_curves:
            assert c.target_valence == 1
            assert 85.0 < c.dihedral_angle < 95.0

    def test_euler_characteristic(self):
        for dims in [(2, 2, 2), (3, 4, 2), (5, 3, 4)]:
            mesh = generate_box(*dims)
            assert mesh.boundary_euler_characteristic() == 2

    def test_patch_area_sums(self):
        mesh = generate_box(3, 3, 3, size=(2.0, 1.0, 1.5))
        mesh.detect_features(30.0)
        total = mesh.boundary_area()
        expected = 2 * (2 * 1 + 2 * 1.5 + 1 * 1.5)
        assert abs(total - expected) < 1e-9 * expected

    def test_detect_idempotent(self):
        mesh = generate_box(3, 3, 3)
        mesh.detect_features(30.0)
        first = [(c.curve_id, tuple(c.vertices)) for c in mesh.feature_curves]
        mesh.detect_features(30.0)
        second = [(c.curve_id, tuple(c.vertices)) for c in mesh.feature_curves]
        assert first == second

    def test_bulge_zero_identity(self):
        a = generate_box(3, 3, 3, bulge=0.0)
        b = generate_box(3, 3, 3)
        assert np.array_equal(a.vertices, b.vertices)
        assert np.array_equal(a.tets, b.tets)

    def test_dihedral_convention(self):
        mesh = generate_box(2, 2, 2)
        dih = mesh.boundary_edge_dihedrals()
        feats = {
            k for k, a in dih.items() if abs(a - 90.0) < 1.0
        }
        # all box edges are convex right angles
        assert len(feats) == 24  # 12 box edges, 2 mesh edges each


class TestMedit:
    def test_hand_written_file(self, tmp_path):
        path = tmp_path / "two.mesh"
        path.write_text(
            "MeshVersionFormatted 2\nDimension 3\n"
            "Vertices\n5\n"
            "0 0 0 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n1 1 1 0\n"
            "Tetrahedra\n2\n"
            "1 2 3 4 1\n2 3 4 5 1\n"
            "End\n"
        )
        mesh = read_medit(path)
        assert len(mesh.tets) == 2
        assert len(mesh.boundary_tris) == 6

    def test_edges_section_preserved(self, tmp_path):
        mesh = generate_box(2, 2, 2)
        mesh.detect_features(30.0)
        path = tmp_path / "box.mesh"
        write_medit(mesh, path)
        back = read_medit(path)
        assert len(back.feature_curves) == 12
        tagged_ids = {cid for _, _, cid in back.tagged_feature_edges}
        assert len(tagged_ids) == 12

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "bad.mesh"
        path.write_text("MeshVersionFormatted 2\nDimension 3\nVertices\n10\n0 0 0 0\n")
        from hexframe.errors import ParseError

        with pytest.raises(ParseError):
            read_medit(path)
