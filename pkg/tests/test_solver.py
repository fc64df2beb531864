import numpy as np
import pytest

import hexframe.frames as fr
from hexframe.boxgen import generate_box
from hexframe.errors import ConflictingConstraint
from hexframe.mesh import TetMesh
from hexframe.solver import (
    BoundaryConditionSet,
    SolverConfig,
    apply_internal_constraints,
    assemble_stiffness,
    build_boundary_conditions,
    dirichlet_bc_on_curve,
    smooth_nonlinear,
    solve_initial,
)


@pytest.fixture(scope="module")
def cube():
    mesh = generate_box(3, 3, 3)
    mesh.detect_features(30.0)
    return mesh


class TestStiffness:
    def test_zero_row_sums(self, cube):
        K = assemble_stiffness(cube)
        assert np.abs(K @ np.ones(K.shape[0])).max() < 1e-12

    def test_linear_field_energy_equals_volume(self):
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
        )
        mesh = TetMesh(verts, np.array([[0, 1, 2, 3], [1, 2, 3, 4]]))
        K = assemble_stiffness(mesh)
        u = mesh.vertices[:, 0]  # u = x, |grad u|^2 = 1
        vol = mesh.tet_volumes().sum()
        assert abs(u @ (K @ u) - vol) < 1e-12

    def test_symmetry(self):
        mesh = generate_box(2, 2, 2)
        K = assemble_stiffness(mesh)
        assert abs(K - K.T).max() < 1e-12


class TestCurveBCs:
    def test_axis_aligned_box_edge(self, cube):
        # vertical box edges get the reference frame coefficients
        for curve in cube.feature_curves:
            vals = dirichlet_bc_on_curve(curve, cube)
            for v, c in vals.items():
                assert np.allclose(np.abs(c), np.abs(fr.REFERENCE_COEFFS), atol=1e-9)
                assert np.allclose(c, fr.REFERENCE_COEFFS, atol=1e-9)

    def test_consistency_with_rotation(self, cube):
        curve = cube.feature_curves[0]
        vals = dirichlet_bc_on_curve(curve, cube)
        for i, v in enumerate(curve.vertices):
            if v not in vals:
                continue
            t = curve.tangents[i]
            normals = [n for _, n in cube.patch_normal(v)]
            n = normals[0]
            a2 = n - (n @ t) * t
            a2 /= np.linalg.norm(a2)
            R = np.column_stack([a2, np.cross(t, a2), t])
            assert np.allclose(vals[v], fr.coeffs_from_rotation(R), atol=1e-9)


class TestInitialSolve:
    def test_cube_constant_field(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        dev = np.abs(field.coeffs - fr.REFERENCE_COEFFS).max()
        assert dev < 1e-7

    def test_constraints_satisfied_exactly(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        for v, c in bcs.dirichlet.items():
            assert np.array_equal(field.coeffs[v], c)
        for v, n in bcs.tangency.items():
            h0, h1, h2 = fr.tangency_basis(n)
            d = field.coeffs[v] - h0
            res = d - (d @ h1) * h1 - (d @ h2) * h2
            assert np.linalg.norm(res) < 1e-9

    def test_energy_optimal_among_feasible(self, cube):
        bcs = build_boundary_conditions(cube)
        K = assemble_stiffness(cube)
        field = solve_initial(cube, bcs, K=K)
        base = field.energy(K)
        rng = np.random.default_rng(4)
        free = [
            v
            for v in range(len(cube.vertices))
            if bcs.kind(v) is None or bcs.kind(v) == "free"
        ]
        for _ in range(100):
            pert = field.coeffs.copy()
            for v in rng.choice(free, size=min(5, len(free)), replace=False):
                pert[v] += 0.1 * rng.normal(size=9)
            energy = sum(pert[:, k] @ (K @ pert[:, k]) for k in range(9))
            assert energy >= base - 1e-9


class TestSmoothing:
    def test_constant_field_fixed_point(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        out = smooth_nonlinear(field)
        assert np.abs(out.coeffs - fr.REFERENCE_COEFFS).max() < 1e-6

    def test_lambda_zero_energy_monotone(self, cube):
        bcs = build_boundary_conditions(cube)
        K = assemble_stiffness(cube)
        field = solve_initial(cube, bcs, K=K)
        rng = np.random.default_rng(5)
        field.coeffs += 0.05 * rng.normal(size=field.coeffs.shape)
        # re-pin constrained vertices
        for v, c in bcs.dirichlet.items():
            field.coeffs[v] = c
        cfg = SolverConfig(projection_relaxation=0.0, smoothing_sweeps=1,
                          convergence_delta=0.0)
        energies = [field.energy(K)]
        current = field
        for _ in range(5):
            current = smooth_nonlinear(current, cfg, K=K)
            energies.append(current.energy(K))
        assert all(b <= a + 1e-10 for a, b in zip(energies, energies[1:]))

    def test_determinism(self, cube):
        bcs = build_boundary_conditions(cube)
        cfg = SolverConfig(smoothing_sweeps=3, convergence_delta=0.0)
        a = smooth_nonlinear(solve_initial(cube, bcs, cfg), cfg)
        b = smooth_nonlinear(solve_initial(cube, bcs, cfg), cfg)
        assert np.array_equal(a.coeffs, b.coeffs)


class TestInternalConstraints:
    def test_empty_noop(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        out = apply_internal_constraints(field, [])
        assert np.array_equal(out.coeffs, field.coeffs)

    def test_consistent_constraint_keeps_constant(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        interior = [
            v for v in range(len(cube.vertices))
            if v not in set(cube.boundary_vertices)
        ]
        v = interior[0]
        out = apply_internal_constraints(
            field, [(v, "dirichlet_coeffs", fr.REFERENCE_COEFFS)]
        )
        resolved = solve_initial(cube, out.bcs)
        assert np.abs(resolved.coeffs - fr.REFERENCE_COEFFS).max() < 1e-7

    def test_conflicting(self, cube):
        bcs = build_boundary_conditions(cube)
        field = solve_initial(cube, bcs)
        c1 = fr.REFERENCE_COEFFS
        c2 = fr.axisymmetric_coeffs([0, 0, 1])
        with pytest.raises(ConflictingConstraint):
            apply_internal_constraints(
                field,
                [(10, "dirichlet_coeffs", c1), (10, "dirichlet_coeffs", c2)],
            )

    def test_forced_singular_line_locality(self):
        mesh = generate_box(4, 4, 4)
        mesh.detect_features(30.0)
        bcs = build_boundary_conditions(mesh)
        field = solve_initial(mesh, bcs)
        boundary = set(mesh.boundary_vertices)
        line = [
            v
            for v in range(len(mesh.vertices))
            if v not in boundary
            and abs(mesh.vertices[v][0] - 0.5) < 1e-9
            and abs(mesh.vertices[v][1] - 0.5) < 1e-9
        ]
        assert line
        sing = fr.axisymmetric_coeffs([0, 0, 1])
        constrained = apply_internal_constraints(
            field, [(v, "dirichlet_coeffs", sing) for v in line]
        )
        resolved = smooth_nonlinear(solve_initial(mesh, constrained.bcs))
        q = resolved.quality()
        center = np.array([0.5, 0.5, 0.5])
        dist = np.linalg.norm(
            mesh.vertices[:, :2] - center[:2], axis=1
        )
        far = q[dist > 0.45]
        near = q[dist < 0.3]
        assert far.min() > 0.97
        assert near.min() < 0.9
