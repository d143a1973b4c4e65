import numpy as np
import pytest

from voxpose.projection import (
    Silhouette,
    project_max,
    project_max_subgradient,
    project_soft,
    project_soft_with_gradient,
)
from voxpose.rotation import PoseParams
from voxpose.shape import VoxelGrid
from voxpose.warp import transform_grid


def brute_force_ray_scan(values):
    """Per-pixel exhaustive scan along z: the max, and the first index
    attaining it."""
    q = values.shape[0]
    sil = np.zeros((q, q))
    arg = np.zeros((q, q), dtype=int)
    for x in range(q):
        for y in range(q):
            best, best_z = values[x, y, 0], 0
            for z in range(1, q):
                if values[x, y, z] > best:
                    best, best_z = values[x, y, z], z
            sil[x, y] = best
            arg[x, y] = best_z
    return sil, arg


class TestSilhouette:
    def test_flat_order_is_x_fastest(self):
        q = 3
        values = np.arange(q * q, dtype=float).reshape((q, q)) / (q * q)
        sil = Silhouette(values)
        for x in range(q):
            for y in range(q):
                assert sil.flat()[x + q * y] == values[x, y]

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            Silhouette(np.zeros((3, 4)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Silhouette(np.full((3, 3), -0.5))


class TestProjectMax:
    def test_empty_grid(self):
        sil = project_max(VoxelGrid(np.zeros((4, 4, 4))))
        np.testing.assert_array_equal(sil.values, np.zeros((4, 4)))

    def test_single_voxel(self):
        values = np.zeros((5, 5, 5))
        values[1, 3, 2] = 0.7
        sil = project_max(VoxelGrid(values))
        expected = np.zeros((5, 5))
        expected[1, 3] = 0.7
        np.testing.assert_array_equal(sil.values, expected)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            values = rng.random((5, 5, 5))
            expected, _ = brute_force_ray_scan(values)
            np.testing.assert_array_equal(project_max(VoxelGrid(values)).values, expected)


class TestProjectMaxSubgradient:
    def test_tie_break_lowest_z(self):
        values = np.zeros((3, 3, 3))
        values[0, 0] = [0.2, 0.9, 0.9]
        sil, arg = project_max_subgradient(VoxelGrid(values))
        assert sil.values[0, 0] == 0.9
        assert arg[0, 0] == 1

    def test_empty_ray(self):
        sil, arg = project_max_subgradient(VoxelGrid(np.zeros((3, 3, 3))))
        assert sil.values[1, 1] == 0.0
        assert arg[1, 1] == 0

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            values = rng.random((5, 5, 5))
            exp_sil, exp_arg = brute_force_ray_scan(values)
            sil, arg = project_max_subgradient(VoxelGrid(values))
            np.testing.assert_array_equal(sil.values, exp_sil)
            np.testing.assert_array_equal(arg, exp_arg)


class TestProjectSoft:
    def test_two_half_voxels(self):
        values = np.zeros((3, 3, 3))
        values[1, 1, 0] = 0.5
        values[1, 1, 2] = 0.5
        sil = project_soft(VoxelGrid(values))
        assert sil.values[1, 1] == pytest.approx(0.75, abs=1e-15)

    def test_empty_grid(self):
        sil = project_soft(VoxelGrid(np.zeros((4, 4, 4))))
        np.testing.assert_array_equal(sil.values, np.zeros((4, 4)))

    def test_equals_max_on_binary_grids(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            values = (rng.random((5, 5, 5)) < 0.3).astype(float)
            grid = VoxelGrid(values, binary=True)
            np.testing.assert_array_equal(
                project_soft(grid).values, project_max(grid).values
            )

    def test_dominates_max_pixelwise(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            grid = VoxelGrid(rng.random((6, 6, 6)))
            assert np.all(project_soft(grid).values >= project_max(grid).values - 1e-15)

    def test_monotone_in_voxel_values(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            values = rng.random((4, 4, 4)) * 0.9
            base_soft = project_soft(VoxelGrid(values)).values
            base_max = project_max(VoxelGrid(values)).values
            bumped = values.copy()
            i = tuple(rng.integers(0, 4, size=3))
            bumped[i] = min(1.0, bumped[i] + rng.uniform(0, 0.1))
            assert np.all(project_soft(VoxelGrid(bumped)).values >= base_soft - 1e-15)
            assert np.all(project_max(VoxelGrid(bumped)).values >= base_max - 1e-15)


class TestProjectSoftGradient:
    def test_matches_leave_one_out_products(self):
        rng = np.random.default_rng(5)
        values = rng.random((4, 4, 4))
        _, grad = project_soft_with_gradient(VoxelGrid(values))
        q = 4
        for x in range(q):
            for y in range(q):
                for z in range(q):
                    expected = np.prod(np.delete(1.0 - values[x, y, :], z))
                    assert grad[x, y, z] == pytest.approx(expected, abs=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        h = 1e-6
        values = rng.random((4, 4, 4)) * 0.8 + 0.05
        _, grad = project_soft_with_gradient(VoxelGrid(values))
        for _ in range(30):
            x, y, z = rng.integers(0, 4, size=3)
            plus = values.copy()
            minus = values.copy()
            plus[x, y, z] += h
            minus[x, y, z] -= h
            fd = (
                project_soft(VoxelGrid(plus)).values[x, y]
                - project_soft(VoxelGrid(minus)).values[x, y]
            ) / (2 * h)
            assert abs(grad[x, y, z] - fd) < 1e-6

    def test_exact_when_a_voxel_saturates(self):
        values = np.zeros((3, 3, 3))
        values[0, 0] = [1.0, 0.4, 0.0]
        _, grad = project_soft_with_gradient(VoxelGrid(values))
        np.testing.assert_allclose(grad[0, 0], [0.6, 0.0, 0.0], atol=1e-15)


class TestTranslationCommutation:
    def test_projection_commutes_with_integer_translation(self):
        rng = np.random.default_rng(7)
        q = 6
        grid = VoxelGrid(rng.random((q, q, q)))
        p = PoseParams(t=[2, 1])
        proj_then_move = project_max(grid).values
        moved_proj = project_max(transform_grid(grid, p)).values
        np.testing.assert_allclose(
            moved_proj[2:, 1:], proj_then_move[:-2, :-1], atol=1e-12
        )
