import numpy as np
import pytest

from voxpose.shape import (
    LOGIT_CLAMP,
    StyleBasis,
    VoxelGrid,
    augment_scales,
    clamped_logit,
    encode,
    fit_basis,
    generate,
)


def random_binary_grid(rng, q, fill=0.4):
    return VoxelGrid((rng.random((q, q, q)) < fill).astype(float), binary=True)


class TestVoxelGrid:
    def test_flat_order_is_x_fastest(self):
        q = 3
        values = np.arange(q**3, dtype=float).reshape((q, q, q)) / q**3
        grid = VoxelGrid(values)
        flat = grid.flat()
        for x in range(q):
            for y in range(q):
                for z in range(q):
                    assert flat[x + q * (y + q * z)] == values[x, y, z]

    def test_from_flat_round_trip(self):
        rng = np.random.default_rng(0)
        flat = rng.random(4**3)
        np.testing.assert_array_equal(VoxelGrid.from_flat(flat, 4).flat(), flat)

    def test_rejects_non_cube(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.zeros((3, 3, 4)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.full((2, 2, 2), 1.5))

    def test_rejects_non_binary_when_flagged(self):
        with pytest.raises(ValueError):
            VoxelGrid(np.full((2, 2, 2), 0.5), binary=True)

    def test_immutable(self):
        grid = VoxelGrid(np.zeros((2, 2, 2)))
        with pytest.raises((ValueError, AttributeError)):
            grid.values[0, 0, 0] = 1.0


class TestFitBasis:
    def test_repeated_shape_gives_zero_variance(self):
        rng = np.random.default_rng(1)
        shape = random_binary_grid(rng, 5)
        basis = fit_basis([shape] * 5, m=1)
        np.testing.assert_allclose(basis.mu, clamped_logit(shape.flat()), atol=1e-12)
        assert basis.singular_values[0] < 1e-10

    def test_two_shapes_reconstruct_exactly(self):
        # with two points the principal axis is the normalized difference,
        # so encode -> generate -> binarize recovers both training shapes
        rng = np.random.default_rng(2)
        a = random_binary_grid(rng, 5)
        b = random_binary_grid(rng, 5)
        basis = fit_basis([a, b], m=1)
        diff = clamped_logit(a.flat()) - clamped_logit(b.flat())
        direction = diff / np.linalg.norm(diff)
        assert min(
            np.abs(basis.basis[:, 0] - direction).max(),
            np.abs(basis.basis[:, 0] + direction).max(),
        ) < 1e-8
        for g in (a, b):
            recon = generate(basis, encode(basis, g)).binarized()
            np.testing.assert_array_equal(recon.values, g.values)

    def test_m_zero_generates_mean(self):
        rng = np.random.default_rng(3)
        shapes = [random_binary_grid(rng, 4) for _ in range(6)]
        basis = fit_basis(shapes, m=0)
        assert basis.m == 0
        mean = generate(basis, np.zeros(0))
        logits = np.stack([clamped_logit(g.flat()) for g in shapes]).mean(axis=0)
        np.testing.assert_allclose(mean.flat(), 1.0 / (1.0 + np.exp(-logits)), atol=1e-12)

    def test_orthonormal_columns(self):
        rng = np.random.default_rng(4)
        for count, m in [(3, 2), (10, 5), (25, 12)]:
            shapes = [random_binary_grid(rng, 4) for _ in range(count)]
            basis = fit_basis(shapes, m)
            gram = basis.basis.T @ basis.basis
            assert np.abs(gram - np.eye(m)).max() < 1e-8

    def test_training_set_round_trip_with_full_rank(self):
        rng = np.random.default_rng(5)
        shapes = [random_binary_grid(rng, 5) for _ in range(8)]
        basis = fit_basis(shapes, m=7)
        for g in shapes:
            recon = generate(basis, encode(basis, g)).binarized()
            np.testing.assert_array_equal(recon.values, g.values)

    def test_rejects_bad_arguments(self):
        rng = np.random.default_rng(6)
        with pytest.raises(ValueError):
            fit_basis([], m=1)
        with pytest.raises(ValueError):
            fit_basis([random_binary_grid(rng, 4), random_binary_grid(rng, 5)], m=1)
        with pytest.raises(ValueError):
            fit_basis([random_binary_grid(rng, 4)], m=2)


class TestGenerateEncode:
    def test_zero_style_is_sigmoid_of_mean(self):
        rng = np.random.default_rng(7)
        shapes = [random_binary_grid(rng, 4) for _ in range(5)]
        basis = fit_basis(shapes, m=2)
        out = generate(basis, np.zeros(2))
        np.testing.assert_allclose(out.flat(), 1.0 / (1.0 + np.exp(-basis.mu)), atol=1e-12)

    def test_outputs_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(8)
        shapes = [random_binary_grid(rng, 4) for _ in range(5)]
        basis = fit_basis(shapes, m=3)
        out = generate(basis, rng.normal(size=3))
        assert out.values.min() > 0.0
        assert out.values.max() < 1.0

    def test_encode_round_trip_in_span(self):
        rng = np.random.default_rng(9)
        shapes = [random_binary_grid(rng, 5) for _ in range(10)]
        basis = fit_basis(shapes, m=4)
        for _ in range(10):
            s_true = rng.normal(size=4) * 0.3
            grid = generate(basis, s_true)
            # the round trip is exact only where the clamp is inactive
            np.testing.assert_allclose(encode(basis, grid), s_true, atol=1e-6)

    def test_encode_mean_is_zero(self):
        rng = np.random.default_rng(10)
        shapes = [random_binary_grid(rng, 4) for _ in range(5)]
        basis = fit_basis(shapes, m=2)
        np.testing.assert_allclose(
            encode(basis, generate(basis, np.zeros(2))), np.zeros(2), atol=1e-9
        )

    def test_encode_empty_grid_hits_clamp_floor(self):
        rng = np.random.default_rng(11)
        shapes = [random_binary_grid(rng, 4) for _ in range(5)]
        basis = fit_basis(shapes, m=2)
        empty = VoxelGrid(np.zeros((4, 4, 4)), binary=True)
        floor_logit = np.log(LOGIT_CLAMP) - np.log1p(-LOGIT_CLAMP)
        expected = basis.basis.T @ (np.full(4**3, floor_logit) - basis.mu)
        np.testing.assert_allclose(encode(basis, empty), expected, atol=1e-12)

    def test_dimension_mismatches(self):
        rng = np.random.default_rng(12)
        basis = fit_basis([random_binary_grid(rng, 4) for _ in range(4)], m=2)
        with pytest.raises(ValueError):
            generate(basis, np.zeros(3))
        with pytest.raises(ValueError):
            encode(basis, random_binary_grid(rng, 5))


class TestStyleBasisValidation:
    def test_rejects_non_orthonormal(self):
        q = 3
        bad = np.ones((q**3, 2)) / np.sqrt(q**3)
        with pytest.raises(ValueError):
            StyleBasis(q=q, mu=np.zeros(q**3), basis=bad, singular_values=np.zeros(2))


class TestAugmentScales:
    def test_identity_scale_unchanged(self):
        rng = np.random.default_rng(13)
        grid = random_binary_grid(rng, 6)
        (out,) = augment_scales([grid], [1.0])
        np.testing.assert_array_equal(out.values, grid.values)

    def test_cube_halves_exactly(self):
        q = 30
        c = (q - 1) / 2.0
        idx = np.arange(q)
        inside = np.abs(idx - c) <= 6.0
        values = np.zeros((q, q, q))
        values[np.ix_(inside, inside, inside)] = 1.0
        (out,) = augment_scales([VoxelGrid(values, binary=True)], [0.5])
        small = np.abs(idx - c) <= 3.0
        expected = np.zeros((q, q, q))
        expected[np.ix_(small, small, small)] = 1.0
        np.testing.assert_array_equal(out.values, expected)

    def test_cardinality(self):
        rng = np.random.default_rng(14)
        shapes = [random_binary_grid(rng, 5) for _ in range(4)]
        out = augment_scales(shapes, [0.7, 0.85, 1.0])
        assert len(out) == 12
        assert all(g.binary for g in out)

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        shapes = [random_binary_grid(rng, 5) for _ in range(2)]
        a = augment_scales(shapes, [0.6, 0.9], rng_seed=3)
        b = augment_scales(shapes, [0.6, 0.9], rng_seed=3)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.values, y.values)

    def test_rejects_bad_scales(self):
        rng = np.random.default_rng(16)
        grid = random_binary_grid(rng, 4)
        with pytest.raises(ValueError):
            augment_scales([grid], [0.0])
        with pytest.raises(ValueError):
            augment_scales([grid], [1.2])
        with pytest.raises(ValueError):
            augment_scales([VoxelGrid(np.full((4, 4, 4), 0.5))], [0.5])
