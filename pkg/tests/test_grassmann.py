import numpy as np
import pytest

import furst
from furst.errors import InvalidParameter, InvalidScale, StaleResolution


def line_at(point, direction):
    return furst.standard_form(point, direction)


class TestStandardForm:
    def test_projection_onto_y_axis(self):
        ln = furst.standard_form([2, 3], [1, 0])
        assert np.allclose(ln.direction.vector, [1, 0])
        assert np.allclose(ln.translation, [0, 3])

    def test_point_on_subspace(self):
        ln = furst.standard_form([1, 1], [1, 1])
        assert np.allclose(ln.direction.vector, np.array([1, 1]) / np.sqrt(2))
        assert np.allclose(ln.translation, [0, 0], atol=1e-15)

    def test_antipodal_canonicalization(self):
        ln = furst.standard_form([0, 1], [0, -1])
        assert np.allclose(ln.direction.vector, [0, 1])
        assert np.allclose(ln.translation, [0, 0], atol=1e-15)

    def test_zero_direction_rejected(self):
        with pytest.raises(InvalidParameter):
            furst.standard_form([1, 2], [0, 0])

    def test_round_trip_contains_point(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            p = rng.uniform(-2, 2, size=3)
            v = rng.standard_normal(3)
            ln = furst.standard_form(p, v)
            assert ln.point_distance(p)[0] <= 1e-10

    def test_canonicalization_identifies_antipodes(self):
        rng = np.random.default_rng(14)
        for _ in range(500):
            v = rng.standard_normal(int(rng.integers(2, 5)))
            a = furst.grassmann.canonical_vector(v)
            b = furst.grassmann.canonical_vector(-v)
            assert np.array_equal(a, b)
            assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)


class TestMetric:
    def test_parallel_lines(self):
        a = line_at([0, 0], [1, 0])
        b = line_at([0, 1], [1, 0])
        assert furst.metric_d1(a, b) == pytest.approx(1.0)

    def test_axes_distance_matches_operator_norm(self):
        # oracle: operator norm of the explicit projection difference
        a = line_at([0, 0], [1, 0])
        b = line_at([0, 0], [0, 1])
        P1 = np.array([[1.0, 0.0], [0.0, 0.0]])
        P2 = np.array([[0.0, 0.0], [0.0, 1.0]])
        oracle = np.linalg.norm(P1 - P2, 2)
        assert furst.metric_d1(a, b) == pytest.approx(oracle)
        assert furst.metric_d1(a, b) == pytest.approx(1.0)

    def test_angle_pairs_against_svd_oracle(self):
        angles = np.linspace(0.0, np.pi, 13, endpoint=False)
        for th in angles:
            for th2 in angles:
                u = np.array([np.cos(th), np.sin(th)])
                v = np.array([np.cos(th2), np.sin(th2)])
                P, Q = np.outer(u, u), np.outer(v, v)
                oracle = np.linalg.svd(P - Q, compute_uv=False).max()
                got = furst.projection_distance(u, v)
                assert got == pytest.approx(oracle, abs=1e-10)
                assert got == pytest.approx(abs(np.sin(th - th2)), abs=1e-10)

    def test_metric_axioms_random_triples(self):
        rng = np.random.default_rng(11)
        n = 10_000
        dirs = rng.standard_normal((3 * n, 3))
        trans = rng.uniform(-1, 1, size=(3 * n, 3))
        lines = [
            furst.standard_form(t, v) for t, v in zip(trans, dirs)
        ]
        for i in range(n):
            a, b, c = lines[3 * i], lines[3 * i + 1], lines[3 * i + 2]
            ab = furst.metric_d1(a, b)
            ba = furst.metric_d1(b, a)
            ac = furst.metric_d1(a, c)
            cb = furst.metric_d1(c, b)
            assert ab >= 0.0
            assert ab == ba  # symmetric exactly
            assert ab <= ac + cb + 1e-9  # triangle with slack
        # identity of indiscernibles
        for ln in lines[:100]:
            assert furst.metric_d1(ln, ln) <= 1e-12

    def test_distinct_lines_positive_distance(self):
        a = line_at([0, 0], [1, 0])
        b = line_at([0, 1e-7], [1, 0])
        assert furst.metric_d1(a, b) > 0


class TestDirectionCover:
    def test_diameter_scale_single_bucket(self):
        assert len(furst.direction_cover(2, 1.0)) == 1

    def test_count_at_tenth(self):
        # oracle: covering the angle circle of circumference pi with the
        # |sin| metric needs about pi/arcsin(delta) buckets
        assert 16 <= len(furst.direction_cover(2, 0.1)) <= 64

    def test_doubling_consistency(self):
        c1 = len(furst.direction_cover(2, 0.1))
        c2 = len(furst.direction_cover(2, 0.05))
        assert c1 <= c2 <= 4 * c1  # within factor 2 of c1 * 2

    def test_every_direction_covered(self):
        cov = furst.direction_cover(2, 0.07)
        rng = np.random.default_rng(5)
        for _ in range(500):
            v = furst.grassmann.canonical_vector(rng.standard_normal(2))
            b = cov.assign(v[None, :])[0]
            assert furst.projection_distance(v, cov.centers[b]) <= 0.07

    def test_covered_in_3d(self):
        cov = furst.direction_cover(3, 0.25)
        assert len(cov) <= 16 * 0.25**-2
        rng = np.random.default_rng(6)
        for _ in range(200):
            v = furst.grassmann.canonical_vector(rng.standard_normal(3))
            b = cov.assign(v[None, :])[0]
            assert furst.projection_distance(v, cov.centers[b]) <= 0.25

    def test_invalid_scales(self):
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(InvalidScale):
                furst.direction_cover(2, bad)

    def test_deterministic(self):
        a = furst.direction_cover(3, 0.3).centers
        b = furst.direction_cover(3, 0.3).centers
        assert np.array_equal(a, b)


class TestMeshCoverCount:
    def fam(self, lines, floor=1e-9):
        return furst.LineFamily.from_lines(lines, floor)

    def test_single_line(self):
        fam = self.fam([line_at([0, 0], [1, 0])])
        assert furst.mesh_cover_count(fam, 0.1) == 1

    def test_two_translates_in_distinct_cells(self):
        # translations 0 and 0.9 fall in 4*delta cells [0, 0.4) and [0.8, 1.2)
        fam = self.fam([line_at([0, 0], [1, 0]), line_at([0, 0.9], [1, 0])])
        assert furst.mesh_cover_count(fam, 0.1) == 2

    def test_duplicates_share_a_cell(self):
        fam = self.fam([line_at([0, 0], [1, 0]), line_at([5, 0], [1, 0])])
        assert furst.mesh_cover_count(fam, 0.1) == 1

    def test_empty_family_warns(self):
        fam = furst.LineFamily(np.empty((0, 2)), np.empty((0, 2)), 1e-9)
        with pytest.warns(UserWarning):
            assert furst.mesh_cover_count(fam, 0.1) == 0

    def test_scale_below_floor_rejected(self):
        fam = self.fam([line_at([0, 0], [1, 0])], floor=0.01)
        with pytest.raises(StaleResolution):
            furst.mesh_cover_count(fam, 0.001)

    def test_invalid_scale(self):
        fam = self.fam([line_at([0, 0], [1, 0])])
        with pytest.raises(InvalidScale):
            furst.mesh_cover_count(fam, 0.0)

    def test_monotone_under_inclusion(self):
        rng = np.random.default_rng(9)
        lines = [
            furst.standard_form(rng.uniform(-1, 1, 2), rng.standard_normal(2))
            for _ in range(30)
        ]
        sub = self.fam(lines[:12])
        full = self.fam(lines)
        for delta in (0.3, 0.1, 0.05):
            assert furst.mesh_cover_count(sub, delta) <= furst.mesh_cover_count(
                full, delta
            )

    def test_mesh_cells_match_count(self):
        rng = np.random.default_rng(21)
        lines = [
            furst.standard_form(rng.uniform(-1, 1, 2), rng.standard_normal(2))
            for _ in range(25)
        ]
        fam = self.fam(lines)
        for delta in (0.2, 0.05):
            ids = furst.mesh_cells(fam, delta)
            assert len(ids) == len(fam)
            assert all(isinstance(c.translation_cell, tuple) for c in ids)
            assert len(set(ids)) == furst.mesh_cover_count(fam, delta)

    def test_upper_bound_and_equality_case(self):
        delta = 0.05
        # same direction, translations >= 4*sqrt(d-1)*delta apart: all distinct
        lines = [line_at([0, i * 4.5 * delta], [1, 0]) for i in range(7)]
        fam = self.fam(lines)
        assert furst.mesh_cover_count(fam, delta) == len(fam)
        rng = np.random.default_rng(2)
        crowd = self.fam(
            [
                furst.standard_form(rng.uniform(0, 0.01, 2), [1, 0])
                for _ in range(9)
            ]
        )
        assert furst.mesh_cover_count(crowd, delta) <= len(crowd)
