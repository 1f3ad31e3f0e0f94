import math

import numpy as np
import pytest

from bosegas.errors import BetaOutOfRange, CutoffTooSmall
from bosegas.lattice_potential import (
    TWO_PI,
    Potential,
    born2_sum,
    enumerate_lattice,
    scaled_table,
    vhat,
    vhat_oracle,
)
from bosegas.sums import det_sum

from conftest import brute_count


class TestEnumerate:
    def test_first_shell(self):
        lat = enumerate_lattice(TWO_PI)
        assert len(lat) == 6
        assert set(map(tuple, lat.points.tolist())) == {
            (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)
        }

    def test_sqrt2_shell(self):
        assert len(enumerate_lattice(TWO_PI * math.sqrt(2))) == 18

    def test_radius_ten_count_vs_brute(self):
        lat = enumerate_lattice(TWO_PI * 10)
        assert len(lat) == 4168
        assert len(lat) == brute_count(10.0)

    def test_too_small(self):
        with pytest.raises(CutoffTooSmall):
            enumerate_lattice(0.9 * TWO_PI)

    def test_negation_closed(self, lat6):
        neg = lat6.negation_index()
        assert np.all(neg >= 0)
        assert np.array_equal(lat6.points[neg], -lat6.points)

    def test_canonical_order(self, lat6):
        nsq = lat6.nsq
        assert np.all(np.diff(nsq) >= 0)
        for _, sl in lat6.shells:
            pts = lat6.points[sl].tolist()
            assert pts == sorted(pts)

    def test_deterministic(self):
        a = enumerate_lattice(TWO_PI * 4)
        b = enumerate_lattice(TWO_PI * 4)
        assert np.array_equal(a.points, b.points)

    def test_lookup(self, lat6):
        idx = lat6.lookup(lat6.points)
        assert np.array_equal(idx, np.arange(len(lat6)))
        assert lat6.lookup(np.array([[99, 0, 0]]))[0] == -1


class TestVhat:
    def test_zero_momentum_ball_volume(self):
        pot = Potential(kappa=1.0, R=1.0)
        assert vhat(pot, [0.0, 0.0, 0.0]) == pytest.approx((4 * math.pi / 3) ** 2, rel=1e-14)
        assert abs(vhat(pot, [0, 0, 0]) - 17.5460) < 5e-4

    def test_zero_coupling(self):
        pot = Potential(kappa=0.0, R=0.2)
        assert vhat(pot, [TWO_PI, 0, 0]) == 0.0

    def test_quadrature_oracle(self):
        pot = Potential(kappa=1.0, R=0.4)
        closed = vhat(pot, [TWO_PI, 0, 0])
        ref = vhat_oracle(pot, TWO_PI)
        assert abs(closed - ref) / ref <= 1e-10

    @pytest.mark.parametrize("rho", [0.3, 2.0, 17.5, 60.0])
    def test_quadrature_oracle_other_radii(self, rho):
        pot = Potential(kappa=0.7, R=0.25)
        ref = vhat_oracle(pot, rho)
        assert abs(float(pot.vhat_radial(rho)) - ref) <= 1e-10 * max(ref, pot.vhat0)

    def test_nonnegative_and_radial(self):
        pot = Potential(kappa=0.3, R=0.25)
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = rng.normal(size=3) * 30
            v = vhat(pot, p)
            assert v >= 0.0
            # same radius, different direction
            q = np.array([np.linalg.norm(p), 0.0, 0.0])
            assert vhat(pot, q) == pytest.approx(v, rel=1e-12)

    def test_series_matches_direct_branch(self):
        # the four-term series extends well beyond its switch radius; at
        # r = 0.02 both it and the direct form are reliable
        r = 0.02
        direct = (math.sin(r) - r * math.cos(r)) / r**3
        series = 1 / 3 - r**2 / 30 + r**4 / 840 - r**6 / 45360
        assert abs(series - direct) <= 5e-12 * direct

    def test_branches_agree_at_switch_radius(self):
        from bosegas.lattice_potential import _SERIES_RADIUS

        r = _SERIES_RADIUS
        direct = (math.sin(r) - r * math.cos(r)) / r**3
        series = 1 / 3 - r**2 / 30 + r**4 / 840 - r**6 / 45360
        assert abs(series - direct) <= 5e-13 * direct


class TestScaledTable:
    def test_beta_out_of_range(self, pot_ref, lat3):
        with pytest.raises(BetaOutOfRange):
            scaled_table(pot_ref, lat3, 100, 1.0)

    def test_large_N_limit(self, pot_ref, lat3):
        t = scaled_table(pot_ref, lat3, 10**8, 0.9)
        i = lat3.index[(1, 0, 0)]
        assert abs(t.values[i] - t.at_zero) <= 1e-6 * t.at_zero

    def test_zero_coupling(self, lat3):
        t = scaled_table(Potential(kappa=0.0, R=0.2), lat3, 100, 0.5)
        assert np.all(t.values == 0.0)

    def test_scaling_path(self, pot_ref, lat3):
        t = scaled_table(pot_ref, lat3, 1000, 0.5)
        i = lat3.index[(1, 0, 0)]
        direct = float(pot_ref.vhat_radial(TWO_PI / math.sqrt(1000)))
        assert t.values[i] == direct

    def test_negation_symmetry_exact(self, pot_ref, lat6):
        t = scaled_table(pot_ref, lat6, 777, 0.7)
        neg = lat6.negation_index()
        assert np.all(t.values == t.values[neg])

    def test_all_nonnegative(self, pot_coupled, lat6):
        t = scaled_table(pot_coupled, lat6, 300, 0.8)
        assert np.all(t.values >= 0.0)


class TestBorn2Sum:
    def test_l1_bound_stays_within_factor_three(self, pot_ref, lat6):
        # sum vhat^2/p^2 (= 2x the tabulated half-weight sum) over the
        # full lattice grows like N^beta; ball + analytic tail must track it
        beta = 0.75
        ratios = []
        for N in (10**3, 10**4, 10**5):
            t = scaled_table(pot_ref, lat6, N, beta)
            ball, tail = born2_sum(t)
            ratios.append(2.0 * (ball + tail) / N**beta)
        assert max(ratios) <= 3.0 * min(ratios)

    def test_tail_consistency_across_cutoffs(self, pot_ref):
        # moving the split point must not move the total by more than a
        # few percent of the tail
        beta = 0.75
        N = 10**4
        big = enumerate_lattice(TWO_PI * 12)
        t = scaled_table(pot_ref, big, N, beta)
        ball_a, tail_a = born2_sum(t, TWO_PI * 6)
        ball_b, tail_b = born2_sum(t, TWO_PI * 12)
        tot_a, tot_b = ball_a + tail_a, ball_b + tail_b
        assert abs(tot_a - tot_b) <= 0.05 * tail_a

    def test_zero_coupling(self, lat3):
        t = scaled_table(Potential(kappa=0.0, R=0.25), lat3, 100, 0.75)
        ball, tail = born2_sum(t)
        assert ball == 0.0 and tail == 0.0


def test_det_sum_matches_fsum():
    rng = np.random.default_rng(3)
    x = rng.normal(size=1000) * 10.0**rng.integers(-8, 8, size=1000)
    assert det_sum(x) == math.fsum(x.tolist())
