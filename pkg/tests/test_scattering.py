import math

import numpy as np
import pytest

from bosegas.errors import NonConvergence
from bosegas.lattice_potential import TWO_PI, Potential, enumerate_lattice, scaled_table
from bosegas.scattering import (
    _FFTConvolver,
    conv_direct,
    dense_solve_eta,
    eta_tail,
    residual,
    scattering_length,
    solve_eta,
)
from bosegas.sums import det_sum


class TestSolver:
    def test_zero_coupling_one_iteration(self, lat3):
        sol = solve_eta(Potential(kappa=0.0, R=0.2), lat3, 100, 0.6)
        assert sol.iterations == 1
        assert np.all(sol.eta == 0.0)
        assert sol.residual_norm == 0.0

    def test_six_by_six_dense_oracle(self):
        pot = Potential(kappa=0.5, R=0.2)
        lat = enumerate_lattice(TWO_PI)
        sol = solve_eta(pot, lat, N=100, beta=0.6)
        dense = dense_solve_eta(pot, lat, 100, 0.6)
        assert np.max(np.abs(sol.eta - dense)) <= 1e-12

    @pytest.mark.parametrize("n_over", [1.0, math.sqrt(2), math.sqrt(3), 2.0,
                                        math.sqrt(5), 3.0, math.sqrt(12)])
    def test_dense_equivalence_small_lattices(self, n_over):
        # every lattice with <= 200 points
        pot = Potential(kappa=0.1, R=0.25)
        lat = enumerate_lattice(TWO_PI * n_over)
        assert len(lat) <= 200
        sol = solve_eta(pot, lat, N=10**4, beta=0.75)
        dense = dense_solve_eta(pot, lat, 10**4, 0.75)
        assert np.max(np.abs(sol.eta - dense)) <= 10.0 * sol.tol

    def test_converged_residual_within_tol(self, sol_small):
        assert residual(sol_small) <= sol_small.tol

    def test_symmetry_exact(self, sol_small):
        neg = sol_small.lattice.negation_index()
        assert np.all(sol_small.eta == sol_small.eta[neg])

    def test_nonconvergence_reports(self, lat3):
        pot = Potential(kappa=0.5, R=0.2)
        with pytest.raises(NonConvergence) as exc:
            solve_eta(pot, lat3, N=100, beta=0.6, tol=1e-30, max_iter=3)
        assert exc.value.iterations == 3
        assert exc.value.last_residual > 0


class TestResidual:
    def test_zero_eta_zero_coupling(self, lat3):
        sol = solve_eta(Potential(kappa=0.0, R=0.2), lat3, 50, 0.6)
        assert residual(sol) == 0.0

    def test_born_defect_matches_double_loop(self, pot_coupled, lat3):
        # residual of the bare Born term equals an independent O(M^2) loop
        N, beta = 300, 0.7
        table = scaled_table(pot_coupled, lat3, N, beta)
        psq = lat3.psq
        born = -table.values / (2.0 * psq)
        pts = lat3.points
        M = len(lat3)
        defect = np.empty(M)
        for i in range(M):
            acc = 0.0
            for j in range(M):
                acc += float(table.value_at(pts[i] - pts[j])) * born[j]
            defect[i] = psq[i] * born[i] + acc / (2 * N) + 0.5 * table.values[i]
        expected = float(np.max(np.abs(defect)))
        conv = conv_direct(table, born)
        got = float(np.max(np.abs(psq * born + conv / (2 * N) + 0.5 * table.values)))
        assert got == pytest.approx(expected, rel=1e-12)


class TestConvolution:
    def test_fft_matches_direct(self, pot_coupled):
        lat = enumerate_lattice(TWO_PI * 5)
        table = scaled_table(pot_coupled, lat, 1000, 0.75)
        rng = np.random.default_rng(11)
        vals = rng.normal(size=len(lat))
        vals = 0.5 * (vals + vals[lat.negation_index()])  # inputs are even
        a = conv_direct(table, vals)
        b = _FFTConvolver(table)(vals)
        scale = np.max(np.abs(a))
        assert np.max(np.abs(a - b)) <= 1e-12 * scale
        # the fast path is exactly even, like the direct path
        assert np.all(b == b[lat.negation_index()])

    def test_solver_paths_agree(self, pot_coupled, lat3):
        s1 = solve_eta(pot_coupled, lat3, 400, 0.7, conv_method="direct")
        s2 = solve_eta(pot_coupled, lat3, 400, 0.7, conv_method="fft")
        assert np.max(np.abs(s1.eta - s2.eta)) <= 1e-13


class TestTailRule:
    def test_zero_coupling(self):
        assert eta_tail(Potential(kappa=0.0, R=0.2), 100, 0.6, [TWO_PI, 0, 0]) == 0.0

    def test_large_momentum_bound(self, pot_ref):
        for n in (5, 20, 100):
            p = np.array([TWO_PI * n, 0.0, 0.0])
            val = eta_tail(pot_ref, 10**4, 0.75, p)
            assert abs(val) <= pot_ref.vhat0 / (2.0 * float(p @ p))

    def test_boundary_shell_agreement(self, pot_ref):
        # solved table vs tail rule at the outermost shell
        N, beta = 10**4, 0.75
        lat = enumerate_lattice(TWO_PI * 6)
        sol = solve_eta(pot_ref, lat, N, beta)
        _, sl = lat.shells[-1]
        for i in range(sl.start, min(sl.stop, sl.start + 4)):
            p = TWO_PI * lat.points[i].astype(float)
            tail = eta_tail(pot_ref, N, beta, p)
            bound = 5.0 * N ** (beta - 1) * pot_ref.vhat0 / float(p @ p)
            assert abs(sol.eta[i] - tail) <= bound


class TestScatteringLength:
    def test_zero_coupling(self, lat3):
        sol = solve_eta(Potential(kappa=0.0, R=0.2), lat3, 100, 0.6)
        assert scattering_length(sol).value == 0.0

    def test_below_zeroth_born(self, sol_small):
        a = scattering_length(sol_small)
        assert 8.0 * math.pi * a.value < sol_small.table.at_zero

    def test_born2_coefficient_stable_in_kappa(self, lat6):
        # (vhat(0) - 8 pi a)/kappa^2 approaches the second Born sum
        N, beta = 10**4, 0.75
        coefs = {}
        for kappa in (1e-2, 1e-3):
            pot = Potential(kappa=kappa, R=0.25)
            sol = solve_eta(pot, lat6, N, beta)
            a = scattering_length(sol)
            born2 = det_sum(sol.table.values**2 / sol.lattice.psq) / (2.0 * N)
            coefs[kappa] = (
                (pot.vhat0 - 8.0 * math.pi * a.value) / kappa**2,
                born2 / kappa**2,
            )
        x1, b1 = coefs[1e-2]
        x2, b2 = coefs[1e-3]
        assert abs(x1 - x2) <= 0.01 * abs(x2)
        assert abs(x1 - b1) <= 0.01 * abs(b1)
        assert abs(x2 - b2) <= 0.01 * abs(b2)

    def test_monotone_truncation(self, pot_ref):
        N, beta = 500, 0.75
        small = solve_eta(pot_ref, enumerate_lattice(TWO_PI * 4), N, beta)
        big = solve_eta(pot_ref, enumerate_lattice(TWO_PI * 8), N, beta)
        a_small = scattering_length(small)
        a_big = scattering_length(big)
        assert abs(a_big.value - a_small.value) <= a_small.tail_bound
