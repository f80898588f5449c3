"""Time-domain solver tests: oracles against the eigenanalysis and hand stencils."""
import numpy as np
import pytest

from frspectra.advect import (
    AdvectionProblem,
    DivergenceError,
    FieldState,
    PeriodicGrid,
    check_decay_rate,
    commensurate_wave,
    dump_state,
    eigenmode_state,
    plane_wave_state,
)
from frspectra.basis import CorrectionFamily
from frspectra.operator import SchemeConfig, StretchedStencil, WaveProbe, symbol_for
from frspectra.temporal import RK44, cfl_limit


def scheme(p, alpha=1.0, d=1, kind="huynh"):
    fam = CorrectionFamily.dg(p) if kind == "dg" else CorrectionFamily.huynh_g2(p)
    return SchemeConfig(p, fam, alpha, d)


class TestGrids:
    def test_uniform_extent(self):
        grid = PeriodicGrid.uniform((8,), 0.5)
        assert grid.extent == (4.0,)
        assert grid.cells_per_dir == (8,)

    def test_mirrored_geometric_closes(self):
        grid = PeriodicGrid.mirrored_geometric(10, 1.3)
        w = grid.spacings[0]
        assert np.allclose(w, w[::-1])
        assert w.size == 10
        with pytest.raises(ValueError):
            PeriodicGrid.mirrored_geometric(7, 1.3)

    def test_minimum_cells(self):
        with pytest.raises(ValueError):
            PeriodicGrid.uniform((3,))


class TestRhs:
    @pytest.mark.parametrize(
        "grid",
        [
            PeriodicGrid.uniform((6,)),
            PeriodicGrid.mirrored_geometric(8, 1.2),
            PeriodicGrid.explicit(np.array([1.0, 0.5, 2.0, 0.7, 1.1]), np.array([0.9, 1.4, 0.6, 1.0])),
        ],
    )
    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_constant_state_is_steady(self, grid, alpha):
        sch = scheme(3, alpha, grid.d)
        vel = (1.0,) if grid.d == 1 else (np.cos(0.4), np.sin(0.4))
        problem = AdvectionProblem(grid, sch, vel)
        shape = (
            (grid.cells_per_dir[0], 4)
            if grid.d == 1
            else (grid.cells_per_dir[1], grid.cells_per_dir[0], 4, 4)
        )
        values = np.full(shape, 2.7 + 0.0j)
        assert np.abs(problem.rhs(values)).max() < 1e-12

    def test_p0_upwind_is_fv_stencil(self):
        grid = PeriodicGrid.uniform((8,), 0.5)
        problem = AdvectionProblem(grid, scheme(0, 1.0, kind="dg"))
        rng = np.random.default_rng(3)
        u = rng.normal(size=(8, 1)) + 0j
        expected = -(u - np.roll(u, 1, axis=0)) / 0.5
        assert np.abs(problem.rhs(u) - expected).max() < 1e-13

    def test_plane_wave_matches_symbol_action(self):
        # on a uniform commensurate grid the sampled plane wave is a Bloch
        # vector: the solver's rhs must equal the symbol acting cellwise
        p, nc, delta = 3, 8, 1.0
        k = 2 * np.pi * 2 / (nc * delta)
        sch = scheme(p)
        grid = PeriodicGrid.uniform((nc,), delta)
        problem = AdvectionProblem(grid, sch)
        state = plane_wave_state(problem, k)
        sym = symbol_for(sch, StretchedStencil.uniform(1, delta), WaveProbe(k=k))
        got = problem.rhs(state.values)
        phases = np.exp(1j * k * grid.origins(0))
        expected = phases[:, None] * (sym.Q @ state.values[0])
        assert np.abs(got - expected).max() < 1e-10

    def test_eigenmode_rhs_is_scalar_multiple(self):
        p, nc = 2, 8
        k = 2 * np.pi * 2 / nc
        sch = scheme(p)
        problem = AdvectionProblem(PeriodicGrid.uniform((nc,)), sch)
        state, omega = eigenmode_state(problem, k)
        got = problem.rhs(state.values)
        assert np.abs(got - (-1j * omega) * state.values).max() < 1e-8

    def test_2d_eigenmode_rhs(self):
        p = 2
        theta = np.radians(30)
        k, delta = commensurate_wave(2, theta, 3.0, (8, 8))
        sch = scheme(p, 1.0, 2)
        grid = PeriodicGrid.uniform((8, 8), delta)
        problem = AdvectionProblem(grid, sch, (np.cos(theta), np.sin(theta)))
        state, omega = eigenmode_state(problem, k, theta)
        got = problem.rhs(state.values)
        assert np.abs(got - (-1j * omega) * state.values).max() < 1e-8


class TestStep:
    def test_central_preserves_l2_energy(self):
        # nodal DG member: central flux conserves the plain L2 norm
        sch = scheme(2, 0.5, kind="dg")
        problem = AdvectionProblem(PeriodicGrid.uniform((8,)), sch)
        state = plane_wave_state(problem, 2 * np.pi * 2 / 8)
        tau = 1e-3
        _, energies = problem.energy_history(state, RK44, tau, 100)
        drift = np.abs(np.diff(energies)).max()
        assert drift < 1e-10 * energies[0]

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_conservation_per_step(self, alpha):
        sch = scheme(3, alpha)
        problem = AdvectionProblem(PeriodicGrid.uniform((8,)), sch)
        rng = np.random.default_rng(7)
        state = FieldState(rng.normal(size=(8, 4)) + 1j * rng.normal(size=(8, 4)))
        total0 = problem.total_integral(state.values)
        for _ in range(50):
            state = problem.step(state, RK44, 5e-3)
            assert abs(problem.total_integral(state.values) - total0) < 1e-10
            total0 = problem.total_integral(state.values)

    def test_stability_bracketing_against_cfl(self):
        p = 2
        sch = scheme(p)
        stencil = StretchedStencil.uniform(1)
        res = cfl_limit(sch, stencil, 0.0, RK44)
        grid = PeriodicGrid.uniform((32,))
        problem = AdvectionProblem(grid, sch)
        rng = np.random.default_rng(11)
        values = rng.normal(size=(32, p + 1)) + 1j * rng.normal(size=(32, p + 1))
        state = FieldState(values)
        # below the limit: bounded for 10^4 steps
        final = problem.advance(state, RK44, 0.95 * res.tau_limit, 10_000)
        assert np.abs(final.values).max() < 1e3
        # slightly above: the divergence signal fires
        with pytest.raises(DivergenceError) as info:
            problem.advance(state, RK44, 1.1 * res.tau_limit, 10_000)
        assert 0 < info.value.step_index <= 10_000

    def test_expanding_region_collects_low_k_energy(self):
        # mirrored periodic grid: before transit mixes the halves, the energy
        # of a resolved low-wavenumber wave grows in the expanding half and
        # decays in the contracting half (qualitative sign check)
        sch = scheme(4)
        grid = PeriodicGrid.mirrored_geometric(12, 1.25)
        problem = AdvectionProblem(grid, sch)
        k = 2 * np.pi * 3 / grid.extent[0]
        state = plane_wave_state(problem, k)
        e0 = problem.energy_by_cell(state.values)
        final = problem.advance(state, RK44, 2.5e-3, 4)
        e1 = problem.energy_by_cell(final.values)
        w = grid.spacings[0]
        expanding = np.array([w[(i + 1) % w.size] > w[i] for i in range(w.size)])
        expanding_ratio = e1[expanding].sum() / e0[expanding].sum()
        contracting_ratio = e1[~expanding].sum() / e0[~expanding].sum()
        assert expanding_ratio > 1.0 > contracting_ratio


class TestRateChecks:
    @pytest.mark.parametrize(
        "p,kind,alpha,d,theta_deg",
        [
            (1, "dg", 1.0, 1, 0.0),
            (4, "huynh", 1.0, 1, 0.0),
            (2, "huynh", 0.5, 2, 45.0),
            (3, "dg", 1.0, 2, 30.0),
        ],
    )
    def test_decay_rate_matches_spectrum(self, p, kind, alpha, d, theta_deg):
        kind_name = "dg" if kind == "dg" else "huynh-g2"
        check = check_decay_rate(p, kind_name, alpha, d, theta=np.radians(theta_deg), k_hat=1.0)
        assert check.passed, (
            f"rate mismatch: predicted {check.predicted}, measured {check.measured}, "
            f"rel {check.rel_error}"
        )

    def test_commensurate_wave_is_exact(self):
        k, delta = commensurate_wave(2, np.radians(30), 3.0, (8, 8))
        # both components must fit an integer number of periods in the box
        mx = k * np.cos(np.radians(30)) * 8 * delta[0] / (2 * np.pi)
        my = k * np.sin(np.radians(30)) * 8 * delta[1] / (2 * np.pi)
        assert abs(mx - round(mx)) < 1e-12
        assert abs(my - round(my)) < 1e-12


class TestOrderOfAccuracy:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_convergence_order(self, p):
        sch = scheme(p, 1.0, kind="dg")
        errors = []
        cells = [8, 16, 32]
        for nc in cells:
            grid = PeriodicGrid.uniform((nc,), 1.0 / nc)
            problem = AdvectionProblem(grid, sch)
            state = FieldState(problem.sample(lambda x: np.exp(np.sin(2 * np.pi * x))))
            tau = 0.05 / nc
            nsteps = int(round(0.25 / tau))
            final = problem.advance(state, RK44, tau, nsteps)
            t = nsteps * tau
            errors.append(
                problem.l2_error(final.values, lambda x: np.exp(np.sin(2 * np.pi * (x - t))))
            )
        order = np.polyfit(np.log(cells), -np.log(errors), 1)[0]
        assert order >= p + 0.5


class TestDump:
    def test_dump_roundtrip_values(self, tmp_path):
        problem = AdvectionProblem(PeriodicGrid.uniform((4,)), scheme(1))
        state = plane_wave_state(problem, 2 * np.pi / 4)
        path = tmp_path / "state.txt"
        dump_state(problem, state, path)
        rows = np.loadtxt(path)
        assert rows.shape == (4 * 2, 4)  # cell, x, re, im
        values = rows[:, 2] + 1j * rows[:, 3]
        assert np.abs(values - state.values.ravel()).max() < 1e-15

    def test_dump_2d_header(self, tmp_path):
        sch = scheme(1, 1.0, 2)
        problem = AdvectionProblem(PeriodicGrid.uniform((4, 4)), sch, (1.0, 0.0))
        state = FieldState(np.zeros((4, 4, 2, 2), dtype=complex))
        path = tmp_path / "state2d.txt"
        dump_state(problem, state, path)
        head = path.read_text().splitlines()[:4]
        assert head[0].startswith("# frspectra state dump")
        assert "cell node_x node_y re_value im_value" in head[3]
