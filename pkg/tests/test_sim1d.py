import math

import numpy as np
import pytest

from oracles import ExactIdealGas, cell_average_exact
from mgriemann.eos import EosParams, internal_energy
from mgriemann.errors import DomainError, SimulationError, TopologyError
from mgriemann.plasticity import DeviatoricModel, SideState
from mgriemann.sim1d import (Grid1D, Material, Region, SimConfig, advance_interface, cfl_dt,
                             deviatoric_update, edge_flux, initial_state, interface_flux,
                             primitives, profile, run, spherical_source, step, totals)

GAS = Material("gas", EosParams.ideal_gas(1.4))
STIFF = EosParams.stiffened_gas(4.4, 6e6)


def single(mat, state, cells=400, geometry="planar", x0=0.0, x1=1.0):
    g = Grid1D(x0, x1, cells, geometry)
    return initial_state(g, [Region(x0, x1, mat, state)])


def conserved(mat, rho, u, p, S=0.0):
    e = internal_energy(mat.eos, rho, p)
    return np.array([rho, rho * u, rho * e + 0.5 * rho * u * u, rho * S, 0.0])


# ------------------------------------------------------------- grid

def test_grid_validation():
    with pytest.raises(DomainError):
        Grid1D(0.0, 1.0, 0)
    with pytest.raises(DomainError):
        Grid1D(1.0, 0.0, 10)
    with pytest.raises(DomainError):
        Grid1D(-1.0, 1.0, 10, "spherical")
    g = Grid1D(0.0, 1.0, 4, "spherical")
    assert g.cell_volumes.sum() == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert Grid1D(0.0, 2.0, 8).dx == 0.25


# ------------------------------------------------------------- time step

def test_cfl_dt_static_gas():
    s = single(GAS, SideState(1.0, 0.0, 1.0))
    assert cfl_dt(s, 0.5) == pytest.approx(0.5 * 0.0025 / math.sqrt(1.4), rel=1e-14)
    with pytest.raises(DomainError):
        cfl_dt(s, 1.5)


def test_cfl_dt_elastic_signal_faster():
    solid = Material("solid", STIFF, DeviatoricModel.elastic(1e10))
    fluid = Material("fluid", STIFF)
    st = SideState(1000.0, 0.0, 1e5)
    assert cfl_dt(single(solid, st), 0.4) < cfl_dt(single(fluid, st), 0.4)


def test_cfl_dt_velocity_dominated():
    a = cfl_dt(single(GAS, SideState(1.0, 1e6, 1.0)), 0.4)
    b = cfl_dt(single(GAS, SideState(1.0, 2e6, 1.0)), 0.4)
    assert a / b == pytest.approx(2.0, rel=1e-5)


# ------------------------------------------------------------- edge flux

def test_edge_flux_consistency():
    U = conserved(GAS, 1.2, 3.0, 2.0)
    F = edge_flux(GAS, U, U)
    rho, u, p = 1.2, 3.0, 2.0
    assert F[0] == pytest.approx(rho * u, rel=1e-15)
    assert F[1] == pytest.approx(rho * u * u + p, rel=1e-15)
    assert F[2] == pytest.approx((U[2] + p) * u, rel=1e-15)
    assert F[3] == 0.0


def test_edge_flux_parity():
    a = conserved(GAS, 1.0, 2.0, 1.0)
    b = conserved(GAS, 0.5, -1.0, 0.3)
    F = edge_flux(GAS, a, b)
    mir = lambda U: U * np.array([1, -1, 1, 1, 1])
    G = edge_flux(GAS, mir(b), mir(a))
    assert G[0] == pytest.approx(-F[0], rel=1e-14)
    assert G[1] == pytest.approx(F[1], rel=1e-14)
    assert G[2] == pytest.approx(-F[2], rel=1e-14)


def test_edge_flux_deviator_donor_cell():
    solid = Material("solid", STIFF, DeviatoricModel.elastic(1e10))
    a = conserved(solid, 1000.0, 50.0, 1e5, S=-2e6)
    b = conserved(solid, 1000.0, 50.0, 1e5, S=3e6)
    F = edge_flux(solid, a, b)
    assert F[0] > 0.0
    assert F[3] == pytest.approx(F[0] * -2e6, rel=1e-14)


def test_edge_flux_rejects_nonhyperbolic():
    from mgriemann.errors import NonHyperbolicError
    bad = conserved(Material("s", STIFF), 1000.0, 0.0, 1e5)
    bad[2] = -1e12
    with pytest.raises(NonHyperbolicError):
        edge_flux(Material("s", STIFF), bad, bad)


# ------------------------------------------------------------- uniform states

@pytest.mark.parametrize("geometry", ["planar", "spherical"])
def test_uniform_static_state_is_preserved(geometry):
    s = single(GAS, SideState(1.0, 0.0, 1.0), cells=50, geometry=geometry)
    U0 = s.media[0].U.copy()
    for _ in range(20):
        step(s, 0.4)
    assert np.allclose(s.media[0].U, U0, rtol=1e-14, atol=1e-14)


def test_uniform_moving_state_planar():
    s = single(GAS, SideState(1.0, 0.3, 1.0), cells=50)
    U0 = s.media[0].U.copy()
    for _ in range(20):
        step(s, 0.4)
    assert np.allclose(s.media[0].U, U0, rtol=1e-13, atol=0.0)


def test_spherical_well_balanced_1000_steps(presets):
    # detonation products at rest in the spherical geometry
    tnt = presets["spherical-jwl-stiffened"].regions[0].material
    s = single(tnt, SideState(1630.0, 0.0, 8.3e9), cells=100, geometry="spherical")
    for _ in range(1000):
        step(s, 0.4)
    _, u, _, _, _ = primitives(s.media[0])
    assert np.max(np.abs(u)) < 1e-12


def test_spherical_source_hand_evaluation():
    g = Grid1D(0.0, 1.0, 4, "spherical")
    p = np.array([1.0, 2.0, 3.0, 4.0])
    f = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(spherical_source(g, p, 0.1), 0.1 * p * (f[1:] ** 2 - f[:-1] ** 2),
                       rtol=1e-15)
    assert np.all(spherical_source(g, np.zeros(4), 0.1) == 0.0)


# ------------------------------------------------------------- deviator

def _compressing(model, a=100.0, cells=40):
    mat = Material("m", STIFF, model)
    s = single(mat, SideState(1000.0, 0.0, 1e5), cells=cells)
    x = s.grid.centers
    for i, xi in enumerate(x):
        s.media[0].U[:, i] = conserved(mat, 1000.0, -a * (xi - 0.5), 1e5)
    return s


def test_deviator_hand_computation():
    mu, a = 1e10, 100.0
    s = _compressing(DeviatoricModel.elastic(mu), a)
    info = step(s, 0.4)
    _, _, _, S, _ = primitives(s.media[0])
    expect = -(4.0 / 3.0) * mu * a * info.dt
    assert np.allclose(S[2:-2], expect, rtol=1e-9)


def test_fluid_stays_deviator_free():
    s = _compressing(DeviatoricModel.fluid())
    step(s, 0.4)
    assert np.all(s.media[0].U[3] == 0.0)


def test_uniform_velocity_keeps_deviator():
    mat = Material("m", STIFF, DeviatoricModel.elastic(1e10))
    s = single(mat, SideState(1000.0, 20.0, 1e5, S=-1e6), cells=30)
    step(s, 0.4)
    _, _, _, S, _ = primitives(s.media[0])
    assert np.allclose(S, -1e6, rtol=1e-12)


def test_deviatoric_update_return_map():
    m = DeviatoricModel.hardening(8.53e5, 4.265e5, 6.5e3, 9.75e3)
    sE, sP = 2 * 6.5e3 / 3, 2 * 9.75e3 / 3
    out = deviatoric_update(np.array([0.0, 0.0, 0.0]), np.array([-1e3, -sE - 1000.0, -1e6]), m)
    assert out[0] == -1e3
    # beyond sE the increment is scaled by beta_P / beta_E = 1/2
    assert out[1] == pytest.approx(-sE - 500.0, rel=1e-14)
    assert out[2] == pytest.approx(-sP, rel=1e-14)
    perfect = DeviatoricModel.perfect(8.53e5, 6.5e3)
    assert deviatoric_update(0.0, -1e6, perfect) == pytest.approx(-sE, rel=1e-14)


@pytest.mark.parametrize("name", ["perfect-elastoplastic", "hydro-elastoplastic"])
def test_yield_bound_every_step(presets, name):
    cfg = presets[name].with_overrides(cells=200)
    m = cfg.regions[0].material.model
    bound = m.y_p if math.isfinite(m.y_p) else m.y_e
    worst = [0.0]

    def check(state, info):
        for med in state.media:
            worst[0] = max(worst[0], float(np.max(1.5 * np.abs(med.U[3] / med.U[0]))))

    run(cfg.sim, callback=check)
    assert worst[0] <= bound * (1 + 1e-12)
    assert worst[0] > 0.9 * m.y_e


# ------------------------------------------------------------- interfaces

def test_advance_interface():
    g = Grid1D(0.0, 1.0, 10)
    X = np.array([0.3, 0.6])
    X1, gone = advance_interface(X, [0.0, 0.0], 0.1, g)
    assert np.array_equal(X1, X) and gone == []
    Y = X.copy()
    for _ in range(7):
        Y, _ = advance_interface(Y, [0.01, 0.02], 0.5, g)
    assert np.allclose(Y, X + 7 * np.array([0.01, 0.02]) * 0.5, rtol=1e-14)
    _, gone = advance_interface(np.array([0.95]), [1.0], 0.1, g)
    assert gone == [0]
    with pytest.raises(TopologyError):
        advance_interface(X, [1.0, -1.0], 0.2, g)


def test_interface_retired_at_boundary():
    g = Grid1D(0.0, 1.0, 20)
    fast = Material("gas", EosParams.ideal_gas(1.4))
    regs = [Region(0.0, 0.97, fast, SideState(1.0, 5.0, 1.0)),
            Region(0.97, 1.0, fast, SideState(1.0, 5.0, 1.0))]
    s = initial_state(g, regs)
    for _ in range(40):
        step(s, 0.4)
        if not s.X.size:
            break
    assert s.X.size == 0 and len(s.media) == 1
    assert s.media[0].U.shape == (5, 20)


def test_jwl_elastic_first_interface_solve(presets):
    cfg = presets["jwl-elastic"]
    s = initial_state(cfg.sim.grid, cfg.regions, cfg.sim.boundary)
    sol = interface_flux(s, 0)
    ql, qr = (r.state.q for r in cfg.regions)
    # rarefaction into the products, shock into the solid
    assert qr < sol.q < ql
    assert sol.u > 0.0


def test_symmetric_impact_interface_stationary(presets):
    cfg = presets["gavrilyuk-elastic"].with_overrides(cells=100)
    s = initial_state(cfg.sim.grid, cfg.regions, cfg.sim.boundary)
    for _ in range(10):
        info = step(s, 0.4)
        assert abs(info.interfaces[0].u) < 1e-9 * 100
    assert s.X[0] == pytest.approx(0.5, abs=1e-12)


# ------------------------------------------------------------- audit / convergence

def test_mass_audit_planar(presets):
    res = run(presets["gas-gas"].sim, audit=True)
    assert res.max_step_drift[0] <= 1e-13
    assert np.all(res.max_step_drift <= 1e-12)


def test_gas_gas_grid_convergence(presets):
    ex = ExactIdealGas(1.0, 0.0, 1000.0, 1.0, 0.0, 0.01)
    errs = []
    for n in (100, 200, 400, 800):
        res = run(presets["gas-gas"].with_overrides(cells=n).sim)
        rho = res.snapshots[-1].profile["rho"]
        ref = cell_average_exact(ex, res.state.grid.faces, 0.012, 0.5)
        errs.append(np.sum(np.abs(rho - ref)) / np.sum(np.abs(ref)))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs


def test_run_is_deterministic(presets):
    cfg = presets["jwl-polynomial"].with_overrides(cells=100)
    a, b = run(cfg.sim), run(cfg.sim)
    for k in ("rho", "u", "p", "S"):
        assert np.array_equal(a.snapshots[-1].profile[k], b.snapshots[-1].profile[k])
    assert a.dt_history == b.dt_history


def test_snapshots_and_partial_failure(presets):
    cfg = presets["gas-gas"].with_overrides(cells=50, snapshots=[0.0, 0.006, 0.012])
    res = run(cfg.sim)
    assert [s.t for s in res.snapshots] == [0.0, 0.006, 0.012]
    assert res.ok and res.manifest()["status"] == "ok"


def test_failure_keeps_partial_result(presets):
    cfg = presets["gas-gas"].with_overrides(cells=50)

    def boom(state, info):
        if state.steps == 3:
            raise SimulationError("injected")

    res = run(cfg.sim, callback=boom, raise_on_failure=False)
    assert not res.ok and res.state.steps == 3
    assert res.manifest()["status"] == "failed"
    with pytest.raises(SimulationError) as info:
        run(cfg.sim, callback=boom)
    assert info.value.result.state.steps == 3


@pytest.mark.parametrize("name", ["gas-gas", "jwl-polynomial", "gavrilyuk-elastic", "jwl-elastic",
                                  "perfect-elastoplastic", "hydro-elastoplastic",
                                  "spherical-jwl-stiffened", "spherical-jwl-polynomial"])
def test_positivity_at_cfl_half(presets, name):
    res = run(presets[name].with_overrides(cfl=0.5).sim)
    for m in res.state.media:
        _, _, _, _, c2 = primitives(m)
        assert np.all(m.U[0] > 0.0) and np.all(c2 > 0.0)


def test_totals_and_profile(presets):
    cfg = presets["gas-gas"].with_overrides(cells=10)
    s = initial_state(cfg.sim.grid, cfg.regions)
    assert totals(s)[0] == pytest.approx(1.0, rel=1e-14)
    prof = profile(s)
    assert list(prof["material"][:5]) == ["driver"] * 5 or len(set(prof["material"])) == 2
    assert np.allclose(prof["q"], prof["p"] - prof["S"])


def test_config_validation():
    g = Grid1D(0.0, 1.0, 10)
    with pytest.raises(DomainError):
        SimConfig(g, [], t_end=0.0)
    with pytest.raises(DomainError):
        SimConfig(g, [], t_end=1.0, cfl=0.0)
    with pytest.raises(DomainError):
        SimConfig(g, [], t_end=1.0, snapshot_times=[2.0])
    with pytest.raises(DomainError):
        initial_state(g, [Region(0.0, 0.5, GAS, SideState(1.0))])
