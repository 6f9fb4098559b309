import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from mgriemann.eos import EosParams, internal_energy, pressure
from mgriemann.errors import (ConstitutiveViolationError, DomainError, LimitUndefinedError,
                              ParameterError)
from mgriemann.plasticity import (DeviatoricModel, LimitKind, Phase, SideState, beta,
                                  classify_phase, deviator_after_wave, effective_stress,
                                  elastic_limit_densities, limit_state,
                                  plastic_limit_densities)

MURN = EosParams.murnaghan(2.225e6, 3.7, 7.8, 1.0)
STIFF = EosParams.stiffened_gas(4.4, 6e6)
PERFECT = DeviatoricModel.perfect(8.53e5, 6.50e3)
HYDRO = DeviatoricModel.hardening(8.53e5, 4.265e5, 6.50e3, 9.75e3)
STEEL0 = SideState(7.8, 10.0, 1.0, 0.0)


# ------------------------------------------------------------- model invariants

def test_degenerate_models_representable():
    f = DeviatoricModel.fluid()
    assert f.is_fluid
    e = DeviatoricModel.elastic(1e10)
    assert e.mu_e == e.mu_p and math.isinf(e.y_e) and math.isinf(e.y_p)
    assert PERFECT.mu_p == 0.0 and math.isinf(PERFECT.y_p)
    lin = DeviatoricModel.hardening(2.0, 1.0, 3.0)
    assert math.isinf(lin.y_p)


@pytest.mark.parametrize("args", [(1.0, 2.0, 0.0, 0.0), (1.0, 0.5, 2.0, 1.0),
                                  (-1.0, 0.0, 0.0, 0.0), (math.nan, 0.0, 0.0, 0.0)])
def test_invalid_models_rejected(args):
    with pytest.raises(ParameterError):
        DeviatoricModel(*args)


def test_side_state_validation():
    with pytest.raises(DomainError):
        SideState(0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        SideState(1.0, math.inf, 1.0)
    s = SideState(2.0, 1.0, 5.0, -3.0)
    assert s.q == 8.0
    assert s.s_eff == 4.5


# ------------------------------------------------------------- beta / phase

def test_beta_examples():
    assert beta(PERFECT, 7.8, Phase.ELASTIC) == pytest.approx(6.6534e6, rel=1e-14)
    over = DeviatoricModel.elastic(1e10, beta=1e14)
    assert beta(over, 7.8, Phase.ELASTIC) == 1e14
    assert beta(over, 1000.0, Phase.ELASTIC) == 1e14
    assert beta(DeviatoricModel.fluid(), 7.8, Phase.ELASTIC) == 0.0
    assert beta(HYDRO, 7.8, Phase.FLUID) == 0.0
    with pytest.raises(DomainError):
        beta(PERFECT, 0.0, Phase.ELASTIC)


def test_classify_phase_examples():
    assert classify_phase(0.0, PERFECT) == Phase.ELASTIC
    assert classify_phase(8e3, HYDRO) == Phase.PLASTIC
    assert classify_phase(9.75e3, HYDRO) == Phase.FLUID
    assert classify_phase(9.75e3 * (1 + 5e-10), HYDRO) == Phase.FLUID
    assert classify_phase(6.5e3, HYDRO) == Phase.ELASTIC
    with pytest.raises(ConstitutiveViolationError):
        classify_phase(9.75e3 * (1 + 1e-8), HYDRO)
    with pytest.raises(DomainError):
        classify_phase(-1.0, HYDRO)


# ------------------------------------------------------------- deviator jump

def test_deviator_examples():
    assert deviator_after_wave(3.0, 1e6, 7.8, 7.8) == 3.0
    assert deviator_after_wave(3.0, 0.0, 7.8, 9.1) == 3.0
    S = deviator_after_wave(0.0, 6.6534e6, 7.8, 7.8298)
    # 7.8298 is the five-digit rounding of the compression limit density
    assert S == pytest.approx(-4.333e3, abs=6.0)


@given(st.floats(-1e4, 1e4), st.floats(1e3, 1e8), st.floats(5.0, 10.0),
       st.floats(5.0, 10.0), st.floats(5.0, 10.0))
def test_deviator_jump_additive(S0, b, r0, r1, r2):
    two = deviator_after_wave(deviator_after_wave(S0, b, r0, r1), b, r1, r2)
    one = deviator_after_wave(S0, b, r0, r2)
    assert two == pytest.approx(one, rel=1e-12, abs=1e-12 * (abs(S0) + b / r0))


@given(st.floats(1e3, 1e8), st.floats(5.0, 10.0), st.floats(5.0, 10.0), st.floats(5.0, 10.0))
def test_deviator_linear_in_specific_volume(b, r0, r1, r2):
    s1 = deviator_after_wave(0.0, b, r0, r1)
    s2 = deviator_after_wave(0.0, b, r0, r2)
    assert s1 - s2 == pytest.approx(4 * b / 3 * (1 / r1 - 1 / r2), rel=1e-9, abs=1e-9 * b / r0)


# ------------------------------------------------------------- limit densities

def test_elastic_limits_closed_form():
    rc, rt = elastic_limit_densities(SideState(7.8, 0, 1.0, 0.0), PERFECT)
    b, Y = 6.6534e6, 6.5e3
    assert 1 / rc == pytest.approx(1 / 7.8 - Y / (2 * b), rel=1e-14)
    assert 1 / rt == pytest.approx(1 / 7.8 + Y / (2 * b), rel=1e-14)
    assert rc == pytest.approx(7.8298, abs=5e-5)
    assert rt == pytest.approx(7.7704, abs=5e-5)
    assert rt <= 7.8 <= rc


def test_fluid_limits_coincide():
    rc, rt = elastic_limit_densities(SideState(1.0, 0, 1.0), DeviatoricModel.fluid())
    assert rc == rt == 1.0


def test_infinite_yield_has_no_limits():
    assert elastic_limit_densities(STEEL0, DeviatoricModel.elastic(1e5)) == (None, None)
    pl = plastic_limit_densities(STEEL0, PERFECT)
    assert pl.rho_pc is None and pl.rho_pt is None


def test_limit_undefined_for_nonpositive_specific_volume():
    # a soft solid cannot reach yield in compression: 1/rho_C would be negative
    with pytest.raises(LimitUndefinedError):
        elastic_limit_densities(SideState(7.8, 0, 1.0, 0.0), DeviatoricModel.perfect(1.0, 6.5e3))


def test_degenerate_plastic_limits():
    m = DeviatoricModel(8.53e5, 0.0, 6.5e3, 9.75e3)
    rc, rt = elastic_limit_densities(STEEL0, m)
    pl = plastic_limit_densities(STEEL0, m)
    assert pl.degenerate
    assert pl.rho_pc == rc and pl.rho_pt == rt


def test_plastic_limits_against_density_scan():
    rc, rt = elastic_limit_densities(STEEL0, HYDRO)
    pl = plastic_limit_densities(STEEL0, HYDRO)
    bE, bP = beta(HYDRO, 7.8, Phase.ELASTIC), beta(HYDRO, 7.8, Phase.PLASTIC)
    Sc = deviator_after_wave(0.0, bE, 7.8, rc)
    St = deviator_after_wave(0.0, bE, 7.8, rt)
    # brute-force scan: first density where S_eff reaches Y^P along the plastic segment
    grid = np.linspace(rc, rc * 1.01, 200001)
    seff = 1.5 * np.abs(deviator_after_wave(Sc, bP, rc, grid))
    scan_c = grid[np.argmax(seff >= 9.75e3)]
    assert pl.rho_pc == pytest.approx(scan_c, abs=2 * (grid[1] - grid[0]))
    grid = np.linspace(rt, rt * 0.99, 200001)
    seff = 1.5 * np.abs(deviator_after_wave(St, bP, rt, grid))
    scan_t = grid[np.argmax(seff >= 9.75e3)]
    assert pl.rho_pt == pytest.approx(scan_t, abs=2 * abs(grid[1] - grid[0]))
    assert pl.rho_pt <= rt <= 7.8 <= rc <= pl.rho_pc


@given(st.floats(-4e3, 4e3), st.floats(5.0, 12.0))
def test_nesting_and_limit_consistency(S0, rho):
    s = SideState(rho, 0.0, 1.0, S0)
    rc, rt = elastic_limit_densities(s, HYDRO)
    pl = plastic_limit_densities(s, HYDRO)
    assert pl.rho_pt <= rt <= rho <= rc <= pl.rho_pc
    bE, bP = beta(HYDRO, rho, Phase.ELASTIC), beta(HYDRO, rho, Phase.PLASTIC)
    for r in (rc, rt):
        assert effective_stress(deviator_after_wave(S0, bE, rho, r)) == pytest.approx(6.5e3, rel=1e-9)
    Sc = deviator_after_wave(S0, bE, rho, rc)
    St = deviator_after_wave(S0, bE, rho, rt)
    assert effective_stress(deviator_after_wave(Sc, bP, rc, pl.rho_pc)) == pytest.approx(9.75e3, rel=1e-9)
    assert effective_stress(deviator_after_wave(St, bP, rt, pl.rho_pt)) == pytest.approx(9.75e3, rel=1e-9)


# ------------------------------------------------------------- limit states

def test_perfect_limit_state_deviator():
    ls = limit_state(SideState(7.8, 0, 1.0, 0.0), MURN, PERFECT, LimitKind.C)
    assert ls.S == pytest.approx(-2 * 6.5e3 / 3, rel=1e-12)
    assert ls.S == pytest.approx(-4333.33, rel=1e-6)
    assert ls.q == ls.p - ls.S
    assert ls.p == pytest.approx(pressure(MURN, ls.rho, 0.0), rel=1e-14)
    assert ls.rho >= 7.8


def test_fluid_limit_state_is_generating_state():
    s = SideState(1.0, 0.0, 2.0, 0.0)
    for kind in (LimitKind.C, LimitKind.T):
        ls = limit_state(s, EosParams.ideal_gas(1.4), DeviatoricModel.fluid(), kind)
        assert (ls.rho, ls.p, ls.S) == (1.0, 2.0, 0.0)


def test_tension_limit_matches_ideal_isentrope():
    g = 1.4
    model = DeviatoricModel.perfect(1.0, 0.05)
    s = SideState(1.0, 0.0, 1.0, 0.0)
    ls = limit_state(s, EosParams.ideal_gas(g), model, LimitKind.T, rtol=1e-12)
    assert ls.rho < 1.0
    assert ls.p == pytest.approx((ls.rho / 1.0) ** g, rel=1e-8)


def test_compression_limit_matches_rankine_hugoniot_root():
    model = DeviatoricModel.hardening(1e9, 5e8, 2e8)
    s = SideState(1000.0, 0.0, 1e5, 0.0)
    ls = limit_state(s, STIFF, model, LimitKind.C)
    e0 = internal_energy(STIFF, 1000.0, 1e5)

    def rh(p):  # hydrostatic energy jump across the shock
        e = internal_energy(STIFF, ls.rho, p)
        return e - e0 - 0.5 * (p + 1e5) * (1 / 1000.0 - 1 / ls.rho)

    p_oracle = brentq(rh, 1e5, 1e12, xtol=1e-6, rtol=1e-15)
    assert ls.p == pytest.approx(p_oracle, rel=1e-10)


def test_plastic_limit_state_chains_from_elastic():
    C = limit_state(STEEL0, MURN, HYDRO, LimitKind.C)
    PC = limit_state(STEEL0, MURN, HYDRO, LimitKind.PC)
    T = limit_state(STEEL0, MURN, HYDRO, LimitKind.T)
    PT = limit_state(STEEL0, MURN, HYDRO, LimitKind.PT)
    assert PT.rho <= T.rho <= 7.8 <= C.rho <= PC.rho
    assert effective_stress(PC.S) == pytest.approx(9.75e3, rel=1e-9)
    assert effective_stress(PT.S) == pytest.approx(9.75e3, rel=1e-9)
    assert PC.q > C.q > STEEL0.q > T.q > PT.q


def test_limit_state_requires_finite_yield():
    with pytest.raises(LimitUndefinedError):
        limit_state(STEEL0, MURN, PERFECT, LimitKind.PC)
