import math

import numpy as np
import pytest

from obstacle_mcf.errors import MarginError, StabilityError
from obstacle_mcf.grid import Grid
from obstacle_mcf.initial_data import Sphere
from obstacle_mcf.potential import ProfileParam, profile_q_delta
from obstacle_mcf.solver import (
    PROJECTION,
    YOSIDA,
    PhaseState,
    SolverConfig,
    Simulation,
    check_interface_margin,
    initial_state,
    multiplier,
    run,
    stability_limit,
    step,
    step_projection,
    step_yosida,
)


def _cfg(scheme=YOSIDA, eps=0.1, delta=0.01, nodes=81, t_end=0.005, **kw):
    g = Grid.cube(2, nodes, 2.0)
    return SolverConfig(g, Sphere((0.0, 0.0), 0.5), eps, delta if scheme == YOSIDA else None,
                        scheme, t_end=t_end, **kw)


def test_stability_limit_reference_numbers():
    g = Grid.cube(2, 161, 2.0)
    y = SolverConfig(g, Sphere((0.0, 0.0), 0.5), 0.05, 0.1, YOSIDA)
    assert stability_limit(y) == pytest.approx(0.0125**2 / 6, rel=1e-12)
    p = SolverConfig(g, Sphere((0.0, 0.0), 0.5), 0.05, None, PROJECTION)
    assert stability_limit(p) == pytest.approx(2.604e-5, rel=1e-3)
    assert y.time_step == pytest.approx(0.9 * stability_limit(y))


def test_stability_limit_stiff_and_monotone():
    g = Grid.cube(2, 161, 2.0)
    # delta -> 0 makes the Yosida problem stiff
    lims = [stability_limit(SolverConfig(g, Sphere((0.0, 0.0), 0.5), 0.05, d, YOSIDA))
            for d in (1e-2, 1e-4, 1e-6)]
    assert lims[0] > lims[1] > lims[2]
    # every admissible step keeps the update monotone: dt (2n/h^2 + L) <= 1
    for d, lim in zip((1e-2, 1e-4, 1e-6), lims):
        L = (1 - d) / (d * 0.05**2)
        assert lim * (4 / g.h**2 + L) <= 1 + 1e-12


def test_equilibria_unchanged():
    g = Grid.cube(2, 32, 1.0)
    d = 0.1
    for val in (1 / (1 - d), -1 / (1 - d), 0.0):
        st = PhaseState(np.full(g.shape, val), g, 0.1, d, 0.0, YOSIDA)
        out = step_yosida(st, 1e-5)
        np.testing.assert_allclose(out.field, val, atol=1e-13)
        assert out.t == 1e-5
    st = PhaseState(np.ones(g.shape), g, 0.1, None, 0.0, PROJECTION)
    assert np.all(step_projection(st, 1e-5).field == 1.0)


def test_stability_error():
    g = Grid.cube(2, 32, 1.0)
    st = PhaseState(np.zeros(g.shape), g, 0.1, 0.1, 0.0, YOSIDA)
    with pytest.raises(StabilityError):
        step(st, 1.0)
    with pytest.raises(StabilityError):
        step(st, 0.0)


def test_scheme_delta_consistency():
    g = Grid.cube(2, 32, 1.0)
    with pytest.raises(ValueError):
        PhaseState(np.zeros(g.shape), g, 0.1, 0.1, 0.0, PROJECTION)
    with pytest.raises(ValueError):
        PhaseState(np.zeros(g.shape), g, 0.1, None, 0.0, YOSIDA)
    with pytest.raises(ValueError):
        step_projection(PhaseState(np.zeros(g.shape), g, 0.1, 0.1, 0.0, YOSIDA), 1e-6)


def test_profile_is_discrete_near_equilibrium_1d():
    # one step moves the 1-D standing wave by O(dt h^2) away from the branch
    # points r = +-r1, where the third derivative jumps and the rate is O(dt h)
    eps, d = 0.05, 0.1
    r1 = eps * math.asin(math.sqrt(1 - d))
    smooth, kink = [], []
    for n in (1601, 3201):
        g = Grid((n,), (2.0,))
        x = g.axes()[0]
        phi = np.asarray(profile_q_delta(x, ProfileParam(eps, d)))
        st = PhaseState(phi, g, eps, d, 0.0, YOSIDA)
        dt = 1e-8
        rate = np.abs(step_yosida(st, dt).field - phi) / dt
        away = np.abs(np.abs(x) - r1) > 2 * g.h
        smooth.append(np.max(rate[away]))
        kink.append(np.max(rate))
    assert smooth[0] / smooth[1] > 3.5
    assert kink[0] / kink[1] > 1.8


def test_run_zero_time_gives_initial_snapshot():
    cfg = _cfg(t_end=0.0)
    out = run(cfg)
    assert len(out.snapshots) == 1 and out.n_steps == 0
    assert out.snapshots[0].t == 0.0
    assert len(out.records) == 1


def test_run_counts_and_end_time():
    cfg = _cfg(snapshot_every=10, diagnostics_every=5)
    out = run(cfg)
    n = cfg.n_steps
    assert n == math.ceil(cfg.t_end / cfg.time_step - 1e-9)
    assert out.snapshots[-1].t == cfg.t_end
    assert len(out.snapshots) == n // 10 + 1 + (n % 10 != 0)
    assert len(out.records) == n // 5 + 1 + (n % 5 != 0)
    ts = [s.t for s in out.snapshots]
    assert ts == sorted(ts)


@pytest.mark.parametrize("scheme", [YOSIDA, PROJECTION])
def test_run_deterministic_symmetric_bounded(scheme):
    cfg = _cfg(scheme, snapshot_every=20)
    a, b = run(cfg), run(cfg)
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert np.array_equal(sa.field, sb.field)
        f = sa.field
        assert np.array_equal(f, f.T) and np.array_equal(f, np.rot90(f))
        assert sa.sup() <= sa.bound + (1e-12 if scheme == YOSIDA else 0.0)
    assert [r.row() for r in a.records] == [r.row() for r in b.records]


def test_backends_give_same_run():
    from obstacle_mcf import kernels

    if not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    cfg = _cfg(snapshot_every=50)
    a = run(cfg, backend="numpy")
    b = run(cfg, backend="cython")
    np.testing.assert_allclose(a.snapshots[-1].field, b.snapshots[-1].field, rtol=0, atol=1e-12)


def test_energy_decreases():
    for scheme in (YOSIDA, PROJECTION):
        out = run(_cfg(scheme, t_end=0.01, diagnostics_every=20))
        e = [r.total_energy for r in out.records]
        assert all(b <= a for a, b in zip(e, e[1:]))


def test_margin_violation_detected():
    g = Grid.cube(2, 81, 2.0)
    phi = np.ones(g.shape)
    phi[:, :3] = -1.0
    st = PhaseState(phi, g, 0.1, None, 0.0, PROJECTION)
    with pytest.raises(MarginError):
        check_interface_margin(st)


def test_multiplier_nonnegative_on_upper_obstacle():
    cfg = _cfg(PROJECTION, snapshot_every=1000)
    out = run(cfg)
    st = out.snapshots[-1]
    lam = multiplier(st, cfg.time_step)
    assert np.all(lam[st.field >= 1.0] >= 0.0)
    assert np.all(lam[np.abs(st.field) < 1.0 - 1e-3] == 0.0)


def test_simulation_leaves_initial_state_untouched():
    cfg = _cfg()
    st0 = initial_state(cfg)
    before = st0.field.copy()
    sim = Simulation(st0)
    for _ in range(3):
        sim.advance(cfg.time_step)
    assert np.array_equal(st0.field, before)
