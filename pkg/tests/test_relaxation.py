import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinetherm.errors import DomainError
from affinetherm.potentials import (
    constant_potential,
    ideal_gas_entropy,
    ideal_gas_helmholtz,
    ising_free_energy,
    quadratic,
    vdw_helmholtz,
)
from affinetherm.relaxation import (
    IntegratorConfig,
    LiftedState,
    RelaxationGenerator,
    closed_form_single,
    compressibility,
    fixed_points,
    induced_conjugates,
    integrate,
    lifted_field,
    lyapunov_check,
    product_pair_variant,
    sign_table,
)


def _canonical_pair():
    return RelaxationGenerator.two(constant_potential(0.0), constant_potential(3.0))


def test_integrator_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=-1e-3)
    with pytest.raises(ValueError):
        IntegratorConfig(record_every=0)
    with pytest.raises(ValueError):
        IntegratorConfig(conv_tol=-1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(dt=1e-9, t_end=1e3).n_steps  # step budget cap
    assert IntegratorConfig(t_end=-5.0).dt_signed == -1e-3


def test_two_level_frozen_values_at_unit_height():
    gen = _canonical_pair()
    x = np.array([0.0])
    # w = -(z - F_I)(z - F_II)^2 and dw/dz vanishes at (2 F_I + F_II) / 3
    assert gen.w_eval(1.0, x) == -4.0
    wz, wx = gen.w_partials(1.0, x)
    assert wz == 0.0
    assert wx[0] == 0.0


def test_two_level_domain_requires_gap():
    gen = RelaxationGenerator.two(constant_potential(3.0), constant_potential(0.0))
    with pytest.raises(DomainError):
        gen.w_eval(1.0, np.array([0.0]))


def test_single_matches_closed_form_all_models():
    cases = [
        (ideal_gas_helmholtz(), np.array([2.0])),
        (ideal_gas_entropy(), np.array([1.5, 3.0])),
        (vdw_helmholtz(1.0), np.array([1.2])),
        (ising_free_energy(), np.array([-0.7])),
    ]
    cfg = IntegratorConfig(dt=1e-3, t_end=8.0, record_every=500)
    for p, x in cases:
        gen = RelaxationGenerator.single(p)
        y0 = np.full(p.dim, 0.3)
        traj = integrate(gen, LiftedState(x, y0, -0.5), cfg)
        zc = closed_form_single(p, x, -0.5, traj.t)
        np.testing.assert_allclose(traj.z, zc, rtol=0, atol=1e-10)
        g = p.grad(x)
        yc = g[None, :] + np.exp(-traj.t)[:, None] * (y0 - g)[None, :]
        np.testing.assert_allclose(traj.y, yc, rtol=0, atol=1e-10)


def test_trajectory_time_offset_and_metadata():
    gen = RelaxationGenerator.single(ising_free_energy())
    state = LiftedState(np.array([1.0]), np.array([0.0]), 0.0, t=5.0)
    traj = integrate(gen, state, IntegratorConfig(dt=1e-2, t_end=1.0, record_every=10))
    assert traj.t[0] == 5.0
    assert traj.t[-1] == pytest.approx(6.0, abs=1e-12)
    assert traj.kind == "single"
    assert traj.dt == 1e-2
    np.testing.assert_array_equal(traj.x, [1.0])


def test_convergence_reports_terminal_state():
    gen = RelaxationGenerator.single(ising_free_energy())
    traj = integrate(
        gen,
        LiftedState(np.array([1.0]), np.array([0.0]), 0.0),
        IntegratorConfig(dt=1e-3, t_end=50.0, record_every=1000, conv_tol=1e-12),
    )
    assert traj.converged_to is not None
    y_star, z_star = traj.converged_to
    assert y_star[0] == pytest.approx(math.tanh(1.0), abs=1e-10)
    assert z_star == pytest.approx(math.log(math.cosh(1.0)) + math.log(2.0), abs=1e-10)
    state_norm = math.sqrt(float(y_star[0] ** 2 + z_star**2))
    assert traj.convergence_residual <= 1e-12 * (1 + state_norm)


def test_fixed_points_canonical_pair():
    gen = _canonical_pair()
    fps = fixed_points(gen, np.array([0.0]), z_bracket=(-1.0, 4.0))
    assert [fp.z for fp in fps] == [0.0, 3.0]
    lo, hi = fps
    assert lo.stability == "stable"
    assert lo.dw_dz == -9.0
    np.testing.assert_array_equal(lo.y, [0.0])
    # double root: the linearization vanishes, no conjugate fixed point
    assert hi.y is None
    assert hi.dw_dz == 0.0
    assert hi.stability == "non-hyperbolic, semi-stable"


def test_fixed_points_single_kind():
    gen = RelaxationGenerator.single(ising_free_energy())
    x = np.array([1.0])
    fps = fixed_points(gen, x, z_bracket=(0.0, 2.0))
    assert len(fps) == 1
    assert fps[0].z == pytest.approx(math.log(math.cosh(1.0)) + math.log(2.0), abs=1e-12)
    assert fps[0].y[0] == pytest.approx(math.tanh(1.0), abs=1e-12)
    assert fps[0].dw_dz == -1.0
    assert fps[0].stability == "stable"


def test_product_pair_variant_is_hyperbolic_at_both_levels():
    gen = product_pair_variant(constant_potential(0.0), constant_potential(3.0))
    fps = fixed_points(gen, np.array([0.0]), z_bracket=(-1.0, 4.0))
    assert [fp.z for fp in fps] == [0.0, 3.0]
    assert fps[0].dw_dz == pytest.approx(-3.0, abs=1e-12)
    assert fps[0].stability == "stable"
    assert fps[1].dw_dz == pytest.approx(3.0, abs=1e-12)
    assert fps[1].stability == "unstable"


def test_sign_table_single_kind():
    gen = RelaxationGenerator.single(constant_potential(2.0))
    table = sign_table(gen, np.array([0.0]), [1.0, 2.0, 3.0])
    assert table.w_pattern == (1, 0, -1)
    assert table.div_pattern == (-1, -1, -1)
    assert all(r.div_base == -1.0 for r in table.rows)


def test_sign_table_two_level():
    gen = _canonical_pair()
    table = sign_table(gen, np.array([0.0]), [-1.0, 0.0, 0.5, 1.0, 2.0, 3.0, 4.0])
    assert table.w_pattern == (1, 0, -1, -1, -1, 0, -1)
    assert table.div_pattern == (-1, -1, -1, 0, 1, 0, -1)


def test_compressibility_scales_by_dim_plus_one():
    rng = np.random.default_rng(9)
    for n in (1, 2, 3):
        gen = RelaxationGenerator.two(
            constant_potential(0.0, dim=n), constant_potential(3.0, dim=n)
        )
        for _ in range(50):
            z = float(rng.uniform(-1.0, 4.0))
            rep = compressibility(gen, np.zeros(n), z)
            wz, _ = gen.w_partials(z, np.zeros(n))
            assert rep.div_base == wz
            assert rep.div_lifted == (n + 1) * wz  # exact, not approximate
            assert np.sign(rep.div_lifted) == np.sign(rep.div_base)
            assert rep.contracting == (rep.div_lifted < 0)


def test_compressibility_matches_fd_divergence():
    # independent check: trace of the FD Jacobian of the lifted field
    gen = _canonical_pair()
    x = np.array([0.0])
    field = gen.field_at(x)
    for z in (0.4, 1.7, 3.5):
        y = np.array([0.2])
        h = 1e-6
        tr = 0.0
        for i in range(2):
            def shifted(s):
                yy = y.copy()
                zz = z
                if i == 0:
                    yy[0] += s
                else:
                    zz += s
                ky, kz = field(yy, zz)
                return ky[0] if i == 0 else kz
            tr += (shifted(h) - shifted(-h)) / (2 * h)
        rep = compressibility(gen, x, z)
        assert tr == pytest.approx(rep.div_lifted, abs=1e-5)


def test_lifted_field_shapes():
    gen = _canonical_pair()
    state = LiftedState(np.array([0.0]), np.array([0.3]), 1.0)
    dy, dz = lifted_field(gen, state)
    assert dy.shape == (1,)
    assert dz == -4.0
    assert dy[0] == 0.3 * 0.0 + 0.0  # y wz + wx, both zero at z = 1


def test_lyapunov_decreases_on_canonical_runs():
    gen = _canonical_pair()
    cfg = IntegratorConfig(dt=1e-3, t_end=30.0, record_every=20)
    for z0 in (0.5, 1.0, 2.5, 3.5, 4.0):
        traj = integrate(gen, LiftedState(np.array([0.0]), np.array([0.4]), z0), cfg)
        rep = lyapunov_check(gen, traj)
        assert rep.pairs_checked > 0
        assert rep.max_increment <= 1e-10


def test_lyapunov_reads_backward_runs_in_forward_order():
    # a backward run re-read in ascending t is a forward solution, so the
    # audit must stay clean on it rather than flag the reversed recording
    gen = _canonical_pair()
    traj = integrate(
        gen,
        LiftedState(np.array([0.0]), np.array([0.0]), 1.0),
        IntegratorConfig(dt=1e-3, t_end=-5.0, record_every=100),
    )
    rep = lyapunov_check(gen, traj)
    assert rep.pairs_checked > 0
    assert rep.max_increment <= 1e-10


def test_lyapunov_flags_tampered_trajectory():
    from affinetherm.relaxation import Trajectory

    gen = _canonical_pair()
    # z climbing from 1 to 2 below F_II is not a descent of V_I
    fake = Trajectory(
        x=np.array([0.0]),
        t=np.array([0.0, 1.0]),
        y=np.zeros((2, 1)),
        z=np.array([1.0, 2.0]),
        w=np.zeros(2),
        div_base=np.zeros(2),
        steps=1,
        converged_to=None,
        convergence_residual=0.0,
        kind="two",
        dt=1.0,
    )
    rep = lyapunov_check(gen, fake)
    assert rep.pairs_checked == 1
    assert rep.max_increment == pytest.approx(1.5, abs=1e-15)


def test_induced_conjugates_all_models():
    cases = [
        (ideal_gas_helmholtz(), np.array([2.0])),
        (ideal_gas_entropy(), np.array([1.5, 3.0])),
        (vdw_helmholtz(1.0), np.array([1.2])),
        (ising_free_energy(), np.array([1.0])),
    ]
    for p, x in cases:
        gen = RelaxationGenerator.single(p)
        rep = induced_conjugates(gen, x, t=2.0)
        assert rep.residual <= 1e-8
        np.testing.assert_allclose(rep.y_fd, rep.y_ode, rtol=0, atol=1e-8)


def test_induced_conjugates_callable_family():
    gen = _canonical_pair()
    rep = induced_conjugates(
        gen, np.array([0.0]), t=1.5, z0_family=lambda x: 1.0 + 0.2 * x[0]
    )
    assert rep.residual <= 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 2.5), st.floats(-1.0, 1.0))
def test_single_kind_fiber_is_exact_exponential(xval, z0):
    # property: for any base point, z relaxes like a linear first-order lag
    p = ising_free_energy()
    gen = RelaxationGenerator.single(p)
    traj = integrate(
        gen,
        LiftedState(np.array([xval]), np.array([0.0]), z0),
        IntegratorConfig(dt=1e-2, t_end=3.0, record_every=50, conv_tol=0.0),
    )
    zc = closed_form_single(p, np.array([xval]), z0, traj.t)
    np.testing.assert_allclose(traj.z, zc, rtol=0, atol=1e-8)
