import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkpstab import (
    ConvergenceWarning,
    GkpParams,
    InvalidInputError,
    LindbladModel,
    ObservableSpec,
    PositivityWarning,
    ShapeMismatchError,
    SolverOptions,
    StepSizeUnderflowError,
    adjoint_rhs,
    bloch_coordinates,
    build_code,
    evolve,
    kernel_codewords,
    lindblad_rhs,
    logical_operators,
    make_ladder,
    stabilizer_model,
    validate_density_matrix,
)
from gkpstab.analysis import random_density_matrix


def loss_model(dim, rate=1.0):
    return LindbladModel(((make_ladder(dim), rate),))


# --- right-hand sides --------------------------------------------------------


def test_single_photon_loss_on_fock_one():
    model = loss_model(4)
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 1] = 1.0
    expected = np.zeros((4, 4), dtype=complex)
    expected[0, 0] = 1.0
    expected[1, 1] = -1.0
    assert np.abs(lindblad_rhs(model, rho) - expected).max() <= 1e-12


def test_rhs_traceless_random_hermitian(rng):
    dim = 50
    model = loss_model(dim, 0.7).with_channel(make_ladder(dim).conj().T, 0.3)
    h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = h + h.conj().T
    assert abs(np.trace(lindblad_rhs(model, h))) <= 1e-12 * np.abs(h).max() * dim


def test_adjoint_unital():
    model = loss_model(30, 2.0)
    out = adjoint_rhs(model, np.eye(30, dtype=complex))
    assert np.abs(out).max() <= 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 40))
@settings(max_examples=15, deadline=None)
def test_generator_duality(seed, dim):
    rng = np.random.default_rng(seed)
    ops = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
           for _ in range(2)]
    model = LindbladModel(((ops[0], 0.8), (ops[1], 1.3)))
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = random_density_matrix(dim, rng, support_dim=dim)
    lhs = np.trace(x @ lindblad_rhs(model, rho))
    rhs = np.trace(adjoint_rhs(model, x) @ rho)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_rhs_shape_guard():
    with pytest.raises(ShapeMismatchError):
        lindblad_rhs(loss_model(4), np.eye(5))
    with pytest.raises(ShapeMismatchError):
        adjoint_rhs(loss_model(4), np.eye(3))


def test_model_validation():
    with pytest.raises(ValueError):
        LindbladModel(((make_ladder(4), -1.0),))
    with pytest.raises(ShapeMismatchError):
        LindbladModel(((make_ladder(4), 1.0), (make_ladder(5), 1.0)))
    with pytest.raises(ValueError):
        LindbladModel(())


def test_steady_state_of_kernel_projector(small_code, small_model):
    kernel = kernel_codewords(small_code.lyapunov, 2)
    rho = sum(np.outer(v, v.conj()) for v in kernel) / 2.0
    assert np.abs(lindblad_rhs(small_model, rho)).max() <= 1e-6


# --- density-matrix validation -------------------------------------------------


def test_validate_density_matrix_passes(rng):
    validate_density_matrix(random_density_matrix(20, rng))


def test_validate_density_matrix_rejections(rng):
    rho = random_density_matrix(8, rng)
    with pytest.raises(InvalidInputError):
        validate_density_matrix(2.0 * rho)
    bad = rho.copy()
    bad[0, 1] += 1e-3
    with pytest.raises(InvalidInputError):
        validate_density_matrix(bad)
    neg = np.diag([1.5, -0.5]).astype(complex)
    with pytest.raises(InvalidInputError):
        validate_density_matrix(neg)


# --- evolve: backends agree, conserve, record ----------------------------------


@pytest.fixture(scope="module")
def small_stiff_case():
    code = build_code(GkpParams(0.1, dim=40))
    model = stabilizer_model(code)
    rho0 = random_density_matrix(40, np.random.default_rng(5))
    return code, model, rho0


def test_backends_agree(small_stiff_case):
    code, model, rho0 = small_stiff_case
    t_final = 1.5
    kw = dict(
        record_times=[0.0, 0.7, t_final],
        observables=ObservableSpec(lyapunov=code.lyapunov,
                                   snapshot_times=(t_final,), positivity_tol=None),
    )
    rk = evolve(model, rho0, t_final, options=SolverOptions(method="rk45"), **kw)
    etd = evolve(model, rho0, t_final, options=SolverOptions(method="etd4"), **kw)
    assert rk.meta["method"] == "rk45"
    assert etd.meta["method"] == "etd4"
    assert np.abs(rk.snapshots[t_final] - etd.snapshots[t_final]).max() <= 5e-7
    np.testing.assert_allclose(rk.column("lyapunov"), etd.column("lyapunov"),
                               rtol=1e-5, atol=1e-8)


def test_trace_preserved_both_backends(small_stiff_case):
    code, model, rho0 = small_stiff_case
    for method in ("rk45", "etd4"):
        traj = evolve(model, rho0, 2.0, record_times=np.linspace(0, 2, 9),
                      options=SolverOptions(method=method),
                      observables=ObservableSpec(positivity_tol=None))
        assert np.abs(traj.column("trace") - 1.0).max() <= 1e-8
        if method == "etd4":
            assert traj.meta["trace_defect"] <= 1e-6


def test_hermitian_at_record_points(small_stiff_case):
    code, model, rho0 = small_stiff_case
    traj = evolve(model, rho0, 0.5, record_times=[0.25, 0.5],
                  observables=ObservableSpec(snapshot_times=(0.25, 0.5),
                                             positivity_tol=None))
    for rho in traj.snapshots.values():
        assert np.abs(rho - rho.conj().T).max() == 0.0


def test_auto_method_selection(small_stiff_case):
    code, model, rho0 = small_stiff_case
    short = evolve(model, rho0, 0.05, record_times=[0.05])
    assert short.meta["method"] == "rk45"
    # production-size stabilizer dynamics must switch to the exponential path
    big = build_code(GkpParams(0.2))
    rho = np.outer(big.codewords[0], big.codewords[0].conj())
    traj = evolve(stabilizer_model(big), rho, 0.5, record_times=[0.5],
                  observables=ObservableSpec(positivity_tol=None))
    assert traj.meta["method"] == "etd4"


def test_stabilized_codeword_stays_steady(small_code, small_model):
    rho0 = np.outer(small_code.codewords[0], small_code.codewords[0].conj())
    traj = evolve(small_model, rho0, 2.0, record_times=np.linspace(0, 2, 11),
                  observables=ObservableSpec(lyapunov=small_code.lyapunov))
    assert traj.column("lyapunov").max() <= 1e-5
    assert np.abs(traj.column("trace") - 1.0).max() <= 1e-8


def test_record_grid_and_columns(small_stiff_case):
    code, model, rho0 = small_stiff_case
    grid = np.linspace(0.0, 0.4, 5)
    traj = evolve(model, rho0, 0.4, record_times=grid,
                  observables=ObservableSpec(lyapunov=code.lyapunov,
                                             positivity_tol=None))
    np.testing.assert_allclose(traj.times, grid, atol=1e-12)
    for col in ("trace", "lyapunov", "nbar"):
        assert len(traj.column(col)) == len(grid)
    assert traj.column("nbar")[0] == pytest.approx(
        float(np.real(np.sum(np.arange(40) * np.diag(rho0)))), abs=1e-9)


def test_positivity_warning():
    model = loss_model(2, 1.0)
    rho0 = np.diag([1.0 + 2e-6, -2e-6]).astype(complex)
    with pytest.warns(PositivityWarning):
        evolve(model, rho0, 0.1, record_times=[0.0, 0.1])


def test_step_budget_guard(small_stiff_case):
    code, model, rho0 = small_stiff_case
    with pytest.raises(StepSizeUnderflowError):
        evolve(model, rho0, 5.0, options=SolverOptions(method="rk45", max_steps=5))


def test_invalid_inputs(small_stiff_case):
    code, model, rho0 = small_stiff_case
    with pytest.raises(ValueError):
        evolve(model, rho0, -1.0)
    bad = rho0.copy()
    bad[0, 0] = np.nan
    with pytest.raises(InvalidInputError):
        evolve(model, bad, 1.0)


# --- logical operators and Bloch coordinates ------------------------------------


@pytest.fixture(scope="module")
def small_logicals():
    code = build_code(GkpParams(0.14))
    model = stabilizer_model(code)
    # eps=0.14 at dim=143 is stiffer than the production point (||W||~5e6),
    # so the Frobenius residual floors near ||W||*eps_mach ~ 6e-5; the state
    # itself is converged to ~1e-10 (fixed points at different h agree)
    return code, model, logical_operators(model, code, horizon_multiplier=40.0, tol=1e-4)


def test_logical_spectra_bounded(small_logicals):
    code, model, logicals = small_logicals
    assert logicals.convergence_residual <= 1e-4
    for ew in logicals.spectra().values():
        assert ew[0] >= -1.0 - 1e-6
        assert ew[-1] <= 1.0 + 1e-6


def test_logicals_reduce_to_logical_basis_on_codespace(small_logicals):
    code, model, logicals = small_logicals
    c0, c1 = code.codewords
    plus = (c0 + c1) / np.sqrt(2.0)
    for rho in (np.outer(c0, c0.conj()), np.outer(plus, plus.conj())):
        x, y, z = bloch_coordinates(logicals, rho)
        sx = float(np.real(np.trace(code.sx @ rho)))
        sz = float(np.real(np.trace(code.sz @ rho)))
        assert abs(x - sx) <= 1e-6
        assert abs(z - sz) <= 1e-6


def test_bloch_of_reference_states(small_logicals):
    code, model, logicals = small_logicals
    c0, c1 = code.codewords
    x, y, z = bloch_coordinates(logicals, np.outer(c0, c0.conj()))
    assert z == pytest.approx(1.0, abs=1e-6)
    assert abs(x) <= 1e-6 and abs(y) <= 1e-6
    mixed = (np.outer(c0, c0.conj()) + np.outer(c1, c1.conj())) / 2.0
    assert np.allclose(bloch_coordinates(logicals, mixed), 0.0, atol=1e-6)
    plus = (c0 + c1) / np.sqrt(2.0)
    x, _, _ = bloch_coordinates(logicals, np.outer(plus, plus.conj()))
    assert x == pytest.approx(1.0, abs=1e-6)


def test_bloch_errors(small_logicals):
    code, model, logicals = small_logicals
    with pytest.raises(ShapeMismatchError):
        bloch_coordinates(logicals, np.eye(3))
    skew = 1j * np.eye(code.dim, dtype=complex) / code.dim
    with pytest.raises(InvalidInputError):
        bloch_coordinates(logicals, skew)


def test_logical_nonconvergence_warns(small_logicals):
    code, model, _ = small_logicals
    with pytest.warns(ConvergenceWarning):
        out = logical_operators(model, code, horizon_multiplier=0.5, tol=1e-14)
    assert out.convergence_residual > 1e-14  # reported, operators still returned


def test_lyapunov_envelope_bound(small_code, small_model):
    # pointwise certificate: Tr(W rho(t)) <= Tr(W rho(0)) e^{-kappa t} (1+1e-3)
    from gkpstab import kappa

    rho0 = random_density_matrix(small_code.dim, np.random.default_rng(17))
    bound = kappa(small_code.params.epsilon)
    horizon = 5.0 / bound
    grid = np.linspace(0.0, horizon, 31)
    traj = evolve(small_model, rho0, horizon, record_times=grid,
                  observables=ObservableSpec(lyapunov=small_code.lyapunov,
                                             positivity_tol=None))
    w = traj.column("lyapunov")
    envelope = w[0] * np.exp(-bound * traj.times) * (1.0 + 1e-3)
    assert np.all(w <= envelope)


def test_alternative_noise_channels_run(small_code, small_model):
    # position/momentum/creation channels are plain extra channels; no new machinery
    from gkpstab import make_quadratures

    q, p = make_quadratures(small_code.dim)
    a_dag = np.conj(np.diag(np.sqrt(np.arange(1.0, small_code.dim)), 1)).T
    rho0 = np.outer(small_code.codewords[0], small_code.codewords[0].conj())
    for op in (q, p, a_dag):
        model = small_model.with_channel(op, 0.01)
        traj = evolve(model, rho0, 0.5, record_times=[0.5],
                      observables=ObservableSpec(positivity_tol=None))
        assert abs(traj.column("trace")[-1] - 1.0) <= 1e-8


@pytest.mark.longrun
def test_decay_slope_twenty_states_production():
    # the 20-trial version of the slope property at the production point
    from gkpstab.analysis import lyapunov_decay_experiment

    report = lyapunov_decay_experiment(0.1, dim=200, n_trials=20, seed=7)
    assert report.passed
    assert report.min_rate >= 0.95 * report.rate_bound


def test_tolerance_halving_stability(small_logicals):
    # halving the solver tolerance moves final Bloch coordinates by <= 1e-6
    code, model, logicals = small_logicals
    c0, c1 = code.codewords
    plus = (c0 + c1) / np.sqrt(2.0)
    rho0 = np.outer(plus, plus.conj())
    noisy = model.with_photon_loss(0.04)
    vals = []
    for rtol in (1e-8, 5e-9):
        traj = evolve(noisy, rho0, 5.0, record_times=[5.0],
                      options=SolverOptions(rtol=rtol, atol=rtol * 1e-2),
                      observables=ObservableSpec(logicals=logicals,
                                                 positivity_tol=None))
        vals.append([traj.column(c)[-1] for c in ("jx", "jy", "jz")])
    assert np.abs(np.array(vals[0]) - np.array(vals[1])).max() <= 1e-6
