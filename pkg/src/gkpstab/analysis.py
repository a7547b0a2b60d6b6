"""Numerical verification of the convergence-proof machinery and the
photon-loss error-suppression experiment.

Everything here is either a closed-form/matrix cross-check (the circulant
coefficient matrix and its spectrum, the Lyapunov-derivative rewrite, the
cosh/cos operator inequality) or a seeded, reproducible experiment
(Lyapunov decay statistics, on/off error rates).
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .codes import (
    GkpParams,
    build_code,
    build_conjugated_quadratures,
    convergence_rate,
    ETA_QUBIT,
)
from .errors import ResourceLimitError, SpectrumMismatchError, ToleranceExceededError
from .fock import (
    hermitian_part,
    interior_block,
    interior_margin,
    make_quadratures,
    matrix_exponential,
    max_abs,
)
from .lindblad import (
    LindbladModel,
    ObservableSpec,
    SolverOptions,
    adjoint_rhs,
    evolve,
    logical_operators,
    stabilizer_model,
)

# ---------------------------------------------------------------------------
# Circulant coefficient matrix of the Lyapunov-derivative rewrite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CirculantT:
    """4x4 Hermitian circulant built from sinh/cosh of 2*eps and eta.

    Entry (k,l) is exp(eta^2 * z_kl) - 1 where z_kl I = [R_l†, R_k] for the
    generator list (R, S, -R, -S).
    """

    epsilon: float
    eta: float
    matrix: np.ndarray


def _scalar_commutator(l, k, s, c):
    """[R_l†, R_k] = z I for R_1..R_4 = (R, S, -R, -S); returns z."""
    sign = (1.0 if l < 2 else -1.0) * (1.0 if k < 2 else -1.0)
    if l % 2 == k % 2:
        base = -s  # [R†,R] = [S†,S] = -sinh(2 eps)
    elif l % 2 == 1:
        base = -1j * c  # [S†,R]
    else:
        base = 1j * c  # [R†,S]
    return sign * base


def build_t_matrix(epsilon, eta=ETA_QUBIT):
    s = math.sinh(2.0 * epsilon)
    c = math.cosh(2.0 * epsilon)
    e2 = eta * eta
    t = np.empty((4, 4), dtype=complex)
    for k in range(4):
        for l in range(4):
            t[k, l] = np.exp(e2 * _scalar_commutator(l, k, s, c)) - 1.0
    return CirculantT(epsilon, eta, t)


def t_matrix_closed_eigenpairs(epsilon, eta=ETA_QUBIT):
    """The four closed-form (eigenvalue, unit eigenvector) pairs of T."""
    s = math.sinh(2.0 * epsilon)
    c = math.cosh(2.0 * epsilon)
    e2 = eta * eta
    lams = [
        2.0 * (math.cosh(e2 * s) - math.cos(e2 * c)),
        2.0 * (math.cosh(e2 * s) + math.cos(e2 * c) - 2.0),
        -2.0 * (math.sinh(e2 * s) - math.sin(e2 * c)),
        -2.0 * (math.sinh(e2 * s) + math.sin(e2 * c)),
    ]
    rows = np.array(
        [
            [1, -1, 1, -1],
            [1, 1, 1, 1],
            [1, -1j, -1, 1j],
            [1, 1j, -1, -1j],
        ],
        dtype=complex,
    ) / 2.0
    # T = sum_k lam_k row_k† row_k, so the column eigenvectors are conj(row_k)
    return [(lams[k], rows[k].conj()) for k in range(4)]


@dataclass(frozen=True)
class TSpectrumReport:
    epsilon: float
    eta: float
    max_eigenvalue_error: float
    max_residual: float
    ordering_ok: bool
    passed: bool


def verify_t_spectrum(t, tol=1e-10, raise_on_fail=False):
    """Check the numeric spectrum of T against the closed forms.

    Eigenvalue lists are compared after sorting; eigenvectors through the
    residual ||T u - lam u||, which is insensitive to phase and to rotations
    inside degenerate clusters. Also checks the sign pattern
    lam_4 <= lam_3 <= 0 <= lam_2 <= lam_1.
    """
    pairs = t_matrix_closed_eigenpairs(t.epsilon, t.eta)
    closed = np.array([lam for lam, _ in pairs])
    numeric = np.linalg.eigvalsh(hermitian_part(t.matrix))
    eig_err = float(np.abs(np.sort(closed) - numeric).max())
    resid = 0.0
    for lam, u in pairs:
        resid = max(resid, float(np.linalg.norm(t.matrix @ u - lam * u)))
    slack = 1e-12  # roundoff allowance for the eps->0 degeneracy
    ordering = bool(
        closed[3] <= closed[2] + slack
        and closed[2] <= slack
        and closed[1] >= -slack
        and closed[1] <= closed[0] + slack
    )
    passed = eig_err <= tol and resid <= tol
    report = TSpectrumReport(t.epsilon, t.eta, eig_err, resid, ordering, passed)
    if raise_on_fail and not passed:
        worst = int(np.argmax([np.linalg.norm(t.matrix @ u - lam * u) for lam, u in pairs]))
        raise SpectrumMismatchError(
            f"T eigenpair {worst + 1} off by {resid:.3e} (eigenvalues off by {eig_err:.3e}) "
            f"at eps={t.epsilon}, tol={tol}"
        )
    return report


# ---------------------------------------------------------------------------
# Operator identities on the interior block
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    name: str
    epsilon: float
    eta: float
    dim: int
    margin: int
    max_deviation: float
    tol: float
    passed: bool
    extra: dict = field(default_factory=dict)


def _interior_max(a, margin):
    return max_abs(interior_block(a, margin))


def verify_lyapunov_derivative_identity(epsilon, eta=ETA_QUBIT, dim=None, tol=1e-5,
                                        margin=None, raise_on_fail=False):
    """Check sum_k D*_k(W) = sum_{k,l} W_k† T_kl W_l on the interior block.

    W_k = exp(-i eta R_k†) V_k chains two displacement-type exponentials, so
    the default margin uses order=2 corner clearance.
    """
    params = GkpParams(epsilon, eta, dim)
    dim = params.dim
    if margin is None:
        margin = interior_margin(dim, eta, order=2)
    code_r, code_s = build_conjugated_quadratures(params)
    eye = np.eye(dim)
    gens = [code_r, code_s, -code_r, -code_s]
    vs = [matrix_exponential(1j * eta * g) - eye for g in gens]
    w = hermitian_part(sum(v.conj().T @ v for v in vs))

    lhs = np.zeros_like(w)
    for v in vs:
        model = LindbladModel(((v, 1.0),))
        lhs += adjoint_rhs(model, w)

    t = build_t_matrix(epsilon, eta).matrix
    wk = [matrix_exponential(-1j * eta * g.conj().T) @ v for g, v in zip(gens, vs)]
    rhs = np.zeros_like(w)
    for k in range(4):
        for l in range(4):
            rhs += t[k, l] * (wk[k].conj().T @ wk[l])

    dev = _interior_max(lhs - rhs, margin)
    passed = dev <= tol
    report = IdentityReport(
        "lyapunov_derivative", epsilon, eta, dim, margin, dev, tol, passed
    )
    if raise_on_fail and not passed:
        raise ToleranceExceededError(
            f"Lyapunov-derivative identity off by {dev:.3e} > {tol} "
            f"(dim={dim}, margin={margin})"
        )
    return report


def _hermitian_function(h, f):
    ew, ev = np.linalg.eigh(h)
    return (ev * f(ew)) @ ev.conj().T


def verify_lambda_identity(epsilon, eta=ETA_QUBIT, dim=None, tol=1e-5, margin=None,
                           raise_on_fail=False):
    """Check the closed form of Lambda±† Lambda± against direct construction.

    Lambda± = e^{-i eta R†} e^{i eta R/2} ± e^{i eta R†} e^{-i eta R/2} and
    the closed form is 2 e^{-eta^2 s/8} (cosh(3 eta sinh(eps) P)
    ± e^{-3 eta^2 s/4} cos(eta cosh(eps) Q)) with s = sinh(2 eps).
    """
    params = GkpParams(epsilon, eta, dim)
    dim = params.dim
    if margin is None:
        margin = interior_margin(dim, eta, order=2)
    r, _ = build_conjugated_quadratures(params)
    q, p = make_quadratures(dim)
    s = math.sinh(2.0 * epsilon)
    e2 = eta * eta

    e_minus = matrix_exponential(-1j * eta * r.conj().T)
    e_plus = matrix_exponential(1j * eta * r.conj().T)
    half_plus = matrix_exponential(0.5j * eta * r)
    half_minus = matrix_exponential(-0.5j * eta * r)
    lam_plus = e_minus @ half_plus + e_plus @ half_minus
    lam_minus = e_minus @ half_plus - e_plus @ half_minus

    cosh_p = _hermitian_function(p, lambda x: np.cosh(3.0 * eta * math.sinh(epsilon) * x))
    cos_q = _hermitian_function(q, lambda x: np.cos(eta * math.cosh(epsilon) * x))
    pref = 2.0 * math.exp(-e2 * s / 8.0)
    closed_plus = pref * (cosh_p + math.exp(-0.75 * e2 * s) * cos_q)
    closed_minus = pref * (cosh_p - math.exp(-0.75 * e2 * s) * cos_q)

    dev_plus = _interior_max(lam_plus.conj().T @ lam_plus - closed_plus, margin)
    dev_minus = _interior_max(lam_minus.conj().T @ lam_minus - closed_minus, margin)
    dev = max(dev_plus, dev_minus)
    passed = dev <= tol
    report = IdentityReport(
        "lambda_closed_form", epsilon, eta, dim, margin, dev, tol, passed,
        extra={"dev_plus": dev_plus, "dev_minus": dev_minus},
    )
    if raise_on_fail and not passed:
        side = "plus" if dev_plus >= dev_minus else "minus"
        raise ToleranceExceededError(
            f"Lambda{side} closed form off by {dev:.3e} > {tol} (dim={dim}, margin={margin})"
        )
    return report


def operator_inequality_min_eigs(epsilon, eta=ETA_QUBIT, dim=None, margin=None):
    """Interior-block minimum eigenvalues of
    e^{-3 eta^2 |s|/4} cosh(3 eta sinh(eps) P) -+ cos(eta cosh(eps) Q).

    Both must be >= 0 up to truncation noise; returns {"plus": ..., "minus": ...}
    where the sign labels ± cos.
    """
    params = GkpParams(epsilon, eta, dim)
    dim = params.dim
    if margin is None:
        margin = interior_margin(dim, eta, order=2)
    q, p = make_quadratures(dim)
    s = math.sinh(2.0 * epsilon)
    e2 = eta * eta
    cosh_p = _hermitian_function(p, lambda x: np.cosh(3.0 * eta * math.sinh(epsilon) * x))
    cos_q = _hermitian_function(q, lambda x: np.cos(eta * math.cosh(epsilon) * x))
    damped = math.exp(-0.75 * e2 * abs(s)) * cosh_p
    out = {}
    for label, sign in (("plus", 1.0), ("minus", -1.0)):
        block = hermitian_part(interior_block(damped - sign * cos_q, margin))
        out[label] = float(np.linalg.eigvalsh(block)[0])
    return out


def commutation_check(code, margin=None):
    """Max interior entry of [V_k, V_l] over all pairs."""
    dim = code.dim
    if margin is None:
        margin = interior_margin(dim, code.params.eta, order=1)
    worst = 0.0
    vs = code.dissipators
    for k in range(4):
        for l in range(k + 1, 4):
            comm = vs[k] @ vs[l] - vs[l] @ vs[k]
            worst = max(worst, _interior_max(comm, margin))
    return worst, margin


def glauber_check(code, margin=None):
    """Max interior entry of e^{i eta R} e^{i eta S} - e^{-eta^2 [R,S]/2} e^{i eta (R+S)}.

    [R,S] = i I, so the prefactor is the scalar e^{-i eta^2 / 2}.
    """
    params = code.params
    if margin is None:
        margin = interior_margin(params.dim, params.eta, order=2)
    eta = params.eta
    lhs = matrix_exponential(1j * eta * code.conj_q) @ matrix_exponential(1j * eta * code.conj_p)
    rhs = np.exp(-0.5j * eta * eta) * matrix_exponential(1j * eta * (code.conj_q + code.conj_p))
    return _interior_max(lhs - rhs, margin), margin


def envelope_conjugation_check(epsilon, dim, margin=2):
    """Max interior entry of E Q E^{-1} - R for E = exp(-(eps/2)(Q^2+P^2)).

    Q^2+P^2 is diagonal on the truncated space, so both exponentials are
    exact; the corner row is the only artifact.
    """
    q, p = make_quadratures(dim)
    herm = 0.5 * epsilon * (q @ q + p @ p)
    envelope = matrix_exponential(-herm)
    inverse = matrix_exponential(herm)
    r = math.cosh(epsilon) * q + 1j * math.sinh(epsilon) * p
    return _interior_max(envelope @ q @ inverse - r, margin), margin


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


def random_density_matrix(dim, rng, support_dim=None):
    """Full-rank random state on the leading block (photon number ~ support/2).

    The default support dim//2 keeps the mean photon number near dim/4,
    safely inside the truncation.
    """
    k = dim // 2 if support_dim is None else int(support_dim)
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:k, :k] = g @ g.conj().T
    rho /= np.real(np.trace(rho))
    return rho


@dataclass(frozen=True)
class DecayTrial:
    seed: int
    initial_lyapunov: float
    fitted_rate: float
    n_fit_points: int
    degenerate: bool


@dataclass(frozen=True)
class DecayReport:
    epsilon: float
    eta: float
    dim: int
    rate_bound: float
    certified: bool
    trials: tuple
    min_rate: float
    median_rate: float
    passed: bool
    runtime_s: float


def fit_decay_rate(times, values, window=(0.1, 1.0), floor_ratio=1e-11):
    """Log-linear least-squares slope of `values` over the window (fractions
    of the final time). Points below floor_ratio * values[0] are dropped
    (double-precision floor of the weighted trace). Returns (rate, n_points);
    rate is positive for decay.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    t_final = times[-1]
    lo, hi = window[0] * t_final, window[1] * t_final
    keep = (times >= lo - 1e-12) & (times <= hi + 1e-12)
    keep &= values > max(values[0] * floor_ratio, 0.0)
    if keep.sum() < 5:
        return float("nan"), int(keep.sum())
    t = times[keep]
    logv = np.log(values[keep])
    design = np.vstack([t, np.ones_like(t)]).T
    slope, _ = np.linalg.lstsq(design, logv, rcond=None)[0]
    return float(-slope), int(keep.sum())


def lyapunov_decay_experiment(epsilon, eta=ETA_QUBIT, dim=None, n_trials=10, seed=0,
                              horizon_multiplier=5.0, n_records=61,
                              solver=None, code=None, initial_states=None):
    """Random-state decay statistics for Tr(W rho(t)) against the rate bound.

    Each trial draws a random density matrix (skipped as degenerate when its
    Lyapunov value is below 1e-8, e.g. codespace states), evolves it to
    horizon_multiplier / kappa, and fits the log-slope over the [0.1, 1]
    fraction of the horizon. PASS means every fitted rate >= 0.95 * kappa;
    faster decay is expected (the bound is not tight) and recorded.
    initial_states replaces the random draw when given (n_trials then follows
    its length).
    """
    t0 = time.time()
    params = GkpParams(epsilon, eta, dim)
    rate = convergence_rate(epsilon, eta)
    if rate.value <= 0:
        raise ValueError("rate bound not positive; pick a certified parameter set")
    code = code or build_code(params)
    model = stabilizer_model(code)
    horizon = horizon_multiplier / rate.value
    record = np.linspace(0.0, horizon, n_records)
    solver = solver or SolverOptions()
    spec = ObservableSpec(lyapunov=code.lyapunov, photon_number=False, positivity_tol=None)

    if initial_states is not None:
        n_trials = len(initial_states)
    trials = []
    for i in range(n_trials):
        trial_seed = seed + i
        if initial_states is not None:
            rho0 = np.asarray(initial_states[i], dtype=complex)
        else:
            rho0 = random_density_matrix(params.dim, np.random.default_rng(trial_seed))
        w0 = float(np.real(np.vdot(code.lyapunov, rho0)))
        if w0 <= 1e-8:
            trials.append(DecayTrial(trial_seed, w0, float("nan"), 0, True))
            continue
        if initial_states is None and w0 <= 1e-4:
            # keep random trials well above the measurement floor
            rho0 = random_density_matrix(params.dim, np.random.default_rng(trial_seed + 10_000))
            w0 = float(np.real(np.vdot(code.lyapunov, rho0)))
        traj = evolve(model, rho0, horizon, record_times=record,
                      options=solver, observables=spec)
        fitted, n_pts = fit_decay_rate(traj.times, traj.column("lyapunov"))
        trials.append(DecayTrial(trial_seed, w0, fitted, n_pts, False))

    rates = [t.fitted_rate for t in trials if not t.degenerate and np.isfinite(t.fitted_rate)]
    min_rate = float(min(rates)) if rates else float("nan")
    median_rate = float(np.median(rates)) if rates else float("nan")
    passed = bool(rates) and min_rate >= 0.95 * rate.value
    return DecayReport(
        epsilon, eta, params.dim, rate.value, rate.certified, tuple(trials),
        min_rate, median_rate, passed, time.time() - t0,
    )


@dataclass(frozen=True)
class ErrorRateReport:
    """Single-point on/off error rates and the suppression they imply.

    on/off follow kappa1 * (1 - Tr(J_z rho(1/kappa1))); fitted_* are
    log-linear rates of the Tr(J_z rho(t)) records over the full grid.
    traj_on/traj_off hold the full Trajectory objects for CSV export.
    """

    epsilon: float
    dim: int
    kappa1: float
    on_rate: float
    off_rate: float
    suppression_ratio: float
    fitted_on_rate: float
    fitted_off_rate: float
    times: np.ndarray
    jz_on: np.ndarray
    jz_off: np.ndarray
    logical_residual: float
    runtime_s: float
    traj_on: object = None
    traj_off: object = None

    def scalar_payload(self):
        return {
            "epsilon": self.epsilon,
            "dim": self.dim,
            "kappa1": self.kappa1,
            "on_rate": self.on_rate,
            "off_rate": self.off_rate,
            "suppression_ratio": self.suppression_ratio,
            "fitted_on_rate": self.fitted_on_rate,
            "fitted_off_rate": self.fitted_off_rate,
            "logical_residual": self.logical_residual,
        }


def error_rate_experiment(epsilon, dim=None, kappa1=None, n_records=51, seed=0,
                          solver=None, max_dim=700, code=None, logicals=None):
    """The on/off photon-loss experiment.

    Both runs start from the |0> codeword projector and integrate to
    t_f = 1/kappa1: "on" under the four stabilizing dissipators plus the
    loss channel (a, kappa1), "off" under the loss channel alone. The
    logical observables are computed once from the noiseless model and both
    trajectories are scored against them. kappa1=0 runs the stabilized model
    alone over five decay times (steady-state control).
    """
    t0 = time.time()
    params = GkpParams(epsilon, ETA_QUBIT, dim)
    if params.dim > max_dim:
        raise ResourceLimitError(
            f"dim {params.dim} exceeds the configured maximum {max_dim}; reduce the "
            "epsilon scope or raise max_dim"
        )
    kappa1 = epsilon / 5.0 if kappa1 is None else float(kappa1)
    code = code or build_code(params)
    base = stabilizer_model(code)
    logicals = logicals or logical_operators(base, code)

    rho0 = np.outer(code.codewords[0], code.codewords[0].conj())
    if kappa1 > 0:
        t_final = 1.0 / kappa1
        on_model = base.with_photon_loss(kappa1)
        off_model = LindbladModel((on_model.channels[-1],))
    else:
        t_final = 5.0 / convergence_rate(epsilon).value
        on_model = base
        off_model = None
    record = np.linspace(0.0, t_final, n_records)
    solver = solver or SolverOptions()
    spec = ObservableSpec(lyapunov=code.lyapunov, logicals=logicals, photon_number=True)

    traj_on = evolve(on_model, rho0, t_final, record_times=record,
                     options=solver, observables=spec)
    jz_on = traj_on.column("jz")
    traj_off = None
    if off_model is not None:
        traj_off = evolve(off_model, rho0, t_final, record_times=record,
                          options=solver, observables=spec)
        jz_off = traj_off.column("jz")
    else:
        jz_off = np.ones_like(jz_on)

    on_rate = kappa1 * (1.0 - float(jz_on[-1]))
    off_rate = kappa1 * (1.0 - float(jz_off[-1]))
    ratio = off_rate / on_rate if on_rate > 0 else float("nan")
    fit_on, _ = fit_decay_rate(record, np.clip(jz_on, 1e-300, None), window=(0.0, 1.0))
    fit_off, _ = fit_decay_rate(record, np.clip(jz_off, 1e-300, None), window=(0.0, 1.0))
    return ErrorRateReport(
        epsilon, params.dim, kappa1, on_rate, off_rate, ratio, fit_on, fit_off,
        record, jz_on, jz_off, logicals.convergence_residual, time.time() - t0,
        traj_on, traj_off,
    )


def truncation_convergence_check(epsilon, eta=ETA_QUBIT, dim=None, factor=1.5):
    """Compare codewords and kernel eigenvalues at dim and factor*dim.

    Returns max |coefficient difference| over the shared range and the shift
    of the lowest non-kernel eigenvalue of W; both should be tiny when the
    20/eps rule is adequate.
    """
    from .codes import build_codewords, build_lyapunov, build_dissipators

    params = GkpParams(epsilon, eta, dim)
    big = GkpParams(epsilon, eta, int(math.ceil(factor * params.dim)))
    small_words = build_codewords(params)
    big_words = build_codewords(big)
    coeff_dev = max(
        float(np.abs(bw[: params.dim] - sw).max()) for sw, bw in zip(small_words, big_words)
    )
    gap_small = np.linalg.eigvalsh(build_lyapunov(build_dissipators(params)))
    gap_big = np.linalg.eigvalsh(build_lyapunov(build_dissipators(big)))
    n_kernel = params.codespace_dim
    gap_shift = abs(float(gap_small[n_kernel]) - float(gap_big[n_kernel]))
    return {"coefficient_deviation": coeff_dev, "gap_shift": gap_shift,
            "dim": params.dim, "dim_big": big.dim}


# ---------------------------------------------------------------------------
# Bundled verification suite (drives the check subcommand)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tol: float
    passed: bool


def run_identity_suite(epsilon=0.05, eta=ETA_QUBIT, dim=None):
    """All closed-form/identity verifications at one parameter set."""
    params = GkpParams(epsilon, eta, dim)
    code = build_code(params)
    results = []

    t_report = verify_t_spectrum(build_t_matrix(epsilon, eta), tol=1e-10)
    results.append(CheckResult(
        "t_spectrum_closed_forms",
        max(t_report.max_eigenvalue_error, t_report.max_residual), 1e-10, t_report.passed,
    ))

    lyap = verify_lyapunov_derivative_identity(epsilon, eta, params.dim, tol=1e-5)
    results.append(CheckResult("lyapunov_derivative_identity", lyap.max_deviation,
                               lyap.tol, lyap.passed))

    lam = verify_lambda_identity(epsilon, eta, params.dim, tol=1e-5)
    results.append(CheckResult("lambda_closed_form", lam.max_deviation, lam.tol, lam.passed))

    min_eigs = operator_inequality_min_eigs(epsilon, eta, params.dim)
    worst = min(min_eigs.values())
    results.append(CheckResult("operator_inequality_psd", worst, -1e-6, worst >= -1e-6))

    comm, _ = commutation_check(code)
    results.append(CheckResult("dissipator_commutation", comm, 1e-6, comm <= 1e-6))

    glauber, _ = glauber_check(code)
    results.append(CheckResult("exponential_product_rule", glauber, 1e-6, glauber <= 1e-6))

    envelope, _ = envelope_conjugation_check(epsilon, params.dim)
    results.append(CheckResult("envelope_conjugation", envelope, 1e-6, envelope <= 1e-6))

    return results
