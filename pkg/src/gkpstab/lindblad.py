"""Lindblad master equation: right-hand sides, time integration, stationary
logical observables, and Bloch coordinates.

The Hamiltonian is identically zero throughout; dynamics is a sum of
dissipation channels (operator, rate). Two integration backends sit behind
evolve(): the contracted adaptive explicit 5(4) pair, and an exponential
integrator that treats the stiff drift exactly (see etd.py). The stabilizer
channels make the truncated generator stiff (spectral radius ~ ||W||, which
grows exponentially with eps*dim), so production-size runs auto-select the
exponential backend.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ode
from .codes import convergence_rate
from .errors import (
    ConvergenceWarning,
    InvalidInputError,
    PositivityWarning,
    ShapeMismatchError,
)
from .etd import SplitPropagator
from .fock import hermitian_part, make_ladder

__all__ = [
    "LindbladModel",
    "SolverOptions",
    "ObservableSpec",
    "Trajectory",
    "LogicalOperators",
    "stabilizer_model",
    "lindblad_rhs",
    "adjoint_rhs",
    "validate_density_matrix",
    "evolve",
    "logical_operators",
    "bloch_coordinates",
]


@dataclass(frozen=True)
class LindbladModel:
    """Channels (operator, rate) defining d/dt rho = sum_k r_k D_{A_k}(rho)."""

    channels: tuple

    def __post_init__(self):
        if not self.channels:
            raise ValueError("a LindbladModel needs at least one channel")
        dims = set()
        for op, rate in self.channels:
            op = np.asarray(op)
            if op.ndim != 2 or op.shape[0] != op.shape[1]:
                raise ShapeMismatchError(f"channel operator must be square, got {op.shape}")
            if rate < 0:
                raise ValueError(f"channel rates must be non-negative, got {rate}")
            dims.add(op.shape[0])
        if len(dims) != 1:
            raise ShapeMismatchError(f"channel operators disagree on dimension: {dims}")

    @property
    def dim(self):
        return self.channels[0][0].shape[0]

    @property
    def operators(self):
        return [np.asarray(op, dtype=complex) for op, _ in self.channels]

    @property
    def rates(self):
        return [float(r) for _, r in self.channels]

    def with_channel(self, op, rate):
        """New model with one channel appended."""
        return LindbladModel(self.channels + ((np.asarray(op, dtype=complex), float(rate)),))

    def with_photon_loss(self, rate):
        """Append the annihilation channel (a, rate)."""
        return self.with_channel(make_ladder(self.dim), rate)


def stabilizer_model(code):
    """The engineered dynamics: all four dissipators at unit rate."""
    return LindbladModel(tuple((v, 1.0) for v in code.dissipators))


def _check_same_dim(model, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise ShapeMismatchError(
            f"state shape {rho.shape} does not match model dimension {model.dim}"
        )
    return rho


def lindblad_rhs(model, rho):
    """sum_k r_k (A rho A† - (A†A rho + rho A†A)/2). Traceless by construction."""
    rho = _check_same_dim(model, rho)
    out = np.zeros_like(rho)
    for op, rate in model.channels:
        if rate == 0.0:
            continue
        a_rho = op @ rho
        gram = op.conj().T @ op
        out += rate * (a_rho @ op.conj().T - 0.5 * (gram @ rho + rho @ gram))
    return out


def adjoint_rhs(model, x):
    """sum_k r_k (A†XA - (A†A X + X A†A)/2). Maps the identity to zero."""
    x = _check_same_dim(model, x)
    out = np.zeros_like(x)
    for op, rate in model.channels:
        if rate == 0.0:
            continue
        gram = op.conj().T @ op
        out += rate * (op.conj().T @ x @ op - 0.5 * (gram @ x + x @ gram))
    return out


def validate_density_matrix(rho, trace_tol=1e-8, herm_tol=1e-10, psd_tol=1e-8):
    """Raise InvalidInputError unless rho is a density matrix within tolerances."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInputError(f"density matrix must be square, got shape {rho.shape}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise InvalidInputError(f"trace {tr} deviates from 1 beyond {trace_tol}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise InvalidInputError(f"Hermiticity defect {herm:.3e} beyond {herm_tol}")
    min_eig = float(np.linalg.eigvalsh(hermitian_part(rho))[0])
    if min_eig < -psd_tol:
        raise InvalidInputError(f"negative eigenvalue {min_eig:.3e} beyond -{psd_tol}")
    return rho


@dataclass(frozen=True)
class SolverOptions:
    """Integration controls.

    method: "auto" picks rk45 unless the explicit-stability step estimate
    would need more than max_explicit_steps; "rk45" and "etd4" force a
    backend. Tolerances apply to the max-norm local error of the state.
    """

    method: str = "auto"
    rtol: float = 1e-8
    atol: float = 1e-10
    max_steps: int = 10_000_000
    max_explicit_steps: int = 50_000
    renorm_trace: bool = True

    def __post_init__(self):
        if self.method not in ("auto", "rk45", "etd4"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class ObservableSpec:
    """What evolve() records at each output time.

    lyapunov: operator whose expectation is logged as "lyapunov" (usually W).
    logicals: LogicalOperators for Bloch coordinate columns jx/jy/jz.
    snapshot_times: times at which full density matrices are kept.
    positivity_tol: minimum-eigenvalue monitor threshold (warning only);
    None disables the eigenvalue check.
    """

    lyapunov: np.ndarray = None
    logicals: "LogicalOperators" = None
    snapshot_times: tuple = ()
    photon_number: bool = True
    positivity_tol: float = 1e-6


@dataclass
class Trajectory:
    """Time grid, recorded observables, optional snapshots, solver metadata.

    records maps column name -> array aligned with times. Columns always
    include "trace"; "lyapunov", "nbar", "jx", "jy", "jz" appear per spec.
    """

    times: np.ndarray
    records: dict
    snapshots: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def column(self, name):
        return np.asarray(self.records[name])


def _spectral_norm_estimate(g, iters=30, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.shape[0]) + 1j * rng.standard_normal(g.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = g @ v
        lam = np.linalg.norm(w)
        if lam == 0.0:
            return 0.0
        v = w / lam
    return float(lam)


def _pick_method(model, t_final, options):
    if options.method != "auto":
        return options.method
    g = sum(r * (op.conj().T @ op) for op, r in model.channels) / 2.0
    gmax = _spectral_norm_estimate(hermitian_part(g))
    # explicit 5(4) stability reach is ~3.3/|lambda|, spectrum reaches ~ -2*gmax
    explicit_steps = 2.0 * gmax * t_final / 3.3
    return "rk45" if explicit_steps <= options.max_explicit_steps else "etd4"


def evolve(model, rho0, t_final, record_times=None, options=None, observables=None):
    """Integrate the master equation and record observables.

    record_times defaults to 200 evenly spaced points. The Hermitian part is
    enforced after every accepted step on both backends. Emits
    PositivityWarning if the state acquires an eigenvalue below
    -positivity_tol at a record point.
    """
    options = options or SolverOptions()
    observables = observables or ObservableSpec()
    rho0 = _check_same_dim(model, rho0)
    if not np.isfinite(rho0).all():
        raise InvalidInputError("initial state has non-finite entries")
    if t_final <= 0:
        raise ValueError("t_final must be positive")
    if record_times is None:
        record_times = np.linspace(0.0, t_final, 201)
    record_times = np.asarray(sorted(set(float(t) for t in record_times)))

    snapshot_times = set(float(t) for t in observables.snapshot_times)
    all_stops = sorted(set(record_times.tolist()) | snapshot_times)

    times, recs, snaps = [], {"trace": []}, {}
    if observables.lyapunov is not None:
        recs["lyapunov"] = []
    if observables.photon_number:
        recs["nbar"] = []
        n_op_diag = np.arange(model.dim)
    if observables.logicals is not None:
        recs.update({"jx": [], "jy": [], "jz": []})
    warned = [False]

    def on_record(t, rho):
        in_grid = bool(np.any(np.isclose(record_times, t)))
        if t in snapshot_times or any(np.isclose(t, s) for s in snapshot_times):
            snaps[t] = rho.copy()
        if not in_grid:
            return
        times.append(t)
        recs["trace"].append(float(np.real(np.trace(rho))))
        if "lyapunov" in recs:
            recs["lyapunov"].append(float(np.real(np.vdot(observables.lyapunov, rho))))
        if "nbar" in recs:
            recs["nbar"].append(float(np.real(np.sum(n_op_diag * np.diag(rho)))))
        if "jx" in recs:
            j = observables.logicals
            recs["jx"].append(float(np.real(np.trace(j.jx @ rho))))
            recs["jy"].append(float(np.real(np.trace(j.jy @ rho))))
            recs["jz"].append(float(np.real(np.trace(j.jz @ rho))))
        if observables.positivity_tol is not None and not warned[0]:
            min_eig = float(np.linalg.eigvalsh(hermitian_part(rho))[0])
            if min_eig < -observables.positivity_tol:
                warned[0] = True
                warnings.warn(
                    f"state eigenvalue {min_eig:.3e} below -{observables.positivity_tol} "
                    f"at t={t:.6g}",
                    PositivityWarning,
                )

    method = _pick_method(model, t_final, options)
    if method == "rk45":
        def rhs(_t, y):
            return lindblad_rhs(model, y)

        max_rate_norm = max(
            r * np.linalg.norm(op, 2) ** 2 for op, r in model.channels
        )
        stats = ode.integrate(
            rhs,
            rho0,
            t_final,
            rtol=options.rtol,
            atol=options.atol,
            record_times=all_stops,
            post_step=hermitian_part,
            on_record=on_record,
            max_steps=options.max_steps,
            diagnostics=f"dominant channel norm^2*rate = {max_rate_norm:.3e}",
        )
    else:
        prop = SplitPropagator(model.operators, model.rates, adjoint=False)
        _, stats = prop.run(
            rho0,
            t_final,
            rtol=options.rtol,
            atol=options.atol,
            record_times=all_stops,
            on_record=on_record,
            hermitize=True,
            renorm_trace=options.renorm_trace,
            max_steps=options.max_steps,
        )
    stats["method"] = method
    return Trajectory(
        times=np.asarray(times),
        records={k: np.asarray(v) for k, v in recs.items()},
        snapshots=snaps,
        meta=stats,
    )


@dataclass(frozen=True)
class LogicalOperators:
    """Stationary logical observables and the residual left at stop time.

    convergence_residual is the max over x,y,z of ||L*(J)||_F / ||J||_F.
    """

    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    convergence_residual: float

    def spectra(self):
        return {name: np.linalg.eigvalsh(getattr(self, name)) for name in ("jx", "jy", "jz")}


def logical_operators(model, code, horizon_multiplier=20.0, tol=1e-7):
    """Evolve S_x, S_y, S_z under the adjoint flow until stationary.

    Stops when ||adjoint_rhs(X)||_F <= tol * ||X||_F, falling back to the
    horizon horizon_multiplier / kappa(eps, eta). The macro step is fixed at
    ~1/kappa: exact stationary points are fixed points of the exponential
    step at any size, so the limit is step-independent and error control on
    the (irrelevant) stiff transient would only slow the march down. A
    ConvergenceWarning reports a residual still above tol at the horizon;
    the operators are returned regardless. Note the Frobenius residual has a
    roundoff floor of roughly ||W|| * 1e-13 (corner entries of X at machine
    noise are amplified by the stiff drift); at the 20/eps truncation the
    floor sits well below the default tol, but harsher truncations may need
    a looser tol even though the operators themselves are converged.
    """
    if code.params.lattice != "qubit":
        raise ValueError("logical operators need the two-codeword lattice")
    if code.dim != model.dim:
        raise ShapeMismatchError(f"code dim {code.dim} != model dim {model.dim}")
    rate = convergence_rate(code.params.epsilon, code.params.eta)
    if rate.value <= 0:
        raise ValueError("decay-rate bound is not positive; no horizon available")
    t_max = horizon_multiplier / rate.value
    h = 0.4 / rate.value

    prop = SplitPropagator(model.operators, model.rates, adjoint=True)
    out = {}
    worst = 0.0
    for name, s in (("jx", code.sx), ("jy", code.sy), ("jz", code.sz)):
        x, resid, _t, _n = prop.run_to_stationary(s, h=h, residual_tol=tol, t_max=t_max)
        out[name] = hermitian_part(x)
        worst = max(worst, resid)
    if worst > tol:
        warnings.warn(
            f"adjoint residual {worst:.3e} above tol {tol:.1e} at t={t_max:.3g}; "
            "returning the horizon values",
            ConvergenceWarning,
        )
    return LogicalOperators(out["jx"], out["jy"], out["jz"], float(worst))


def bloch_coordinates(logicals, rho, imag_tol=1e-8):
    """(Tr(Jx rho), Tr(Jy rho), Tr(Jz rho)) as real numbers.

    Raises InvalidInputError if any imaginary part exceeds imag_tol.
    """
    rho = np.asarray(rho, dtype=complex)
    out = []
    for j in (logicals.jx, logicals.jy, logicals.jz):
        if j.shape != rho.shape:
            raise ShapeMismatchError(f"operator shape {j.shape} vs state {rho.shape}")
        val = np.trace(j @ rho)
        if abs(val.imag) > imag_tol:
            raise InvalidInputError(f"Bloch coordinate has imaginary part {val.imag:.3e}")
        out.append(float(val.real))
    return tuple(out)
