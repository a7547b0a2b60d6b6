"""Exponential time differencing for the stiff Lindblad flow.

The generator splits as L(rho) = J(rho) - (G rho + rho G) with G = W/2
Hermitian and J completely positive. In the eigenbasis of G the drift is
elementwise, exp(t*drift) and its phi-functions are exact, and only the jump
part is treated by the (Krogstad) exponential Runge-Kutta stages. This is
immune to the e^{eps*n} stiffness of the truncated stabilizer band, which
caps explicit methods at steps of ~1/||W||.

Two properties carry the package's workloads:
  * step errors concentrate on transient fast modes; slow-manifold accuracy
    is fourth order, so trajectory runs take O(100) steps where an explicit
    5(4) pair would take millions;
  * any exact stationary point of the generator is a fixed point of the step
    for every h (the phi-function combinations telescope), so stationary
    observables can be reached with large fixed steps plus a residual test.
"""

import numpy as np

from .errors import StepSizeUnderflowError


def _phi123(z):
    """phi_1, phi_2, phi_3 of exp on a (non-positive) real array, elementwise.

    Direct formulas away from zero; Horner series inside |z| < 0.25 where the
    subtractions cancel.
    """
    z = np.asarray(z, dtype=float)
    ez = np.exp(z)
    small = np.abs(z) < 0.25
    zs = np.where(small, 1.0, z)
    p1 = (ez - 1.0) / zs
    p2 = (ez - 1.0 - z) / (zs * zs)
    p3 = (ez - 1.0 - z - 0.5 * z * z) / (zs * zs * zs)
    if np.any(small):
        w = z[small]
        for k, out in ((1, p1), (2, p2), (3, p3)):
            acc = np.zeros_like(w)
            fact = 1.0
            for j in range(13, -1, -1):
                # coefficient 1/(j+k)!
                acc = acc * w + 1.0 / _factorial(j + k)
            out[small] = acc
    return ez, p1, p2, p3


def _factorial(n, _cache={0: 1.0}):
    if n not in _cache:
        _cache[n] = n * _factorial(n - 1)
    return _cache[n]


class SplitPropagator:
    """Krogstad exponential RK4 for d/dt X = sum_k A_k X A_k† - (G X + X G).

    ops/rates define the channels; G = sum rates * op†op / 2 always. With
    adjoint=False the Kraus factors are A_k = sqrt(r_k) V_k (forward master
    equation); with adjoint=True they are A_k = sqrt(r_k) V_k† (observable
    evolution), which shares the same drift.
    """

    def __init__(self, ops, rates, adjoint=False):
        ops = [np.asarray(v, dtype=complex) for v in ops]
        dim = ops[0].shape[0]
        g = sum(r * (v.conj().T @ v) for v, r in zip(ops, rates)) / 2.0
        g = 0.5 * (g + g.conj().T)
        self.g_eigs, self.basis = np.linalg.eigh(g)
        kraus = [np.sqrt(r) * (self.basis.conj().T @ v @ self.basis) for v, r in zip(ops, rates)]
        self.kraus = [k.conj().T for k in kraus] if adjoint else kraus
        self.dim = dim
        self._zsum = -(self.g_eigs[:, None] + self.g_eigs[None, :])
        self._tables = {}

    def to_basis(self, x):
        return self.basis.conj().T @ np.asarray(x, dtype=complex) @ self.basis

    def from_basis(self, xb):
        return self.basis @ xb @ self.basis.conj().T

    def apply_jump(self, xb):
        out = np.zeros_like(xb)
        for k in self.kraus:
            out += k @ xb @ k.conj().T
        return out

    def generator(self, xb):
        """Full generator in the G-eigenbasis (for residuals)."""
        return self.apply_jump(xb) + self._zsum * xb

    def _phi_tables(self, h):
        tbl = self._tables.get(h)
        if tbl is None:
            e_h, p1_h, p2_h, p3_h = _phi123(h * self._zsum)
            e_2, p1_2, p2_2, _ = _phi123(0.5 * h * self._zsum)
            tbl = (e_h, p1_h, p2_h, p3_h, e_2, p1_2, p2_2)
            if len(self._tables) > 8:
                self._tables.clear()
            self._tables[h] = tbl
        return tbl

    def step(self, xb, h):
        """One Krogstad step of size h in the G-eigenbasis."""
        e_h, p1_h, p2_h, p3_h, e_2, p1_2, p2_2 = self._phi_tables(h)
        n1 = self.apply_jump(xb)
        u2 = e_2 * xb + (0.5 * h) * p1_2 * n1
        n2 = self.apply_jump(u2)
        u3 = e_2 * xb + (0.5 * h) * ((p1_2 - 2.0 * p2_2) * n1 + 2.0 * p2_2 * n2)
        n3 = self.apply_jump(u3)
        u4 = e_h * xb + h * ((p1_h - 2.0 * p2_h) * n1 + 2.0 * p2_h * n3)
        n4 = self.apply_jump(u4)
        return e_h * xb + h * (
            (p1_h - 3.0 * p2_h + 4.0 * p3_h) * n1
            + (2.0 * p2_h - 4.0 * p3_h) * (n2 + n3)
            + (-p2_h + 4.0 * p3_h) * n4
        )

    def run(self, x0, t_final, rtol=1e-8, atol=1e-10, record_times=(),
            on_record=None, hermitize=True, renorm_trace=False,
            h0=1e-3, max_steps=1_000_000):
        """Adaptive propagation by step doubling with local extrapolation.

        The doubled half-steps give the Richardson error estimate; the
        extrapolated value propagates. renorm_trace rescales the state to
        its initial trace after every accepted step (the exact forward flow
        conserves it); the largest pre-rescale defect is reported in the
        returned stats. Record times are hit exactly by step clamping.
        """
        xb = self.to_basis(x0)
        target_trace = np.trace(xb)
        record = sorted(set(float(tr) for tr in record_times if 0.0 < tr <= t_final))
        if not record or record[-1] < t_final:
            record.append(t_final)
        if on_record is not None and any(np.isclose(tr, 0.0) for tr in record_times):
            on_record(0.0, self.from_basis(xb))
        t = 0.0
        h = float(h0)
        ri = 0
        n_accept = n_reject = 0
        trace_defect = 0.0
        while t < t_final - 1e-14 * max(1.0, t_final):
            if n_accept + n_reject > max_steps:
                raise StepSizeUnderflowError(f"step budget exhausted at t={t:.6g}")
            t_stop = record[ri]
            h_try = min(h, t_stop - t)
            if h_try < 1e4 * np.finfo(float).eps * max(abs(t), 1.0):
                raise StepSizeUnderflowError(f"step size underflow at t={t:.6g}")
            big = self.step(xb, h_try)
            half = self.step(self.step(xb, 0.5 * h_try), 0.5 * h_try)
            err_mat = np.abs(big - half)
            err = err_mat.max() / 15.0
            scale = atol + rtol * max(np.abs(xb).max(), np.abs(half).max())
            if not np.isfinite(err):
                h = 0.25 * h_try
                n_reject += 1
                continue
            if err <= scale:
                xb = half + (half - big) / 15.0
                if hermitize:
                    xb = 0.5 * (xb + xb.conj().T)
                if renorm_trace:
                    tr = np.trace(xb)
                    trace_defect = max(trace_defect, abs(tr - target_trace))
                    xb *= target_trace / tr
                t += h_try
                n_accept += 1
                if t >= t_stop - 1e-14 * max(1.0, t_final):
                    if on_record is not None:
                        on_record(t_stop, self.from_basis(xb))
                    ri += 1
            else:
                n_reject += 1
            factor = 0.9 * (scale / err) ** 0.25 if err > 0 else 4.0
            h = h_try * min(4.0, max(0.2, factor))
        return self.from_basis(xb), {
            "n_accept": n_accept,
            "n_reject": n_reject,
            "trace_defect": float(abs(trace_defect)),
            "h_final": h,
        }

    def run_to_stationary(self, x0, h, residual_tol, t_max, hermitize=True):
        """Fixed-step march until ||L(X)||_F <= residual_tol * ||X||_F.

        Exact stationary points are fixed points of the step for any h, so
        the limit does not depend on h; h only sets how fast the decaying
        part dies. Returns (X, relative residual, reached time, steps).
        """
        xb = self.to_basis(x0)
        t = 0.0
        n = 0
        resid = np.inf
        while t < t_max:
            hh = min(h, t_max - t)
            xb = self.step(xb, hh)
            if hermitize:
                xb = 0.5 * (xb + xb.conj().T)
            t += hh
            n += 1
            resid = np.linalg.norm(self.generator(xb)) / max(np.linalg.norm(xb), 1e-300)
            if resid <= residual_tol:
                break
        return self.from_basis(xb), float(resid), t, n
