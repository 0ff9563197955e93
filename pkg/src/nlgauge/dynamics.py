"""Self-consistent stationary states and real-time evolution in temporal
gauge.

The stationary loop alternates the ground eigenproblem

    omega psi = H psi - A_t psi        (psi real, links off)

with the Gauss solve for A_t, under linear mixing. Real time uses
Crank-Nicolson for psi with the midpoint connection, and leapfrog for the
(A_phi, F) pair with

    d_t A_phi = F,      d_t F(.,x) = -(1/(l^2 a^3)) J_x .

Crank-Nicolson is norm-preserving up to the linear-solve tolerance, and
the link discretization conserves the Gauss constraint up to pure time-
discretization error, so both residual diagnostics shrink like dt^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (ConstraintViolationError, ConvergenceError,
                     InsufficientDataError, IntegratorError)
from .gaugeops import (apply_hamiltonian_raw, gauss_residual,
                       gauss_solve_stationary, link_current, link_divergence,
                       link_phases, project_dirichlet)
from .grids import BoundaryCondition, TensorGrid
from .model import (GaugeState, HamiltonianSpec, ModelParams, StationaryState,
                    WaveFunctional, nonlinearity)
from .numerics import laplacian_apply, smallest_eigenpair


def default_gaussian_guess(grid: TensorGrid) -> np.ndarray:
    r2 = np.zeros(grid.shape)
    for x in range(grid.ndim):
        c = 0.5 * (grid.axes[x].lower + grid.axes[x].upper)
        r2 = r2 + np.broadcast_to((grid.coordinate(x) - c) ** 2, grid.shape)
    return np.exp(-0.5 * r2)


def stationary_solve(spec: HamiltonianSpec, params: ModelParams,
                     grid: TensorGrid, mixing: float = 0.5,
                     tol: float = 1e-10, *, max_scf: int = 200,
                     eig_tol: float = 1e-9,
                     guess: np.ndarray | None = None,
                     mask: np.ndarray | None = None) -> StationaryState:
    """Ground-state solution of the coupled eigenvalue/constraint system.

    Stops when successive omega values differ by < tol and the psi update
    is < tol; the returned state carries both coupled residuals, each
    required to be < 10*tol. Oscillation of omega halves the mixing.
    """
    if not 0.0 < mixing <= 1.0:
        raise ValueError("mixing must be in (0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = grid.quad_weights()
    interior = grid.boundary_mask()
    if mask is not None:
        interior = interior & mask
    diag0 = spec.site_potential_total(grid)
    psi = default_gaussian_guess(grid) if guess is None else np.asarray(guess, dtype=float)
    # warm-start the multiplier from the guess density; breaks ties
    # deterministically when wells are degenerate
    rho_g = psi * psi
    rho_g = rho_g / float(np.real(grid.integrate(rho_g)))
    a_t = gauss_solve_stationary(grid, rho_g, params)
    omega_prev = None
    domega_prev = None
    trace = []
    mix = mixing

    for it in range(max_scf):
        diag = diag0 - a_t

        def op(v, _diag=diag):
            return apply_hamiltonian_raw(grid, v, None, _diag, spec.lattice_spacing)

        omega, psi = smallest_eigenpair(op, psi, tol=eig_tol, weights=w,
                                        mask=interior)
        rho = psi * psi
        a_new = gauss_solve_stationary(grid, rho, params)
        da = grid.norm(a_new - a_t)
        a_t = (1.0 - mix) * a_t + mix * a_new

        if omega_prev is not None:
            domega = omega - omega_prev
            trace.append((it, omega, da))
            if abs(domega) < tol and da * mix < tol:
                omega_prev = omega
                break
            if domega_prev is not None and domega * domega_prev < 0 \
                    and abs(domega) > 0.5 * abs(domega_prev):
                mix = max(0.05, 0.5 * mix)  # damp detected oscillation
            domega_prev = domega
        else:
            trace.append((it, omega, da))
        omega_prev = omega
    else:
        raise ConvergenceError(
            f"stationary SCF did not converge in {max_scf} iterations "
            f"(mixing ended at {mix}); smaller mixing may help",
            residual=da, trace=trace)

    a_t = gauss_solve_stationary(grid, rho, params)
    hpsi = apply_hamiltonian_raw(grid, psi + 0j, None, diag0 - a_t,
                                 spec.lattice_spacing)
    hpsi = project_dirichlet(grid, hpsi)
    eig_res = grid.norm(np.real(hpsi) - omega_prev * psi)
    gres = _stationary_gauss_residual(grid, a_t, rho, params)
    state = StationaryState(
        omega_eig=float(omega_prev),
        psi=WaveFunctional(grid, psi.astype(complex)),
        a_t=a_t, iterations=len(trace),
        eig_residual=float(eig_res), gauss_residual=float(gres))
    if eig_res > 10 * tol or gres > 10 * tol:
        raise ConvergenceError(
            f"converged loop left residuals eig={eig_res:.3e} gauss={gres:.3e} "
            f"above 10*tol={10 * tol:.3e}", residual=max(eig_res, gres),
            trace=trace)
    return state


def _stationary_gauss_residual(grid, a_t, rho, params):
    lap = laplacian_apply(grid, a_t, BoundaryCondition.NEUMANN_ZERO)
    return grid.norm(lap + params.inv_l2 * nonlinearity(rho, params))


@dataclass
class Snapshot:
    """One recorded instant of a temporal-gauge trajectory."""

    time: float
    psi: np.ndarray
    a_phi: list[np.ndarray]
    f_bar: list[np.ndarray]   # field strength averaged onto the integer step
    a_t: np.ndarray


@dataclass
class Trajectory:
    grid: TensorGrid
    spec: HamiltonianSpec
    params: ModelParams
    dt: float
    snapshots: list[Snapshot] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])


def _cn_step_1d(grid, psi, phases, diag, a_lat, dt):
    """Direct tridiagonal Crank-Nicolson step (interior unknowns)."""
    n = grid.shape[0]
    h = grid.spacings[0]
    coef = 1.0 / (2.0 * a_lat ** 3 * h * h)
    alpha = 0.5j * dt
    rhs_full = psi - alpha * apply_hamiltonian_raw(grid, psi, phases, diag, a_lat)
    U = np.ones(n - 1, dtype=complex) if phases is None else phases[0]
    # interior nodes 1..n-2; link j connects nodes j and j+1
    d = 1.0 + alpha * (2.0 * coef + diag[1:-1])
    upper = alpha * (-coef * U[1:-1])
    lower = alpha * (-coef * np.conj(U[1:-1]))
    ab = np.zeros((3, n - 2), dtype=complex)
    ab[0, 1:] = upper
    ab[1, :] = d
    ab[2, :-1] = lower
    sol = scipy.linalg.solve_banded((1, 1), ab, rhs_full[1:-1])
    out = np.zeros_like(psi)
    out[1:-1] = sol
    return out


def _cn_step_nd(grid, psi, phases, diag, a_lat, dt, rtol=1e-12, max_iter=500):
    """Matrix-free CN step: CG on the Hermitian system (I + a^2 H^2)."""
    alpha = 0.5 * dt
    interior = grid.boundary_mask()

    def apply_h(v):
        return np.where(interior,
                        apply_hamiltonian_raw(grid, np.where(interior, v, 0.0),
                                              phases, diag, a_lat), 0.0)

    b = psi - 1j * alpha * apply_h(psi)
    b2 = b + 1j * alpha * apply_h(b)  # (I - i a H) applied to RHS

    def apply_A(v):
        return v + alpha * alpha * apply_h(apply_h(v))

    x = psi.copy()
    r = b2 - apply_A(x)
    p = r.copy()
    rr = float(np.real(np.vdot(r, r)))
    bnorm = float(np.real(np.vdot(b2, b2)))
    tol2 = (rtol ** 2) * bnorm
    for _ in range(max_iter):
        if rr <= tol2:
            break
        Ap = apply_A(p)
        denom = float(np.real(np.vdot(p, Ap)))
        al = rr / denom
        x += al * p
        r -= al * Ap
        rr_new = float(np.real(np.vdot(r, r)))
        p = r + (rr_new / rr) * p
        rr = rr_new
    else:
        raise ConvergenceError("CN inner solve did not converge",
                               residual=np.sqrt(rr / bnorm))
    return np.where(interior, x, 0.0)


def evolve_temporal_gauge(psi0: WaveFunctional, gauge0: GaugeState,
                          spec: HamiltonianSpec, params: ModelParams,
                          dt: float, steps: int, *, record_every: int = 1,
                          scheme: str = "cn", norm_tol: float = 1e-6,
                          gauss_blowup: float = 1.0,
                          stability_margin: float = 20.0) -> Trajectory:
    """Advance (psi, A_phi, F) from Gauss-consistent initial data.

    Records a snapshot every `record_every` steps (the initial state is
    snapshot 0). Diagnostics per recorded step: norm, total charge, Gauss
    residual, continuity residual (between this and the previous recorded
    step when adjacent), matter and field energy.
    """
    grid = psi0.grid
    if np.any(gauge0.a_t):
        raise ValueError("temporal gauge requires a_t = 0")
    if dt <= 0 or steps < 1:
        raise ValueError("need dt > 0 and steps >= 1")
    diag = spec.site_potential_total(grid)
    # crude spectral radius bound for the accuracy precondition
    specrad = float(np.max(np.abs(diag))) + sum(
        2.0 / (spec.lattice_spacing ** 3 * h * h) for h in grid.spacings)
    if dt * specrad > stability_margin:
        raise IntegratorError(
            f"dt * spectral-radius estimate = {dt * specrad:.2f} exceeds "
            f"{stability_margin}; reduce dt")

    w = grid.quad_weights()
    inv_l2a3 = params.inv_l2 / spec.lattice_spacing ** 3
    psi = project_dirichlet(grid, psi0.values.astype(complex))
    a = [ax.copy() for ax in gauge0.a_phi]
    f0 = [fx.copy() for fx in gauge0.f]

    def current(psi_v, a_links):
        ph = link_phases(grid, a_links)
        return [link_current(grid, psi_v, ph, x) for x in range(grid.ndim)]

    def f_rhs(psi_v, a_links):
        return [-inv_l2a3 * j for j in current(psi_v, a_links)]

    rhs0 = f_rhs(psi, a)
    f_half = [f0[x] + 0.5 * dt * rhs0[x] for x in range(grid.ndim)]
    f_half_prev = None

    traj = Trajectory(grid, spec, params, dt * record_every)
    diags = {k: [] for k in ("time", "norm", "charge", "gauss_residual",
                             "continuity_residual", "energy", "sigma")}
    norm0 = float(np.real((w * np.abs(psi) ** 2).sum()))

    def record(k, psi_v, a_links, f_bar, prev):
        t = k * dt
        rho = np.abs(psi_v) ** 2
        nrm = float((w * rho).sum())
        charge = params.inv_l2 * float((w * nonlinearity(rho, params)).sum())
        gres = gauss_residual(grid, f_bar, rho, params)
        ph = link_phases(grid, a_links)
        hpsi = apply_hamiltonian_raw(grid, psi_v, ph, diag, spec.lattice_spacing)
        e_mat = float(np.real((w * np.conj(psi_v) * hpsi).sum()))
        e_fld = -0.5 * params.l ** 2 * sum(
            float((grid.link_weights(x) * f_bar[x] ** 2).sum())
            for x in range(grid.ndim)) if params.inv_l2 > 0 else 0.0
        if prev is not None:
            here = Snapshot(t, psi_v, a_links, f_bar, np.zeros(grid.shape))
            cres = continuity_residual(grid, prev, here, spec, params)
        else:
            cres = 0.0
        sigma = np.nan
        if grid.ndim == 1:
            xs = grid.axes[0].nodes
            mean = float((w * xs * rho).sum()) / nrm
            sigma = float(np.sqrt(max((w * (xs - mean) ** 2 * rho).sum() / nrm, 0.0)))
        for key, val in (("time", t), ("norm", nrm), ("charge", charge),
                         ("gauss_residual", gres), ("continuity_residual", cres),
                         ("energy", e_mat + e_fld), ("sigma", sigma)):
            diags[key].append(val)
        snap = Snapshot(t, psi_v.copy(), [ax.copy() for ax in a_links],
                        [fx.copy() for fx in f_bar], np.zeros(grid.shape))
        traj.snapshots.append(snap)
        return snap, nrm, gres

    prev_snap, _, gres0 = record(0, psi, a, f0, None)
    gauss_floor = max(gres0, 1e-12)

    for k in range(1, steps + 1):
        a_mid = [a[x] + 0.5 * dt * f_half[x] for x in range(grid.ndim)]
        phases_mid = link_phases(grid, a_mid)
        if scheme == "cn":
            if grid.ndim == 1:
                psi = _cn_step_1d(grid, psi, phases_mid, diag,
                                  spec.lattice_spacing, dt)
            else:
                psi = _cn_step_nd(grid, psi, phases_mid, diag,
                                  spec.lattice_spacing, dt)
        elif scheme == "euler":
            hpsi = apply_hamiltonian_raw(grid, psi, phases_mid, diag,
                                         spec.lattice_spacing)
            psi = project_dirichlet(grid, psi - 1j * dt * hpsi)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        a = [a_mid[x] + 0.5 * dt * f_half[x] for x in range(grid.ndim)]
        rhs = f_rhs(psi, a)
        f_half_prev = f_half
        f_half = [f_half[x] + dt * rhs[x] for x in range(grid.ndim)]

        if k % record_every == 0 or k == steps:
            f_bar = [0.5 * (f_half_prev[x] + f_half[x]) for x in range(grid.ndim)]
            prev_snap, nrm, gres = record(k, psi, a, f_bar,
                                          prev_snap if record_every == 1 else None)
            if abs(nrm - norm0) > norm_tol:
                raise IntegratorError(
                    f"norm drifted to {nrm:.12f} at step {k} (tol {norm_tol})")
            if gres > gauss_blowup and gres > 1e4 * gauss_floor:
                raise ConstraintViolationError(
                    f"Gauss residual {gres:.3e} blew up at step {k}")

    traj.diagnostics = {k: np.array(v) for k, v in diags.items()}
    return traj


def continuity_residual(grid: TensorGrid, snap0: Snapshot, snap1: Snapshot,
                        spec: HamiltonianSpec, params: ModelParams) -> float:
    """Grid norm of d_t(rho N) + (1/a^3) div J between two snapshots.

    The time derivative is the forward difference of the charge density;
    the divergence uses the average of the link currents of the two
    endpoint states, which is gauge invariant and second-order accurate at
    the midpoint.
    """
    dt = snap1.time - snap0.time
    if dt <= 0:
        raise InsufficientDataError("snapshots must be consecutive in time")
    rho0 = np.abs(snap0.psi) ** 2
    rho1 = np.abs(snap1.psi) ** 2
    ddt = (rho1 - rho0) / dt
    ph0 = link_phases(grid, snap0.a_phi)
    ph1 = link_phases(grid, snap1.a_phi)
    js = []
    for x in range(grid.ndim):
        j0 = link_current(grid, snap0.psi, ph0, x)
        j1 = link_current(grid, snap1.psi, ph1, x)
        js.append(0.5 * (j0 + j1))
    div = link_divergence(grid, js) / spec.lattice_spacing ** 3
    return grid.norm(ddt + div)
