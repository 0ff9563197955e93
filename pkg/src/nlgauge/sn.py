"""Self-gravitating wave mechanics: the one-site limit of the gauge theory.

Three solvers live here:

* a radial ground-state solver (3D, u = r psi substitution) built on the
  alternating eigen-solve / potential-solve loop;
* an independent shooting-method oracle for the same radial problem,
  integrating the ODEs with RK4 and bisecting on the node count;
* a 1D line evolver (Crank-Nicolson) with the self-consistent potential,
  including the uniform background term of the parent theory.

Dimensionless units hbar = m = 1 throughout; `coupling` is the single
gravitational parameter (G*m^2 after rescaling; the 4*pi belongs to the
Poisson equation). The attractive orientation is

    E u = -1/2 u'' + [V_ext + v/r] u,     v'' = 4*pi*coupling * u^2 / r,

with v = r*Phi, v(0) = 0, and v(r_max) = -coupling * enclosed norm, so Phi
has the -coupling/r far field of a unit mass. On the line,

    phi_grav'' = -coupling (|psi|^2 - background),  V_eff = V_ext - phi_grav,

Neumann with zero mean; the source mean is projected out, which is what
the compact-universe constraint demands (background = 0 behaves as
background = 1/volume).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, IntegratorError
from .grids import RadialGrid, TensorGrid, UniformGrid1D
from .model import HamiltonianSpec, ModelParams


@dataclass(frozen=True)
class SNParams:
    coupling: float = 1.0
    background: float = 0.0
    external_potential_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.coupling < 0 or self.background < 0:
            raise ValueError("coupling and background must be >= 0")

    def external_potential(self, r: np.ndarray) -> np.ndarray:
        v = np.zeros_like(r)
        for k in reversed(range(len(self.external_potential_coeffs))):
            v = v * r + self.external_potential_coeffs[k]
        return v


@dataclass
class RadialState:
    grid: RadialGrid
    u: np.ndarray
    v: np.ndarray
    energy: float
    iterations: int = 0
    residual: float = 0.0


@dataclass
class Line1DState:
    grid: UniformGrid1D
    psi: np.ndarray
    phi_grav: np.ndarray
    time: float = 0.0


# ---------------------------------------------------------------- radial

def _radial_norm(r: np.ndarray, u: np.ndarray) -> float:
    """integral 4 pi u^2 dr (trapezoid), the 3D normalization of psi=u/r."""
    return float(4.0 * np.pi * np.trapezoid(u * u, r))


def _potential_from_u_quadrature(r, u, coupling):
    """Solve v'' = 4 pi coupling u^2/r by double trapezoid quadrature with
    v(0) = 0 and the monopole value at r_max."""
    src = 4.0 * np.pi * coupling * u * u / r
    # integrate from r=0, extending with u ~ r (src ~ r) -> src(0) = 0
    rr = np.concatenate(([0.0], r))
    ss = np.concatenate(([0.0], src))
    vp = np.concatenate(([0.0], np.cumsum(0.5 * (ss[1:] + ss[:-1]) * np.diff(rr))))
    part = np.concatenate(([0.0], np.cumsum(0.5 * (vp[1:] + vp[:-1]) * np.diff(rr))))
    part = part[1:]
    target = -coupling * _radial_norm(r, u)
    slope = (target - part[-1]) / r[-1]
    return part + slope * r


def _tridiag_ground(h: float, diag_full: np.ndarray):
    """Ground pair of -1/2 u'' + diag u with pinned endpoints (LAPACK)."""
    d = diag_full[1:-1] + 1.0 / h ** 2
    off = np.full(d.size - 1, -0.5 / h ** 2)
    vals, vecs = scipy.linalg.eigh_tridiagonal(d, off, select="i",
                                               select_range=(0, 0))
    u = np.zeros_like(diag_full)
    u[1:-1] = vecs[:, 0]
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    return float(vals[0]), u


def sn_ground_radial_scf(params: SNParams, grid: RadialGrid, tol: float = 1e-10,
                         *, mixing: float = 0.5, max_scf: int = 300) -> RadialState:
    """Ground state of the coupled radial system by alternating solves."""
    if params.background != 0.0:
        raise ValueError("radial solver is the background-free case")
    r = grid.nodes
    h = grid.spacing
    w = np.full(grid.count, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    vext = params.external_potential(r)

    v = np.zeros_like(r)
    u = r * np.exp(-0.5 * r * r)
    energy_prev = None
    for it in range(max_scf):
        energy, u = _tridiag_ground(h, vext + v / r)
        u = u / np.sqrt(_radial_norm(r, u))
        if params.coupling > 0:
            v_new = _potential_from_u_quadrature(r, u, params.coupling)
            v = (1.0 - mixing) * v + mixing * v_new
        if energy_prev is not None and abs(energy - energy_prev) < tol:
            energy_prev = energy
            break
        energy_prev = energy
    else:
        raise ConvergenceError("radial SCF did not converge",
                               residual=abs(energy - energy_prev))
    # self-consistency residual: eigen-residual with the unmixed potential
    if params.coupling > 0:
        v = _potential_from_u_quadrature(r, u, params.coupling)
    diag = vext + v / r
    hu = np.zeros_like(u)
    hu[1:-1] = -(u[2:] - 2.0 * u[1:-1] + u[:-2]) / (2.0 * h * h)
    hu += diag * u
    hu[0] = hu[-1] = 0.0
    res = float(np.sqrt((w * (hu - energy_prev * u) ** 2).sum()))
    return RadialState(grid, u, v, float(energy_prev), iterations=it + 1,
                       residual=res)


def _rk4_shoot_u(r, veff, energy):
    """Integrate u'' = 2 (veff - E) u outward; returns u on the grid.

    Coefficient values at RK4 half steps are linear interpolants of the
    tabulated effective potential. Scalar loop on plain floats; the
    amplitude is rescaled when it grows huge (zeros are unaffected).
    """
    n = r.size
    h = float(r[1] - r[0])
    kk = (2.0 * (veff - energy)).tolist()
    u_out = np.empty(n)
    u_out[0] = 0.0
    u, up = 0.0, 1.0
    h6 = h / 6.0
    for i in range(n - 1):
        k0 = kk[i]
        k1 = kk[i + 1]
        km = 0.5 * (k0 + k1)
        a1u, a1p = up, k0 * u
        y2u = u + 0.5 * h * a1u
        y2p = up + 0.5 * h * a1p
        a2u, a2p = y2p, km * y2u
        y3u = u + 0.5 * h * a2u
        y3p = up + 0.5 * h * a2p
        a3u, a3p = y3p, km * y3u
        y4u = u + h * a3u
        y4p = up + h * a3p
        a4u, a4p = y4p, k1 * y4u
        u = u + h6 * (a1u + 2.0 * a2u + 2.0 * a3u + a4u)
        up = up + h6 * (a1p + 2.0 * a2p + 2.0 * a3p + a4p)
        m = max(abs(u), abs(up))
        if m > 1e12:
            u /= m
            up /= m
            u_out[: i + 1] /= m
        u_out[i + 1] = u
    return u_out


def shoot_node_count(u: np.ndarray) -> int:
    s = np.sign(u[1:-1])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] * s[:-1] < 0))


def _assemble_two_sided(r, veff, energy):
    """Final wave function at a converged shooting energy: outward
    integration to the outer turning point, stable inward integration
    from r_max, amplitudes matched there. Returns (u, logderiv mismatch)."""
    n = r.size
    allowed = np.where(veff <= energy)[0]
    i_match = int(allowed[-1]) if allowed.size else n // 2
    i_match = min(max(i_match, 2), n - 3)
    uo = _rk4_shoot_u(r, veff, energy)
    # inward pass: same integrator on the reversed axis (negative step),
    # which follows the decaying solution stably
    ui = _rk4_shoot_u(r[::-1].copy(), veff[::-1].copy(), energy)[::-1]
    scale = uo[i_match] / ui[i_match]
    ui = ui * scale
    u = np.concatenate([uo[:i_match], ui[i_match:]])
    h = r[1] - r[0]
    ldo = (uo[i_match + 1] - uo[i_match - 1]) / (2 * h * uo[i_match])
    ldi = (ui[i_match + 1] - ui[i_match - 1]) / (2 * h * ui[i_match])
    u = u / np.sqrt(_radial_norm(r, u))
    return u, abs(ldo - ldi)


def _rk4_poisson_v(r, u, coupling):
    """v'' = 4 pi coupling u^2 / r via RK4 with the monopole outer value."""
    n = r.size
    h = float(r[1] - r[0])
    src = (4.0 * np.pi * coupling * u * u / r).tolist()
    part = np.empty(n)
    part[0] = 0.0
    vv, vp = 0.0, 0.0
    h6 = h / 6.0
    for i in range(n - 1):
        s0 = src[i]
        s1 = src[i + 1]
        sm = 0.5 * (s0 + s1)
        a1v, a1p = vp, s0
        a2v = vp + 0.5 * h * a1p
        a3v = vp + 0.5 * h * sm
        a4v = vp + h * sm
        vv = vv + h6 * (a1v + 2.0 * a2v + 2.0 * a3v + a4v)
        vp = vp + h6 * (s0 + 4.0 * sm + s1)
        part[i + 1] = vv
    target = -coupling * _radial_norm(r, u)
    slope = (target - part[-1]) / r[-1]
    return part + slope * r


def sn_ground_radial_shoot(params: SNParams, grid: RadialGrid,
                           tol: float = 1e-10, *,
                           bracket: tuple[float, float] | None = None,
                           max_outer: int = 200, mixing: float = 0.5) -> RadialState:
    """Shooting oracle: bisection on the node count of the outward RK4
    integration isolates the nodeless ground state; the potential is
    refreshed from the current u until the energy settles."""
    if params.background != 0.0:
        raise ValueError("radial solver is the background-free case")
    r = grid.nodes
    vext = params.external_potential(r)
    v = np.zeros_like(r)
    energy_prev = None
    hist = []
    u = None
    for it in range(max_outer):
        veff = vext + v / r
        lo = hi = None
        if len(hist) >= 1:
            # warm bracket around the previous energy
            if len(hist) >= 2:
                span = max(10 * abs(hist[-1] - hist[-2]), 1e-9)
            else:
                span = max(0.25 * abs(hist[-1]), 0.05)
            lo, hi = hist[-1] - span, hist[-1] + span
            if shoot_node_count(_rk4_shoot_u(r, veff, lo)) != 0 \
                    or shoot_node_count(_rk4_shoot_u(r, veff, hi)) < 1:
                lo = hi = None
        if lo is None:
            if bracket is not None:
                lo, hi = bracket
            else:
                lo, hi = float(veff.min()) - 1.0, float(veff.max())
        # grow hi until at least one node appears
        for _ in range(60):
            if shoot_node_count(_rk4_shoot_u(r, veff, hi)) >= 1:
                break
            hi += max(1.0, abs(hi))
        else:
            raise ConvergenceError("no node appeared while raising the bracket")
        if shoot_node_count(_rk4_shoot_u(r, veff, lo)) != 0:
            raise ConvergenceError("bracket floor already has nodes; "
                                   "no ground state in bracket")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if shoot_node_count(_rk4_shoot_u(r, veff, mid)) == 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < max(tol, 1e-13) * max(1.0, abs(mid)):
                break
        energy = 0.5 * (lo + hi)
        hist.append(energy)
        u, mismatch = _assemble_two_sided(r, veff, energy)
        if params.coupling == 0:
            energy_prev = energy
            break
        v_new = _rk4_poisson_v(r, u, params.coupling)
        v = (1.0 - mixing) * v + mixing * v_new
        if energy_prev is not None and abs(energy - energy_prev) < 10 * tol:
            energy_prev = energy
            break
        energy_prev = energy
    else:
        raise ConvergenceError("shooting outer loop did not converge",
                               residual=abs(energy - energy_prev))
    return RadialState(grid, u, v, float(energy_prev), iterations=it + 1,
                       residual=float(mismatch))


# ---------------------------------------------------------------- 1D line

def _grid1d_weights(grid: UniformGrid1D) -> np.ndarray:
    w = np.full(grid.count, grid.spacing)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _neumann_tridiag(n: int, h: float):
    """Compact Neumann Laplacian rows (mirror ghosts) as banded storage."""
    d = np.full(n, -2.0)
    off_up = np.ones(n - 1)
    off_lo = np.ones(n - 1)
    off_up[0] = 2.0
    off_lo[-1] = 2.0
    return d / h ** 2, off_up / h ** 2, off_lo / h ** 2


def poisson_1d_neumann(grid: UniformGrid1D, source: np.ndarray) -> np.ndarray:
    """Direct banded solve of u'' = source, zero-gradient ends, zero mean.

    The source mean is projected out first (compact-universe
    compatibility); the singular system is pinned at the first node and
    the mean subtracted afterwards.
    """
    w = _grid1d_weights(grid)
    vol = grid.extent
    src = source - (w * source).sum() / vol
    n = grid.count
    d, up, lo = _neumann_tridiag(n, grid.spacing)
    # pin u[0] = 0: replace first equation
    ab = np.zeros((3, n))
    ab[0, 1:] = up
    ab[1, :] = d
    ab[2, :-1] = lo
    ab[0, 1] = 0.0
    ab[1, 0] = 1.0
    rhs = src.copy()
    rhs[0] = 0.0
    u = scipy.linalg.solve_banded((1, 1), ab, rhs)
    u -= (w * u).sum() / vol
    return u


def solve_phi_grav(grid: UniformGrid1D, rho: np.ndarray,
                   params: SNParams) -> np.ndarray:
    """phi'' = -coupling (rho - background), mean-projected, zero mean."""
    return poisson_1d_neumann(grid, -params.coupling * (rho - params.background))


def line_hamiltonian_diag(grid: UniformGrid1D, params: SNParams,
                          phi_grav: np.ndarray) -> np.ndarray:
    return params.external_potential(grid.nodes) - phi_grav


def _line_energy(grid, psi, vext, phi_grav, rho, params):
    h = grid.spacing
    w = _grid1d_weights(grid)
    lap = np.zeros_like(psi)
    lap[1:-1] = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h ** 2
    ekin = float(np.real((w * np.conj(psi) * (-0.5 * lap)).sum()))
    eext = float((w * vext * rho).sum())
    eint = -0.5 * float((w * phi_grav * rho).sum())
    return ekin + eext + eint


def _cn_banded_step(grid, psi, diag, dt):
    n = grid.count
    h = grid.spacing
    coef = 1.0 / (2.0 * h * h)
    alpha = 0.5j * dt
    lap = np.zeros_like(psi)
    lap[1:-1] = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h ** 2
    hpsi = -0.5 * lap + diag * psi
    hpsi[0] = hpsi[-1] = 0.0
    rhs = (psi - alpha * hpsi)[1:-1]
    d = 1.0 + alpha * (2.0 * coef + diag[1:-1])
    ab = np.zeros((3, n - 2), dtype=complex)
    ab[0, 1:] = -alpha * coef
    ab[1, :] = d
    ab[2, :-1] = -alpha * coef
    sol = scipy.linalg.solve_banded((1, 1), ab, rhs)
    out = np.zeros_like(psi)
    out[1:-1] = sol
    return out


def sn_evolve_1d(state: Line1DState, params: SNParams, dt: float, steps: int,
                 *, record_every: int = 1, norm_tol: float = 1e-6) -> dict:
    """Crank-Nicolson evolution with the self-consistent potential.

    Each step predicts the midpoint density with a half step, rebuilds the
    potential there, and takes the full step with it (second order, norm
    conserving per step). Records t, norm, energy, and width sigma.
    """
    grid = state.grid
    w = _grid1d_weights(grid)
    x = grid.nodes
    vext = params.external_potential(x)
    psi = state.psi.astype(complex).copy()
    psi[0] = psi[-1] = 0.0
    norm0 = float((w * np.abs(psi) ** 2).sum())

    out = {k: [] for k in ("t", "norm", "energy", "sigma")}
    snapshots = [(state.time, psi.copy())]

    def record(t, psi_v, phi_v):
        rho = np.abs(psi_v) ** 2
        nrm = float((w * rho).sum())
        mean = float((w * x * rho).sum()) / nrm
        sig = float(np.sqrt(max((w * (x - mean) ** 2 * rho).sum() / nrm, 0.0)))
        en = _line_energy(grid, psi_v, vext, phi_v, rho, params)
        for key, val in (("t", t), ("norm", nrm), ("energy", en), ("sigma", sig)):
            out[key].append(val)

    phi = solve_phi_grav(grid, np.abs(psi) ** 2, params) if params.coupling > 0 \
        else np.zeros_like(x)
    record(state.time, psi, phi)
    for k in range(1, steps + 1):
        if params.coupling > 0:
            half = _cn_banded_step(grid, psi, vext - phi, 0.5 * dt)
            phi_mid = solve_phi_grav(grid, np.abs(half) ** 2, params)
        else:
            phi_mid = phi
        psi = _cn_banded_step(grid, psi, vext - phi_mid, dt)
        t = state.time + k * dt
        if params.coupling > 0:
            phi = solve_phi_grav(grid, np.abs(psi) ** 2, params)
        if k % record_every == 0 or k == steps:
            record(t, psi, phi)
            snapshots.append((t, psi.copy()))
            if abs(out["norm"][-1] - norm0) > norm_tol:
                raise IntegratorError(
                    f"norm drifted to {out['norm'][-1]:.12f} at step {k}")
    return {"series": {k: np.array(v) for k, v in out.items()},
            "snapshots": snapshots,
            "final": Line1DState(grid, psi, phi, state.time + steps * dt)}


def line_ground_scf(grid: UniformGrid1D, vext_coeffs: tuple[float, ...],
                    coupling: float, background: float, tol: float = 1e-12,
                    *, mixing: float = 0.5, max_scf: int = 400):
    """Stationary 1D solver, independently coded against the functional
    path: dense tridiagonal eigensolve plus direct banded Poisson.

    Solves  omega psi = -1/2 psi'' + V_ext psi - phi psi,
            phi'' = -coupling (|psi|^2 - background),   both zero-mean/Neumann,
    on the same discrete operators as the configuration-space module, so
    the two fixed points coincide to solver tolerance.
    """
    x = grid.nodes
    h = grid.spacing
    w = _grid1d_weights(grid)
    vext = np.zeros_like(x)
    for k in reversed(range(len(vext_coeffs))):
        vext = vext * x + vext_coeffs[k]

    phi = np.zeros_like(x)
    psi = np.exp(-0.5 * x * x)
    omega_prev = None
    for it in range(max_scf):
        diag = (vext - phi)[1:-1] + 1.0 / h ** 2
        off = np.full(grid.count - 3, -0.5 / h ** 2)
        vals, vecs = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, 0))
        omega = float(vals[0])
        psi = np.zeros_like(x)
        psi[1:-1] = vecs[:, 0]
        psi /= np.sqrt((w * psi * psi).sum())
        if psi[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        rho = psi * psi
        if coupling > 0:
            phi_new = poisson_1d_neumann(grid, -coupling * (rho - background))
            phi = (1.0 - mixing) * phi + mixing * phi_new
        if omega_prev is not None and abs(omega - omega_prev) < tol:
            omega_prev = omega
            break
        omega_prev = omega
    else:
        raise ConvergenceError("line SCF did not converge",
                               residual=abs(omega - omega_prev))
    if coupling > 0:
        phi = poisson_1d_neumann(grid, -coupling * (rho - background))
    return omega_prev, psi, phi


@dataclass
class LimitReport:
    omega_functional: float
    omega_line: float
    max_psi_diff: float
    max_at_diff: float
    source_curvature_consistent: bool
    repulsive_fraction: float

    @property
    def omega_diff(self) -> float:
        return abs(self.omega_functional - self.omega_line)


def limit_equivalence_check(spec: HamiltonianSpec, params: ModelParams,
                            grid: TensorGrid, tol: float = 1e-12) -> LimitReport:
    """One-site reduction: the configuration-space stationary solver and
    the independent 1D solver must hit the same fixed point.

    Also inspects the sign structure: wherever the density falls below the
    uniform background the constraint source flips sign and the potential
    curvature turns locally repulsive.
    """
    from .dynamics import stationary_solve

    if grid.ndim != 1 or spec.sites != 1:
        raise ValueError("the limit check is the single-site case")
    st = stationary_solve(spec, params, grid, tol=tol * 100)
    axis = grid.axes[0]
    coupling = params.inv_l2
    background = 1.0 / params.omega
    omega_line, psi_line, phi_line = line_ground_scf(
        axis, spec.potential_coeffs, coupling, background, tol=tol)
    psi_f = np.real(st.psi.values)
    dpsi = float(np.abs(psi_f - psi_line).max())
    dat = float(np.abs(st.a_t - phi_line).max())

    # sign experiment: curvature of A_t vs sign of (rho - background)
    rho = psi_f * psi_f
    h = axis.spacing
    curv = np.zeros_like(rho)
    curv[1:-1] = (st.a_t[2:] - 2 * st.a_t[1:-1] + st.a_t[:-2]) / h ** 2
    src = rho - background
    sel = np.abs(src[1:-1]) > 1e-6 * np.abs(src).max()
    agree = np.sign(curv[1:-1][sel]) == -np.sign(src[1:-1][sel])
    consistent = bool(np.all(agree)) if coupling > 0 else True
    repulsive = float(np.mean(src[1:-1] < 0))
    return LimitReport(st.omega_eig, omega_line, dpsi, dat, consistent, repulsive)
