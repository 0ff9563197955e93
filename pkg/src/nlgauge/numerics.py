"""Finite-difference Laplacians, a matrix-free Poisson solver, and a
smallest-eigenpair solver.

All operators are second-order compact stencils and are exactly symmetric
under the trapezoid inner product: Dirichlet operators act on (and return)
fields that vanish on the cutoff faces; Neumann operators use mirror
ghosts, which is the discretization whose nullspace is exactly the
constants.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, UnsolvableConstraintError
from .grids import BoundaryCondition, TensorGrid


def _axis_second_diff(values: np.ndarray, axis: int, spacing: float,
                      bc: BoundaryCondition) -> np.ndarray:
    """(f[i-1] - 2 f[i] + f[i+1]) / h^2 along one axis with ghost values."""
    out = np.empty_like(values)
    inner = [slice(None)] * values.ndim

    def sl(s):
        idx = list(inner)
        idx[axis] = s
        return tuple(idx)

    out[sl(slice(1, -1))] = (
        values[sl(slice(2, None))] - 2.0 * values[sl(slice(1, -1))]
        + values[sl(slice(0, -2))]
    )
    if bc is BoundaryCondition.DIRICHLET_ZERO:
        # ghost = 0 on either side
        out[sl(0)] = values[sl(1)] - 2.0 * values[sl(0)]
        out[sl(-1)] = values[sl(-2)] - 2.0 * values[sl(-1)]
    else:
        # mirror ghost f[-1] = f[1]; keeps the operator symmetric under
        # trapezoid weights and its nullspace equal to the constants
        out[sl(0)] = 2.0 * (values[sl(1)] - values[sl(0)])
        out[sl(-1)] = 2.0 * (values[sl(-2)] - values[sl(-1)])
    out /= spacing ** 2
    return out


def laplacian_apply(grid: TensorGrid, values: np.ndarray,
                    bc: BoundaryCondition) -> np.ndarray:
    """Sum over axes of second differences, i.e. the configuration-space
    Laplacian sum_x d^2/dphi_x^2.

    Dirichlet fields are projected onto the subspace vanishing at the
    cutoff before and after, so the operator is symmetric for arbitrary
    input.
    """
    values = np.asarray(values)
    grid.check_field(values)
    if bc is BoundaryCondition.DIRICHLET_ZERO:
        mask = grid.boundary_mask()
        values = np.where(mask, values, 0.0)
    out = np.zeros_like(values, dtype=np.result_type(values, float))
    for axis in range(grid.ndim):
        out += _axis_second_diff(values, axis, grid.spacings[axis], bc)
    if bc is BoundaryCondition.DIRICHLET_ZERO:
        out = np.where(mask, out, 0.0)
    return out


def poisson_solve(grid: TensorGrid, source: np.ndarray, *,
                  rtol: float = 1e-12, compat_tol: float = 1e-8,
                  max_iter: int = 20000) -> np.ndarray:
    """Solve sum_x d^2 u/dphi_x^2 = source with zero-gradient boundaries
    and the additive constant fixed by zero mean.

    The Neumann problem is solvable only for zero-mean sources; the check
    is |integral(source)| < compat_tol. Conjugate gradients run in the
    trapezoid inner product, where -Laplacian is symmetric positive
    semidefinite with kernel = constants.
    """
    source = np.asarray(source, dtype=float)
    grid.check_field(source)
    w = grid.quad_weights()
    vol = grid.volume
    total = float((w * source).sum())
    if abs(total) > compat_tol:
        raise UnsolvableConstraintError(
            f"Neumann source has mean {total / vol:.3e} (integral {total:.3e}); "
            "the constraint is unsolvable for a non-neutral source")

    b = -(source - total / vol)  # solve (-L) u = -source, exactly neutral
    bnorm = np.sqrt(float((w * b * b).sum()))
    if bnorm == 0.0:
        return np.zeros_like(source)

    def dot(a, c):
        return float((w * a * c).sum())

    def apply_A(x):
        return -laplacian_apply(grid, x, BoundaryCondition.NEUMANN_ZERO)

    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = dot(r, r)
    tol2 = (rtol * bnorm) ** 2
    for it in range(max_iter):
        if rr <= tol2:
            break
        Ap = apply_A(p)
        alpha = rr / dot(p, Ap)
        x += alpha * p
        r -= alpha * Ap
        if (it + 1) % 50 == 0:
            # re-project the constant mode drift from roundoff
            r -= (w * r).sum() / vol
        rr_new = dot(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    else:
        raise ConvergenceError("Poisson CG did not converge",
                               residual=np.sqrt(rr) / bnorm)
    x -= (w * x).sum() / vol
    return x


def smallest_eigenpair(op_apply, guess: np.ndarray, tol: float = 1e-9, *,
                       weights: np.ndarray | None = None,
                       mask: np.ndarray | None = None,
                       max_iter: int | None = None,
                       perturb: float = 1e-8,
                       seed: int = 20170 ) -> tuple[float, np.ndarray]:
    """Algebraically smallest eigenpair of a symmetric operator.

    `op_apply` must be symmetric under the inner product sum(conj(a)*b*weights).
    `mask` restricts the eigenproblem to a subspace (e.g. the interior of a
    Dirichlet grid), which removes the spurious zero modes the projected
    operator would otherwise carry. A small seeded perturbation of the
    guess guarantees convergence to the ground state even from a guess
    orthogonal to it. The eigenvector comes back normalized to unit norm
    under the grid measure, with a deterministic sign.
    """
    guess = np.asarray(guess, dtype=float)
    shape = guess.shape
    if weights is None:
        weights = np.ones(shape)
    if mask is None:
        mask = np.ones(shape, dtype=bool)
    flat_mask = mask.ravel()
    sqw = np.sqrt(weights.ravel()[flat_mask])

    rng = np.random.default_rng(seed)
    g = guess.ravel()[flat_mask].astype(float)
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:
        raise ValueError("guess must be nonzero")
    g = g + perturb * gnorm * rng.standard_normal(g.size)

    n = g.size

    def matvec(y):
        # similarity transform: Atilde = sqrt(W) A sqrt(W)^-1 is Euclidean
        # symmetric whenever A is symmetric in the weighted inner product
        full = np.zeros(guess.size)
        full[flat_mask] = y / sqw
        out = op_apply(full.reshape(shape)).ravel()[flat_mask]
        return sqw * out

    lin_op = spla.LinearOperator((n, n), matvec=matvec, dtype=float)
    v0 = sqw * g
    try:
        vals, vecs = spla.eigsh(lin_op, k=1, which="SA", v0=v0,
                                maxiter=max_iter, tol=0,
                                ncv=min(n, 48))
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceError("eigenpair iteration did not converge",
                               residual=None) from exc
    lam = float(vals[0])
    vec = np.zeros(guess.size)
    vec[flat_mask] = vecs[:, 0] / sqw
    vec = vec.reshape(shape)

    wfull = weights.reshape(shape)
    nrm = np.sqrt(float((wfull * vec * vec).sum()))
    vec /= nrm
    # deterministic sign: largest-magnitude entry positive
    peak = np.unravel_index(np.argmax(np.abs(vec)), shape)
    if vec[peak] < 0:
        vec = -vec

    resid = np.where(mask, op_apply(vec) - lam * vec, 0.0)
    rnorm = np.sqrt(float((wfull * resid * resid).sum()))
    if rnorm > tol:
        raise ConvergenceError(
            f"eigenpair residual {rnorm:.3e} exceeds tol {tol:.3e}",
            residual=rnorm)
    return lam, vec
