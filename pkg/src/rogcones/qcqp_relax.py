"""Quadratic programs with homogeneous constraints and their SDP relaxation.

``min x^T S x  s.t.  x^T A_i x = 0,  x^T B x = 1`` lifts to a linear
program over the spectrahedral cone cut out by the A_i, normalized by B.
``solve_relaxation`` runs a primal log-det barrier over the span
coordinates; ``certify_exactness`` purifies the optimizer to an extreme
point of the optimal face and extracts a rank-1 solution when there is
one.  If the induced cone carries a complete rank-1 certificate the
relaxation is exact for structural reasons and is reported as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import symlin
from .cone_model import SpectrahedralCone, certificate_complete, make_cone
from .errors import InvalidInputError, NumericalError
from .symlin import DEFAULT_TOL


@dataclass
class QcqpProblem:
    cost: np.ndarray                      # S
    normalization: np.ndarray             # B
    constraints: list = field(default_factory=list)  # A_1, ..., A_k

    def __post_init__(self):
        self.cost = symlin.sym_matrix(self.cost)
        self.normalization = symlin.sym_matrix(self.normalization)
        self.constraints = [symlin.sym_matrix(a) for a in self.constraints]
        n = self.cost.shape[0]
        for a in [self.normalization] + self.constraints:
            if a.shape != (n, n):
                raise InvalidInputError("all problem matrices must share one size")

    @property
    def n(self) -> int:
        return self.cost.shape[0]


@dataclass
class SdpSolution:
    x_mat: Optional[np.ndarray]
    objective: float
    status: str                  # optimal | infeasible | unbounded | max-iter
    duality_gap: float


@dataclass
class ExactnessCertificate:
    status: str                  # exact-with-solution | exact-by-rog | gap-detected | inconclusive
    x_opt: Optional[np.ndarray]
    relaxed_value: float
    extracted_value: float


def induced_cone(problem: QcqpProblem) -> SpectrahedralCone:
    """The cone of PSD matrices annihilated by every constraint form."""
    n = problem.n
    full = symlin.sym_basis(n)
    if not problem.constraints:
        span = list(full)
    else:
        mat = np.array([[float(np.tensordot(a, s)) for s in full]
                        for a in problem.constraints])
        null = symlin.nullspace(mat)
        span = [symlin.span_from_coords(full, null[:, j])
                for j in range(null.shape[1])]
    return make_cone(n, span, [], expr=None, check=False)


# ---------------------------------------------------------------------------
# barrier solver


def solve_relaxation(problem: QcqpProblem, tol: float = DEFAULT_TOL,
                     max_outer: int = 60) -> SdpSolution:
    """Solve min <S, X> over the induced cone with <B, X> = 1.

    A primal path-following method over the span coordinates of the
    induced cone: phase 1 centers a strictly feasible point (detecting
    infeasibility), phase 2 follows the log-det barrier with the duality
    gap bounded by mu times the matrix size.
    """
    n = problem.n
    if n > 16:
        raise InvalidInputError("solver is sized for n <= 16")
    cone = induced_cone(problem)
    basis = cone.span_basis
    d = basis.shape[0]
    b_vec = np.array([float(np.tensordot(problem.normalization, s)) for s in basis])
    s_vec = np.array([float(np.tensordot(problem.cost, s)) for s in basis])
    nrm = np.linalg.norm(b_vec)
    if nrm < 1e-12:
        return SdpSolution(None, np.nan, "infeasible", np.inf)
    c_part = b_vec / (nrm * nrm)
    dirs = symlin.nullspace(b_vec[None, :])
    # phase 1: find a strictly feasible point on the slice
    c_feas = _phase1(basis, c_part, dirs, n)
    if c_feas is None:
        return SdpSolution(None, np.nan, "infeasible", np.inf)
    scale = 1.0 + float(np.abs(s_vec).max(initial=0.0))
    mats = np.array([np.tensordot(dirs[:, j], basis, axes=(0, 0))
                     for j in range(dirs.shape[1])]) if dirs.shape[1] else np.zeros((0, n, n))
    f0 = np.tensordot(c_part, basis, axes=(0, 0))
    lin = np.array([float(s_vec @ dirs[:, j]) for j in range(dirs.shape[1])])
    z = dirs.T @ (c_feas - c_part)
    mu = scale
    objective = None
    for _ in range(max_outer):
        z = _newton_logdet_affine(lin, mats, f0, z, mu)
        x = f0 + np.tensordot(z, mats, axes=(0, 0)) if len(z) else f0
        objective = float(np.tensordot(problem.cost, x))
        if objective < -1e12 * scale:
            return SdpSolution(None, -np.inf, "unbounded", np.inf)
        if mu * n <= 1e-9 * (1.0 + abs(objective)):
            break
        mu *= 0.2
    else:
        return SdpSolution(symlin.sym(x), objective, "max-iter", mu * n)
    x = symlin.sym(x)
    return SdpSolution(x, objective, "optimal", mu * n)


def _newton_logdet_affine(lin, mats, f0, z0, mu):
    """Newton for lin . z - mu logdet(f0 + sum z_j mats_j)."""
    if len(z0) == 0:
        return z0
    z = z0.copy()
    for _ in range(60):
        x = f0 + np.tensordot(z, mats, axes=(0, 0))
        w, v = np.linalg.eigh(symlin.sym(x))
        if w[0] <= 0:
            raise NumericalError("barrier iterate left the cone")
        xi_half = (v / np.sqrt(w)) @ v.T
        ws = np.array([xi_half @ m @ xi_half for m in mats])
        grad = lin - mu * np.array([float(np.trace(w_i)) for w_i in ws])
        hess = mu * np.einsum("iab,jba->ij", ws, ws)
        try:
            step = np.linalg.solve(hess + 1e-14 * np.eye(len(z)), -grad)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
        decrement = float(-grad @ step)
        if decrement <= 0:
            break
        t = 1.0
        accepted = False
        f_curr = float(lin @ z) - mu * float(np.sum(np.log(w)))
        for _ in range(60):
            cand = z + t * step
            xc = f0 + np.tensordot(cand, mats, axes=(0, 0))
            wc = np.linalg.eigvalsh(symlin.sym(xc))
            if wc[0] > 0:
                fc = float(lin @ cand) - mu * float(np.sum(np.log(wc)))
                if fc <= f_curr - 0.25 * t * decrement + 1e-13 * (1.0 + abs(f_curr)):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        z = z + t * step
        if decrement < 1e-11 * (1.0 + abs(f_curr)):
            break
    return z


def _phase1(basis, c_part, dirs, n, tol=1e-9):
    """A strictly feasible slice point, or None when the slice misses the cone."""
    x0 = np.tensordot(c_part, basis, axes=(0, 0))
    if np.linalg.eigvalsh(symlin.sym(x0))[0] > tol:
        return c_part
    if dirs.shape[1] == 0:
        return None
    mats = np.array([np.tensordot(dirs[:, j], basis, axes=(0, 0))
                     for j in range(dirs.shape[1])])
    # maximize t with x0 + sum z mats - t I >= 0 via a barrier on (z, t)
    t0 = float(np.linalg.eigvalsh(symlin.sym(x0))[0]) - 1.0
    z = np.zeros(dirs.shape[1])
    t = t0
    for mu in [1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6]:
        z, t = _phase1_newton(x0, mats, z, t, mu)
    x = x0 + np.tensordot(z, mats, axes=(0, 0))
    lam = float(np.linalg.eigvalsh(symlin.sym(x))[0])
    if lam <= tol:
        return None
    return c_part + dirs @ z


def _phase1_newton(x0, mats, z, t, mu, iters=40):
    n = x0.shape[0]
    eye = np.eye(n)
    for _ in range(iters):
        x = x0 + np.tensordot(z, mats, axes=(0, 0)) - t * eye
        w, v = np.linalg.eigh(symlin.sym(x))
        if w[0] <= 0:
            t = t - 2 * abs(w[0]) - 1e-9
            continue
        xi = (v / w) @ v.T
        xi_half = (v / np.sqrt(w)) @ v.T
        ws = np.array([xi_half @ m @ xi_half for m in mats])
        gz = -mu * np.array([float(np.trace(wi)) for wi in ws])
        gt = -1.0 + mu * float(np.trace(xi))
        grad = np.concatenate([gz, [gt]])
        k = len(z)
        hess = np.zeros((k + 1, k + 1))
        hess[:k, :k] = mu * np.einsum("iab,jba->ij", ws, ws)
        wt = xi_half @ eye @ xi_half
        for j in range(k):
            hess[j, k] = hess[k, j] = -mu * float(np.tensordot(ws[j], wt))
        hess[k, k] = mu * float(np.tensordot(wt, wt))
        try:
            step = np.linalg.solve(hess + 1e-12 * np.eye(k + 1), -grad)
        except np.linalg.LinAlgError:
            break
        sz, st = step[:k], step[k]
        stepsize = 1.0
        f_curr = -t - mu * float(np.sum(np.log(w)))
        ok = False
        for _ in range(50):
            zc, tc = z + stepsize * sz, t + stepsize * st
            xc = x0 + np.tensordot(zc, mats, axes=(0, 0)) - tc * eye
            wc = np.linalg.eigvalsh(symlin.sym(xc))
            if wc[0] > 0:
                fc = -tc - mu * float(np.sum(np.log(wc)))
                if fc <= f_curr + 1e-13 * (1 + abs(f_curr)):
                    ok = True
                    break
            stepsize *= 0.5
        if not ok:
            break
        z, t = z + stepsize * sz, t + stepsize * st
        if float(grad @ step) > -1e-12 * (1 + abs(f_curr)):
            break
    return z, t


# ---------------------------------------------------------------------------
# exactness certification


def purify_to_extreme(problem: QcqpProblem, cone: SpectrahedralCone,
                      x_mat: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Walk the optimizer to an extreme point of the optimal face.

    Moves along directions that keep the span, the normalization, the
    objective and the image fixed, stepping to the PSD boundary each
    time; every step drops the rank and leaves the objective unchanged.
    """
    x = symlin.span_project(cone.span_basis, symlin.sym(x_mat))
    basis = cone.span_basis
    for _ in range(problem.n * (problem.n + 1)):
        dec = symlin.eig_sym(x)
        cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
        rank = int(np.count_nonzero(dec.values > cut))
        if rank <= 1:
            break
        h = dec.vectors[:, dec.values > cut]
        p = h @ h.T
        image_cols = np.array([symlin.vec(s - p @ s @ p) for s in basis]).T
        row_b = np.array([float(np.tensordot(problem.normalization, s)) for s in basis])
        row_s = np.array([float(np.tensordot(problem.cost, s)) for s in basis])
        constraint = np.vstack([image_cols, row_b[None, :], row_s[None, :]])
        null = symlin.nullspace(constraint)
        if null.shape[1] == 0:
            break
        direction = np.tensordot(null[:, 0], basis, axes=(0, 0))
        direction = symlin.sym(p @ direction @ p)
        if np.linalg.norm(direction) < 1e-12:
            break
        x_new = _step_to_boundary(x, direction, h)
        if x_new is None:
            break
        x = x_new
    return x


def _step_to_boundary(x, direction, h):
    """Largest step x + t * direction staying PSD (within the face image)."""
    xr = symlin.sym(h.T @ x @ h)
    dr = symlin.sym(h.T @ direction @ h)
    if np.linalg.norm(dr) < 1e-12:
        return None
    w, v = np.linalg.eigh(xr)
    if w.min() <= 0:
        w = np.maximum(w, 1e-14)
    half = (v / np.sqrt(w)) @ v.T
    g = symlin.sym(half @ dr @ half)
    lam = np.linalg.eigvalsh(g)
    t_pos = 1.0 / abs(lam[0]) if lam[0] < -1e-12 else np.inf
    t_neg = 1.0 / lam[-1] if lam[-1] > 1e-12 else np.inf
    if np.isinf(t_pos) and np.isinf(t_neg):
        return None
    t = t_pos if t_pos <= t_neg else -t_neg
    return symlin.sym(x + t * direction)


def rank1_feasible_samples(problem: QcqpProblem, count: int,
                           rng: np.random.Generator, iters: int = 50):
    """Newton-refined samples of {x : x^T A_i x = 0, x^T B x = 1}."""
    n = problem.n
    out = []
    for _ in range(count):
        x = rng.standard_normal(n)
        ok = False
        for _ in range(iters):
            f = np.array([x @ a @ x for a in problem.constraints]
                         + [x @ problem.normalization @ x - 1.0])
            if np.abs(f).max() < 1e-10:
                ok = True
                break
            jac = np.vstack([2.0 * (a @ x) for a in problem.constraints]
                            + [2.0 * (problem.normalization @ x)])
            step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
            x = x + step
            if np.linalg.norm(x) > 1e8:
                break
        if ok:
            out.append(x)
    return out


def certify_exactness(problem: QcqpProblem,
                      cone: SpectrahedralCone | None = None,
                      gap_samples: int = 100_000, seed: int = 0,
                      tol: float = DEFAULT_TOL) -> ExactnessCertificate:
    """Solve the relaxation and certify whether it is exact.

    The optimizer is purified to an extreme point of the optimal face; a
    rank-1 extreme point yields the solution vector directly.  When the
    induced cone carries a complete rank-1 certificate, exactness holds
    structurally and the status says so.  A higher-rank extreme point
    triggers sampling of the rank-1 feasible set: "gap-detected" is a
    sampled claim, never a proof, and "inconclusive" is returned when
    sampling cannot tell.
    """
    sol = solve_relaxation(problem, tol)
    if sol.status in ("infeasible", "unbounded", "max-iter"):
        return ExactnessCertificate(status="inconclusive" if sol.status == "max-iter"
                                    else sol.status,
                                    x_opt=None, relaxed_value=sol.objective,
                                    extracted_value=np.nan)
    if cone is None:
        cone = induced_cone(problem)
    else:
        work = induced_cone(problem)
        for s in cone.span_basis:
            if symlin.span_distance(work.span_basis, s) > 1e-7:
                raise InvalidInputError("provided cone does not match the constraints")
        if cone.dim != work.dim:
            raise InvalidInputError("provided cone does not match the constraints")
    certified = len(cone.generators) > 0 and certificate_complete(cone)
    x_pure = purify_to_extreme(problem, cone, sol.x_mat, tol)
    dec = symlin.eig_sym(x_pure)
    cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
    rank = int(np.count_nonzero(dec.values > cut))
    if rank == 1:
        x_opt = dec.vectors[:, 0] * np.sqrt(max(dec.values[0], 0.0))
        extracted = float(x_opt @ problem.cost @ x_opt)
        status = "exact-by-rog" if certified else "exact-with-solution"
        return ExactnessCertificate(status=status, x_opt=x_opt,
                                    relaxed_value=sol.objective,
                                    extracted_value=extracted)
    if certified:
        # structural exactness, even though this particular purification
        # path stalled above rank 1
        return ExactnessCertificate(status="exact-by-rog", x_opt=None,
                                    relaxed_value=sol.objective,
                                    extracted_value=np.nan)
    rng = np.random.default_rng(seed)
    samples = rank1_feasible_samples(problem, gap_samples, rng)
    if not samples:
        return ExactnessCertificate(status="inconclusive", x_opt=None,
                                    relaxed_value=sol.objective,
                                    extracted_value=np.nan)
    values = [float(x @ problem.cost @ x) for x in samples]
    best = min(values)
    if best > sol.objective + 1e-6 * (1.0 + abs(sol.objective)):
        return ExactnessCertificate(status="gap-detected", x_opt=None,
                                    relaxed_value=sol.objective,
                                    extracted_value=best)
    x_best = samples[int(np.argmin(values))]
    if best <= sol.objective + 1e-5 * (1.0 + abs(sol.objective)):
        return ExactnessCertificate(status="exact-with-solution", x_opt=x_best,
                                    relaxed_value=sol.objective,
                                    extracted_value=best)
    return ExactnessCertificate(status="inconclusive", x_opt=None,
                                relaxed_value=sol.objective,
                                extracted_value=best)
