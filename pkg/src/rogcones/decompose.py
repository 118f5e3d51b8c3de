"""Rank-1 decomposition engines.

Four routes, all returning a :class:`Decomposition` whose atom count
equals the matrix rank:

* a generic peeling loop (``carath_decompose``) that repeatedly extracts
  an extreme ray from the face of the current iterate and steps to the
  PSD boundary,
* compositional recursions over the construction tree for direct sums,
  full extensions and intertwinings,
* a shift-invariance (Prony-type) node solver for block-Hankel matrices,
* a unitary spectral factorization for complex block-Toeplitz matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import symlin
from .cone_model import SpectrahedralCone, membership
from .errors import (InvalidInputError, NumericalError,
                     OracleUnavailableError)
from .symlin import DEFAULT_TOL

_LEAF_ORACLES = ("full_psd", "diagonal", "hankel", "codim1", "cross_ratio")
_WRAPPERS = ("transform", "reduce", "chordal", "tridiag")


@dataclass
class RankOneAtom:
    weight: float
    vector: np.ndarray  # unit vector

    def matrix(self) -> np.ndarray:
        return self.weight * symlin.outer(self.vector)


@dataclass
class Decomposition:
    atoms: list[RankOneAtom]
    residual: float

    def reconstruct(self, n: int | None = None) -> np.ndarray:
        if not self.atoms:
            if n is None:
                raise InvalidInputError("empty decomposition needs a size")
            return np.zeros((n, n))
        return sum(a.matrix() for a in self.atoms)


def _as_decomposition(weights, vectors, x_mat) -> Decomposition:
    atoms = []
    for w, v in zip(weights, vectors):
        nrm = np.linalg.norm(v)
        if w * nrm * nrm < 1e-14:
            continue
        atoms.append(RankOneAtom(weight=float(w * nrm * nrm), vector=v / nrm))
    total = sum(a.matrix() for a in atoms) if atoms else np.zeros_like(x_mat)
    residual = float(np.linalg.norm(x_mat - total))
    return Decomposition(atoms=atoms, residual=residual)


# ---------------------------------------------------------------------------
# dispatcher


def decompose(cone: SpectrahedralCone, x_mat: np.ndarray,
              tol: float = DEFAULT_TOL) -> Decomposition:
    """Write X in K as a sum of rank(X) rank-1 elements of K."""
    x_mat = np.asarray(x_mat)
    kind = cone.expr.kind if cone.expr is not None else None
    if kind == "block_toeplitz":
        return decompose_block_toeplitz(x_mat, cone.expr.params["n"],
                                        cone.expr.params.get("m", 1), tol)
    if kind == "hankel":
        return decompose_hankel(x_mat, cone.expr.params["n"],
                                cone.expr.params.get("m", 1), tol, cone=cone)
    if kind == "direct_sum":
        return _decompose_direct_sum(cone, x_mat, tol)
    if kind == "full_ext":
        return decompose_full_extension(cone, x_mat, tol)
    if kind == "intertwine":
        return decompose_intertwining(cone, x_mat, tol)
    if kind in _WRAPPERS:
        return _decompose_wrapped(cone, x_mat, tol)
    return carath_decompose(cone, x_mat, tol)


def _decompose_wrapped(cone, x_mat, tol):
    child = cone.expr.children[0]
    if cone.expr.kind == "transform":
        a = cone.expr.aux.get("matrix")
        if a is None:
            a = np.asarray(cone.expr.params["matrix"], dtype=float)
        ainv = np.linalg.inv(a)
        inner = _decompose_checked(child, symlin.sym(ainv @ x_mat @ ainv.conj().T), tol)
        return _as_decomposition([at.weight for at in inner.atoms],
                                 [a @ at.vector for at in inner.atoms], x_mat)
    if cone.expr.kind == "reduce":
        b = cone.expr.aux.get("embedding")
        if b is None:
            b = np.asarray(cone.expr.params["embedding"], dtype=float)
        inner = _decompose_checked(child, symlin.sym(b @ x_mat @ b.conj().T), tol)
        return _as_decomposition([at.weight for at in inner.atoms],
                                 [b.conj().T @ at.vector for at in inner.atoms], x_mat)
    # chordal / tridiag wrap an equal cone in the same coordinates
    inner = _decompose_checked(child, x_mat, tol)
    return _as_decomposition([at.weight for at in inner.atoms],
                             [at.vector for at in inner.atoms], x_mat)


def _decompose_checked(cone, x_mat, tol):
    dec = decompose(cone, x_mat, tol)
    return dec


# ---------------------------------------------------------------------------
# generic peeling loop


def carath_decompose(cone: SpectrahedralCone, x_mat: np.ndarray,
                     tol: float = DEFAULT_TOL, max_retries: int = 8
                     ) -> Decomposition:
    """Peel extreme rays until nothing is left.

    Each round finds a rank-1 element E = x x^T of the cone inside the
    face of the current iterate and removes mu* E with the largest mu*
    keeping the iterate PSD (mu* = 1 / x^T X^+ x); the rank then drops by
    exactly one.  A step that fails to drop the rank is retried with a
    different ray.
    """
    x_mat = np.asarray(x_mat, dtype=cone.span_basis.dtype)
    if not membership(cone, x_mat, max(tol, 1e-7)):
        raise InvalidInputError("matrix is not a member of the cone")
    current = symlin.span_project(cone.span_basis, symlin.sym(x_mat))
    weights: list[float] = []
    vectors: list[np.ndarray] = []
    rank = symlin.numeric_rank(current, tol)
    mu_trace: list[float] = []
    while rank > 0:
        dec = symlin.eig_sym(current)
        cut = tol * max(1.0, float(np.abs(dec.values).max()))
        h = dec.vectors[:, dec.values > cut]
        pinv = symlin.pseudo_inverse(current, tol)
        accepted = False
        for attempt in range(max_retries):
            x = extreme_ray_oracle(cone, h, x_current=current, attempt=attempt,
                                   tol=tol)
            if x is None:
                continue
            x = x / np.linalg.norm(x)
            denom = float(np.real(np.vdot(x, pinv @ x)))
            if denom <= tol:
                continue
            mu = 1.0 / denom
            candidate = symlin.sym(current - mu * symlin.outer(x))
            new_rank = symlin.numeric_rank(candidate, tol)
            if new_rank >= rank or not symlin.psd_check(candidate, 10 * tol):
                mu_trace.append(mu)
                continue
            weights.append(mu)
            vectors.append(x)
            current = candidate
            rank = new_rank
            accepted = True
            break
        if not accepted:
            raise NumericalError(
                f"extreme-ray peeling stalled at rank {rank}; "
                f"rejected steps mu={mu_trace}")
    return _as_decomposition(weights, vectors, x_mat)


# ---------------------------------------------------------------------------
# extreme-ray oracle


def extreme_ray_oracle(cone: SpectrahedralCone, h: np.ndarray,
                       x_current: np.ndarray | None = None, attempt: int = 0,
                       tol: float = DEFAULT_TOL) -> np.ndarray | None:
    """A nonzero x in col(h) with x x^T in the cone's span, or None.

    ``h`` is an orthonormal column basis of the face image.  ``attempt``
    selects among candidates when several rays are available.  Combinator
    cones delegate to the compositional decomposition of the current
    iterate.
    """
    if cone.expr is None:
        raise OracleUnavailableError("cone carries no construction expression")
    kind = cone.expr.kind
    if h.shape[1] == 0:
        raise InvalidInputError("face is zero")
    if kind == "full_psd":
        return h[:, attempt % h.shape[1]]
    if kind == "diagonal":
        hits = _coordinates_inside(h, tol)
        if not hits:
            return None
        e = np.zeros(cone.n)
        e[hits[attempt % len(hits)]] = 1.0
        return e
    if kind == "codim1":
        return _codim1_ray(cone, h, attempt, tol)
    if kind == "cross_ratio":
        return _cross_ratio_ray(cone, h, attempt, tol)
    if kind == "hankel":
        cands = _hankel_rays(cone.expr.params["n"], cone.expr.params.get("m", 1),
                             h, cone, tol)
        if not cands:
            return None
        return cands[attempt % len(cands)]
    if kind in _WRAPPERS:
        return _wrapped_ray(cone, h, x_current, attempt, tol)
    if kind == "direct_sum":
        return _direct_sum_ray(cone, h, x_current, attempt, tol)
    if kind in ("full_ext", "intertwine"):
        if x_current is None:
            raise InvalidInputError("composite oracle needs the current iterate")
        dec = decompose(cone, x_current, tol)
        if not dec.atoms:
            return None
        return dec.atoms[attempt % len(dec.atoms)].vector
    raise OracleUnavailableError(f"no extreme-ray rule for cone kind {kind!r}")


def _coordinates_inside(h: np.ndarray, tol: float) -> list[int]:
    p = h @ h.conj().T
    return [i for i in range(h.shape[0]) if abs(p[i, i] - 1.0) <= 1e2 * tol]


def _codim1_ray(cone, h, attempt, tol):
    q = cone.expr.aux.get("Q")
    if q is None:
        q = np.asarray(cone.expr.params["Q"], dtype=float)
    qh = symlin.sym(h.T @ q @ h)
    dec = symlin.eig_sym(qh)
    cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
    pos = dec.values > cut
    neg = dec.values < -cut
    if pos.any() and neg.any():
        i = attempt % int(pos.sum())
        j = (attempt // max(int(pos.sum()), 1)) % int(neg.sum())
        u = dec.vectors[:, pos][:, i] / np.sqrt(dec.values[pos][i])
        v = dec.vectors[:, neg][:, j] / np.sqrt(-dec.values[neg][j])
        sign = -1.0 if (attempt % 2 == 1 and pos.sum() == 1 and neg.sum() == 1) else 1.0
        return h @ (u + sign * v)
    kernel = np.abs(dec.values) <= cut
    if kernel.any():
        return h @ dec.vectors[:, kernel][:, attempt % int(kernel.sum())]
    return None


def _cross_ratio_ray(cone, h, attempt, tol):
    planes = cone.expr.aux.get("planes")
    if planes is None:
        from .constructions import cross_ratio_planes
        planes = cross_ratio_planes(cone.expr.params["angles"])
    found = []
    for plane in planes:
        v = _subspace_intersection_vector(h, plane, tol)
        if v is not None:
            found.append(v)
    if not found:
        return None
    return found[attempt % len(found)]


def _subspace_intersection_vector(h, plane, tol):
    stacked = np.hstack([h, -plane])
    null = symlin.nullspace(stacked)
    if null.shape[1] == 0:
        return None
    v = h @ null[:h.shape[1], 0]
    if np.linalg.norm(v) < 1e-8:
        return None
    return v / np.linalg.norm(v)


def _wrapped_ray(cone, h, x_current, attempt, tol):
    child = cone.expr.children[0]
    kind = cone.expr.kind
    if kind == "transform":
        a = cone.expr.aux.get("matrix")
        if a is None:
            a = np.asarray(cone.expr.params["matrix"], dtype=float)
        ainv = np.linalg.inv(a)
        h_child = symlin.subspace_of_vectors((ainv @ h).T)
        x_child = None if x_current is None else symlin.sym(ainv @ x_current @ ainv.T)
        ray = extreme_ray_oracle(child, h_child, x_child, attempt, tol)
        return None if ray is None else a @ ray
    if kind == "reduce":
        b = cone.expr.aux.get("embedding")
        if b is None:
            b = np.asarray(cone.expr.params["embedding"], dtype=float)
        h_child = symlin.subspace_of_vectors((b @ h).T)
        x_child = None if x_current is None else symlin.sym(b @ x_current @ b.T)
        ray = extreme_ray_oracle(child, h_child, x_child, attempt, tol)
        return None if ray is None else b.T @ ray
    return extreme_ray_oracle(child, h, x_current, attempt, tol)


def _direct_sum_ray(cone, h, x_current, attempt, tol):
    n1, n2 = cone.expr.params["sizes"]
    k1, k2 = cone.expr.children
    pieces = []
    for lo, hi, child, other_lo, other_hi in (
            (0, n1, k1, n1, n1 + n2), (n1, n1 + n2, k2, 0, n1)):
        tail = h[other_lo:other_hi, :]
        null = symlin.nullspace(tail)
        if null.shape[1] == 0:
            continue
        sub = symlin.subspace_of_vectors((h @ null)[lo:hi, :].T)
        if sub.shape[1] == 0:
            continue
        x_child = None if x_current is None else x_current[lo:hi, lo:hi]
        pieces.append((lo, hi, child, sub, x_child))
    if not pieces:
        return None
    lo, hi, child, sub, x_child = pieces[attempt % len(pieces)]
    ray = extreme_ray_oracle(child, sub, x_child, attempt // len(pieces), tol)
    if ray is None and len(pieces) > 1:
        lo, hi, child, sub, x_child = pieces[(attempt + 1) % len(pieces)]
        ray = extreme_ray_oracle(child, sub, x_child, attempt // len(pieces), tol)
    if ray is None:
        return None
    out = np.zeros(cone.n, dtype=ray.dtype)
    out[lo:hi] = ray
    return out


# ---------------------------------------------------------------------------
# compositional recursions


def _decompose_direct_sum(cone, x_mat, tol):
    n1, n2 = cone.expr.params["sizes"]
    k1, k2 = cone.expr.children
    x_mat = np.asarray(x_mat)
    scale = 1.0 + float(np.linalg.norm(x_mat))
    if np.linalg.norm(x_mat[:n1, n1:]) > 1e3 * tol * scale:
        raise InvalidInputError("off-diagonal block is not zero")
    d1 = decompose(k1, symlin.sym(x_mat[:n1, :n1]), tol)
    d2 = decompose(k2, symlin.sym(x_mat[n1:, n1:]), tol)
    weights = [a.weight for a in d1.atoms] + [a.weight for a in d2.atoms]
    vectors = [np.concatenate([a.vector, np.zeros(n2)]) for a in d1.atoms]
    vectors += [np.concatenate([np.zeros(n1), a.vector]) for a in d2.atoms]
    return _as_decomposition(weights, vectors, x_mat)


def decompose_full_extension(cone: SpectrahedralCone, x_mat: np.ndarray,
                             tol: float = DEFAULT_TOL) -> Decomposition:
    """Decompose along a full extension: child block, coupled strip, tail.

    The leading block is decomposed by the child cone; the off-diagonal
    strip is matched by a least-squares lift of the child atoms; what the
    lift leaves in the trailing block is the PSD Schur complement, which
    splits by eigendecomposition into tail atoms.
    """
    if cone.expr is None or cone.expr.kind != "full_ext":
        raise InvalidInputError("cone was not built by full_extension")
    n1 = cone.expr.aux["head"]
    x_mat = symlin.sym(np.asarray(x_mat, dtype=float))
    child = cone.expr.children[0]
    x11 = x_mat[:n1, :n1]
    x12 = x_mat[:n1, n1:]
    x22 = x_mat[n1:, n1:]
    child_dec = decompose(child, x11, tol)
    vectors = []
    weights = []
    if child_dec.atoms:
        v_cols = np.array([a.vector * np.sqrt(a.weight) for a in child_dec.atoms]).T
        w_cols = (np.linalg.pinv(v_cols) @ x12).T
        for i in range(v_cols.shape[1]):
            u = np.concatenate([v_cols[:, i], w_cols[:, i]])
            vectors.append(u)
            weights.append(1.0)
        schur = symlin.sym(x22 - w_cols @ w_cols.T)
    else:
        if np.linalg.norm(x12) > 1e3 * tol * (1.0 + np.linalg.norm(x_mat)):
            raise InvalidInputError("strip block inconsistent with zero head")
        schur = symlin.sym(x22)
    dec = symlin.eig_sym(schur)
    cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
    for lam, z in zip(dec.values, dec.vectors.T):
        if lam > cut:
            vectors.append(np.concatenate([np.zeros(n1), z * np.sqrt(lam)]))
            weights.append(1.0)
    return _as_decomposition(weights, vectors, x_mat)


def decompose_intertwining(cone: SpectrahedralCone, x_mat: np.ndarray,
                           tol: float = DEFAULT_TOL) -> Decomposition:
    """Split along the glued face, then recurse into both children.

    The three-block Schur split writes X as a sum of two matrices living
    on the child faces; each child decomposes its share and the atoms are
    lifted back.  Atom counts add up to rank(X) because the split matches
    the rank split of X across the overlap.
    """
    if cone.expr is None or cone.expr.kind != "intertwine":
        raise InvalidInputError("cone was not built by intertwine")
    a, k, b = cone.expr.aux["blocks"]
    c1 = cone.expr.aux["c1"]
    c2 = cone.expr.aux["c2"]
    f1 = cone.expr.aux["f1"]
    f2 = cone.expr.aux["f2"]
    k1, k2 = cone.expr.children
    x_mat = symlin.span_project(cone.span_basis, symlin.sym(np.asarray(x_mat, dtype=float)))
    c1m, c2m = symlin.schur_split(x_mat, (a, k, b), max(tol, 1e-9))
    x1_block = np.zeros((a + k, a + k))
    x1_block[:a, :a] = x_mat[:a, :a]
    x1_block[:a, a:] = x_mat[:a, a:a + k]
    x1_block[a:, :a] = x_mat[a:a + k, :a]
    x1_block[a:, a:] = c1m
    x2_block = np.zeros((k + b, k + b))
    x2_block[:k, :k] = c2m
    x2_block[:k, k:] = x_mat[a:a + k, a + k:]
    x2_block[k:, :k] = x_mat[a + k:, a:a + k]
    x2_block[k:, k:] = x_mat[a + k:, a + k:]
    m1 = symlin.sym(c1 @ x1_block @ c1.T)
    m2 = symlin.sym(c2 @ x2_block @ c2.T)
    for child, m in ((k1, m1), (k2, m2)):
        if symlin.span_distance(child.span_basis, m) > 1e-6 * (1.0 + np.linalg.norm(m)):
            raise NumericalError("split landed outside a child cone")
    vectors: list[np.ndarray] = []
    weights: list[float] = []
    for child, m, f in ((k1, m1, f1), (k2, m2, f2)):
        sub = decompose(child, m, tol)
        for atom in sub.atoms:
            vectors.append(f @ atom.vector)
            weights.append(atom.weight)
    return _as_decomposition(weights, vectors, x_mat)


# ---------------------------------------------------------------------------
# block-Hankel nodes (Prony / shift invariance)


def _hankel_pattern_ok(x_mat, n, m, tol):
    x_mat = np.asarray(x_mat)
    scale = 1.0 + float(np.linalg.norm(x_mat))
    for i in range(n):
        for j in range(n):
            blk = x_mat[i * m:(i + 1) * m, j * m:(j + 1) * m]
            ref_i = min(i + j, n - 1)
            ref_j = i + j - ref_i
            ref = x_mat[ref_i * m:(ref_i + 1) * m, ref_j * m:(ref_j + 1) * m]
            if np.linalg.norm(blk - ref) > 1e3 * tol * scale:
                return False
            if np.linalg.norm(blk - blk.T) > 1e3 * tol * scale:
                return False
    return True


def _snap_moment_vector(v, n, m, t):
    blocks = v.reshape(n, m)
    powers = t ** np.arange(n)
    x = powers @ blocks / (powers @ powers)
    return np.kron(powers, x)


def _hankel_candidates(x_or_basis, n, m, tol, from_matrix):
    """Candidate atom directions (moment vectors) for a Hankel face/member."""
    if from_matrix:
        dec = symlin.eig_sym(x_or_basis)
        cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
        u = dec.vectors[:, dec.values > cut]
    else:
        u = x_or_basis
    r = u.shape[1]
    if r == 0:
        return [], []
    u_up = u[:-m, :]
    u_dn = u[m:, :]
    ker = symlin.nullspace(u_up, 1e-7)
    inf_dirs = []
    for j in range(ker.shape[1]):
        w = u @ ker[:, j]
        z = w[(n - 1) * m:]
        if np.linalg.norm(z) > 1e-8:
            vec_ = np.concatenate([np.zeros((n - 1) * m), z])
            inf_dirs.append(vec_ / np.linalg.norm(vec_))
    finite = []
    comp = symlin.nullspace(ker.T) if ker.shape[1] else np.eye(r)
    if comp.shape[1] > 0:
        a2 = u_up @ comp
        b2 = u_dn @ comp
        f_op = np.linalg.pinv(a2) @ b2
        vals, vecs = np.linalg.eig(f_op)
        order = np.argsort(vals.real)
        for idx in order:
            t = vals[idx]
            if abs(t.imag) > 1e-6 * (1.0 + abs(t.real)):
                continue
            c = (comp @ vecs[:, idx]).real
            v = u @ c
            if np.linalg.norm(v) < 1e-10:
                continue
            snapped = _snap_moment_vector(v, n, m, float(t.real))
            if np.linalg.norm(snapped) < 1e-10:
                continue
            finite.append((float(t.real), snapped / np.linalg.norm(snapped)))
    return finite, inf_dirs


def _hankel_rays(n, m, h, cone, tol):
    finite, inf_dirs = _hankel_candidates(h, n, m, tol, from_matrix=False)
    out = []
    p = h @ h.T
    for t, v in finite:
        if np.linalg.norm(v - p @ v) <= 1e-6 * np.linalg.norm(v):
            out.append(v)
    for v in inf_dirs:
        if np.linalg.norm(v - p @ v) <= 1e-6 * np.linalg.norm(v):
            out.append(v)
    return out


def decompose_hankel(x_mat: np.ndarray, n: int, m: int = 1,
                     tol: float = DEFAULT_TOL,
                     cone: SpectrahedralCone | None = None) -> Decomposition:
    """Node recovery for a PSD block-Hankel matrix.

    Finite nodes come from the shift-invariance eigenproblem on the
    column space; directions that truncate to zero are the node at
    infinity.  Atom weights are then solved by least squares.  When the
    node solve degenerates (clustered or saturated nodes) the generic
    peeling loop with the Hankel ray oracle takes over.
    """
    x_mat = symlin.sym(np.asarray(x_mat, dtype=float))
    if x_mat.shape != (n * m, n * m):
        raise InvalidInputError("matrix size does not match (n, m)")
    if not _hankel_pattern_ok(x_mat, n, m, tol):
        raise InvalidInputError("matrix is not block-Hankel")
    if not symlin.psd_check(x_mat, max(tol, 1e-7)):
        raise InvalidInputError("matrix is not positive semidefinite")
    rank = symlin.numeric_rank(x_mat, tol)
    if rank == 0:
        return Decomposition(atoms=[], residual=float(np.linalg.norm(x_mat)))
    finite, inf_dirs = _hankel_candidates(x_mat, n, m, tol, from_matrix=True)
    dirs = [v for _, v in finite] + inf_dirs
    result = _solve_weights(dirs, x_mat, tol) if len(dirs) == rank else None
    if result is not None:
        return result
    if cone is None:
        from .constructions import hankel_cone
        cone = hankel_cone(n, m)
    return carath_decompose(cone, x_mat, tol)


def _solve_weights(dirs, x_mat, tol):
    if not dirs:
        return None
    cols = np.array([symlin.vec(symlin.outer(v)) for v in dirs]).T
    w, *_ = np.linalg.lstsq(cols, symlin.vec(x_mat), rcond=None)
    if np.any(np.asarray(w) < -1e-7 * (1.0 + float(np.linalg.norm(x_mat)))):
        return None
    w = np.clip(np.real(w), 0.0, None)
    dec = _as_decomposition(w, dirs, x_mat)
    if dec.residual > 1e-7 * (1.0 + float(np.linalg.norm(x_mat))):
        return None
    return dec


# ---------------------------------------------------------------------------
# complex block-Toeplitz spectral factorization


def _toeplitz_pattern_ok(t_mat, n, m, tol):
    scale = 1.0 + float(np.linalg.norm(t_mat))
    for i in range(n):
        for j in range(n):
            blk = t_mat[i * m:(i + 1) * m, j * m:(j + 1) * m]
            d = i - j
            ri, rj = (d, 0) if d >= 0 else (0, -d)
            ref = t_mat[ri * m:(ri + 1) * m, rj * m:(rj + 1) * m]
            if np.linalg.norm(blk - ref) > 1e3 * tol * scale:
                return False
    return np.linalg.norm(t_mat - t_mat.conj().T) <= 1e3 * tol * scale


def decompose_block_toeplitz(t_mat: np.ndarray, n: int, m: int = 1,
                             tol: float = DEFAULT_TOL) -> Decomposition:
    """Split a PSD Hermitian block-Toeplitz matrix into phase atoms.

    Factor T = W W^*, solve the block shift W_lower = W_upper U for a
    unitary U (least squares followed by the polar projection), and
    diagonalize U; in the rotated factor every column has the geometric
    structure (v, v q, ..., v q^{n-1}) with |q| = 1.
    """
    t_mat = np.asarray(t_mat, dtype=complex)
    if t_mat.shape != (n * m, n * m):
        raise InvalidInputError("matrix size does not match (n, m)")
    if not _toeplitz_pattern_ok(t_mat, n, m, tol):
        raise InvalidInputError("matrix is not Hermitian block-Toeplitz")
    t_mat = symlin.sym(t_mat)
    if not symlin.psd_check(t_mat, max(tol, 1e-7)):
        raise InvalidInputError("matrix is not positive semidefinite")
    dec = symlin.eig_sym(t_mat)
    cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
    keep = dec.values > cut
    if not keep.any():
        return Decomposition(atoms=[], residual=float(np.linalg.norm(t_mat)))
    w_full = dec.vectors[:, keep] * np.sqrt(dec.values[keep])
    if n == 1:
        return _as_decomposition(np.ones(w_full.shape[1]), list(w_full.T), t_mat)
    w_up = w_full[:-m, :]
    w_lo = w_full[m:, :]
    u0 = np.linalg.pinv(w_up) @ w_lo
    p, _, qh = np.linalg.svd(u0)
    u = p @ qh
    shift_err = np.linalg.norm(w_up @ u - w_lo)
    if shift_err > 1e-6 * (1.0 + np.linalg.norm(w_lo)):
        raise NumericalError(
            f"unitary shift recovery failed (residual {shift_err:.2e})")
    tri, v = scipy.linalg.schur(u, output="complex")
    w_rot = w_full @ v
    return _as_decomposition(np.ones(w_rot.shape[1]), list(w_rot.T), t_mat)


# ---------------------------------------------------------------------------
# face certificate enrichment and random extreme rays (shared support)


def rays_spanning_face(cone: SpectrahedralCone, h: np.ndarray,
                       face_basis: np.ndarray, found, tol: float = DEFAULT_TOL):
    """Extra rank-1 directions of the face K ∩ L_n(H), kind permitting."""
    if cone.expr is None:
        return []
    kind = cone.expr.kind
    if kind == "full_psd":
        cols = [h[:, i] for i in range(h.shape[1])]
        cols += [h[:, i] + h[:, j] for i in range(h.shape[1])
                 for j in range(i + 1, h.shape[1])]
        return cols
    if kind == "diagonal":
        eye = np.eye(cone.n)
        return [eye[i] for i in _coordinates_inside(h, tol)]
    if kind == "codim1":
        return _codim1_face_rays(cone, h, tol)
    if kind == "cross_ratio":
        return _cross_ratio_face_rays(cone, h, tol)
    if kind == "hankel":
        return _hankel_rays(cone.expr.params["n"], cone.expr.params.get("m", 1),
                            h, cone, tol)
    if kind in _WRAPPERS:
        child = cone.expr.children[0]
        if kind == "transform":
            a = cone.expr.aux["matrix"]
            ainv = np.linalg.inv(a)
            sub = symlin.subspace_of_vectors((ainv @ h).T)
            rays = rays_spanning_face(child, sub, face_basis, [], tol)
            return [a @ r for r in rays]
        if kind == "reduce":
            b = cone.expr.aux["embedding"]
            sub = symlin.subspace_of_vectors((b @ h).T)
            rays = rays_spanning_face(child, sub, face_basis, [], tol)
            return [b.T @ r for r in rays]
        return rays_spanning_face(child, h, face_basis, found, tol)
    if kind == "direct_sum":
        n1, n2 = cone.expr.params["sizes"]
        k1, k2 = cone.expr.children
        out = []
        for lo, hi, child, other in ((0, n1, k1, slice(n1, n1 + n2)),
                                     (n1, n1 + n2, k2, slice(0, n1))):
            null = symlin.nullspace(h[other, :])
            if null.shape[1] == 0:
                continue
            sub = symlin.subspace_of_vectors((h @ null)[lo:hi, :].T)
            if sub.shape[1] == 0:
                continue
            sub_face = symlin.subspace_pencil_span(sub)
            for r in rays_spanning_face(child, sub, sub_face, [], tol):
                v = np.zeros(cone.n)
                v[lo:hi] = r
                out.append(v)
        return out
    return []


def _codim1_face_rays(cone, h, tol):
    q = cone.expr.aux["Q"]
    qh = symlin.sym(h.T @ q @ h)
    dec = symlin.eig_sym(qh)
    cut = tol * max(1.0, float(np.abs(dec.values).max(initial=0.0)))
    pos = dec.vectors[:, dec.values > cut]
    lp = dec.values[dec.values > cut]
    neg = dec.vectors[:, dec.values < -cut]
    ln = dec.values[dec.values < -cut]
    ker = dec.vectors[:, np.abs(dec.values) <= cut]
    rays = [h @ ker[:, i] for i in range(ker.shape[1])]
    if pos.shape[1] and neg.shape[1]:
        u_dirs = pos / np.sqrt(lp)
        v_dirs = neg / np.sqrt(-ln)
        rng = np.random.default_rng(777)
        for a in range(u_dirs.shape[1]):
            for b in range(v_dirs.shape[1]):
                rays.append(h @ (u_dirs[:, a] + v_dirs[:, b]))
                rays.append(h @ (u_dirs[:, a] - v_dirs[:, b]))
        for _ in range(4 * h.shape[1] * h.shape[1]):
            s = rng.standard_normal(u_dirs.shape[1])
            r = rng.standard_normal(v_dirs.shape[1])
            x = u_dirs @ (s / np.linalg.norm(s)) + v_dirs @ (r / np.linalg.norm(r))
            if ker.shape[1]:
                x = x + ker @ rng.standard_normal(ker.shape[1]) * 0.5
            rays.append(h @ x)
    return rays


def _cross_ratio_face_rays(cone, h, tol):
    planes = cone.expr.aux["planes"]
    rays = []
    p = h @ h.T
    for plane in planes:
        if np.linalg.norm(plane - p @ plane) <= 1e-7 * np.linalg.norm(plane):
            rays.extend([plane[:, 0], plane[:, 1], plane[:, 0] + plane[:, 1]])
            continue
        v = _subspace_intersection_vector(h, plane, tol)
        if v is not None:
            rays.append(v)
    return rays


def random_extreme_ray(cone: SpectrahedralCone, rng: np.random.Generator
                       ) -> np.ndarray:
    """A random unit vector on the cone's rank-1 variety (test support)."""
    if cone.expr is None:
        raise OracleUnavailableError("cone carries no construction expression")
    kind = cone.expr.kind
    n = cone.n
    if kind == "full_psd":
        x = rng.standard_normal(n)
    elif kind == "diagonal":
        x = np.zeros(n)
        x[rng.integers(n)] = 1.0
    elif kind == "hankel":
        nn, mm = cone.expr.params["n"], cone.expr.params.get("m", 1)
        v = rng.standard_normal(mm)
        if rng.random() < 0.1:
            x = np.concatenate([np.zeros((nn - 1) * mm), v])
        else:
            t = np.tan(rng.uniform(-1.2, 1.2))
            x = _moment_kron(t, nn, v)
    elif kind == "codim1":
        q = cone.expr.aux["Q"]
        dec = symlin.eig_sym(q)
        cut = 1e-8 * max(1.0, float(np.abs(dec.values).max()))
        u_dirs = dec.vectors[:, dec.values > cut] / np.sqrt(dec.values[dec.values > cut])
        v_dirs = dec.vectors[:, dec.values < -cut] / np.sqrt(-dec.values[dec.values < -cut])
        ker = dec.vectors[:, np.abs(dec.values) <= cut]
        s = rng.standard_normal(u_dirs.shape[1])
        r = rng.standard_normal(v_dirs.shape[1])
        x = u_dirs @ (s / np.linalg.norm(s)) + v_dirs @ (r / np.linalg.norm(r))
        if ker.shape[1] and rng.random() < 0.5:
            x = x + ker @ rng.standard_normal(ker.shape[1])
    elif kind == "cross_ratio":
        planes = cone.expr.aux["planes"]
        plane = planes[rng.integers(len(planes))]
        x = plane @ rng.standard_normal(2)
    elif kind == "ternary_quartic":
        from .constructions import _quadric_vector
        x = _quadric_vector(rng.standard_normal(3))
    elif kind == "block_toeplitz":
        nn, mm = cone.expr.params["n"], cone.expr.params.get("m", 1)
        v = rng.standard_normal(mm) + 1j * rng.standard_normal(mm)
        q = np.exp(1j * rng.uniform(0, 2 * np.pi))
        x = np.kron(q ** np.arange(nn), v)
    elif kind == "direct_sum":
        n1, n2 = cone.expr.params["sizes"]
        k1, k2 = cone.expr.children
        if rng.random() < n1 / (n1 + n2):
            x = np.concatenate([random_extreme_ray(k1, rng), np.zeros(n2)])
        else:
            x = np.concatenate([np.zeros(n1), random_extreme_ray(k2, rng)])
    elif kind == "full_ext":
        child = cone.expr.children[0]
        k = cone.expr.aux["tail"]
        if rng.random() < 0.2:
            x = np.concatenate([np.zeros(child.n), rng.standard_normal(k)])
        else:
            x = np.concatenate([random_extreme_ray(child, rng),
                                rng.standard_normal(k)])
    elif kind == "intertwine":
        k1, k2 = cone.expr.children
        if rng.random() < 0.5:
            x = cone.expr.aux["f1"] @ random_extreme_ray(k1, rng)
        else:
            x = cone.expr.aux["f2"] @ random_extreme_ray(k2, rng)
    elif kind == "transform":
        x = cone.expr.aux["matrix"] @ random_extreme_ray(cone.expr.children[0], rng)
    elif kind == "reduce":
        x = cone.expr.aux["embedding"].T @ random_extreme_ray(cone.expr.children[0], rng)
    elif kind in ("chordal", "tridiag"):
        x = random_extreme_ray(cone.expr.children[0], rng)
    elif kind == "moment":
        gens = cone.generators
        x = gens[rng.integers(len(gens))]
    else:
        raise OracleUnavailableError(f"no sampler for cone kind {kind!r}")
    nrm = np.linalg.norm(x)
    if nrm < 1e-9:
        return random_extreme_ray(cone, rng)
    return x / nrm


def _moment_kron(t, n, x):
    return np.kron(t ** np.arange(n), x)
