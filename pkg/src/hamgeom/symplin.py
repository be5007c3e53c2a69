"""Linear symplectic algebra on R^d.

Subspaces are carried as column bases.  Containment and equality of
subspaces are decided by rank comparison at a relative tolerance, never by
comparing bases, since bases are not unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import null_space

DEFAULT_TOL = 1e-10


class NotSymplecticError(ValueError):
    pass


def _rank(a: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


class Subspace:
    """Linear subspace of R^d spanned by the columns of ``basis``."""

    def __init__(self, basis, ambient_dim: int | None = None, tol: float = DEFAULT_TOL):
        b = np.asarray(basis, dtype=float)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        if ambient_dim is not None and b.size == 0:
            b = np.zeros((ambient_dim, 0))
        if ambient_dim is not None and b.shape[0] != ambient_dim:
            raise ValueError(f"basis vectors have length {b.shape[0]}, expected {ambient_dim}")
        if _rank(b, tol) != b.shape[1]:
            raise ValueError("basis vectors are linearly dependent")
        self.basis = b
        self.basis.setflags(write=False)

    @classmethod
    def span(cls, *vectors, ambient_dim: int | None = None) -> "Subspace":
        if not vectors:
            if ambient_dim is None:
                raise ValueError("ambient dimension needed for the zero subspace")
            return cls(np.zeros((ambient_dim, 0)))
        return cls(np.column_stack(vectors), ambient_dim)

    @classmethod
    def coordinate(cls, d: int, indices) -> "Subspace":
        """Span of the standard basis vectors ``e_i`` for ``i`` in ``indices``."""
        return cls(np.eye(d)[:, list(indices)].reshape(d, -1), d)

    @classmethod
    def whole(cls, d: int) -> "Subspace":
        return cls(np.eye(d))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        if other.dim == 0:
            return True
        return _rank(np.hstack([self.basis, other.basis]), tol) == self.dim

    def equals(self, other: "Subspace", tol: float = DEFAULT_TOL) -> bool:
        return self.dim == other.dim and self.contains(other, tol) and other.contains(self, tol)

    def intersection(self, other: "Subspace", tol: float = DEFAULT_TOL) -> "Subspace":
        d = self.ambient_dim
        if self.dim == 0 or other.dim == 0:
            return Subspace(np.zeros((d, 0)))
        # a·A = b·B  <=>  [A, -B] (a; b) = 0
        kernel = null_space(np.hstack([self.basis, -other.basis]), rcond=tol)
        vecs = self.basis @ kernel[: self.dim]
        if vecs.shape[1] == 0:
            return Subspace(np.zeros((d, 0)))
        q, r = np.linalg.qr(vecs)
        return Subspace(q[:, : _rank(vecs, tol)])

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


class SymplecticFormMatrix:
    """A skew-symmetric, nondegenerate matrix ``omega`` with ``omega(v, w) = v^T Ω w``."""

    def __init__(self, matrix, tol: float = DEFAULT_TOL):
        m = np.array(matrix, dtype=float)
        if not is_symplectic_form(m, tol):
            raise NotSymplecticError("matrix is not skew-symmetric and nondegenerate")
        # store the exactly skew part
        self.matrix = 0.5 * (m - m.T)
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v, w) -> float:
        return float(np.asarray(v) @ self.matrix @ np.asarray(w))

    def __repr__(self) -> str:
        return f"SymplecticFormMatrix(dim={self.dim})"


def _as_matrix(omega) -> np.ndarray:
    return omega.matrix if isinstance(omega, SymplecticFormMatrix) else np.asarray(omega, dtype=float)


def standard_form(n: int) -> SymplecticFormMatrix:
    """The block matrix [[0, I_n], [-I_n, 0]] on R^{2n}, ordered (q_1..q_n, p_1..p_n)."""
    if n < 1:
        raise ValueError("half-dimension must be at least 1")
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return SymplecticFormMatrix(np.block([[zero, eye], [-eye, zero]]))


def is_symplectic_form(matrix, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        return False
    if np.max(np.abs(m + m.T)) > tol:
        return False
    return bool(np.linalg.svd(m, compute_uv=False)[-1] > tol)


def _check_dims(omega: np.ndarray, w: Subspace) -> None:
    if omega.shape[0] != w.ambient_dim:
        raise ValueError(f"form acts on R^{omega.shape[0]}, subspace lives in R^{w.ambient_dim}")


def symplectic_orthogonal(omega, w: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """W^⊥ = {v : Ω(v, w) = 0 for all w in W}, the kernel of W^T Ω^T."""
    om = _as_matrix(omega)
    _check_dims(om, w)
    if w.dim == 0:
        return Subspace.whole(om.shape[0])
    # Ω(v, w) = v^T Ω w, so the constraints are (Ω w_i)^T v = 0
    constraints = (om @ w.basis).T
    return Subspace(null_space(constraints, rcond=tol), om.shape[0])


class SubspaceKind(str, Enum):
    SYMPLECTIC = "symplectic"
    ISOTROPIC = "isotropic"
    COISOTROPIC = "coisotropic"
    LAGRANGIAN = "lagrangian"
    GENERIC = "generic"


def classify_subspace(omega, w: Subspace, tol: float = DEFAULT_TOL) -> SubspaceKind:
    """Classify W by its relation to W^⊥.

    Checked in order: lagrangian (W = W^⊥), symplectic (W ∩ W^⊥ = 0 with
    W ≠ 0; this includes W = V), isotropic (W ⊆ W^⊥, includes W = 0),
    coisotropic (W^⊥ ⊆ W), otherwise generic.
    """
    perp = symplectic_orthogonal(omega, w, tol)
    if w.equals(perp, tol):
        return SubspaceKind.LAGRANGIAN
    if w.dim > 0 and w.intersection(perp, tol).dim == 0:
        return SubspaceKind.SYMPLECTIC
    if perp.contains(w, tol):
        return SubspaceKind.ISOTROPIC
    if w.contains(perp, tol):
        return SubspaceKind.COISOTROPIC
    return SubspaceKind.GENERIC


def darboux_basis(omega, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Basis B (as columns) with B^T Ω B equal to the standard form.

    Symplectic Gram-Schmidt: repeatedly take the pair of remaining vectors
    with the largest pairing, scale it to pairing 1 and project everything
    else onto the Ω-orthogonal complement of the pair.  Columns come out in
    (q_1..q_n, p_1..p_n) order.
    """
    om = _as_matrix(omega)
    if om.ndim != 2 or om.shape[0] != om.shape[1]:
        raise ValueError("expected a square matrix")
    d = om.shape[0]
    if d % 2 or np.max(np.abs(om + om.T), initial=0.0) > tol:
        raise NotSymplecticError("not symplectic: odd dimension or not skew")
    scale = np.max(np.abs(om), initial=0.0)
    vecs = [v for v in np.eye(d)]
    qs, ps = [], []
    while vecs:
        v = np.array(vecs)
        pair = v @ om @ v.T
        i, j = np.unravel_index(np.argmax(np.abs(pair)), pair.shape)
        if scale == 0 or abs(pair[i, j]) <= tol * scale:
            raise NotSymplecticError("not symplectic: degenerate form")
        e = vecs[i]
        f = vecs[j] / pair[i, j]
        rest = [vecs[k] for k in range(len(vecs)) if k not in (i, j)]
        projected = []
        for u in rest:
            # twice: the second pass removes the round-off left by the first
            for _ in range(2):
                u = u - (u @ om @ f) * e + (u @ om @ e) * f
            projected.append(u)
        qs.append(e)
        ps.append(f)
        vecs = projected
    return np.column_stack(qs + ps)


def darboux_residual(omega, basis: np.ndarray) -> float:
    om = _as_matrix(omega)
    n = om.shape[0] // 2
    return float(np.max(np.abs(basis.T @ om @ basis - standard_form(n).matrix)))


def annihilator(w: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """W° = {α in V* : α(w) = 0 for all w in W}, in the dual coordinate basis."""
    d = w.ambient_dim
    if w.dim == 0:
        return Subspace.whole(d)
    return Subspace(null_space(w.basis.T, rcond=tol), d)


@dataclass(frozen=True)
class ReducedSpace:
    """The reduction W / (W ∩ W^⊥) with its induced form.

    ``representatives`` holds, as columns, vectors of W whose classes form
    a basis of the quotient; ``form`` is Ω evaluated on them.
    """

    dim: int
    kernel: Subspace
    representatives: np.ndarray
    form: np.ndarray


def reduce(omega, w: Subspace, tol: float = DEFAULT_TOL) -> ReducedSpace:
    om = _as_matrix(omega)
    _check_dims(om, w)
    d = om.shape[0]
    perp = symplectic_orthogonal(om, w, tol)
    kernel = w.intersection(perp, tol)
    # complete the kernel to a basis of W greedily with W's own basis vectors,
    # which keeps coordinate subspaces in their natural order
    chosen = []
    current = kernel.basis
    for col in w.basis.T:
        trial = np.column_stack([current, col]) if current.size else col.reshape(d, 1)
        if _rank(trial, tol) > current.shape[1]:
            chosen.append(col)
            current = trial
    reps = np.column_stack(chosen) if chosen else np.zeros((d, 0))
    form = reps.T @ om @ reps
    form = 0.5 * (form - form.T)
    return ReducedSpace(dim=reps.shape[1], kernel=kernel, representatives=reps, form=form)
