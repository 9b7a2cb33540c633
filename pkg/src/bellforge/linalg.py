"""Dense complex linear algebra: Takagi and Bloch-Messiah factorizations.

Matrices are plain ``numpy`` arrays; every public entry point validates
finiteness and shape before doing work. The Takagi routine follows the
standard SVD-plus-phase-correction construction, with an explicit
square-root correction on degenerate singular-value blocks so that the
factor stays unitary when values collide.
"""

from dataclasses import dataclass
from itertools import groupby

import numpy as np
from scipy.linalg import block_diag, sqrtm

from .config import DEFAULT, Tolerances
from .errors import NonFiniteEntry, NonSymmetricInput, NotSymplectic

__all__ = [
    "TakagiFactorization",
    "BlochMessiah",
    "takagi_decompose",
    "bloch_messiah",
    "compose_bloch_messiah",
]


def _as_complex_matrix(mat, name="matrix"):
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSymmetricInput(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise NonFiniteEntry(f"{name} contains non-finite entries")
    return arr


def _sign_normalize(w):
    """Flip column signs so the dominant entry of each column leans positive.

    Only +/-1 factors are applied, which leaves W diag(d) W^T unchanged while
    making trivial inputs (zero, non-negative diagonal) return the identity.
    """
    w = w.copy()
    for k in range(w.shape[1]):
        idx = np.argmax(np.abs(w[:, k]))
        pivot = w[idx, k]
        if pivot.real < 0 or (pivot.real == 0 and pivot.imag < 0):
            w[:, k] = -w[:, k]
    return w


@dataclass(frozen=True)
class TakagiFactorization:
    """Factorization S = W diag(values) W^T with unitary W, values >= 0 descending."""

    w: np.ndarray
    values: np.ndarray

    def reconstruct(self):
        return self.w @ np.diag(self.values) @ self.w.T


def takagi_decompose(mat, tol: Tolerances = DEFAULT) -> TakagiFactorization:
    """Takagi factorization of a complex symmetric matrix.

    Args:
        mat: square complex symmetric array.
        tol: tolerance bundle; ``tol.symmetry`` bounds the admitted asymmetry.

    Returns:
        TakagiFactorization with values sorted descending. The factor within
        a degenerate value block is not unique; only the reconstruction
        identity is guaranteed.

    Raises:
        NonSymmetricInput: asymmetry exceeds ``tol.symmetry`` (relative).
        NonFiniteEntry: NaN or Inf entries.
    """
    s = _as_complex_matrix(mat, "takagi input")
    n = s.shape[0]
    scale = max(np.linalg.norm(s), 1.0)
    if np.linalg.norm(s - s.T) > tol.symmetry * scale:
        raise NonSymmetricInput(
            f"asymmetry {np.linalg.norm(s - s.T):.3e} exceeds {tol.symmetry:.1e} (relative)"
        )
    s = (s + s.T) / 2.0

    if not np.any(s):
        return TakagiFactorization(w=np.eye(n, dtype=np.complex128), values=np.zeros(n))

    if np.allclose(s.imag, 0.0, atol=tol.symmetry * scale):
        # Real symmetric: eigendecomposition plus a phase per negative eigenvalue.
        lam, u = np.linalg.eigh(s.real)
        values = np.abs(lam)
        phases = np.where(lam >= 0, 1.0 + 0.0j, 1.0j)
        w = u.astype(np.complex128) @ np.diag(phases)
        order = np.argsort(values)[::-1]
        return TakagiFactorization(w=_sign_normalize(w[:, order]), values=values[order])

    v, values, wh = np.linalg.svd(s)
    w_right = wh.conj().T
    # Group (nearly) equal singular values; within each group the SVD basis is
    # only defined up to a unitary, fixed here by the principal square root.
    rounded = np.round(values, 12)
    blocks = []
    start = 0
    for _, grp in groupby(rounded):
        size = len(list(grp))
        blocks.append(list(range(start, start + size)))
        start += size
    qs = []
    for idx in blocks:
        m = v[:, idx].T @ w_right[:, idx]
        qs.append(sqrtm(m) if len(idx) > 1 else np.sqrt(m))
    w = v @ np.conj(block_diag(*qs))
    return TakagiFactorization(w=_sign_normalize(w), values=values)


def _symplectic_residuals(passive, active):
    n = passive.shape[0]
    r1 = passive @ passive.conj().T - active @ active.conj().T - np.eye(n)
    r2 = passive @ active.T - active @ passive.T
    return np.linalg.norm(r1), np.linalg.norm(r2)


@dataclass(frozen=True)
class BlochMessiah:
    """Passive/squeeze/passive normal form of a mode transform.

    ``first_passive`` acts first, then single-mode squeezers with parameters
    ``squeezes`` (>= 0, descending), then ``second_passive``.
    """

    first_passive: np.ndarray
    squeezes: np.ndarray
    second_passive: np.ndarray


def bloch_messiah(passive, active, tol: Tolerances = DEFAULT) -> BlochMessiah:
    """Decompose a Bogoliubov pair into interferometer/squeezers/interferometer.

    Args:
        passive: the particle-conserving block (square, invertible for any
            physical transform).
        active: the pair-creating block of the same shape.
        tol: tolerance bundle; ``tol.symplectic`` bounds the admitted
            constraint residual.

    Returns:
        BlochMessiah factors; recomposition via :func:`compose_bloch_messiah`
        reproduces the input within ``tol.reconstruction`` (relative).

    Raises:
        NotSymplectic: constraint residual beyond ``tol.symplectic``, or the
            extracted squeeze amplitudes are not strictly below 1.
    """
    e = _as_complex_matrix(passive, "passive block")
    f = _as_complex_matrix(active, "active block")
    if e.shape != f.shape:
        raise NonSymmetricInput("passive and active blocks must share a shape")
    r1, r2 = _symplectic_residuals(e, f)
    if max(r1, r2) > tol.symplectic * max(1.0, np.linalg.norm(e)):
        raise NotSymplectic(f"constraint residuals ({r1:.3e}, {r2:.3e}) exceed {tol.symplectic:.1e}")

    m = -np.linalg.solve(e, f)
    m = (m + m.T) / 2.0  # symmetric up to the symplectic residual
    fac = takagi_decompose(m, tol)
    t = fac.values
    if np.any(t >= 1.0):
        raise NotSymplectic(f"squeeze amplitude {t.max():.6f} >= 1; input is not a mode transform")
    r = np.arctanh(t)
    first = e @ fac.w @ np.diag(1.0 / np.cosh(r))
    second = fac.w.conj().T
    return BlochMessiah(first_passive=first, squeezes=r, second_passive=second)


def compose_bloch_messiah(first_passive, squeezes, second_passive):
    """Recompose Bloch-Messiah factors into a (passive, active) pair."""
    v = np.asarray(first_passive, dtype=np.complex128)
    w = np.asarray(second_passive, dtype=np.complex128)
    r = np.asarray(squeezes, dtype=np.float64)
    passive = v @ np.diag(np.cosh(r)) @ w
    active = -v @ np.diag(np.sinh(r)) @ w.conj()
    return passive, active
