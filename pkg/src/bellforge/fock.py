"""Brute-force truncated Fock-space simulator.

This is the slow, trusted path: states are dense vectors over all photon
number tuples with bounded total, elements act by exponentiating their
(anti-Hermitian) truncated generators, and every other module's numerics is
validated against it. Squeezing elements are evolved with extra headroom
(``padding`` additional photons) so that amplitudes below the requested
cutoff are accurate despite truncation.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import expm_multiply

from .circuit import CircuitSpec
from .config import LIMITS
from .errors import CutoffTooSmall, DimensionExplosion, PatternModeClash

__all__ = ["FockTensor", "evolve_truncated", "project", "basis_tuples"]


@lru_cache(maxsize=64)
def _count_table(n_modes, cutoff):
    """T[k, t+1] = number of k-mode tuples with total <= t (0 for t < 0)."""
    t = np.zeros((n_modes + 1, cutoff + 2), dtype=np.int64)
    t[0, 1:] = 1  # the empty tuple
    for k in range(1, n_modes + 1):
        t[k, 1:] = np.cumsum(t[k - 1, 1:])
    return t


@lru_cache(maxsize=64)
def basis_tuples(n_modes, cutoff):
    """All photon-number tuples with total <= cutoff, in lexicographic order."""
    dim = int(_count_table(n_modes, cutoff)[n_modes, cutoff + 1])
    out = np.zeros((dim, n_modes), dtype=np.int64)
    row = 0
    state = [0] * n_modes

    def fill(pos, remaining):
        nonlocal row
        if pos == n_modes:
            out[row] = state
            row += 1
            return
        for v in range(remaining + 1):
            state[pos] = v
            fill(pos + 1, remaining - v)
        state[pos] = 0

    fill(0, cutoff)
    out.setflags(write=False)
    return out


def _ranks(tuples, n_modes, cutoff):
    """Vectorized lexicographic rank of each row of ``tuples`` in the basis.

    At position i with partial sum p and k positions remaining, the entries
    m < tuples[:, i] contribute sum_m count(k, cutoff - p - m) tuples, which
    telescopes through the cumulative table at level k + 1.
    """
    table = _count_table(n_modes, cutoff)
    tuples = np.atleast_2d(tuples)
    partial = np.zeros(len(tuples), dtype=np.int64)
    rank = np.zeros(len(tuples), dtype=np.int64)
    for i in range(n_modes):
        k = n_modes - 1 - i
        t_hi = cutoff - partial
        t_lo = t_hi - tuples[:, i]
        rank += table[k + 1, t_hi + 1] - table[k + 1, np.maximum(t_lo, -1) + 1]
        partial += tuples[:, i]
    return rank


@dataclass(frozen=True)
class FockTensor:
    """Dense amplitudes over all tuples with total photon number <= cutoff."""

    n_modes: int
    cutoff: int
    vec: np.ndarray
    unitarity_deficit: float = 0.0
    tail_weight: float = 0.0

    @property
    def basis(self):
        return basis_tuples(self.n_modes, self.cutoff)

    @property
    def totals(self):
        return self.basis.sum(axis=1)

    def amplitude(self, occupation):
        occ = np.asarray(occupation, dtype=np.int64)
        if occ.shape != (self.n_modes,) or occ.sum() > self.cutoff or np.any(occ < 0):
            return 0.0 + 0.0j
        return complex(self.vec[_ranks(occ[None, :], self.n_modes, self.cutoff)[0]])

    def norm(self):
        return float(np.linalg.norm(self.vec))

    def amplitude_map(self, threshold=0.0):
        basis = self.basis
        return {
            tuple(int(x) for x in basis[k]): complex(self.vec[k])
            for k in range(len(self.vec))
            if abs(self.vec[k]) > threshold
        }


def _generator(element, basis, n_modes, cutoff):
    """Sparse anti-Hermitian generator of one element on the truncated basis."""
    dim = len(basis)
    cols, rows, data = [], [], []
    p = element.params

    def push(mask, shift, amp):
        src = np.nonzero(mask)[0]
        if src.size == 0:
            return
        dst_tuples = basis[src] + shift
        rows.append(_ranks(dst_tuples, n_modes, cutoff))
        cols.append(src)
        data.append(amp[src])

    if element.kind == "beam_splitter":
        i, j = element.modes
        theta = p["theta"]
        ph = np.exp(1j * p["phi"])
        ni, nj = basis[:, i], basis[:, j]
        up_i = np.zeros(n_modes, dtype=np.int64)
        up_i[i], up_i[j] = 1, -1
        push(nj >= 1, up_i, theta * ph * np.sqrt(nj * (ni + 1.0)))
        push(ni >= 1, -up_i, -theta / ph * np.sqrt(ni * (nj + 1.0)))
    elif element.kind == "single_mode_squeezer":
        (i,) = element.modes
        zeta = p["r"] * np.exp(1j * p["phi"])
        ni = basis[:, i]
        totals = basis.sum(axis=1)
        up = np.zeros(n_modes, dtype=np.int64)
        up[i] = 2
        push(totals + 2 <= cutoff, up, 0.5 * zeta * np.sqrt((ni + 1.0) * (ni + 2.0)))
        push(ni >= 2, -up, -0.5 * np.conj(zeta) * np.sqrt(ni * (ni - 1.0)))
    elif element.kind == "two_mode_squeezer":
        i, j = element.modes
        zeta = p["r"] * np.exp(1j * p["phi"])
        ni, nj = basis[:, i], basis[:, j]
        totals = basis.sum(axis=1)
        up = np.zeros(n_modes, dtype=np.int64)
        up[i] = up[j] = 1
        push(totals + 2 <= cutoff, up, zeta * np.sqrt((ni + 1.0) * (nj + 1.0)))
        push((ni >= 1) & (nj >= 1), -up, -np.conj(zeta) * np.sqrt(ni * nj * 1.0))
    else:
        raise AssertionError(f"no generator for {element.kind}")

    rows = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    data = np.concatenate(data) if data else np.zeros(0, dtype=np.complex128)
    return csr_matrix((data, (rows, cols)), shape=(dim, dim))


def evolve_truncated(spec: CircuitSpec, cutoff: int, padding: int = None) -> FockTensor:
    """Evolve vacuum through the circuit, truncated at ``cutoff`` total photons.

    Active elements are evolved with ``padding`` extra photons of headroom
    (default from :data:`bellforge.config.LIMITS`) and the result is sliced
    back, so retained amplitudes converge as padding grows.

    Raises:
        CutoffTooSmall: cutoff < 1.
        DimensionExplosion: mode count or truncated dimension exceeds limits.
    """
    if cutoff < 1:
        raise CutoffTooSmall(f"cutoff must be >= 1, got {cutoff}")
    if spec.n_modes > LIMITS.max_oracle_modes:
        raise DimensionExplosion(
            f"{spec.n_modes} modes exceeds oracle limit {LIMITS.max_oracle_modes}"
        )
    has_active = any(el.kind.endswith("squeezer") for el in spec.elements)
    if padding is None:
        padding = LIMITS.oracle_padding if has_active else 0
    work_cutoff = cutoff + padding
    n = spec.n_modes
    dim = int(_count_table(n, work_cutoff)[n, work_cutoff + 1])
    if dim > LIMITS.max_oracle_dim:
        raise DimensionExplosion(
            f"truncated dimension {dim} exceeds limit {LIMITS.max_oracle_dim}"
        )
    basis = basis_tuples(n, work_cutoff)
    psi = np.zeros(dim, dtype=np.complex128)
    psi[0] = 1.0
    deficit = 0.0
    for el in spec.elements:
        if el.kind == "phase_shifter":
            (i,) = el.modes
            psi = psi * np.exp(-1j * el.params["phi"] * basis[:, i])
        else:
            gen = _generator(el, basis, n, work_cutoff)
            psi = expm_multiply(gen, psi)
        deficit = max(deficit, abs(np.linalg.norm(psi) - 1.0))

    keep = basis.sum(axis=1) <= cutoff
    kept = psi[keep]
    tail = float(max(np.linalg.norm(psi) ** 2 - np.linalg.norm(kept) ** 2, 0.0))
    # rows with total <= cutoff appear in the same lexicographic order
    return FockTensor(n_modes=n, cutoff=cutoff, vec=kept,
                      unitarity_deficit=deficit, tail_weight=tail)


def project(tensor: FockTensor, pattern) -> FockTensor:
    """Unnormalized conditional tensor after fixing detected/vacuum modes.

    Detected modes are fixed at one photon, vacuum-measured modes at zero;
    the result ranges over ``pattern.output`` in the given order. Its squared
    norm is the pattern probability within truncation.
    """
    if pattern.n_modes != tensor.n_modes:
        raise PatternModeClash(
            f"pattern covers {pattern.n_modes} modes, tensor has {tensor.n_modes}"
        )
    m = len(pattern.detected)
    out_cutoff = tensor.cutoff - m
    if out_cutoff < 0:
        raise CutoffTooSmall(f"cutoff {tensor.cutoff} below detected photon count {m}")
    basis = tensor.basis
    mask = np.ones(len(basis), dtype=bool)
    for s in pattern.detected:
        mask &= basis[:, s] == 1
    for v in pattern.vacuum:
        mask &= basis[:, v] == 0
    out_modes = list(pattern.output)
    sub = basis[mask][:, out_modes] if out_modes else basis[mask][:, :0]
    amps = tensor.vec[mask]
    k = len(out_modes)
    dim = int(_count_table(k, out_cutoff)[k, out_cutoff + 1]) if k else 1
    vec = np.zeros(dim, dtype=np.complex128)
    if k:
        vec[_ranks(sub, k, out_cutoff)] = amps
    else:
        vec[0] = amps.sum()
    return FockTensor(n_modes=k, cutoff=out_cutoff, vec=vec)
