"""Bell-state fidelity, sector analysis, and bipartite entropy.

The default mode labeling assigns the four output slots to
(A vertical, B horizontal, A horizontal, B vertical), which makes the
antisymmetric Bell target literally ``(x0 x1 - x2 x3)/sqrt(2)`` with side A
holding slots {0, 2} and side B holding slots {1, 3}.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bargmann import BargmannPolynomial, ConditionalState, amplitude_grid
from .errors import LabelingMismatch, NotNormalized

__all__ = [
    "BellTarget",
    "EntanglementReport",
    "bell_fidelity",
    "vn_entropy",
    "report_from_grid",
    "local_passive_block",
]

DEFAULT_LABELING = (("A", "v"), ("B", "h"), ("A", "h"), ("B", "v"))

_TARGETS = ("psi_minus", "psi_plus", "phi_minus", "phi_plus")


@dataclass(frozen=True)
class BellTarget:
    """One of the four maximally entangled two-photon polarisation states.

    ``labeling`` maps each output slot to a (spatial side, polarisation)
    pair and must be a bijection onto {A,B} x {v,h}.
    """

    target: str = "psi_minus"
    labeling: tuple = DEFAULT_LABELING

    def __post_init__(self):
        if self.target not in _TARGETS:
            raise LabelingMismatch(f"unknown Bell target {self.target!r}; use one of {_TARGETS}")
        lab = tuple((str(s), str(p)) for s, p in self.labeling)
        object.__setattr__(self, "labeling", lab)
        if sorted(lab) != sorted((s, p) for s in "AB" for p in "hv") or len(lab) != 4:
            raise LabelingMismatch(f"labeling {lab} is not a bijection onto sides x polarisations")

    def _slot(self, side, pol):
        return self.labeling.index((side, pol))

    @property
    def side_a_slots(self):
        return tuple(i for i, (s, _) in enumerate(self.labeling) if s == "A")

    @property
    def side_b_slots(self):
        return tuple(i for i, (s, _) in enumerate(self.labeling) if s == "B")

    def polynomial(self) -> BargmannPolynomial:
        av, ah = self._slot("A", "v"), self._slot("A", "h")
        bv, bh = self._slot("B", "v"), self._slot("B", "h")
        sign = -1.0 if self.target.endswith("minus") else 1.0
        if self.target.startswith("psi"):
            first, second = (av, bh), (ah, bv)
        else:
            first, second = (av, bv), (ah, bh)
        c = 1.0 / math.sqrt(2.0)

        def mono(pair):
            m = [0, 0, 0, 0]
            m[pair[0]] += 1
            m[pair[1]] += 1
            return tuple(m)

        return BargmannPolynomial(4, {mono(first): c, mono(second): sign * c})


@dataclass(frozen=True)
class EntanglementReport:
    """How close a conditional state is to the requested Bell state.

    ``bell_fidelity`` is over the full normalized conditional state (vacuum
    and higher sectors included); ``sector_fidelity`` restricts to the
    one-photon-per-side sector; ``entropy_bits`` is the entropy of that
    sector's reduced state; ``pollution`` is ``1 - bell_fidelity``.
    """

    bell_fidelity: float
    sector_fidelity: float
    vacuum_weight: float
    entropy_bits: float
    pollution: float

    def to_json_obj(self):
        return {
            "bell_fidelity": self.bell_fidelity,
            "sector_fidelity": self.sector_fidelity,
            "vacuum_weight": self.vacuum_weight,
            "entropy_bits": self.entropy_bits,
            "pollution": self.pollution,
        }


def _entropy_bits_from_schmidt(singular_values):
    s2 = np.asarray(singular_values, dtype=np.float64) ** 2
    total = s2.sum()
    if total <= 0.0:
        return 0.0
    p = s2 / total
    p = p[p > 0.0]
    return float(-(p * np.log2(p)).sum())


def report_from_grid(amps, target: BellTarget) -> EntanglementReport:
    """Build the report from a dense amplitude grid over the four output slots."""
    if amps.ndim != 4:
        raise LabelingMismatch(f"expected a 4-mode amplitude grid, got {amps.ndim} axes")
    norm_sq = float(np.sum(np.abs(amps) ** 2))
    if norm_sq <= 0.0:
        return EntanglementReport(0.0, 0.0, 0.0, 0.0, 1.0)

    overlap = 0j
    for mono, coeff in target.polynomial().terms.items():
        # target monomials are products of two distinct slots: amplitude = coeff
        overlap += coeff.conjugate() * amps[mono]

    a_slots, b_slots = target.side_a_slots, target.side_b_slots
    pair_matrix = np.zeros((2, 2), dtype=np.complex128)
    sector_sq = 0.0
    for ia, sa in enumerate(a_slots):
        for ib, sb in enumerate(b_slots):
            occ = [0, 0, 0, 0]
            occ[sa] += 1
            occ[sb] += 1
            amp = amps[tuple(occ)]
            pair_matrix[ia, ib] = amp
            sector_sq += abs(amp) ** 2

    bell = abs(overlap) ** 2 / norm_sq
    sector = abs(overlap) ** 2 / sector_sq if sector_sq > 0.0 else 0.0
    vacuum = abs(amps[(0, 0, 0, 0)]) ** 2 / norm_sq
    entropy = _entropy_bits_from_schmidt(np.linalg.svd(pair_matrix, compute_uv=False))
    return EntanglementReport(
        bell_fidelity=bell,
        sector_fidelity=sector,
        vacuum_weight=vacuum,
        entropy_bits=entropy,
        pollution=1.0 - bell,
    )


def bell_fidelity(cond: ConditionalState, target: BellTarget, cutoff: int) -> EntanglementReport:
    """Fidelity report of a conditional state against a Bell target.

    ``cutoff`` truncates the residual exponential; couplings at desk scale
    decay geometrically, so 10-14 total photons is ample.

    Raises:
        LabelingMismatch: the conditional state does not have four output modes.
        CutoffTooSmall: cutoff below the conditional polynomial degree.
    """
    if cond.n_outputs != 4:
        raise LabelingMismatch(
            f"Bell comparison needs 4 output modes, conditional has {cond.n_outputs}"
        )
    amps = amplitude_grid(cond.poly, cond.residual_b, max(cutoff, 2))
    return report_from_grid(amps, target)


def _split_monomial(mono, side_a):
    a = tuple(mono[i] for i in side_a)
    b = tuple(x for i, x in enumerate(mono) if i not in side_a)
    return a, b


def vn_entropy(two_photon_state: BargmannPolynomial, side_a, tol: float = 1e-9) -> float:
    """Entanglement entropy (bits) of a normalized two-photon polynomial.

    ``side_a`` collects the mode indices of one party; the result is
    symmetric under swapping parties.

    Raises:
        NotNormalized: Fock norm deviates from 1 beyond ``tol``.
        LabelingMismatch: a monomial is not exactly two-photon.
    """
    side_a = frozenset(int(i) for i in side_a)
    norm_sq = two_photon_state.norm_sq()
    if abs(norm_sq - 1.0) > tol:
        raise NotNormalized(f"squared norm {norm_sq} deviates from 1 beyond {tol}")
    a_index, b_index = {}, {}
    entries = []
    for mono, coeff in two_photon_state.terms.items():
        if sum(mono) != 2:
            raise LabelingMismatch(f"monomial {mono} is not two-photon")
        a_occ, b_occ = _split_monomial(mono, side_a)
        amp = coeff * math.sqrt(math.prod(math.factorial(x) for x in mono))
        a_index.setdefault(a_occ, len(a_index))
        b_index.setdefault(b_occ, len(b_index))
        entries.append((a_occ, b_occ, amp))
    matrix = np.zeros((len(a_index), len(b_index)), dtype=np.complex128)
    for a_occ, b_occ, amp in entries:
        matrix[a_index[a_occ], b_index[b_occ]] += amp
    return _entropy_bits_from_schmidt(np.linalg.svd(matrix, compute_uv=False))


def bipartite_entropy_grid(amps, axes_a) -> float:
    """Entropy (bits) of a dense amplitude grid split across the given axes."""
    k = amps.ndim
    axes_a = tuple(axes_a)
    axes_b = tuple(i for i in range(k) if i not in axes_a)
    moved = np.transpose(amps, axes_a + axes_b)
    dim_a = int(np.prod([amps.shape[i] for i in axes_a])) if axes_a else 1
    matrix = moved.reshape(dim_a, -1)
    return _entropy_bits_from_schmidt(np.linalg.svd(matrix, compute_uv=False))


def local_passive_block(target: BellTarget, u_side_a, u_side_b):
    """Four-mode passive block applying 2x2 unitaries within each spatial side.

    Row/column order follows the slot order; within each side the (v, h)
    polarisation order of the labeling is used. Useful for checking that
    fidelities transform covariantly under local polarisation rotations.
    """
    u_a = np.asarray(u_side_a, dtype=np.complex128)
    u_b = np.asarray(u_side_b, dtype=np.complex128)
    block = np.zeros((4, 4), dtype=np.complex128)
    for side, u in (("A", u_a), ("B", u_b)):
        slots = [target._slot(side, "v"), target._slot(side, "h")]
        for r in range(2):
            for c in range(2):
                block[slots[r], slots[c]] = u[r, c]
    return block
