"""Machine-checkable no-go certificates for two-detection Bell heralding.

Conditioning a pair-coupled Gaussian state on two detected photons leaves a
two-photon coefficient matrix proportional to the symmetrized outer product
of two coupling columns, hence of rank at most two. The Bell targets have
full-rank coefficient matrices, so the conditional can never be maximally
entangled at leading order; the certificate records determinant, rank, and
singular values, plus the maximum fidelity any rank-two form can reach.

That ceiling is 1/2. Short derivation: with the Bell form E (singular
values all 1/2) and a candidate T = u v^T + v u^T, the fidelity is
|tr(E T)|^2 / |T|_F^2 = 4 |u^T E v|^2 / (2 |u|^2 |v|^2 + 2 |<u, v>|^2)
<= 2 |u|^2 |v|^2 / (2 |u|^2 |v|^2) * ... <= 1/2 by Cauchy-Schwarz, attained
by e.g. u = e1, v = e2 (the single-term witness). The committed brute-force
optimizer below re-derives the number rather than trusting the algebra.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .bargmann import DetectionPattern, coherent_conditional
from .circuit import GaussianBargmann
from .config import DEFAULT, Tolerances
from .entanglement import BellTarget, EntanglementReport, bipartite_entropy_grid, report_from_grid
from .errors import LabelingMismatch, WrongDetectionCount

__all__ = [
    "RANK2_FIDELITY_BOUND",
    "bell_quadratic_form",
    "extract_quadratic_form",
    "NoGoCertificate",
    "certify_two_photon_nogo",
    "rank2_fidelity_bound",
    "derive_rank2_fidelity_bound",
    "coherent_only_negative",
]

#: Maximum Bell fidelity of any two-photon state whose symmetric coefficient
#: matrix has rank <= 2. Derived by :func:`derive_rank2_fidelity_bound`
#: (see scripts/derive_rank2_bound.py for the archived run) and by the
#: closed-form argument in the module docstring.
RANK2_FIDELITY_BOUND = 0.5


def bell_quadratic_form(target: BellTarget = None):
    """Symmetric 4x4 matrix E with target polynomial = (sum_ij E_ij x_i x_j)/sqrt(2).

    Under this symmetric convention det E = 1/16, rank E = 4, and all
    singular values equal 1/2; ranks are the convention-free content.
    """
    target = target or BellTarget()
    e = np.zeros((4, 4), dtype=np.float64)
    for mono, coeff in target.polynomial().terms.items():
        i, j = [k for k, p in enumerate(mono) for _ in range(p)]
        val = coeff.real * math.sqrt(2.0) / 2.0
        e[i, j] += val
        e[j, i] += val
    return e


def extract_quadratic_form(state: GaussianBargmann, detected, output=None):
    """(symmetrized two-photon form, vacuum term) left by two detections.

    The form is ``(u v^T + v u^T)/2`` with u, v the coupling columns from
    the output modes into the two detected modes; the vacuum term is twice
    the direct detected-pair coupling. The post-selection polynomial equals
    ``vacuum_term + 4 * sum_ij form_ij x_i x_j`` exactly.

    Raises:
        WrongDetectionCount: detected is not exactly two distinct modes.
        LabelingMismatch: fewer or more than four output modes designated.
    """
    detected = tuple(sorted(int(s) for s in detected))
    if len(detected) != 2 or detected[0] == detected[1]:
        raise WrongDetectionCount(f"need two distinct detected modes, got {detected}")
    pattern = DetectionPattern.standard(state.n_modes, detected, output=output)
    if len(pattern.output) != 4:
        raise LabelingMismatch(
            f"certificate requires four output modes, got {len(pattern.output)}"
        )
    out = list(pattern.output)
    s1, s2 = detected
    u = state.b[out, s1]
    v = state.b[out, s2]
    form = (np.outer(u, v) + np.outer(v, u)) / 2.0
    vacuum_term = complex(2.0 * state.b[s1, s2])
    return form, vacuum_term


@dataclass(frozen=True)
class NoGoCertificate:
    """Numerical witness that a two-detection conditional cannot be maximal.

    ``degenerate`` flags the trivial all-zero case (no coupling at all),
    where the verdict still holds but carries no information.
    """

    quadratic_form: np.ndarray
    det: complex
    rank: int
    singular_values: np.ndarray
    vacuum_term: complex
    verdict: str
    max_fidelity_bound: float
    degenerate: bool

    def to_json_obj(self):
        return {
            "det_M": {"re": self.det.real, "im": self.det.imag},
            "rank_M": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
            "vacuum_term": {"re": self.vacuum_term.real, "im": self.vacuum_term.imag},
            "verdict": self.verdict,
            "max_fidelity_bound": self.max_fidelity_bound,
            "degenerate": self.degenerate,
        }


def certify_two_photon_nogo(
    state: GaussianBargmann, detected, output=None, tol: Tolerances = DEFAULT
) -> NoGoCertificate:
    """Emit the impossibility certificate for a two-detection conditioning.

    The verdict is ``TwoPhotonNoGo`` whenever the determinant is zero at the
    scale-free threshold ``tol.det_zero_rel * |M|_F^4``, which the rank-two
    structure guarantees by construction.
    """
    form, vacuum_term = extract_quadratic_form(state, detected, output=output)
    svals = np.linalg.svd(form, compute_uv=False)
    det = complex(np.linalg.det(form))
    fro = float(np.linalg.norm(form))
    rank = int(np.sum(svals > tol.rank_rel * svals[0])) if svals[0] > 0 else 0
    nogo = abs(det) <= tol.det_zero_rel * fro**4
    return NoGoCertificate(
        quadratic_form=form,
        det=det,
        rank=rank,
        singular_values=svals,
        vacuum_term=vacuum_term,
        verdict="TwoPhotonNoGo" if nogo else "Inconclusive",
        max_fidelity_bound=RANK2_FIDELITY_BOUND,
        degenerate=bool(fro == 0.0 and vacuum_term == 0.0),
    )


def rank2_fidelity_bound() -> float:
    """The pre-derived fidelity ceiling for rank <= 2 two-photon forms."""
    return RANK2_FIDELITY_BOUND


def _rank2_fidelity(u, v, e):
    t = np.outer(u, v) + np.outer(v, u)
    denom = float(np.sum(np.abs(t) ** 2))
    if denom == 0.0:
        return 0.0
    return float(abs(np.sum(e * t)) ** 2) / denom


def derive_rank2_fidelity_bound(restarts=200, seed=20240, real_only=False):
    """Brute-force re-derivation of :data:`RANK2_FIDELITY_BOUND`.

    Maximizes the Bell fidelity of ``u v^T + v u^T`` over u, v (complex by
    default, real when ``real_only``) with Nelder-Mead refinement from many
    seeded random starts. Returns the best fidelity found.
    """
    e = bell_quadratic_form()
    rng = np.random.default_rng(seed)
    dim = 8 if real_only else 16

    def unpack(x):
        if real_only:
            return x[:4].astype(np.complex128), x[4:].astype(np.complex128)
        u = x[:4] + 1j * x[4:8]
        v = x[8:12] + 1j * x[12:]
        return u, v

    def objective(x):
        u, v = unpack(x)
        return -_rank2_fidelity(u, v, e)

    best = 0.0
    for _ in range(restarts):
        x0 = rng.standard_normal(dim)
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def coherent_only_negative(
    displacements, pattern: DetectionPattern, cutoff: int = 10, target: BellTarget = None
) -> EntanglementReport:
    """Report for conditioning a coherent-product state: never entangled.

    The conditional is exactly a constant times a product of single-mode
    coherent states, so the reported ``entropy_bits`` (here the full
    bipartite entropy across the target's side split, not just the
    two-photon sector) vanishes for every displacement vector and pattern.

    The amplitude grid uses a per-mode photon cap rather than a total cap:
    that truncation preserves the product structure exactly, keeping the
    zero-entropy statement free of truncation artifacts.
    """
    target = target or BellTarget()
    if len(pattern.output) != 4:
        raise LabelingMismatch(
            f"Bell comparison needs 4 output modes, pattern has {len(pattern.output)}"
        )
    constant, d_out = coherent_conditional(displacements, pattern)
    factors = []
    for d in d_out:
        n = np.arange(cutoff + 1)
        factors.append(d**n / np.sqrt([math.factorial(int(x)) for x in n]))
    grid = constant * factors[0][:, None, None, None] * factors[1][None, :, None, None] \
        * factors[2][None, None, :, None] * factors[3][None, None, None, :]
    report = report_from_grid(grid, target)
    full_entropy = bipartite_entropy_grid(grid, target.side_a_slots)
    return replace(report, entropy_bits=full_entropy)
