"""Centralized numerical tolerances and resource limits.

A single module-level :data:`DEFAULT` instance is used throughout; pass a
custom :class:`Tolerances` where a function accepts one to tighten or relax
individual checks.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # matrix hygiene
    symmetry: float = 1e-12          # |S - S^T| admitted on symmetric inputs
    unitarity: float = 1e-12         # |W W^dag - I| on factor unitaries
    reconstruction: float = 1e-10    # relative Frobenius round-trip residual
    symplectic: float = 1e-9         # Bogoliubov constraint residual

    # certificates
    det_zero_rel: float = 1e-12      # |det M| <= det_zero_rel * |M|_F^4
    rank_rel: float = 1e-10          # singular values below rank_rel*s_max count as zero

    # state hygiene
    norm_deviation: float = 1e-9     # NotNormalized threshold


@dataclass(frozen=True)
class Limits:
    max_squeeze: float = 5.0         # |r| cap keeping tanh r < 1 meaningful
    max_detections: int = 10         # partial-matching enumeration cap
    max_oracle_modes: int = 8        # Fock oracle mode cap
    max_oracle_dim: int = 400_000    # truncated Fock basis size cap
    oracle_padding: int = 12         # extra total photons during evolution
    max_grid_size: int = 4_000_000   # dense amplitude-grid entry cap


DEFAULT = Tolerances()
LIMITS = Limits()
