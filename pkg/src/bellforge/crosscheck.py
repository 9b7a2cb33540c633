"""Cross-validation of the polynomial engine against the Fock oracle.

Global phase is a convention, not physics: the comparison aligns the two
descriptions with the complex ratio at the largest-magnitude oracle
amplitude (for the full state), checks that this ratio has unit modulus
(pinning the closed-form normalization), and reports the worst absolute
amplitude difference. Conditional states inherit the parent alignment.
"""

import numpy as np

from .bargmann import BargmannPolynomial, DetectionPattern, amplitude_grid, postselect
from .circuit import CircuitSpec, compile_circuit, gaussian_state
from .fock import basis_tuples, evolve_truncated, project

__all__ = ["oracle_diff"]


def _grid_values_at(grid, tuples):
    return grid[tuple(tuples.T)]


def oracle_diff(spec: CircuitSpec, cutoff: int, patterns=(), padding=None):
    """Compare compiled-state amplitudes against the oracle, with conditionals.

    Args:
        spec: circuit to compare.
        cutoff: total photon cutoff for the comparison.
        patterns: optional detection patterns; each adds a conditional diff.
        padding: oracle evolution headroom override.

    Returns:
        dict with ``max_abs_diff`` (worst over the full state and all
        conditionals), ``state_diff``, ``ratio_modulus_error``, and
        ``conditional_diffs`` (one entry per pattern).
    """
    transform = compile_circuit(spec)
    state = gaussian_state(transform)
    oracle = evolve_truncated(spec, cutoff, padding=padding)

    n = spec.n_modes
    grid = amplitude_grid(BargmannPolynomial.constant(1.0, n), state.b, cutoff)
    grid = grid / state.norm
    basis = basis_tuples(n, cutoff)
    barg = _grid_values_at(grid, basis)
    fock = oracle.vec

    anchor = int(np.argmax(np.abs(fock)))
    ratio = fock[anchor] / barg[anchor]
    state_diff = float(np.max(np.abs(fock - ratio * barg)))
    ratio_err = float(abs(abs(ratio) - 1.0))

    conditional_diffs = []
    for pattern in patterns:
        cond = postselect(state, pattern)
        out_cutoff = cutoff - len(pattern.detected)
        cgrid = amplitude_grid(cond.poly, cond.residual_b, out_cutoff)
        cgrid = cgrid * (ratio / state.norm)
        cbasis = basis_tuples(len(pattern.output), out_cutoff)
        cbarg = _grid_values_at(cgrid, cbasis)
        cfock = project(oracle, pattern).vec
        conditional_diffs.append(float(np.max(np.abs(cfock - cbarg))))

    worst = max([state_diff] + conditional_diffs)
    return {
        "max_abs_diff": worst,
        "state_diff": state_diff,
        "ratio_modulus_error": ratio_err,
        "conditional_diffs": conditional_diffs,
    }
