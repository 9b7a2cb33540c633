"""Numerical probes of the conjecture: maximize conditional Bell fidelity.

The search walks valid pair-coupling matrices directly in normal form,
``B = U^T diag(tanh r / 2) U`` with U unitary (phased Givens factors) and
``tanh r`` capped, which enforces normalizability by construction and
matches the squeezers-then-interferometer picture. Detected modes are fixed
as the last ``n_detected`` modes, outputs as the first four; every
evaluation goes through post-selection and the fidelity report.

Results are evidence only: fidelity ceilings observed under a given budget,
never impossibility proofs. Runs are reproducible from (seed, config) and
bit-identical for any worker-thread count because candidates are evaluated
independently and merged in submission order.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bargmann import DetectionPattern, postselect
from .circuit import GaussianBargmann
from .entanglement import BellTarget, bell_fidelity
from .errors import BudgetZero, InfeasibleConfig, ParameterOutOfRange, SchemaViolation

__all__ = ["SearchConfig", "SearchResult", "optimize", "rate_estimate"]

_OBJECTIVES = ("FullFidelity", "SectorFidelity")

# Residual-exponential truncation during objective evaluation. Couplings are
# capped well below 1, so sector weights decay at least as fast as xi_cap^2
# per photon pair; six total photons keeps the relative norm error below
# ~1e-4 at xi_cap = 0.3. Truncating the norm can only overestimate the
# fidelity, and the two-detection value stays rigorously below the rank-2
# ceiling at any cutoff >= 2 (the numerator lives entirely in the
# two-photon sector, which the truncated norm always contains).
_EVAL_CUTOFF = 6

_CHUNK = 16  # candidates per worker task; merge order is by submission


@dataclass(frozen=True)
class SearchConfig:
    """Search space and budget; ``n_detected`` must be even (pair creation)."""

    n_modes: int
    n_detected: int
    xi_cap: float = 0.3
    budget: int = 10_000
    seed: int = 0
    objective: str = "FullFidelity"

    def __post_init__(self):
        if self.n_detected % 2 != 0 or self.n_detected < 0:
            raise InfeasibleConfig(
                f"n_detected must be even and non-negative, got {self.n_detected}"
            )
        if not (0.0 < self.xi_cap < 1.0):
            raise InfeasibleConfig(f"xi_cap must lie in (0, 1), got {self.xi_cap}")
        if self.objective not in _OBJECTIVES:
            raise InfeasibleConfig(
                f"objective must be one of {_OBJECTIVES}, got {self.objective!r}"
            )

    def to_json_obj(self):
        return {
            "n_modes": self.n_modes,
            "n_detected": self.n_detected,
            "xi_cap": self.xi_cap,
            "budget": self.budget,
            "seed": self.seed,
            "objective": self.objective,
        }

    @classmethod
    def from_json_obj(cls, obj):
        try:
            return cls(
                n_modes=int(obj["n_modes"]),
                n_detected=int(obj["n_detected"]),
                xi_cap=float(obj.get("xi_cap", 0.3)),
                budget=int(obj.get("budget", 10_000)),
                seed=int(obj.get("seed", 0)),
                objective=str(obj.get("objective", "FullFidelity")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed search config: {exc}") from exc


@dataclass(frozen=True)
class SearchResult:
    """Best state found, its report, and the monotone best-so-far trace.

    ``wall_time`` is measured, hence volatile; it is serialized as null
    unless explicitly requested, so archived result files stay bit-identical
    across reruns with the same seed.
    """

    config: SearchConfig
    best_state: GaussianBargmann
    best_report: object
    best_fidelity: float
    trace: tuple
    wall_time: float

    def to_json_obj(self, include_volatile=False):
        return {
            "config": self.config.to_json_obj(),
            "best_B": self.best_state.to_json_obj(),
            "best_report": self.best_report.to_json_obj(),
            "best_fidelity": self.best_fidelity,
            "trace": [[int(i), float(f)] for i, f in self.trace],
            "wall_time": self.wall_time if include_volatile else None,
        }


class _Parameterization:
    """Map a box-constrained real vector in [0,1]^dim to a valid coupling matrix."""

    def __init__(self, n_modes, xi_cap):
        self.n = n_modes
        self.r_cap = math.atanh(xi_cap)
        self.pairs = [(i, j) for i in range(n_modes) for j in range(i + 1, n_modes)]
        # squeezes | Givens angles | Givens phases | final mode phases
        self.dim = n_modes + 2 * len(self.pairs) + n_modes

    def coupling(self, x):
        n = self.n
        x = np.clip(x, 0.0, 1.0)
        npairs = len(self.pairs)
        r = x[:n] * self.r_cap
        angles = x[n : n + npairs] * (math.pi / 2.0)
        phases = x[n + npairs : n + 2 * npairs] * (2.0 * math.pi)
        final = x[n + 2 * npairs :] * (2.0 * math.pi)
        u = np.diag(np.exp(1j * final))
        for (i, j), th, ph in zip(self.pairs, angles, phases):
            # right-multiply by the Givens factor: mixes columns i and j
            c, s = math.cos(th), math.sin(th)
            e = np.exp(1j * ph)
            col_i = u[:, i].copy()
            col_j = u[:, j].copy()
            u[:, i] = c * col_i + (s / e) * col_j
            u[:, j] = -e * s * col_i + c * col_j
        return u.T @ (np.tanh(r)[:, None] / 2.0 * u)


def _evaluate(x, param, pattern, target, objective):
    state = GaussianBargmann.from_pair_matrix(param.coupling(x))
    report = bell_fidelity(postselect(state, pattern), target, _EVAL_CUTOFF)
    value = report.bell_fidelity if objective == "FullFidelity" else report.sector_fidelity
    return value, state, report


def _evaluate_many(xs, param, pattern, target, objective):
    return [_evaluate(x, param, pattern, target, objective) for x in xs]


def optimize(cfg: SearchConfig, threads: int = 1) -> SearchResult:
    """Random multi-start plus batched coordinate pattern search.

    Exactly ``cfg.budget`` objective evaluations are spent: half on seeded
    random exploration, the rest refining the incumbent with coordinate
    probes (a full sweep of +/-step probes is evaluated, the best
    improvement applied, the step halved when nothing improves). The trace
    records (evaluation index, best-so-far fidelity) at every improvement.

    Raises:
        BudgetZero: ``cfg.budget < 1``.
        InfeasibleConfig: fewer than ``4 + n_detected`` modes.
    """
    if cfg.budget < 1:
        raise BudgetZero("search budget must be at least 1")
    if cfg.n_modes < 4 + cfg.n_detected:
        raise InfeasibleConfig(
            f"need at least {4 + cfg.n_detected} modes for {cfg.n_detected} detections"
        )
    start_time = time.perf_counter()
    param = _Parameterization(cfg.n_modes, cfg.xi_cap)
    detected = tuple(range(cfg.n_modes - cfg.n_detected, cfg.n_modes))
    pattern = DetectionPattern.standard(cfg.n_modes, detected, output=(0, 1, 2, 3))
    target = BellTarget()
    rng = np.random.default_rng(cfg.seed)

    evals_done = 0
    best_value = -1.0
    best_x = best_state = best_report = None
    trace = []

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:

        def run_batch(xs):
            """Evaluate candidates; update the incumbent in submission order."""
            nonlocal evals_done, best_value, best_x, best_state, best_report
            chunks = [xs[i : i + _CHUNK] for i in range(0, len(xs), _CHUNK)]
            futures = [
                pool.submit(_evaluate_many, chunk, param, pattern, target, cfg.objective)
                for chunk in chunks
            ]
            improved_x = None
            for chunk, fut in zip(chunks, futures):
                for x, (value, state, report) in zip(chunk, fut.result()):
                    evals_done += 1
                    if value > best_value:
                        best_value, best_x = value, x
                        best_state, best_report = state, report
                        trace.append((evals_done, value))
                        improved_x = x
            return improved_x

        explore = min(cfg.budget, max(1, cfg.budget // 2))
        while evals_done < explore:
            take = min(256, explore - evals_done)
            run_batch([rng.random(param.dim) for _ in range(take)])

        step = 0.25
        center = best_x.copy()
        while evals_done < cfg.budget and step > 1e-7:
            probes = []
            for k in range(param.dim):
                for delta in (step, -step):
                    xp = center.copy()
                    xp[k] = min(1.0, max(0.0, xp[k] + delta))
                    probes.append(xp)
            probes = probes[: cfg.budget - evals_done]
            if not probes:
                break
            improved_x = run_batch(probes)
            if improved_x is not None:
                center = improved_x.copy()
            else:
                step *= 0.5

    wall = time.perf_counter() - start_time
    return SearchResult(
        config=cfg,
        best_state=best_state,
        best_report=best_report,
        best_fidelity=best_value,
        trace=tuple(trace),
        wall_time=wall,
    )


def rate_estimate(xi2, rep_rate_hz, n_pairs, detector_efficiency=1.0):
    """Heralded-pair production rate for an n-pair scheme.

    An ``n_pairs``-pair event leaves two photons as the entangled pair and
    sends the remaining ``2 (n_pairs - 1)`` photons to detectors, so::

        events_per_second = rep_rate_hz * xi2**n_pairs
                            * detector_efficiency**(2 * (n_pairs - 1))

    Returns ``(events_per_second, seconds_per_event)``.

    Raises:
        ParameterOutOfRange: any argument outside its admissible range.
    """
    if not (0.0 < xi2 < 1.0):
        raise ParameterOutOfRange(f"xi2 must lie in (0, 1), got {xi2}")
    if rep_rate_hz <= 0.0:
        raise ParameterOutOfRange(f"repetition rate must be positive, got {rep_rate_hz}")
    if not (0.0 < detector_efficiency <= 1.0):
        raise ParameterOutOfRange(
            f"detector efficiency must lie in (0, 1], got {detector_efficiency}"
        )
    n_pairs = int(n_pairs)
    if n_pairs < 1:
        raise ParameterOutOfRange(f"n_pairs must be at least 1, got {n_pairs}")
    n_detected = 2 * (n_pairs - 1)
    events_per_second = rep_rate_hz * xi2**n_pairs * detector_efficiency**n_detected
    return events_per_second, 1.0 / events_per_second
