"""Optical circuits, their mode transforms, and the Gaussian states they emit.

Conventions (fixed once, used everywhere):

* Distinct polarisations are separate modes; a circuit on N modes is an
  ordered list of elements, first element acting first.
* A transform is stored as the pair (passive, active) pushing mode operators
  through the circuit: ``a_i -> sum_j passive[i,j] a_j + active[i,j] adag_j``
  in the conjugation-by-U sense, so the vacuum output state solves
  ``(passive @ grad + active @ alpha) psi = 0`` and the pair-coupling matrix
  is ``B = -(1/2) passive^-1 active``.
* Element blocks (rows/cols restricted to the touched modes):

  - ``beam_splitter(theta, phi)``:  passive ``[[cos t, -e^{i phi} sin t],
    [e^{-i phi} sin t, cos t]]``, no active part.
  - ``phase_shifter(phi)``: passive entry ``e^{i phi}``.
  - ``single_mode_squeezer(r, phi)``: passive ``cosh r``, active
    ``-e^{i phi} sinh r``; alone it emits ``exp(e^{i phi} tanh(r)/2 * a^2)``
    so its pair-coupling entry is ``e^{i phi} tanh(r)/2``.
  - ``two_mode_squeezer(r, phi)``: passive ``cosh r`` on both modes, active
    off-diagonal ``-e^{i phi} sinh r``; alone it emits
    ``exp(e^{i phi} tanh r * a_i a_j)``.

Global phases are convention; all physically meaningful quantities reported
downstream (fidelities, certificates) are invariant under them.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, LIMITS, Tolerances
from .errors import (
    InvalidModeIndex,
    NonFiniteEntry,
    NonSymmetricInput,
    NotNormalizable,
    NotSymplectic,
    ParameterOutOfRange,
    SchemaViolation,
    SingularPassivePart,
)

__all__ = [
    "Element",
    "CircuitSpec",
    "BogoliubovTransform",
    "GaussianBargmann",
    "beam_splitter",
    "phase_shifter",
    "single_mode_squeezer",
    "two_mode_squeezer",
    "compile_circuit",
    "gaussian_state",
    "pdc_example",
    "cascade_expand",
]

_KINDS = {
    "beam_splitter": (2, ("theta", "phi")),
    "phase_shifter": (1, ("phi",)),
    "single_mode_squeezer": (1, ("r", "phi")),
    "two_mode_squeezer": (2, ("r", "phi")),
}


@dataclass(frozen=True)
class Element:
    """One optical element: a kind, the modes it touches, and its parameters."""

    kind: str
    modes: tuple
    params: dict

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaViolation(f"unknown element kind {self.kind!r}")
        arity, names = _KINDS[self.kind]
        modes = tuple(int(m) for m in self.modes)
        object.__setattr__(self, "modes", modes)
        if len(modes) != arity:
            raise InvalidModeIndex(f"{self.kind} touches {arity} modes, got {modes}")
        if arity == 2 and modes[0] == modes[1]:
            raise InvalidModeIndex(f"{self.kind} requires two distinct modes, got {modes}")
        if any(m < 0 for m in modes):
            raise InvalidModeIndex(f"negative mode index in {modes}")
        if set(self.params) != set(names):
            raise SchemaViolation(f"{self.kind} expects params {names}, got {tuple(self.params)}")
        params = {k: float(v) for k, v in self.params.items()}
        object.__setattr__(self, "params", params)
        if not all(math.isfinite(v) for v in params.values()):
            raise ParameterOutOfRange(f"non-finite parameter in {params}")
        if "r" in params and abs(params["r"]) > LIMITS.max_squeeze:
            raise ParameterOutOfRange(
                f"|r| = {abs(params['r'])} exceeds configured maximum {LIMITS.max_squeeze}"
            )

    def to_json_obj(self):
        return {"kind": self.kind, "modes": list(self.modes), "params": dict(self.params)}


def beam_splitter(theta, phi, modes):
    return Element("beam_splitter", tuple(modes), {"theta": theta, "phi": phi})


def phase_shifter(phi, mode):
    return Element("phase_shifter", (mode,), {"phi": phi})


def single_mode_squeezer(r, phi, mode):
    return Element("single_mode_squeezer", (mode,), {"r": r, "phi": phi})


def two_mode_squeezer(r, phi, modes):
    return Element("two_mode_squeezer", tuple(modes), {"r": r, "phi": phi})


@dataclass(frozen=True)
class CircuitSpec:
    """An n-mode circuit as an ordered element list.

    ``mode_labels`` is optional documentation (e.g. ``"A_v"`` for spatial side
    A, vertical polarisation); it never affects compilation.
    """

    n_modes: int
    elements: tuple
    mode_labels: tuple = None

    def __post_init__(self):
        if self.n_modes < 1:
            raise InvalidModeIndex(f"n_modes must be positive, got {self.n_modes}")
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            for m in el.modes:
                if m >= self.n_modes:
                    raise InvalidModeIndex(
                        f"element {el.kind} touches mode {m} but circuit has {self.n_modes} modes"
                    )
        if self.mode_labels is not None:
            labels = tuple(str(x) for x in self.mode_labels)
            if len(labels) != self.n_modes:
                raise SchemaViolation("mode_labels length must equal n_modes")
            object.__setattr__(self, "mode_labels", labels)

    def to_json_obj(self):
        obj = {"n_modes": self.n_modes, "elements": [el.to_json_obj() for el in self.elements]}
        if self.mode_labels is not None:
            obj["mode_labels"] = list(self.mode_labels)
        return obj

    @classmethod
    def from_json_obj(cls, obj):
        if not isinstance(obj, dict) or "n_modes" not in obj or "elements" not in obj:
            raise SchemaViolation('circuit JSON requires "n_modes" and "elements"')
        try:
            elements = tuple(
                Element(e["kind"], tuple(e["modes"]), dict(e["params"])) for e in obj["elements"]
            )
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"malformed element entry: {exc}") from exc
        return cls(
            n_modes=int(obj["n_modes"]),
            elements=elements,
            mode_labels=tuple(obj["mode_labels"]) if obj.get("mode_labels") else None,
        )


def _freeze(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BogoliubovTransform:
    """Mode-operator transform (passive, active) with CCR-preserving blocks."""

    passive: np.ndarray
    active: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.passive, dtype=np.complex128)
        f = np.asarray(self.active, dtype=np.complex128)
        if e.shape != f.shape or e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise NonSymmetricInput(f"blocks must be square and matching, got {e.shape}, {f.shape}")
        if not (np.all(np.isfinite(e.view(np.float64))) and np.all(np.isfinite(f.view(np.float64)))):
            raise NonFiniteEntry("transform blocks contain non-finite entries")
        n = e.shape[0]
        scale = max(1.0, np.linalg.norm(e))
        r1 = np.linalg.norm(e @ e.conj().T - f @ f.conj().T - np.eye(n))
        r2 = np.linalg.norm(e @ f.T - f @ e.T)
        if max(r1, r2) > 1e-10 * scale:
            raise NotSymplectic(f"constraint residuals ({r1:.3e}, {r2:.3e}) exceed 1e-10")
        object.__setattr__(self, "passive", _freeze(e))
        object.__setattr__(self, "active", _freeze(f))

    @property
    def n_modes(self):
        return self.passive.shape[0]

    @classmethod
    def identity(cls, n_modes):
        return cls(np.eye(n_modes, dtype=np.complex128), np.zeros((n_modes, n_modes), np.complex128))


def _element_blocks(el, n):
    e = np.eye(n, dtype=np.complex128)
    f = np.zeros((n, n), dtype=np.complex128)
    p = el.params
    if el.kind == "beam_splitter":
        i, j = el.modes
        c, s = math.cos(p["theta"]), math.sin(p["theta"])
        ph = cmath.exp(1j * p["phi"])
        e[i, i] = c
        e[i, j] = -ph * s
        e[j, i] = s / ph
        e[j, j] = c
    elif el.kind == "phase_shifter":
        (i,) = el.modes
        e[i, i] = cmath.exp(1j * p["phi"])
    elif el.kind == "single_mode_squeezer":
        (i,) = el.modes
        e[i, i] = math.cosh(p["r"])
        f[i, i] = -cmath.exp(1j * p["phi"]) * math.sinh(p["r"])
    elif el.kind == "two_mode_squeezer":
        i, j = el.modes
        e[i, i] = e[j, j] = math.cosh(p["r"])
        f[i, j] = f[j, i] = -cmath.exp(1j * p["phi"]) * math.sinh(p["r"])
    return e, f


def compile_circuit(spec: CircuitSpec, tol: Tolerances = DEFAULT) -> BogoliubovTransform:
    """Compile a circuit to its mode transform, first element acting first."""
    n = spec.n_modes
    e_tot = np.eye(n, dtype=np.complex128)
    f_tot = np.zeros((n, n), dtype=np.complex128)
    for el in spec.elements:
        e_el, f_el = _element_blocks(el, n)
        e_tot, f_tot = e_tot @ e_el + f_tot @ f_el.conj(), e_tot @ f_el + f_tot @ e_el.conj()
    return BogoliubovTransform(e_tot, f_tot)


@dataclass(frozen=True)
class GaussianBargmann:
    """Zero-displacement Gaussian state ``exp(sum_ij b[i,j] a_i a_j)`` on vacuum.

    ``b`` is complex symmetric; ``norm`` is the amplitude norm
    ``<psi|psi>^(1/2) = det(I - 4 b^dag b)^(-1/4)``; ``xi_scale`` is the
    largest singular value of ``2 b``, the effective coupling strength
    (strictly below 1 for a normalizable state).
    """

    b: np.ndarray
    norm: float
    xi_scale: float

    @property
    def n_modes(self):
        return self.b.shape[0]

    @classmethod
    def from_pair_matrix(cls, b, tol: Tolerances = DEFAULT):
        b = np.asarray(b, dtype=np.complex128)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise NonSymmetricInput(f"pair matrix must be square, got {b.shape}")
        if not np.all(np.isfinite(b.view(np.float64))):
            raise NonFiniteEntry("pair matrix contains non-finite entries")
        scale = max(1.0, np.linalg.norm(b))
        if np.linalg.norm(b - b.T) > tol.symmetry * scale:
            raise NonSymmetricInput("pair matrix asymmetry exceeds tolerance")
        b = (b + b.T) / 2.0
        svals = np.linalg.svd(2.0 * b, compute_uv=False) if b.size else np.zeros(0)
        xi = float(svals[0]) if svals.size else 0.0
        if xi >= 1.0:
            raise NotNormalizable(f"largest pair-coupling singular value {xi:.6f} >= 1")
        norm = float(np.prod(1.0 - svals**2) ** (-0.25))
        return cls(b=_freeze(b), norm=norm, xi_scale=xi)

    def to_json_obj(self):
        return {
            "n_modes": self.n_modes,
            "B": [[{"re": z.real, "im": z.imag} for z in row] for row in self.b],
            "norm": self.norm,
            "xi_scale": self.xi_scale,
        }

    @classmethod
    def from_json_obj(cls, obj):
        try:
            b = np.array(
                [[complex(c["re"], c["im"]) for c in row] for row in obj["B"]],
                dtype=np.complex128,
            )
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"malformed state JSON: {exc}") from exc
        if b.shape != (int(obj.get("n_modes", b.shape[0])),) * 2:
            raise SchemaViolation("state JSON B shape disagrees with n_modes")
        # norm/xi_scale are derived quantities; recompute rather than trust.
        return cls.from_pair_matrix(b)


def gaussian_state(transform: BogoliubovTransform, tol: Tolerances = DEFAULT) -> GaussianBargmann:
    """Vacuum output state of a mode transform.

    Raises:
        SingularPassivePart: passive block numerically singular.
        NotNormalizable: coupling singular value reaches 1.
    """
    e = transform.passive
    if np.linalg.cond(e) > 1e12:
        raise SingularPassivePart("passive block condition number exceeds 1e12")
    b = -0.5 * np.linalg.solve(e, transform.active)
    return GaussianBargmann.from_pair_matrix((b + b.T) / 2.0, tol)


def pdc_example(xi: float) -> CircuitSpec:
    """Four-mode down-conversion circuit emitting vacuum + xi * singlet + O(xi^2).

    Modes are (A_v, B_h, A_h, B_v): two spatial sides times two polarisations.
    Two two-mode squeezers with opposite phases produce the antisymmetric
    combination ``xi (a1 a2 - a3 a4)/sqrt(2)`` at first order.
    """
    if not (0.0 <= xi < 1.0):
        raise ParameterOutOfRange(f"coupling xi must lie in [0, 1), got {xi}")
    r = math.atanh(xi / math.sqrt(2.0))
    return CircuitSpec(
        n_modes=4,
        elements=(
            two_mode_squeezer(r, 0.0, (0, 1)),
            two_mode_squeezer(r, math.pi, (2, 3)),
        ),
        mode_labels=("A_v", "B_h", "A_h", "B_v"),
    )


def cascade_expand(spec: CircuitSpec, mode: int, depth: int) -> CircuitSpec:
    """Split one mode across a balanced 50:50 splitter tree of 2**depth leaves.

    Appends ``2**depth - 1`` fresh vacuum modes and the splitter layers to the
    circuit; the added block is passive, so pair creation is untouched and the
    photon flux of the split mode is conserved across the leaves.
    """
    if not (0 <= mode < spec.n_modes):
        raise InvalidModeIndex(f"mode {mode} outside circuit with {spec.n_modes} modes")
    if depth < 1:
        raise ParameterOutOfRange(f"cascade depth must be >= 1, got {depth}")
    elements = list(spec.elements)
    carriers = [mode]
    next_mode = spec.n_modes
    for _ in range(depth):
        fresh = []
        for c in carriers:
            elements.append(beam_splitter(math.pi / 4.0, 0.0, (c, next_mode)))
            fresh.extend([c, next_mode])
            next_mode += 1
        carriers = fresh
    labels = None
    if spec.mode_labels is not None:
        labels = spec.mode_labels + tuple(
            f"cascade{k}" for k in range(next_mode - spec.n_modes)
        )
    return CircuitSpec(n_modes=next_mode, elements=tuple(elements), mode_labels=labels)
