"""Polynomial state model and detection post-selection.

States live in the representation where creation operators are complex
variables and annihilation operators are derivatives. Conditioning a
Gaussian state ``exp(sum_ij b_ij a_i a_j)`` on single-photon detections is
formal differentiation at zero, computed exactly by enumerating partial
matchings of the detected indices: each detected index either pairs with
another detected index (factor ``2 b_st``) or survives as the linear form
``2 sum_j b_sj a_j`` restricted to the output modes. All combinatorial
factors are retained exactly; the truth of every identity here is anchored
to the Fock oracle in the test suite.
"""

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .circuit import GaussianBargmann
from .config import LIMITS
from .errors import (
    CutoffTooSmall,
    DimensionExplosion,
    PatternModeClash,
    SchemaViolation,
    TooManyDetections,
    WrongDetectionCount,
)

__all__ = [
    "BargmannPolynomial",
    "DetectionPattern",
    "ConditionalState",
    "FourPhotonTerm",
    "postselect",
    "four_photon_terms",
    "success_probability",
    "coherent_conditional",
    "amplitude_grid",
    "apply_passive",
]


class BargmannPolynomial:
    """Sparse polynomial in the mode variables with complex coefficients.

    Terms map exponent tuples (one entry per variable) to coefficients; zero
    coefficients are never stored. The Fock amplitude carried by a monomial
    with exponents ``m`` is ``coefficient * sqrt(prod m_i!)``.
    """

    __slots__ = ("n_modes", "terms")

    def __init__(self, n_modes, terms=None):
        self.n_modes = int(n_modes)
        clean = {}
        for mono, coeff in (terms or {}).items():
            mono = tuple(int(x) for x in mono)
            if len(mono) != self.n_modes or any(x < 0 for x in mono):
                raise SchemaViolation(f"bad monomial {mono} for {self.n_modes} variables")
            c = complex(coeff)
            if c != 0:
                clean[mono] = clean.get(mono, 0j) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}

    @classmethod
    def _raw(cls, n_modes, terms):
        # internal fast path: terms already canonical (tuples, no zeros)
        p = cls.__new__(cls)
        p.n_modes = n_modes
        p.terms = terms
        return p

    @classmethod
    def constant(cls, value, n_modes):
        return cls._raw(n_modes, {(0,) * n_modes: complex(value)} if value != 0 else {})

    @classmethod
    def linear_form(cls, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            if c != 0:
                mono = [0] * n
                mono[i] = 1
                terms[tuple(mono)] = complex(c)
        return cls._raw(n, terms)

    @property
    def max_degree(self):
        return max((sum(m) for m in self.terms), default=0)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = BargmannPolynomial.constant(other, self.n_modes)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0j) + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        return BargmannPolynomial._raw(self.n_modes, out)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            if other == 0:
                return BargmannPolynomial._raw(self.n_modes, {})
            return BargmannPolynomial._raw(
                self.n_modes, {m: c * other for m, c in self.terms.items()}
            )
        out = {}
        add = int.__add__
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(map(add, m1, m2))
                s = out.get(m, 0j) + c1 * c2
                if s == 0:
                    out.pop(m, None)
                else:
                    out[m] = s
        return BargmannPolynomial._raw(self.n_modes, out)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (other * (-1.0))

    def __eq__(self, other):
        return (
            isinstance(other, BargmannPolynomial)
            and self.n_modes == other.n_modes
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"BargmannPolynomial(n_modes={self.n_modes}, terms={self.terms!r})"

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), 0j)

    def fock_amplitude(self, mono):
        mono = tuple(mono)
        c = self.terms.get(mono, 0j)
        return c * math.sqrt(math.prod(math.factorial(x) for x in mono))

    def norm_sq(self):
        return float(
            sum(abs(c) ** 2 * math.prod(math.factorial(x) for x in m)
                for m, c in self.terms.items())
        )

    def inner(self, other):
        """Fock inner product <self|other> of two polynomials."""
        total = 0j
        small, big = (self.terms, other.terms)
        if len(big) < len(small):
            small, big = big, small
            for m, c in small.items():
                if m in big:
                    total += big[m].conjugate() * c * math.prod(math.factorial(x) for x in m)
            return total
        for m, c in small.items():
            if m in big:
                total += c.conjugate() * big[m] * math.prod(math.factorial(x) for x in m)
        return total

    def to_json_terms(self):
        return [
            {"monomial": list(m), "re": c.real, "im": c.imag}
            for m, c in sorted(self.terms.items())
        ]


@dataclass(frozen=True)
class DetectionPattern:
    """Partition of the circuit modes into detected / vacuum-measured / output.

    Every detected mode registers exactly one photon; vacuum modes register
    zero; output modes are left free, in the stated order.
    """

    n_modes: int
    detected: tuple
    vacuum: tuple
    output: tuple

    def __post_init__(self):
        det = tuple(sorted(int(x) for x in self.detected))
        vac = tuple(sorted(int(x) for x in self.vacuum))
        out = tuple(int(x) for x in self.output)
        object.__setattr__(self, "detected", det)
        object.__setattr__(self, "vacuum", vac)
        object.__setattr__(self, "output", out)
        groups = det + vac + out
        if len(set(groups)) != len(groups):
            raise PatternModeClash(f"mode appears in two roles: {det}, {vac}, {out}")
        if set(groups) != set(range(self.n_modes)):
            raise PatternModeClash(
                f"pattern must cover all {self.n_modes} modes exactly once"
            )

    @classmethod
    def standard(cls, n_modes, detected, output=None):
        """Detected modes plus the default four output modes 0..3."""
        detected = tuple(sorted(int(x) for x in detected))
        if output is None:
            output = tuple(range(min(4, n_modes)))
        output = tuple(output)
        vacuum = tuple(m for m in range(n_modes) if m not in detected and m not in output)
        return cls(n_modes=n_modes, detected=detected, vacuum=vacuum, output=output)


@dataclass(frozen=True)
class ConditionalState:
    """Post-selected state: polynomial prefactor times the surviving exponential.

    ``poly`` ranges over the output-mode variables in ``pattern.output``
    order; ``residual_b`` is the output-block submatrix of the source
    pair-coupling matrix (exactly, no rescaling). Amplitudes are relative to
    the *unnormalized* parent ``exp`` state.
    """

    poly: BargmannPolynomial
    residual_b: np.ndarray
    pattern: DetectionPattern

    @property
    def n_outputs(self):
        return len(self.pattern.output)

    def to_json_obj(self):
        return {
            "detected": list(self.pattern.detected),
            "terms": self.poly.to_json_terms(),
            "residual_B": [
                [{"re": z.real, "im": z.imag} for z in row] for row in self.residual_b
            ],
            "output_modes": list(self.pattern.output),
            "n_modes": self.pattern.n_modes,
        }

    @classmethod
    def from_json_obj(cls, obj):
        try:
            detected = tuple(obj["detected"])
            output = tuple(obj["output_modes"])
            n_modes = int(obj["n_modes"])
            residual = np.array(
                [[complex(c["re"], c["im"]) for c in row] for row in obj["residual_B"]],
                dtype=np.complex128,
            )
            terms = {
                tuple(t["monomial"]): complex(t["re"], t["im"]) for t in obj["terms"]
            }
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"malformed conditional-state JSON: {exc}") from exc
        if residual.shape != (len(output), len(output)):
            raise SchemaViolation("residual_B shape disagrees with output_modes")
        pattern = DetectionPattern.standard(n_modes, detected, output=output)
        return cls(
            poly=BargmannPolynomial(len(output), terms),
            residual_b=residual,
            pattern=pattern,
        )


def _partial_matchings(items):
    """Yield (pairs, singles) partitions of ``items`` into 2-sets and 1-sets."""
    if not items:
        yield (), ()
        return
    first, rest = items[0], items[1:]
    for pairs, singles in _partial_matchings(rest):
        yield pairs, (first,) + singles
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1 :]
        for pairs, singles in _partial_matchings(remaining):
            yield ((first, partner),) + pairs, singles


def _singles_product_cache(b, pattern):
    """Memoized products of the detected-index linear forms over output modes."""
    out = list(pattern.output)
    k = len(out)
    forms = {
        s: BargmannPolynomial.linear_form(2.0 * b[s, out]) if k else
        BargmannPolynomial.constant(0.0, 0)
        for s in pattern.detected
    }
    cache = {(): BargmannPolynomial.constant(1.0, k)}

    def product(singles):
        if singles in cache:
            return cache[singles]
        poly = product(singles[:-1]) * forms[singles[-1]]
        cache[singles] = poly
        return poly

    return product, cache


def postselect(state: GaussianBargmann, pattern: DetectionPattern) -> ConditionalState:
    """Condition a Gaussian state on the detection pattern, exactly.

    Raises:
        PatternModeClash: pattern does not cover the state's modes.
        TooManyDetections: detected count exceeds the enumeration limit.
    """
    if pattern.n_modes != state.n_modes:
        raise PatternModeClash(
            f"pattern covers {pattern.n_modes} modes, state has {state.n_modes}"
        )
    detected = pattern.detected
    if len(detected) > LIMITS.max_detections:
        raise TooManyDetections(
            f"{len(detected)} detections exceeds limit {LIMITS.max_detections}"
        )
    b = state.b
    out = list(pattern.output)
    k = len(out)
    product, _ = _singles_product_cache(b, pattern)
    poly = BargmannPolynomial.constant(0.0, k)
    for pairs, singles in _partial_matchings(detected):
        coeff = 1.0 + 0.0j
        for s, t in pairs:
            coeff *= 2.0 * b[s, t]
        if coeff != 0:
            poly = poly + product(singles) * coeff
    residual = b[np.ix_(out, out)] if k else np.zeros((0, 0), dtype=np.complex128)
    return ConditionalState(poly=poly, residual_b=residual.copy(), pattern=pattern)


@dataclass(frozen=True)
class FourPhotonTerm:
    """One structural term of the four-detection expansion.

    ``pairs`` lists detected indices contracted against the pair matrix,
    ``singles`` those surviving as linear forms; ``poly`` is the term's full
    polynomial contribution including all combinatorial factors.
    """

    pairs: tuple
    singles: tuple
    poly: BargmannPolynomial


def four_photon_terms(state: GaussianBargmann, pattern: DetectionPattern):
    """The ten structural terms of a four-photon conditioning, exactly.

    Three pure pairings, six pair-times-bilinear cross terms, and one
    quartic term; their polynomial sum equals :func:`postselect` on the same
    input.
    """
    if len(pattern.detected) != 4:
        raise WrongDetectionCount(
            f"four-photon expansion requires 4 detected modes, got {len(pattern.detected)}"
        )
    if pattern.n_modes != state.n_modes:
        raise PatternModeClash(
            f"pattern covers {pattern.n_modes} modes, state has {state.n_modes}"
        )
    b = state.b
    product, _ = _singles_product_cache(b, pattern)
    terms = []
    for pairs, singles in _partial_matchings(pattern.detected):
        coeff = 1.0 + 0.0j
        for s, t in pairs:
            coeff *= 2.0 * b[s, t]
        terms.append(
            FourPhotonTerm(pairs=pairs, singles=singles, poly=product(singles) * coeff)
        )
    return terms


# --- dense amplitude grids ----------------------------------------------


@lru_cache(maxsize=32)
def _grid_tools(k, cutoff):
    """(total-degree mask, masked sqrt-factorial weights) for a k-mode grid."""
    axes = [np.arange(cutoff + 1) for _ in range(k)]
    totals = reduce(np.add.outer, axes)
    mask = totals <= cutoff
    sqf = [np.sqrt([math.factorial(n) for n in range(cutoff + 1)]) for _ in range(k)]
    weights = reduce(np.multiply.outer, sqf) * mask
    return mask, weights


@lru_cache(maxsize=4096)
def _slices_for_shift(shift):
    dst = tuple(slice(s, None) for s in shift)
    src = tuple(slice(None, -s if s else None) for s in shift)
    return dst, src


def _quad_entries(residual_b):
    """(dst slices, src slices, coefficient) of the form sum_ij b_ij x_i x_j."""
    k = residual_b.shape[0]
    entries = []
    for i in range(k):
        if residual_b[i, i] != 0:
            shift = [0] * k
            shift[i] = 2
            d, s = _slices_for_shift(tuple(shift))
            entries.append((d, s, residual_b[i, i]))
        for j in range(i + 1, k):
            c = residual_b[i, j] + residual_b[j, i]
            if c != 0:
                shift = [0] * k
                shift[i] = shift[j] = 1
                d, s = _slices_for_shift(tuple(shift))
                entries.append((d, s, c))
    return entries


def _shifted_add(dst, src, shift, coeff):
    if not any(shift):
        dst += coeff * src
        return
    dst_slices, src_slices = _slices_for_shift(shift)
    dst[dst_slices] += coeff * src[src_slices]


def amplitude_grid(poly: BargmannPolynomial, residual_b, cutoff: int):
    """Fock amplitudes of ``poly * exp(quadratic form)`` up to total ``cutoff``.

    Returns a dense complex array indexed by per-mode photon numbers;
    entries with total above ``cutoff`` are zero. Exact to the stated degree
    (the truncated exponential series terminates).

    Raises:
        CutoffTooSmall: cutoff below the polynomial degree.
        DimensionExplosion: grid would exceed the configured entry cap.
    """
    k = poly.n_modes
    if cutoff < poly.max_degree:
        raise CutoffTooSmall(
            f"cutoff {cutoff} below polynomial degree {poly.max_degree}"
        )
    if k == 0:
        grid = np.zeros((), dtype=np.complex128)
        grid[()] = poly.coefficient(())
        return grid
    if (cutoff + 1) ** k > LIMITS.max_grid_size:
        raise DimensionExplosion(
            f"grid of {(cutoff + 1) ** k} entries exceeds {LIMITS.max_grid_size}"
        )
    mask, weights = _grid_tools(k, cutoff)
    shape = (cutoff + 1,) * k
    residual_b = np.asarray(residual_b, dtype=np.complex128)
    entries = _quad_entries(residual_b)

    expgrid = np.zeros(shape, dtype=np.complex128)
    expgrid[(0,) * k] = 1.0
    if entries:
        term = expgrid.copy()
        for order in range(1, cutoff // 2 + 1):
            nxt = np.zeros(shape, dtype=np.complex128)
            for dst_slices, src_slices, coeff in entries:
                nxt[dst_slices] += coeff * term[src_slices]
            nxt *= mask
            nxt /= order
            term = nxt
            if not np.any(term):
                break
            expgrid += term

    out = np.zeros(shape, dtype=np.complex128)
    for mono, coeff in poly.terms.items():
        _shifted_add(out, expgrid, mono, coeff)
    return out * weights  # weights carry the total-degree mask


def _tail_of_monomial_times_exp(degree, k, lam, cutoff):
    """Certified upper bound on the squared norm beyond ``cutoff`` of
    ``x^q exp(Q)`` with ``|q| = degree`` and coupling singular values <= lam."""
    if lam <= 0.0:
        return 0.0
    total = 0.0
    n = max((cutoff - degree + 2) // 2, 0)
    comb = math.comb(n + k - 1, k - 1)
    while True:
        j = 2 * n + degree
        term = (j**degree if degree else 1.0) * comb * lam ** (2 * n)
        total += term
        ratio = lam**2 * (n + k) / (n + 1)
        if j:
            ratio *= ((j + 2) / j) ** degree
        if ratio < 0.9:
            total += term * ratio / (1.0 - ratio)
            return total
        comb = comb * (n + k) // (n + 1)
        n += 1
        if n > 10_000:  # coupling pathologically close to 1
            return float("inf")


def success_probability(state: GaussianBargmann, pattern: DetectionPattern, cutoff: int):
    """Probability of the detection pattern, with a certified truncation bound.

    The conditional state's squared norm is evaluated on the truncated grid
    and divided by the parent state's squared norm; the second return value
    bounds the weight lost to truncation (same normalization).

    Raises:
        CutoffTooSmall: cutoff below the conditional polynomial degree.
    """
    cond = postselect(state, pattern)
    if cutoff < cond.poly.max_degree:
        raise CutoffTooSmall(
            f"cutoff {cutoff} below conditional degree {cond.poly.max_degree}"
        )
    amps = amplitude_grid(cond.poly, cond.residual_b, cutoff)
    captured = float(np.sum(np.abs(amps) ** 2))
    parent_sq = state.norm**2

    k = cond.n_outputs
    lam = (
        float(np.linalg.svd(2.0 * cond.residual_b, compute_uv=False)[0]) if k else 0.0
    )
    tail_amp = 0.0
    for mono, coeff in cond.poly.terms.items():
        tail_amp += abs(coeff) * math.sqrt(
            _tail_of_monomial_times_exp(sum(mono), k, lam, cutoff)
        )
    bound = tail_amp**2 / parent_sq
    return captured / parent_sq, bound


def coherent_conditional(displacements, pattern: DetectionPattern):
    """Condition a coherent-product state ``exp(sum_i d_i a_i)`` on detections.

    Differentiation only pulls down constants, so the conditional is exactly
    ``prod_s d_s * exp(sum over output d_i a_i)``: a product state. Returns
    the constant and the output-restricted displacement vector.
    """
    d = np.asarray(displacements, dtype=np.complex128)
    if d.shape != (pattern.n_modes,):
        raise PatternModeClash(
            f"displacement vector length {d.shape} does not match {pattern.n_modes} modes"
        )
    constant = complex(np.prod([d[s] for s in pattern.detected])) if pattern.detected else 1.0 + 0j
    return constant, d[list(pattern.output)].copy()


def apply_passive(poly: BargmannPolynomial, passive_block) -> BargmannPolynomial:
    """Transform a polynomial state by a passive circuit with the given block.

    Creation variables substitute as ``x_i -> sum_j conj(passive[i, j]) x_j``,
    matching how a passive element pushes creation operators through.
    """
    u = np.conj(np.asarray(passive_block, dtype=np.complex128))
    k = poly.n_modes
    forms = [BargmannPolynomial.linear_form(u[i]) for i in range(k)]
    out = BargmannPolynomial.constant(0.0, k)
    for mono, coeff in poly.terms.items():
        factor = BargmannPolynomial.constant(coeff, k)
        for i, power in enumerate(mono):
            for _ in range(power):
                factor = factor * forms[i]
        out = out + factor
    return out
