"""Finite-dimensional state vectors, labeled tensor products and (anti)symmetrization.

Every basis vector carries a :class:`BasisLabel`; two labels are the same
basis vector exactly when their name and conjugation flag agree, and
distinct labels are orthonormal.  A :class:`CompositeState` is a finite sum
of product terms over an ordered tuple of *slots* (system, detector,
conjugate detector, ...).  Slots are distinguishable tensor factors, so all
inner products are computed slot by slot.

All objects here are immutable once constructed.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ._validation import as_complex_vector, check_int
from .exceptions import ShapeError, ValidationError

#: absolute tolerance used by exact-identity checks
ATOL = 1e-12
#: terms whose merged coefficient falls below this are dropped
ZERO_COEF = 1e-15


class Slot(str, enum.Enum):
    S = "S"
    D = "D"
    DBAR = "Dbar"
    S_HOLE = "S_hole"
    D_HOLE = "D_hole"
    DBAR_HOLE = "Dbar_hole"
    # particle labels 1 and 2 of a bare two-particle system
    P1 = "1"
    P2 = "2"

    def conjugate(self) -> "Slot":
        return _SLOT_CONJUGATE.get(self, self)


_SLOT_CONJUGATE = {
    Slot.D: Slot.DBAR,
    Slot.DBAR: Slot.D,
    Slot.D_HOLE: Slot.DBAR_HOLE,
    Slot.DBAR_HOLE: Slot.D_HOLE,
}


class Statistics(str, enum.Enum):
    BOSE = "bose"
    FERMI = "fermi"

    @property
    def sign(self) -> int:
        return 1 if self is Statistics.BOSE else -1


@dataclass(frozen=True, order=True)
class BasisLabel:
    name: str
    conjugated: bool = False

    def conjugate(self) -> "BasisLabel":
        return BasisLabel(self.name, not self.conjugated)

    def __str__(self) -> str:
        return f"{self.name}*" if self.conjugated else self.name


def default_labels(dim: int) -> tuple[BasisLabel, ...]:
    return tuple(BasisLabel(str(k)) for k in range(dim))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """A complex amplitude vector over labeled orthonormal basis vectors.

    Normalization is not enforced on construction so that linear
    combinations can be formed; call :meth:`normalize` explicitly.
    """

    amplitudes: np.ndarray
    labels: tuple[BasisLabel, ...] = None
    slot: Slot = Slot.S

    def __post_init__(self):
        amps = as_complex_vector(self.amplitudes)
        labels = default_labels(amps.size) if self.labels is None else tuple(self.labels)
        if len(labels) != amps.size:
            raise ShapeError(f"{len(labels)} labels for {amps.size} amplitudes")
        if len(set(labels)) != len(labels):
            raise ValidationError("basis labels must be distinct")
        object.__setattr__(self, "amplitudes", _freeze(amps))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "slot", Slot(self.slot))

    @classmethod
    def basis(cls, k: int, dim: int, slot: Slot = Slot.S, labels=None) -> "PureState":
        amps = np.zeros(dim, dtype=np.complex128)
        amps[k] = 1.0
        return cls(amps, labels, slot)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "PureState":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return PureState(self.amplitudes / n, self.labels, self.slot)

    def with_slot(self, slot: Slot) -> "PureState":
        if slot == self.slot:
            return self
        return PureState(self.amplitudes, self.labels, slot)

    def inner(self, other: "PureState") -> complex:
        """<self|other>, matching basis vectors by label."""
        if self.labels == other.labels:
            return complex(np.vdot(self.amplitudes, other.amplitudes))
        index = {lab: k for k, lab in enumerate(other.labels)}
        total = 0j
        for k, lab in enumerate(self.labels):
            j = index.get(lab)
            if j is not None:
                total += np.conj(self.amplitudes[k]) * other.amplitudes[j]
        return complex(total)

    def components(self) -> dict[BasisLabel, complex]:
        return dict(self._components)

    @cached_property
    def _components(self) -> tuple[tuple[BasisLabel, complex], ...]:
        return tuple(
            (lab, complex(a)) for lab, a in zip(self.labels, self.amplitudes) if a != 0
        )

    @cached_property
    def _key(self) -> "_FactorKey":
        return _FactorKey(self.labels, self.amplitudes.tobytes())

    def key(self) -> "_FactorKey":
        """Hashable identity used when merging like product terms."""
        return self._key

    def _check_compatible(self, other: "PureState") -> None:
        if self.labels != other.labels:
            raise ShapeError("states are expanded over different bases")

    def __mul__(self, c) -> "PureState":
        return PureState(self.amplitudes * complex(c), self.labels, self.slot)

    __rmul__ = __mul__

    def __add__(self, other: "PureState") -> "PureState":
        self._check_compatible(other)
        return PureState(self.amplitudes + other.amplitudes, self.labels, self.slot)

    def __sub__(self, other: "PureState") -> "PureState":
        return self + (-1) * other

    def __neg__(self) -> "PureState":
        return self * -1

    def allclose(self, other: "PureState", atol: float = ATOL) -> bool:
        return (
            self.labels == other.labels
            and self.slot == other.slot
            and bool(np.all(np.abs(self.amplitudes - other.amplitudes) <= atol))
        )

    def __repr__(self) -> str:
        amps = ", ".join(f"{a:.6g}" for a in self.amplitudes)
        return f"PureState([{amps}], slot={self.slot.value})"


class _FactorKey:
    """Labels plus raw amplitude bytes, with the hash computed once."""

    __slots__ = ("labels", "data", "_hash")

    def __init__(self, labels, data: bytes):
        self.labels = labels
        self.data = data
        self._hash = hash((labels, data))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return (
            self._hash == other._hash and self.data == other.data and self.labels == other.labels
        )


def conjugate_state(psi: PureState) -> PureState:
    """Complex-conjugate the amplitudes, bar every label, and move to the conjugate slot.

    The map is antilinear: ``conjugate_state(c * psi) == conj(c) * conjugate_state(psi)``.
    """
    return PureState(
        np.conj(psi.amplitudes),
        tuple(lab.conjugate() for lab in psi.labels),
        psi.slot.conjugate(),
    )


@dataclass(frozen=True)
class ProductTerm:
    coefficient: complex
    factors: tuple[PureState, ...]

    def key(self) -> tuple:
        return tuple(f.key() for f in self.factors)


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Sum of product terms over a fixed, ordered slot signature.

    The term list is canonical: like terms are merged and terms with
    ``|coefficient| < 1e-15`` are dropped, so an exactly cancelling
    combination has no terms at all.
    """

    slots: tuple[Slot, ...]
    terms: tuple[ProductTerm, ...] = field(default=())

    def __post_init__(self):
        slots = tuple(Slot(s) for s in self.slots)
        if not slots:
            raise ValidationError("a composite needs at least one slot")
        merged: dict[tuple, list] = {}
        for term in self.terms:
            if len(term.factors) != len(slots):
                raise ShapeError(
                    f"term has {len(term.factors)} factors for slot signature {_fmt_slots(slots)}"
                )
            factors = tuple(f.with_slot(s) for f, s in zip(term.factors, slots))
            key = tuple(f.key() for f in factors)
            if key in merged:
                merged[key][0] += complex(term.coefficient)
            else:
                merged[key] = [complex(term.coefficient), factors]
        terms = tuple(
            ProductTerm(c, fs) for c, fs in merged.values() if abs(c) >= ZERO_COEF
        )
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_products(cls, slots: Sequence[Slot], items: Iterable[tuple]) -> "CompositeState":
        """Build from ``(coefficient, factor, factor, ...)`` tuples."""
        return cls(tuple(slots), tuple(ProductTerm(c, tuple(fs)) for c, *fs in items))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def dims(self) -> tuple[int, ...] | None:
        if not self.terms:
            return None
        return tuple(f.dim for f in self.terms[0].factors)

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], dtype=np.complex128)

    def expand(self) -> dict[tuple[BasisLabel, ...], complex]:
        """Components in the labeled product basis, one entry per nonzero basis product."""
        out: dict[tuple[BasisLabel, ...], complex] = {}
        for term in self.terms:
            per_slot = [f._components for f in term.factors]
            for combo in itertools.product(*per_slot):
                key = tuple(lab for lab, _ in combo)
                amp = term.coefficient
                for _, a in combo:
                    amp *= a
                out[key] = out.get(key, 0j) + amp
        return out

    def norm(self) -> float:
        return math.sqrt(max(inner_product(self, self).real, 0.0))

    def normalize(self) -> "CompositeState":
        n = self.norm()
        if n == 0.0:
            raise ValidationError("cannot normalize the zero composite")
        return self * (1.0 / n)

    def _same_slots(self, other: "CompositeState") -> None:
        if self.slots != other.slots:
            raise ShapeError(
                f"slot signature {_fmt_slots(self.slots)} != {_fmt_slots(other.slots)}"
            )

    def __mul__(self, c) -> "CompositeState":
        c = complex(c)
        return CompositeState(
            self.slots, tuple(ProductTerm(t.coefficient * c, t.factors) for t in self.terms)
        )

    __rmul__ = __mul__

    def __add__(self, other: "CompositeState") -> "CompositeState":
        self._same_slots(other)
        return CompositeState(self.slots, self.terms + other.terms)

    def __sub__(self, other: "CompositeState") -> "CompositeState":
        return self + other * -1

    def __neg__(self) -> "CompositeState":
        return self * -1

    def tensor(self, other: "CompositeState") -> "CompositeState":
        """Tensor product; the slot signature is the concatenation of both."""
        terms = tuple(
            ProductTerm(a.coefficient * b.coefficient, a.factors + b.factors)
            for a in self.terms
            for b in other.terms
        )
        return CompositeState(self.slots + other.slots, terms)

    def reorder(self, slots: Sequence[Slot]) -> "CompositeState":
        """Permute tensor factors so the signature becomes ``slots``."""
        slots = tuple(Slot(s) for s in slots)
        if sorted(slots) != sorted(self.slots) or len(set(slots)) != len(slots):
            raise ShapeError(f"cannot reorder {_fmt_slots(self.slots)} into {_fmt_slots(slots)}")
        perm = [self.slots.index(s) for s in slots]
        return CompositeState(
            slots,
            tuple(ProductTerm(t.coefficient, tuple(t.factors[k] for k in perm)) for t in self.terms),
        )

    def swap_slots(self, a: Slot, b: Slot) -> "CompositeState":
        """Exchange the contents of two slots, keeping the slot signature."""
        ia, ib = self.slots.index(Slot(a)), self.slots.index(Slot(b))
        terms = []
        for t in self.terms:
            fs = list(t.factors)
            fs[ia], fs[ib] = fs[ib], fs[ia]
            terms.append(ProductTerm(t.coefficient, tuple(fs)))
        return CompositeState(self.slots, tuple(terms))

    def dump(self) -> str:
        """Deterministic text form, one line per basis product.

        ``coef_re coef_im : slot=label, slot=label``, sorted by labels.
        """
        lines = []
        for key, c in sorted(self.expand().items()):
            if abs(c) < ZERO_COEF:
                continue
            parts = ", ".join(f"{s.value}={lab}" for s, lab in zip(self.slots, key))
            lines.append(f"{_fmt_float(c.real)} {_fmt_float(c.imag)} : {parts}")
        return "\n".join(lines)


def _fmt_float(x: float) -> str:
    return repr(float(x) + 0.0)


def _fmt_slots(slots) -> str:
    return "(" + ", ".join(s.value for s in slots) + ")"


def _check_signature(a: CompositeState, b: CompositeState) -> None:
    if a.slots != b.slots:
        raise ShapeError(f"slot signature {_fmt_slots(a.slots)} != {_fmt_slots(b.slots)}")
    da, db = a.dims(), b.dims()
    if da is not None and db is not None and da != db:
        raise ShapeError(f"slot dimensions {da} != {db}")


def inner_product(a: CompositeState, b: CompositeState) -> complex:
    """<a|b>, conjugate-linear in ``a``; slots are distinguishable tensor factors."""
    _check_signature(a, b)
    ea, eb = a.expand(), b.expand()
    if len(eb) < len(ea):
        return complex(sum(np.conj(ea[k]) * v for k, v in eb.items() if k in ea))
    return complex(sum(np.conj(v) * eb[k] for k, v in ea.items() if k in eb))


def component_residual(a: CompositeState, b: CompositeState) -> float:
    """Largest absolute difference between corresponding components of ``a`` and ``b``."""
    _check_signature(a, b)
    ea, eb = a.expand(), b.expand()
    keys = set(ea) | set(eb)
    if not keys:
        return 0.0
    return max(abs(ea.get(k, 0j) - eb.get(k, 0j)) for k in keys)


def product_state(*factors: PureState, coefficient: complex = 1.0) -> CompositeState:
    """Single-term composite whose slot signature is taken from the factors."""
    return CompositeState(
        tuple(f.slot for f in factors), (ProductTerm(coefficient, tuple(factors)),)
    )


def permutation_sign(perm: Sequence[int]) -> int:
    """Parity of a permutation of ``range(n)``: +1 for even, -1 for odd."""
    perm = list(perm)
    n = len(perm)
    if sorted(perm) != list(range(n)) or not all(isinstance(p, (int, np.integer)) for p in perm):
        raise ValidationError(f"{perm!r} is not a permutation of range({n})")
    seen = [False] * n
    transpositions = 0
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        transpositions += length - 1
    return -1 if transpositions % 2 else 1


def symmetrize_pair(psi_a: PureState, psi_b: PureState, statistics="bose") -> CompositeState:
    """(psi_a x psi_b +/- psi_b x psi_a) / sqrt(2) over particle slots 1 and 2.

    No renormalization is applied.  Two identical bosons therefore come out
    as ``sqrt(2) * psi x psi`` and two identical fermions as the zero
    composite.
    """
    statistics = Statistics(statistics)
    if psi_a.labels != psi_b.labels:
        raise ShapeError("both particles must live in the same single-particle space")
    r = 1.0 / math.sqrt(2.0)
    return CompositeState.from_products(
        (Slot.P1, Slot.P2),
        [(r, psi_a, psi_b), (statistics.sign * r, psi_b, psi_a)],
    )


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n: int = 4096

    def __post_init__(self):
        check_int(self.n, "grid point count", minimum=3)
        if not self.hi > self.lo:
            raise ValidationError(f"grid extent [{self.lo}, {self.hi}] is empty")

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    def weights(self) -> np.ndarray:
        """Trapezoidal quadrature weights."""
        dx = (self.hi - self.lo) / (self.n - 1)
        w = np.full(self.n, dx)
        w[0] = w[-1] = dx / 2
        return w


@dataclass(frozen=True)
class GaussianPacket:
    """1-D Gaussian wave packet whose probability density has standard deviation ``width``."""

    center: float
    width: float
    grid: Grid

    def __post_init__(self):
        if not self.width > 0:
            raise ValidationError(f"packet width must be positive, got {self.width}")

    def sample(self) -> np.ndarray:
        x = self.grid.points()
        g = np.exp(-((x - self.center) ** 2) / (4.0 * self.width**2))
        return g / math.sqrt(np.sum(self.grid.weights() * g * g))


def _grid_inner(f: np.ndarray, g: np.ndarray, grid: Grid) -> complex:
    return complex(np.sum(grid.weights() * np.conj(f) * g))


def exchange_term_norm(separation: float, width: float, grid: Grid | None = None) -> float:
    """Weight of the exchange term of a two-packet symmetrized state.

    Two packets sit at -separation/2 (state ``a``) and +separation/2
    (state ``b``).  The symmetrized wave function is
    ``[psi(x1,a) psi(x2,b) +/- psi(x2,a) psi(x1,b)] / sqrt(2)``.  Returned is
    the magnitude of the exchange term's component along the direct term,
    relative to the direct term itself.  It equals 1 at full overlap and, for
    Gaussians, ``exp(-separation**2 / (4 width**2))`` in general.
    """
    if not width > 0:
        raise ValidationError(f"width must be positive, got {width}")
    half = abs(separation) / 2.0
    if grid is None:
        reach = half + 8.0 * width
        grid = Grid(-reach, reach, 4096)
    if grid.lo > -half - 6.0 * width or grid.hi < half + 6.0 * width:
        raise ValidationError(
            f"grid [{grid.lo}, {grid.hi}] does not cover both packets to 6 widths"
        )
    psi_a = GaussianPacket(-half, width, grid).sample()
    psi_b = GaussianPacket(half, width, grid).sample()
    # Both terms are products of one-particle functions on a product grid, so
    # the two-particle trapezoid sum factorizes into one-particle overlaps.
    direct = _grid_inner(psi_a, psi_a, grid) * _grid_inner(psi_b, psi_b, grid)
    cross = _grid_inner(psi_a, psi_b, grid) * _grid_inner(psi_b, psi_a, grid)
    return abs(cross) / abs(direct)
