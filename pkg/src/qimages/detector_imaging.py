"""Detector sea, system-detector (anti)symmetrization and conjugate images.

The detector holds ``N`` orthonormal single-particle states, each paired with
its conjugate anti-state, so that the sea

    Psi_D = (1/sqrt(N)) sum_j psi_Dj psi~_Dj

is neutral.  Composites built here use the slot signature ``(S, D, Dbar)``:
incoming system, detector particle, detector anti-state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_index, check_int
from .collapse_walk import SimplexPoint
from .exceptions import ConsistencyError, ShapeError, ValidationError
from .state_algebra import (
    ATOL,
    CompositeState,
    ProductTerm,
    PureState,
    Slot,
    component_residual,
    conjugate_state,
    inner_product,
)

SD_SLOTS = (Slot.S, Slot.D, Slot.DBAR)


@dataclass(frozen=True, eq=False)
class DetectorSea:
    N: int
    basis: tuple[PureState, ...]
    conjugates: tuple[PureState, ...]

    def system(self, j: int) -> PureState:
        """Detector state ``j`` carried by the incoming system slot."""
        return self.basis[j].with_slot(Slot.S)

    def gram(self) -> np.ndarray:
        return np.array([[a.inner(b) for b in self.basis] for a in self.basis])

    def singlet(self) -> CompositeState:
        """The neutral sea sum_j psi_Dj psi~_Dj / sqrt(N) over slots (D, Dbar)."""
        c = 1.0 / math.sqrt(self.N)
        return CompositeState.from_products(
            (Slot.D, Slot.DBAR), [(c, d, dbar) for d, dbar in zip(self.basis, self.conjugates)]
        )


def build_sea(N: int, basis=None) -> DetectorSea:
    """Construct a detector sea of ``N`` state/anti-state pairs.

    ``basis`` optionally gives the detector states as the columns of an
    ``N x N`` unitary matrix; the default is the measurement eigenbasis.
    """
    N = check_int(N, "N", minimum=2)
    if basis is None:
        U = np.eye(N, dtype=np.complex128)
    else:
        U = np.asarray(basis, dtype=np.complex128)
        if U.shape != (N, N):
            raise ShapeError(f"basis must have shape ({N}, {N}), got {U.shape}")
        if np.max(np.abs(U.conj().T @ U - np.eye(N))) > ATOL:
            raise ValidationError("detector basis is not orthonormal to 1e-12")
    states = tuple(PureState(U[:, j], slot=Slot.D) for j in range(N))
    return DetectorSea(N, states, tuple(conjugate_state(s) for s in states))


def _terms(sea: DetectorSea, items) -> CompositeState:
    return CompositeState(SD_SLOTS, tuple(ProductTerm(c, fs) for c, *fs in items))


def combine_unsymmetrized(i: int, sea: DetectorSea) -> CompositeState:
    """psi_Si placed next to the whole sea, without any symmetrization."""
    i = check_index(i, sea.N)
    c = 1.0 / math.sqrt(sea.N)
    s = sea.system(i)
    return _terms(sea, [(c, s, sea.basis[j], sea.conjugates[j]) for j in range(sea.N)])


def combine_role_swapped(i: int, sea: DetectorSea) -> CompositeState:
    """Counterpart of :func:`combine_unsymmetrized` with the incoming state in the detector slot.

    (1/sqrt(N)) sum_j psi_Sj psi_Di psi~_Dj
    """
    i = check_index(i, sea.N)
    c = 1.0 / math.sqrt(sea.N)
    d = sea.basis[i]
    return _terms(sea, [(c, sea.system(j), d, sea.conjugates[j]) for j in range(sea.N)])


def symmetrize_boson(i: int, sea: DetectorSea) -> CompositeState:
    """Bosonic symmetrization of incoming state ``i`` with the sea.

    (1/sqrt(2N)) sum_{j!=i} (psi_Si psi_Dj + psi_Sj psi_Di) psi~_Dj
        + (1/sqrt(N)) psi_Si psi_Di psi~_Di
    """
    i = check_index(i, sea.N)
    N = sea.N
    pair = 1.0 / math.sqrt(2 * N)
    s_i, d_i = sea.system(i), sea.basis[i]
    items = []
    for j in range(N):
        if j == i:
            continue
        items.append((pair, s_i, sea.basis[j], sea.conjugates[j]))
        items.append((pair, sea.system(j), d_i, sea.conjugates[j]))
    items.append((1.0 / math.sqrt(N), s_i, d_i, sea.conjugates[i]))
    return _terms(sea, items)


@dataclass(frozen=True, eq=False)
class ExchangeDecomposition:
    """Symmetric part plus the exchange term of a bosonic system-detector state."""

    symmetric_part: CompositeState
    exchange_term: ProductTerm
    exchange_coefficient: complex
    residual: float

    def reassemble(self) -> CompositeState:
        return self.symmetric_part + CompositeState(
            self.symmetric_part.slots, (self.exchange_term,)
        )

    def to_dict(self) -> dict:
        c = complex(self.exchange_coefficient)
        return {"exchange_coefficient": [c.real, c.imag], "residual": float(self.residual)}


def decompose_exchange(i: int, sea: DetectorSea) -> ExchangeDecomposition:
    """Split the bosonic composite into (Psi_SD0 + Psi_DS0)/sqrt(2) and an exchange term.

    The exchange term is ``(1 - sqrt(2))/sqrt(N) psi_Si psi_Di psi~_Di``;
    ``residual`` is the largest component deviation of the reassembled sum
    from :func:`symmetrize_boson`.
    """
    i = check_index(i, sea.N)
    symmetric = (combine_unsymmetrized(i, sea) + combine_role_swapped(i, sea)) * (
        1.0 / math.sqrt(2.0)
    )
    coef = (1.0 - math.sqrt(2.0)) / math.sqrt(sea.N)
    term = ProductTerm(coef, (sea.system(i), sea.basis[i], sea.conjugates[i]))
    partial = ExchangeDecomposition(symmetric, term, coef, 0.0)
    residual = component_residual(partial.reassemble(), symmetrize_boson(i, sea))
    return ExchangeDecomposition(symmetric, term, coef, residual)


def antisymmetrize_fermion(i: int, sea: DetectorSea) -> CompositeState:
    """(1/sqrt(2(N-1))) sum_{j!=i} (psi_Si psi_Dj - psi_Sj psi_Di) psi~_Dj"""
    i = check_index(i, sea.N)
    c = 1.0 / math.sqrt(2 * (sea.N - 1))
    s_i, d_i = sea.system(i), sea.basis[i]
    items = []
    for j in range(sea.N):
        if j == i:
            continue
        items.append((c, s_i, sea.basis[j], sea.conjugates[j]))
        items.append((-c, sea.system(j), d_i, sea.conjugates[j]))
    return _terms(sea, items)


def self_pairing_amplitude(state: CompositeState) -> float:
    """Largest |amplitude| on components whose S and D factors are the same basis vector."""
    s, d = state.slots.index(Slot.S), state.slots.index(Slot.D)
    amps = [abs(c) for key, c in state.expand().items() if key[s] == key[d]]
    return max(amps, default=0.0)


def hole_pair(i: int, sea: DetectorSea) -> CompositeState:
    """Hole/anti-hole pair: sum_{j!=i} psi_Dj psi~_Dj over slots (D, Dbar)."""
    i = check_index(i, sea.N)
    return CompositeState.from_products(
        (Slot.D, Slot.DBAR),
        [(1.0, sea.basis[j], sea.conjugates[j]) for j in range(sea.N) if j != i],
    )


def system_hole_pair(i: int, sea: DetectorSea) -> CompositeState:
    """System hole against the detector anti-hole: sum_{j!=i} psi_Sj psi~_Dj over (S, Dbar)."""
    i = check_index(i, sea.N)
    return CompositeState.from_products(
        (Slot.S, Slot.DBAR),
        [(1.0, sea.system(j), sea.conjugates[j]) for j in range(sea.N) if j != i],
    )


def _hole_terms(i: int, sea: DetectorSea) -> tuple[CompositeState, CompositeState]:
    i = check_index(i, sea.N)
    incoming = CompositeState((Slot.S,), (ProductTerm(1.0, (sea.system(i),)),))
    in_detector = CompositeState((Slot.D,), (ProductTerm(1.0, (sea.basis[i],)),))
    first = incoming.tensor(hole_pair(i, sea))
    second = in_detector.tensor(system_hole_pair(i, sea)).reorder(SD_SLOTS)
    return first, second


def hole_reduce(i: int, sea: DetectorSea) -> tuple[CompositeState, float]:
    """Rewrite the fermionic composite through hole states.

    Returns ``(psi_Si psi^h_Di - psi_Di psi^h_Si) psi~^h_Di`` expanded over
    ``(S, D, Dbar)`` together with the measured real factor ``lam`` such that
    the hole form equals ``lam * antisymmetrize_fermion(i, sea)``.  The
    factor is ``sqrt(2(N-1))``.
    """
    first, second = _hole_terms(i, sea)
    hole_form = first - second
    target = antisymmetrize_fermion(i, sea)
    lam = inner_product(target, hole_form) / inner_product(target, target)
    if abs(lam.imag) > ATOL:
        raise ConsistencyError(f"hole form is not a real multiple of the fermion state: {lam}")
    return hole_form, lam.real


def fermion_effective_product(i: int, sea: DetectorSea) -> CompositeState:
    """psi_Si psi^h_Di psi~^h_Di, normalized: the hole form with its second term dropped."""
    first, _ = _hole_terms(i, sea)
    return first.normalize()


def dropped_term_fraction(i: int, sea: DetectorSea) -> float:
    """Norm of the neglected ``psi_Di psi^h_Si psi~^h_Di`` term relative to the full hole form."""
    first, second = _hole_terms(i, sea)
    return second.norm() / (first - second).norm()


@dataclass(frozen=True, eq=False)
class ImageState:
    state: PureState


def extract_image(psi_s: PureState) -> ImageState:
    """Conjugate image of an incoming state: amplitudes conjugated, labels barred, slot Dbar.

    Antilinear in ``psi_s``; no normalization is applied.
    """
    return ImageState(conjugate_state(psi_s).with_slot(Slot.DBAR))


@dataclass(frozen=True, eq=False)
class BoundState:
    """Diagonal, conjugate-paired part of ``psi x image``.

    ``weights[k]`` is the coefficient of the term pairing eigenlabel ``k``
    with its own conjugate; ``cross_fraction`` is the norm share of the
    discarded off-diagonal terms.
    """

    terms: tuple[ProductTerm, ...]
    weights: np.ndarray
    cross_fraction: float
    slots: tuple[Slot, ...]

    def composite(self) -> CompositeState:
        return CompositeState(self.slots, self.terms)

    def to_dict(self) -> dict:
        w = [float(x) for x in self.weights]
        return {"weights": w, "residual": abs(sum(w) - 1.0)}


def form_bound_state(psi_s: PureState, image: ImageState, partner: str = "S") -> BoundState:
    """Pair an incoming state with its image and keep the diagonal terms.

    ``partner="S"`` builds |SD> from the incoming system state;
    ``partner="D"`` builds |DD> from its indistinguishable extension in the
    detector.  Both give the same weights.
    """
    img = image.state
    if img.dim != psi_s.dim:
        raise ShapeError(f"image dimension {img.dim} != state dimension {psi_s.dim}")
    if img.labels != tuple(lab.conjugate() for lab in psi_s.labels) or not np.allclose(
        img.amplitudes, np.conj(psi_s.amplitudes), rtol=0, atol=ATOL
    ):
        raise ValidationError("image is not the conjugate image of the given state")
    slot = {"S": Slot.S, "D": Slot.D}.get(partner)
    if slot is None:
        raise ValidationError(f"partner must be 'S' or 'D', got {partner!r}")
    source = psi_s.with_slot(slot)
    dim = psi_s.dim
    terms, weights, cross = [], np.zeros(dim), 0.0
    for k in range(dim):
        for l in range(dim):
            c = complex(source.amplitudes[k] * img.amplitudes[l])
            if k != l:
                cross += abs(c) ** 2
                continue
            weights[k] = c.real
            if c != 0:
                terms.append(
                    ProductTerm(
                        c.real,
                        (
                            PureState.basis(k, dim, slot, source.labels),
                            PureState.basis(l, dim, Slot.DBAR, img.labels),
                        ),
                    )
                )
    total = cross + float(np.sum(weights**2))
    frac = math.sqrt(cross / total) if total > 0 else 0.0
    return BoundState(tuple(terms), weights, frac, (slot, Slot.DBAR))


def born_weights(bound: BoundState) -> SimplexPoint:
    """Bound-state weights as a point on the probability simplex."""
    w = np.asarray(bound.weights, dtype=np.float64)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ConsistencyError(f"bound-state weights sum to {w.sum():.12g}, not 1")
    return SimplexPoint(w)


def no_cloning_witness(psi: PureState, phi: PureState) -> float:
    """|<psi|phi> - <psi|phi>^2|.

    A linear unitary cloner maps psi -> psi x psi and phi -> phi x phi and
    must preserve inner products, forcing <psi|phi> = <psi|phi>^2.  The
    witness is the violation of that requirement: zero only for identical
    or orthogonal states.
    """
    if psi.dim != phi.dim:
        raise ShapeError(f"dimension mismatch: {psi.dim} vs {phi.dim}")
    s = psi.inner(phi)
    return abs(s - s * s)
