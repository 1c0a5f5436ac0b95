import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qimages.exceptions import ShapeError, ValidationError
from qimages.state_algebra import (
    BasisLabel,
    CompositeState,
    Grid,
    GaussianPacket,
    ProductTerm,
    PureState,
    Slot,
    component_residual,
    conjugate_state,
    exchange_term_norm,
    inner_product,
    permutation_sign,
    product_state,
    symmetrize_pair,
)

SQ2 = math.sqrt(2.0)


def single(psi: PureState) -> CompositeState:
    return product_state(psi)


def random_state(rng, dim, slot=Slot.S):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v), slot=slot)


# -- inner_product -----------------------------------------------------------


def test_inner_product_normalized_state_is_one():
    psi = PureState([0.6, 0.8j])
    assert inner_product(single(psi), single(psi)) == pytest.approx(1.0, abs=1e-12)


def test_inner_product_orthogonal_basis_states():
    a, b = PureState.basis(0, 2), PureState.basis(1, 2)
    assert inner_product(single(a), single(b)) == 0


def test_inner_product_real_example():
    # direct arithmetic: 0.6 * 0.8 + 0.8 * 0.6
    expected = 0.6 * 0.8 + 0.8 * 0.6
    got = inner_product(single(PureState([0.6, 0.8])), single(PureState([0.8, 0.6])))
    assert got == pytest.approx(0.96, abs=1e-15)
    assert got == pytest.approx(expected, abs=1e-15)


def test_inner_product_slot_mismatch():
    a = product_state(PureState([1, 0], slot=Slot.S))
    b = product_state(PureState([1, 0], slot=Slot.D))
    with pytest.raises(ShapeError):
        inner_product(a, b)


def test_inner_product_dimension_mismatch():
    with pytest.raises(ShapeError):
        inner_product(single(PureState([1, 0])), single(PureState([1, 0, 0])))


def test_inner_product_matches_dense_kron():
    rng = np.random.default_rng(3)
    a1, a2, b1, b2 = (random_state(rng, 3) for _ in range(4))
    left = CompositeState.from_products((Slot.S, Slot.D), [(0.3, a1, a2), (0.7j, b1, b2)])
    right = CompositeState.from_products((Slot.S, Slot.D), [(1.0, b1, a2)])
    dense_l = 0.3 * np.kron(a1.amplitudes, a2.amplitudes) + 0.7j * np.kron(b1.amplitudes, b2.amplitudes)
    dense_r = np.kron(b1.amplitudes, a2.amplitudes)
    assert inner_product(left, right) == pytest.approx(np.vdot(dense_l, dense_r), abs=1e-12)


complex_numbers = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(c=complex_numbers, seed=st.integers(0, 2**32 - 1))
def test_inner_product_conjugate_bilinear(c, seed):
    rng = np.random.default_rng(seed)
    a = CompositeState.from_products(
        (Slot.S, Slot.D), [(1.0, random_state(rng, 2), random_state(rng, 2))]
    )
    b = CompositeState.from_products(
        (Slot.S, Slot.D), [(0.5, random_state(rng, 2), random_state(rng, 2))]
    )
    ab = inner_product(a, b)
    assert inner_product(a * c, b) == pytest.approx(np.conj(c) * ab, abs=1e-9)
    assert inner_product(a, b * c) == pytest.approx(c * ab, abs=1e-9)


# -- conjugate_state ---------------------------------------------------------


def test_conjugate_real_state_fixed_but_labels_barred():
    psi = PureState([1, 0], slot=Slot.D)
    bar = conjugate_state(psi)
    np.testing.assert_array_equal(bar.amplitudes, [1, 0])
    assert bar.labels == (BasisLabel("0", True), BasisLabel("1", True))
    assert bar.slot is Slot.DBAR


def test_conjugate_complex_amplitudes():
    r = 1 / SQ2
    bar = conjugate_state(PureState([1j * r, r]))
    np.testing.assert_allclose(bar.amplitudes, [-1j * r, r], atol=1e-15)


def test_conjugate_is_involution():
    rng = np.random.default_rng(0)
    for slot in Slot:
        psi = random_state(rng, 4, slot)
        assert conjugate_state(conjugate_state(psi)).allclose(psi)


def test_conjugate_antilinear_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        psi = random_state(rng, int(rng.integers(2, 9)))
        c = complex(rng.normal(), rng.normal())
        assert conjugate_state(c * psi).allclose(np.conj(c) * conjugate_state(psi))


def test_label_conjugation_involution():
    lab = BasisLabel("alpha")
    assert lab.conjugate().conjugate() == lab
    assert lab.conjugate() != lab


# -- permutation_sign ----------------------------------------------------------


def inversion_parity(perm):
    inv = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def test_permutation_sign_examples():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0]) == -1
    three_cycle = [1, 2, 0]
    assert inversion_parity(three_cycle) == 1
    assert permutation_sign(three_cycle) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_permutation_sign_matches_inversions_exhaustively(n):
    for perm in itertools.permutations(range(n)):
        assert permutation_sign(perm) == inversion_parity(perm)


@pytest.mark.parametrize("bad", [[0, 0], [1, 2], [0, 2, 1, 5], ["a", "b"]])
def test_permutation_sign_rejects_malformed(bad):
    with pytest.raises(ValidationError):
        permutation_sign(bad)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))))
def test_permutation_sign_is_homomorphism(pq):
    p, q = pq
    composed = [p[q[k]] for k in range(len(p))]
    assert permutation_sign(composed) == permutation_sign(p) * permutation_sign(q)


# -- symmetrize_pair -----------------------------------------------------------


def test_identical_bosons_carry_sqrt2():
    alpha = PureState.basis(0, 2)
    sym = symmetrize_pair(alpha, alpha, "bose")
    assert len(sym) == 1
    assert sym.terms[0].coefficient == pytest.approx(1.41421356, abs=1e-8)
    assert sym.norm() == pytest.approx(SQ2, abs=1e-12)
    assert sym.normalize().norm() == pytest.approx(1.0, abs=1e-12)


def test_identical_fermions_vanish():
    psi = PureState([0.6, 0.8j])
    sym = symmetrize_pair(psi, psi, "fermi")
    assert sym.is_zero
    assert sym.norm() == 0.0


@pytest.mark.parametrize("stats", ["bose", "fermi"])
def test_orthonormal_pair_has_unit_norm(stats):
    alpha, beta = PureState.basis(0, 2), PureState.basis(1, 2)
    sym = symmetrize_pair(alpha, beta, stats)
    assert len(sym) == 2
    np.testing.assert_allclose(np.abs(sym.coefficients()), [1 / SQ2, 1 / SQ2], atol=1e-15)
    assert inner_product(sym, sym).real == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("stats,sign", [("bose", 1), ("fermi", -1)])
def test_particle_exchange_eigenvalue(stats, sign):
    rng = np.random.default_rng(5)
    a, b = random_state(rng, 3), random_state(rng, 3)
    sym = symmetrize_pair(a, b, stats)
    assert component_residual(sym.swap_slots(Slot.P1, Slot.P2), sym * sign) < 1e-12


def test_random_orthonormal_pairs_unit_norm():
    rng = np.random.default_rng(8)
    for _ in range(50):
        dim = int(rng.integers(2, 7))
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        a, b = PureState(q[:, 0]), PureState(q[:, 1])
        for stats in ("bose", "fermi"):
            assert abs(symmetrize_pair(a, b, stats).norm() - 1.0) < 1e-12


def test_symmetrize_pair_dimension_mismatch():
    with pytest.raises(ShapeError):
        symmetrize_pair(PureState([1, 0]), PureState([1, 0, 0]))


# -- canonicalization and dump ------------------------------------------------------


def test_like_terms_merge_and_zero_terms_drop():
    a = PureState.basis(0, 2)
    comp = CompositeState(
        (Slot.S,),
        (ProductTerm(0.5, (a,)), ProductTerm(0.25, (a,)), ProductTerm(1e-16, (PureState.basis(1, 2),))),
    )
    assert len(comp) == 1
    assert comp.terms[0].coefficient == 0.75


def test_dump_format_golden():
    alpha, beta = PureState.basis(0, 2), PureState.basis(1, 2)
    sym = symmetrize_pair(beta, alpha, "fermi")
    assert sym.dump() == (
        "-0.7071067811865475 0.0 : 1=0, 2=1\n"
        "0.7071067811865475 0.0 : 1=1, 2=0"
    )


def test_dump_is_deterministic_and_sorted():
    rng = np.random.default_rng(1)
    items = [(complex(rng.normal(), rng.normal()), PureState.basis(int(rng.integers(4)), 4, Slot.S),
              conjugate_state(PureState.basis(int(rng.integers(4)), 4, Slot.D))) for _ in range(12)]
    a = CompositeState.from_products((Slot.S, Slot.DBAR), items)
    b = CompositeState.from_products((Slot.S, Slot.DBAR), list(reversed(items)))
    lines = a.dump().splitlines()
    assert a.dump() == b.dump()
    keys = [line.split(" : ")[1] for line in lines]
    assert keys == sorted(keys)
    assert all(part.endswith("*") for line in keys for part in line.split(", ")[1:])


# -- exchange_term_norm -----------------------------------------------------------


def gaussian_overlap_quad(separation, width):
    """Two-particle overlap <direct|exchange> by adaptive quadrature of the 1-D factor."""
    def g(x, c):
        return (2 * math.pi * width**2) ** -0.25 * math.exp(-((x - c) ** 2) / (4 * width**2))

    one, _ = quad(lambda x: g(x, -separation / 2) * g(x, separation / 2), -np.inf, np.inf,
                  epsabs=1e-14, epsrel=1e-12)
    return one * one


def test_exchange_full_overlap():
    assert exchange_term_norm(0.0, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_exchange_far_apart_is_negligible():
    assert exchange_term_norm(20.0, 1.0) < 1e-6


def test_exchange_two_widths_matches_quadrature_oracle():
    w = 0.7
    oracle = gaussian_overlap_quad(2 * w, w)
    assert oracle == pytest.approx(math.exp(-1.0), abs=1e-10)
    assert exchange_term_norm(2 * w, w) == pytest.approx(oracle, abs=1e-6)


def test_exchange_sweep_monotone_and_closed_form():
    w = 1.3
    seps = np.linspace(0, 20 * w, 41)
    vals = [exchange_term_norm(s, w) for s in seps]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    for s, v in zip(seps, vals):
        assert v == pytest.approx(math.exp(-(s**2) / (4 * w**2)), abs=1e-6)


def test_exchange_explicit_grid_and_coverage_check():
    grid = Grid(-12, 12, 2048)
    assert exchange_term_norm(2.0, 1.0, grid) == pytest.approx(math.exp(-1.0), abs=1e-6)
    with pytest.raises(ValidationError):
        exchange_term_norm(10.0, 1.0, Grid(-8, 8, 2048))
    with pytest.raises(ValidationError):
        exchange_term_norm(1.0, 0.0)


def test_packet_normalized_on_grid():
    grid = Grid(-10, 10, 4096)
    g = GaussianPacket(1.0, 1.2, grid).sample()
    assert np.sum(grid.weights() * g * g) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationError):
        GaussianPacket(0.0, -1.0, grid)
