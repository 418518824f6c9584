import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cvbound.errors import CutoffExceeded, FactorOverflow
from cvbound.fock import hermitian_eigenvalues
from cvbound.hankel import (
    b_min_eigenvalue,
    bareiss_determinant,
    exact_leading_minors,
    factorial_hankel,
    factorial_square_product,
    hadamard_factors,
    hankel_a,
    hankel_b_direct,
    hankel_ppt_test,
    rational_min_pivot,
    reconstruct_b,
    reconstruct_block_from_hankel,
    sylvester_psd_test,
)
from cvbound.states import (
    PhotonDistribution,
    beam_split_diagonal_state,
    photon_added_thermal_distribution,
    shifted_thermal_distribution,
    thermal_distribution,
)
from cvbound.transpose import block_decompose, partial_transpose_B, ppt_verdict


def fraction_det(m) -> Fraction:
    a = [[Fraction(x) for x in row] for row in m]
    n, det = len(a), Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            det = -det
        det *= a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] / a[k][k]
            for c in range(k, n):
                a[r][c] -= f * a[k][c]
    return det


def extracted_block(d: PhotonDistribution, i: int, order: int) -> np.ndarray:
    rho = beam_split_diagonal_state(d)
    return block_decompose(partial_transpose_B(rho)).block(i)[:order, :order].real


# --- A_i


def test_thermal_hankel_is_rank_one():
    a = hankel_a(thermal_distribution(1.0, 80), 0, 3)
    expected = np.array([[1 / 2, 1 / 4, 1 / 8], [1 / 4, 1 / 8, 1 / 16], [1 / 8, 1 / 16, 1 / 32]])
    assert_allclose(a, expected, rtol=1e-12)
    assert np.linalg.matrix_rank(a, tol=1e-12) == 1


def test_shifted_thermal_hankel_2x2():
    a = hankel_a(shifted_thermal_distribution(1.0, 80), 0, 2)
    assert_allclose(a, [[0, 1 / 2], [1 / 2, 1 / 4]], rtol=1e-12)
    assert np.linalg.det(a) == pytest.approx(-1 / 4, rel=1e-12)


def test_hankel_needs_photon_numbers_within_cutoff():
    with pytest.raises(CutoffExceeded):
        hankel_a(thermal_distribution(1.0, 5), 3, 4)


def test_hankel_reads_zero_beyond_cutoff():
    d = thermal_distribution(1.0, 6)
    a = hankel_a(d, 2, 4)
    assert a[3, 3] == 0.0 and a[1, 3] == d.p(6)


# --- Sylvester / PSD


def test_thermal_hankel_psd_with_vanishing_minors():
    res = sylvester_psd_test(hankel_a(thermal_distribution(1.0, 80), 0, 6))
    assert res.psd and res.verdict == "PSD"
    assert all(abs(m) <= 1e-12 for m in res.leading_minors[1:])
    assert res.first_failing_order is None


def test_shifted_hankel_not_psd_at_order_two():
    res = sylvester_psd_test(hankel_a(shifted_thermal_distribution(1.0, 80), 0, 2))
    assert not res.psd and res.verdict == "NotPSD"
    assert res.first_failing_order == 2


def test_identity_psd():
    assert sylvester_psd_test(np.eye(4)).psd


def test_hankel_sufficiency_plain_thermal():
    assert hankel_ppt_test(thermal_distribution(1.0, 40)).verdict == "PPT"


@pytest.mark.parametrize("nbar", [0.2, 1.0, 5.0])
def test_hankel_sufficiency_vacuum_free_distributions_not_psd(nbar):
    assert hankel_ppt_test(shifted_thermal_distribution(nbar, 40)).verdict == "NotPSD"
    assert hankel_ppt_test(photon_added_thermal_distribution(nbar, 40)).verdict == "NotPSD"


def test_hankel_sufficiency_order_needs_cutoff():
    with pytest.raises(CutoffExceeded):
        hankel_ppt_test(thermal_distribution(1.0, 10), order=7)


@st.composite
def geometric_mixtures(draw):
    k = draw(st.integers(1, 3))
    # ratios kept small enough that the cut above n_max = 40 discards < 1e-15
    xs = draw(st.lists(st.floats(0.05, 0.4), min_size=k, max_size=k))
    ws = draw(st.lists(st.floats(0.1, 1.0), min_size=k, max_size=k))
    n = np.arange(41)
    p = sum(w * (1 - x) * x**n for w, x in zip(ws, xs))
    return PhotonDistribution.from_probs(p / p.sum())


@settings(max_examples=10, deadline=None)
@given(geometric_mixtures())
def test_hankel_psd_implies_ppt(d):
    res = hankel_ppt_test(d, order=10)
    ppt, _, _ = ppt_verdict(block_decompose(partial_transpose_B(beam_split_diagonal_state(d))))
    assert res.ppt
    assert ppt


# --- Hadamard factors


def test_c0_order_three():
    c = factorial_hankel(0, 3)
    assert c == [[1, 1, 2], [1, 2, 6], [2, 6, 24]]
    assert bareiss_determinant(c) == 4


def test_c0_exact_minors():
    minors = exact_leading_minors(factorial_hankel(0, 8))
    assert minors[:5] == [1, 1, 4, 144, 82944]
    assert minors == [factorial_square_product(k) for k in range(8)]


@pytest.mark.parametrize("j", [0, 1, 3, 6])
def test_cj_minors_against_fraction_oracle(j):
    c = factorial_hankel(j, 7)
    assert exact_leading_minors(c) == [fraction_det([r[:k] for r in c[:k]]) for k in range(1, 8)]
    assert rational_min_pivot(c) > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(-50, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_fraction_elimination(m):
    assert bareiss_determinant(m) == fraction_det(m)


def test_c_recursion():
    for j in range(5):
        cj, cj1 = factorial_hankel(j, 6), factorial_hankel(j + 1, 6)
        for r in range(6):
            for c in range(6):
                assert cj1[r][c] == (j + r + c + 1) * cj[r][c]


def test_d0_rank_one():
    d = hadamard_factors(0, 2).d
    assert_allclose(d, [[1, 1 / 2], [1 / 2, 1 / 4]])
    assert np.linalg.matrix_rank(d) == 1


def test_float_exactness_flag():
    assert hadamard_factors(0, 10).c_float_exact
    assert not hadamard_factors(0, 12).c_float_exact


def test_factor_overflow():
    with pytest.raises(FactorOverflow):
        hadamard_factors(10, 82)


def test_b_trivial():
    assert_allclose(hankel_b_direct(0, 1), [[1.0]])


def test_b_order_three_positive_definite():
    assert hermitian_eigenvalues(hankel_b_direct(0, 3))[0] > 0


@pytest.mark.parametrize("j,order", [(2, 4), (0, 8), (5, 10), (3, 15)])
def test_b_factor_product_matches_direct(j, order):
    assert_allclose(reconstruct_b(j, order), hankel_b_direct(j, order), rtol=1e-12, atol=1e-12)


def test_b_positive_definite_in_extended_precision():
    for j in range(6):
        assert b_min_eigenvalue(j, 20) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_schur_product_of_psd_is_psd(seed, n):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a, b = g.conj().T @ g, h.conj().T @ h
    scale = np.abs(a).max() * np.abs(b).max()
    assert hermitian_eigenvalues(a * b)[0] >= -1e-12 * scale


def test_b_is_psd_hierarchy():
    # every factor is PSD, so the product and all leading submatrices are too
    for j in range(4):
        f = hadamard_factors(j, 6)
        for part in (f.d, f.e * f.e.T, f.f * f.f.T):
            assert hermitian_eigenvalues(part)[0] >= -1e-14
        assert rational_min_pivot(f.c_exact) > 0


# --- cross-check against the extracted block


def test_reconstruction_matches_extracted_block():
    d = shifted_thermal_distribution(1.0, 30)
    assert np.max(np.abs(reconstruct_block_from_hankel(d, 0, 3) - extracted_block(d, 0, 3))) <= 1e-12


@pytest.mark.parametrize("nbar", [1.0, 2.0])
@pytest.mark.parametrize("i", range(5))
def test_reconstruction_all_blocks(nbar, i):
    d = shifted_thermal_distribution(nbar, 30)
    assert np.max(np.abs(reconstruct_block_from_hankel(d, i, 10) - extracted_block(d, i, 10))) <= 1e-10


def test_operation_alias():
    from cvbound.hankel import proposition1_ppt_test

    assert proposition1_ppt_test is hankel_ppt_test
