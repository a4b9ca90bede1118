import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kloosbox.errors import NotCoprime
from kloosbox.modarith import factorize, gcd3, inverse_table, mod_inverse, unit_array, units

from . import oracles


@pytest.mark.parametrize(
    "q, factors, phi, d, omega",
    [
        (12, ((2, 2), (3, 1)), 4, 6, 2),
        (1, (), 1, 1, 0),
        (97, ((97, 1),), 96, 2, 1),
    ],
)
def test_factorize_examples(q, factors, phi, d, omega):
    m = factorize(q)
    assert (m.factors, m.phi, m.d, m.omega) == (factors, phi, d, omega)


def test_factorize_rejects_zero():
    with pytest.raises(ValueError):
        factorize(0)


def test_arithmetic_functions_match_brute_force():
    for q in range(1, 10_001):
        m = factorize(q)
        r = np.arange(1, q + 1)
        assert m.phi == np.count_nonzero(np.gcd(r, q) == 1), q
        assert m.d == np.count_nonzero(q % r == 0), q
        assert math.prod(p**e for p, e in m.factors) == q
        assert m.omega == len(m.factors)
        assert len(units(q)) == m.phi


def test_omega_against_primality_oracle():
    for q in range(1, 200):
        assert factorize(q).omega == oracles.brute_omega(q)


@pytest.mark.parametrize(
    "q",
    [2**61 - 1, 999_983 * 1_000_003, (2**31 - 1) * (2**31 - 19), 2**62, 3**39, 10**18 + 9],
)
def test_factorize_large(q):
    m = factorize(q)
    assert math.prod(p**e for p, e in m.factors) == q
    from sympy import isprime

    assert all(isprime(p) for p, _ in m.factors)


def test_factorize_rejects_beyond_64_bits():
    with pytest.raises(ValueError):
        factorize(2**63)


def test_c_parity_const():
    assert factorize(15).c_parity_const(3) == 1.0
    assert factorize(16).c_parity_const(3) == 4.0
    assert factorize(10).c_parity_const(2) == pytest.approx(2**1.5)


@pytest.mark.parametrize("n, q, expected", [(3, 7, 5), (1, 1, 1), (6, 7, 6), (-1, 10, 9)])
def test_mod_inverse(n, q, expected):
    assert mod_inverse(n, q) == expected


def test_mod_inverse_not_coprime():
    with pytest.raises(NotCoprime):
        mod_inverse(2, 4)


def test_mod_inverse_round_trip():
    for q in range(1, 501):
        for u in units(q):
            v = mod_inverse(u, q)
            assert 1 <= v <= q
            assert (u * v - 1) % q == 0
            assert mod_inverse(v, q) == u


@given(st.integers(2, 10**6), st.integers(-(10**9), 10**9))
def test_mod_inverse_property(q, n):
    if math.gcd(n, q) != 1:
        with pytest.raises(NotCoprime):
            mod_inverse(n, q)
    else:
        assert n * mod_inverse(n, q) % q == 1


@pytest.mark.parametrize("a, b, q, expected", [(4, 6, 10, 2), (0, 0, 7, 7), (5, 7, 12, 1), (14, 20, 10, 2)])
def test_gcd3(a, b, q, expected):
    assert gcd3(a, b, q) == expected


@pytest.mark.parametrize("q, expected", [(5, [1, 2, 3, 4]), (12, [1, 5, 7, 11]), (2, [1]), (1, [1])])
def test_units(q, expected):
    assert units(q) == expected


def test_inverse_table_and_unit_array_read_only():
    inv = inverse_table(30)
    for u in unit_array(30).tolist():
        assert u * inv[u % 30] % 30 == 1
    with pytest.raises(ValueError):
        inv[1] = 5


@settings(max_examples=50)
@given(st.integers(1, 5000))
def test_units_are_exactly_the_coprime_residues(q):
    us = units(q)
    assert us == sorted(us)
    assert all(1 <= u <= q and math.gcd(u, q) == 1 for u in us)
    assert len(us) == oracles.brute_phi(q)
