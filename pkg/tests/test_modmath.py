import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import SMALL, fixed_base_mr
from trace_attack.errors import ZeroInverse
from trace_attack.modmath import SeededRng, gen_prime, mod_inv, rand_bits, signed_rep


def test_gen_prime_two_bits(rng):
    for _ in range(20):
        assert gen_prime(2, rng) in (2, 3)


def test_gen_prime_deterministic():
    assert gen_prime(512, SeededRng(9)) == gen_prime(512, SeededRng(9))


@pytest.mark.parametrize("bits", [8, 32, 160, 512])
def test_gen_prime_size_and_independent_check(bits, rng):
    for _ in range(3):
        q = gen_prime(bits, rng)
        assert 2 ** (bits - 1) <= q < 2**bits
        assert fixed_base_mr(q)
        if bits > 14:
            assert all(q % s for s in SMALL)


def test_gen_prime_rejects_tiny(rng):
    with pytest.raises(ValueError):
        gen_prime(1, rng)


def test_rand_bits_examples(rng):
    assert rand_bits(1, rng) == 1
    v = rand_bits(75, rng)
    assert 2**74 <= v < 2**75


def test_rand_bits_mean(rng):
    draws = [rand_bits(8, rng) for _ in range(10_000)]
    assert abs(sum(draws) / len(draws) - 191.5) < 0.05 * 191.5


@given(st.integers(1, 600), st.integers(0, 2**32))
def test_rand_bits_exact_length(bits, seed):
    assert rand_bits(bits, SeededRng(seed)).bit_length() == bits


def test_mod_inv_examples():
    assert mod_inv(1, 101) == 1
    assert mod_inv(3, 7) == 5
    with pytest.raises(ZeroInverse):
        mod_inv(0, 7)
    with pytest.raises(ZeroInverse):
        mod_inv(14, 7)


@settings(max_examples=200)
@given(st.integers(1, 2**600))
def test_mod_inv_property(a):
    p = 2**521 - 1  # Mersenne prime
    if a % p:
        assert a * mod_inv(a, p) % p == 1


def test_signed_rep_examples():
    assert signed_rep(0, 17) == 0
    assert signed_rep(16, 17) == -1
    assert signed_rep(5, 17) == 5


@pytest.mark.parametrize("p", [3, 5, 17, 101])
def test_signed_rep_bijection(p):
    image = sorted(signed_rep(v, p) for v in range(p))
    assert image == list(range(-(p - 1) // 2, (p - 1) // 2 + 1))


def test_child_streams_are_stable_and_distinct():
    a = SeededRng(5).child(3).getrandbits(64)
    assert a == SeededRng(5).child(3).getrandbits(64)
    assert a != SeededRng(5).child(4).getrandbits(64)
    assert a != SeededRng(6).child(3).getrandbits(64)
