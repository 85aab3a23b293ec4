"""Integer and residue helpers: primes, inverses, seeded randomness.

Python ints are arbitrary precision, so residues are plain ints in ``[0, p)``
with the modulus carried alongside by the caller.
"""

import hashlib
import random

from .errors import ZeroInverse

MR_ROUNDS = 40  # error <= 4**-40 = 2**-80


def _sieve(limit):
    flags = bytearray([1]) * limit
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(range(i * i, limit, i)))
    return [i for i, f in enumerate(flags) if f]


SMALL_PRIMES = _sieve(10_000)


class SeededRng(random.Random):
    """Deterministic, non-cryptographic PRNG with derivable child streams."""

    def __init__(self, seed=0):
        self.seed_value = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        super().__init__(self.seed_value)

    def child(self, index):
        """Independent stream for trial ``index``, a pure function of (seed, index)."""
        digest = hashlib.blake2b(
            f"{self.seed_value}/{index}".encode(), digest_size=8
        ).digest()
        return SeededRng(int.from_bytes(digest, "big"))

    def rand_bits(self, bits):
        return rand_bits(bits, self)


def rand_bits(bits, rng):
    """Uniform integer of bit-length exactly ``bits`` (top bit forced)."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    return (1 << (bits - 1)) | rng.getrandbits(bits - 1) if bits > 1 else 1


def is_probable_prime(n, rng=None, rounds=MR_ROUNDS):
    if n < 2:
        return False
    for q in SMALL_PRIMES:
        if n == q:
            return True
        if n % q == 0:
            return False
    rng = rng or random.Random(n)
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_prime(bits, rng):
    """Random probable prime q with 2**(bits-1) <= q < 2**bits."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    while True:
        q = rand_bits(bits, rng)
        if bits > 2:
            q |= 1
        if is_probable_prime(q, rng):
            return q


def mod_inv(a, p):
    a %= p
    if a == 0:
        raise ZeroInverse(f"0 has no inverse modulo {p}")
    return pow(a, -1, p)


def signed_rep(value, p):
    """Map a residue to the integer of least magnitude in its class."""
    value %= p
    return value if value <= (p - 1) // 2 else value - p
