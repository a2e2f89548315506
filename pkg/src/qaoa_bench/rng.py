"""Deterministic seed derivation.

Graph sampling and seed derivation use SplitMix64 (Steele, Lea & Flood
2014), written out here so generated instances do not depend on the
stream policy of any third-party RNG. Random restart points are drawn
from ``numpy.random.Generator(PCG64(seed))`` with a seed produced by
:func:`derive_seed`.
"""

import hashlib

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def random(self):
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def derive_seed(master_seed, *labels):
    """Map ``(master_seed, *labels)`` to a 63-bit seed.

    Labels are joined as text and hashed with BLAKE2b, so derivation is
    stable across processes and Python versions (unlike ``hash()``).
    """
    key = "/".join([str(int(master_seed))] + [str(x) for x in labels])
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1
