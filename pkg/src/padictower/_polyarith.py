"""Truncated integer polynomial products by Kronecker substitution.

Coefficient lists (lowest degree first, non-negative entries) are packed into
a single big integer with fixed-width slots, multiplied with GMP and
unpacked.  The slot width must hold every coefficient of the product.
"""
from __future__ import annotations

from gmpy2 import mpz


def slot_bytes(coef_bound: int, terms: int) -> int:
    """Bytes per slot for products of polynomials with entries < coef_bound
    and at most ``terms`` overlapping terms per output coefficient."""
    bits = (coef_bound - 1).bit_length() * 2 + max(terms, 1).bit_length() + 1
    return (bits + 7) // 8


def pack(coeffs, width: int) -> mpz:
    return mpz(int.from_bytes(b"".join(int(c).to_bytes(width, "little") for c in coeffs), "little"))


def unpack(z, width: int, n: int) -> list[int]:
    raw = int(z).to_bytes(max(n * width, (int(z).bit_length() + 7) // 8), "little")
    return [int.from_bytes(raw[i * width:(i + 1) * width], "little") for i in range(n)]


def mul_trunc(f: list[int], g: list[int], n: int, modulus: int, width: int) -> list[int]:
    """``f * g`` modulo ``(X**n, modulus)`` for non-negative coefficient lists."""
    prod = pack(f[:n], width) * pack(g[:n], width)
    return [c % modulus for c in unpack(prod, width, n)]
