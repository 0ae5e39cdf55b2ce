"""Exact coefficient fields: prime fields F_p and arbitrary-precision rationals.

Scalars are stored unboxed (python ints for F_p, Fraction for the rationals);
a field object supplies the arithmetic.  No floating point anywhere.
"""
from __future__ import annotations

from fractions import Fraction


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


class PrimeField:
    """F_p for a small prime p; elements are ints in range(p)."""

    def __init__(self, p: int):
        if not _is_prime(p):
            raise ValueError(f"not a prime: {p}")
        self.p = p
        self.char = p
        self.zero = 0
        self.one = 1 % p

    def of_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.p)

    def div(self, a, b):
        return (a * self.inv(b)) % self.p

    def is_zero(self, a):
        return a % self.p == 0

    @property
    def descriptor(self):
        return {"p": self.p}

    def scalar_str(self, a):
        return str(a % self.p)

    def scalar_from_str(self, s: str):
        return int(s) % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("Fp", self.p))

    def __repr__(self):
        return f"F{self.p}"


class RationalField:
    """The rationals with exact Fraction arithmetic."""

    char = 0
    zero = Fraction(0)
    one = Fraction(1)

    def of_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def div(self, a, b):
        return Fraction(a) / b

    def is_zero(self, a):
        return a == 0

    @property
    def descriptor(self):
        return "rational"

    def scalar_str(self, a):
        return str(Fraction(a))

    def scalar_from_str(self, s: str):
        return Fraction(s)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = RationalField()


def field_from_descriptor(desc):
    if desc == "rational":
        return QQ
    if isinstance(desc, dict) and set(desc) == {"p"}:
        return PrimeField(int(desc["p"]))
    raise ValueError(f"bad field descriptor: {desc!r}")
