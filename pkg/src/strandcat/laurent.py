"""Integer Laurent polynomials in q: the carrier for K_0 classes and
graded Euler characteristics."""
from __future__ import annotations


class LaurentPoly:
    """Z[q, q^-1] with dict storage {power: nonzero int coefficient}."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for k, v in coeffs.items():
                if v:
                    c[int(k)] = int(v)
        self.c = c

    @classmethod
    def q(cls, power=1, coeff=1):
        return cls({power: coeff})

    @classmethod
    def const(cls, n):
        return cls({0: n})

    @classmethod
    def zero(cls):
        return cls()

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        return isinstance(other, LaurentPoly) and self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            nv = out.get(k, 0) + v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = LaurentPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return LaurentPoly.const(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly({k: v * other for k, v in self.c.items()})
        out = {}
        for k1, v1 in self.c.items():
            for k2, v2 in other.c.items():
                k = k1 + k2
                nv = out.get(k, 0) + v1 * v2
                if nv:
                    out[k] = nv
                else:
                    out.pop(k, None)
        return LaurentPoly(out)

    __rmul__ = __mul__

    def subs_one(self):
        """Evaluate at q = 1."""
        return sum(self.c.values())

    def __repr__(self):
        if not self.c:
            return "0"
        parts = []
        for k in sorted(self.c):
            v = self.c[k]
            if k == 0:
                parts.append(str(v))
                continue
            mono = "q" if k == 1 else f"q^{k}"
            if v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{v}*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")


def qn(power):
    return LaurentPoly.q(power)


Q_MINUS_QINV = LaurentPoly({1: 1, -1: -1})
