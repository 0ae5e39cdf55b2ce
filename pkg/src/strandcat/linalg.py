"""Sparse exact linear algebra over prime fields and the rationals.

Rank, kernel bases and homology subquotients are computed by Gaussian
elimination: dense numpy int64 arithmetic mod p for prime fields (exact),
Fraction arithmetic for the rationals.  Pivoting is first-nonzero in
row-major order, so runs are deterministic; all public answers are
invariant under row/column shuffles of the input.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fields import PrimeField, RationalField


class BrokenComplexError(ValueError):
    """Raised when a claimed complex has a nonzero composite differential."""


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix: no stored zeros, entries sorted by (row, col)."""

    rows: int
    cols: int
    entries: tuple  # ((r, c, scalar), ...) sorted, no duplicates, no zeros

    @classmethod
    def from_triples(cls, rows, cols, triples, field):
        seen = {}
        for r, c, v in triples:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"index ({r},{c}) out of range {rows}x{cols}")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry at ({r},{c})")
            if not field.is_zero(v):
                seen[(r, c)] = v
        ent = tuple((r, c, seen[(r, c)]) for r, c in sorted(seen))
        return cls(rows, cols, ent)

    @classmethod
    def from_dense(cls, array, field):
        triples = []
        for r, row in enumerate(array):
            for c, v in enumerate(row):
                if not field.is_zero(v):
                    triples.append((r, c, v))
        return cls.from_triples(len(array), len(array[0]) if array else 0, triples, field)

    @classmethod
    def from_columns(cls, rows, columns, field):
        """columns: list of dict {row: scalar}."""
        triples = [(r, c, v) for c, col in enumerate(columns) for r, v in col.items()]
        return cls.from_triples(rows, len(columns), triples, field)

    def transpose(self):
        ent = tuple(sorted((c, r, v) for r, c, v in self.entries))
        return SparseMatrix(self.cols, self.rows, ent)

    def to_numpy(self):
        a = np.zeros((self.rows, self.cols), dtype=np.int64)
        for r, c, v in self.entries:
            a[r, c] = int(v)
        return a

    def to_fraction_rows(self):
        rows = [dict() for _ in range(self.rows)]
        for r, c, v in self.entries:
            rows[r][c] = Fraction(v)
        return rows

    def column(self, c):
        return {r: v for r, cc, v in self.entries if cc == c}

    def apply(self, vec, field):
        """Matrix times a sparse column vector {index: scalar}."""
        out = {}
        for r, c, v in self.entries:
            x = vec.get(c)
            if x is not None:
                out[r] = field.add(out.get(r, field.zero), field.mul(v, x))
        return {r: v for r, v in out.items() if not field.is_zero(v)}


def _rref_fp(a: np.ndarray, p: int):
    """In-place reduced row echelon mod p. Returns (rank, pivot column list)."""
    rows, cols = a.shape
    a %= p
    r = 0
    pivots = []
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return r, pivots


def _rref_fraction(rows_list, cols):
    """RREF for a list of dict-rows of Fractions. Returns (rank, pivots, rows)."""
    rows_list = [dict(row) for row in rows_list]
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, len(rows_list)):
            if rows_list[i].get(c, Fraction(0)) != 0:
                piv = i
                break
        if piv is None:
            continue
        rows_list[r], rows_list[piv] = rows_list[piv], rows_list[r]
        inv = 1 / rows_list[r][c]
        rows_list[r] = {k: v * inv for k, v in rows_list[r].items() if v != 0}
        for i in range(len(rows_list)):
            if i == r:
                continue
            f = rows_list[i].get(c, Fraction(0))
            if f != 0:
                row = rows_list[i]
                for k, v in rows_list[r].items():
                    nv = row.get(k, Fraction(0)) - f * v
                    if nv == 0:
                        row.pop(k, None)
                    else:
                        row[k] = nv
        pivots.append(c)
        r += 1
    return r, pivots, rows_list


def mat_rank(m: SparseMatrix, field) -> int:
    """Rank over the coefficient field."""
    if isinstance(field, PrimeField):
        a = m.to_numpy()
        rank, _ = _rref_fp(a, field.p)
        return rank
    rank, _, _ = _rref_fraction(m.to_fraction_rows(), m.cols)
    return rank


def kernel_basis(m: SparseMatrix, field):
    """Basis of the right kernel, as a list of sparse vectors {index: scalar}."""
    if isinstance(field, PrimeField):
        p = field.p
        a = m.to_numpy()
        rank, pivots = _rref_fp(a, p)
        free = [c for c in range(m.cols) if c not in pivots]
        basis = []
        for f in free:
            vec = {f: field.one}
            for r, c in enumerate(pivots):
                v = int(a[r, f]) % p
                if v:
                    vec[c] = (-v) % p
            basis.append(dict(sorted(vec.items())))
        return basis
    rank, pivots, rows = _rref_fraction(m.to_fraction_rows(), m.cols)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        vec = {f: Fraction(1)}
        for r, c in enumerate(pivots):
            v = rows[r].get(f, Fraction(0))
            if v != 0:
                vec[c] = -v
        basis.append(dict(sorted(vec.items())))
    return basis


class _RankTracker:
    """Incremental row-space tracker: feed vectors, learn which enlarge the span."""

    def __init__(self, dim, field):
        self.dim = dim
        self.field = field
        self.rows = {}  # pivot index -> reduced dict-vector with 1 at pivot

    def reduce(self, vec):
        f = self.field
        vec = dict(vec)
        for piv in sorted(self.rows):
            c = vec.get(piv)
            if c is None or f.is_zero(c):
                continue
            row = self.rows[piv]
            for k, v in row.items():
                nv = f.sub(vec.get(k, f.zero), f.mul(c, v))
                if f.is_zero(nv):
                    vec.pop(k, None)
                else:
                    vec[k] = nv
        return {k: v for k, v in vec.items() if not f.is_zero(v)}

    def add(self, vec):
        """Returns True if vec enlarged the span."""
        f = self.field
        red = self.reduce(vec)
        if not red:
            return False
        piv = min(red)
        inv = f.inv(red[piv])
        self.rows[piv] = {k: f.mul(v, inv) for k, v in red.items()}
        # keep rows fully reduced against the new pivot
        for other_piv, row in list(self.rows.items()):
            if other_piv == piv:
                continue
            c = row.get(piv)
            if c is not None and not f.is_zero(c):
                new = dict(row)
                for k, v in self.rows[piv].items():
                    nv = f.sub(new.get(k, f.zero), f.mul(c, v))
                    if f.is_zero(nv):
                        new.pop(k, None)
                    else:
                        new[k] = nv
                self.rows[other_piv] = new
        return True

    def contains(self, vec):
        return not self.reduce(vec)

    @property
    def rank(self):
        return len(self.rows)


def subquotient_basis(d_in: SparseMatrix, d_out: SparseMatrix, field):
    """Representatives of ker(d_out)/im(d_in) at the middle term of a complex.

    d_in maps the previous term into the middle one, d_out maps the middle
    term out; requires d_out∘d_in = 0 and raises BrokenComplexError otherwise.
    """
    if d_in.rows != d_out.cols:
        raise ValueError("middle dimensions disagree")
    for c in range(d_in.cols):
        col = d_in.column(c)
        if d_out.apply(col, field):
            raise BrokenComplexError("d_out ∘ d_in != 0")
    ker = kernel_basis(d_out, field)
    tracker = _RankTracker(d_in.rows, field)
    for c in range(d_in.cols):
        tracker.add(d_in.column(c))
    reps = []
    for vec in ker:
        if tracker.add(vec):
            reps.append(vec)
    return reps


def solve(m: SparseMatrix, rhs, field):
    """One solution x of m·x = rhs (rhs a sparse vector), or None."""
    if isinstance(field, PrimeField):
        p = field.p
        a = np.zeros((m.rows, m.cols + 1), dtype=np.int64)
        for r, c, v in m.entries:
            a[r, c] = int(v)
        for r, v in rhs.items():
            a[r, m.cols] = int(v)
        rank, pivots = _rref_fp(a, p)
        if m.cols in pivots:
            return None
        sol = {}
        for r, c in enumerate(pivots):
            v = int(a[r, m.cols]) % p
            if v:
                sol[c] = v
        return sol
    rows = m.to_fraction_rows()
    for r, row in enumerate(rows):
        v = rhs.get(r)
        if v is not None and v != 0:
            row[m.cols] = Fraction(v)
    rank, pivots, rows = _rref_fraction(rows, m.cols + 1)
    if m.cols in pivots:
        return None
    sol = {}
    for r, c in enumerate(pivots):
        v = rows[r].get(m.cols, Fraction(0))
        if v != 0:
            sol[c] = v
    return sol
