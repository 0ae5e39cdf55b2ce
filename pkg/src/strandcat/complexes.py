"""Finite complexes of shifted projective right modules P(S)[a]{b} over a
dg-algebra, with differential entries given by left multiplication.

Shift convention: M[a]{b}^i_j = M^{i+a}_{j-b}, so an element of P(S) with
bidegree (c, q) sits in P(S)[a]{b} at (c - a, q + b).  The total
differential combines the internal differential of each summand, twisted by
(-1)^a, with the left-multiplication entries; its square must vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .dga import AlgebraElement, DgAlgebra
from .laurent import LaurentPoly
from .linalg import SparseMatrix, subquotient_basis
from .reports import DERIVED, Report, TRIVIAL


@dataclass
class ProjectiveComplex:
    algebra: DgAlgebra
    objects: tuple            # (idempotent index, cohshift a, qshift b)
    entries: dict = dc_field(default_factory=dict)  # (src, dst) -> AlgebraElement

    def component_ids(self, obj):
        idem, _, _ = self.objects[obj]
        return self.algebra.block_ids(left=idem)

    def expansion(self):
        """Flattened basis [(obj, basis_id)] with complex bidegrees."""
        out = []
        for o in range(len(self.objects)):
            _, a, b = self.objects[o]
            for i in self.component_ids(o):
                bb = self.algebra.basis[i]
                q = None if bb.qdeg is None else bb.qdeg + b
                out.append(((o, i), bb.cohdeg - a, q))
        return out

    def total_differential(self):
        """dict {(obj, id): {(obj', id'): coeff}} for the full differential."""
        A = self.algebra
        f = A.field
        out = {}
        for o in range(len(self.objects)):
            _, a, _ = self.objects[o]
            sign = f.of_int(-1 if a & 1 else 1)
            for i in self.component_ids(o):
                cell = {}
                for l, v in A.d_ids(i):
                    cell[(o, l)] = f.mul(sign, v)
                for (src, dst), e in self.entries.items():
                    if src != o:
                        continue
                    img = e * A.basis_element(i)
                    for l, v in img.coeffs.items():
                        key = (dst, l)
                        nv = f.add(cell.get(key, f.zero), v)
                        if f.is_zero(nv):
                            cell.pop(key, None)
                        else:
                            cell[key] = nv
                if cell:
                    out[(o, i)] = cell
        return out


def complex_verify(C: ProjectiveComplex) -> Report:
    """Composite-zero (including the dg correction) and shift consistency."""
    A = C.algebra
    rep = Report("complex_verify", {"algebra": A.name, "objects": len(C.objects)})
    ok_shift = True
    for (src, dst), e in C.entries.items():
        idem_s, a_s, b_s = C.objects[src]
        idem_d, a_d, b_d = C.objects[dst]
        for i in e.coeffs:
            if A.basis_blocks[i] != (idem_d, idem_s):
                ok_shift = False
        if e.cohdeg() != 1 + a_d - a_s:
            ok_shift = False
        if A.has_q and e and e.qdeg() != b_s - b_d:
            ok_shift = False
    rep.add("entry blocks and shifts consistent", ok_shift, provenance=TRIVIAL)
    D = C.total_differential()
    f = A.field
    ok_sq = True
    for key, cell in D.items():
        acc = {}
        for mid, c in cell.items():
            for tgt, c2 in D.get(mid, {}).items():
                nv = f.add(acc.get(tgt, f.zero), f.mul(c, c2))
                if f.is_zero(nv):
                    acc.pop(tgt, None)
                else:
                    acc[tgt] = nv
        if acc:
            ok_sq = False
    rep.add("total differential squares to zero", ok_sq, provenance=DERIVED)
    return rep


def total_complex_cohomology(C: ProjectiveComplex) -> dict:
    """Homology dimensions of the expanded total complex per (cohdeg, qdeg)."""
    A = C.algebra
    f = A.field
    exp = C.expansion()
    D = C.total_differential()
    slices = {}
    for key, c, q in exp:
        slices.setdefault(q, {}).setdefault(c, []).append(key)
    dims = {}
    for q, by_deg in slices.items():
        for c, keys in by_deg.items():
            prev = by_deg.get(c - 1, [])
            nxt = by_deg.get(c + 1, [])
            pos = {k: a for a, k in enumerate(keys)}
            pos_n = {k: a for a, k in enumerate(nxt)}
            t_in = [(pos[k2], col, v) for col, k in enumerate(prev)
                    for k2, v in D.get(k, {}).items() if k2 in pos]
            t_out = [(pos_n[k2], col, v) for col, k in enumerate(keys)
                     for k2, v in D.get(k, {}).items() if k2 in pos_n]
            d_in = SparseMatrix.from_triples(len(keys), len(prev), t_in, f)
            d_out = SparseMatrix.from_triples(len(nxt), len(keys), t_out, f)
            n = len(subquotient_basis(d_in, d_out, f))
            if n:
                dims[(c, q)] = n
    return dims


def euler_char_q(C: ProjectiveComplex) -> dict:
    """Graded Euler characteristic: {idempotent index: LaurentPoly}, the
    class sum of (-1)^a q^b [P(S)] over the objects."""
    out = {}
    for idem, a, b in C.objects:
        out[idem] = out.get(idem, LaurentPoly.zero()) + LaurentPoly.q(b, -1 if a & 1 else 1)
    return {k: v for k, v in out.items() if v}


@dataclass
class SliceModule:
    """Right dg module realized as an idempotent slice of an ambient algebra
    (1_X · ambient · span of translated right idempotents), with the right
    action of a smaller algebra through a basis translation."""

    ambient: DgAlgebra
    ids: tuple                  # ambient basis ids spanning the module
    right_algebra: DgAlgebra
    right_embed: object         # callable: right_algebra basis id -> ambient id

    def d_closed(self):
        idset = set(self.ids)
        return all(l in idset for i in self.ids for l, _ in self.ambient.d_ids(i))

    def act(self, i, j):
        """Module basis element i times right-algebra basis element j."""
        amb_j = self.right_embed(j)
        if amb_j is None:
            return ()
        return self.ambient.product_ids(i, amb_j)

    def verify_actions(self) -> Report:
        rep = Report("slice_module", {"ambient": self.ambient.name,
                                      "dim": len(self.ids)})
        idset = set(self.ids)
        rep.add("differential closes in the slice", self.d_closed(), provenance=TRIVIAL)
        ok_act = True
        ok_leib = True
        A = self.ambient
        f = A.field
        for i in self.ids:
            for j in range(self.right_algebra.dim):
                terms = self.act(i, j)
                if any(l not in idset for l, _ in terms):
                    ok_act = False
                # Leibniz: d(m·x) = d(m)·x + (-1)^{deg m} m·d(x)
                amb_j = self.right_embed(j)
                if amb_j is None:
                    continue
                m = A.basis_element(i)
                x = A.basis_element(amb_j)
                sign = f.of_int(-1 if A.basis[i].cohdeg & 1 else 1)
                if (m * x).d() != m.d() * x + (m * x.d()).scale(sign):
                    ok_leib = False
        rep.add("right action closes", ok_act, provenance=DERIVED)
        rep.add("Leibniz for the right action", ok_leib, provenance=DERIVED)
        return rep

    def cohomology_dims(self):
        A = self.ambient
        f = A.field
        slices = {}
        for i in self.ids:
            b = A.basis[i]
            slices.setdefault(b.qdeg, {}).setdefault(b.cohdeg, []).append(i)
        dims = {}
        for q, by_deg in slices.items():
            for c, ids in by_deg.items():
                prev = by_deg.get(c - 1, [])
                nxt = by_deg.get(c + 1, [])
                pos = {k: a for a, k in enumerate(ids)}
                pos_n = {k: a for a, k in enumerate(nxt)}
                t_in = [(pos[l], col, v) for col, i in enumerate(prev)
                        for l, v in A.d_ids(i) if l in pos]
                t_out = [(pos_n[l], col, v) for col, i in enumerate(ids)
                         for l, v in A.d_ids(i) if l in pos_n]
                d_in = SparseMatrix.from_triples(len(ids), len(prev), t_in, f)
                d_out = SparseMatrix.from_triples(len(nxt), len(ids), t_out, f)
                n = len(subquotient_basis(d_in, d_out, f))
                if n:
                    dims[(c, q)] = n
        return dims

    def euler_poly(self) -> LaurentPoly:
        """Dimension-level graded Euler characteristic sum (-1)^c q^j."""
        out = LaurentPoly.zero()
        for i in self.ids:
            b = self.ambient.basis[i]
            out = out + LaurentPoly.q(b.qdeg or 0, -1 if b.cohdeg & 1 else 1)
        return out


def complex_euler_poly(C: ProjectiveComplex) -> LaurentPoly:
    """Dimension-level Euler characteristic of the expanded complex."""
    out = LaurentPoly.zero()
    for _, c, q in C.expansion():
        out = out + LaurentPoly.q(q or 0, -1 if c & 1 else 1)
    return out
