"""Divided-difference operators on polynomials, the Koszul complex of the
exterior algebra against symmetric polynomials, and the per-q-degree
endomorphism calculus used to verify the Koszul-duality statement for the
q-graded local algebra.

The endomorphism dga is computed over the free-module presentation: the
polynomial ring is free over symmetric polynomials on the staircase
monomials x^a (a_j <= k-j), so a module endomorphism is determined by its
values on the finitely many generators (exterior monomial, staircase
monomial); every q-slice of the endomorphism complex is then a
finite-dimensional exact linear algebra problem.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product as iter_product

from .fields import PrimeField
from .hecke import (all_perms, bits_mask, build_rk_nil, identity_perm,
                    mask_bits, perm_length, reduced_word,
                    simple_transposition)
from .linalg import SparseMatrix, _RankTracker, solve, subquotient_basis
from .reports import DERIVED, PAPER, Report, TRIVIAL


# -- multivariate polynomials -------------------------------------------------


def poly_add(f, g, field):
    out = dict(f)
    for e, c in g.items():
        nc = field.add(out.get(e, field.zero), c)
        if field.is_zero(nc):
            out.pop(e, None)
        else:
            out[e] = nc
    return out


def poly_scale(f, s, field):
    if field.is_zero(s):
        return {}
    return {e: field.mul(c, s) for e, c in f.items()}


def poly_mul(f, g, field):
    out = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            nc = field.add(out.get(e, field.zero), field.mul(c1, c2))
            if field.is_zero(nc):
                out.pop(e, None)
            else:
                out[e] = nc
    return out


def monomial(k, j, field, power=1):
    e = [0] * k
    e[j - 1] = power
    return {tuple(e): field.one}


def perm_poly(w, f, field):
    """w acting on variables: x_j -> x_{w(j)}."""
    out = {}
    for e, c in f.items():
        e2 = [0] * len(e)
        for j, a in enumerate(e):
            e2[w[j] - 1] = a
        e2 = tuple(e2)
        out[e2] = field.add(out.get(e2, field.zero), c)
    return {e: c for e, c in out.items() if not field.is_zero(c)}


def divided_difference(i, f, field):
    """(f - s_i f)/(x_i - x_{i+1}): the exact quotient, computed monomialwise
    as a telescoping sum; lowers polynomial degree by one."""
    out = {}

    def bump(e, c):
        nc = field.add(out.get(e, field.zero), c)
        if field.is_zero(nc):
            out.pop(e, None)
        else:
            out[e] = nc

    for e, c in f.items():
        p, q = e[i - 1], e[i]
        if p == q:
            continue
        sgn = field.one if p > q else field.neg(field.one)
        lo, hi = min(p, q), max(p, q)
        for m in range(lo, hi):
            e2 = list(e)
            e2[i - 1], e2[i] = m, p + q - 1 - m
            bump(tuple(e2), field.mul(c, sgn))
    return out


def elementary_sym(k, i, field):
    out = {}
    for comb in combinations(range(k), i):
        e = [0] * k
        for j in comb:
            e[j] = 1
        out[tuple(e)] = field.one
    return out


# -- free-module presentation over symmetric polynomials ----------------------


def staircase_exps(k):
    """The staircase free basis of the polynomial ring over Sym_k:
    exponent vectors with a_j <= k - j."""
    ranges = [range(k - j + 1) for j in range(1, k + 1)]
    return sorted(iter_product(*ranges))


class SymExpander:
    """Expand polynomials as Sym_k-combinations of staircase monomials."""

    def __init__(self, k, field):
        self.k = k
        self.field = field
        self.stair = staircase_exps(k)
        self.e_polys = [elementary_sym(k, i, field) for i in range(1, k + 1)]
        self._by_degree = {}

    def _sym_monomials(self, deg):
        """All e_1^{a_1}...e_k^{a_k} of total x-degree deg, as exponent tuples."""
        out = []

        def rec(i, left, acc):
            if i == self.k:
                if left == 0:
                    out.append(tuple(acc))
                return
            w = i + 1
            for a in range(left // w + 1):
                rec(i + 1, left - a * w, acc + [a])

        rec(0, deg, [])
        return out

    def _e_power(self, alpha):
        f = {tuple([0] * self.k): self.field.one}
        for i, a in enumerate(alpha):
            for _ in range(a):
                f = poly_mul(f, self.e_polys[i], self.field)
        return f

    def _table(self, deg):
        if deg in self._by_degree:
            return self._by_degree[deg]
        field = self.field
        monos = sorted({e for e in iter_product(range(deg + 1), repeat=self.k)
                        if sum(e) == deg})
        cols = []
        labels = []
        for w in self.stair:
            rest = deg - sum(w)
            if rest < 0:
                continue
            for alpha in self._sym_monomials(rest):
                prodp = poly_mul(self._e_power(alpha),
                                 {tuple(w): field.one}, field)
                cols.append(prodp)
                labels.append((tuple(w), alpha))
        pos = {e: r for r, e in enumerate(monos)}
        m = SparseMatrix.from_columns(
            len(monos),
            [{pos[e]: c for e, c in col.items()} for col in cols], field)
        table = {}
        for e in monos:
            sol = solve(m, {pos[e]: field.one}, field)
            if sol is None:
                raise AssertionError("staircase basis failed to span")
            expansion = {}
            for cidx, coeff in sol.items():
                w, alpha = labels[cidx]
                sym = poly_scale(self._e_power(alpha), coeff, field)
                expansion[w] = poly_add(expansion.get(w, {}), sym, field)
            table[e] = {w: s for w, s in expansion.items() if s}
        self._by_degree[deg] = table
        return table

    def expand(self, f):
        """f -> {staircase exps: symmetric polynomial coefficient}."""
        out = {}
        by_deg = {}
        for e, c in f.items():
            by_deg.setdefault(sum(e), {})[e] = c
        for deg, part in by_deg.items():
            table = self._table(deg)
            for e, c in part.items():
                for w, sym in table[e].items():
                    out[w] = poly_add(out.get(w, {}),
                                      poly_scale(sym, c, self.field), self.field)
        return {w: s for w, s in out.items() if s}


# -- the Koszul complex and its endomorphisms ---------------------------------


def koszul_d(k, mask, exps, field):
    """Left multiplication by sum xi_i (x) x_i on the exterior-polynomial
    bicomplex; raises cohomological degree by one, preserves q."""
    out = {}
    for i in range(1, k + 1):
        bit = 1 << (i - 1)
        if mask & bit:
            continue
        below = bin(mask & (bit - 1)).count("1")
        sign = field.of_int(-1 if below & 1 else 1)
        e2 = list(exps)
        e2[i - 1] += 1
        key = (mask | bit, tuple(e2))
        nc = field.add(out.get(key, field.zero), sign)
        if field.is_zero(nc):
            out.pop(key, None)
        else:
            out[key] = nc
    return out


def bidegree(mask, exps):
    return bin(mask).count("1"), 2 * sum(exps) - 2 * bin(mask).count("1")


class SymLinearMap:
    """A Sym_k-linear endomorphism of the Koszul complex of homogeneous
    bidegree (c, q), stored by its values on the free generators."""

    __slots__ = ("ctx", "c", "q", "values")

    def __init__(self, ctx, c, q, values):
        self.ctx = ctx
        self.c = c
        self.q = q
        self.values = {w: v for w, v in values.items() if v}

    def __eq__(self, other):
        return (self.c, self.q, self.values) == (other.c, other.q, other.values)

    def add(self, other):
        field = self.ctx.field
        out = dict(self.values)
        for w, v in other.values.items():
            merged = dict(out.get(w, {}))
            for key, c in v.items():
                nc = field.add(merged.get(key, field.zero), c)
                if field.is_zero(nc):
                    merged.pop(key, None)
                else:
                    merged[key] = nc
            if merged:
                out[w] = merged
            else:
                out.pop(w, None)
        return SymLinearMap(self.ctx, self.c, self.q, out)

    def neg(self):
        field = self.ctx.field
        return SymLinearMap(self.ctx, self.c, self.q,
                            {w: {key: field.neg(c) for key, c in v.items()}
                             for w, v in self.values.items()})

    def apply(self, element):
        """Apply to an arbitrary {(mask, exps): coeff} element."""
        ctx = self.ctx
        field = ctx.field
        out = {}
        for (mask, exps), c in element.items():
            for w, sym in ctx.expander.expand({exps: c}).items():
                val = self.values.get((mask, w))
                if not val:
                    continue
                for (mask2, exps2), c2 in val.items():
                    for es, cs in sym.items():
                        key = (mask2, tuple(a + b for a, b in zip(es, exps2)))
                        nc = field.add(out.get(key, field.zero), field.mul(cs, c2))
                        if field.is_zero(nc):
                            out.pop(key, None)
                        else:
                            out[key] = nc
        return out

    def compose(self, other):
        """self ∘ other."""
        values = {}
        for w, v in other.values.items():
            res = self.apply(v)
            if res:
                values[w] = res
        return SymLinearMap(self.ctx, self.c + other.c, self.q + other.q, values)

    def differential(self):
        """D(phi) = d∘phi - (-1)^c phi∘d."""
        ctx = self.ctx
        field = ctx.field
        values = {}
        for w, v in self.values.items():
            acc = {}
            for (mask, exps), c in v.items():
                for key, c2 in koszul_d(ctx.k, mask, exps, field).items():
                    nc = field.add(acc.get(key, field.zero), field.mul(c, c2))
                    if field.is_zero(nc):
                        acc.pop(key, None)
                    else:
                        acc[key] = nc
            if acc:
                values[w] = acc
        first = SymLinearMap(ctx, self.c + 1, self.q, values)
        sign = field.of_int(-1 if self.c & 1 else 1)
        values2 = {}
        for (mask, wexps) in ctx.free_gens:
            dgen = koszul_d(ctx.k, mask, wexps, field)
            res = self.apply(dgen)
            if res:
                values2[(mask, wexps)] = {
                    key: field.mul(field.neg(sign), c) for key, c in res.items()}
        return first.add(SymLinearMap(ctx, self.c + 1, self.q, values2))

    def vector_items(self):
        for w, v in self.values.items():
            for key, c in v.items():
                yield (w, key), c


class KoszulContext:
    """Shared data for the rank-k Koszul endomorphism computations."""

    def __init__(self, k, field):
        self.k = k
        self.field = field
        self.expander = SymExpander(k, field)
        self.free_gens = [(mask, tuple(w))
                          for mask in range(1 << k)
                          for w in staircase_exps(k)]

    def zero_map(self, c, q):
        return SymLinearMap(self, c, q, {})

    def rho_xi(self, j):
        field = self.field
        values = {}
        bit = 1 << (j - 1)
        for (mask, w) in self.free_gens:
            if mask & bit:
                continue
            below = bin(mask & (bit - 1)).count("1")
            sign = field.of_int(-1 if below & 1 else 1)
            values[(mask, w)] = {(mask | bit, w): sign}
        return SymLinearMap(self, 1, -2, values)

    def rho_s(self, i):
        field = self.field
        si = simple_transposition(self.k, i)
        values = {}
        for (mask, w) in self.free_gens:
            bits = mask_bits(mask)
            moved = [si[b - 1] for b in bits]
            inv = sum(1 for a in range(len(moved)) for b in range(a + 1, len(moved))
                      if moved[a] > moved[b])
            sign = field.of_int(-1 if inv & 1 else 1)
            mask2 = bits_mask(moved)
            dd = divided_difference(i, {w: field.one}, field)
            val = {(mask2, e): field.mul(sign, c) for e, c in dd.items()}
            if val:
                values[(mask, w)] = val
        return SymLinearMap(self, 0, -2, values)

    def rho_word(self, word):
        """rho of a product of generators, symbols ('s', i) / ('xi', j)."""
        out = None
        for sym, idx in word:
            m = self.rho_s(idx) if sym == "s" else self.rho_xi(idx)
            out = m if out is None else out.compose(m)
        if out is None:
            ident = SymLinearMap(self, 0, 0,
                                 {w: {w: self.field.one} for w in self.free_gens})
            return ident
        return out

    # -- slice linear algebra ------------------------------------------------

    def slice_basis(self, c, q):
        """Basis of degree-(c, q) Sym-linear maps: pairs (free gen, target
        basis element of the matching bidegree)."""
        out = []
        for (mask, w) in self.free_gens:
            cw, qw = bidegree(mask, tuple(w))
            ct, qt = cw + c, qw + q
            if not 0 <= ct <= self.k:
                continue
            deg2 = qt + 2 * ct
            if deg2 < 0 or deg2 % 2:
                continue
            for mask2 in range(1 << self.k):
                if bin(mask2).count("1") != ct:
                    continue
                for e in _exps_of_degree(self.k, deg2 // 2):
                    out.append(((mask, w), (mask2, e)))
        return out

    def slice_matrix_of_D(self, c, q):
        """Matrix of D from the (c, q) slice to the (c+1, q) slice."""
        src = self.slice_basis(c, q)
        dst = self.slice_basis(c + 1, q)
        pos = {key: r for r, key in enumerate(dst)}
        triples = []
        for col, (w, t) in enumerate(src):
            phi = SymLinearMap(self, c, q, {w: {t: self.field.one}})
            for key, coeff in phi.differential().vector_items():
                triples.append((pos[key], col, coeff))
        return (SparseMatrix.from_triples(len(dst), len(src), triples, self.field),
                src, dst)

    def map_vector(self, phi, basis, pos=None):
        pos = pos or {key: r for r, key in enumerate(basis)}
        vec = {}
        for key, c in phi.vector_items():
            vec[pos[key]] = c
        return vec


def _exps_of_degree(k, d):
    out = []

    def rec(i, left, acc):
        if i == k - 1:
            out.append(tuple(acc + [left]))
            return
        for a in range(left + 1):
            rec(i + 1, left - a, acc + [a])

    if d < 0:
        return []
    rec(0, d, [])
    return sorted(out)


def rho_generator(k, gen, field=None) -> SymLinearMap:
    """The action map of a single generator: gen = ('xi', j) or ('s', i)."""
    field = field or PrimeField(3)
    ctx = KoszulContext(k, field)
    sym, idx = gen
    return ctx.rho_xi(idx) if sym == "xi" else ctx.rho_s(idx)


def lambda_estar_dims(k):
    """Bigraded dims of the exterior algebra on duals e_i^* with
    deg = 1, deg_q = -2i."""
    dims = {}
    for r in range(k + 1):
        for comb in combinations(range(1, k + 1), r):
            key = (r, -2 * sum(comb))
            dims[key] = dims.get(key, 0) + 1
    return dims


def _basis_word(k, w, mask):
    word = [("s", i) for i in reduced_word(w)]
    word += [("xi", j) for j in mask_bits(mask)]
    return tuple(word)


def verify_koszul_duality(k, qcut=None, field=None) -> Report:
    """Per q-degree down to qcut: the endomorphism cohomology matches the
    exterior algebra on the duals of the elementary symmetric polynomials
    and the cohomology of the q-graded local algebra; the action map is a
    multiplicative inclusion sending the volume form to a nonzero class."""
    field = field or PrimeField(3)
    if field.char == 2:
        raise ValueError("requires char != 2")
    lowest = -k * (k + 1)
    qcut = lowest - 4 if qcut is None else qcut
    if qcut > lowest:
        raise ValueError(f"qcut must be <= {lowest}")
    rep = Report("koszul_duality", {"k": k, "qcut": qcut, "field": repr(field)})
    ctx = KoszulContext(k, field)
    target = lambda_estar_dims(k)
    nil = build_rk_nil(k, field)
    from .dga import cohomology_ring
    Hnil = cohomology_ring(nil)
    rep.add("H(R_k^nil) bigraded dims equal the dual exterior pattern",
            Hnil.dims == target, expected=sorted(target.items()),
            got=sorted(Hnil.dims.items()), provenance=PAPER)

    got_dims = {}
    mk_ok = True
    for q in range(0, qcut - 1, -2):
        # acyclicity of the Koszul complex itself in this q-slice
        slice_elems = {}
        for mask in range(1 << k):
            c0 = bin(mask).count("1")
            d2 = q + 2 * c0
            if d2 >= 0 and d2 % 2 == 0:
                slice_elems[c0] = slice_elems.get(c0, []) + [
                    (mask, e) for e in _exps_of_degree(k, d2 // 2)]
        for c0 in range(0, k + 1):
            cur = slice_elems.get(c0, [])
            nxt = slice_elems.get(c0 + 1, [])
            prev = slice_elems.get(c0 - 1, [])
            pos = {t: r for r, t in enumerate(cur)}
            posn = {t: r for r, t in enumerate(nxt)}
            t_in = [(pos[t2], col, v) for col, (m0, e0) in enumerate(prev)
                    for t2, v in koszul_d(k, m0, e0, field).items() if t2 in pos]
            t_out = [(posn[t2], col, v) for col, (m0, e0) in enumerate(cur)
                     for t2, v in koszul_d(k, m0, e0, field).items() if t2 in posn]
            d_in = SparseMatrix.from_triples(len(cur), len(prev), t_in, field)
            d_out = SparseMatrix.from_triples(len(nxt), len(cur), t_out, field)
            hdim = len(subquotient_basis(d_in, d_out, field))
            # the one-dimensional homology sits at the top: the class of
            # xi_1...xi_k times the trivial module
            want = 1 if (c0 == k and q == -2 * k) else 0
            if hdim != want:
                mk_ok = False
        # endomorphism slice cohomology per cohomological degree
        for c in range(-k, k + 1):
            m_in, _, _ = ctx.slice_matrix_of_D(c - 1, q)
            m_out, _, _ = ctx.slice_matrix_of_D(c, q)
            hdim = len(subquotient_basis(m_in, m_out, field))
            if hdim:
                got_dims[(c, q)] = hdim
    rep.add("Koszul complex is a resolution of the trivial module (slicewise)",
            mk_ok, provenance=PAPER)
    want_dims = {key: v for key, v in target.items() if key[1] >= qcut}
    rep.add("H(End) bigraded dims equal the dual exterior pattern",
            got_dims == want_dims, expected=sorted(want_dims.items()),
            got=sorted(got_dims.items()), provenance=PAPER)
    rep.add("H(End) dims equal H(R_k^nil) dims (down to qcut)",
            got_dims == {key: v for key, v in Hnil.dims.items() if key[1] >= qcut},
            provenance=PAPER)

    # chain identity: D(rho(s_i)) = rho(xi_i) - rho(xi_{i+1})
    ok_chain = True
    for i in range(1, k):
        lhs = ctx.rho_s(i).differential()
        rhs = ctx.rho_xi(i).add(ctx.rho_xi(i + 1).neg())
        if lhs != rhs:
            ok_chain = False
    rep.add("D(rho(s_i)) = rho(xi_i) - rho(xi_{i+1})", ok_chain, provenance=PAPER)
    okd = all(not ctx.rho_xi(j).differential().values for j in range(1, k + 1))
    rep.add("rho(xi_j) are cocycles", okd, provenance=TRIVIAL)

    # multiplicativity on generator pairs (complete by the generation lemma)
    flat = nil.meta["flat"]
    rho_basis = [ctx.rho_word(_basis_word(k, w, m)) for (w, m) in flat]
    gens = [("s", i) for i in range(1, k)] + [("xi", j) for j in range(1, k + 1)]
    ok_mult = True
    for gen in gens:
        gmap = ctx.rho_s(gen[1]) if gen[0] == "s" else ctx.rho_xi(gen[1])
        gid = {("s", i): nil.meta["index"][(simple_transposition(k, i), 0)]
               for i in range(1, k)}
        gid.update({("xi", j): nil.meta["index"][(identity_perm(k), 1 << (j - 1))]
                    for j in range(1, k + 1)})
        for b, (w, m) in enumerate(flat):
            prod = nil.product_ids(gid[gen], b)
            want = ctx.zero_map(gmap.c + rho_basis[b].c, gmap.q + rho_basis[b].q)
            for tgt, coeff in prod:
                scaled = SymLinearMap(ctx, rho_basis[tgt].c, rho_basis[tgt].q,
                                      {w2: {key: field.mul(c, coeff)
                                            for key, c in v.items()}
                                       for w2, v in rho_basis[tgt].values.items()})
                want = want.add(scaled)
            if gmap.compose(rho_basis[b]) != want:
                ok_mult = False
    rep.add("rho multiplicative on generator x basis pairs", ok_mult,
            provenance=PAPER)

    # injectivity on the basis
    tracker = _RankTracker(0, field)
    coords = {}
    for phi in rho_basis:
        vec = {}
        for key, c in phi.vector_items():
            vec[coords.setdefault(key, len(coords))] = c
        tracker.add(vec)
    rep.add("rho injective on the basis", tracker.rank == nil.dim,
            expected=nil.dim, got=tracker.rank, provenance=PAPER)

    # the volume-form class is nonzero in cohomology
    w0 = max(all_perms(k), key=perm_length)
    vol_word = tuple([("xi", j) for j in range(1, k + 1)]
                     + [("s", i) for i in reduced_word(w0)])
    vol = ctx.rho_word(vol_word)
    ok_vol = bool(vol.values) and not vol.differential().values
    m_in, src, dst = ctx.slice_matrix_of_D(k - 1, lowest)
    pos = {key: r for r, key in enumerate(dst)}
    vec = ctx.map_vector(vol, dst, pos)
    ok_vol = ok_vol and solve(m_in, vec, field) is None
    rep.add("rho(xi_1...xi_k s_{w0}) is a nonzero cohomology class", ok_vol,
            provenance=PAPER)
    return rep
