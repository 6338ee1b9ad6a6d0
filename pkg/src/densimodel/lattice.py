"""Quadratic lattice domain model.

A lattice is stored by its Gram matrix in the "Gram convention": S[i][i] is
the quadratic value h(e_i) and S[i][j] (i != j) is the polar value
h(e_i, e_j) = (h(e_i+e_j) - h(e_i) - h(e_j))/2.  Since h(e_i, e_i) = h(e_i),
S is simply the polar Gram matrix, and h(v) = v^T S v.  Block constructors
only produce integral S, so every lattice here satisfies h(L) in A and
h(L, L) in A, i.e. L is contained in its dual.

Gram data is kept exact (integer coefficient grids); each operation
materializes it at the caller's working precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DegenerateForm, PrecisionExhausted, RankDeficient
from .kappa import (
    Kappa,
    kform_classify,
    kform_eval,
    kform_is_nonsingular,
    kform_kernel,
    kmat_rref,
    orthogonal_group_order as _kappa_group_order,
)
from .linalg import (
    ALattice,
    MatrixA,
    a_kernel_mod,
    hnf_columns,
    invert_with_denominator,
    lattice_intersection,
    _pi_power,
)
from .ring import RingElem, RingSpec, residue


class QuadraticLattice:
    """Rank-n quadratic lattice with exact integral Gram data."""

    __slots__ = ("spec", "n", "gram")

    def __init__(self, spec: RingSpec, gram_rows):
        self.spec = spec
        self.gram = [list(r) for r in gram_rows]
        self.n = len(self.gram)
        for i in range(self.n):
            for j in range(self.n):
                if self.gram[i][j].coeffs != self.gram[j][i].coeffs:
                    raise ValueError("Gram matrix must be symmetric")
        if self.n and _exact_det_is_zero(spec, self.gram):
            raise DegenerateForm("Gram determinant vanishes")

    @staticmethod
    def from_int_gram(spec, int_rows):
        rows = [[spec.from_int(c) for c in row] for row in int_rows]
        return QuadraticLattice(spec, rows)

    def gram_at(self, prec) -> MatrixA:
        return MatrixA(
            self.spec, [[x.at_prec(prec) for x in row] for row in self.gram]
        )

    def h_value(self, S: MatrixA, x):
        """h(x) = x^T S x for a coordinate column x."""
        acc = self.spec.zero(None)
        Sx = S.apply(x)
        for a, b in zip(x, Sx):
            acc = acc + a * b
        return acc

    def polar_value(self, S: MatrixA, x, y):
        acc = self.spec.zero(None)
        Sy = S.apply(y)
        for a, b in zip(x, Sy):
            acc = acc + a * b
        return acc

    def det_valuation_exact(self):
        d = _exact_det(self.spec, self.gram)
        v = d.valuation()
        return v

    def __repr__(self):
        return f"QuadraticLattice(n={self.n}, spec={self.spec})"


def _exact_det(spec, rows):
    n = len(rows)
    if n == 0:
        return spec.one(None)
    if n == 1:
        return rows[0][0]
    acc = spec.zero(None)
    for j in range(n):
        if rows[0][j].is_exact_zero():
            continue
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = rows[0][j] * _exact_det(spec, minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def _exact_det_is_zero(spec, rows):
    return _exact_det(spec, rows).is_exact_zero()


# -- block constructors ---------------------------------------------------------


def block_A(spec, a: RingElem, b: RingElem):
    """The rank-2 block with Gram [[a, 1], [1, b]]."""
    one, zero = spec.one(None), spec.zero(None)
    return [[a, one], [one, b]]


def block_rank1(spec, t: RingElem):
    return [[t]]


def build_lattice(spec, blocks, scales) -> QuadraticLattice:
    """Orthogonal sum of blocks, block k scaled by pi^(scales[k]).

    blocks: list of ('A', a, b) or ('t', t) with exact RingElems; scales:
    matching list of nonnegative ints.
    """
    if len(blocks) != len(scales):
        raise ValueError("blocks and scales must align")
    grams = []
    for blk, s in zip(blocks, scales):
        if s < 0:
            raise ValueError("scales must be >= 0")
        if blk[0] == "A":
            g = block_A(spec, blk[1], blk[2])
        elif blk[0] == "t":
            g = block_rank1(spec, blk[1])
        else:
            raise ValueError(f"unknown block kind {blk[0]!r}")
        piser = _pi_power(spec, s, None)
        grams.append([[piser * x for x in row] for row in g])
    n = sum(len(g) for g in grams)
    zero = spec.zero(None)
    rows = [[zero] * n for _ in range(n)]
    off = 0
    for g in grams:
        r = len(g)
        for i in range(r):
            for j in range(r):
                rows[off + i][off + j] = g[i][j]
        off += r
    return QuadraticLattice(spec, rows)


# -- dual lattice ---------------------------------------------------------------


def dual_lattice(L: QuadraticLattice, prec):
    """L^# = {x in V : h(x, L) in A} in L-coordinates.

    Returns (lattice, shift): the dual is lattice scaled by pi^(-shift),
    with the lattice part in canonical form.
    """
    S = L.gram_at(prec)
    X, k = invert_with_denominator(S)
    lat = ALattice.from_generators(L.spec, X.columns(), L.n, prec)
    return lat, k


def dual_of_scaled(L: QuadraticLattice, lat: ALattice, shift, prec) -> ALattice:
    """Integral part of the dual of lat/pi^shift, {x in A^n : h(x, .) in A}.

    The double dual of an integral lattice is integral, so this suffices to
    verify (L^#)^# = L.
    """
    spec = L.spec
    S = L.gram_at(prec)
    P = MatrixA(spec, [[col[r] for col in lat.basis] for r in range(L.n)])
    M = P.transpose() * S
    return a_kernel_mod(spec, M.rows, [shift] * lat.rank, prec)


# -- Jordan splitting -------------------------------------------------------------


@dataclass
class JordanSplitting:
    scales: list            # strictly increasing scale exponents
    blocks: list            # unimodular Gram matrices (MatrixA) per scale
    basis: MatrixA          # columns: new basis in L-coordinates
    prec: int

    def block_dims(self):
        return [b.nrows for b in self.blocks]


def jordan_splitting(L: QuadraticLattice, prec) -> JordanSplitting:
    """Greedy symmetric reduction into pi^i-scaled unimodular blocks.

    If a diagonal entry realizes the minimal valuation (after, for odd p,
    folding a minimal polar pair into the diagonal) a rank-1 block splits
    off; otherwise (p = 2) a 2x2 block on the minimal polar pair does.
    """
    spec = L.spec
    n = L.n
    S = L.gram_at(prec)
    basis_cols = [
        [spec.one(prec) if r == j else spec.zero(prec) for r in range(n)]
        for j in range(n)
    ]
    G = [row[:] for row in S.rows]
    out = []  # (scale, [columns in L-coords], unimodular gram rows)

    while G:
        r = len(G)
        dmin, di = None, None
        for i in range(r):
            v = G[i][i].valuation()
            if not isinstance(v, int):
                continue
            if dmin is None or v < dmin:
                dmin, di = v, i
        pmin, pij = None, None
        for i in range(r):
            for j in range(i + 1, r):
                v = G[i][j].valuation()
                if not isinstance(v, int):
                    continue
                if pmin is None or v < pmin:
                    pmin, pij = v, (i, j)
        if dmin is None and pmin is None:
            raise PrecisionExhausted("Jordan block vanished at precision")
        if spec.p != 2 and pmin is not None and (dmin is None or pmin < dmin):
            # fold the pair to put the minimum on the diagonal:
            # h(e_i + e_j) = h_i + h_j + 2 h(e_i, e_j) has valuation pmin
            i, j = pij
            basis_cols[i] = [a + b for a, b in zip(basis_cols[i], basis_cols[j])]
            for k in range(r):
                G[i][k] = G[i][k] + G[j][k]
            for k in range(r):
                G[k][i] = G[k][i] + G[k][j]
            continue
        if dmin is not None and (pmin is None or dmin <= pmin):
            i = di
            v = dmin
            piv = G[i][i]
            pinv = piv.divide_by_pi_power(v).unit_inverse()
            newcols, newG = _split_rank1(spec, G, basis_cols, i, pinv, v)
            unim = [[piv.divide_by_pi_power(v)]]
            out.append((v, [basis_cols[i]], unim))
            basis_cols, G = newcols, newG
        else:
            i, j = pij
            v = pmin
            M = [[G[i][i], G[i][j]], [G[i][j], G[j][j]]]
            newcols, newG, bcols = _split_rank2(spec, G, basis_cols, i, j, v)
            unim = [
                [x.divide_by_pi_power(v) for x in row]
                for row in M
            ]
            out.append((v, bcols, unim))
            basis_cols, G = newcols, newG

    out.sort(key=lambda t: t[0])
    scales, blocks, cols = [], [], []
    for v, bcols, unim in out:
        if scales and scales[-1] == v:
            old = blocks[-1]
            d_old, d_new = len(old), len(unim)
            zero = spec.zero(prec)
            merged = [row + [zero] * d_new for row in old] + [
                [zero] * d_old + row for row in unim
            ]
            blocks[-1] = merged
            cols[-1].extend(bcols)
        else:
            scales.append(v)
            blocks.append([row[:] for row in unim])
            cols.append(list(bcols))
    allcols = [c for group in cols for c in group]
    basis = MatrixA(spec, [[col[r] for col in allcols] for r in range(n)])
    return JordanSplitting(
        scales, [MatrixA(spec, b) for b in blocks], basis, prec
    )


def _split_rank1(spec, G, basis_cols, i, pinv, v):
    r = len(G)
    rest = [k for k in range(r) if k != i]
    # factor_k = G[i][k] / G[i][i]; polar entries have valuation >= v here
    newcols = []
    for k in rest:
        factor = G[i][k].divide_by_pi_power(v) * pinv
        newcols.append(
            [a - factor * b for a, b in zip(basis_cols[k], basis_cols[i])]
        )
    newG = []
    for a_idx, ka in enumerate(rest):
        row = []
        fa = G[i][ka].divide_by_pi_power(v) * pinv
        for kb in rest:
            fb = G[i][kb].divide_by_pi_power(v) * pinv
            entry = G[ka][kb] - fb * G[ka][i] - fa * G[i][kb] + fa * fb * G[i][i]
            row.append(entry)
        newG.append(row)
    return newcols, newG


def _split_rank2(spec, G, basis_cols, i, j, v):
    r = len(G)
    rest = [k for k in range(r) if k not in (i, j)]
    a, b, c = G[i][i], G[i][j], G[j][j]
    det = a * c - b * b
    det_unit = det.divide_by_pi_power(2 * v).unit_inverse()
    bcols = [basis_cols[i], basis_cols[j]]
    newcols = []
    coeffs = []
    for k in rest:
        gi, gj = G[i][k], G[j][k]
        # solve [[a,b],[b,c]] [alpha, beta]^T = [gi, gj]^T; entries of the
        # adjugate combination have valuation >= 2v, so division is exact
        alpha = (c * gi - b * gj).divide_by_pi_power(2 * v) * det_unit
        beta = (a * gj - b * gi).divide_by_pi_power(2 * v) * det_unit
        coeffs.append((alpha, beta))
        newcols.append(
            [
                x - alpha * y - beta * z
                for x, y, z in zip(basis_cols[k], basis_cols[i], basis_cols[j])
            ]
        )
    newG = []
    for s_idx, ks in enumerate(rest):
        als, bes = coeffs[s_idx]
        row = []
        for t_idx, kt in enumerate(rest):
            alt, bet = coeffs[t_idx]
            entry = (
                G[ks][kt]
                - alt * G[ks][i]
                - bet * G[ks][j]
                - als * G[i][kt]
                - bes * G[j][kt]
                + als * alt * a
                + (als * bet + bes * alt) * b
                + bes * bet * c
            )
            row.append(entry)
        newG.append(row)
    return newcols, newG, bcols


# -- the residue sublattices A_i, B_i, Z_i ---------------------------------------


def sublattice_A(L: QuadraticLattice, i: int, prec) -> ALattice:
    """A_i = {x in L : h(x, L) in pi^i A}."""
    S = L.gram_at(prec)
    return a_kernel_mod(L.spec, S.rows, [i] * L.n, prec)


def pi_coeff_moduli(spec, t):
    """Exponents c with (value in pi^t A) <=> coeff (j,i) = 0 mod p^c.

    Flat order matches ring flattening: index j*f + i.
    """
    a, b = divmod(t, spec.e)
    out = []
    for j in range(spec.e):
        c = a + 1 if j < b else a
        out.extend([c] * spec.f)
    return out


def flatten_elem(x: RingElem):
    """Coefficient grid of x in flat (j, i) order."""
    return [c for row in x.coeffs for c in row]


def zp_basis_scalars(spec, prec):
    """The e*f monomials x^a pi^c spanning A over Z_p, deterministic order."""
    out = []
    for c in range(spec.e):
        for a in range(spec.f):
            m = _pi_power(spec, c, prec)
            for _ in range(a):
                m = m * spec.x_gen(prec)
            out.append(m)
    return out


def sublattice_B(L: QuadraticLattice, i: int, A_i: ALattice, prec) -> ALattice:
    """B_i: kernel of the additive map x -> pi^(-i) h(x) mod 2 on A_i/2A_i.

    The map is Frobenius-semilinear in A-coordinates but Z_p-linear on the
    coefficient flattening, so the kernel is computed there.
    """
    spec = L.spec
    S = L.gram_at(prec)
    two_val = spec.e * (1 if spec.p == 2 else 0)
    if two_val == 0:
        return A_i
    scalars = zp_basis_scalars(spec, prec)
    zp_cols = []
    values = []
    for col in A_i.basis:
        for s in scalars:
            vec = [s * x for x in col]
            zp_cols.append(vec)
            hv = L.h_value(S, vec)
            values.append(flatten_elem(hv.divide_by_pi_power(i)))
    # rows of the condition matrix: one per coefficient coordinate
    ef = spec.e * spec.f
    rows = [[values[c][r] for c in range(len(values))] for r in range(ef)]
    moduli = pi_coeff_moduli(spec, two_val)
    from .linalg import zp_kernel_int

    kbasis, _ = zp_kernel_int(rows, moduli, spec.p, max(m for m in moduli) + 3)
    gens = []
    for kv in kbasis:
        acc = [spec.zero(prec)] * L.n
        for coeff, vec in zip(kv, zp_cols):
            if coeff:
                add = [x.scale_int(coeff) for x in vec]
                acc = [a + b for a, b in zip(acc, add)]
        gens.append(acc)
    # the kernel is A-stable (h(ax) = a^2 h(x)); the A-span equals the span
    return ALattice.from_generators(spec, gens, L.n, prec)


def sublattice_Z(L: QuadraticLattice, i: int, B_i: ALattice, prec) -> ALattice:
    """Z_i: kernel of the residue quadratic form (1/2) pi^(-i) h on B_i/pi B_i."""
    spec = L.spec
    K = Kappa(spec)
    diag, fp = _residue_form_data(L, i, B_i, K, prec)
    kvecs = kform_kernel(K, diag, fp)
    pi = spec.pi(prec)
    gens = [[pi * x for x in col] for col in B_i.basis]
    for kv in kvecs:
        acc = [spec.zero(prec)] * L.n
        for idx, col in zip(kv, B_i.basis):
            if idx:
                c = K.elem(idx).lift(prec)
                acc = [a + c * x for a, x in zip(acc, col)]
        gens.append(acc)
    return ALattice.from_generators(spec, gens, L.n, prec)


def _residue_form_data(L, i, B_i, K, prec):
    spec = L.spec
    S = L.gram_at(prec)
    two_val = spec.e if spec.p == 2 else 0
    half_unit = None
    if spec.p != 2:
        half_unit = spec.from_int(2, prec).unit_inverse()
    diag, fp = [], []
    r = B_i.rank
    for s in range(r):
        hs = L.h_value(S, B_i.basis[s])
        w = hs.divide_by_pi_power(i + two_val)
        if spec.p != 2:
            w = w * half_unit
        diag.append(residue(w).index)
    for s in range(r):
        row = []
        for t in range(r):
            pv = L.polar_value(S, B_i.basis[s], B_i.basis[t])
            row.append(residue(pv.divide_by_pi_power(i)).index)
        fp.append(row)
    return diag, fp


@dataclass
class ResidueQuadSpace:
    """V_bar_i = B_i / Z_i with its nonsingular residue quadratic form."""

    index: int
    dim: int
    diag: list              # Q values on the quotient basis (kappa indices)
    fp: list                # full polarization matrix on the quotient basis
    type: str               # 'odd' | 'even-plus' | 'even-minus'
    b_basis: list           # columns of B_i in L-coordinates
    z_in_b: list            # kernel vectors of the form in B-coordinates
    quotient_rows: list     # coordinate rows of B/piB giving the quotient basis
    kappa: Kappa = field(repr=False)


def residue_form(L: QuadraticLattice, i: int, prec, A_i=None, B_i=None) -> ResidueQuadSpace:
    spec = L.spec
    if A_i is None:
        A_i = sublattice_A(L, i, prec)
    if B_i is None:
        B_i = sublattice_B(L, i, A_i, prec)
    K = Kappa(spec)
    diag, fp = _residue_form_data(L, i, B_i, K, prec)
    kvecs = kform_kernel(K, diag, fp)
    r = B_i.rank
    if kvecs:
        zmat = [[kv[row] for kv in kvecs] for row in range(r)]
        _, pivots = kmat_rref(K, [list(col) for col in zip(*zmat)])
        pivot_rows = set(pivots)
    else:
        pivot_rows = set()
    quotient_rows = [rr for rr in range(r) if rr not in pivot_rows]
    # reduce quotient basis vectors modulo the kernel: since kernel vectors
    # are in the radical with Q = 0, simple coordinate restriction is enough
    qd = [diag[rr] for rr in quotient_rows]
    qfp = [[fp[rr][ss] for ss in quotient_rows] for rr in quotient_rows]
    if not kform_is_nonsingular(K, qd, qfp):
        raise RankDeficient(f"residue form at scale {i} is singular")
    typ = kform_classify(K, qd, qfp)
    return ResidueQuadSpace(
        index=i,
        dim=len(quotient_rows),
        diag=qd,
        fp=qfp,
        type=typ,
        b_basis=B_i.basis,
        z_in_b=kvecs,
        quotient_rows=quotient_rows,
        kappa=K,
    )


def residue_spaces(L: QuadraticLattice, prec):
    """All nonzero residue spaces V_bar_i.

    For a block of scale s the form (1/2) pi^(-i) h is identically zero mod
    pi on B_i once i >= s + e + 1, so scanning i up to max(scales) + e is
    exhaustive.
    """
    js = jordan_splitting(L, prec)
    top = (max(js.scales) if js.scales else 0) + L.spec.e
    out = []
    for i in range(top + 1):
        rqs = residue_form(L, i, prec)
        if rqs.dim > 0:
            out.append(rqs)
    return out


def orthogonal_group_order(dim: int, typ: str, q: int, char2: bool) -> int:
    return _kappa_group_order(dim, typ, q, char2)
