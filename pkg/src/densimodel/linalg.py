"""Matrices and lattices over A at finite precision.

Lattices are column spans in a fixed ambient A^d, kept in a canonical
column-echelon (Howell-style) form: pivot rows strictly increase, each pivot
entry is exactly pi^v, entries of that row in earlier columns are reduced
mod pi^v, and entries of that row in later columns are zero.  For a fixed
lattice and sufficient precision the form is unique, so lattice equality is
basis equality.

Pivot selection: minimum valuation in the current row, ties broken by the
smallest column index; rows are scanned top to bottom.  This makes every
canonical form deterministic.
"""

from __future__ import annotations

from .errors import (
    BELOW_PRECISION,
    NotSublattice,
    PrecisionExhausted,
    RankDeficient,
)
from .ring import RingElem, RingSpec


class MatrixA:
    """Dense matrix of RingElems sharing one RingSpec."""

    __slots__ = ("spec", "rows")

    def __init__(self, spec, rows):
        self.spec = spec
        self.rows = [list(r) for r in rows]

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    @staticmethod
    def identity(spec, n, prec):
        one, zero = spec.one(prec), spec.zero(prec)
        return MatrixA(spec, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @staticmethod
    def zero(spec, n, m, prec):
        z = spec.zero(prec)
        return MatrixA(spec, [[z] * m for _ in range(n)])

    @staticmethod
    def from_int_rows(spec, int_rows, prec):
        return MatrixA(
            spec, [[spec.from_int(c, prec) for c in row] for row in int_rows]
        )

    def copy(self):
        return MatrixA(self.spec, self.rows)

    def transpose(self):
        return MatrixA(self.spec, list(map(list, zip(*self.rows))))

    def __mul__(self, other):
        zero = self.spec.zero(None)
        out = []
        bt = list(zip(*other.rows))
        for row in self.rows:
            out.append(
                [
                    _dot(row, col, zero)
                    for col in bt
                ]
            )
        return MatrixA(self.spec, out)

    def __add__(self, other):
        return MatrixA(
            self.spec,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
        )

    def __sub__(self, other):
        return MatrixA(
            self.spec,
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)],
        )

    def __neg__(self):
        return MatrixA(self.spec, [[-a for a in row] for row in self.rows])

    def scale(self, elem):
        return MatrixA(self.spec, [[elem * a for a in row] for row in self.rows])

    def at_prec(self, prec):
        return MatrixA(self.spec, [[a.at_prec(prec) for a in row] for row in self.rows])

    def columns(self):
        return [list(col) for col in zip(*self.rows)]

    def apply(self, vec):
        zero = self.spec.zero(None)
        return [_dot(row, vec, zero) for row in self.rows]


def _dot(xs, ys, zero):
    acc = zero
    for x, y in zip(xs, ys):
        acc = acc + x * y
    return acc


def _exact_pi_quotient(entry, v):
    """entry / pi^v, exact (valuation of entry must be >= v)."""
    return entry.divide_by_pi_power(v)


def hnf_columns(spec, columns, ambient_dim, want_transform=False):
    """Canonical column echelon form of the span of ``columns``.

    Returns (basis_columns, pivots[, transform_columns]) where pivots is a
    list of (row, valuation) per basis column.  Generator columns that reduce
    to zero at precision are dropped.  transform_columns expresses each basis
    column as a combination of the input columns.
    """
    cols = [list(c) for c in columns]
    ncols = len(cols)
    trans = None
    if want_transform:
        # trans[j] tracks column j as a combination of the original columns
        trans = [
            [spec.one(None) if i == j else spec.zero(None) for i in range(ncols)]
            for j in range(ncols)
        ]

    pivots = []
    done = 0  # number of established pivot columns
    for row in range(ambient_dim):
        # choose pivot among columns done.. with minimal valuation in `row`
        best = None
        for j in range(done, len(cols)):
            v = cols[j][row].valuation()
            if v is BELOW_PRECISION:
                continue
            if best is None or v < best[0]:
                best = (v, j)
        if best is None:
            continue
        v, j = best
        cols[done], cols[j] = cols[j], cols[done]
        if trans is not None:
            trans[done], trans[j] = trans[j], trans[done]
        # normalize: pivot becomes exactly pi^v
        unit = _exact_pi_quotient(cols[done][row], v)
        uinv = unit.unit_inverse()
        cols[done] = [uinv * x for x in cols[done]]
        if trans is not None:
            trans[done] = [uinv * x for x in trans[done]]
        pivot_col = cols[done]
        pivot_col[row] = _pi_power(spec, v, pivot_col[row].prec)
        # eliminate this row from later columns (their valuation is >= v)
        for k in range(done + 1, len(cols)):
            entry = cols[k][row]
            if entry.valuation() is BELOW_PRECISION:
                continue
            factor = _exact_pi_quotient(entry, v)
            cols[k] = [x - factor * y for x, y in zip(cols[k], pivot_col)]
            cols[k][row] = spec.zero(cols[k][row].prec)
            if trans is not None:
                trans[k] = [x - factor * y for x, y in zip(trans[k], trans[done])]
        # reduce this row in earlier pivot columns mod pi^v
        for k in range(done):
            entry = cols[k][row]
            if entry.valuation() is BELOW_PRECISION:
                continue
            red = RingElem(spec, entry.reduced_mod_pi_power(v), entry.prec)
            delta = entry - red
            if delta.valuation() is BELOW_PRECISION:
                continue
            factor = _exact_pi_quotient(delta, v)
            cols[k] = [x - factor * y for x, y in zip(cols[k], pivot_col)]
            cols[k][row] = red
            if trans is not None:
                trans[k] = [x - factor * y for x, y in zip(trans[k], trans[done])]
        pivots.append((row, v))
        done += 1
        if done == len(cols):
            break
    basis = cols[:done]
    if want_transform:
        return basis, pivots, trans[:done]
    return basis, pivots


def _pi_power(spec, v, prec):
    out = spec.one(None)
    pi = spec.pi(None)
    for _ in range(v):
        out = out * pi
    return out.at_prec(prec) if prec is not None else out


class ALattice:
    """A-submodule of A^d given by a canonical echelon basis."""

    __slots__ = ("spec", "ambient_dim", "basis", "pivots", "prec")

    def __init__(self, spec, ambient_dim, basis, pivots, prec):
        self.spec = spec
        self.ambient_dim = ambient_dim
        self.basis = basis          # list of columns (lists of RingElem)
        self.pivots = pivots        # list of (row, valuation)
        self.prec = prec

    @staticmethod
    def from_generators(spec, columns, ambient_dim, prec):
        basis, pivots = hnf_columns(spec, columns, ambient_dim)
        return ALattice(spec, ambient_dim, basis, pivots, prec)

    @staticmethod
    def standard(spec, d, prec):
        cols = [
            [spec.one(prec) if i == j else spec.zero(prec) for i in range(d)]
            for j in range(d)
        ]
        return ALattice(spec, d, cols, [(i, 0) for i in range(d)], prec)

    @property
    def rank(self):
        return len(self.basis)

    def canonical_key(self):
        """Precision-independent fingerprint; equal keys <=> equal lattices."""
        key = []
        for col, (row, v) in zip(self.basis, self.pivots):
            entries = []
            for r in range(self.ambient_dim):
                # entries are only well-defined mod the pivot valuation of
                # their own row's pivot; rows without a pivot use full data
                rv = next((pv for (pr, pv) in self.pivots if pr == r), None)
                x = col[r]
                if rv is None:
                    entries.append(x.coeffs)
                else:
                    entries.append(x.reduced_mod_pi_power(rv))
            key.append((row, v, tuple(entries)))
        return tuple(key)

    def __eq__(self, other):
        if not isinstance(other, ALattice):
            return NotImplemented
        if (self.ambient_dim, self.rank) != (other.ambient_dim, other.rank):
            return False
        if [p for p in self.pivots] != [p for p in other.pivots]:
            return False
        return self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())

    def coords_of(self, vector, strict=True):
        """Coordinates of ``vector`` in the basis, or None if not a member.

        Membership is decided at the working precision: residuals below
        precision count as zero.
        """
        residual = list(vector)
        coords = []
        for col, (row, v) in zip(self.basis, self.pivots):
            entry = residual[row]
            ev = entry.valuation()
            if ev is BELOW_PRECISION:
                coords.append(self.spec.zero(entry.prec))
                continue
            if ev < v:
                return None
            c = _exact_pi_quotient(entry, v)
            coords.append(c)
            residual = [x - c * y for x, y in zip(residual, col)]
        for x in residual:
            if x.valuation() is not BELOW_PRECISION:
                return None
        return coords

    def member(self, vector):
        return self.coords_of(vector) is not None

    def linear_combination(self, coords):
        zero = self.spec.zero(self.prec)
        out = [zero] * self.ambient_dim
        for c, col in zip(coords, self.basis):
            out = [x + c * y for x, y in zip(out, col)]
        return out

    def scaled(self, elem):
        cols = [[elem * x for x in col] for col in self.basis]
        return ALattice.from_generators(self.spec, cols, self.ambient_dim, self.prec)


def lattice_sum(M: ALattice, N: ALattice) -> ALattice:
    assert M.ambient_dim == N.ambient_dim
    return ALattice.from_generators(
        M.spec, M.basis + N.basis, M.ambient_dim, min(M.prec, N.prec)
    )


def lattice_intersection(M: ALattice, N: ALattice) -> ALattice:
    """M cap N via the kernel of [basis_M | -basis_N]."""
    assert M.ambient_dim == N.ambient_dim
    spec = M.spec
    d = M.ambient_dim
    cols = []
    for col in M.basis:
        cols.append(list(col))
    for col in N.basis:
        cols.append([-x for x in col])
    ker = a_kernel(spec, cols, d)
    gens = []
    r = len(M.basis)
    for kv in ker:
        gens.append(M.linear_combination(kv[:r]))
    return ALattice.from_generators(spec, gens, d, min(M.prec, N.prec))


def a_kernel(spec, columns, nrows):
    """Basis of {v in A^c : sum v_j col_j = 0} at working precision.

    Stacks an identity block under the matrix and reads kernel vectors off
    the columns whose top part vanished.
    """
    c = len(columns)
    if c == 0:
        return []
    prec = None
    for col in columns:
        for x in col:
            if x.prec is not None:
                prec = x.prec if prec is None else min(prec, x.prec)
    stacked = []
    for j, col in enumerate(columns):
        bottom = [
            spec.one(prec) if i == j else spec.zero(prec) for i in range(c)
        ]
        stacked.append(list(col) + bottom)
    basis, pivots = hnf_columns(spec, stacked, nrows + c)
    out = []
    for col, (row, v) in zip(basis, pivots):
        if row >= nrows:
            out.append(col[nrows:])
    return out


def lattice_index(M: ALattice, N: ALattice) -> int:
    """Exponent k with #(M/N) = q^k, for N a full-rank sublattice of M."""
    if M.ambient_dim != N.ambient_dim or M.rank != N.rank:
        raise NotSublattice("ranks or ambients differ")
    total = 0
    rel_cols = []
    for col in N.basis:
        coords = M.coords_of(col)
        if coords is None:
            raise NotSublattice("N is not contained in M")
        rel_cols.append(coords)
    basis, pivots = hnf_columns(M.spec, rel_cols, M.rank)
    if len(basis) != M.rank:
        raise RankDeficient("relative matrix is singular at precision")
    for _, v in pivots:
        total += v
    return total


def det_valuation(spec, columns, n) -> int:
    """Valuation of the determinant of a square column matrix."""
    basis, pivots = hnf_columns(spec, columns, n)
    if len(basis) != n:
        raise RankDeficient("matrix singular at working precision")
    return sum(v for _, v in pivots)


def invert_with_denominator(mat: MatrixA):
    """Return (X, k) with mat^{-1} = X / pi^k, X integral, k = v(det)."""
    spec = mat.spec
    n = mat.nrows
    cols = mat.columns()
    basis, pivots, trans = hnf_columns(spec, cols, n, want_transform=True)
    if len(basis) != n:
        raise RankDeficient("matrix singular at working precision")
    k = sum(v for _, v in pivots)
    # solve H y = pi^k e_i by back substitution, then X col i = T y
    prec = None
    for col in cols:
        for x in col:
            if x.prec is not None:
                prec = x.prec if prec is None else min(prec, x.prec)
    out_cols = []
    for i in range(n):
        target = [
            _pi_power(spec, k, prec) if r == i else spec.zero(prec)
            for r in range(n)
        ]
        y = _solve_echelon(spec, basis, pivots, target)
        if y is None:
            raise PrecisionExhausted("inverse solve failed")
        xcol = [spec.zero(prec)] * n
        for coeff, tcol in zip(y, trans):
            xcol = [a + coeff * b for a, b in zip(xcol, tcol)]
        out_cols.append(xcol)
    X = MatrixA(spec, list(map(list, zip(*out_cols))))
    return X, k


def _solve_echelon(spec, basis, pivots, target):
    residual = list(target)
    coords = []
    for col, (row, v) in zip(basis, pivots):
        entry = residual[row]
        ev = entry.valuation()
        if ev is BELOW_PRECISION:
            coords.append(spec.zero(entry.prec))
            continue
        if ev < v:
            return None
        c = _exact_pi_quotient(entry, v)
        coords.append(c)
        residual = [x - c * y for x, y in zip(residual, col)]
    for x in residual:
        if x.valuation() is not BELOW_PRECISION:
            return None
    return coords


def solve_column(mat: MatrixA, target):
    """Solve mat * x = target over Frac(A); returns (x, denom_exp) or None.

    x is integral and the solution is x / pi^denom_exp.
    """
    X, k = invert_with_denominator(mat)
    return X.apply(target), k


def a_kernel_mod(spec, rows, moduli, prec):
    """{v in A^c : (Mv)_r = 0 mod pi^(moduli[r]) for all r} as an ALattice.

    rows: the matrix M as a list of RingElem rows; moduli: one exponent per
    row (rows with exponent <= 0 impose nothing).
    """
    c = len(rows[0]) if rows else 0
    live = [(row, t) for row, t in zip(rows, moduli) if t > 0]
    if not live:
        return ALattice.standard(spec, c, prec)
    k = len(live)
    cols = []
    for j in range(c):
        cols.append([live[i][0][j] for i in range(k)])
    for i in range(k):
        cols.append(
            [
                _pi_power(spec, live[i][1], prec) if r == i else spec.zero(prec)
                for r in range(k)
            ]
        )
    ker = a_kernel(spec, cols, k)
    gens = [kv[:c] for kv in ker]
    return ALattice.from_generators(spec, gens, c, prec)


# -- Smith normal form ----------------------------------------------------------


def snf(mat: MatrixA):
    """Smith normal form over A.

    Returns (divisors, U, V) with U*mat*V = diag(pi^d1, ...), d1 >= d2 >= ...,
    U and V unimodular at working precision.
    """
    spec = mat.spec
    n, m = mat.nrows, mat.ncols
    M = [row[:] for row in mat.rows]
    prec = None
    for row in M:
        for x in row:
            if x.prec is not None:
                prec = x.prec if prec is None else min(prec, x.prec)
    U = MatrixA.identity(spec, n, prec).rows
    V = MatrixA.identity(spec, m, prec).rows
    divisors = []
    k = 0
    while k < min(n, m):
        best = None
        for i in range(k, n):
            for j in range(k, m):
                v = M[i][j].valuation()
                if v is BELOW_PRECISION:
                    continue
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            break
        v, bi, bj = best
        if bi != k:
            M[k], M[bi] = M[bi], M[k]
            U[k], U[bi] = U[bi], U[k]
        if bj != k:
            for row in M:
                row[k], row[bj] = row[bj], row[k]
            for row in V:
                row[k], row[bj] = row[bj], row[k]
        # normalize pivot to exactly pi^v (scale the pivot row)
        unit = _exact_pi_quotient(M[k][k], v)
        uinv = unit.unit_inverse()
        M[k] = [uinv * x for x in M[k]]
        U[k] = [uinv * x for x in U[k]]
        M[k][k] = _pi_power(spec, v, M[k][k].prec)
        # clear the rest of row k and column k
        for i in range(k + 1, n):
            e = M[i][k]
            if e.valuation() is BELOW_PRECISION:
                continue
            f = _exact_pi_quotient(e, v)
            M[i] = [x - f * y for x, y in zip(M[i], M[k])]
            M[i][k] = spec.zero(M[i][k].prec)
            U[i] = [x - f * y for x, y in zip(U[i], U[k])]
        for j in range(k + 1, m):
            e = M[k][j]
            if e.valuation() is BELOW_PRECISION:
                continue
            f = _exact_pi_quotient(e, v)
            for row in M:
                row[j] = row[j] - f * row[k]
            M[k][j] = spec.zero(M[k][j].prec)
            for row in V:
                row[j] = row[j] - f * row[k]
        divisors.append(v)
        k += 1
    # sort into nonincreasing order with matching permutations
    order = sorted(range(len(divisors)), key=lambda i: -divisors[i])
    rowperm = order + [i for i in range(n) if i >= len(divisors)]
    colperm = order + [j for j in range(m) if j >= len(divisors)]
    U2 = [U[i] for i in rowperm]
    V2 = [[row[j] for j in colperm] for row in V]
    divisors_sorted = [divisors[i] for i in order]
    return divisors_sorted, MatrixA(spec, U2), MatrixA(spec, V2)


# -- integer (Z_p) echelon for flattened kernels --------------------------------


def zp_hnf(columns, p, prec):
    """Canonical column echelon of integer columns modulo p^prec.

    Same conventions as hnf_columns but over Z_p with plain ints.  Returns
    (basis_columns, pivots).
    """
    mod = p ** prec
    cols = [[c % mod for c in col] for col in columns]
    nrows = len(cols[0]) if cols else 0
    pivots = []
    done = 0
    for row in range(nrows):
        best = None
        for j in range(done, len(cols)):
            c = cols[j][row]
            if c == 0:
                continue
            v = 0
            t = c
            while t % p == 0:
                t //= p
                v += 1
            if best is None or v < best[0]:
                best = (v, j)
        if best is None:
            continue
        v, j = best
        cols[done], cols[j] = cols[j], cols[done]
        pv = p ** v
        unit = cols[done][row] // pv
        uinv = pow(unit, -1, mod)
        cols[done] = [(x * uinv) % mod for x in cols[done]]
        cols[done][row] = pv
        pcol = cols[done]
        for k in range(done + 1, len(cols)):
            e = cols[k][row]
            if e == 0:
                continue
            f = e // pv
            cols[k] = [(x - f * y) % mod for x, y in zip(cols[k], pcol)]
            cols[k][row] = 0
        for k in range(done):
            e = cols[k][row]
            f = e // pv
            if f:
                cols[k] = [(x - f * y) % mod for x, y in zip(cols[k], pcol)]
        pivots.append((row, v))
        done += 1
        if done == len(cols):
            break
    return cols[:done], pivots


def zp_kernel_int(matrix_rows, row_moduli, p, prec):
    """Kernel {v in Z_p^c : Mv = 0 mod p^(t_r) rowwise} as canonical columns.

    matrix_rows: list of integer rows; row_moduli: exponent t_r per row.
    Rows with t_r = 0 impose nothing and are dropped.
    """
    rows = [
        (row, t) for row, t in zip(matrix_rows, row_moduli) if t > 0
    ]
    c = len(matrix_rows[0]) if matrix_rows else 0
    if c == 0:
        return [], []
    if not rows:
        return [[1 if i == j else 0 for i in range(c)] for j in range(c)], [
            (j, 0) for j in range(c)
        ]
    k = len(rows)
    mod = p ** prec
    # stack [M | D] on top of [I | 0]; kernel vectors are the bottom parts of
    # pivotless-top columns, projected to the first c coordinates
    cols = []
    for j in range(c):
        top = [rows[i][0][j] % mod for i in range(k)]
        bottom = [1 if i == j else 0 for i in range(c)]
        cols.append(top + bottom)
    for i in range(k):
        top = [p ** rows[i][1] if r == i else 0 for r in range(k)]
        bottom = [0] * c
        cols.append(top + bottom)
    basis, pivots = zp_hnf(cols, p, prec)
    gens = []
    for col, (row, v) in zip(basis, pivots):
        if row >= k:
            gens.append(col[k:])
    return zp_hnf(gens, p, prec)
