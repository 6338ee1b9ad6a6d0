"""Residue-field arithmetic and linear algebra.

kappa = F_q elements are encoded as integers 0..q-1 (base-p digit packing of
the unram_poly basis, matching ring.FqElem.index).  Matrices are lists of
lists of such indices.  Everything here is exact.
"""

from __future__ import annotations

from .errors import NonUnitInverse
from .ring import FqElem, RingSpec, frobenius_solve


class Kappa:
    """Lookup-table arithmetic for F_q and helpers shared by consumers."""

    def __init__(self, spec: RingSpec):
        self.spec = spec
        self.p = spec.p
        self.q = spec.q
        q = self.q
        elems = [FqElem.from_index(spec, i) for i in range(q)]
        self.add = [[(elems[a] + elems[b]).index for b in range(q)] for a in range(q)]
        self.mul = [[(elems[a] * elems[b]).index for b in range(q)] for a in range(q)]
        self.neg = [(-elems[a]).index for a in range(q)]
        self.inv = [0] + [elems[a].inv().index for a in range(1, q)]
        self.sqrt = [frobenius_solve(elems[a]).index for a in range(q)] if spec.p == 2 else None
        self.frob = [(elems[a] ** spec.p).index for a in range(q)]

    def elem(self, idx) -> FqElem:
        return FqElem.from_index(self.spec, idx)

    def trace_to_f2(self, a) -> int:
        """Absolute trace kappa -> F_2 (only used in char 2)."""
        t = 0
        cur = a
        for _ in range(self.spec.f):
            t = self.add[t][cur]
            cur = self.frob[cur]
        return t

    def is_square(self, a) -> bool:
        if self.p == 2 or a == 0:
            return True
        # a^((q-1)/2) == 1
        n = (self.q - 1) // 2
        out, base = 1, a
        while n:
            if n & 1:
                out = self.mul[out][base]
            base = self.mul[base][base]
            n >>= 1
        return out == 1


# -- dense matrices over kappa ------------------------------------------------


def kmat_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def kmat_mul(K: Kappa, A, B):
    n, m = len(A), len(B[0])
    inner = len(B)
    add, mul = K.add, K.mul
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Oi = out[i]
        for k in range(inner):
            a = Ai[k]
            if a:
                Bk = B[k]
                mr = mul[a]
                for j in range(m):
                    b = Bk[j]
                    if b:
                        Oi[j] = add[Oi[j]][mr[b]]
    return out

def kmat_vec(K: Kappa, A, v):
    add, mul = K.add, K.mul
    out = [0] * len(A)
    for i, row in enumerate(A):
        acc = 0
        for a, x in zip(row, v):
            if a and x:
                acc = add[acc][mul[a][x]]
        out[i] = acc
    return out


def kmat_rref(K: Kappa, A):
    """Row-reduce a copy of A; returns (R, pivot_cols)."""
    add, mul, neg, inv = K.add, K.mul, K.neg, K.inv
    R = [row[:] for row in A]
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if R[i][c]), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        s = inv[R[r][c]]
        R[r] = [mul[s][x] for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c]:
                t = neg[R[i][c]]
                Ri, Rr = R[i], R[r]
                for j in range(cols):
                    if Rr[j]:
                        Ri[j] = add[Ri[j]][mul[t][Rr[j]]]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def kmat_rank(K, A):
    return len(kmat_rref(K, A)[1])


def kmat_kernel(K: Kappa, A):
    """Basis of the right kernel {v : Av = 0}."""
    cols = len(A[0]) if A else 0
    if not A:
        return [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]
    R, pivots = kmat_rref(K, A)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * cols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = K.neg[R[r][fc]]
        basis.append(v)
    return basis


def kmat_solve(K: Kappa, A, b):
    """One solution of Av = b, or None."""
    aug = [row[:] + [bi] for row, bi in zip(A, b)]
    R, pivots = kmat_rref(K, aug)
    cols = len(A[0])
    if cols in pivots:
        return None
    v = [0] * cols
    for r, pc in enumerate(pivots):
        v[pc] = R[r][cols]
    return v


def kmat_det(K: Kappa, A):
    mul, neg, inv, add = K.mul, K.neg, K.inv, K.add
    n = len(A)
    M = [row[:] for row in A]
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = neg[det]
        det = mul[det][M[c][c]]
        s = inv[M[c][c]]
        for i in range(c + 1, n):
            if M[i][c]:
                t = neg[mul[s][M[i][c]]]
                Mi, Mc = M[i], M[c]
                for j in range(c, n):
                    if Mc[j]:
                        Mi[j] = add[Mi[j]][mul[t][Mc[j]]]
    return det


def kmat_inverse(K: Kappa, A):
    n = len(A)
    aug = [row[:] + kmat_identity(n)[i] for i, row in enumerate(A)]
    R, pivots = kmat_rref(K, aug)
    if pivots != list(range(n)):
        raise NonUnitInverse("singular kappa matrix")
    return [row[n:] for row in R]


# -- quadratic forms over kappa ----------------------------------------------
#
# A form is (diag, fp): diag[i] = Q(e_i) and fp[i][j] = Q(e_i+e_j) - Q(e_i)
# - Q(e_j), the full polarization (so fp[i][i] = 2 Q(e_i)).


def kform_eval(K: Kappa, diag, fp, v):
    add, mul = K.add, K.mul
    n = len(v)
    acc = 0
    for i in range(n):
        vi = v[i]
        if vi:
            acc = add[acc][mul[mul[vi][vi]][diag[i]]]
            for j in range(i + 1, n):
                if v[j] and fp[i][j]:
                    acc = add[acc][mul[mul[vi][v[j]]][fp[i][j]]]
    return acc


def kform_polar(K: Kappa, fp, v, w):
    add, mul = K.add, K.mul
    acc = 0
    for i, vi in enumerate(v):
        if vi:
            row = fp[i]
            for j, wj in enumerate(w):
                if wj and row[j]:
                    acc = add[acc][mul[mul[vi][wj]][row[j]]]
    return acc


def kform_restrict(K: Kappa, diag, fp, basis):
    """Pull the form back along the column vectors in ``basis``."""
    d = len(basis)
    nd = [kform_eval(K, diag, fp, b) for b in basis]
    nfp = [[kform_polar(K, fp, basis[i], basis[j]) for j in range(d)] for i in range(d)]
    return nd, nfp


def kform_kernel(K: Kappa, diag, fp):
    """Kernel of the quadratic form: rad(polar) intersected with Q = 0.

    In char 2 the restriction of Q to rad(polar) is additive; its zero set
    is kappa-linear after taking square roots.  In odd characteristic Q
    vanishes on the radical automatically.
    """
    n = len(diag)
    rad = kmat_kernel(K, fp) if n else []
    if not rad:
        return []
    if K.p != 2:
        return rad
    # solve sum a_k sqrt(Q(w_k)) = 0 over the radical basis
    susp = [[K.sqrt[kform_eval(K, diag, fp, w)] for w in rad]]
    coeffs = kmat_kernel(K, susp)
    add, mul = K.add, K.mul
    out = []
    for cvec in coeffs:
        v = [0] * n
        for c, w in zip(cvec, rad):
            if c:
                for t in range(n):
                    if w[t]:
                        v[t] = add[v[t]][mul[c][w[t]]]
        out.append(v)
    return out


def kform_is_nonsingular(K, diag, fp):
    return len(kform_kernel(K, diag, fp)) == 0


def kform_classify(K: Kappa, diag, fp):
    """Return 'odd', 'even-plus' or 'even-minus' for a nonsingular form."""
    n = len(diag)
    if n == 0:
        return "even-plus"
    if n % 2 == 1:
        return "odd"
    if K.p == 2:
        return "even-plus" if _arf_invariant_trace(K, diag, fp) == 0 else "even-minus"
    # odd characteristic: plus iff (-1)^m det(S) is a square, S the
    # half-polar Gram matrix (fp/2).
    m = n // 2
    half = K.inv[2 % K.q]
    S = [[K.mul[half][fp[i][j]] for j in range(n)] for i in range(n)]
    d = kmat_det(K, S)
    if m % 2 == 1:
        d = K.neg[d]
    return "even-plus" if K.is_square(d) else "even-minus"


def _arf_invariant_trace(K: Kappa, diag, fp):
    """Absolute trace of the Arf invariant via symplectic basis reduction."""
    n = len(diag)
    basis = kmat_identity(n)
    arf = 0
    add, mul, inv = K.add, K.mul, K.inv
    idx = list(range(n))
    while idx:
        i = idx[0]
        j = next(
            (j for j in idx[1:] if kform_polar(K, fp, basis[i], basis[j])),
            None,
        )
        if j is None:
            raise NonUnitInverse("degenerate polar form in Arf computation")
        u = basis[i]
        s = inv[kform_polar(K, fp, u, basis[j])]
        v = [mul[s][x] for x in basis[j]]  # b(u, v) = 1
        arf = add[arf][
            mul[kform_eval(K, diag, fp, u)][kform_eval(K, diag, fp, v)]
        ]
        # orthogonalize the remaining basis vectors against (u, v); char 2,
        # so adding a*u + b*v kills both pairings.
        rest = [t for t in idx if t not in (i, j)]
        for t in rest:
            w = basis[t]
            a = kform_polar(K, fp, w, v)
            b = kform_polar(K, fp, w, u)
            w2 = w[:]
            for r in range(n):
                w2[r] = add[w2[r]][add[mul[a][u[r]]][mul[b][v[r]]]]
            basis[t] = w2
        idx = rest
    return K.trace_to_f2(arf)


# -- orthogonal group orders ---------------------------------------------------


def orthogonal_group_order(dim: int, typ: str, q: int, char2: bool) -> int:
    """#O(V, Q)(F_q) for a nonsingular quadratic form of the given type.

    char 2, odd dim 2m+1: the group is Sp(2m, q).
    even dim 2m, type eps: 2 q^(m(m-1)) (q^m - eps) prod (q^(2i) - 1).
    odd char, odd dim 2m+1: 2 q^(m^2) prod (q^(2i) - 1).
    """
    if dim == 0:
        return 1
    if dim % 2 == 1:
        m = dim // 2
        order = q ** (m * m)
        for i in range(1, m + 1):
            order *= q ** (2 * i) - 1
        return order if char2 else 2 * order
    m = dim // 2
    eps = 1 if typ == "even-plus" else -1
    order = 2 * q ** (m * (m - 1)) * (q ** m - eps)
    for i in range(1, m):
        order *= q ** (2 * i) - 1
    return order


def brute_orthogonal_order(K: Kappa, diag, fp) -> int:
    """Count isometries of (diag, fp) by column backtracking (test oracle)."""
    n = len(diag)
    if n == 0:
        return 1
    q = K.q
    vectors = []
    for code in range(q ** n):
        v = []
        t = code
        for _ in range(n):
            v.append(t % q)
            t //= q
        vectors.append((v, kform_eval(K, diag, fp, v)))

    count = 0

    def extend(cols):
        nonlocal count
        i = len(cols)
        if i == n:
            if kmat_det(K, [[cols[j][r] for j in range(n)] for r in range(n)]):
                count += 1
            return
        for v, qv in vectors:
            if qv != diag[i]:
                continue
            ok = True
            for j, c in enumerate(cols):
                if kform_polar(K, fp, c, v) != fp[j][i]:
                    ok = False
                    break
            if ok:
                extend(cols + [v])

    extend([])
    return count
