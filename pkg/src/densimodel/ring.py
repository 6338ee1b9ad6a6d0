"""Exact finite-precision arithmetic in A, the ring of integers of a finite
extension of Q_p.

A is realized as a two-step tower: W = Z_p[x]/(unram_poly) unramified of
degree f, then A = W[pi]/(eis_poly) totally ramified of degree e.  An element
is stored as an e x f integer grid ``coeffs[j][i]`` meaning
``sum_{j<e, i<f} coeffs[j][i] * x^i * pi^j``.

Precision is absolute and pi-adic: an element with ``prec = N`` is a known
coset of pi^N A.  Writing N = a*e + b, the canonical representative reduces
the pi^j coefficient mod p^(a+1) for j < b and mod p^a otherwise (pi^N A =
p^a pi^b A since pi^e = p * unit).  ``prec = None`` marks exact integral
data (lattice input, expression values); arithmetic on exact elements never
reduces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    BELOW_PRECISION,
    NonEisenstein,
    NonUnitInverse,
    PrecisionExhausted,
    ReduciblePolynomial,
)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def int_val(n: int, p: int) -> int | None:
    """p-adic valuation of an integer; None for 0."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# W = Z[x]/(unram_poly) helpers; a W-element is a tuple of f ints.


def _w_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _w_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _w_neg(a):
    return tuple(-x for x in a)


def _w_scale(c, a):
    return tuple(c * x for x in a)


def _w_mul(a, b, unram_red):
    """Multiply two W-elements, reducing x^f via unram_red.

    unram_red[k] is the coefficient tuple of x^(f+k) mod unram_poly.
    """
    f = len(a)
    conv = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    conv[i + j] += ai * bj
    out = conv[:f]
    for k in range(f, 2 * f - 1):
        c = conv[k]
        if c:
            red = unram_red[k - f]
            for i in range(f):
                out[i] += c * red[i]
    return tuple(out)


def _w_val(a, p):
    vals = [int_val(x, p) for x in a]
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


class RingSpec:
    """Immutable description of A = W[pi]/(eis_poly), W unramified over Z_p."""

    __slots__ = (
        "p", "f", "e", "unram_poly", "eis_poly", "q", "_unram_red",
        "_eis_red", "_p_over_pi_cache", "_mult_tensor",
    )

    def __init__(self, p, f, e, unram_poly, eis_poly):
        self.p = p
        self.f = f
        self.e = e
        self.unram_poly = tuple(unram_poly)          # f+1 ints, monic
        self.eis_poly = tuple(tuple(c) for c in eis_poly)  # e+1 W-coeffs, monic
        self.q = p ** f
        # x^(f+k) mod unram_poly for k = 0..f-2
        red = []
        cur = tuple(-c for c in self.unram_poly[:f])  # x^f
        red.append(cur)
        for _ in range(1, f - 1 if f > 1 else 0):
            shifted = [0] + list(cur[: f - 1])
            top = cur[f - 1]
            nxt = tuple(
                shifted[i] + top * (-self.unram_poly[i]) for i in range(f)
            )
            red.append(nxt)
            cur = nxt
        self._unram_red = tuple(red)
        # pi^(e+k) = -sum_j eis[j] pi^(j+k), reduced; computed on demand in _mul
        self._eis_red = tuple(_w_neg(c) for c in self.eis_poly[:e])
        self._p_over_pi_cache = {}
        self._mult_tensor = None

    def __repr__(self):
        return f"RingSpec(p={self.p}, f={self.f}, e={self.e})"

    def __eq__(self, other):
        return (
            isinstance(other, RingSpec)
            and (self.p, self.f, self.e, self.unram_poly, self.eis_poly)
            == (other.p, other.f, other.e, other.unram_poly, other.eis_poly)
        )

    def __hash__(self):
        return hash((self.p, self.f, self.e, self.unram_poly, self.eis_poly))

    # -- element constructors ------------------------------------------------

    def zero(self, prec=None):
        grid = tuple(tuple(0 for _ in range(self.f)) for _ in range(self.e))
        return RingElem(self, grid, prec, _reduced=True)

    def one(self, prec=None):
        return self.from_int(1, prec)

    def from_int(self, n, prec=None):
        grid = [[0] * self.f for _ in range(self.e)]
        grid[0][0] = n
        return RingElem(self, grid, prec)

    def pi(self, prec=None):
        grid = [[0] * self.f for _ in range(self.e)]
        if self.e > 1:
            grid[1][0] = 1
            return RingElem(self, grid, prec)
        # e = 1: (pi) = (p) and we take pi = p itself.
        grid[0][0] = self.p
        return RingElem(self, grid, prec)

    def x_gen(self, prec=None):
        """Generator of the unramified subring (the class of x)."""
        grid = [[0] * self.f for _ in range(self.e)]
        grid[0][1 if self.f > 1 else 0] = 1
        return RingElem(self, grid, prec)

    def from_coeffs(self, grid, prec=None):
        return RingElem(self, grid, prec)

    def unit(self, k, prec=None):
        """Deterministic named unit u_k := 1 + k*pi (used by the expression
        language so published specs are reproducible)."""
        return self.one(prec) + self.pi(prec) * self.from_int(k, prec)

    # -- misc ----------------------------------------------------------------

    def column_moduli(self, prec):
        """Modulus of each pi-column for canonical reps mod pi^prec."""
        a, b = divmod(prec, self.e)
        return tuple(
            self.p ** (a + 1) if j < b else self.p ** a for j in range(self.e)
        )

    def p_over_pi(self, prec):
        """The exact element p/pi at precision prec (valuation e-1)."""
        cached = self._p_over_pi_cache.get(prec)
        if cached is not None:
            return cached
        e, f, p = self.e, self.f, self.p
        if e == 1:
            out = self.one(prec)
            self._p_over_pi_cache[prec] = out
            return out
        # p = -w0^{-1} (pi^e + sum_{j>=1} E_j pi^j), w0 = E_0 / p.
        w0 = tuple(c // p for c in self.eis_poly[0])
        grid = [[0] * f for _ in range(e)]
        grid[e - 1] = list((1,) + (0,) * (f - 1))
        for j in range(1, e):
            grid[j - 1] = list(self.eis_poly[j])
        raw = RingElem(self, grid, prec)
        w0_grid = [[0] * f for _ in range(e)]
        w0_grid[0] = list(w0)
        w0_elem = RingElem(self, w0_grid, prec)
        out = -(raw * w0_elem.unit_inverse())
        self._p_over_pi_cache[prec] = out
        return out

    def mult_tensor(self):
        """Structure constants of the monomial basis x^i pi^j (exact ints).

        Returns a dict ((i1,j1),(i2,j2)) -> coeff grid of the product.
        Used by vectorized consumers (the naive oracle).
        """
        if self._mult_tensor is None:
            tensor = {}
            for i1 in range(self.f):
                for j1 in range(self.e):
                    g1 = [[0] * self.f for _ in range(self.e)]
                    g1[j1][i1] = 1
                    a = RingElem(self, g1, None)
                    for i2 in range(self.f):
                        for j2 in range(self.e):
                            g2 = [[0] * self.f for _ in range(self.e)]
                            g2[j2][i2] = 1
                            b = RingElem(self, g2, None)
                            tensor[(i1, j1), (i2, j2)] = (a * b).coeffs
            self._mult_tensor = tensor
        return self._mult_tensor

    def serialize(self):
        return {
            "p": self.p,
            "f": self.f,
            "e": self.e,
            "unram_poly": list(self.unram_poly),
            "eis_poly": [list(c) for c in self.eis_poly],
        }


def _poly_is_irreducible_mod_p(poly, p):
    """Brute-force irreducibility of a monic polynomial over F_p."""
    f = len(poly) - 1
    if f == 1:
        return True
    coeffs = [c % p for c in poly]

    def poly_mod(num, den):
        num = list(num)
        dd = len(den) - 1
        inv_lead = pow(den[-1], p - 2, p)
        for k in range(len(num) - 1, dd - 1, -1):
            c = num[k] * inv_lead % p
            if c:
                for i in range(dd + 1):
                    num[k - dd + i] = (num[k - dd + i] - c * den[i]) % p
        return num[:dd]

    # trial division by every monic polynomial of degree 1..f//2
    for d in range(1, f // 2 + 1):
        for idx in range(p ** d):
            den = []
            t = idx
            for _ in range(d):
                den.append(t % p)
                t //= p
            den.append(1)
            rem = poly_mod(coeffs, den)
            if all(c % p == 0 for c in rem):
                return False
    return True


def make_ring(p, f, e, eis_coeffs, unram_coeffs=None):
    """Validate and build a RingSpec.

    eis_coeffs: e+1 coefficients of the Eisenstein polynomial over W, each an
    int or a length-f list (constant term first).  unram_coeffs defaults to x
    for f = 1 and must be supplied monic of degree f, irreducible mod p,
    otherwise.
    """
    if not _is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if f < 1 or e < 1:
        raise ValueError("f and e must be >= 1")
    if unram_coeffs is None:
        if f == 1:
            unram_coeffs = [0, 1]
        elif p == 2 and f == 2:
            unram_coeffs = [1, 1, 1]  # x^2 + x + 1
        else:
            raise ValueError("unram_coeffs required for f > 1")
    unram = tuple(int(c) for c in unram_coeffs)
    if len(unram) != f + 1 or unram[-1] != 1:
        raise ValueError("unram_poly must be monic of degree f")
    if not _poly_is_irreducible_mod_p(unram, p):
        raise ReduciblePolynomial(f"{list(unram)} is reducible mod {p}")

    def as_w(c):
        if isinstance(c, (list, tuple)):
            w = tuple(int(x) for x in c)
            if len(w) != f:
                raise ValueError("W-coefficient has wrong length")
            return w
        return (int(c),) + (0,) * (f - 1)

    eis = tuple(as_w(c) for c in eis_coeffs)
    if len(eis) != e + 1:
        raise ValueError("eis_poly must have degree e")
    if eis[-1] != (1,) + (0,) * (f - 1):
        raise NonEisenstein("eis_poly must be monic")
    if e > 1:
        for c in eis[:e]:
            v = _w_val(c, p)
            if v is not None and v < 1:
                raise NonEisenstein("lower coefficient is a unit")
        v0 = _w_val(eis[0], p)
        if v0 != 1:
            raise NonEisenstein("constant term must have valuation exactly 1")
    else:
        # e = 1: any monic x - c with v_p(c) = 1 presents A = W; normalize.
        v0 = _w_val(eis[0], p)
        if v0 != 1:
            raise NonEisenstein("constant term must have valuation exactly 1")
    return RingSpec(p, f, e, unram, eis)


class RingElem:
    """Element of A at absolute pi-adic precision ``prec`` (None = exact)."""

    __slots__ = ("spec", "coeffs", "prec")

    def __init__(self, spec, coeffs, prec=None, _reduced=False):
        self.spec = spec
        self.prec = prec
        if _reduced:
            self.coeffs = coeffs
        else:
            grid = [list(row) for row in coeffs]
            if prec is not None:
                moduli = spec.column_moduli(prec)
                for j in range(spec.e):
                    m = moduli[j]
                    row = grid[j]
                    for i in range(spec.f):
                        row[i] = row[i] % m if m > 1 else 0
            self.coeffs = tuple(tuple(row) for row in grid)

    # -- basic protocol -------------------------------------------------------

    def __repr__(self):
        return f"RingElem({self.coeffs}, prec={self.prec})"

    def __eq__(self, other):
        if not isinstance(other, RingElem):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.prec == other.prec
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.prec, self.coeffs))

    # -- precision ------------------------------------------------------------

    def at_prec(self, prec):
        """Reduce (or reinterpret exact data) to absolute precision prec."""
        if self.prec is not None and prec > self.prec:
            raise PrecisionExhausted(
                f"cannot raise precision {self.prec} -> {prec}"
            )
        return RingElem(self.spec, self.coeffs, prec)

    def _join_prec(self, other):
        if self.prec is None:
            return other.prec
        if other.prec is None:
            return self.prec
        return min(self.prec, other.prec)

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        grid = [
            [a + b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.coeffs, other.coeffs)
        ]
        return RingElem(self.spec, grid, self._join_prec(other))

    def __sub__(self, other):
        grid = [
            [a - b for a, b in zip(r1, r2)]
            for r1, r2 in zip(self.coeffs, other.coeffs)
        ]
        return RingElem(self.spec, grid, self._join_prec(other))

    def __neg__(self):
        grid = [[-a for a in row] for row in self.coeffs]
        return RingElem(self.spec, grid, self.prec)

    def __mul__(self, other):
        spec = self.spec
        e = spec.e
        # convolution of pi-polynomials with W-coefficients
        conv = [(0,) * spec.f for _ in range(2 * e - 1)]
        for j1, w1 in enumerate(self.coeffs):
            if any(w1):
                for j2, w2 in enumerate(other.coeffs):
                    if any(w2):
                        conv[j1 + j2] = _w_add(
                            conv[j1 + j2], _w_mul(w1, w2, spec._unram_red)
                        )
        # reduce degrees >= e using pi^e = -sum eis[j] pi^j
        for d in range(2 * e - 2, e - 1, -1):
            top = conv[d]
            if any(top):
                for j in range(e):
                    conv[d - e + j] = _w_add(
                        conv[d - e + j],
                        _w_mul(top, spec._eis_red[j], spec._unram_red),
                    )
        grid = [list(w) for w in conv[:e]]
        return RingElem(spec, grid, self._join_prec(other))

    def scale_int(self, n):
        grid = [[n * a for a in row] for row in self.coeffs]
        return RingElem(self.spec, grid, self.prec)

    # -- valuation and structure ----------------------------------------------

    def valuation(self):
        """pi-adic valuation, or BELOW_PRECISION if zero at this precision.

        Exact zero (prec=None) also reports BELOW_PRECISION: callers that
        need "true zero" check is_exact_zero().
        """
        spec = self.spec
        best = None
        for j, row in enumerate(self.coeffs):
            vp = _w_val(row, spec.p)
            if vp is None:
                continue
            v = j + spec.e * vp
            if best is None or v < best:
                best = v
        if best is None:
            return BELOW_PRECISION
        if self.prec is not None and best >= self.prec:
            return BELOW_PRECISION
        return best

    def is_zero(self):
        return self.valuation() is BELOW_PRECISION

    def is_exact_zero(self):
        return self.prec is None and all(
            c == 0 for row in self.coeffs for c in row
        )

    def is_unit(self):
        return self.valuation() == 0

    # -- division -------------------------------------------------------------

    def divide_by_pi(self):
        """Exact division by pi; valuation must be >= 1.

        Result precision drops by exactly one pi-digit.
        """
        spec = self.spec
        v = self.valuation()
        if v is BELOW_PRECISION:
            if self.prec is None:
                return self  # exact zero
            return RingElem(spec, self.coeffs, self.prec - 1)
        if v < 1:
            raise NonUnitInverse("divide_by_pi on a unit")
        p = spec.p
        new_prec = None if self.prec is None else self.prec - 1
        if spec.e == 1:
            grid = [[c // p for c in self.coeffs[0]]]
            return RingElem(spec, grid, new_prec)
        w0 = self.coeffs[0]
        shifted = [list(self.coeffs[j]) for j in range(1, spec.e)] + [
            [0] * spec.f
        ]
        out = RingElem(spec, shifted, new_prec)
        if any(w0):
            w0p_grid = [[0] * spec.f for _ in range(spec.e)]
            w0p_grid[0] = [c // p for c in w0]
            w0p = RingElem(spec, w0p_grid, new_prec)
            pp = spec.p_over_pi(new_prec if new_prec is not None else 64)
            if new_prec is None:
                # exact path exists only when the eis data keeps it exact;
                # evaluate at a generous cap is not allowed here, so require
                # finite precision for nontrivial ramified division.
                raise PrecisionExhausted(
                    "divide_by_pi on exact ramified data needs a precision"
                )
            out = out + w0p * pp.at_prec(new_prec)
        return out

    def divide_by_pi_power(self, k):
        x = self
        for _ in range(k):
            x = x.divide_by_pi()
        return x

    def unit_inverse(self, prec=None):
        """Inverse of a unit via Newton iteration at the stated precision."""
        if prec is None:
            prec = self.prec
        if prec is None:
            raise PrecisionExhausted("unit_inverse of exact data needs prec")
        x = self.at_prec(prec) if self.prec is None or self.prec > prec else self
        if x.valuation() != 0:
            raise NonUnitInverse("not a unit at this precision")
        spec = self.spec
        # start from the residue-field inverse
        y = residue(x).inv().lift(prec)
        two = spec.from_int(2, prec)
        # each step doubles the number of correct pi-digits
        steps = 1
        correct = 1
        while correct < prec:
            y = y * (two - x * y)
            correct *= 2
            steps += 1
            if steps > 64:
                raise PrecisionExhausted("Newton inversion did not converge")
        check = (x * y - spec.one(prec)).valuation()
        if check is not BELOW_PRECISION:
            raise PrecisionExhausted("inverse verification failed")
        return y

    def reduced_mod_pi_power(self, k):
        """Canonical representative of self + pi^k A (independent of prec)."""
        if self.prec is not None and k > self.prec:
            raise PrecisionExhausted(
                f"reduction mod pi^{k} exceeds precision {self.prec}"
            )
        return RingElem(self.spec, self.coeffs, k).coeffs


def residue(x: RingElem) -> "FqElem":
    """Ring homomorphism A -> kappa = F_q (reduction mod pi)."""
    spec = x.spec
    return FqElem(spec, tuple(c % spec.p for c in x.coeffs[0]))


@dataclass(frozen=True)
class FqElem:
    """Element of the residue field kappa = F_q in the unram_poly basis."""

    spec: RingSpec
    value: tuple

    def lift(self, prec=None) -> RingElem:
        grid = [[0] * self.spec.f for _ in range(self.spec.e)]
        grid[0] = list(self.value)
        return RingElem(self.spec, grid, prec)

    def is_zero(self):
        return all(c == 0 for c in self.value)

    def __add__(self, other):
        p = self.spec.p
        return FqElem(
            self.spec, tuple((a + b) % p for a, b in zip(self.value, other.value))
        )

    def __sub__(self, other):
        p = self.spec.p
        return FqElem(
            self.spec, tuple((a - b) % p for a, b in zip(self.value, other.value))
        )

    def __neg__(self):
        p = self.spec.p
        return FqElem(self.spec, tuple((-a) % p for a in self.value))

    def __mul__(self, other):
        spec = self.spec
        w = _w_mul(self.value, other.value, spec._unram_red)
        return FqElem(spec, tuple(c % spec.p for c in w))

    def __pow__(self, n):
        spec = self.spec
        out = FqElem(spec, (1,) + (0,) * (spec.f - 1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inv(self):
        if self.is_zero():
            raise NonUnitInverse("0 has no inverse in kappa")
        return self ** (self.spec.q - 2)

    def frobenius(self):
        return self ** self.spec.p

    @property
    def index(self) -> int:
        """Integer encoding sum digits[i] * p^i (used by kappa tables)."""
        out = 0
        for c in reversed(self.value):
            out = out * self.spec.p + c
        return out

    @staticmethod
    def from_index(spec, idx):
        digits = []
        for _ in range(spec.f):
            digits.append(idx % spec.p)
            idx //= spec.p
        return FqElem(spec, tuple(digits))


def frobenius_solve(c: FqElem) -> FqElem:
    """The unique b with b^p = c (kappa is perfect)."""
    # Frobenius has order f, so its inverse is x -> x^(p^(f-1)).
    return c ** (c.spec.p ** (c.spec.f - 1))
