"""Exact dense linear algebra over Z, Q, F_p and Z/p^M.

Matrices are plain lists of rows of Python ints, so everything is
arbitrary precision.  The central primitives are the Smith normal form
with full transition matrices, a column echelon form used for integer
kernels and exact linear solving, and a row-style lattice accumulator
used for incremental span computations.  Finitely generated modules
(subquotients of Z^n, possibly with a prime-power modulus) are presented
by invariant factors together with an exact coordinate map.
"""

from bisect import bisect_left
from dataclasses import dataclass


class ImageNotContained(Exception):
    """Image columns do not lie in the span of the kernel columns."""


class NotInModule(Exception):
    """Coordinate lookup of a vector outside the module."""


class NotStable(Exception):
    """An endomorphism maps some generator outside the module."""


def xgcd(a, b):
    """Return (x, y, g) with a*x + b*y == g == gcd(a, b) >= 0."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


# ---------------------------------------------------------------------------
# basic dense matrix helpers (row-major lists of ints)


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def identity(n):
    M = zeros(n, n)
    for i in range(n):
        M[i][i] = 1
    return M


def mat_copy(A):
    return [row[:] for row in A]


def mat_mul(A, B):
    m, n = len(A), len(B[0]) if B else 0
    k = len(B)
    C = zeros(m, n)
    for i in range(m):
        Ai = A[i]
        Ci = C[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(n):
                    Ci[j] += a * Bt[j]
    return C

def mat_vec(A, v):
    return [sum(a * x for a, x in zip(row, v) if a) for row in A]


def mat_mod(A, m):
    return [[x % m for x in row] for row in A]


def vec_mod(v, m):
    return [x % m for x in v]


def transpose(A):
    if not A:
        return []
    return [list(col) for col in zip(*A)]


def mat_eq_zero(A):
    return all(all(x == 0 for x in row) for row in A)


def columns(A):
    return [list(col) for col in zip(*A)] if A else []


def from_columns(cols, nrows):
    if not cols:
        return [[] for _ in range(nrows)]
    return [list(row) for row in zip(*cols)]


def det(A):
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = mat_copy(A)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form with transition matrices


def _snf_inplace(D, U, Uinv, V, Vinv):
    m = len(D)
    n = len(D[0]) if D else 0

    def row_swap(i, j):
        D[i], D[j] = D[j], D[i]
        for r in U:
            r[i], r[j] = r[j], r[i]
        Uinv[i], Uinv[j] = Uinv[j], Uinv[i]

    def col_swap(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        V[i], V[j] = V[j], V[i]
        for r in Vinv:
            r[i], r[j] = r[j], r[i]

    def row_combine(i, j, col):
        # gcd-combine rows i and j so D[i][col] = gcd, D[j][col] = 0
        a, b = D[i][col], D[j][col]
        if b == 0:
            return
        if a and b % a == 0:
            q = b // a
            Di, Dj = D[i], D[j]
            for t in range(n):
                Dj[t] -= q * Di[t]
            for r in U:
                r[i] += q * r[j]
            Ui, Uj = Uinv[i], Uinv[j]
            for t in range(m):
                Uj[t] -= q * Ui[t]
            return
        x, y, g = xgcd(a, b)
        ag, bg = a // g, b // g
        Di, Dj = D[i], D[j]
        for t in range(n):
            p, q = Di[t], Dj[t]
            Di[t] = x * p + y * q
            Dj[t] = -bg * p + ag * q
        for r in U:
            p, q = r[i], r[j]
            r[i] = ag * p + bg * q
            r[j] = -y * p + x * q
        Ui, Uj = Uinv[i], Uinv[j]
        for t in range(m):
            p, q = Ui[t], Uj[t]
            Ui[t] = x * p + y * q
            Uj[t] = -bg * p + ag * q

    def col_combine(i, j, row):
        a, b = D[row][i], D[row][j]
        if b == 0:
            return
        if a and b % a == 0:
            q = b // a
            for r in D:
                r[j] -= q * r[i]
            Vi, Vj = V[i], V[j]
            for t in range(n):
                Vi[t] += q * Vj[t]
            for r in Vinv:
                r[j] -= q * r[i]
            return
        x, y, g = xgcd(a, b)
        ag, bg = a // g, b // g
        for r in D:
            p, q = r[i], r[j]
            r[i] = x * p + y * q
            r[j] = -bg * p + ag * q
        Vi, Vj = V[i], V[j]
        for t in range(n):
            p, q = Vi[t], Vj[t]
            Vi[t] = ag * p + bg * q
            Vj[t] = -y * p + x * q
        for r in Vinv:
            p, q = r[i], r[j]
            r[i] = x * p + y * q
            r[j] = -bg * p + ag * q

    r = min(m, n)
    for k in range(r):
        # minimal-absolute-value pivot, fixed for determinism
        piv = None
        best = None
        for i in range(k, m):
            Di = D[i]
            for j in range(k, n):
                x = Di[j]
                if x and (best is None or abs(x) < best):
                    best = abs(x)
                    piv = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        if piv[0] != k:
            row_swap(k, piv[0])
        if piv[1] != k:
            col_swap(k, piv[1])
        while True:
            for i in range(k + 1, m):
                row_combine(k, i, k)
            if all(D[k][j] == 0 for j in range(k + 1, n)):
                pass
            else:
                for j in range(k + 1, n):
                    col_combine(k, j, k)
                continue
            if any(D[i][k] for i in range(k + 1, m)):
                continue
            # force divisibility of the remaining block by the pivot
            d = D[k][k]
            bad = None
            for i in range(k + 1, m):
                Di = D[i]
                for j in range(k + 1, n):
                    if Di[j] % d:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            Dk, Db = D[k], D[bad]
            for t in range(n):
                Dk[t] += Db[t]
            for r2 in U:
                r2[bad] -= r2[k]
            Uk, Ub = Uinv[k], Uinv[bad]
            for t in range(m):
                Uk[t] += Ub[t]
        if D[k][k] < 0:
            for t in range(n):
                D[k][t] = -D[k][t]
            for r2 in U:
                r2[k] = -r2[k]
            for t in range(m):
                Uinv[k][t] = -Uinv[k][t]


def smith_normal_form(A):
    """Return (U, D, V) with A == U*D*V, U and V unimodular and D diagonal
    with nonnegative entries satisfying d1 | d2 | ...
    """
    m = len(A)
    n = len(A[0]) if A else 0
    D = mat_copy(A)
    U, Uinv = identity(m), identity(m)
    V, Vinv = identity(n), identity(n)
    _snf_inplace(D, U, Uinv, V, Vinv)
    return U, D, V


def smith_normal_form_full(A):
    """Like smith_normal_form but also return Uinv and Vinv."""
    m = len(A)
    n = len(A[0]) if A else 0
    D = mat_copy(A)
    U, Uinv = identity(m), identity(m)
    V, Vinv = identity(n), identity(n)
    _snf_inplace(D, U, Uinv, V, Vinv)
    return U, Uinv, D, V, Vinv


def diagonal(D):
    r = min(len(D), len(D[0]) if D else 0)
    return [D[i][i] for i in range(r)]


# ---------------------------------------------------------------------------
# column echelon form, kernels, exact solving


class ColumnEchelon:
    """Unimodular column reduction A*W == H with H in echelon form.

    ``pivots`` lists (row, col) pairs with strictly increasing rows; every
    column of H past the last pivot is zero.
    """

    def __init__(self, A):
        m = len(A)
        n = len(A[0]) if A else 0
        H = mat_copy(A)
        W = identity(n)
        pivots = []
        c = 0
        for i in range(m):
            if c >= n:
                break
            # gcd-collapse row i over columns >= c into column c
            j0 = None
            for j in range(c, n):
                if H[i][j]:
                    j0 = j
                    break
            if j0 is None:
                continue
            if j0 != c:
                for r in H:
                    r[c], r[j0] = r[j0], r[c]
                for r in W:
                    r[c], r[j0] = r[j0], r[c]
            for j in range(c + 1, n):
                a, b = H[i][c], H[i][j]
                if b == 0:
                    continue
                if b % a == 0:
                    q = b // a
                    for r in H:
                        r[j] -= q * r[c]
                    for r in W:
                        r[j] -= q * r[c]
                else:
                    x, y, g = xgcd(a, b)
                    ag, bg = a // g, b // g
                    for r in H:
                        p, q = r[c], r[j]
                        r[c] = x * p + y * q
                        r[j] = -bg * p + ag * q
                    for r in W:
                        p, q = r[c], r[j]
                        r[c] = x * p + y * q
                        r[j] = -bg * p + ag * q
            if H[i][c] < 0:
                for r in H:
                    r[c] = -r[c]
                for r in W:
                    r[c] = -r[c]
            pivots.append((i, c))
            c += 1
        self.H = H
        self.W = W
        self.pivots = pivots
        self.ncols = n
        self.nrows = m

    def kernel_columns(self):
        r = len(self.pivots)
        return [[self.W[i][j] for i in range(self.ncols)]
                for j in range(r, self.ncols)]

    def solve(self, b):
        """Integer x with A x == b, or None if none exists."""
        res = list(b)
        y = [0] * self.ncols
        for i, c in self.pivots:
            v = res[i]
            if v == 0:
                continue
            h = self.H[i][c]
            if v % h:
                return None
            q = v // h
            y[c] = q
            for t in range(i, self.nrows):
                res[t] -= q * self.H[t][c]
        if any(res):
            return None
        return mat_vec(self.W, y)


def kernel_basis(A):
    """Columns spanning the integer kernel of A (a saturated sublattice),
    returned as a matrix with one column per kernel generator."""
    ech = ColumnEchelon(A)
    cols = ech.kernel_columns()
    return from_columns(cols, len(A[0]) if A else 0)


def kernel_mod(A, m):
    """Basis of the lattice {x in Z^n : A x == 0 mod m}, as columns.

    The lattice contains m*Z^n, so the basis always has n columns.
    """
    nrows = len(A)
    ncols = len(A[0]) if A else 0
    aug = [row[:] + [0] * nrows for row in A]
    for i in range(nrows):
        aug[i][ncols + i] = m
    ker = ColumnEchelon(aug).kernel_columns()
    cols = [v[:ncols] for v in ker]
    return from_columns(cols, ncols)


def rank(A):
    return len(ColumnEchelon(A).pivots)


# ---------------------------------------------------------------------------
# incremental lattice (row-style HNF), after the usual pivot bookkeeping


class Lattice:
    """Sublattice of Z^n accumulated one vector at a time."""

    def __init__(self, n):
        self.n = n
        self.rows = []        # echelon rows, sorted by pivot column
        self.pivcol = []      # pivot column of each row

    def copy(self):
        other = Lattice.__new__(Lattice)
        other.n = self.n
        other.rows = [r[:] for r in self.rows]
        other.pivcol = self.pivcol[:]
        return other

    def add(self, vec):
        """Add a vector; return True if the lattice grew."""
        v = list(vec)
        grew = False
        for j in range(self.n):
            if not v[j]:
                continue
            k = bisect_left(self.pivcol, j)
            if k == len(self.pivcol) or self.pivcol[k] != j:
                self.rows.insert(k, v)
                self.pivcol.insert(k, j)
                return True
            row = self.rows[k]
            a, b = row[j], v[j]
            if b % a == 0:
                q = b // a
                for t in range(j, self.n):
                    v[t] -= q * row[t]
            else:
                x, y, g = xgcd(a, b)
                ag, bg = a // g, b // g
                for t in range(j, self.n):
                    p, q = row[t], v[t]
                    row[t] = x * p + y * q
                    v[t] = -bg * p + ag * q
                grew = True
        return grew

    def contains(self, vec):
        v = list(vec)
        for j in range(self.n):
            if not v[j]:
                continue
            k = bisect_left(self.pivcol, j)
            if k == len(self.pivcol) or self.pivcol[k] != j:
                return False
            row = self.rows[k]
            if v[j] % row[j]:
                return False
            q = v[j] // row[j]
            for t in range(j, self.n):
                v[t] -= q * row[t]
        return True

    def canonical(self):
        """Fully reduced HNF rows as a hashable value (equality test)."""
        rows = [r[:] for r in self.rows]
        for k in range(len(rows)):
            j = self.pivcol[k]
            if rows[k][j] < 0:
                rows[k] = [-x for x in rows[k]]
            for i in range(k):
                q = rows[i][j] // rows[k][j]
                if q:
                    for t in range(j, self.n):
                        rows[i][t] -= q * rows[k][t]
        return tuple(tuple(r) for r in rows)

    def rank(self):
        return len(self.rows)

    def basis_columns(self):
        return from_columns([r[:] for r in self.rows], self.n)


# ---------------------------------------------------------------------------
# rings and finitely generated modules


@dataclass(frozen=True)
class RingSpec:
    """Coefficient ring: Z, Q, F_p or Z/p^M."""

    kind: str            # "Z" | "Q" | "Fp" | "ZpM"
    p: int = 0
    M: int = 1

    def __post_init__(self):
        if self.kind not in ("Z", "Q", "Fp", "ZpM"):
            raise ValueError("unknown ring kind %r" % (self.kind,))
        if self.kind in ("Fp", "ZpM"):
            if self.p < 2 or any(self.p % q == 0 for q in range(2, self.p)):
                raise ValueError("p = %r is not prime" % (self.p,))
        if self.kind == "ZpM" and self.M < 1:
            raise ValueError("M must be >= 1")

    @property
    def modulus(self):
        if self.kind == "Fp":
            return self.p
        if self.kind == "ZpM":
            return self.p ** self.M
        return None

    @staticmethod
    def parse(text):
        parts = text.split(":")
        if parts[0] in ("Z", "ZZ"):
            return RingSpec("Z")
        if parts[0] in ("Q", "QQ"):
            return RingSpec("Q")
        if parts[0] in ("F", "Fp", "GF"):
            return RingSpec("Fp", p=int(parts[1]))
        if parts[0] in ("Zp", "ZpM"):
            M = int(parts[2]) if len(parts) > 2 else 2
            return RingSpec("ZpM", p=int(parts[1]), M=M)
        raise ValueError("cannot parse ring %r" % (text,))

    def __str__(self):
        if self.kind == "Fp":
            return "Fp:%d" % self.p
        if self.kind == "ZpM":
            return "Zp:%d:%d" % (self.p, self.M)
        return self.kind


ZZ = RingSpec("Z")
QQ = RingSpec("Q")


class FgModule:
    """Finitely generated subquotient of Z^n (optionally modulo m).

    Presented by generators (columns of ``gen_lift`` in ambient
    coordinates) and invariant factors: torsion orders first in
    increasing divisibility order, then 0 for each free factor.
    """

    def __init__(self, ambient_rank, ring, invariant_factors, gen_lift,
                 kernel_ech, uinv_rows, kept):
        self.ambient_rank = ambient_rank
        self.ring = ring
        self.invariant_factors = tuple(invariant_factors)
        self.gen_lift = gen_lift
        self._kernel_ech = kernel_ech
        self._uinv_rows = uinv_rows   # rows of Uinv indexed like kept
        self._kept = kept

    @property
    def ngens(self):
        return len(self.invariant_factors)

    @property
    def torsion_factors(self):
        return tuple(d for d in self.invariant_factors if d)

    @property
    def rank(self):
        return sum(1 for d in self.invariant_factors if d == 0)

    def is_zero(self):
        return self.ngens == 0

    def order(self):
        """Cardinality of the module, or None if infinite."""
        if self.rank:
            return None
        n = 1
        for d in self.torsion_factors:
            n *= d
        return n

    def reduce_coords(self, coords):
        out = []
        for d, c in zip(self.invariant_factors, coords):
            out.append(c % d if d else c)
        return tuple(out)

    def coords(self, vec):
        """Canonical generator coordinates of an ambient vector.

        Raises NotInModule if the vector is not in the module.
        """
        if self._kernel_ech is None:
            raise NotInModule("module has no ambient presentation")
        y = self._kernel_ech.solve(list(vec))
        if y is None:
            raise NotInModule("vector outside the module")
        raw = [sum(r[t] * y[t] for t in range(len(y)) if y[t]) for r in self._uinv_rows]
        return self.reduce_coords(raw)

    def coords_or_none(self, vec):
        try:
            return self.coords(vec)
        except NotInModule:
            return None

    def generator(self, i):
        return [row[i] for row in self.gen_lift]

    def lift(self, coords):
        """Ambient vector with the given generator coordinates."""
        return mat_vec(self.gen_lift, list(coords))

    def zero_coords(self):
        return (0,) * self.ngens

    def relation_columns(self):
        """Columns spanning the relation lattice in generator coordinates."""
        cols = []
        g = self.ngens
        for i, d in enumerate(self.invariant_factors):
            if d:
                col = [0] * g
                col[i] = d
                cols.append(col)
        return cols

    def relation_lattice(self):
        lat = Lattice(self.ngens)
        for col in self.relation_columns():
            lat.add(col)
        return lat


def subquotient(kernel, image, ring=ZZ):
    """FgModule presenting span(kernel)/span(image) over the given ring.

    ``kernel`` and ``image`` are matrices whose columns live in the same
    ambient Z^n; the image columns must lie in the span of the kernel
    columns.  For a ring with modulus m, the relations m*span(kernel)
    are imposed automatically.
    """
    n = len(kernel)
    s = len(kernel[0]) if kernel and kernel[0] is not None else 0
    ech = ColumnEchelon(kernel) if s else None
    img_cols = columns(image) if image else []
    m = ring.modulus
    ys = []
    for col in img_cols:
        y = ech.solve(col) if ech else ([] if not any(col) else None)
        if y is None:
            raise ImageNotContained("image column outside kernel span")
        ys.append(y)
    if m is not None:
        for i in range(s):
            col = [0] * s
            col[i] = m
            ys.append(col)
    Y = from_columns(ys, s)
    U, Uinv, D, V, Vinv = smith_normal_form_full(Y)
    diag = diagonal(D)
    dfull = diag + [0] * (s - len(diag))
    # SNF diagonal is 1,...,1, torsion increasing, then 0s: keep the non-units
    kept = [i for i in range(s) if dfull[i] != 1]
    factors = [dfull[i] for i in kept]
    gen_cols = []
    for i in kept:
        ucol = [U[r][i] for r in range(s)]
        gen_cols.append(mat_vec(kernel, ucol) if s else [0] * n)
    gen_lift = from_columns(gen_cols, n)
    uinv_rows = [Uinv[i] for i in kept]
    if ring.kind == "Q":
        # over Q only the free part survives
        free_idx = [t for t, d in enumerate(factors) if d == 0]
        factors = [0] * len(free_idx)
        kept = [kept[t] for t in free_idx]
        gen_cols = [gen_cols[t] for t in free_idx]
        gen_lift = from_columns(gen_cols, n)
        uinv_rows = [uinv_rows[t] for t in free_idx]
    return FgModule(n, ring, factors, gen_lift, ech, uinv_rows, kept)


def induced_endomorphism(f, module):
    """Matrix of an ambient linear map on the generators of ``module``.

    ``f`` is a callable on ambient vectors or an ambient square matrix.
    Raises NotStable if some generator image leaves the module.
    """
    if callable(f):
        apply = f
    else:
        apply = lambda v: mat_vec(f, v)
    cols = []
    for i in range(module.ngens):
        w = apply(module.generator(i))
        try:
            cols.append(list(module.coords(w)))
        except NotInModule as e:
            raise NotStable("generator %d image leaves the module" % i) from e
    return from_columns(cols, module.ngens)


def saturate_columns(B):
    """Basis of the saturation of the column span of B in Z^n."""
    n = len(B)
    cols = [c for c in columns(B) if any(c)]
    if not cols:
        return zeros(n, 0)
    left_kernel = kernel_basis(transpose(from_columns(cols, n)))
    s = len(left_kernel[0]) if left_kernel else 0
    if s == 0:
        return identity(n)
    # saturation = integer kernel of the left-kernel pairing
    return kernel_basis(transpose(left_kernel))
