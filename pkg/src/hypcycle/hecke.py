"""Double-coset operators on H1 via the transfer / conjugation-push /
corestriction factorization, and the specializations T_p, U_p, the
diamond operators, and the level-raising triple (pi, phi, V).

An operator from H1(Gamma) to H1(Gamma') attached to alpha with
det(alpha) > 0 is computed column by column: each basis cycle is
restricted to Gamma_1 = Gamma n alpha^-1 Gamma' alpha by the averaging
map on coefficients, rewritten in subgroup form, conjugated term by
term through alpha into Gamma_2 = alpha Gamma_1 alpha^-1, re-expanded,
and corestricted to Gamma'.
"""

from dataclasses import dataclass

from .cosets import SubgroupSpec, subgroup_cosets, subgroup_transversal
from .homology import (
    Chain1,
    H1Presentation,
    compute_h1,
    fox_expand_unit,
    to_group_chain,
)
from .intlinalg import from_columns, identity, xgcd
from .psl2 import I, Mat2, PMat, decompose_word
from .symspace import act, corestriction_map, restriction_map


class WrongDivisibility(Exception):
    """T_p needs p coprime to the level; U_p needs p dividing it."""


class ConjugateLeavesGroup(Exception):
    """A conjugated chain term is non-integral or fails membership."""


class NotACycleOnTransfer(Exception):
    """Transfer was asked for a chain with nonzero boundary."""


def conjugate_by(alpha, g):
    """alpha * g * alpha^-1 in PSL2(Z), or None if non-integral."""
    det = alpha.det()
    m = alpha * g.lift() * alpha.adjugate()
    a, b, c, d = m.a, m.b, m.c, m.d
    if a % det or b % det or c % det or d % det:
        return None
    return PMat(a // det, b // det, c // det, d // det)


def conj_star(c, alpha, target_table):
    """Push a cycle through conjugation by alpha, landing over the
    table of alpha Gamma_1 alpha^-1."""
    k, modulus = c.k, c.modulus
    terms = to_group_chain(c)
    out = Chain1.zero(target_table, k, modulus)
    for gamma, v in terms:
        cg = conjugate_by(alpha, gamma)
        if cg is None or target_table.coset_of(cg)[0] != 0:
            raise ConjugateLeavesGroup(
                "conjugate of %r leaves the target group" % (gamma,))
        av = act(alpha, v, modulus)
        out = fox_expand_unit(target_table, decompose_word(cg), av, k,
                              modulus, out=out)
    return out.reduce() if modulus else out


def transfer_res(c, sub_table, reps=None, check=True):
    """Restriction (transfer) of a cycle to a finite-index subgroup,
    implemented by the equivariant averaging map on coefficients."""
    if check:
        from .homology import boundary1

        if not boundary1(c).is_zero():
            raise NotACycleOnTransfer("transfer requires a cycle")
    rmap = restriction_map(c.table, sub_table, c.k, c.modulus, reps)
    return Chain1(rmap.apply(c.mS), rmap.apply(c.mU))


@dataclass
class OperatorMatrix:
    """Matrix of an operator between two H1 presentations, columns
    indexed by source generators in canonical coordinates."""

    matrix: list
    source: H1Presentation
    target: H1Presentation

    def apply_coords(self, coords):
        g = self.target.ngens
        out = [0] * g
        for j, c in enumerate(coords):
            if c:
                for i in range(g):
                    out[i] += self.matrix[i][j] * c
        return self.target.reduce_coords(out)

    def compose(self, other):
        """self o other (apply ``other`` first)."""
        cols = []
        for j in range(other.source.ngens):
            col = [other.matrix[i][j] for i in range(other.target.ngens)]
            cols.append(list(self.apply_coords(col)))
        return OperatorMatrix(from_columns(cols, self.target.ngens),
                              other.source, self.target)

    def equals(self, other):
        if self.source is not other.source or self.target is not other.target:
            return False
        for j in range(self.source.ngens):
            a = [self.matrix[i][j] for i in range(self.target.ngens)]
            b = [other.matrix[i][j] for i in range(self.target.ngens)]
            if self.target.reduce_coords(a) != self.target.reduce_coords(b):
                return False
        return True

    def is_zero(self):
        for j in range(self.source.ngens):
            col = [self.matrix[i][j] for i in range(self.target.ngens)]
            if any(self.target.reduce_coords(col)):
                return False
        return True

    def scaled(self, c):
        return OperatorMatrix([[c * x for x in row] for row in self.matrix],
                              self.source, self.target)

    def plus(self, other):
        return OperatorMatrix(
            [[x + y for x, y in zip(r1, r2)]
             for r1, r2 in zip(self.matrix, other.matrix)],
            self.source, self.target)

    def power(self, e):
        assert self.source is self.target
        out = identity_operator(self.source)
        base = self
        while e:
            if e & 1:
                out = base.compose(out)
            base = base.compose(base)
            e >>= 1
        return out

    def charpoly(self):
        """Characteristic polynomial on the free part, as a sympy Poly."""
        import sympy

        x = sympy.Symbol("x")
        free = [i for i, d in enumerate(self.source.invariant_factors) if d == 0]
        A = sympy.Matrix([[self.matrix[i][j] for j in free] for i in free])
        return A.charpoly(x)

    def charpoly_str(self):
        import sympy

        poly = self.charpoly()
        return str(sympy.factor(poly.as_expr())).replace("**", "^").replace(" ", "")


def identity_operator(h1):
    return OperatorMatrix(identity(h1.ngens), h1, h1)


class DoubleCoset:
    """Prepared double-coset operator [Gamma' alpha Gamma]."""

    def __init__(self, source, target, alpha, max_index=200000):
        if alpha.det() <= 0:
            raise ValueError("alpha must have positive determinant")
        if source.k != target.k or source.ring != target.ring:
            raise ValueError("source and target must share degree and ring")
        self.source = source
        self.target = target
        self.alpha = alpha
        k = source.k
        modulus = source.ring.modulus
        det = alpha.det()
        adj = alpha.adjugate()
        src_contains = source.table.contains
        tgt_contains = target.table.contains

        def pred1(g):
            if not src_contains(g):
                return False
            cg = conjugate_by(alpha, g)
            return cg is not None and tgt_contains(cg)

        def pred2(g):
            if not tgt_contains(g):
                return False
            m = adj * g.lift() * alpha
            if m.a % det or m.b % det or m.c % det or m.d % det:
                return False
            return src_contains(PMat(m.a // det, m.b // det,
                                     m.c // det, m.d // det))

        self.table1 = subgroup_cosets(pred1, max_index)
        self.reps = subgroup_transversal(self.table1, source.table)
        self.res_map = restriction_map(source.table, self.table1, k, modulus,
                                       self.reps)
        self.table2 = subgroup_cosets(pred2, max_index)
        self.cor_map = corestriction_map(self.table2, target.table, k, modulus)
        self._matrix = None

    @property
    def coset_count(self):
        """Number of single cosets in the double coset."""
        return len(self.reps)

    def apply_chain(self, c):
        rc = Chain1(self.res_map.apply(c.mS), self.res_map.apply(c.mU))
        pushed = conj_star(rc, self.alpha, self.table2)
        return Chain1(self.cor_map.apply(pushed.mS),
                      self.cor_map.apply(pushed.mU))

    def operator(self):
        if self._matrix is None:
            cols = []
            for i in range(self.source.ngens):
                image = self.apply_chain(self.source.generator_chain(i))
                cols.append(list(self.target.coords(image)))
            self._matrix = from_columns(cols, self.target.ngens)
        return OperatorMatrix(self._matrix, self.source, self.target)


def double_coset(target_spec, alpha, source_spec, k, ring, precomputed=None):
    """Operator matrix of [Gamma' alpha Gamma] on freshly computed
    presentations (see DoubleCoset for the prepared form)."""
    src = compute_h1(source_spec, k, ring)
    tgt = src if target_spec == source_spec else compute_h1(target_spec, k, ring)
    return DoubleCoset(src, tgt, alpha).operator()


def hecke_matrix_diag_p(h1, p, max_index=200000):
    """[Gamma diag(1,p) Gamma] as an endomorphism of H1."""
    return DoubleCoset(h1, h1, Mat2(1, 0, 0, p), max_index=max_index)


def hecke_T(p, h1, max_index=200000):
    spec = h1.spec
    if spec is None or spec.N % p == 0:
        raise WrongDivisibility("T_p requires p coprime to the level")
    return hecke_matrix_diag_p(h1, p, max_index).operator()


def hecke_U(p, h1, max_index=200000):
    spec = h1.spec
    if spec is None or spec.N % p:
        raise WrongDivisibility("U_p requires p dividing the level")
    return hecke_matrix_diag_p(h1, p, max_index).operator()


def hecke_operator(p, h1, max_index=200000):
    """T_p or U_p according to the divisibility of the level by p; this
    single double coset drives the ordinary projector."""
    return hecke_matrix_diag_p(h1, p, max_index).operator()


def beta_matrix(N, p):
    """beta = [[m, n], [N, p]] in Gamma_0(N) with minimal nonnegative m
    solving m*p - n*N = 1."""
    if N == 1:
        return Mat2(0, -1, 1, p)
    x, _, g = xgcd(p, N)
    if g != 1:
        raise WrongDivisibility("p must be coprime to N")
    m = x % N
    n = (m * p - 1) // N
    return Mat2(m, n, N, p)


def diamond_matrix(N, d):
    """An element of Gamma_0(N) with lower row (N, d mod N)."""
    d = d % N
    x, _, g = xgcd(d, N)
    if g != 1:
        raise WrongDivisibility("diamond operator needs gcd(d, N) = 1")
    a = x % N
    b = (a * d - 1) // N
    return Mat2(a, b, N, d)


def diamond(d, h1, beta=None):
    """The diamond operator <d>: conjugation-push by any beta in
    Gamma_0(N) with lower-right entry d mod N."""
    spec = h1.spec
    if spec is None:
        raise ValueError("diamond operator needs a subgroup spec")
    N = spec.N
    if N == 1 or d % N == 1 % N:
        return identity_operator(h1)
    if beta is None:
        beta = diamond_matrix(N, d)
    return DoubleCoset(h1, h1, beta).operator()


@dataclass
class PPhiV:
    """The canonical map pi, the transfer phi, and the shift V between
    the level-N and level-Np presentations, with U_p downstairs."""

    h1: H1Presentation
    h1p: H1Presentation
    pi: OperatorMatrix
    phi: OperatorMatrix
    V: OperatorMatrix
    Up: OperatorMatrix


def gamma0p_intersection(spec, p):
    """SubgroupSpec of Gamma n Gamma_0(p) for p coprime to the level."""
    if spec.N % p == 0:
        raise WrongDivisibility("p divides the level; intersection is trivial")
    Np = spec.N * p
    gens = tuple(x for x in range(1, Np)
                 if xgcd(x, Np)[2] == 1 and (x % spec.N) in spec.h_set)
    return SubgroupSpec(Np, gens,
                        label="%s&gamma0:%d" % (spec.name, p))


def pi_phi_V(h1, p, max_index=200000):
    """The operators of the level-raising square at p (p coprime to
    the level): pi is corestriction, phi the double coset of diag(1,p)
    into the intersection with Gamma_0(p), V the shifted double coset
    of beta*diag(p,1), and U_p acts downstairs."""
    spec = h1.spec
    if spec is None or spec.N % p == 0:
        raise WrongDivisibility("pi/phi/V need p coprime to the level")
    specp = gamma0p_intersection(spec, p)
    h1p = compute_h1(specp, h1.k, h1.ring)
    pi = DoubleCoset(h1p, h1, I.lift(), max_index=max_index).operator()
    phi = DoubleCoset(h1, h1p, Mat2(1, 0, 0, p), max_index=max_index).operator()
    beta = beta_matrix(spec.N, p)
    V = DoubleCoset(h1p, h1p, beta * Mat2(p, 0, 0, 1),
                    max_index=max_index).operator()
    Up = hecke_U(p, h1p, max_index=max_index)
    return PPhiV(h1, h1p, pi, phi, V, Up)
