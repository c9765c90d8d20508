"""First group homology of finite-index subgroups of PSL2(Z) with
degree-2k coefficients, through the two-step chain complex of the
presentation <S, U | S^2, U^3> with induced coefficients.

A degree-1 chain is a pair (mS, mU) of induced vectors representing
(S-1) tensor mS + (U-1) tensor mU.  The boundary maps are

    d1(mS, mU) = (S-1) mS + (U-1) mU
    d2(n1, n2) = ((1+S) n1, (1+U+U^2) n2)

and H1 = ker d1 / im d2, which computes the homology of the subgroup
by Shapiro's identification.
"""

from .cosets import build_cosets
from .intlinalg import (
    FgModule,
    RingSpec,
    ZZ,
    from_columns,
    identity,
    kernel_basis,
    kernel_mod,
    subquotient,
    zeros,
)
from .psl2 import PMat, decompose_word
from .symspace import (
    IndVec,
    act,
    act_matrix,
    ind_act,
    ind_act_letter,
    monomial,
    poly_add,
    poly_mod,
    zero_poly,
)


class NotACycle(Exception):
    """Chain with nonzero boundary where a cycle is required."""


class Chain1:
    """Degree-1 chain over the presentation: slots for S and U."""

    __slots__ = ("mS", "mU")

    def __init__(self, mS, mU):
        self.mS = mS
        self.mU = mU

    @staticmethod
    def zero(table, k, modulus=None):
        return Chain1(IndVec.zero(table, k, modulus), IndVec.zero(table, k, modulus))

    @property
    def table(self):
        return self.mS.table

    @property
    def k(self):
        return self.mS.k

    @property
    def modulus(self):
        return self.mS.modulus

    def __add__(self, other):
        return Chain1(self.mS + other.mS, self.mU + other.mU)

    def __sub__(self, other):
        return Chain1(self.mS - other.mS, self.mU - other.mU)

    def __neg__(self):
        return Chain1(-self.mS, -self.mU)

    def scale(self, c):
        return Chain1(self.mS.scale(c), self.mU.scale(c))

    def reduce(self):
        return Chain1(self.mS.reduce(), self.mU.reduce())

    def is_zero(self):
        return self.mS.is_zero() and self.mU.is_zero()

    def __eq__(self, other):
        return self.mS == other.mS and self.mU == other.mU

    def flatten(self):
        return self.mS.flatten() + self.mU.flatten()

    @staticmethod
    def unflatten(table, k, vec, modulus=None):
        half = table.index * (2 * k + 1)
        return Chain1(IndVec.unflatten(table, k, vec[:half], modulus),
                      IndVec.unflatten(table, k, vec[half:], modulus))


def boundary1(c):
    """(S-1) mS + (U-1) mU."""
    out = ind_act_letter(("S", 1), c.mS) - c.mS
    out = out + ind_act_letter(("U", 1), c.mU) - c.mU
    return out.reduce() if c.modulus else out


def boundary2(pair):
    """Relation boundaries ((1+S) n1, (1+U+U^2) n2)."""
    n1, n2 = pair
    mS = n1 + ind_act_letter(("S", 1), n1)
    mU = n2 + ind_act_letter(("U", 1), n2) + ind_act_letter(("U", 2), n2)
    c = Chain1(mS, mU)
    return c.reduce() if n1.modulus else c


def fox_expand(word, v):
    """Chain representing (eval(word) - 1) tensor v.

    Built by the product rule (gh - 1) x v = (g - 1) x hv + (h - 1) x v,
    with U^2 expanding into the U slot as (U-1) x Uv + (U-1) x v.
    """
    table, k, m = v.table, v.k, v.modulus
    out = Chain1.zero(table, k, m)
    cur = v
    for letter in reversed(tuple(word)):
        gen, e = letter
        if gen == "S":
            out = Chain1(out.mS + cur, out.mU)
        elif e == 1:
            out = Chain1(out.mS, out.mU + cur)
        else:
            out = Chain1(out.mS, out.mU + cur + ind_act_letter(("U", 1), cur))
        cur = ind_act_letter(letter, cur)
    return out.reduce() if m else out


def _fox_unit_map(table, word, k, modulus):
    """Entries (slot, block, matrix) so that the chain of (eval(word)-1)
    tensor (poly at block 0) is the sum of matrix * poly placed at the
    given slot and block.  Cached on the table."""
    key = (tuple(word), k, modulus)
    cached = table.fox_cache.get(key)
    if cached is not None:
        return cached
    entries = []
    block = 0
    mat = None  # None means identity so far
    d = 2 * k + 1

    def emit(slot, blk, M):
        entries.append((slot, blk, M))

    def compose(M, N):
        if N is None:
            return M
        out = [[0] * d for _ in range(d)]
        for i in range(d):
            Mi = M[i]
            for t in range(d):
                a = Mi[t]
                if a:
                    Nt = N[t]
                    row = out[i]
                    for j in range(d):
                        row[j] += a * Nt[j]
        if modulus is not None:
            out = [[x % modulus for x in row] for row in out]
        return out

    for letter in reversed(tuple(word)):
        gen, e = letter
        if gen == "S":
            emit("S", block, mat)
        elif e == 1:
            emit("U", block, mat)
        else:
            # U^2 expands as (U-1) x Uv + (U-1) x v; the Uv part lands
            # where ind_act(U) sends the current block (two U-steps)
            emit("U", block, mat)
            jj, tw = block, None
            for _ in range(2):
                j2, tw2 = table.step(jj, "U")
                tw = tw2 if tw is None else tw * tw2
                jj = j2
            emit("U", jj, compose(act_matrix(tw.inv(), k, modulus), mat))
        # cur <- ind_act(letter, cur): one block moves
        steps = 1 if gen == "S" else (3 - e)
        jj, tw = block, None
        for _ in range(steps):
            j2, tw2 = table.step(jj, gen)
            tw = tw2 if tw is None else tw * tw2
            jj = j2
        block = jj
        mat = compose(act_matrix(tw.inv(), k, modulus), mat)
    table.fox_cache[key] = entries
    return entries


def fox_expand_unit(table, word, poly, k, modulus=None, out=None):
    """fox_expand of (poly at block 0), via the cached per-word map.

    If ``out`` is given, add into it in place and return it.
    """
    entries = _fox_unit_map(table, word, k, modulus)
    if out is None:
        out = Chain1.zero(table, k, modulus)
    d = 2 * k + 1
    sblocks = list(out.mS.blocks)
    ublocks = list(out.mU.blocks)
    for slot, blk, M in entries:
        if M is None:
            val = poly
        else:
            acc = [0] * d
            for j, cc in enumerate(poly):
                if cc:
                    for i in range(d):
                        acc[i] += M[i][j] * cc
            val = tuple(x % modulus for x in acc) if modulus else tuple(acc)
        if slot == "S":
            sblocks[blk] = poly_add(sblocks[blk], val)
        else:
            ublocks[blk] = poly_add(ublocks[blk], val)
    out.mS.blocks = sblocks
    out.mU.blocks = ublocks
    return out


def cycle_of(gamma, poly, table, k, modulus=None, check=True):
    """The chain of (gamma - 1) tensor (poly at the identity block).

    Requires gamma in the subgroup of the table and poly invariant
    under gamma (e.g. a power of its quadratic form); raises NotACycle
    otherwise.
    """
    if check:
        if table.coset_of(gamma)[0] != 0:
            raise NotACycle("element is not in the subgroup of the table")
        moved = act(gamma.lift(), poly, modulus)
        base = poly_mod(poly, modulus) if modulus else tuple(poly)
        if tuple(moved) != base:
            raise NotACycle("coefficient is not invariant under the element")
    word = decompose_word(gamma)
    return fox_expand_unit(table, word, tuple(poly), k, modulus)


def group_chain_to_chain1(terms, table, k, modulus=None):
    """Sum of the chains of (gamma - 1) tensor v over a subgroup-form
    list of terms; the inverse direction of to_group_chain."""
    out = Chain1.zero(table, k, modulus)
    for gamma, poly in terms:
        out = fox_expand_unit(table, decompose_word(gamma), tuple(poly), k,
                              modulus, out=out)
    return out.reduce() if modulus else out


def to_group_chain(c, check=True):
    """Rewrite a cycle as a list of (gamma, poly) with gamma in the
    subgroup of the table: the subgroup form of the homology class.

    Each nonzero block of each slot contributes its Schreier twist; the
    per-vertex residues must vanish, which is exactly the cycle
    condition.  Raises NotACycle otherwise.
    """
    table, k, m = c.table, c.k, c.modulus
    residue = [zero_poly(k)] * table.index
    terms = []
    for gen, vec in (("S", c.mS), ("U", c.mU)):
        steps = 1 if gen == "S" else 2  # t_i * x^-1 for the slot letter x
        for i, b in enumerate(vec.blocks):
            if not any(b):
                continue
            jj, tw = i, None
            for _ in range(steps):
                j2, tw2 = table.step(jj, gen)
                tw = tw2 if tw is None else tw * tw2
                jj = j2
            gamma = tw.inv()
            if not gamma.is_identity():
                terms.append((gamma, tuple(b)))
            moved = act(gamma.lift(), b, m)
            residue[jj] = poly_add(residue[jj], moved)
            residue[i] = poly_add(residue[i], tuple(-x for x in b))
    if check:
        for r in residue:
            bad = any(x % m for x in r) if m else any(r)
            if bad:
                raise NotACycle("nonzero residue: chain is not a cycle")
    return terms


class H1Presentation:
    """H1 of a subgroup with degree-2k coefficients over a ring,
    as an FgModule with a coordinate map on chains."""

    def __init__(self, table, k, ring, module, spec=None):
        self.table = table
        self.k = k
        self.ring = ring
        self.module = module
        self.spec = spec

    @property
    def invariant_factors(self):
        return self.module.invariant_factors

    @property
    def rank(self):
        return self.module.rank

    @property
    def ngens(self):
        return self.module.ngens

    @property
    def modulus(self):
        return self.ring.modulus

    def coords(self, chain):
        return self.module.coords(chain.flatten())

    def generator_chain(self, i):
        return Chain1.unflatten(self.table, self.k, self.module.generator(i),
                                self.ring.modulus)

    def generator_chains(self):
        return [self.generator_chain(i) for i in range(self.ngens)]

    def cycle(self, gamma, poly):
        return cycle_of(gamma, poly, self.table, self.k, self.ring.modulus)

    def cycle_coords(self, gamma, poly):
        return self.coords(self.cycle(gamma, poly))

    def zero_coords(self):
        return self.module.zero_coords()

    def reduce_coords(self, coords):
        return self.module.reduce_coords(coords)


def _action_matrix_on_induced(table, k, letter, modulus):
    """Dense matrix of a letter acting on the induced module."""
    n = table.index
    d = 2 * k + 1
    N = n * d
    A = zeros(N, N)
    for i in range(n):
        jj, tw = i, None
        steps = 1 if letter[0] == "S" else (3 - letter[1])
        for _ in range(steps):
            j2, tw2 = table.step(jj, letter[0])
            tw = tw2 if tw is None else tw * tw2
            jj = j2
        M = act_matrix(tw.inv(), k, modulus)
        for col in range(d):
            for row in range(d):
                val = M[row][col]
                if val:
                    A[jj * d + row][i * d + col] = val
    return A


def compute_h1(spec_or_table, k, ring=ZZ, shuffle_seed=None):
    """H1 presentation of the congruence subgroup with degree-2k
    coefficients over the given ring.

    Over Q the exact integer computation is used and only its free
    part is exposed; over F_p and Z/p^M the chain complex itself is
    reduced, so torsion of the complex is handled correctly.
    """
    if hasattr(spec_or_table, "transversal"):
        table = spec_or_table
        spec = None
    else:
        spec = spec_or_table
        table = build_cosets(spec, shuffle_seed=shuffle_seed)
    modulus = ring.modulus
    n = table.index
    d = 2 * k + 1
    N = n * d
    AS = _action_matrix_on_induced(table, k, ("S", 1), modulus)
    AU = _action_matrix_on_induced(table, k, ("U", 1), modulus)
    AU2 = _action_matrix_on_induced(table, k, ("U", 2), modulus)
    # d1 = [AS - I | AU - I]
    d1 = zeros(N, 2 * N)
    for i in range(N):
        row = d1[i]
        ASi, AUi = AS[i], AU[i]
        for j in range(N):
            row[j] = ASi[j]
            row[N + j] = AUi[j]
        row[i] -= 1
        row[N + i] -= 1
    # d2 = diag(I + AS, I + AU + AU^2)
    d2 = zeros(2 * N, 2 * N)
    for i in range(N):
        r1 = d2[i]
        r2 = d2[N + i]
        ASi, AUi, AU2i = AS[i], AU[i], AU2[i]
        for j in range(N):
            r1[j] = ASi[j]
            r2[N + j] = AUi[j] + AU2i[j]
        r1[i] += 1
        r2[N + i] += 1
    if modulus is None:
        K = kernel_basis(d1)
        image = d2
    else:
        K = kernel_mod(d1, modulus)
        extra = []
        for i in range(2 * N):
            col = [0] * (2 * N)
            col[i] = modulus
            extra.append(col)
        image = [d2[i] + [extra[j][i] for j in range(2 * N)] for i in range(2 * N)]
    module = subquotient(K, image, ring)
    return H1Presentation(table, k, ring, module, spec=spec)
