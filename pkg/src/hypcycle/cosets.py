"""Congruence subgroups Gamma_H(N), membership, and coset tables of
finite-index subgroups of PSL2(Z).

Cosets are right cosets.  Tables are built by breadth-first orbit of
the identity coset under right multiplication by S and U; coset
equality is always decided by the exact membership predicate.  Each
table stores, for every transversal element t and generator x, the
target coset and the subgroup-valued twist of t*x.
"""

from dataclasses import dataclass, field
from math import gcd

from .psl2 import I, PMat, S, U, decompose_word


class BudgetExceeded(Exception):
    """Coset orbit larger than the configured bound."""


def _unit_closure(N, gens):
    units = {1 % N}
    units.update(g % N for g in gens)
    frontier = set(units)
    while frontier:
        new = set()
        for a in frontier:
            for b in list(units):
                c = (a * b) % N
                if c not in units:
                    new.add(c)
        units |= new
        frontier = new
    return frozenset(units)


@dataclass(frozen=True)
class SubgroupSpec:
    """The data (N, H <= (Z/N)^x) cutting out Gamma_H with
    Gamma_1(N) <= Gamma_H <= Gamma_0(N)."""

    N: int
    h_gens: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("level must be >= 1")
        for g in self.h_gens:
            if gcd(g, self.N) != 1:
                raise ValueError("%d is not a unit mod %d" % (g, self.N))
        object.__setattr__(self, "_h_set", _unit_closure(self.N, self.h_gens))

    @staticmethod
    def gamma0(N):
        gens = tuple(a for a in range(1, N) if gcd(a, N) == 1)
        return SubgroupSpec(N, gens, label="gamma0:%d" % N)

    @staticmethod
    def gamma1(N):
        return SubgroupSpec(N, (), label="gamma1:%d" % N)

    @staticmethod
    def gammaH(N, gens):
        return SubgroupSpec(N, tuple(sorted(set(g % N for g in gens))),
                            label="gammaH:%d:%s" % (N, ",".join(str(g) for g in sorted(set(g % N for g in gens)))))

    @staticmethod
    def parse(text):
        parts = text.split(":")
        kind = parts[0]
        if kind == "gamma0":
            return SubgroupSpec.gamma0(int(parts[1]))
        if kind == "gamma1":
            return SubgroupSpec.gamma1(int(parts[1]))
        if kind == "gammaH":
            gens = tuple(int(x) for x in parts[2].split(",")) if len(parts) > 2 and parts[2] else ()
            return SubgroupSpec.gammaH(int(parts[1]), gens)
        raise ValueError("cannot parse group %r" % (text,))

    @property
    def name(self):
        return self.label or "gammaH:%d:%s" % (self.N, ",".join(map(str, self.h_gens)))

    @property
    def h_set(self):
        return self._h_set

    def contains(self, g):
        """Membership of an element of PSL2(Z): some sign lift has
        c = 0 mod N and d mod N in H."""
        N = self.N
        if g.c % N:
            return False
        d = g.d % N
        return d in self._h_set or (-d) % N in self._h_set

    def __str__(self):
        return self.name


def membership(g, spec):
    return spec.contains(g)


class CosetTable:
    """Right-coset table of a finite-index subgroup of PSL2(Z).

    ``transversal[0]`` is the identity; ``mulS[i]`` and ``mulU[i]``
    give (j, twist) with t_i * x == twist * t_j and twist in the
    subgroup.
    """

    def __init__(self, contains, transversal, mulS, mulU, name=""):
        self.contains = contains
        self.transversal = transversal
        self.mulS = mulS
        self.mulU = mulU
        self.name = name
        self.index = len(transversal)
        self._word_cache = {}
        self.fox_cache = {}

    def step(self, i, gen):
        """(j, twist) for right multiplication of coset i by S or U."""
        return self.mulS[i] if gen == "S" else self.mulU[i]

    def step_letter(self, i, letter):
        """Right multiplication by a word letter ('S',1), ('U',1), ('U',2)."""
        gen, e = letter
        j, tw = self.step(i, gen)
        for _ in range(e - 1):
            j2, tw2 = self.step(j, gen)
            tw = tw * tw2
            j = j2
        return j, tw

    def coset_of(self, g):
        """(index, twist) with g == twist * transversal[index]."""
        j = 0
        for letter in decompose_word(g):
            j, _ = self.step_letter(j, letter)
        tw = g * self.transversal[j].inv()
        return j, tw

    def schreier(self, g):
        """Decompose g = gamma * t with gamma in the subgroup and t in
        the transversal."""
        j, tw = self.coset_of(g)
        return tw, self.transversal[j]

    def schreier_generators(self):
        """Nontrivial twists t_i * x * t_j^-1; they generate the subgroup."""
        seen = {}
        for table in (self.mulS, self.mulU):
            for _, tw in table:
                if not tw.is_identity() and tw.key() not in seen:
                    seen[tw.key()] = tw
        return list(seen.values())


def schreier(g, table):
    return table.schreier(g)


def build_cosets(spec_or_pred, max_index=100000, shuffle_seed=None):
    """Breadth-first coset table of the subgroup cut out by a
    SubgroupSpec or membership predicate.

    ``shuffle_seed`` permutes the BFS exploration order; all invariants
    downstream must be independent of the resulting transversal.
    """
    if isinstance(spec_or_pred, SubgroupSpec):
        contains = spec_or_pred.contains
        name = spec_or_pred.name
    else:
        contains = spec_or_pred
        name = getattr(spec_or_pred, "__name__", "predicate")
    rng = None
    if shuffle_seed is not None:
        import random

        rng = random.Random(shuffle_seed)
    transversal = [I]
    edges = {}          # (i, gen) -> (j, twist)
    frontier = [0]
    while frontier:
        if rng is None:
            i = frontier.pop(0)
        else:
            i = frontier.pop(rng.randrange(len(frontier)))
        t = transversal[i]
        gens = [("S", S), ("U", U)]
        if rng is not None:
            rng.shuffle(gens)
        for gen, x in gens:
            if (i, gen) in edges:
                continue
            c = t * x
            j = None
            for j2, t2 in enumerate(transversal):
                if contains(c * t2.inv()):
                    j = j2
                    break
            if j is None:
                transversal.append(c)
                j = len(transversal) - 1
                if j >= max_index:
                    raise BudgetExceeded(
                        "coset orbit exceeded %d; wrong predicate?" % max_index)
                frontier.append(j)
            edges[(i, gen)] = (j, c * transversal[j].inv())
    n = len(transversal)
    mulS = [edges[(i, "S")] for i in range(n)]
    mulU = [edges[(i, "U")] for i in range(n)]
    return CosetTable(contains, transversal, mulS, mulU, name=name)


def subgroup_cosets(predicate, max_index=100000, shuffle_seed=None):
    """Coset table for a finite-index subgroup given by a membership
    predicate (caller guarantees finite index; BFS must terminate)."""
    return build_cosets(predicate, max_index=max_index, shuffle_seed=shuffle_seed)


def subgroup_transversal(sub_table, ambient_table):
    """Representatives, inside the ambient subgroup, of the cosets of
    the smaller subgroup: one element per coset of sub\\ambient.

    BFS over the Schreier generators of the ambient group, so every
    representative lies in the ambient group.
    """
    gens = ambient_table.schreier_generators()
    gens = gens + [g.inv() for g in gens]
    reps = {0: I}
    queue = [0]
    while queue:
        i = queue.pop(0)
        s = reps[i]
        for g in gens:
            c = s * g
            j, _ = sub_table.coset_of(c)
            if j not in reps:
                reps[j] = c
                queue.append(j)
    r = sub_table.index // ambient_table.index
    if len(reps) != r:
        raise RuntimeError(
            "expected %d cosets, found %d; subgroup not inside ambient?"
            % (r, len(reps)))
    return [reps[j] for j in sorted(reps)]


def p1_size(N):
    """#P^1(Z/N) by the multiplicative formula N * prod(1 + 1/p)."""
    n = N
    num = N
    p = 2
    while p * p <= n:
        if n % p == 0:
            num = num // p * (p + 1)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        num = num // n * (n + 1)
    return num
