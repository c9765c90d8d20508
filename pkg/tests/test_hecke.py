import random

import pytest

from hypcycle.cosets import SubgroupSpec, subgroup_cosets, subgroup_transversal
from hypcycle.hecke import (
    ConjugateLeavesGroup,
    DoubleCoset,
    NotACycleOnTransfer,
    PPhiV,
    WrongDivisibility,
    beta_matrix,
    conj_star,
    conjugate_by,
    diamond,
    diamond_matrix,
    gamma0p_intersection,
    hecke_T,
    hecke_U,
    hecke_matrix_diag_p,
    identity_operator,
    pi_phi_V,
    transfer_res,
)
from hypcycle.homology import Chain1, compute_h1
from hypcycle.intlinalg import QQ, RingSpec, ZZ
from hypcycle.psl2 import (
    HYPERBOLIC,
    I,
    Mat2,
    PMat,
    S,
    T,
    TP,
    classify,
    quadratic_form,
)
from hypcycle.symspace import IndVec, act, poly_pow


def random_hyperbolic_in(spec, rng, count, steps=8):
    out = []
    while len(out) < count:
        g = I
        for _ in range(rng.randint(2, steps)):
            g = g * (T if rng.random() < 0.5 else TP)
        if classify(g) == HYPERBOLIC and spec.contains(g):
            out.append(g)
    return out


def orbit_formula_image(alpha, gamma, w, src_table, tgt_contains):
    """Independent oracle: the pushforward of the single-term cycle
    (gamma - 1) x w through [Gamma' alpha Gamma], via the permutation
    of subgroup-coset representatives.  Returns [(delta, w')] terms."""

    def pred1(g):
        if src_table.coset_of(g)[0] != 0:
            return False
        cg = conjugate_by(alpha, g)
        return cg is not None and tgt_contains(cg)

    t1 = subgroup_cosets(pred1)
    reps = subgroup_transversal(t1, src_table)
    r = len(reps)
    nu = {}
    for i, s in enumerate(reps):
        x = s * gamma.inv()
        for j, s2 in enumerate(reps):
            if pred1(x * s2.inv()):
                nu[i] = j
                break
    seen = set()
    out = []
    for i in range(r):
        if i in seen:
            continue
        h = 0
        j = i
        while True:
            seen.add(j)
            j = nu[j]
            h += 1
            if j == i:
                break
        gp = gamma
        for _ in range(h - 1):
            gp = gp * gamma
        delta = conjugate_by(alpha, reps[i] * gp * reps[i].inv())
        assert delta is not None
        out.append((delta, act(alpha * reps[i].lift(), w)))
    return out


class TestCosetCounts:
    def test_tp_counts(self):
        for spec, p in ((SubgroupSpec.gamma1(1), 2), (SubgroupSpec.gamma1(1), 3),
                        (SubgroupSpec.gamma0(11), 2), (SubgroupSpec.gamma1(5), 3)):
            h1 = compute_h1(spec, 0, ZZ)
            dc = hecke_matrix_diag_p(h1, p)
            assert dc.coset_count == p + 1

    def test_up_counts(self):
        for spec, p in ((SubgroupSpec.gamma1(4), 2), (SubgroupSpec.gamma0(9), 3),
                        (SubgroupSpec.gamma1(6), 2), (SubgroupSpec.gamma1(6), 3)):
            h1 = compute_h1(spec, 0, ZZ)
            dc = hecke_matrix_diag_p(h1, p)
            assert dc.coset_count == p

    def test_divisibility_guards(self):
        h1 = compute_h1(SubgroupSpec.gamma1(4), 0, ZZ)
        with pytest.raises(WrongDivisibility):
            hecke_T(2, h1)
        with pytest.raises(WrongDivisibility):
            hecke_U(3, h1)


class TestIdentityOperator:
    def test_trivial_double_coset(self):
        h1 = compute_h1(SubgroupSpec.gamma0(11), 0, ZZ)
        op = DoubleCoset(h1, h1, I.lift()).operator()
        assert op.equals(identity_operator(h1))


class TestCharpolys:
    def test_level_one_weight_twelve(self):
        h1 = compute_h1(SubgroupSpec.gamma1(1), 5, QQ)
        assert hecke_T(2, h1).charpoly_str() == "(x-2049)*(x+24)^2"
        # tau(3) = 252, Eisenstein 1 + 3^11 = 177148
        assert hecke_T(3, h1).charpoly_str() == "(x-177148)*(x-252)^2"

    def test_gamma0_11(self):
        h1 = compute_h1(SubgroupSpec.gamma0(11), 0, QQ)
        assert hecke_T(2, h1).charpoly_str() == "(x-3)*(x+2)^2"
        # a_3(11a) = -1, Eisenstein 1 + 3 = 4
        assert hecke_T(3, h1).charpoly_str() == "(x-4)*(x+1)^2"

    def test_level_one_weight_four(self):
        # only the Eisenstein class: T_p eigenvalue 1 + p^3
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, QQ)
        assert hecke_T(2, h1).charpoly_str() == "x-9"
        assert hecke_T(5, h1).charpoly_str() == "x-126"


class TestTransfer:
    def test_cor_res_is_index_level_one(self):
        spec_sub = SubgroupSpec.gamma0(2)
        for k in (0, 1):
            h1 = compute_h1(SubgroupSpec.gamma1(1), k, ZZ)
            h1s = compute_h1(spec_sub, k, ZZ)
            res = DoubleCoset(h1, h1s, I.lift()).operator()
            cor = DoubleCoset(h1s, h1, I.lift()).operator()
            got = cor.compose(res)
            assert got.equals(identity_operator(h1).scaled(3))

    def test_cor_res_gamma0_11(self):
        h1 = compute_h1(SubgroupSpec.gamma0(11), 0, ZZ)
        h1s = compute_h1(SubgroupSpec.gamma1(11), 0, ZZ)
        res = DoubleCoset(h1, h1s, I.lift()).operator()
        cor = DoubleCoset(h1s, h1, I.lift()).operator()
        got = cor.compose(res)
        assert got.equals(identity_operator(h1).scaled(5))

    def test_transfer_requires_cycle(self):
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ZZ)
        sub = compute_h1(SubgroupSpec.gamma0(2), 1, ZZ)
        bad = Chain1(IndVec.unit(h1.table, 1, (1, 0, 0)),
                     IndVec.zero(h1.table, 1))
        with pytest.raises(NotACycleOnTransfer):
            transfer_res(bad, sub.table)

    def test_chain_level_transfer_is_cycle(self):
        from hypcycle.homology import boundary1

        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ZZ)
        sub = compute_h1(SubgroupSpec.gamma0(2), 1, ZZ)
        rng = random.Random(81)
        for g in random_hyperbolic_in(SubgroupSpec.gamma1(1), rng, 5):
            c = h1.cycle(g, quadratic_form(g))
            rc = transfer_res(c, sub.table)
            assert boundary1(rc).is_zero()


class TestConjStar:
    def test_identity_alpha(self):
        h1 = compute_h1(SubgroupSpec.gamma0(11), 0, ZZ)
        rng = random.Random(82)
        for g in random_hyperbolic_in(SubgroupSpec.gamma0(11), rng, 4):
            c = h1.cycle(g, (1,))
            out = conj_star(c, I.lift(), h1.table)
            assert h1.coords(out) == h1.coords(c)

    def test_inner_automorphism_trivial(self):
        spec = SubgroupSpec.gamma0(11)
        h1 = compute_h1(spec, 0, ZZ)
        rng = random.Random(83)
        alpha = random_hyperbolic_in(spec, rng, 1)[0]
        op = DoubleCoset(h1, h1, alpha.lift()).operator()
        assert op.equals(identity_operator(h1))

    def test_conjugate_leaves_group(self):
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ZZ)
        g = T * T * TP
        c = h1.cycle(g, quadratic_form(g))
        tgt = compute_h1(SubgroupSpec.gamma0(11), 1, ZZ)
        with pytest.raises((ConjugateLeavesGroup, Exception)):
            conj_star(c, Mat2(1, 0, 0, 2), tgt.table)


class TestDiamond:
    def test_diamond_one(self):
        h1 = compute_h1(SubgroupSpec.gamma1(5), 1, ZZ)
        assert diamond(1, h1).equals(identity_operator(h1))

    def test_diamond_on_gamma0_trivial(self):
        h1 = compute_h1(SubgroupSpec.gamma0(7), 1, ZZ)
        for d in (2, 3, 5):
            assert diamond(d, h1).equals(identity_operator(h1))

    def test_beta_independence(self):
        h1 = compute_h1(SubgroupSpec.gamma1(9), 1, ZZ)
        base = diamond_matrix(9, 2)
        # any beta in Gamma_0(9) with lower row (9, 2): shift the top row
        other = Mat2(base.a + 9, base.b + 2, 9, 2)
        assert other.det() == 1
        d1 = diamond(2, h1)
        d2 = diamond(2, h1, beta=other)
        assert d1.equals(d2)

    def test_diamond_commutes_with_tp(self):
        h1 = compute_h1(SubgroupSpec.gamma1(5), 1, ZZ)
        Tp = hecke_T(2, h1)
        D = diamond(2, h1)
        assert Tp.compose(D).equals(D.compose(Tp))

    def test_diamond_group_structure(self):
        # <d> depends only on d mod N and is multiplicative
        h1 = compute_h1(SubgroupSpec.gamma1(5), 1, ZZ)
        d2 = diamond(2, h1)
        d4 = diamond(4, h1)
        d7 = diamond(7, h1)
        assert d2.compose(d2).equals(d4)
        assert d2.equals(d7)


class TestCommutativity:
    def test_tl_tq_level_one(self):
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ZZ)
        T2, T3 = hecke_T(2, h1), hecke_T(3, h1)
        assert T2.compose(T3).equals(T3.compose(T2))

    def test_tl_tq_gamma0_11(self):
        h1 = compute_h1(SubgroupSpec.gamma0(11), 0, ZZ)
        T2, T3 = hecke_T(2, h1), hecke_T(3, h1)
        assert T2.compose(T3).equals(T3.compose(T2))


class TestOrbitFormulaOracle:
    """Operator pipeline vs the independent coset-orbit pushforward."""

    @pytest.mark.parametrize("spec_name,k,p", [
        ("gamma1:1", 1, 2),
        ("gamma1:1", 2, 3),
        ("gamma0:11", 0, 2),
        ("gamma1:5", 1, 2),
    ])
    def test_tp_on_hyperbolic_cycles(self, spec_name, k, p):
        spec = SubgroupSpec.parse(spec_name)
        h1 = compute_h1(spec, k, ZZ)
        op = hecke_T(p, h1)
        rng = random.Random(hash((spec_name, k, p)) & 0xFFFF)
        for g in random_hyperbolic_in(spec, rng, 3):
            w = poly_pow(quadratic_form(g), k)
            z = list(h1.cycle_coords(g, w))
            via_matrix = op.apply_coords(z)
            acc = h1.zero_coords()
            for delta, w2 in orbit_formula_image(Mat2(1, 0, 0, p), g, w,
                                                 h1.table, h1.table.contains):
                c = h1.cycle_coords(delta, w2)
                acc = tuple(a + b for a, b in zip(acc, c))
            assert h1.reduce_coords(acc) == tuple(via_matrix)

    def test_up_on_hyperbolic_cycles(self):
        spec = SubgroupSpec.gamma1(4)
        h1 = compute_h1(spec, 1, ZZ)
        op = hecke_U(2, h1)
        rng = random.Random(84)
        for g in random_hyperbolic_in(spec, rng, 3, steps=10):
            w = quadratic_form(g)
            z = list(h1.cycle_coords(g, w))
            via_matrix = op.apply_coords(z)
            acc = h1.zero_coords()
            for delta, w2 in orbit_formula_image(Mat2(1, 0, 0, 2), g, w,
                                                 h1.table, h1.table.contains):
                acc = tuple(a + b for a, b in
                            zip(acc, h1.cycle_coords(delta, w2)))
            assert h1.reduce_coords(acc) == tuple(via_matrix)


class TestHeckeStability:
    def test_images_in_saturated_span(self):
        # the hyperbolic-cycle span, saturated, absorbs Hecke images
        from hypcycle.intlinalg import ColumnEchelon, from_columns, saturate_columns

        spec = SubgroupSpec.gamma1(1)
        for k, p in ((1, 2), (2, 2), (5, 2)):
            h1 = compute_h1(spec, k, ZZ)
            rng = random.Random(100 + k)
            gens = random_hyperbolic_in(spec, rng, 12, steps=9)
            cols = [list(h1.cycle_coords(g, poly_pow(quadratic_form(g), k)))
                    for g in gens]
            rel = h1.module.relation_columns()
            span = from_columns(cols + rel, h1.ngens) if (cols + rel) else [[] for _ in range(h1.ngens)]
            sat = saturate_columns(span)
            ech = ColumnEchelon(sat)
            op = hecke_T(p, h1)
            for g in gens[:6]:
                z = list(h1.cycle_coords(g, poly_pow(quadratic_form(g), k)))
                image = list(op.apply_coords(z))
                assert ech.solve(image) is not None


class TestPiPhiV:
    @pytest.mark.parametrize("p", [2, 3])
    def test_level_one_k1_identities(self, p):
        ring = RingSpec("Fp", p=p)
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ring)
        r = pi_phi_V(h1, p)
        Tp = hecke_T(p, h1)
        assert r.pi.compose(r.phi).equals(Tp)
        assert r.phi.compose(r.pi).equals(r.Up.plus(r.V))
        assert r.V.compose(r.V).is_zero()
        assert r.V.compose(r.Up).is_zero()

    def test_phi_coset_count(self):
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, RingSpec("Fp", p=2))
        specp = gamma0p_intersection(SubgroupSpec.gamma1(1), 2)
        h1p = compute_h1(specp, 1, RingSpec("Fp", p=2))
        dc = DoubleCoset(h1, h1p, Mat2(1, 0, 0, 2))
        assert dc.coset_count == 3  # p + 1 cosets split off the level

    def test_up_v_composite_consistency(self):
        # U_p o V equals the direct double coset of the product matrix;
        # it is NOT zero (see the decisions ledger: the claimed vanishing
        # fails, only V o U_p = 0 holds)
        p = 2
        ring = RingSpec("Fp", p=p)
        h1 = compute_h1(SubgroupSpec.gamma1(1), 1, ring)
        r = pi_phi_V(h1, p)
        beta = beta_matrix(1, p)
        alpha = Mat2(1, 0, 0, p) * beta * Mat2(p, 0, 0, 1)
        direct = DoubleCoset(r.h1p, r.h1p, alpha).operator()
        assert r.Up.compose(r.V).equals(direct)

    def test_pi_phi_v_wrong_divisibility(self):
        h1 = compute_h1(SubgroupSpec.gamma1(4), 1, RingSpec("Fp", p=2))
        with pytest.raises(WrongDivisibility):
            pi_phi_V(h1, 2)


class TestBoundaryIdentityCore:
    """T_p z(T) = (1 + p^(2k+1) <p>) z(T) on Gamma_1(N^2)."""

    @pytest.mark.parametrize("N,p,k", [(2, 3, 0), (2, 3, 1)])
    def test_small_cases(self, N, p, k):
        from hypcycle.symspace import x2_power

        spec = SubgroupSpec.gamma1(N * N)
        h1 = compute_h1(spec, k, ZZ)
        z = list(h1.cycle_coords(T, x2_power(k)))
        lhs = hecke_T(p, h1).apply_coords(z)
        dz = diamond(p, h1).apply_coords(z)
        rhs = h1.reduce_coords([a + p ** (2 * k + 1) * b for a, b in zip(z, dz)])
        assert tuple(lhs) == tuple(rhs)
