from fractions import Fraction

import pytest

from courantcoh.fields import QQ
from courantcoh import catalog as catmod
from courantcoh.catalog import catalog, so3_bad_metric, broken_t3, broken_t4
from courantcoh import model as M
from courantcoh.model import (validate_quadratic_bundle, validate_courant_axioms,
                              dorfman, build_ample, apply_dissection_change,
                              cs_make, XI, RR, XX)


def test_validate_quadratic_examples():
    assert validate_quadratic_bundle(catalog("hyperbolic2").fiber).ok()
    assert validate_quadratic_bundle(catalog("so3").fiber).ok()
    rep = validate_quadratic_bundle(so3_bad_metric().fiber)
    assert not rep.ok()
    kinds = {c for c, _ in rep.failures}
    assert "ad-invariance" in kinds
    assert any("r1" in w and "r2" in w and "r3" in w
               for c, w in rep.failures if c == "ad-invariance")


def test_validate_antisymmetry_negative():
    fiber = M.QuadraticLieAlgebraData(
        QQ, 0, 2, [[1, 0], [0, 1]],
        {(0, 1): {0: cs_make(QQ, 0, [((), 1)])},
         (1, 0): {0: cs_make(QQ, 0, [((), 1)])}})  # not antisymmetric
    rep = validate_quadratic_bundle(fiber)
    assert any(c == "antisymmetry" for c, _ in rep.failures)


def test_dorfman_examples_t3():
    spec = catalog("t3-exact(2)")
    s = dorfman(spec, spec.section(XX, 0), spec.section(XX, 1))
    # x1 o x2 = H(x1,x2,-) = c xi^3 for constant H = c dx1^dx2^dx3
    assert s == {(XI, 2): {(0, 0, 0): Fraction(2)}}
    assert dorfman(spec, spec.section(XI, 0), spec.section(XI, 1)) == {}
    assert dorfman(spec, spec.section(XI, 0), spec.section(XX, 0)) == {}


def test_dorfman_examples_g():
    spec = catalog("so3")
    # r o r = 0 on the diagonal
    assert dorfman(spec, spec.section(RR, 0), spec.section(RR, 0)) == {}
    # r1 o r2 = [r1, r2] = r3
    got = dorfman(spec, spec.section(RR, 0), spec.section(RR, 1))
    assert got == {(RR, 2): {(): Fraction(1)}}
    # xi o r = 0
    spec2 = catalog("so3-circle(1)")
    assert dorfman(spec2, spec2.section(RR, 0), spec2.section(RR, 0)) == {}


def test_axioms_pass_catalog():
    for name in ["hyperbolic2", "so3", "lie-double-sl2", "t2-kronecker(nu)",
                 "t3-exact(1)", "t4-twisted(1)", "so3-circle(1)"]:
        assert validate_courant_axioms(catalog(name)).ok(), name


def test_broken_t4_fails_jacobi_with_cubic_witness():
    rep = validate_courant_axioms(broken_t4())
    assert not rep.ok()
    assert any(c == "Leibniz-Jacobi" for c, _ in rep.failures)


def test_broken_t3_is_accidentally_consistent():
    # On a rank-3 leafwise frame every 3-form is leafwise closed, so the
    # nominal negative control on T^3 actually satisfies all axioms.
    rep = validate_courant_axioms(broken_t3())
    assert rep.ok()


def test_build_ample():
    # point base: A_E = the fiber Lie algebra
    amp = build_ample(catalog("so3"))
    assert amp.frames() == [(RR, 0), (RR, 1), (RR, 2)]
    got = amp.frame_bracket((RR, 0), (RR, 1))
    assert got == {(RR, 2): {(): Fraction(1)}}
    # generalized exact: A_E = F, R = 0
    amp2 = build_ample(catalog("t2-kronecker(nu)"))
    assert amp2.frames() == [(XX, 0)]
    amp3 = build_ample(catalog("t3-exact(1)"))
    for u in amp3.frames():
        for v in amp3.frames():
            assert amp3.frame_bracket(u, v) == {}


def test_dissection_change_identity():
    spec = catalog("so3")
    ident = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    spec2, rep = apply_dissection_change(spec, ident, {}, {})
    assert rep.ok()
    assert spec2.dissection.nablaG == spec.dissection.nablaG
    assert spec2.dissection.R == spec.dissection.R
    assert spec2.dissection.H == spec.dissection.H


def test_dissection_change_so3_rotation():
    # a cyclic rotation preserves epsilon and the identity metric
    spec = catalog("so3")
    tau = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]  # r1->r2->r3->r1
    spec2, rep = apply_dissection_change(spec, tau, {}, {})
    assert rep.ok()
    assert spec2.fiber.brackets == spec.fiber.brackets
    assert spec2.dissection.nablaG == {} and spec2.dissection.R == {}


def test_dissection_change_metric_guard():
    spec = catalog("so3")
    with pytest.raises(ValueError):
        apply_dissection_change(spec, [[2, 0, 0], [0, 1, 0], [0, 0, 1]], {}, {})


def test_dissection_change_beta_shift_t3():
    # a constant 2-form shift: H' = H - d beta = H; the change is a Courant iso
    spec = catalog("t3-exact(1)")
    beta = {(0, 1): cs_make(QQ, 3, [((0, 0, 0), Fraction(1, 2))])}
    spec2, rep = apply_dissection_change(spec, [], {}, beta)
    assert rep.ok()
    assert spec2.dissection.H == spec.dissection.H


def test_dissection_change_varphi_t4():
    # a varphi-shift on a spec with G = 0 must keep G-data trivial but can
    # shift H; the change map stays a Courant isomorphism
    spec = catalog("so3-circle(1)")
    tau = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    spec2, rep = apply_dissection_change(spec, tau, {}, {})
    assert rep.ok()


def test_uchino_and_coisotropy_in_axioms():
    # the axiom validator includes the anchor-morphism and coisotropy checks;
    # run it on a twisted entry to make them non-vacuous
    rep = validate_courant_axioms(catalog("t4-twisted(2)"))
    assert rep.ok()
