"""Acceptance suite: one test per criterion, exact (tolerance-zero) checks,
one printed pass/fail line each (run with -s or -v to see them)."""

import random

import pytest

from conftest import CATALOG, get_pipe, sl2_module_ce_dims

from courantcoh.algebra import (GradedElement, derivation_commutator,
                                derivation_is_zero, poisson)
from courantcoh.catalog import catalog, broken_t3, broken_t4
from courantcoh.cohomology import (brute_standard_cohomology,
                                   minimal_model_cohomology, naive_cohomology,
                                   truncated_cohomology, compare_reports,
                                   spectral_pages, corollary_dims,
                                   exact_cohomology)
from courantcoh.contraction import verify_contraction_semifull, phi_theta_check
from courantcoh.minimal_model import (build_minimal_model, lambda_brackets,
                                      gauge_primitive, verify_gauge,
                                      perturbed_triple, respec_with_triple,
                                      dT_derivation)
from courantcoh.model import build_ample
from courantcoh.rothstein import (build_rothstein, build_theta,
                                  master_equation_check, d_standard)
from courantcoh import cli


def _report(n, text):
    print(f"ACCEPTANCE {n}: {text}")


def _brute(P, n=6):
    return brute_standard_cohomology(P.R, P.dE, n,
                                     anchor_factor=P.ham.anchor_factor)


def test_criterion_01_master_suite():
    """Every catalog spec satisfies {Theta,Theta} = 0 and d_E^2 = 0 exactly;
    a genuinely non-closed leafwise 3-form produces a nonzero residual."""
    for name in CATALOG:
        P = get_pipe(name)
        assert master_equation_check(P.R, P.ham).is_zero(), name
        assert derivation_is_zero(derivation_commutator(P.dE, P.dE)), name
    spec = broken_t4()
    R = build_rothstein(spec)
    res = master_equation_check(R, build_theta(R))
    assert not res.is_zero()
    assert res.degrees() == [4]
    _report(1, "PASS - master equation and d^2 = 0 on all catalog specs; "
               "nonzero degree-4 residual on the non-closed control")


@pytest.mark.xfail(strict=True, reason=(
    "stated control is unattainable: on a rank-3 leafwise frame every "
    "3-form is leafwise closed, so the T^3 control satisfies the master "
    "equation; the T^4 control in criterion 1 carries the intended content"))
def test_criterion_01_negative_control_as_stated_on_t3():
    spec = broken_t3()
    R = build_rothstein(spec)
    res = master_equation_check(R, build_theta(R))
    _report(1, f"t3 control residual is {res!r} (zero: criterion as stated fails)")
    assert not res.is_zero()


def test_criterion_02_contraction_suite():
    """Five contraction identities, the four semifull conditions, h^2 = 0 and
    h d h = -h, on all generators plus 200 seeded random regular elements of
    degree <= 6 per spec."""
    for name in CATALOG:
        P = get_pipe(name)
        rep = verify_contraction_semifull(P.con, n_random=200, seed=20240,
                                          max_degree=6)
        assert rep.ok(), (name, rep.failures[:3])
        repx = verify_contraction_semifull(P.con, n_random=200, seed=20241,
                                           max_degree=6, extended=True)
        assert repx.ok(), (name, repx.failures[:3])
    _report(2, "PASS - base and extended semifull contractions exact on all "
               "generators + 200 random regular elements per spec")


def test_criterion_03_phi_theta():
    """phi(Theta) equals the negative intrinsic torsion, assembled
    independently from the explicit trilinear values."""
    for name in CATALOG:
        rep = phi_theta_check(get_pipe(name).con)
        assert rep.ok(), (name, rep.failures)
    _report(3, "PASS - phi(Theta) = -C_E exactly on every catalog spec")


def test_criterion_04_minimal_model_suite():
    """Q_E^2 = 0, d_CE(d_T) = 0, d_E restricted to the transverse momenta is
    d_CE + d_T (all verified at build time, rebuilt here), and the lambda
    brackets agree with the homotopy-transfer recomputation exactly."""
    for name in CATALOG:
        P = get_pipe(name)
        # rebuild with all verifications on (raises on any failure)
        mm = build_minimal_model(P.R, P.ham, P.amp, dE=P.dE, verify=True)
        f2, t2, f3, t3 = lambda_brackets(mm, P.con)
        assert all(f2[k] == t2[k] for k in f2), name
        assert all(f3[k] == t3[k] for k in f3), name
    _report(4, "PASS - Q^2 = 0, cocycle identity, d_E|b = d_CE + d_T, and "
               "lambda brackets = homotopy transfer, all exact")


def test_criterion_05_oracle_equivalence():
    """dim H^n(brute standard) = dim H^n(minimal model) for n <= 6, per
    essential class, on every catalog spec."""
    for name in CATALOG:
        P = get_pipe(name)
        brute = _brute(P)
        mini = minimal_model_cohomology(P.R, P.mm.q_e, 6,
                                        anchor_factor=P.mm.dual_factor)
        assert not compare_reports(brute, mini), name
    _report(5, "PASS - brute-force standard cohomology equals minimal-model "
               "cohomology in degrees <= 6 on every catalog spec")


def test_criterion_06_spectral_sequence():
    """E1 dims equal the directly computed d_CE-cohomology; E2 totals equal
    brute force in degrees <= 6 for every rank <= 4 ample algebroid; on the
    twisted torus the transgression d1 is nonzero and E2 still matches."""
    for name in CATALOG:
        P = get_pipe(name)
        pages = spectral_pages(P.R, P.mm, 6)
        allowed = list(P.R.xi) + list(P.R.r) + list(P.R.pB)
        direct = exact_cohomology(P.R, P.mm.d_ce, allowed, 6,
                                  anchor_factor=P.mm.dual_factor,
                                  name="d_CE cohomology")
        e1 = pages.e1_totals()
        for label in set(direct.nonzero_classes()) | set(e1):
            assert direct.classes.get(label, [0] * 7) == \
                e1.get(label, [0] * 7), (name, label)
        rank_ae = P.spec.n_leaf + P.spec.g_rank
        if rank_ae <= 4 or P.spec.base.n_trans == 0:
            assert not compare_reports(_brute(P), pages.as_result(2)), name
    P = get_pipe("t4-twisted(1)")
    pages = spectral_pages(P.R, P.mm, 6)
    assert pages.d1_is_nonzero()
    assert not compare_reports(_brute(P), pages.as_result(2))
    _report(6, "PASS - E1 = CE cohomology with symmetric coefficients, E2 "
               "totals = brute force, d1 nonzero on the twisted torus")


def test_criterion_07_corollary_suite():
    """H^0 and H^1 equal the CE cohomology of A_E; the degree-2 and degree-3
    direct-sum dimension formulas hold on every spec."""
    for name in CATALOG:
        P = get_pipe(name)
        brute = _brute(P)
        nv = naive_cohomology(P.R, P.mm.d_ce, 2, anchor_factor=P.mm.dual_factor)
        for label in set(nv.nonzero_classes()) | set(brute.nonzero_classes()):
            a = nv.classes.get(label, [0, 0, 0])
            b = brute.classes.get(label, [0] * 7)
            assert a[0] == b[0] and a[1] == b[1], (name, label)
        pages = spectral_pages(P.R, P.mm, 6)
        cor = corollary_dims(pages, brute)
        for label, pairs in cor.items():
            for n, (formula, got) in enumerate(pairs):
                assert formula == got, (name, label, n)
    _report(7, "PASS - H^0/H^1 = CE of the ample algebroid and the H^2/H^3 "
               "direct-sum formulas hold on every spec")


def test_criterion_08_transitive_naive():
    """For transitive specs the standard and naive cohomology dimensions
    agree in degrees <= 6."""
    for name in ["hyperbolic2", "so3", "lie-double-sl2", "t3-exact(1)"]:
        P = get_pipe(name)
        nv = naive_cohomology(P.R, P.mm.d_ce, 6, anchor_factor=P.mm.dual_factor)
        assert not compare_reports(_brute(P), nv), name
    _report(8, "PASS - standard = naive cohomology on all transitive specs")


def test_criterion_09_kronecker(capsys):
    """Symbolic slope: dim H^n = 1 for 0 <= n <= 6 in the character model.
    Rational slope with truncation N: dimensions grow linearly in N, flagged
    approximate.  The report prints both leafwise H^1 values (character model
    1, smooth irrational model 0) instead of asserting either."""
    P = get_pipe("t2-kronecker(nu)")
    assert _brute(P).totals() == [1] * 7
    Q = get_pipe("t2-kronecker(2/3)")
    allowed = list(range(len(Q.R.algebra.gens)))
    dims = []
    for N in (3, 6, 9):
        tr = truncated_cohomology(Q.R, Q.dE, allowed, 4, N)
        assert tr.approximate
        dims.append(tr.totals()[0])
    assert dims == [3, 5, 7]
    assert dims[1] - dims[0] == dims[2] - dims[1] > 0
    rc = cli.main(["betti", "--catalog", "t2-kronecker(nu)"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "dim H^1_CE(F) = 1" in out
    assert "smooth-foliation value is 0" in out
    assert "neither model's number is asserted" in out
    _report(9, "PASS - symbolic slope gives dim H^n = 1 (n <= 6); rational "
               "truncations grow linearly and are flagged approximate; the "
               "report prints both leafwise H^1 values with the caveat")


def test_criterion_10_class_invariance():
    """Two distinct connection triples on the same spec give cohomologous
    transgression representatives (a primitive gamma is found and e^gamma
    conjugates the differentials); on the twisted circle bundle the class
    itself is certified nonzero."""
    P = get_pipe("so3-circle(1)")
    rng = random.Random(4242)
    found = 0
    for _ in range(3):
        spec2 = respec_with_triple(P.spec, perturbed_triple(P.spec, rng))
        R2 = build_rothstein(spec2)
        ham2 = build_theta(R2)
        mm2 = build_minimal_model(R2, ham2, build_ample(spec2),
                                  dE=d_standard(R2, ham2))
        c2 = {m: GradedElement(P.R.algebra, dict(c.terms))
              for m, c in mm2.dT_cubics.items()}
        g = gauge_primitive(P.mm, P.mm.dT_cubics, c2)
        assert g is not None
        for m in g:
            assert P.mm.d_ce(g[m]) == c2[m] - P.mm.dT_cubics[m]
        found += 1
    assert found == 3
    doubled = {m: c.scale(2) for m, c in P.mm.dT_cubics.items()}
    assert gauge_primitive(P.mm, P.mm.dT_cubics, doubled) is None
    _report(10, "PASS - connection-triple changes are gauge-trivial "
                "(primitives found and verified); [d_T] != 0 certified on "
                "the twisted circle bundle")


def test_criterion_11_lie_double():
    """The A + A* model over a point: brute standard cohomology equals the
    sum of CE cohomologies with exterior-power coefficients (computed by an
    independent module oracle), and the transgression representative equals
    the negative basic curvature (vacuously over a point, substantively on
    the torus fixture)."""
    P = get_pipe("lie-double-sl2")
    per_l = {l: sl2_module_ce_dims(l) for l in range(4)}
    want = [0] * 7
    for l, dims in per_l.items():
        for k, v in enumerate(dims):
            want[k + l] += v
    assert _brute(P).totals() == want == [1, 0, 0, 2, 0, 0, 1]
    assert P.mm.dT_cubics == {}  # B = 0: -R^bas comparison is vacuous
    # substantive basic-curvature instance on the A + A* torus fixture
    import itertools
    from courantcoh.fields import QQ
    from courantcoh.model import TorusBase, cs_make, validate_courant_axioms
    from courantcoh.liealgebroid import (lie_algebroid_courant_spec,
                                         basic_curvature_form)
    base = TorusBase(QQ, 2, [(1, 0)], [1])
    spec = lie_algebroid_courant_spec(
        "ax-t2", QQ, base, k_rank=1, leaf_brackets={},
        leaf_action={(0, 0): {0: cs_make(QQ, 2, [((0, 1), 1)])}},
        k_brackets={}, nablaB_K={},
        grading_hint=[((1, 0), {}), ((0, 1), {})])
    assert validate_courant_axioms(spec).ok()
    R = build_rothstein(spec)
    ham = build_theta(R)
    mm = build_minimal_model(R, ham, build_ample(spec),
                             dE=d_standard(R, ham))
    val = basic_curvature_form(spec, 0)
    values = {}
    for tup in itertools.combinations(sorted(R.odd), 3):
        v = val(*[R.frame_section(g) for g in tup])
        if v:
            values[tup] = v
    rbas = R.converter.element_from_values(3, values, "bracket")
    assert mm.dT_cubics[0] == rbas.scale(-1) and not rbas.is_zero()
    _report(11, "PASS - A+A* cohomology equals the module-oracle sum; the "
                "transgression equals the negative basic curvature")
