"""Built-in worked examples.

Every entry is a fully presented regular Courant algebroid over a point or a
torus, with a conserved grading used by the cohomology engine.  Parametrized
names are written like ``t4-twisted(2)``, ``t2-kronecker(nu)``,
``t2-kronecker(2/3)``, ``so3-circle(1)``.

A grading hint is a list of rows ``(w_coeffs, {(family, index): coeff})``;
its conservation is re-verified at build time, never assumed.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import QQ, FunctionField
from .algebra import FDUAL, GFIBER, FFIBER, PMOM_F, PMOM_B
from .model import (TorusBase, QuadraticLieAlgebraData, DissectionData,
                    ConnectionTriple, CourantSpec, cs_make)

CATALOG_NAMES = (
    "hyperbolic2", "so3", "lie-double-sl2", "t2-kronecker(nu)",
    "t2-kronecker(p/q)", "t3-exact(c)", "t4-twisted(n)", "so3-circle(n)",
)


def hyperbolic2():
    base = TorusBase(QQ, 0, [], [])
    fiber = QuadraticLieAlgebraData(QQ, 0, 2, [[0, 1], [1, 0]], {})
    return CourantSpec("hyperbolic2", QQ, base, fiber, DissectionData(),
                       ConnectionTriple(), grading_hint=[])


def _epsilon_brackets(field, d, scale_cs=None):
    """so(3) structure constants, optionally scaled by a character sum."""
    one = cs_make(field, d, [(((0,) * d), 1)]) if scale_cs is None else scale_cs
    return {(0, 1): {2: dict(one)}, (1, 2): {0: dict(one)}, (0, 2): {1: {w: -c for w, c in one.items()}}}


def so3():
    base = TorusBase(QQ, 0, [], [])
    fiber = QuadraticLieAlgebraData(QQ, 0, 3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                                    _epsilon_brackets(QQ, 0))
    return CourantSpec("so3", QQ, base, fiber, DissectionData(),
                       ConnectionTriple(), grading_hint=[])


def so3_bad_metric():
    """Negative control: g = diag(1,1,-1) is not ad-invariant for so(3)."""
    base = TorusBase(QQ, 0, [], [])
    fiber = QuadraticLieAlgebraData(QQ, 0, 3, [[1, 0, 0], [0, 1, 0], [0, 0, -1]],
                                    _epsilon_brackets(QQ, 0))
    return CourantSpec("so3-bad-metric", QQ, base, fiber, DissectionData(),
                       ConnectionTriple(), grading_hint=[])


def _sl2_constants():
    """sl2 with basis (h, e, f): [h,e]=2e, [h,f]=-2f, [e,f]=h."""
    return {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}}


def lie_double_sl2():
    """E = g + g* over a point for g = sl2: the fiber is the semidirect
    double g x g* with the coadjoint action and the half-hyperbolic pairing."""
    from .liealgebroid import lie_algebroid_courant_spec
    base = TorusBase(QQ, 0, [], [])
    kbrk = {(k, l): {c: cs_make(QQ, 0, [((), v)]) for c, v in vec.items()}
            for (k, l), vec in _sl2_constants().items()}
    return lie_algebroid_courant_spec(
        "lie-double-sl2", QQ, base, k_rank=3, leaf_brackets={}, leaf_action={},
        k_brackets=kbrk, nablaB_K={}, grading_hint=[])


def t2_kronecker(slope=None):
    """F spanned by (1, nu) on the 2-torus; E = F* + F (G = 0).

    ``slope`` None means the symbolic transcendental nu (field QQ(nu));
    a Fraction gives the rational-slope model over QQ.
    """
    if slope is None:
        field = FunctionField("nu")
        nu = field.symbol("nu")
        name = "t2-kronecker(nu)"
    else:
        field = QQ
        nu = field.coerce(Fraction(slope))
        name = f"t2-kronecker({Fraction(slope)})"
    base = TorusBase(field, 2, [(field.one, nu)], [1])
    fiber = QuadraticLieAlgebraData(field, 2, 0, [], {})
    grading = [((1, 0), {}), ((0, 1), {})]
    return CourantSpec(name, field, base, fiber, DissectionData(),
                       ConnectionTriple(), grading_hint=grading)


def t3_exact(c=1):
    """Transitive exact Courant algebroid over T^3 with constant 3-form flux."""
    c = Fraction(c)
    base = TorusBase(QQ, 3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [])
    fiber = QuadraticLieAlgebraData(QQ, 3, 0, [], {})
    H = {(0, 1, 2): cs_make(QQ, 3, [((0, 0, 0), c)])}
    grading = [((1, 0, 0), {}), ((0, 1, 0), {}), ((0, 0, 1), {})]
    return CourantSpec(f"t3-exact({c})", QQ, base, fiber, DissectionData(H=H),
                       ConnectionTriple(), grading_hint=grading)


def broken_t3():
    """The literal negative control: H = e_(0,0,1) dx1^dx2^dx3 on the fully
    transitive T^3 model.  Every 3-form on a rank-3 leafwise frame is
    leafwise-closed, so this spec actually satisfies the Courant axioms; see
    the broken_t4 control for a genuinely failing master equation."""
    base = TorusBase(QQ, 3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [])
    fiber = QuadraticLieAlgebraData(QQ, 3, 0, [], {})
    H = {(0, 1, 2): cs_make(QQ, 3, [((0, 0, 1), 1)])}
    return CourantSpec("broken-t3", QQ, base, fiber, DissectionData(H=H),
                       ConnectionTriple(), grading_hint=None)


def broken_t4():
    """Genuine negative control: fully transitive T^4 with a non-closed
    leafwise 3-form H = e_(0,0,0,1) dx1^dx2^dx3; the master equation fails
    with residual proportional to d_F H."""
    base = TorusBase(QQ, 4, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)], [])
    fiber = QuadraticLieAlgebraData(QQ, 4, 0, [], {})
    H = {(0, 1, 2): cs_make(QQ, 4, [((0, 0, 0, 1), 1)])}
    return CourantSpec("broken-t4", QQ, base, fiber, DissectionData(H=H),
                       ConnectionTriple(), grading_hint=None)


def t4_twisted(n=1):
    """Generalized exact over T^4: F = <d1,d2,d3>, B = <d4>,
    H = e_(0,0,0,n) dx1^dx2^dx3.  The transgression class is nonzero for
    n != 0."""
    n = int(n)
    base = TorusBase(QQ, 4, [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)], [3])
    fiber = QuadraticLieAlgebraData(QQ, 4, 0, [], {})
    H = {(0, 1, 2): cs_make(QQ, 4, [((0, 0, 0, n), 1)])}
    counts = {}
    for i in range(3):
        counts[(FFIBER, i)] = Fraction(n)
        counts[(PMOM_F, i)] = Fraction(n)
    counts[(PMOM_B, 0)] = Fraction(n)
    grading = [((1, 0, 0, 0), {}), ((0, 1, 0, 0), {}), ((0, 0, 1, 0), {}),
               ((0, 0, 0, 1), counts)]
    return CourantSpec(f"t4-twisted({n})", QQ, base, fiber, DissectionData(H=H),
                       ConnectionTriple(), grading_hint=grading)


def so3_circle(n=1):
    """Bundle of quadratic Lie algebras over the circle: so(3) with structure
    constants twisted by the character e_n.  F = 0, B = <d1>."""
    n = int(n)
    base = TorusBase(QQ, 1, [], [0])
    en = cs_make(QQ, 1, [((n,), 1)])
    fiber = QuadraticLieAlgebraData(QQ, 1, 3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                                    _epsilon_brackets(QQ, 1, en))
    counts = {(GFIBER, a): Fraction(-n) for a in range(3)}
    counts[(PMOM_B, 0)] = Fraction(-2 * n)
    grading = [((1,), counts)]
    return CourantSpec(f"so3-circle({n})", QQ, base, fiber, DissectionData(),
                       ConnectionTriple(), grading_hint=grading)


def _parse_param(text):
    text = text.strip()
    if text in ("nu", "ν"):
        return None
    return Fraction(text)


def catalog(name):
    """Look up a built-in spec; parametrized entries carry their parameter in
    parentheses."""
    name = name.strip()
    if name == "hyperbolic2":
        return hyperbolic2()
    if name == "so3":
        return so3()
    if name == "lie-double-sl2":
        return lie_double_sl2()
    if name.startswith("t2-kronecker(") and name.endswith(")"):
        return t2_kronecker(_parse_param(name[len("t2-kronecker("):-1]))
    if name == "t2-kronecker":
        return t2_kronecker(None)
    if name.startswith("t3-exact(") and name.endswith(")"):
        return t3_exact(Fraction(name[len("t3-exact("):-1]))
    if name == "t3-exact":
        return t3_exact()
    if name.startswith("t4-twisted(") and name.endswith(")"):
        return t4_twisted(int(name[len("t4-twisted("):-1]))
    if name == "t4-twisted":
        return t4_twisted()
    if name.startswith("so3-circle(") and name.endswith(")"):
        return so3_circle(int(name[len("so3-circle("):-1]))
    if name == "so3-circle":
        return so3_circle()
    raise KeyError(f"unknown catalog name {name!r}")


def default_catalog_specs():
    """The specs exercised by the acceptance suite."""
    return [hyperbolic2(), so3(), lie_double_sl2(), t2_kronecker(None),
            t2_kronecker(Fraction(2, 3)), t3_exact(1), t4_twisted(1),
            so3_circle(1)]
