"""Command-line interface.

Subcommands: validate, master, contraction, minimal, betti, pages, compare,
all.  Specs come from the built-in catalog (--catalog NAME) or a JSON spec
file (--spec PATH).  Exit codes: 0 all checks pass, 1 a check fails, 2 input
error.
"""

from __future__ import annotations

import argparse
import sys

from .catalog import catalog, CATALOG_NAMES
from .specfile import load_spec, SpecFileError, AxiomError
from .model import (validate_quadratic_bundle, validate_courant_axioms,
                    build_ample)
from .rothstein import (build_rothstein, build_theta, master_equation_check,
                        d_standard)
from .contraction import (build_contraction, verify_contraction_semifull,
                          phi_theta_check)
from .minimal_model import build_minimal_model, lambda_brackets
from .cohomology import (brute_standard_cohomology, minimal_model_cohomology,
                         naive_cohomology, truncated_cohomology, compare_reports,
                         spectral_pages, corollary_dims)
from .reports import Report, betti_section, format_label


class Pipeline:
    """Lazy per-spec build chain shared by the subcommands."""

    def __init__(self, spec):
        self.spec = spec
        self._cache = {}

    def rothstein(self):
        if "R" not in self._cache:
            self._cache["R"] = build_rothstein(self.spec)
        return self._cache["R"]

    def ham(self):
        if "ham" not in self._cache:
            self._cache["ham"] = build_theta(self.rothstein())
        return self._cache["ham"]

    def d_e(self):
        if "dE" not in self._cache:
            self._cache["dE"] = d_standard(self.rothstein(), self.ham())
        return self._cache["dE"]

    def ample(self):
        if "amp" not in self._cache:
            self._cache["amp"] = build_ample(self.spec)
        return self._cache["amp"]

    def minimal(self):
        if "mm" not in self._cache:
            self._cache["mm"] = build_minimal_model(
                self.rothstein(), self.ham(), self.ample(), dE=self.d_e())
        return self._cache["mm"]

    def contraction(self):
        if "con" not in self._cache:
            self._cache["con"] = build_contraction(self.rothstein(), self.ham(),
                                                   self.d_e())
        return self._cache["con"]


def cmd_validate(pipe, rep, args):
    sec = rep.section("validation")
    q = validate_quadratic_bundle(pipe.spec.fiber)
    sec.check("quadratic Lie algebra bundle", q.ok(),
              "" if q.ok() else q.failures[0])
    a = validate_courant_axioms(pipe.spec)
    sec.check("Courant axioms", a.ok(), "" if a.ok() else a.failures[0])
    if a.ok():
        try:
            pipe.ample()
            sec.check("ample Lie algebroid Jacobi", True)
        except ValueError as exc:
            sec.check("ample Lie algebroid Jacobi", False, exc)


def cmd_master(pipe, rep, args):
    sec = rep.section("master equation")
    res = master_equation_check(pipe.rothstein(), pipe.ham())
    sec.kv("anchor calibration factor", pipe.ham().anchor_factor)
    if res:
        sec.check("{Theta, Theta} = 0", False, "nonzero residual")
        sec.kv("degree-4 residual", repr(res))
    else:
        sec.check("{Theta, Theta} = 0", True)


def cmd_contraction(pipe, rep, args):
    con = pipe.contraction()
    base = verify_contraction_semifull(con, n_random=args.n_random)
    ext = verify_contraction_semifull(con, n_random=args.n_random, extended=True)
    pt = phi_theta_check(con)
    sec = rep.section("semifull contraction")
    sec.kv("random regular elements per suite", args.n_random)
    sec.check("contraction + semifull identities (regular)", base.ok(),
              "" if base.ok() else base.failures[0])
    sec.check("contraction + semifull identities (extended)", ext.ok(),
              "" if ext.ok() else ext.failures[0])
    sec.check("phi(Theta) equals the intrinsic torsion representative",
              pt.ok(), "" if pt.ok() else pt.failures[0])


def cmd_minimal(pipe, rep, args):
    mm = pipe.minimal()
    sec = rep.section("minimal model")
    sec.check("Q_E^2 = 0 and d_E|b = d_CE + d_T and cocycle identity", True,
              "verified at build time")
    f2, t2, f3, t3 = lambda_brackets(mm, pipe.contraction())
    ok2 = all(f2[k] == t2[k] for k in f2)
    ok3 = all(f3[k] == t3[k] for k in f3)
    sec.check("lambda_2 formulas equal homotopy transfer", ok2)
    sec.check("lambda_3 formulas equal homotopy transfer", ok3)
    sec.kv("generator pairs checked", len(f2))
    sec.kv("generator triples checked", len(f3))


def _kronecker_annotation(spec, sec, naive_result):
    if spec.g_rank == 0 and spec.n_leaf == 1 and spec.base.d == 2:
        h1 = naive_result.totals()[1] if naive_result.n_max >= 1 else 0
        sec.note("leafwise H^1 caveat: in the finite character model the leaf "
                 f"covector class survives, dim H^1_CE(F) = {h1} here")
        sec.note("for an irrational slope the smooth-foliation value is 0 "
                 "(a primitive exists only as an infinite Fourier series, "
                 "outside this model); for a rational slope the smooth value "
                 "is 1 per closed leaf")
        sec.note("both values are reported; neither model's number is asserted "
                 "for the other (open modeling caveat)")


def cmd_betti(pipe, rep, args):
    R = pipe.rothstein()
    n = args.max_degree
    brute = brute_standard_cohomology(R, pipe.d_e(), n,
                                      anchor_factor=pipe.ham().anchor_factor)
    mm = pipe.minimal()
    mini = minimal_model_cohomology(R, mm.q_e, n, anchor_factor=mm.dual_factor)
    nv = naive_cohomology(R, mm.d_ce, n, anchor_factor=mm.dual_factor)
    sec = rep.section("standard cohomology (brute force)")
    betti_section(sec, brute)
    sec2 = rep.section("minimal model cohomology")
    betti_section(sec2, mini)
    sec2.check("equal to brute force", not compare_reports(brute, mini))
    sec3 = rep.section("naive / Chevalley-Eilenberg cohomology of A_E")
    betti_section(sec3, nv)
    _kronecker_annotation(pipe.spec, sec3, nv)
    if args.truncate:
        allowed = list(range(len(R.algebra.gens)))
        try:
            tr = truncated_cohomology(R, pipe.d_e(), allowed, n, args.truncate)
            sec4 = rep.section(f"truncated standard cohomology (|w| <= {args.truncate})")
            betti_section(sec4, tr)
            sec4.kv("total dimensions over the box", tr.totals())
        except ValueError as exc:
            sec4 = rep.section("truncated standard cohomology")
            sec4.check("truncation applicable", False, exc)


def cmd_pages(pipe, rep, args):
    R = pipe.rothstein()
    n = args.max_degree
    mm = pipe.minimal()
    pages = spectral_pages(R, mm, n)
    brute = brute_standard_cohomology(R, pipe.d_e(), n,
                                      anchor_factor=pipe.ham().anchor_factor)
    want = {0, 1, 2} if args.page is None else {args.page}
    for p in sorted(want):
        res = pages.as_result(p)
        sec = rep.section(f"E{p} page totals")
        betti_section(sec, res)
        if p >= 1:
            for label, cp in sorted(pages.per_class.items()):
                dims = cp.e1_dims if p == 1 else cp.e2_dims
                rows = [[str((-l, k + 3 * l)), f"(l={l}, k={k})", dim]
                        for (l, k), dim in sorted(dims.items()) if dim]
                if rows:
                    sec.table(f"class {format_label(label)}: nonzero E{p} slots",
                              ["(p,q)", "(S-degree, CE-degree)", "dim"], rows)
    sec = rep.section("transgression and convergence")
    sec.kv("d1 nonzero", pages.d1_is_nonzero())
    diff = compare_reports(brute, pages.as_result(2))
    sec.check("E2 totals equal brute-force standard cohomology", not diff,
              "" if not diff else diff)
    cor = corollary_dims(pages, brute)
    cor_ok = all(f == g for pairs in cor.values() for f, g in pairs)
    sec.check("low-degree direct-sum formulas (H^0..H^3)", cor_ok,
              "" if cor_ok else cor)


def cmd_compare(pipe, rep, args):
    R = pipe.rothstein()
    n = args.max_degree
    brute = brute_standard_cohomology(R, pipe.d_e(), n,
                                      anchor_factor=pipe.ham().anchor_factor)
    mm = pipe.minimal()
    mini = minimal_model_cohomology(R, mm.q_e, n, anchor_factor=mm.dual_factor)
    pages = spectral_pages(R, mm, n)
    sec = rep.section("cross-validation")
    d1 = compare_reports(brute, mini)
    sec.check("brute force vs minimal model", not d1, "" if not d1 else d1)
    d2 = compare_reports(brute, pages.as_result(2))
    sec.check("brute force vs E2 totals", not d2, "" if not d2 else d2)
    sec.table("brute-force totals", ["n"] + list(range(n + 1)),
              [["dim"] + brute.totals()])


COMMANDS = {
    "validate": (cmd_validate,),
    "master": (cmd_master,),
    "contraction": (cmd_contraction,),
    "minimal": (cmd_minimal,),
    "betti": (cmd_betti,),
    "pages": (cmd_pages,),
    "compare": (cmd_compare,),
    "all": (cmd_validate, cmd_master, cmd_contraction, cmd_minimal, cmd_betti,
            cmd_pages, cmd_compare),
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="courantcoh",
        description="exact standard-cohomology engine for presented regular "
                    "Courant algebroids")
    parser.add_argument("command", choices=sorted(COMMANDS))
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", help="built-in spec name, e.g. 't4-twisted(1)'; "
                                       f"known: {', '.join(CATALOG_NAMES)}")
    src.add_argument("--spec", help="path to a JSON spec file")
    parser.add_argument("--max-degree", type=int, default=6)
    parser.add_argument("--page", type=int, choices=(0, 1, 2), default=None)
    parser.add_argument("--truncate", type=int, default=None)
    parser.add_argument("--n-random", type=int, default=50,
                        help="random elements per contraction suite")
    parser.add_argument("--format", choices=("table", "json"), default="table")
    args = parser.parse_args(argv)

    try:
        if args.catalog:
            spec = catalog(args.catalog)
        else:
            spec = load_spec(args.spec, validate=(args.command not in
                                                  ("master", "validate")))
    except (KeyError, FileNotFoundError, SpecFileError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AxiomError as exc:
        print(f"spec fails validation: {exc}", file=sys.stderr)
        return 1

    task = getattr(spec, "task", {}) or {}
    if args.max_degree == 6 and "max_degree" in task:
        args.max_degree = int(task["max_degree"])
    if args.truncate is None and task.get("truncate"):
        args.truncate = int(task["truncate"])

    rep = Report(f"{spec.name}: {args.command}")
    pipe = Pipeline(spec)
    try:
        for fn in COMMANDS[args.command]:
            fn(pipe, rep, args)
    except ValueError as exc:
        sec = rep.section("error")
        sec.check("pipeline", False, exc)
    print(rep.render_json() if args.format == "json" else rep.render_text())
    return 0 if rep.ok() else 1


if __name__ == "__main__":
    sys.exit(main())
