"""The regular-to-naive semifull contraction and its Rothstein extension.

The regular subalgebra consists of monomials with no transverse momenta.  On
it live two module endomorphisms over the xi/r-part:

* ``rho_inverse`` -- the averaged symbol-lowering map sending one x[-2]
  (a pF generator) to the matching x[-1] with prefactor -1/(p+q), where p and
  q count the pF- and x-generators of the monomial;
* ``cnabla_op`` -- contraction-insertion of the torsion along pF slots with
  prefactor 1/(p+q-1) (plain contraction when p+q = 1).

Both extend over the xi/r-part with the Koszul sign of the odd operator
(rho_inverse) or none (cnabla_op, even).  The homotopy is the finite sum
h = sum_k (-1)^k cnabla_op^k rho_inverse; phi = id + h d + d h; psi is the
inclusion of the xi/r-span.  The extension to the whole algebra tensors with
the identity on the transverse-momentum factor.
"""

from __future__ import annotations

import itertools
import random

from .algebra import GradedElement, poisson
from .model import ValidationReport, XI, RR, XX
from . import model as M


class Contraction:
    """The (phi, psi, h) triple for one Rothstein algebra, extended over the
    transverse-momentum factor (h-bar = h tensor id, etc.)."""

    def __init__(self, R, ham, dE):
        self.R = R
        self.ham = ham
        self.dE = dE
        alg = R.algebra
        self._pf = set(R.pF)
        self._pb = set(R.pB)
        self._x = set(R.x)
        self._xset = {g: i for i, g in enumerate(R.x)}
        self._iota = {}
        for i in range(R.spec.n_leaf):
            self._iota[i] = poisson(ham.cnabla, alg.gen(R.x[i]))

    # ---- monomial split helpers ----

    def is_regular(self, elem):
        return all(not (set(mono) & self._pb) for (_, mono) in elem.terms)

    def _split(self, mono):
        """(kerrho part, x part, pF part, pB part) of a sorted monomial."""
        a, y, p, b = [], [], [], []
        for g in mono:
            if g in self._pf:
                p.append(g)
            elif g in self._pb:
                b.append(g)
            elif g in self._x:
                y.append(g)
            else:
                a.append(g)
        return tuple(a), tuple(y), tuple(p), tuple(b)

    # ---- the two module endomorphisms ----

    def rho_inverse(self, elem):
        alg = self.R.algebra
        field = alg.field
        out = alg.zero()
        for (w, mono), c in elem.terms.items():
            a, y, p, b = self._split(mono)
            if b:
                raise ValueError("rho_inverse: element not in the regular subalgebra")
            if not p:
                continue
            pq = len(p) + len(y)
            pref = -(field.one / field.coerce(pq))
            sign = -1 if (len(a) % 2) else 1  # odd operator past the kerrho part
            for t, pg in enumerate(p):
                xg = self.R.x[self.R.pF.index(pg)]
                rest_p = p[:t] + p[t + 1:]
                new = alg.element([(c, w, a + (xg,) + y + rest_p)])
                out = out + new.scale(pref * field.coerce(sign))
        return out

    def cnabla_op(self, elem):
        alg = self.R.algebra
        field = alg.field
        out = alg.zero()
        for (w, mono), c in elem.terms.items():
            a, y, p, b = self._split(mono)
            if b:
                raise ValueError("cnabla_op: element not in the regular subalgebra")
            if not p:
                continue
            pq = len(p) + len(y)
            pref = field.one if pq == 1 else field.one / field.coerce(pq - 1)
            for t, pg in enumerate(p):
                i = self.R.pF.index(pg)
                iota = self._iota[i]
                if not iota:
                    continue
                rest_p = p[:t] + p[t + 1:]
                pre = GradedElement(alg, {(w, a): c})
                mid = GradedElement(alg, {(alg.zero_weight(), y + rest_p): field.one})
                out = out + (pre * iota * mid).scale(pref)
        return out

    def h(self, elem):
        """h = (1 + cnabla_op)^{-1} rho_inverse, a finite sum termwise."""
        cur = self.rho_inverse(elem)
        out = cur
        sign = 1
        while cur:
            cur = self.cnabla_op(cur)
            sign = -sign
            if cur:
                out = out + cur.scale(sign)
        return out

    def h_bar(self, elem):
        """h tensor id over the transverse-momentum factor."""
        alg = self.R.algebra
        out = alg.zero()
        for (w, mono), c in elem.terms.items():
            a, y, p, b = self._split(mono)
            reg = GradedElement(alg, {(w, a + y + p): c})
            hv = self.h(reg)
            if hv:
                bfac = GradedElement(alg, {(alg.zero_weight(), b): alg.field.one})
                out = out + hv * bfac
        return out

    def phi(self, elem):
        """phi = id + h d + d h on the regular subalgebra."""
        if not self.is_regular(elem):
            raise ValueError("phi: element not in the regular subalgebra")
        return elem + self.h(self.dE(elem)) + self.dE(self.h(elem))

    def phi_bar(self, elem):
        return elem + self.h_bar(self.dE(elem)) + self.dE(self.h_bar(elem))

    def psi(self, elem):
        """The inclusion of C(A_E)-span (and of the minimal model under
        psi-bar): the identity on the shared representation."""
        return elem

    psi_bar = psi

    def in_image(self, elem):
        """Whether elem lies in C(A_E) (xi/r-monomials only)."""
        ker = self._pf | self._pb | self._x
        return all(not (set(mono) & ker) for (_, mono) in elem.terms)

    def in_minimal(self, elem):
        ker = self._pf | self._x
        return all(not (set(mono) & ker) for (_, mono) in elem.terms)


# ---------------------------------------------------------------------------
# verification


def _random_element(alg, rng, gens, max_degree, n_terms):
    out = alg.zero()
    for _ in range(n_terms):
        deg = rng.randint(0, max_degree)
        ids = []
        for _attempt in range(4 * max_degree + 8):
            used = sum(alg.degrees[g] for g in ids)
            if used >= deg or not gens:
                break
            g = rng.choice(gens)
            if alg.parity[g] and g in ids:
                continue
            if used + alg.degrees[g] > deg:
                continue
            ids.append(g)
        w = tuple(rng.randint(-1, 1) for _ in range(alg.d))
        c = rng.randint(-3, 3)
        if c:
            out = out + alg.element([(c, w, ids)])
    return out


def random_regular_element(R, rng, max_degree=6, n_terms=5):
    """Deterministic random element of the regular subalgebra."""
    gens = list(R.xi) + list(R.r) + list(R.x) + list(R.pF)
    return _random_element(R.algebra, rng, gens, max_degree, n_terms)


def random_minimal_element(R, rng, max_degree=6, n_terms=5):
    gens = list(R.xi) + list(R.r) + list(R.pB)
    return _random_element(R.algebra, rng, gens, max_degree, n_terms)


def verify_contraction_semifull(con, n_random=200, seed=20240, max_degree=6,
                                extended=False):
    """All five contraction identities plus the four semifull conditions.

    Checked on every generator of the relevant subalgebra and on seeded
    random elements; everything is exact.
    """
    R = con.R
    alg = R.algebra
    rep = ValidationReport("semifull contraction" + (" (extended)" if extended else ""))
    rng = random.Random(seed)
    d = con.dE
    if extended:
        h, phi, proj_ok = con.h_bar, con.phi_bar, con.in_minimal
        sampler = lambda: random_regular_element(R, rng, max_degree) * \
            _random_bfactor(R, rng)
    else:
        h, phi, proj_ok = con.h, con.phi, con.in_image
        sampler = lambda: random_regular_element(R, rng, max_degree)

    gens = [alg.gen(g) for g in range(len(alg.gens))
            if extended or alg.gens[g].family != "Pmom-B"]
    samples = gens + [sampler() for _ in range(n_random)]
    image_samples = [phi(a) for a in samples[:len(gens) + 20]]

    for idx, a in enumerate(samples):
        label = f"sample {idx}"
        pa = phi(a)
        if not proj_ok(pa):
            rep.fail("phi lands in the image subalgebra", label)
        if h(h(a)):
            rep.fail("h^2 = 0", label)
        if h(d(h(a))) + h(a):
            rep.fail("h d h = -h", label)
        # homotopy identity: h d + d h = psi phi - id
        if h(d(a)) + d(h(a)) != pa - a:
            rep.fail("h d + d h = psi phi - id", label)
        if phi(h(a)):
            rep.fail("phi h = 0", label)
        if phi(d(a)) != d(pa):
            rep.fail("phi is a cochain map", label)
    for idx, x in enumerate(image_samples):
        label = f"image sample {idx}"
        if h(x):
            rep.fail("h psi = 0", label)
        if phi(x) != x:
            rep.fail("phi psi = id", label)
    # Real's semifull conditions
    rng2 = random.Random(seed + 1)
    pairs = list(itertools.combinations(range(len(gens)), 2))[:60]
    pool = [(samples[i], samples[j]) for i, j in pairs]
    pool += [(sampler(), sampler()) for _ in range(40)]
    for idx, (a, b) in enumerate(pool):
        label = f"pair {idx}"
        if h(h(a) * h(b)):
            rep.fail("h(h(a)h(b)) = 0", label)
        if phi(h(a) * h(b)):
            rep.fail("phi(h(a)h(b)) = 0", label)
        x = phi(b)
        if h(h(a) * x):
            rep.fail("h(h(a)psi(x)) = 0", label)
        if phi(h(a) * x):
            rep.fail("phi(h(a)psi(x)) = 0", label)
        if phi(a * x) != phi(a) * x:
            rep.fail("phi(a psi(x)) = phi(a) x", label)
    return rep


def _random_bfactor(R, rng):
    alg = R.algebra
    if not R.pB:
        return alg.scalar(1)
    ids = [rng.choice(R.pB) for _ in range(rng.randint(0, 2))]
    return alg.element([(1, alg.zero_weight(), ids)])


def build_contraction(R, ham, dE):
    return Contraction(R, ham, dE)


def phi_theta_check(con):
    """phi(Theta) against the intrinsic-torsion cubic assembled independently.

    The comparison target is the negative of the characteristic torsion whose
    values on kerrho-free slots are
        -C^G(r,s,t) + g(R(x,y),t) + g(R(y,z),r) + g(R(z,x),s) + H(x,y,z),
    with vanishing F*-contractions.
    """
    R = con.R
    spec = R.spec
    field = spec.field
    rep = ValidationReport("phi(Theta) = -C_E")

    def value(u1, u2, u3):
        parts = []
        for (k, i) in (u1, u2, u3):
            if k == XI:
                return {}
            parts.append((k, i))
        (k1, i1), (k2, i2), (k3, i3) = parts
        out = {}
        if k1 == RR and k2 == RR and k3 == RR:
            for c, v in spec.fiber.bracket_vec(i1, i2).items():
                gv = spec.fiber.g(c, i3)
                if gv:
                    out = M.cs_add(out, M.cs_scale(v, -gv))
            return out
        for (xa, xb, rc) in (((k1, i1), (k2, i2), (k3, i3)),
                             ((k2, i2), (k3, i3), (k1, i1)),
                             ((k3, i3), (k1, i1), (k2, i2))):
            if xa[0] == XX and xb[0] == XX and rc[0] == RR:
                for c, v in spec.dissection.r_vec(xa[1], xb[1]).items():
                    gv = spec.fiber.g(c, rc[1])
                    if gv:
                        out = M.cs_add(out, M.cs_scale(v, gv))
        if k1 == XX and k2 == XX and k3 == XX:
            out = M.cs_add(out, spec.dissection.h_val(i1, i2, i3))
        return out

    frame = sorted(R.odd)
    values = {}
    for tup in itertools.combinations(frame, 3):
        secs = [R.frame_section(g) for g in tup]
        v = value(*secs)
        if v:
            values[tup] = v
    c_e = R.converter.element_from_values(3, values, "bracket")
    got = con.phi(con.ham.theta)
    if got != c_e.scale(-1):
        rep.fail("phi(Theta)", f"got {got!r}, want {(-1) * c_e!r}")
    return rep
