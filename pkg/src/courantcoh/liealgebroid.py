"""Regular Courant algebroids of the form E = A + A* for a regular Lie
algebroid A, presented through an adapted frame.

The A-frame is adapted to the anchor: sections a_i with rho_A(a_i) = X_i (the
leafwise base frame) and a frame z_k of the characteristic bundle K = ker
rho_A.  The input data are the K-valued brackets

    [a_i, a_j] = leaf_brackets[(i,j)],   [a_i, z_k] = leaf_action[(i,k)],
    [z_k, z_l] = k_brackets[(k,l)],

all with character-sum coefficients.  The induced dissection has fiber
G = K* + K with the half-hyperbolic pairing, H = 0, R = leaf_brackets, and
the G- and B-connections act on K by the bracket/connection data and on K*
by the dual (negative transpose) action.

The module also assembles the basic-curvature representative of the
transgression cochain directly from the underlying Lie algebroid, for the
cross-check against the Courant-side construction.
"""

from __future__ import annotations

from .model import (TorusBase, QuadraticLieAlgebraData, DissectionData,
                    ConnectionTriple, CourantSpec, cs_add, cs_neg, cs_scale,
                    cs_mul, cs_derive, cs_const, XI, RR, XX)


class LieAlgebroidPresentation:
    def __init__(self, field, base, k_rank, leaf_brackets, leaf_action,
                 k_brackets, nablaB_K):
        self.field = field
        self.base = base
        self.k_rank = k_rank
        self.leaf_brackets = {k: {c: dict(v) for c, v in vec.items() if v}
                              for k, vec in leaf_brackets.items()}
        self.leaf_action = {k: {c: dict(v) for c, v in vec.items() if v}
                            for k, vec in leaf_action.items()}
        self.k_brackets = {k: {c: dict(v) for c, v in vec.items() if v}
                           for k, vec in k_brackets.items()}
        self.nablaB_K = {k: {c: dict(v) for c, v in vec.items() if v}
                         for k, vec in nablaB_K.items()}

    def kbr(self, k, l):
        if (k, l) in self.k_brackets:
            return self.k_brackets[(k, l)]
        if (l, k) in self.k_brackets:
            return {c: cs_neg(v) for c, v in self.k_brackets[(l, k)].items()}
        return {}

    def act(self, i, k):
        return self.leaf_action.get((i, k), {})

    def rbr(self, i, j):
        if (i, j) in self.leaf_brackets:
            return self.leaf_brackets[(i, j)]
        if (j, i) in self.leaf_brackets:
            return {c: cs_neg(v) for c, v in self.leaf_brackets[(j, i)].items()}
        return {}

    def nb(self, m, k):
        return self.nablaB_K.get((m, k), {})

    # K-vector helpers -----------------------------------------------------

    def kbr_vec(self, vec1, vec2):
        out = {}
        for k, f in vec1.items():
            for l, h in vec2.items():
                for c, v in self.kbr(k, l).items():
                    out[c] = cs_add(out.get(c, {}), cs_mul(cs_mul(f, h), v))
        return {c: v for c, v in out.items() if v}

    def act_vec(self, i, vec):
        """nabla^A along X_i of a K-vector (with derivative term)."""
        chi = self.base.chi_leaf(i)
        out = {}
        for k, f in vec.items():
            out[k] = cs_add(out.get(k, {}), cs_derive(chi, f, self.field))
            for c, v in self.act(i, k).items():
                out[c] = cs_add(out.get(c, {}), cs_mul(f, v))
        return {c: v for c, v in out.items() if v}

    def nb_vec(self, m, vec):
        """nabla^B along the m-th transverse direction of a K-vector."""
        chi = self.base.chi_trans(m)
        out = {}
        for k, f in vec.items():
            out[k] = cs_add(out.get(k, {}), cs_derive(chi, f, self.field))
            for c, v in self.nb(m, k).items():
                out[c] = cs_add(out.get(c, {}), cs_mul(f, v))
        return {c: v for c, v in out.items() if v}


def lie_algebroid_courant_spec(name, field, base, k_rank, leaf_brackets,
                               leaf_action, k_brackets, nablaB_K=None,
                               nablaF=None, grading_hint=None):
    pres = LieAlgebroidPresentation(field, base, k_rank, leaf_brackets,
                                    leaf_action, k_brackets, nablaB_K or {})
    kk = k_rank
    half = field.one / field.coerce(2)
    # fiber G = K* (indices 0..kk-1) + K (indices kk..2kk-1)
    metric = [[field.zero] * (2 * kk) for _ in range(2 * kk)]
    for a in range(kk):
        metric[a][kk + a] = half
        metric[kk + a][a] = half

    d = base.d
    brackets = {}
    for k in range(kk):
        for l in range(k + 1, kk):
            vec = pres.kbr(k, l)
            if vec:
                brackets[(kk + k, kk + l)] = {kk + c: dict(v) for c, v in vec.items()}
    # [z_k, zeta^b]^G: K*-part -sum_m C^b_{km} zeta^m where [z_k, z_m] = C^c_{km} z_c
    for k in range(kk):
        for b in range(kk):
            vec = {}
            for mzi in range(kk):
                v = pres.kbr(k, mzi).get(b)
                if v:
                    vec[mzi] = cs_neg(v)
            if vec:
                brackets[(b, kk + k)] = {c: cs_neg(v) for c, v in vec.items()}
                # stored as [zeta^b, z_k] = -[z_k, zeta^b]

    nablaG = {}
    for i in range(base.n_leaf):
        for k in range(kk):
            vec = pres.act(i, k)
            if vec:
                nablaG[(i, kk + k)] = {kk + c: dict(v) for c, v in vec.items()}
        for a in range(kk):
            # dual action on K*: nabla_i zeta^a = -sum_m A^a_{im} zeta^m
            vec = {}
            for mzi in range(kk):
                v = pres.act(i, mzi).get(a)
                if v:
                    vec[mzi] = cs_neg(v)
            if vec:
                nablaG[(i, a)] = vec

    R = {}
    for i in range(base.n_leaf):
        for j in range(i + 1, base.n_leaf):
            vec = pres.rbr(i, j)
            if vec:
                R[(i, j)] = {kk + c: dict(v) for c, v in vec.items()}

    nablaB = {}
    for m in range(base.n_trans):
        for k in range(kk):
            vec = pres.nb(m, k)
            if vec:
                nablaB[(m, kk + k)] = {kk + c: dict(v) for c, v in vec.items()}
        for a in range(kk):
            vec = {}
            for mzi in range(kk):
                v = pres.nb(m, mzi).get(a)
                if v:
                    vec[mzi] = cs_neg(v)
            if vec:
                nablaB[(m, a)] = vec

    fiber = QuadraticLieAlgebraData(field, d, 2 * kk, metric, brackets)
    spec = CourantSpec(name, field, base, fiber, DissectionData(nablaG, R, {}),
                       ConnectionTriple(nablaF or {}, nablaB),
                       grading_hint=grading_hint)
    spec.lie53 = pres
    return spec


def basic_curvature_form(spec, m):
    """Trilinear values on A_E-frames of the Gracia-Saz--Mehta representative
    R^bas_{nabla^A}(j(b_m)), embedded as a 3-cochain of A_E = F + K* + K.

    The K-valued 2-form omega(a, a') on the adapted A-frame is

        omega(a_i, a_j) = nabla^B_m R(i,j)
        omega(a_i, z_k) = -R^{nabla^A}(X_i, d_m) z_k
        omega(z_k, z_l) = nabla^B_m [z_k,z_l] - [nabla^B_m z_k, z_l]
                          - [z_k, nabla^B_m z_l]

    (the pr_F[j(b), .] corrections vanish for commuting constant frames), and
    the 3-cochain is the cyclic alternating extension pairing the K-value
    against the K*-slot through g^G.
    """
    pres = spec.lie53
    field = spec.field
    kk = pres.k_rank

    def omega(u, v):
        """K-vector; u, v are A-frame labels ('a', i) or ('z', k)."""
        (ku, iu), (kv, iv) = u, v
        if ku == "a" and kv == "a":
            return pres.nb_vec(m, pres.rbr(iu, iv))
        if ku == "a" and kv == "z":
            # -R^{nabla^A}(X_i, d_m) z_k = -(act_i nb_m - nb_m act_i) z
            z = {iv: cs_const(field, 1, spec.base.d)}
            val = pres.act_vec(iu, pres.nb_vec(m, z))
            val2 = pres.nb_vec(m, pres.act_vec(iu, z))
            return {c: v for c, v in
                    {c: cs_add(val2.get(c, {}), cs_neg(val.get(c, {})))
                     for c in set(val) | set(val2)}.items() if v}
        if ku == "z" and kv == "a":
            return {c: cs_neg(v) for c, v in omega(v, u).items()}
        # (z, z)
        zk = {iu: cs_const(field, 1, spec.base.d)}
        zl = {iv: cs_const(field, 1, spec.base.d)}
        t1 = pres.nb_vec(m, pres.kbr_vec(zk, zl))
        t2 = pres.kbr_vec(pres.nb_vec(m, zk), zl)
        t3 = pres.kbr_vec(zk, pres.nb_vec(m, zl))
        out = dict(t1)
        for c, v in t2.items():
            out[c] = cs_add(out.get(c, {}), cs_neg(v))
        for c, v in t3.items():
            out[c] = cs_add(out.get(c, {}), cs_neg(v))
        return {c: v for c, v in out.items() if v}

    half = field.one / field.coerce(2)

    def to_a_frame(slot):
        kind, i = slot
        if kind == XX:
            return ("a", i)
        if kind == RR and i >= kk:
            return ("z", i - kk)
        return None

    def kstar_index(slot):
        kind, i = slot
        if kind == RR and i < kk:
            return i
        return None

    def value(u, v, w):
        total = {}
        for (p, q, s) in ((u, v, w), (v, w, u), (w, u, v)):
            ap, aq = to_a_frame(p), to_a_frame(q)
            zs = kstar_index(s)
            if ap is None or aq is None or zs is None:
                continue
            om = omega(ap, aq)
            kv = om.get(zs)
            if kv:
                total = cs_add(total, cs_scale(kv, half))
        return total

    return value
