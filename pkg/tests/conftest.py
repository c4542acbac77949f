import pytest

from courantcoh.catalog import catalog as _catalog
from courantcoh.model import build_ample
from courantcoh.rothstein import build_rothstein, build_theta, d_standard
from courantcoh.contraction import build_contraction
from courantcoh.minimal_model import build_minimal_model


class Pipe:
    """Fully built chain for one spec, shared across tests."""

    def __init__(self, spec):
        self.spec = spec
        self.R = build_rothstein(spec)
        self.ham = build_theta(self.R)
        self.dE = d_standard(self.R, self.ham)
        self.amp = build_ample(spec)
        self.mm = build_minimal_model(self.R, self.ham, self.amp, dE=self.dE)
        self.con = build_contraction(self.R, self.ham, self.dE)


_CACHE = {}


def get_pipe(name):
    if name not in _CACHE:
        _CACHE[name] = Pipe(_catalog(name))
    return _CACHE[name]


@pytest.fixture(scope="session")
def pipe():
    return get_pipe


CATALOG = ["hyperbolic2", "so3", "lie-double-sl2", "t2-kronecker(nu)",
           "t2-kronecker(2/3)", "t3-exact(1)", "t4-twisted(1)", "so3-circle(1)"]


def sl2_module_ce_dims(l):
    """Betti numbers of the CE complex of sl2 with values in Lambda^l(sl2),
    built by hand as an independent oracle (evaluation on output tuples:
    (d w)(t) = sum_i (-1)^i t_i . w(t w/o i) + sum_{i<j} (-1)^{i+j}
    w([t_i,t_j] ^ rest))."""
    import itertools as it
    from fractions import Fraction
    from courantcoh.linalg import SparseMatrix, rank

    brk = {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}}

    def bracket(a, b):
        if a == b:
            return {}
        if (a, b) in brk:
            return dict(brk[(a, b)])
        return {c: -v for c, v in brk[(b, a)].items()}

    def ad_matrix(x):
        m = [[Fraction(0)] * 3 for _ in range(3)]
        for b in range(3):
            for c, v in bracket(x, b).items():
                m[c][b] += v
        return m

    ads = [ad_matrix(x) for x in range(3)]

    def wedge_basis(ll):
        return list(it.combinations(range(3), ll))

    def act(x, ll, vec):
        out = {}
        for mono, c in vec.items():
            for pos, b in enumerate(mono):
                for tgt in range(3):
                    v = ads[x][tgt][b]
                    if not v:
                        continue
                    new = list(mono)
                    new[pos] = tgt
                    if len(set(new)) < len(new):
                        continue
                    sgn = 1
                    arr = list(new)
                    for i in range(1, len(arr)):
                        j = i
                        while j > 0 and arr[j - 1] > arr[j]:
                            arr[j - 1], arr[j] = arr[j], arr[j - 1]
                            sgn = -sgn
                            j -= 1
                    key = tuple(arr)
                    out[key] = out.get(key, Fraction(0)) + sgn * c * v
        return {k: v for k, v in out.items() if v}

    class F:
        zero = Fraction(0)
        one = Fraction(1)

        def coerce(self, x):
            return Fraction(x)

    mod = wedge_basis(l)
    mats = {}
    for k in range(4):
        src = [(s, m) for s in it.combinations(range(3), k) for m in mod]
        sindex = {t: i for i, t in enumerate(src)}
        tgt = [(s, m) for s in it.combinations(range(3), k + 1) for m in mod]
        mat = SparseMatrix(F(), len(tgt), len(src))
        for row, (t, m_out) in enumerate(tgt):
            for i in range(len(t)):
                rest = tuple(x for q, x in enumerate(t) if q != i)
                for m_in in mod:
                    v = act(t[i], l, {m_in: Fraction(1)}).get(m_out)
                    if v:
                        mat.add_to(row, sindex[(rest, m_in)], (-1) ** i * v)
            for i in range(len(t)):
                for j in range(i + 1, len(t)):
                    rest = tuple(x for q, x in enumerate(t)
                                 if q not in (i, j))
                    for c, v in bracket(t[i], t[j]).items():
                        if c in rest:
                            continue
                        merged = tuple(sorted((c,) + rest))
                        npos = sum(1 for y in rest if y < c)
                        sgn = (-1) ** (i + j) * (-1) ** npos
                        mat.add_to(row, sindex[(merged, m_out)], sgn * v)
        mats[k] = mat
    for k in range(3):
        assert mats[k + 1].matmul(mats[k]).is_zero()
    rk = {k: rank(m) for k, m in mats.items()}
    sizes = [len(list(it.combinations(range(3), k))) * len(mod)
             for k in range(4)]
    return [sizes[k] - rk.get(k, 0) - rk.get(k - 1, 0) for k in range(4)]
