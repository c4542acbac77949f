"""Exact coefficient fields.

Everything in the engine runs over an exact field: either the rationals or a
rational function field in finitely many transcendental symbols (e.g. a slope
``nu``).  Multivariate function fields are realized as iterated univariate
ones: QQ(a)(b) = QQ(a, b).

Field elements are plain ``fractions.Fraction`` objects for the rationals and
``RatFunc`` instances for function fields.  Both support ``+ - * /``,
``bool()`` (zero test), ``==`` and ``hash``; zero tests are therefore always
``not x``.  Rational functions are kept reduced: numerator and denominator
coprime, denominator monic.
"""

from __future__ import annotations

from fractions import Fraction


class Rationals:
    """The field QQ, with Fraction elements."""

    symbols: tuple[str, ...] = ()

    @property
    def zero(self):
        return Fraction(0)

    @property
    def one(self):
        return Fraction(1)

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return parse_scalar(self, x)
        raise TypeError(f"cannot coerce {x!r} into QQ")

    def symbol(self, name):
        raise KeyError(f"QQ has no symbol {name!r}")

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash("QQ")


QQ = Rationals()


def _poly_trim(cs):
    n = len(cs)
    while n and not cs[n - 1]:
        n -= 1
    return tuple(cs[:n])


def _poly_add(a, b, base):
    n = max(len(a), len(b))
    z = base.zero
    return _poly_trim([(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z)
                       for i in range(n)])


def _poly_neg(a):
    return tuple(-c for c in a)


def _poly_mul(a, b, base):
    if not a or not b:
        return ()
    z = base.zero
    out = [z] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j, cb in enumerate(b):
            if cb:
                out[i + j] = out[i + j] + ca * cb
    return _poly_trim(out)


def _poly_divmod(a, b, base):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [base.zero] * max(0, len(a) - len(b) + 1)
    r = list(a)
    inv_lead = base.one / b[-1]
    while len(r) >= len(b) and _poly_trim(r):
        r = list(_poly_trim(r))
        if len(r) < len(b):
            break
        c = r[-1] * inv_lead
        k = len(r) - len(b)
        q[k] = c
        for i, cb in enumerate(b):
            r[k + i] = r[k + i] - c * cb
        r = list(_poly_trim(r))
    return _poly_trim(q), _poly_trim(r)


def _poly_gcd(a, b, base):
    x, y = _poly_trim(a), _poly_trim(b)
    while y:
        _, r = _poly_divmod(x, y, base)
        x, y = y, r
    if not x:
        return ()
    inv = base.one / x[-1]
    return tuple(c * inv for c in x)  # monic


class RatFunc:
    """An element num/den of a rational function field, reduced and canonical."""

    __slots__ = ("field", "num", "den")

    def __init__(self, field, num, den):
        self.field = field
        self.num = num
        self.den = den

    def _coerce_other(self, other):
        if isinstance(other, RatFunc) and other.field is self.field:
            return other
        return self.field.coerce(other)

    def __add__(self, other):
        o = self._coerce_other(other)
        f, b = self.field, self.field.base
        num = _poly_add(_poly_mul(self.num, o.den, b), _poly_mul(o.num, self.den, b), b)
        return f._make(num, _poly_mul(self.den, o.den, b))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(self.field, _poly_neg(self.num), self.den)

    def __sub__(self, other):
        return self + (-self._coerce_other(other))

    def __rsub__(self, other):
        return self._coerce_other(other) + (-self)

    def __mul__(self, other):
        o = self._coerce_other(other)
        b = self.field.base
        return self.field._make(_poly_mul(self.num, o.num, b), _poly_mul(self.den, o.den, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce_other(other)
        if not o:
            raise ZeroDivisionError("division by zero in function field")
        b = self.field.base
        return self.field._make(_poly_mul(self.num, o.den, b), _poly_mul(self.den, o.num, b))

    def __rtruediv__(self, other):
        return self._coerce_other(other) / self

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        try:
            o = self._coerce_other(other)
        except (TypeError, KeyError):
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((id(self.field), self.num, self.den))

    def __repr__(self):
        return self.field.format_element(self)


class FunctionField:
    """QQ(sym1, ..., symk), built as an iterated univariate fraction field.

    ``base`` is the coefficient field of the last variable.
    """

    def __init__(self, *names, base=QQ):
        if not names:
            raise ValueError("FunctionField needs at least one symbol")
        field = base
        for name in names[:-1]:
            field = FunctionField(name, base=field)
        self.base = field
        self.var = names[-1]
        self.symbols = tuple(field.symbols) + (self.var,)

    @property
    def zero(self):
        return RatFunc(self, (), (self.base.one,))

    @property
    def one(self):
        return RatFunc(self, (self.base.one,), (self.base.one,))

    def gen(self):
        return RatFunc(self, (self.base.zero, self.base.one), (self.base.one,))

    def symbol(self, name):
        if name == self.var:
            return self.gen()
        return self.coerce(self.base.symbol(name))

    def _make(self, num, den):
        num, den = _poly_trim(num), _poly_trim(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return RatFunc(self, (), (self.base.one,))
        g = _poly_gcd(num, den, self.base)
        if len(g) > 1 or (g and g[0] != self.base.one):
            num, _ = _poly_divmod(num, g, self.base)
            den, _ = _poly_divmod(den, g, self.base)
        inv = self.base.one / den[-1]
        return RatFunc(self, tuple(c * inv for c in num), tuple(c * inv for c in den))

    def coerce(self, x):
        if isinstance(x, RatFunc) and x.field is self:
            return x
        if isinstance(x, str):
            return parse_scalar(self, x)
        if isinstance(x, RatFunc):
            # element of a strictly smaller tower
            b = self.base.coerce(x)
            return RatFunc(self, (b,), (self.base.one,))
        b = self.base.coerce(x)
        if not b:
            return self.zero
        return RatFunc(self, (b,), (self.base.one,))

    def format_element(self, el):
        def fmt_poly(p):
            if not p:
                return "0"
            parts = []
            for i, c in enumerate(p):
                if not c:
                    continue
                cs = str(c)
                if i == 0:
                    parts.append(cs)
                else:
                    v = self.var if i == 1 else f"{self.var}^{i}"
                    parts.append(v if cs == "1" else f"{cs}*{v}")
            return " + ".join(parts)

        if el.den == (self.base.one,):
            return fmt_poly(el.num)
        return f"({fmt_poly(el.num)})/({fmt_poly(el.den)})"

    def __repr__(self):
        return "QQ(" + ", ".join(self.symbols) + ")"

    def __eq__(self, other):
        return isinstance(other, FunctionField) and self.symbols == other.symbols

    def __hash__(self):
        return hash(("FunctionField", self.symbols))


def parse_scalar(field, text):
    """Parse "p/q", "nu", "3/2*nu", and +/- combinations of such tokens.

    This is the exact-literal syntax used by spec files; no floats ever.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty scalar literal")
    # normalize leading sign, then split on +/- at top level
    tokens = []
    cur = ""
    sign = 1
    first = True
    i = 0
    while i < len(s):
        ch = s[i]
        if ch in "+-" and (first or cur.strip()):
            if first and not cur.strip():
                if ch == "-":
                    sign = -sign
                i += 1
                first = False
                continue
            tokens.append((sign, cur))
            cur = ""
            sign = 1 if ch == "+" else -1
            i += 1
            continue
        cur += ch
        first = False
        i += 1
    tokens.append((sign, cur))

    total = field.zero
    for sgn, tok in tokens:
        tok = tok.strip()
        if not tok:
            raise ValueError(f"malformed scalar literal {text!r}")
        val = field.one
        for factor in tok.split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"malformed scalar literal {text!r}")
            if factor[0].isdigit():
                val = val * field.coerce(Fraction(factor))
            else:
                val = val * field.symbol(factor)
        total = total + (val if sgn > 0 else -val)
    return total


def format_scalar(x):
    """Canonical string form for report/spec-file emission."""
    if isinstance(x, Fraction):
        return str(x)
    return repr(x)
