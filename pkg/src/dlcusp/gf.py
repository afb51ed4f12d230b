"""Exact arithmetic in towers of small odd finite fields.

A tower fixes a base field F_q (q = p^f odd) and one extension F_{q^d} per
requested degree d.  Each extension is presented as F_q[y] modulo the
lexicographically smallest monic irreducible polynomial of that degree,
elements as coefficient tuples over the base, and each multiplicative group
by a brute-force discrete-log table for a fixed generator.  Everything stays
small enough (q^d in the thousands) that exhaustive tables beat anything
clever, and exhaustive tables cannot be silently wrong.

Base-field scalars are carried as integer codes 0..q-1.  For prime q the
code is the residue itself; for q = p^f it is the base-p digit encoding of
the coefficient vector in the canonical modulus basis, so code arithmetic
is table-driven.  The matrix layer works directly on these codes.

Multiplicative characters of a level are ``TorusCharacter`` objects: an
exponent k against the canonical generator g, with value g^m -> zeta^(k*m)
for zeta = exp(2*pi*i/(q^d - 1)).  Values are exposed both as complex
numbers and as exact exponents of zeta, so tests that need exactness never
touch floating point.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass

__all__ = [
    "FieldTower",
    "FieldElement",
    "TorusCharacter",
    "build_field",
    "character_eval",
    "discrete_log",
    "legendre_symbol",
]


def _distinct_prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, f) with q = p**f, or None if q is not a prime power."""
    if q < 2:
        return None
    facs = _distinct_prime_factors(q)
    if len(facs) != 1:
        return None
    p = facs[0]
    f = 0
    m = q
    while m > 1:
        m //= p
        f += 1
    return (p, f) if p**f == q else None


# ---------------------------------------------------------------------------
# polynomial helpers over Z/p (digit tuples, low degree first)


def _ptrim(a: tuple[int, ...]) -> tuple[int, ...]:
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return a[:i]


def _pmul(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(tuple(out))


def _pmod(a, m, p):
    """a mod m with m monic, over Z/p."""
    a = list(a)
    dm = len(m) - 1
    while len(a) > dm:
        lead = a[-1] % p
        if lead:
            for i in range(dm + 1):
                a[len(a) - 1 - dm + i] = (a[len(a) - 1 - dm + i] - lead * m[i]) % p
        a.pop()
    return _ptrim(tuple(a))


def _p_divisible(a, b, p):
    """True if monic b divides a over Z/p."""
    return not _pmod(a, b, p)


def _p_irreducible(m, p):
    """Trial division; fine for the tiny degrees used here."""
    deg = len(m) - 1
    if deg <= 0:
        return False
    for d in range(1, deg // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            if _p_divisible(m, tail + (1,), p):
                return False
    return True


def _canonical_irreducible_modp(p: int, deg: int) -> tuple[int, ...]:
    for tail in itertools.product(range(p), repeat=deg):
        m = tail + (1,)
        if _p_irreducible(m, p):
            return m
    raise AssertionError("no irreducible polynomial found")  # unreachable


# ---------------------------------------------------------------------------
# base field F_q on integer codes


class _BaseField:
    """F_q arithmetic on codes 0..q-1; q = p^f, base-p digit encoding."""

    def __init__(self, p: int, f: int):
        self.p = p
        self.f = f
        self.q = p**f
        if f == 1:
            self.modulus = (0, 1)
        else:
            self.modulus = _canonical_irreducible_modp(p, f)
        q = self.q
        self._mul = [[self._raw_mul(a, b) for b in range(q)] for a in range(q)]
        self._add = [[self._raw_add(a, b) for b in range(q)] for a in range(q)]
        self._neg = [self._add_inverse(a) for a in range(q)]
        self._inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul[a][b] == 1:
                    self._inv[a] = b
                    break

    def _digits(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.f):
            out.append(code % self.p)
            code //= self.p
        return _ptrim(tuple(out))

    def _code(self, digits) -> int:
        c = 0
        for d in reversed(digits):
            c = c * self.p + d
        return c

    def _raw_add(self, a, b):
        if self.f == 1:
            return (a + b) % self.p
        da, db = self._digits(a), self._digits(b)
        n = max(len(da), len(db))
        da += (0,) * (n - len(da))
        db += (0,) * (n - len(db))
        return self._code(tuple((x + y) % self.p for x, y in zip(da, db)))

    def _raw_mul(self, a, b):
        if self.f == 1:
            return (a * b) % self.p
        prod = _pmul(self._digits(a), self._digits(b), self.p)
        return self._code(_pmod(prod, self.modulus, self.p))

    def _add_inverse(self, a):
        if self.f == 1:
            return (-a) % self.p
        return self._code(tuple((-d) % self.p for d in self._digits(a)))

    def add(self, a, b):
        return self._add[a][b]

    def sub(self, a, b):
        return self._add[a][self._neg[b]]

    def mul(self, a, b):
        return self._mul[a][b]

    def neg(self, a):
        return self._neg[a]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in the base field")
        return self._inv[a]

    def embed_int(self, n: int) -> int:
        """The scalar n*1, i.e. the image of an ordinary integer."""
        return n % self.p


# ---------------------------------------------------------------------------
# extension levels


class _Level:
    """F_{q^d} over the base: coefficient tuples modulo a fixed monic modulus."""

    def __init__(self, base: _BaseField, degree: int):
        self.base = base
        self.degree = degree
        self.order = base.q**degree - 1
        self.modulus = self._canonical_modulus()
        self.generator_coeffs = self._find_generator()
        self.log = {}
        self.powers = []
        x = self._one()
        for i in range(self.order):
            self.powers.append(x)
            self.log[x] = i
            x = self.mul(x, self.generator_coeffs)
        assert x == self._one(), "generator order is wrong"

    # -- raw coefficient-tuple arithmetic (fixed length d) ------------------

    def _zero(self):
        return (0,) * self.degree

    def _one(self):
        if self.degree == 0:
            raise AssertionError("degree zero level")
        return (1,) + (0,) * (self.degree - 1)

    def add(self, xs, ys):
        b = self.base
        return tuple(b.add(x, y) for x, y in zip(xs, ys))

    def sub(self, xs, ys):
        b = self.base
        return tuple(b.sub(x, y) for x, y in zip(xs, ys))

    def neg(self, xs):
        b = self.base
        return tuple(b.neg(x) for x in xs)

    def scale(self, c, xs):
        b = self.base
        return tuple(b.mul(c, x) for x in xs)

    def mul(self, xs, ys):
        b = self.base
        d = self.degree
        conv = [0] * (2 * d - 1) if d > 1 else [0]
        for i, x in enumerate(xs):
            if x:
                for j, y in enumerate(ys):
                    if y:
                        conv[i + j] = b.add(conv[i + j], b.mul(x, y))
        # reduce modulo the monic modulus
        for k in range(len(conv) - 1, d - 1, -1):
            lead = conv[k]
            if lead:
                conv[k] = 0
                for i in range(d):
                    conv[k - d + i] = b.sub(conv[k - d + i], b.mul(lead, self.modulus[i]))
        return tuple(conv[:d])

    def pow(self, xs, n: int):
        if n < 0:
            return self.pow(self.inv(xs), -n)
        out = self._one()
        acc = xs
        while n:
            if n & 1:
                out = self.mul(out, acc)
            acc = self.mul(acc, acc)
            n >>= 1
        return out

    def inv(self, xs):
        if xs == self._zero():
            raise ZeroDivisionError("inverse of zero")
        return self.pow(xs, self.order - 1)

    # -- construction --------------------------------------------------------

    def _poly_divisible(self, num, den):
        """num, den monic-or-not coefficient tuples over the base, low first."""
        b = self.base
        num = list(num)
        dd = len(den) - 1
        dlead_inv = b.inv(den[-1])
        while len(num) - 1 >= dd:
            lead = b.mul(num[-1], dlead_inv)
            if lead:
                for i in range(dd + 1):
                    j = len(num) - 1 - dd + i
                    num[j] = b.sub(num[j], b.mul(lead, den[i]))
            num.pop()
        return all(c == 0 for c in num)

    def _irreducible(self, m):
        deg = len(m) - 1
        for d in range(1, deg // 2 + 1):
            for tail in itertools.product(range(self.base.q), repeat=d):
                if self._poly_divisible(m, tail + (1,)):
                    return False
        return True

    def _canonical_modulus(self):
        d = self.degree
        for tail in itertools.product(range(self.base.q), repeat=d):
            m = tail + (1,)
            if self._irreducible(m):
                return m
        raise AssertionError("no irreducible modulus found")

    def _find_generator(self):
        n = self.order
        prime_cofactors = [n // r for r in _distinct_prime_factors(n)]
        for tail in itertools.product(range(self.base.q), repeat=self.degree):
            if all(c == 0 for c in tail):
                continue
            if all(self.pow(tail, m) != self._one() for m in prime_cofactors):
                return tail
        raise AssertionError("no generator found")  # unreachable: F_q^d* is cyclic


# ---------------------------------------------------------------------------
# public surface


class FieldElement:
    """An element of one level of a tower; immutable and hashable."""

    __slots__ = ("tower", "level", "coeffs")

    def __init__(self, tower: "FieldTower", level: int, coeffs: tuple[int, ...]):
        self.tower = tower
        self.level = level
        self.coeffs = coeffs

    def _peer(self, other) -> "FieldElement":
        if isinstance(other, int):
            return self.tower.scalar(self.level, other)
        if not isinstance(other, FieldElement):
            raise TypeError(f"cannot combine a field element with {type(other).__name__}")
        if other.tower is not self.tower:
            raise ValueError("elements belong to different towers")
        if other.level != self.level:
            raise ValueError(
                f"elements live at different levels ({self.level} vs {other.level}); "
                "embed through the tower first"
            )
        return other

    def __add__(self, other):
        other = self._peer(other)
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).add(self.coeffs, other.coeffs))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._peer(other)
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).sub(self.coeffs, other.coeffs))

    def __rsub__(self, other):
        return self._peer(other).__sub__(self)

    def __neg__(self):
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).neg(self.coeffs))

    def __mul__(self, other):
        other = self._peer(other)
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._peer(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._peer(other).__truediv__(self)

    def __pow__(self, n: int):
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).pow(self.coeffs, n))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.tower, self.level, self.tower._lv(self.level).inv(self.coeffs))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.tower.scalar(self.level, other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return (
            self.tower is other.tower
            and self.level == other.level
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((id(self.tower), self.level, self.coeffs))

    def __repr__(self):
        q = self.tower.q
        return f"<F_{q}^{self.level} {list(self.coeffs)}>"


class FieldTower:
    """F_q together with one extension F_{q^d} per requested degree."""

    def __init__(self, q: int, degrees):
        pp = _prime_power(q)
        if pp is None:
            raise ValueError(f"q = {q} is not a prime power")
        if q % 2 == 0:
            raise ValueError(f"q = {q} is even; only odd fields are supported")
        if q < 3:
            raise ValueError(f"q = {q} is too small")
        self.p, self.f = pp
        self.q = q
        degs = sorted(set(int(d) for d in degrees) | {1})
        if any(d < 1 for d in degs):
            raise ValueError("extension degrees must be positive")
        self.base = _BaseField(self.p, self.f)
        self.degrees = degs
        self._levels = {d: _Level(self.base, d) for d in degs}

    def _lv(self, level: int) -> _Level:
        try:
            return self._levels[level]
        except KeyError:
            raise ValueError(f"level {level} is not part of this tower") from None

    # -- element constructors ------------------------------------------------

    def element(self, level: int, coeffs) -> FieldElement:
        lv = self._lv(level)
        cs = tuple(int(c) for c in coeffs)
        if len(cs) != level:
            raise ValueError(f"need {level} coefficients, got {len(cs)}")
        if any(not 0 <= c < self.q for c in cs):
            raise ValueError("coefficients must be reduced codes 0..q-1")
        return FieldElement(self, level, cs)

    def zero(self, level: int = 1) -> FieldElement:
        return FieldElement(self, level, self._lv(level)._zero())

    def one(self, level: int = 1) -> FieldElement:
        return FieldElement(self, level, self._lv(level)._one())

    def scalar(self, level: int, n: int) -> FieldElement:
        """The integer scalar n*1 at the given level."""
        return self.embed(self.base.embed_int(n), level)

    def embed(self, x, level: int) -> FieldElement:
        """The canonical embedding F_q -> F_{q^d}; x is a code or a level-1 element."""
        if isinstance(x, FieldElement):
            if x.tower is not self:
                raise ValueError("element belongs to a different tower")
            if x.level != 1:
                raise ValueError("only base elements embed upward")
            code = x.coeffs[0]
        else:
            code = int(x)
            if not 0 <= code < self.q:
                raise ValueError("base code out of range")
        lv = self._lv(level)
        return FieldElement(self, level, (code,) + (0,) * (level - 1))

    def generator(self, level: int) -> FieldElement:
        return FieldElement(self, level, self._lv(level).generator_coeffs)

    def order(self, level: int) -> int:
        """Size of the multiplicative group at this level."""
        return self._lv(level).order

    def modulus(self, level: int) -> tuple[int, ...]:
        return self._lv(level).modulus

    # -- iteration -----------------------------------------------------------

    def elements(self, level: int = 1):
        """All elements in lexicographic coefficient order."""
        for tail in itertools.product(range(self.q), repeat=level):
            yield FieldElement(self, level, tail)

    def units(self, level: int = 1):
        for x in self.elements(level):
            if x:
                yield x

    # -- arithmetic helpers ----------------------------------------------------

    def discrete_log(self, x: FieldElement) -> int:
        if x.tower is not self:
            raise ValueError("element belongs to a different tower")
        if x.is_zero():
            raise ValueError("discrete log of zero")
        return self._lv(x.level).log[x.coeffs]

    def frobenius(self, x: FieldElement) -> FieldElement:
        """The arithmetic Frobenius x -> x^q of the base field."""
        return x**self.q

    def sqrt(self, x: FieldElement) -> FieldElement:
        """The canonical square root: the one with the lex-smaller coefficients."""
        if x.is_zero():
            return x
        roots = sorted(y.coeffs for y in self.units(x.level) if y * y == x)
        if not roots:
            raise ValueError(f"{x!r} is not a square at its level")
        return FieldElement(self, x.level, roots[0])

    def smallest_nonsquare(self) -> int:
        """Code of the first base unit that is not a square in F_q."""
        squares = {self.base.mul(a, a) for a in range(1, self.q)}
        for a in range(1, self.q):
            if a not in squares:
                return a
        raise AssertionError("odd field without a nonsquare")  # unreachable

    # -- base-code helpers for the matrix layer --------------------------------

    def base_add(self, a: int, b: int) -> int:
        return self.base.add(a, b)

    def base_sub(self, a: int, b: int) -> int:
        return self.base.sub(a, b)

    def base_mul(self, a: int, b: int) -> int:
        return self.base.mul(a, b)

    def base_neg(self, a: int) -> int:
        return self.base.neg(a)

    def base_inv(self, a: int) -> int:
        return self.base.inv(a)

    def __repr__(self):
        return f"FieldTower(q={self.q}, degrees={self.degrees})"


@dataclass(frozen=True)
class TorusCharacter:
    """A character of F_{q^d}^*: g^m -> zeta^(k*m) for the canonical generator g."""

    tower: FieldTower
    level: int
    exponent: int

    def __post_init__(self):
        n = self.tower.order(self.level)
        object.__setattr__(self, "exponent", self.exponent % n)

    @property
    def modulus(self) -> int:
        return self.tower.order(self.level)

    def log_value(self, x: FieldElement) -> int:
        """Exact value as an exponent of zeta = exp(2*pi*i/(q^d - 1))."""
        return (self.exponent * self.tower.discrete_log(x)) % self.modulus

    def value(self, x: FieldElement) -> complex:
        return cmath.exp(2j * math.pi * self.log_value(x) / self.modulus)

    def is_general_position(self) -> bool:
        """True when the character and its Frobenius twist differ."""
        n = self.modulus
        return (self.exponent * self.tower.q) % n != self.exponent

    def frobenius_twist(self) -> "TorusCharacter":
        return TorusCharacter(self.tower, self.level, self.exponent * self.tower.q)

    def inverse(self) -> "TorusCharacter":
        return TorusCharacter(self.tower, self.level, -self.exponent)

    def is_trivial_on(self, xs) -> bool:
        return all(self.log_value(x) == 0 for x in xs)


def build_field(q: int, degrees) -> FieldTower:
    """Build the tower F_q together with F_{q^d} for each degree d."""
    return FieldTower(q, degrees)


def character_eval(chi: TorusCharacter, x: FieldElement) -> complex:
    return chi.value(x)


def discrete_log(x: FieldElement) -> int:
    return x.tower.discrete_log(x)


def legendre_symbol(x: FieldElement) -> int:
    """Quadratic residue symbol of a nonzero element, via x^((order)/2)."""
    if x.is_zero():
        raise ValueError("quadratic symbol of zero")
    n = x.tower.order(x.level)
    y = x ** (n // 2)
    if y == x.tower.one(x.level):
        return 1
    if y == -x.tower.one(x.level):
        return -1
    raise AssertionError("x^((q^d-1)/2) is not a sign")  # unreachable in odd fields
