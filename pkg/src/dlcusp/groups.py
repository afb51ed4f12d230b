"""Explicit matrix groups over small odd fields, tori, and involutions.

Everything here is a finite, fully materialized object: group elements are
nested tuples of field codes, tori are explicit element lists with exact
eigenvalue coordinates in the quadratic extension, and involutions carry a
witness matrix that is canonicalized once so orbit bookkeeping is hashing,
not pointwise map comparison.

The two group kinds are ``gl2`` and ``gl2_x_gl2`` (elements of the latter
are pairs).  Only odd q is supported, and enumeration is bounded so every
operation stays at desk scale.
"""

from __future__ import annotations

import os
import random
import warnings
from dataclasses import dataclass

from .errors import ConfigError, ConsistencyError, ResourceBoundError
from .gf import FieldElement, FieldTower, build_field
from .linalg import fq_det, fq_nullspace, fq_solve
from .rootdata import InvolutionOnDatum, TwistedRootDatum, load_datum

__all__ = [
    "GroupSpec",
    "MatrixGroup",
    "TorusEmbedding",
    "TorusCharacterOnT",
    "Involution",
    "OrbitCensus",
    "TOrbit",
    "StabilizerData",
    "build_group",
    "enumerate_group",
    "split_torus",
    "elliptic_torus",
    "named_involution",
    "involution_orbit",
    "fixed_subgroup",
    "stabilizer_data",
    "lie_fixed_det",
    "derived_theta_star",
    "phi_theta_certified",
]

KINDS = ("gl2", "gl2_x_gl2")
Q_BOUND = {"gl2": 13, "gl2_x_gl2": 7}

# census and materialization guards; DL_DISTINCT_BOUND overrides both
ORBIT_CAP = 100_000
MATERIALIZE_CAP = 250_000


def _cap(default: int) -> int:
    env = os.environ.get("DL_DISTINCT_BOUND")
    if env is None:
        return default
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"DL_DISTINCT_BOUND must be an integer, got {env!r}") from None


# ---------------------------------------------------------------------------
# 2x2 code matrices


def _m_mul(t: FieldTower, x, y):
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    mul, add = t.base_mul, t.base_add
    return (
        (add(mul(a, e), mul(b, g)), add(mul(a, f), mul(b, h))),
        (add(mul(c, e), mul(d, g)), add(mul(c, f), mul(d, h))),
    )


def _m_det(t: FieldTower, x) -> int:
    (a, b), (c, d) = x
    return t.base_sub(t.base_mul(a, d), t.base_mul(b, c))


def _m_inv(t: FieldTower, x):
    (a, b), (c, d) = x
    di = t.base_inv(_m_det(t, x))
    mul, neg = t.base_mul, t.base_neg
    return (
        (mul(di, d), mul(di, neg(b))),
        (mul(di, neg(c)), mul(di, a)),
    )


def _m_transpose(x):
    (a, b), (c, d) = x
    return ((a, c), (b, d))


def _m_scale(t: FieldTower, c: int, x):
    return tuple(tuple(t.base_mul(c, v) for v in row) for row in x)


def _m_trace(t: FieldTower, x) -> int:
    return t.base_add(x[0][0], x[1][1])


def _m_identity():
    return ((1, 0), (0, 1))


# same shapes over FieldElement entries, used at extension points


def _e_mul(x, y):
    (a, b), (c, d) = x
    (e, f), (g, h) = y
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def _e_inv(x):
    (a, b), (c, d) = x
    di = (a * d - b * c).inverse()
    return ((d * di, -b * di), (-c * di, a * di))


def _e_transpose(x):
    (a, b), (c, d) = x
    return ((a, c), (b, d))


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class GroupSpec:
    """Which group over which field; validation happens in MatrixGroup."""

    kind: str
    q: int


class MatrixGroup:
    """A fully explicit GL2(F_q) or GL2(F_q) x GL2(F_q)."""

    def __init__(self, kind: str, q: int, degrees=(1, 2)):
        if kind not in KINDS:
            raise ConfigError(f"unknown group kind {kind!r}; known: {', '.join(KINDS)}")
        try:
            tower = build_field(q, degrees)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        gl2_order = (q * q - 1) * (q * q - q)
        order = gl2_order if kind == "gl2" else gl2_order * gl2_order
        if q > Q_BOUND[kind]:
            raise ResourceBoundError(
                f"{kind} with q = {q} exceeds the desk-scale bound {Q_BOUND[kind]}",
                required=order,
            )
        self.spec = GroupSpec(kind, q)
        self.kind = kind
        self.q = q
        self.tower = tower
        self.order = order
        self.gl2_order = gl2_order
        self._elements = None
        self._element_set = None
        self._gl2_elements = None
        self._classes = None

    # -- element arithmetic -------------------------------------------------

    def mul(self, x, y):
        if self.kind == "gl2":
            return _m_mul(self.tower, x, y)
        return (_m_mul(self.tower, x[0], y[0]), _m_mul(self.tower, x[1], y[1]))

    def inv(self, x):
        if self.kind == "gl2":
            return _m_inv(self.tower, x)
        return (_m_inv(self.tower, x[0]), _m_inv(self.tower, x[1]))

    def identity(self):
        if self.kind == "gl2":
            return _m_identity()
        return (_m_identity(), _m_identity())

    def det(self, x):
        if self.kind == "gl2":
            return _m_det(self.tower, x)
        return (_m_det(self.tower, x[0]), _m_det(self.tower, x[1]))

    def contains(self, x) -> bool:
        try:
            if self.kind == "gl2":
                return self._is_gl2(x)
            return len(x) == 2 and self._is_gl2(x[0]) and self._is_gl2(x[1])
        except (TypeError, IndexError):
            return False

    def _is_gl2(self, m) -> bool:
        if len(m) != 2 or any(len(r) != 2 for r in m):
            return False
        if any(not (isinstance(v, int) and 0 <= v < self.q) for r in m for v in r):
            return False
        return _m_det(self.tower, m) != 0

    def scalar(self, z: int):
        m = ((z, 0), (0, z))
        if self.kind == "gl2":
            return m
        return (m, m)

    def center(self):
        """Z(F_q), ordered by scalar code."""
        if self.kind == "gl2":
            return tuple(self.scalar(z) for z in range(1, self.q))
        return tuple(
            (((z1, 0), (0, z1)), ((z2, 0), (0, z2)))
            for z1 in range(1, self.q)
            for z2 in range(1, self.q)
        )

    def is_central(self, x) -> bool:
        if self.kind == "gl2":
            return x[0][1] == 0 and x[1][0] == 0 and x[0][0] == x[1][1] != 0
        return self.is_central_gl2(x[0]) and self.is_central_gl2(x[1])

    def is_central_gl2(self, m) -> bool:
        return m[0][1] == 0 and m[1][0] == 0 and m[0][0] == m[1][1] != 0

    # -- enumeration --------------------------------------------------------

    def gl2_elements(self):
        if self._gl2_elements is None:
            t = self.tower
            out = [
                m
                for m in (
                    ((a, b), (c, d))
                    for a in range(self.q)
                    for b in range(self.q)
                    for c in range(self.q)
                    for d in range(self.q)
                )
                if _m_det(t, m) != 0
            ]
            assert len(out) == self.gl2_order
            self._gl2_elements = tuple(out)
        return self._gl2_elements

    def elements(self):
        if self._elements is None:
            cap = _cap(MATERIALIZE_CAP)
            if self.order > cap:
                raise ResourceBoundError(
                    f"materializing {self.order} elements exceeds the cap {cap}",
                    required=self.order,
                )
            base = self.gl2_elements()
            if self.kind == "gl2":
                self._elements = base
            else:
                self._elements = tuple((x, y) for x in base for y in base)
        return self._elements

    def element_set(self):
        if self._element_set is None:
            self._element_set = frozenset(self.elements())
        return self._element_set

    def gl2_generators(self):
        """Transvections over a p-basis plus one determinant generator."""
        t = self.tower
        p, f = t.p, t.f
        basis = [t.base.embed_int(1)]
        # the base multiplicative generator's powers give an F_p-basis for q = p^f
        gamma = self._base_unit_generator()
        for i in range(1, f):
            basis.append(t.base_mul(basis[-1], gamma))
        gens = []
        for b in basis:
            gens.append(((1, b), (0, 1)))
            gens.append(((1, 0), (b, 1)))
        gens.append(((gamma, 0), (0, 1)))
        return tuple(gens)

    def _base_unit_generator(self) -> int:
        n = self.q - 1
        for c in range(2, self.q):
            x, k = c, 1
            while x != 1:
                x = self.tower.base_mul(x, c)
                k += 1
            if k == n:
                return c
        raise ConsistencyError("no multiplicative generator found")

    def generators(self):
        if self.kind == "gl2":
            return self.gl2_generators()
        one = _m_identity()
        gens = []
        for g in self.gl2_generators():
            gens.append((g, one))
            gens.append((one, g))
        return tuple(gens)

    def random_element(self, rng: random.Random):
        while True:
            m = tuple(
                tuple(rng.randrange(self.q) for _ in range(2)) for _ in range(2)
            )
            if _m_det(self.tower, m) != 0:
                if self.kind == "gl2":
                    return m
                other = self.random_element_gl2(rng)
                return (m, other)

    def random_element_gl2(self, rng: random.Random):
        while True:
            m = tuple(
                tuple(rng.randrange(self.q) for _ in range(2)) for _ in range(2)
            )
            if _m_det(self.tower, m) != 0:
                return m


def build_group(kind: str, q: int) -> MatrixGroup:
    return MatrixGroup(kind, q)


def enumerate_group(group: MatrixGroup):
    """All rational points, lexicographic on entries."""
    return group.elements()


# ---------------------------------------------------------------------------
# tori


class TorusCharacterOnT:
    """A character of T(F_q) given by integer exponents against the exact
    discrete-log coordinates of the torus; all comparisons are integers.

    On an elliptic torus the two coordinates of one factor are the eigenvalue
    and its Frobenius image, so the character with exponents (k1, k2) on one
    factor collapses to the single exponent k1 + q*k2 against the eigenvalue.
    """

    def __init__(self, torus: "TorusEmbedding", exponents):
        self.torus = torus
        n = torus.group.tower.order(2)
        self.modulus = n
        self.exponents = tuple(int(k) % n for k in exponents)
        if len(self.exponents) != torus.coord_count:
            raise ConfigError(
                f"need {torus.coord_count} exponents for this torus, got {len(self.exponents)}"
            )

    def log_value(self, t) -> int:
        logs = self.torus.log_coords(t)
        return sum(k * c for k, c in zip(self.exponents, logs)) % self.modulus

    def value(self, t) -> complex:
        import cmath
        import math

        return cmath.exp(2j * math.pi * self.log_value(t) / self.modulus)

    def factor_exponents(self):
        """One collapsed exponent per elliptic factor."""
        if self.torus.kind != "elliptic":
            raise ConfigError("factor exponents are an elliptic-torus notion")
        q, n = self.torus.group.q, self.modulus
        ks = self.exponents
        return tuple(
            (ks[2 * j] + q * ks[2 * j + 1]) % n for j in range(len(ks) // 2)
        )

    def is_general_position(self) -> bool:
        q, n = self.torus.group.q, self.modulus
        return all((k * q - k) % n != 0 for k in self.factor_exponents())

    def frobenius_partner(self) -> "TorusCharacterOnT":
        q = self.torus.group.q
        return TorusCharacterOnT(self.torus, tuple(k * q for k in self.exponents))

    def inverse(self) -> "TorusCharacterOnT":
        return TorusCharacterOnT(self.torus, tuple(-k for k in self.exponents))

    def is_trivial_on(self, ts) -> bool:
        return all(self.log_value(t) == 0 for t in ts)


class TorusEmbedding:
    """A maximal torus of the group as an explicit element list.

    Exact eigenvalue coordinates live in the quadratic extension: the split
    torus uses its two diagonal entries, the elliptic torus the eigenvalue
    pair (u, u^q) through the basis {1, delta} with delta^2 the canonical
    nonsquare.  Root vectors of the aligned twisted root datum are evaluated
    against these coordinates, one coordinate per lattice basis vector.
    """

    def __init__(self, group: MatrixGroup, kind: str):
        if kind not in ("split", "elliptic"):
            raise ConfigError(f"unknown torus kind {kind!r}")
        self.group = group
        self.kind = kind
        t = group.tower
        q = group.q
        if group.kind == "gl2":
            self.coord_count = 2
            if kind == "split":
                self.datum_name = "gl2_split"
                self.elements = tuple(
                    ((a, 0), (0, b)) for a in range(1, q) for b in range(1, q)
                )
                assert len(self.elements) == (q - 1) ** 2
            else:
                self.datum_name = "gl2_elliptic"
                self.epsilon = t.smallest_nonsquare()
                self.delta = t.sqrt(t.embed(self.epsilon, 2))
                elems = []
                for a in range(q):
                    for b in range(q):
                        m = ((a, t.base_mul(b, self.epsilon)), (b, a))
                        if _m_det(t, m) != 0:
                            elems.append(m)
                self.elements = tuple(sorted(elems))
                assert len(self.elements) == q * q - 1
        else:
            self.coord_count = 4
            if kind != "elliptic":
                raise ConfigError("only the elliptic torus is wired for the product group")
            factor = TorusEmbedding(_gl2_view(group), "elliptic")
            self.factor = factor
            self.datum_name = "gl2xgl2_elliptic"
            self.epsilon = factor.epsilon
            self.delta = factor.delta
            self.elements = tuple(
                (x, y) for x in factor.elements for y in factor.elements
            )
        self.datum: TwistedRootDatum = load_datum(self.datum_name)
        self._set = frozenset(self.elements)
        self._log_cache = {}

    def contains(self, x) -> bool:
        return x in self._set

    # -- coordinates --------------------------------------------------------

    def _gl2_coords(self, m, torus_kind):
        t = self.group.tower
        if torus_kind == "split":
            return (t.embed(m[0][0], 2), t.embed(m[1][1], 2))
        a, b = m[0][0], m[1][0]
        u = t.embed(a, 2) + t.embed(b, 2) * self.delta
        return (u, u**self.group.q)

    def eigen_coords(self, x):
        """Exact coordinate tuple of a torus point (level-2 field elements)."""
        if self.group.kind == "gl2":
            return self._gl2_coords(x, self.kind)
        return self._gl2_coords(x[0], "elliptic") + self._gl2_coords(x[1], "elliptic")

    def log_coords(self, x):
        got = self._log_cache.get(x)
        if got is None:
            t = self.group.tower
            got = tuple(t.discrete_log(c) for c in self.eigen_coords(x))
            self._log_cache[x] = got
        return got

    def root_value(self, root, coords) -> FieldElement:
        acc = self.group.tower.one(2)
        for e, c in zip(root, coords):
            if e:
                acc = acc * c**e
        return acc

    def character(self, exponents) -> TorusCharacterOnT:
        return TorusCharacterOnT(self, exponents)

    # -- extension points ---------------------------------------------------

    def extension_points(self, level: int = 2):
        """All points of the torus over F_{q^level}, as (matrix, coords) pairs.

        Matrices carry FieldElement entries, so involutions apply verbatim.
        """
        t = self.group.tower
        if self.group.kind != "gl2":
            sub = list(self.factor.extension_points(level))
            return [
                ((m1, m2), c1 + c2) for (m1, c1) in sub for (m2, c2) in sub
            ]
        units = list(t.units(level))
        out = []
        if self.kind == "split":
            zero = t.zero(level)
            for x in units:
                for y in units:
                    out.append((((x, zero), (zero, y)), (x, y)))
            return out
        eps = t.embed(self.epsilon, level)
        delta = t.sqrt(eps)
        half = t.scalar(level, 2).inverse()
        for u in units:
            for v in units:
                a = (u + v) * half
                b = (u - v) * half * delta.inverse()
                out.append((((a, b * eps), (b, a)), (u, v)))
        return out


def _gl2_view(group: MatrixGroup) -> MatrixGroup:
    """The gl2 factor of a product group (same field tower, shared caches)."""
    if group.kind == "gl2":
        return group
    view = getattr(group, "_factor_view", None)
    if view is None:
        view = MatrixGroup("gl2", group.q)
        view.tower = group.tower  # share tables
        group._factor_view = view
    return view


def split_torus(group: MatrixGroup) -> TorusEmbedding:
    return TorusEmbedding(group, "split")


def elliptic_torus(group: MatrixGroup) -> TorusEmbedding:
    return TorusEmbedding(group, "elliptic")


# ---------------------------------------------------------------------------
# involutions


def _canonical_witness(tower: FieldTower, m):
    """Scale a witness so its first nonzero row-major entry is 1."""
    for v in (m[0][0], m[0][1], m[1][0], m[1][1]):
        if v:
            return _m_scale(tower, tower.base_inv(v), m)
    raise ConfigError("zero witness matrix")


class Involution:
    """An order-two automorphism with a canonical witness.

    kinds: inner g -> A g A^-1; outer g -> A (t g)^-1-transposed A^-1, i.e.
    g -> A transpose(g)^-1 A^-1; swap (g, h) -> (a h a^-1, a^-1 g a) on the
    product group.  Witnesses are canonical modulo central scaling, which
    identifies automorphisms that are equal as maps.
    """

    def __init__(self, group: MatrixGroup, kind: str, witness):
        self.group = group
        self.kind = kind
        t = group.tower
        if kind == "swap":
            if group.kind != "gl2_x_gl2":
                raise ConfigError("swap involutions need the product group")
            if not _gl2_view(group)._is_gl2(witness):
                raise ConfigError("swap witness must be an invertible 2x2 matrix")
            self.witness = _canonical_witness(t, witness)
        elif kind in ("inner", "outer"):
            if group.kind == "gl2":
                self.witness = self._check_component(witness)
            else:
                if len(witness) != 2:
                    raise ConfigError("product involutions carry a witness pair")
                self.witness = tuple(self._check_component(w) for w in witness)
        else:
            raise ConfigError(f"unknown involution kind {kind!r}")
        self._key = (self.kind, self.witness)

    def _check_component(self, m):
        t = self.group.tower
        if not (len(m) == 2 and all(len(r) == 2 for r in m)) or _m_det(t, m) == 0:
            raise ConfigError("witness must be an invertible 2x2 matrix")
        if self.kind == "inner":
            mm = _m_mul(t, m, m)
            if not self.group.is_central_gl2(mm):
                raise ConfigError("inner witness must square to a central element")
            if self.group.is_central_gl2(m):
                raise ConfigError("inner witness must not be central")
        else:
            mt = _m_transpose(m)
            if mt != m and mt != _m_scale(t, t.base_neg(1), m):
                raise ConfigError("outer witness must be symmetric or antisymmetric")
        return _canonical_witness(t, m)

    # -- the action ---------------------------------------------------------

    def apply(self, g):
        t = self.group.tower
        if self.kind == "swap":
            a = self.witness
            ai = _m_inv(t, a)
            return (
                _m_mul(t, _m_mul(t, a, g[1]), ai),
                _m_mul(t, _m_mul(t, ai, g[0]), a),
            )
        if self.group.kind == "gl2":
            return self._apply_component(self.witness, g)
        return tuple(
            self._apply_component(w, gi) for w, gi in zip(self.witness, g)
        )

    def _apply_component(self, a, g):
        t = self.group.tower
        if self.kind == "inner":
            return _m_mul(t, _m_mul(t, a, g), _m_inv(t, a))
        return _m_mul(t, _m_mul(t, a, _m_inv(t, _m_transpose(g))), _m_inv(t, a))

    def apply_ext(self, g, level: int = 2):
        """The same map on matrices with FieldElement entries."""
        t = self.group.tower
        emb = lambda m: tuple(tuple(t.embed(v, level) for v in row) for row in m)
        if self.kind == "swap":
            a = emb(self.witness)
            ai = _e_inv(a)
            return (_e_mul(_e_mul(a, g[1]), ai), _e_mul(_e_mul(ai, g[0]), a))
        if self.group.kind == "gl2":
            a = emb(self.witness)
            if self.kind == "inner":
                return _e_mul(_e_mul(a, g), _e_inv(a))
            return _e_mul(_e_mul(a, _e_inv(_e_transpose(g))), _e_inv(a))
        out = []
        for w, gi in zip(self.witness, g):
            a = emb(w)
            if self.kind == "inner":
                out.append(_e_mul(_e_mul(a, gi), _e_inv(a)))
            else:
                out.append(_e_mul(_e_mul(a, _e_inv(_e_transpose(gi))), _e_inv(a)))
        return tuple(out)

    def conjugated(self, g) -> "Involution":
        """The involution Int(g) o theta o Int(g)^-1."""
        t = self.group.tower
        if self.kind == "swap":
            a = _m_mul(t, _m_mul(t, g[0], self.witness), _m_inv(t, g[1]))
            return Involution(self.group, "swap", a)
        if self.group.kind == "gl2":
            return Involution(self.group, self.kind, self._conj_component(g, self.witness))
        return Involution(
            self.group,
            self.kind,
            tuple(self._conj_component(gi, w) for gi, w in zip(g, self.witness)),
        )

    def _conj_component(self, g, a):
        t = self.group.tower
        if self.kind == "inner":
            return _m_mul(t, _m_mul(t, g, a), _m_inv(t, g))
        return _m_mul(t, _m_mul(t, g, a), _m_transpose(g))

    def stabilizes(self, torus: TorusEmbedding) -> bool:
        return all(torus.contains(self.apply(t)) for t in torus.elements)

    def __eq__(self, other):
        return isinstance(other, Involution) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Involution({self.kind}, {self.witness})"


def named_involution(group: MatrixGroup, name: str, matrix=None, kind=None) -> Involution:
    q = group.q
    if name == "custom":
        if matrix is None or kind is None:
            raise ConfigError("custom involutions need both a matrix and a kind")
        return Involution(group, kind, matrix)
    if name == "swap":
        return Involution(group, "swap", _m_identity())
    if name == "diag":
        w = ((1, 0), (0, q - 1))
    elif name == "antidiag":
        w = ((0, 1), (1, 0))
    elif name == "transpose-inverse":
        w = _m_identity()
    else:
        raise ConfigError(f"unknown involution name {name!r}")
    k = "outer" if name == "transpose-inverse" else "inner"
    if group.kind == "gl2":
        return Involution(group, k, w)
    return Involution(group, k, (w, w))


# ---------------------------------------------------------------------------
# orbits and stabilizers


@dataclass(frozen=True)
class TOrbit:
    members: tuple
    representative: "Involution"
    stable: bool


@dataclass(frozen=True)
class OrbitCensus:
    seed: "Involution"
    all_members: tuple
    t_orbits: tuple


def involution_orbit(theta0: Involution, torus: TorusEmbedding) -> OrbitCensus:
    """Full conjugation orbit of theta0, partitioned into torus orbits."""
    group = theta0.group
    cap = _cap(ORBIT_CAP)
    gens = group.generators()
    seen = {theta0}
    frontier = [theta0]
    while frontier:
        nxt = []
        for th in frontier:
            for g in gens:
                im = th.conjugated(g)
                if im not in seen:
                    seen.add(im)
                    nxt.append(im)
                    if len(seen) > cap:
                        raise ResourceBoundError(
                            f"involution orbit exceeds the cap {cap}",
                            required=len(seen),
                        )
        frontier = nxt
    members = sorted(seen, key=lambda th: th._key)
    # torus orbit partition
    unassigned = dict.fromkeys(members)
    t_orbits = []
    for th in members:
        if th not in unassigned:
            continue
        orbit = {th}
        for t in torus.elements:
            orbit.add(th.conjugated(t))
        for member in orbit:
            unassigned.pop(member, None)
        orbit = tuple(sorted(orbit, key=lambda x: x._key))
        flags = {member.stabilizes(torus) for member in orbit}
        if len(flags) != 1:
            raise ConsistencyError(
                "torus stability is not constant on a torus orbit",
                detail=[m.witness for m in orbit],
            )
        t_orbits.append(TOrbit(orbit, orbit[0], flags.pop()))
    t_orbits.sort(key=lambda o: o.representative._key)
    return OrbitCensus(theta0, tuple(members), tuple(t_orbits))


def fixed_subgroup(theta: Involution):
    """G^theta(F_q) as an explicit element tuple."""
    group = theta.group
    if group.kind == "gl2":
        return tuple(g for g in group.gl2_elements() if theta.apply(g) == g)
    t = group.tower
    base = _gl2_view(group).gl2_elements()
    if theta.kind == "swap":
        a = theta.witness
        ai = _m_inv(t, a)
        return tuple((g, _m_mul(t, _m_mul(t, ai, g), a)) for g in base)
    view = _gl2_view(group)
    parts = []
    for w in theta.witness:
        comp = Involution(view, theta.kind, w)
        parts.append([g for g in base if comp.apply(g) == g])
    return tuple((x, y) for x in parts[0] for y in parts[1])


@dataclass(frozen=True)
class StabilizerData:
    g_theta_order: int
    g_fixed: tuple
    t_theta: tuple
    fixed_in_t_theta: tuple
    m: int


def _gl2_stabilizer_sets(group: MatrixGroup, theta_component, witness):
    """(G_theta, G^theta) for one gl2 factor by direct filtering."""
    fixed = []
    twisted = []
    for g in group.gl2_elements():
        im = theta_component(g)
        if im == g:
            fixed.append(g)
            twisted.append(g)
        else:
            gi = _m_inv(group.tower, im)
            if group.is_central_gl2(_m_mul(group.tower, g, gi)):
                twisted.append(g)
    return twisted, fixed


def stabilizer_data(theta: Involution, torus: TorusEmbedding) -> StabilizerData:
    """Exact stabilizer bookkeeping and the index m = [G_theta : G^theta T_theta]."""
    group = theta.group
    t = group.tower
    if group.kind == "gl2":
        g_theta, g_fixed = _gl2_stabilizer_sets(
            group, lambda g: theta.apply(g), theta.witness
        )
        g_theta_set = set(g_theta)
        g_theta_order = len(g_theta)
    elif theta.kind == "swap":
        a = theta.witness
        ai = _m_inv(t, a)
        base = _gl2_view(group).gl2_elements()
        g_fixed = [(g, _m_mul(t, _m_mul(t, ai, g), a)) for g in base]
        g_theta = None  # materialized only through its order and a membership test
        g_theta_order = group.gl2_order * (group.q - 1)

        def in_g_theta(x):
            im = theta.apply(x)
            return group.is_central(group.mul(x, group.inv(im)))

        g_theta_set = in_g_theta
    else:
        view = _gl2_view(group)
        per = []
        for i in range(2):
            comp = Involution(view, theta.kind, theta.witness[i])
            per.append(_gl2_stabilizer_sets(view, lambda g: comp.apply(g), comp.witness))
        g_theta = [(x, y) for x in per[0][0] for y in per[1][0]]
        g_fixed = [(x, y) for x in per[0][1] for y in per[1][1]]
        g_theta_set = set(g_theta)
        g_theta_order = len(g_theta)

    member = g_theta_set if callable(g_theta_set) else g_theta_set.__contains__
    t_theta = tuple(x for x in torus.elements if member(x))
    fixed_set = frozenset(g_fixed)
    fixed_in_t = tuple(x for x in t_theta if x in fixed_set)

    prod = len(g_fixed) * len(t_theta)
    if len(fixed_in_t) == 0:
        raise ConsistencyError("identity missing from G^theta intersect T_theta")
    m, rem = divmod(g_theta_order * len(fixed_in_t), len(g_fixed) * len(t_theta))
    if rem:
        raise ConsistencyError(
            "G^theta T_theta does not divide G_theta",
            detail=(g_theta_order, len(g_fixed), len(t_theta), len(fixed_in_t)),
        )
    if prod <= 200_000:
        literal = set()
        mul = group.mul
        for x in g_fixed:
            for y in t_theta:
                literal.add(mul(x, y))
        assert len(literal) * m == g_theta_order, (len(literal), m, g_theta_order)
    if m <= 0:
        raise ConsistencyError(f"nonpositive index m = {m}")
    if m & (m - 1):
        warnings.warn(f"index m = {m} is not a power of two", stacklevel=2)
    return StabilizerData(g_theta_order, tuple(g_fixed), t_theta, fixed_in_t, m)


# ---------------------------------------------------------------------------
# the Lie algebra side


def _lie_dim(group: MatrixGroup) -> int:
    return 4 if group.kind == "gl2" else 8


def _elementary():
    out = []
    for i in range(2):
        for j in range(2):
            m = [[0, 0], [0, 0]]
            m[i][j] = 1
            out.append(tuple(tuple(r) for r in m))
    return out


def _vec(group: MatrixGroup, x):
    if group.kind == "gl2":
        return [x[0][0], x[0][1], x[1][0], x[1][1]]
    return [
        x[0][0][0], x[0][0][1], x[0][1][0], x[0][1][1],
        x[1][0][0], x[1][0][1], x[1][1][0], x[1][1][1],
    ]


def _d_theta(theta: Involution, x):
    """The differential of theta on a Lie algebra element (same tuple shapes)."""
    t = theta.group.tower
    neg = lambda m: _m_scale(t, t.base_neg(1), m)
    if theta.kind == "swap":
        a = theta.witness
        ai = _m_inv(t, a)
        return (
            _m_mul(t, _m_mul(t, a, x[1]), ai),
            _m_mul(t, _m_mul(t, ai, x[0]), a),
        )
    if theta.group.kind == "gl2":
        return _d_theta_component(theta, theta.witness, x)
    return tuple(
        _d_theta_component(theta, w, xi) for w, xi in zip(theta.witness, x)
    )


def _d_theta_component(theta: Involution, a, x):
    t = theta.group.tower
    ai = _m_inv(t, a)
    if theta.kind == "inner":
        return _m_mul(t, _m_mul(t, a, x), ai)
    return _m_scale(t, t.base_neg(1), _m_mul(t, _m_mul(t, a, _m_transpose(x)), ai))


class LieFixedSpace:
    """Basis of the +1 eigenspace of d(theta) on the Lie algebra."""

    def __init__(self, theta: Involution):
        group = theta.group
        t = group.tower
        n = _lie_dim(group)
        if group.kind == "gl2":
            basis_elems = _elementary()
        else:
            zero = ((0, 0), (0, 0))
            basis_elems = [(m, zero) for m in _elementary()] + [
                (zero, m) for m in _elementary()
            ]
        cols = [_vec(group, _d_theta(theta, e)) for e in basis_elems]
        # rows of (d theta - id), acting on coordinate vectors
        rows = [
            [t.base_sub(cols[j][i], 1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        plus = fq_nullspace(rows, t)
        rows_minus = [
            [t.base_add(cols[j][i], 1 if i == j else 0) for j in range(n)]
            for i in range(n)
        ]
        minus = fq_nullspace(rows_minus, t)
        assert len(plus) + len(minus) == n, "d theta is not semisimple with signs"
        self.theta = theta
        self.dimension = len(plus)
        self.vectors = tuple(tuple(v) for v in plus)
        self.basis_elems = basis_elems

    def matrix_of_ad(self, g):
        """Coordinates of Ad(g) restricted to the fixed space."""
        group = self.theta.group
        t = group.tower
        gi = group.inv(g)
        cols = []
        for v in self.vectors:
            x = _unvec(group, v)
            image = group.mul(group.mul(g, x), gi)
            target = _vec(group, image)
            a_rows = [[vec[i] for vec in self.vectors] for i in range(len(target))]
            coords = fq_solve(a_rows, target, t)
            if coords is None:
                raise ConsistencyError("Ad(g) does not preserve the fixed space")
            cols.append(coords)
        n = self.dimension
        return [[cols[j][i] for j in range(n)] for i in range(n)]


def _unvec(group: MatrixGroup, v):
    if group.kind == "gl2":
        return ((v[0], v[1]), (v[2], v[3]))
    return (
        ((v[0], v[1]), (v[2], v[3])),
        ((v[4], v[5]), (v[6], v[7])),
    )


def lie_fixed_det(theta: Involution, g, space: LieFixedSpace | None = None) -> int:
    """det(Ad(g)) on the theta-fixed Lie subalgebra, certified to be a sign."""
    if space is None:
        space = LieFixedSpace(theta)
    t = theta.group.tower
    if space.dimension == 0:
        return 1
    d = fq_det(space.matrix_of_ad(g), t)
    if d == t.base.embed_int(1):
        return 1
    if d == t.base.embed_int(-1):
        return -1
    raise ConsistencyError(f"det Ad is not a sign: code {d}")


# ---------------------------------------------------------------------------
# the lattice shadow of an involution on a torus


def derived_theta_star(theta: Involution, torus: TorusEmbedding) -> InvolutionOnDatum:
    """Recover the lattice involution induced on the torus character lattice.

    Works from extension points whose discrete-log coordinate tuples are the
    unit vectors, so each column of the matrix is read off exactly; the
    result is validated against the aligned datum.
    """
    group = torus.group
    t = group.tower
    if not theta.stabilizes(torus):
        raise ConfigError("involution does not stabilize the torus")
    n = torus.coord_count
    N = t.order(2)
    g2 = t.generator(2)
    one = t.one(2)
    # build the point with coords = unit vector in slot j
    points = []
    for j in range(n):
        coords = tuple(g2 if i == j else one for i in range(n))
        points.append(_point_from_coords(torus, coords))
    rows = [[0] * n for _ in range(n)]
    for k, pt in enumerate(points):
        image = theta.apply_ext(pt)
        coords = _coords_of_ext(torus, image)
        for j in range(n):
            e = t.discrete_log(coords[j]) % N
            if e > N // 2:
                e -= N
            if e not in (-1, 0, 1):
                raise ConsistencyError(
                    f"involution shadow has a non-unimodular exponent {e}"
                )
            # row k of the matrix lists the image exponents of basis slot k
            rows[k][j] = e
    shadow = tuple(tuple(r) for r in rows)
    return InvolutionOnDatum(torus.datum, shadow, name="derived")


def _point_from_coords(torus: TorusEmbedding, coords):
    t = torus.group.tower
    if torus.group.kind != "gl2":
        m1 = _point_from_coords(torus.factor, coords[:2])
        m2 = _point_from_coords(torus.factor, coords[2:])
        return (m1, m2)
    if torus.kind == "split":
        zero = t.zero(2)
        return ((coords[0], zero), (zero, coords[1]))
    u, v = coords
    half = t.scalar(2, 2).inverse()
    a = (u + v) * half
    b = (u - v) * half * torus.delta.inverse()
    eps = t.embed(torus.epsilon, 2)
    return ((a, b * eps), (b, a))


def _coords_of_ext(torus: TorusEmbedding, m):
    t = torus.group.tower
    if torus.group.kind != "gl2":
        return _coords_of_ext(torus.factor, m[0]) + _coords_of_ext(torus.factor, m[1])
    if torus.kind == "split":
        if not (m[0][1].is_zero() and m[1][0].is_zero()):
            raise ConsistencyError("extension image is not in the split torus")
        return (m[0][0], m[1][1])
    a, b = m[0][0], m[1][0]
    eps = t.embed(torus.epsilon, 2)
    if m[0][1] != b * eps or m[1][1] != a:
        raise ConsistencyError("extension image is not in the elliptic torus")
    return (a + b * torus.delta, a - b * torus.delta)


def phi_theta_certified(theta: Involution, torus: TorusEmbedding, level: int = 2):
    """Roots killed by the torus part of theta, certified three ways.

    The set of roots vanishing on T+ = {t theta(t)} over the quadratic
    extension must equal the set of roots negated by the lattice shadow,
    and the centralizer of T+ in the Lie algebra must have dimension
    rank + |the set|.  Returns the sorted root tuple.
    """
    group = torus.group
    t = group.tower
    if level not in t.degrees:
        raise ConfigError(f"tower has no level {level}")
    datum = torus.datum
    shadow = derived_theta_star(theta, torus)
    negated = set(
        a for a in datum.roots if shadow.apply(a) == tuple(-x for x in a)
    )
    # T+ by full enumeration at the extension level
    points = torus.extension_points(level)
    plus = set()
    plus_mats = []
    for m, coords in points:
        tm = _ext_mul(group, m, theta.apply_ext(m, level))
        c2 = _coords_of_ext_level(torus, tm, level)
        key = tuple(x.coeffs for x in c2)
        if key not in plus:
            plus.add(key)
            plus_mats.append((tm, c2))
    vanishing = set()
    for a in datum.roots:
        if all(_root_at(torus, a, c, level) for _, c in plus_mats):
            vanishing.add(a)
    if vanishing != negated:
        raise ConsistencyError(
            "vanishing-on-T+ and negated-by-theta root sets differ",
            detail={"vanishing": sorted(vanishing), "negated": sorted(negated)},
        )
    # centralizer dimension certificate
    dim = _centralizer_dimension(group, [m for m, _ in plus_mats], level)
    if dim != torus.coord_count + len(vanishing):
        raise ConsistencyError(
            "Lie centralizer of T+ has the wrong dimension",
            detail={"dim": dim, "expected": torus.coord_count + len(vanishing)},
        )
    return tuple(sorted(vanishing))


def _root_at(torus, root, coords, level):
    t = torus.group.tower
    acc = t.one(level)
    for e, c in zip(root, coords):
        if e:
            acc = acc * c**e
    return acc == t.one(level)


def _ext_mul(group, x, y):
    if group.kind == "gl2":
        return _e_mul(x, y)
    return (_e_mul(x[0], y[0]), _e_mul(x[1], y[1]))


def _coords_of_ext_level(torus: TorusEmbedding, m, level: int):
    if level == 2:
        return _coords_of_ext(torus, m)
    t = torus.group.tower
    if torus.group.kind != "gl2":
        return _coords_of_ext_level(torus.factor, m[0], level) + _coords_of_ext_level(
            torus.factor, m[1], level
        )
    if torus.kind == "split":
        if not (m[0][1].is_zero() and m[1][0].is_zero()):
            raise ConsistencyError("extension image is not in the split torus")
        return (m[0][0], m[1][1])
    a, b = m[0][0], m[1][0]
    eps = t.embed(torus.epsilon, level)
    delta = t.sqrt(eps)
    if m[0][1] != b * eps or m[1][1] != a:
        raise ConsistencyError("extension image is not in the elliptic torus")
    return (a + b * delta, a - b * delta)


def _centralizer_dimension(group: MatrixGroup, mats, level: int) -> int:
    """dim over F_{q^level} of {X in the Lie algebra : Xs = sX for all s}."""
    t = group.tower
    n = _lie_dim(group)
    basis = [[t.one(level) if i == j else t.zero(level) for j in range(n)] for i in range(n)]
    for s in mats:
        if not basis:
            break
        rows = []
        for vec in basis:
            x = _unvec_ext(group, vec)
            comm = _ext_sub(group, _ext_mul(group, x, s), _ext_mul(group, s, x))
            rows.append(_vec_ext(group, comm))
        # nullspace of the commutator map restricted to the current span
        coeff_rows = [[rows[j][i] for j in range(len(basis))] for i in range(n)]
        null = _fe_nullspace(coeff_rows, t, level)
        basis = [
            [sum((c * v for c, v in zip(co, col)), t.zero(level)) for col in zip(*basis)]
            for co in null
        ]
    return len(basis)


def _unvec_ext(group, v):
    if group.kind == "gl2":
        return ((v[0], v[1]), (v[2], v[3]))
    return (((v[0], v[1]), (v[2], v[3])), ((v[4], v[5]), (v[6], v[7])))


def _vec_ext(group, x):
    if group.kind == "gl2":
        return [x[0][0], x[0][1], x[1][0], x[1][1]]
    return [
        x[0][0][0], x[0][0][1], x[0][1][0], x[0][1][1],
        x[1][0][0], x[1][0][1], x[1][1][0], x[1][1][1],
    ]


def _ext_sub(group, x, y):
    if group.kind == "gl2":
        return tuple(tuple(a - b for a, b in zip(rx, ry)) for rx, ry in zip(x, y))
    return tuple(
        tuple(tuple(a - b for a, b in zip(rx, ry)) for rx, ry in zip(xc, yc))
        for xc, yc in zip(x, y)
    )


def _fe_nullspace(rows, tower, level):
    """Nullspace over F_{q^level} with FieldElement entries; returns coefficient
    vectors for the columns."""
    if not rows:
        return []
    ncols = len(rows[0])
    mat = [list(r) for r in rows]
    zero = tower.zero(level)
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][c] != zero:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = mat[r][c].inverse()
        mat[r] = [v * inv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != zero:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    one = tower.one(level)
    for fc in free:
        v = [zero] * ncols
        v[fc] = one
        for i, pc in enumerate(pivots):
            v[pc] = -mat[i][fc]
        out.append(v)
    return out
