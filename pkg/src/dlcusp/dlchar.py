"""Cuspidal irreducible characters of GL2 over a small odd field.

Character values are stored exactly, as integer combinations of roots of
unity indexed by discrete-log exponents; complex floats are derived views.
A character object is only handed out after passing a four-part
certification (norm one, correct degree, unipotent-averaged sums vanish,
and invariance under the Frobenius partner exponent), so downstream
consumers can treat "cuspidal" as a checked property rather than a label.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConfigError, ConsistencyError
from .groups import MatrixGroup, _m_inv, _m_mul

__all__ = [
    "ConjugacyClass",
    "ConjugacyTable",
    "conjugacy_classes",
    "ClassFunction",
    "general_position_exponents",
    "cuspidal_character",
    "CuspidalCharacter",
]

BRUTE_FORCE_Q = 7


@dataclass(frozen=True)
class ConjugacyClass:
    kind: str  # central | unipotent | split | elliptic
    key: tuple
    rep: tuple
    size: int


class ConjugacyTable:
    """All conjugacy classes of GL2(F_q), with an exact element classifier.

    The canonical classifier reads (trace, det, scalar flag); for q up to
    BRUTE_FORCE_Q the table is also built independently by closing each
    class under conjugation by group generators, and the two partitions
    must agree class by class.
    """

    def __init__(self, group: MatrixGroup):
        if group.kind != "gl2":
            raise ConfigError("conjugacy tables are built for gl2 only")
        self.group = group
        t = group.tower
        q = group.q
        self.n_modulus = t.order(2)
        self._emb_log = {z: t.discrete_log(t.embed(z, 2)) for z in range(1, q)}
        self._squares = {t.base_mul(x, x) for x in range(1, q)}
        classes = []
        for z in range(1, q):
            classes.append(
                ConjugacyClass("central", ("central", z), ((z, 0), (0, z)), 1)
            )
        for z in range(1, q):
            classes.append(
                ConjugacyClass(
                    "unipotent", ("unipotent", z), ((z, 1), (0, z)), q * q - 1
                )
            )
        for a in range(1, q):
            for b in range(a + 1, q):
                classes.append(
                    ConjugacyClass(
                        "split", ("split", (a, b)), ((a, 0), (0, b)), q * q + q
                    )
                )
        seen_elliptic = set()
        for e in range(self.n_modulus):
            if (e * q - e) % self.n_modulus == 0:
                continue  # the eigenvalue would be rational
            key = min(e, (e * q) % self.n_modulus)
            if key in seen_elliptic:
                continue
            seen_elliptic.add(key)
            u = t.generator(2) ** key
            tr, det = self._trace_det_of_eigen(u)
            classes.append(
                ConjugacyClass(
                    "elliptic",
                    ("elliptic", key),
                    ((0, t.base_neg(det)), (1, tr)),
                    q * q - q,
                )
            )
        classes.sort(key=lambda c: (c.kind, c.key))
        self.classes = tuple(classes)
        self.index = {c.key: i for i, c in enumerate(self.classes)}
        assert len(self.classes) == q * q - 1
        assert sum(c.size for c in self.classes) == group.gl2_order
        if q <= BRUTE_FORCE_Q:
            self._cross_check_brute_force()
        self._class_of_cache = {}

    def _trace_det_of_eigen(self, u):
        t = self.group.tower
        uc = u ** self.group.q
        tr = u + uc
        det = u * uc
        assert tr.coeffs[1] == 0 and det.coeffs[1] == 0
        return tr.coeffs[0], det.coeffs[0]

    # -- classification ------------------------------------------------------

    def class_key(self, g) -> tuple:
        t = self.group.tower
        q = self.group.q
        a, b = g[0]
        c, d = g[1]
        if b == 0 and c == 0 and a == d:
            return ("central", a)
        tr = t.base_add(a, d)
        det = t.base_sub(t.base_mul(a, d), t.base_mul(b, c))
        if det == 0:
            raise ConfigError("singular matrix has no class")
        disc = t.base_sub(t.base_mul(tr, tr), t.base_mul(4 % q, det))
        if disc == 0:
            return ("unipotent", t.base_mul(tr, t.base_inv(2)))
        if disc in self._squares:
            s = min(x for x in range(1, q) if t.base_mul(x, x) == disc)
            half = t.base_inv(2)
            r1 = t.base_mul(t.base_add(tr, s), half)
            r2 = t.base_mul(t.base_sub(tr, s), half)
            return ("split", tuple(sorted((r1, r2))))
        s2 = t.sqrt(t.embed(disc, 2))
        half2 = t.scalar(2, 2).inverse()
        u = (t.embed(tr, 2) + s2) * half2
        e = t.discrete_log(u)
        return ("elliptic", min(e, (e * q) % self.n_modulus))

    def class_of(self, g) -> int:
        got = self._class_of_cache.get(g)
        if got is None:
            got = self.index[self.class_key(g)]
            self._class_of_cache[g] = got
        return got

    # -- independent partition ----------------------------------------------

    def _cross_check_brute_force(self):
        group = self.group
        t = group.tower
        gens = group.gl2_generators()
        gen_invs = [_m_inv(t, s) for s in gens]
        remaining = dict.fromkeys(group.gl2_elements())
        found = {}
        for start in group.gl2_elements():
            if start not in remaining:
                continue
            orbit = {start}
            frontier = [start]
            while frontier:
                nxt = []
                for x in frontier:
                    for s, si in zip(gens, gen_invs):
                        y = _m_mul(t, _m_mul(t, s, x), si)
                        if y not in orbit:
                            orbit.add(y)
                            nxt.append(y)
                frontier = nxt
            keys = {self.class_key(x) for x in orbit}
            if len(keys) != 1:
                raise ConsistencyError(
                    "conjugation orbit spans several canonical classes",
                    detail=sorted(keys),
                )
            key = keys.pop()
            if key in found:
                raise ConsistencyError(f"canonical class {key} split into two orbits")
            found[key] = len(orbit)
            for x in orbit:
                remaining.pop(x, None)
        for cls in self.classes:
            if found.get(cls.key) != cls.size:
                raise ConsistencyError(
                    "class size mismatch between partition and formula",
                    detail=(cls.key, found.get(cls.key), cls.size),
                )


def conjugacy_classes(group: MatrixGroup) -> ConjugacyTable:
    table = getattr(group, "_conjugacy_table", None)
    if table is None:
        table = ConjugacyTable(group)
        group._conjugacy_table = table
    return table


# ---------------------------------------------------------------------------
# class functions


class ClassFunction:
    """Exact class function: one {exponent: coefficient} map per class."""

    def __init__(self, table: ConjugacyTable, maps):
        self.table = table
        self.maps = tuple(dict(m) for m in maps)
        if len(self.maps) != len(table.classes):
            raise ConfigError("need one value per conjugacy class")
        n = table.n_modulus
        self._complex = tuple(
            sum(
                c * cmath.exp(2j * math.pi * (e % n) / n)
                for e, c in m.items()
            )
            if m
            else 0j
            for m in self.maps
        )

    def value(self, g) -> complex:
        return self._complex[self.table.class_of(g)]

    def value_by_class(self, i: int) -> complex:
        return self._complex[i]

    def inner(self, other: "ClassFunction") -> complex:
        if other.table is not self.table:
            raise ConfigError("class functions live on different groups")
        order = self.table.group.gl2_order
        acc = 0j
        for cls, v, w in zip(self.table.classes, self._complex, other._complex):
            acc += cls.size * v * w.conjugate()
        return acc / order

    def to_json_dict(self, lambda_exponent: int) -> dict:
        return {
            "q": self.table.group.q,
            "lambda_exponent": lambda_exponent,
            "classes": [
                {
                    "rep": [list(row) for row in cls.rep],
                    "size": cls.size,
                    "value_re": v.real,
                    "value_im": v.imag,
                }
                for cls, v in zip(self.table.classes, self._complex)
            ],
        }


def general_position_exponents(group: MatrixGroup):
    """Frobenius-orbit representatives of regular character exponents.

    Returns sorted pairs (k, k*q mod N) with k the smaller member; there are
    (q^2 - q) / 2 of them.
    """
    q = group.q
    n = group.tower.order(2)
    pairs = []
    seen = set()
    for k in range(1, n):
        if (k * q - k) % n == 0 or k in seen:
            continue
        partner = (k * q) % n
        seen.add(k)
        seen.add(partner)
        pairs.append((k, partner))
    assert len(pairs) == (q * q - q) // 2
    return tuple(pairs)


# ---------------------------------------------------------------------------
# cuspidal characters


@dataclass(frozen=True)
class CuspidalCharacter:
    group: MatrixGroup
    exponent: int
    partner: int
    table: ConjugacyTable
    chi: ClassFunction

    def value(self, g) -> complex:
        return self.chi.value(g)

    def central_log(self, z: int) -> int:
        """Exponent of the central character at the scalar z."""
        return (self.exponent * self.table._emb_log[z]) % self.table.n_modulus

    def to_json_dict(self) -> dict:
        return self.chi.to_json_dict(self.exponent)


def _value_maps(table: ConjugacyTable, k: int):
    n = table.n_modulus
    q = table.group.q
    maps = []
    for cls in table.classes:
        if cls.kind == "central":
            e = (k * table._emb_log[cls.key[1]]) % n
            maps.append({e: q - 1})
        elif cls.kind == "unipotent":
            e = (k * table._emb_log[cls.key[1]]) % n
            maps.append({e: -1})
        elif cls.kind == "split":
            maps.append({})
        else:
            e = cls.key[1]
            m = {}
            for ex in ((k * e) % n, (k * e * q) % n):
                m[ex] = m.get(ex, 0) - 1
            maps.append(m)
    return maps


def cuspidal_character(group: MatrixGroup, k: int, tol: float = 1e-6) -> CuspidalCharacter:
    """The cuspidal character attached to a regular exponent, certified.

    Certification: unit norm, degree q - 1, vanishing unipotent-averaged
    sums at every group element, and exact agreement with the Frobenius
    partner exponent.  A character failing any check is not returned.
    """
    table = conjugacy_classes(group)
    q = group.q
    n = table.n_modulus
    k = k % n
    partner = (k * q) % n
    if (k * q - k) % n == 0:
        raise ConfigError(
            f"exponent {k} is fixed by Frobenius mod {n}; no cuspidal character"
        )
    chi = ClassFunction(table, _value_maps(table, k))
    chi_partner = ClassFunction(table, _value_maps(table, partner))
    if chi.maps != chi_partner.maps:
        raise ConsistencyError(
            "character values depend on the exponent representative",
            detail=(k, partner),
        )
    norm = chi.inner(chi)
    if abs(norm - 1) > tol:
        raise ConsistencyError(f"character norm {norm} is not 1")
    degree = chi.value(((1, 0), (0, 1)))
    if degree != q - 1:
        raise ConsistencyError(f"degree {degree} differs from q - 1 = {q - 1}")
    t = group.tower
    unipotents = [((1, b), (0, 1)) for b in range(q)]
    for g in group.gl2_elements():
        acc = 0j
        for u in unipotents:
            acc += chi.value(_m_mul(t, g, u))
        if abs(acc) > tol:
            raise ConsistencyError(
                f"unipotent-averaged sum {acc} does not vanish", detail=g
            )
    return CuspidalCharacter(group, k, partner, table, chi)
