"""Twisted root data and their sign invariants.

A datum is a lattice Z^n, a finite set of roots and coroots in duality, a
positive system, and a unimodular finite-order twist tau encoding how
Frobenius permutes the roots (Frobenius itself is q*tau; the positive
scalar never matters for signs).  The shipped library lives in JSON files
under ``data/``; nothing about a datum is code.

Four independent routes compute the same product of torus and group signs:

1. parity of the positive roots sent negative by the twist,
2. the product over Galois orbits of (-1)^(sign changes around the orbit),
3. parity of the number of Galois orbits,
4. parity of the number of symmetric Galois orbits (orbit = -orbit).

``sigma_product`` runs all four and refuses to answer unless they agree.

An involution on a datum is an integral lattice involution mapping roots to
roots and commuting with the twist.  The roots it negates form the set
``phi_theta``; the epsilon product over Galois orbit representatives of
that set is the lattice-level half of the epsilon character machinery (the
matrix-level half lives in ``groups``).
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError, ConsistencyError
from .linalg import (
    int_det,
    int_mat_mul,
    int_mat_vec,
    int_mat_inverse,
    int_matrix_order,
    int_transpose,
    rational_rank,
)

__all__ = [
    "TwistedRootDatum",
    "GaloisOrbit",
    "InvolutionOnDatum",
    "load_datum",
    "datum_names",
    "with_twist",
    "fq_rank_sigma",
    "sigma_group",
    "galois_orbits",
    "sign_changes",
    "sigma_product",
    "phi_theta",
    "orbit_product",
    "epsilon_product",
    "sub_datum_on",
    "verify_centralizer_sigma",
    "datum_involutions",
    "random_twists",
]

Vec = tuple[int, ...]


def _vneg(v: Vec) -> Vec:
    return tuple(-x for x in v)


def _dot(a: Vec, b: Vec) -> int:
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class TwistedRootDatum:
    """Validated twisted root datum; construction checks every invariant."""

    rank: int
    roots: tuple[Vec, ...]
    coroots: tuple[Vec, ...]
    positive: tuple[int, ...]
    tau: tuple[Vec, ...]
    order: int
    name: str = "anonymous"

    def __post_init__(self):
        n = self.rank
        if n < 1:
            raise ConfigError("rank must be positive")
        if len(self.roots) != len(self.coroots):
            raise ConfigError("roots and coroots must be matched by index")
        for v in self.roots + self.coroots:
            if len(v) != n:
                raise ConfigError("root/coroot length does not match the rank")
        if len(set(self.roots)) != len(self.roots):
            raise ConfigError("duplicate roots")
        root_set = set(self.roots)
        if any(all(x == 0 for x in a) for a in self.roots):
            raise ConfigError("zero is not a root")
        for a in self.roots:
            if _vneg(a) not in root_set:
                raise ConfigError(f"root set is not closed under negation at {a}")
        for a, av in zip(self.roots, self.coroots):
            if _dot(a, av) != 2:
                raise ConfigError(f"<a, a^vee> != 2 at root {a}")
        # reflection closure
        for a, av in zip(self.roots, self.coroots):
            for b in self.roots:
                refl = tuple(x - _dot(b, av) * y for x, y in zip(b, a))
                if refl not in root_set:
                    raise ConfigError(f"reflection of {b} along {a} leaves the root set")
        # positive system
        pos = set(self.positive)
        if len(pos) != len(self.positive):
            raise ConfigError("duplicate positive indices")
        if any(not 0 <= i < len(self.roots) for i in pos):
            raise ConfigError("positive index out of range")
        pos_roots = {self.roots[i] for i in pos}
        if len(pos_roots) * 2 != len(self.roots) or pos_roots | {
            _vneg(a) for a in pos_roots
        } != root_set:
            raise ConfigError("positive system must pick one of each +-pair")
        # the twist
        if len(self.tau) != n or any(len(r) != n for r in self.tau):
            raise ConfigError("tau must be rank x rank")
        d = int_det([list(r) for r in self.tau])
        if d not in (1, -1):
            raise ConfigError(f"tau must be unimodular, det {d}")
        try:
            true_order = int_matrix_order([list(r) for r in self.tau])
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if true_order != self.order:
            raise ConfigError(f"stated order {self.order}, actual {true_order}")
        for a in self.roots:
            if self.tau_apply(a) not in root_set:
                raise ConfigError(f"tau does not permute the roots (fails at {a})")
        # the induced cocharacter map must permute coroots compatibly
        dual = self.tau_dual()
        for a, av in zip(self.roots, self.coroots):
            image = self.tau_apply(a)
            image_co = tuple(int_mat_vec(dual, av))
            if self.coroots[self.roots.index(image)] != image_co:
                raise ConfigError("tau and its dual disagree on the coroot pairing")

    # -- basic geometry ------------------------------------------------------

    def tau_apply(self, v: Vec) -> Vec:
        return tuple(int_mat_vec([list(r) for r in self.tau], v))

    def tau_dual(self) -> list[list[int]]:
        """Matrix of the twist on the cocharacter side (transpose inverse)."""
        return int_transpose(int_mat_inverse([list(r) for r in self.tau]))

    def positive_roots(self) -> tuple[Vec, ...]:
        return tuple(self.roots[i] for i in self.positive)

    def is_positive(self, a: Vec) -> bool:
        return a in set(self.positive_roots())

    def coroot_of(self, a: Vec) -> Vec:
        return self.coroots[self.roots.index(a)]


@dataclass(frozen=True)
class GaloisOrbit:
    """One twist orbit, listed cyclically from its lex-smallest root."""

    elements: tuple[Vec, ...]
    symmetric: bool

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def representative(self) -> Vec:
        return self.elements[0]


def _datum_from_dict(obj, name: str) -> TwistedRootDatum:
    return TwistedRootDatum(
        rank=int(obj["rank"]),
        roots=tuple(tuple(int(x) for x in v) for v in obj["roots"]),
        coroots=tuple(tuple(int(x) for x in v) for v in obj["coroots"]),
        positive=tuple(int(i) for i in obj["positive"]),
        tau=tuple(tuple(int(x) for x in r) for r in obj["tau"]),
        order=int(obj["order"]),
        name=name,
    )


def datum_names() -> list[str]:
    out = []
    for entry in resources.files("dlcusp.data").iterdir():
        if entry.name.endswith(".json"):
            out.append(entry.name[: -len(".json")])
    return sorted(out)


def load_datum(name: str) -> TwistedRootDatum:
    """Load a shipped datum by name, or any datum from a JSON path."""
    if "/" in name or name.endswith(".json"):
        with open(name) as f:
            return _datum_from_dict(json.load(f), name)
    ref = resources.files("dlcusp.data") / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"unknown datum {name!r}; shipped: {', '.join(datum_names())}")
    return _datum_from_dict(json.loads(ref.read_text()), name)


def with_twist(datum: TwistedRootDatum, tau) -> TwistedRootDatum:
    """The same root system under a different twist."""
    tau = tuple(tuple(int(x) for x in r) for r in tau)
    return TwistedRootDatum(
        rank=datum.rank,
        roots=datum.roots,
        coroots=datum.coroots,
        positive=datum.positive,
        tau=tau,
        order=int_matrix_order([list(r) for r in tau]),
        name=f"{datum.name}:retwisted",
    )


# ---------------------------------------------------------------------------
# sign invariants


def fq_rank_sigma(datum: TwistedRootDatum, lattice: str = "character"):
    """(rank, sigma) of the torus: rank of the twist-fixed subspace, sign (-1)^rank."""
    if lattice == "character":
        m = [list(r) for r in datum.tau]
    elif lattice == "cocharacter":
        m = datum.tau_dual()
    else:
        raise ConfigError(f"unknown lattice {lattice!r}")
    n = datum.rank
    delta = [[m[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    rank = n - rational_rank(delta)
    return rank, (-1) ** rank


def sigma_group(datum: TwistedRootDatum) -> int:
    """Sign of the ambient group: torus sign corrected by positives sent negative."""
    _, sigma_t = fq_rank_sigma(datum)
    neg = {_vneg(a) for a in datum.positive_roots()}
    flipped = sum(1 for a in datum.positive_roots() if datum.tau_apply(a) in neg)
    return sigma_t * (-1) ** flipped


def galois_orbits(datum: TwistedRootDatum) -> tuple[GaloisOrbit, ...]:
    seen = set()
    orbits = []
    for a in datum.roots:
        if a in seen:
            continue
        cycle = [a]
        b = datum.tau_apply(a)
        while b != a:
            cycle.append(b)
            b = datum.tau_apply(b)
        seen.update(cycle)
        rep = min(cycle)
        i = cycle.index(rep)
        cycle = cycle[i:] + cycle[:i]
        symmetric = {_vneg(c) for c in cycle} == set(cycle)
        if symmetric:
            d = len(cycle)
            assert d % 2 == 0, "symmetric orbit of odd size"
            for j in range(d // 2):
                assert cycle[j + d // 2] == _vneg(cycle[j]), (
                    "symmetric orbit is not negated by the half twist"
                )
        orbits.append(GaloisOrbit(tuple(cycle), symmetric))
    orbits.sort(key=lambda o: o.representative)
    return tuple(orbits)


def sign_changes(orbit: GaloisOrbit, datum: TwistedRootDatum) -> int:
    """Number of minus-to-plus transitions reading once around the orbit."""
    pos = set(datum.positive_roots())
    labels = [a in pos for a in orbit.elements]
    d = len(labels)
    return sum(1 for i in range(d) if not labels[i] and labels[(i + 1) % d])


def sigma_product(datum: TwistedRootDatum) -> int:
    """sigma(G)*sigma(T) by four routes that must agree exactly."""
    neg = {_vneg(a) for a in datum.positive_roots()}
    flipped = sum(1 for a in datum.positive_roots() if datum.tau_apply(a) in neg)
    orbits = galois_orbits(datum)
    total_changes = sum(sign_changes(o, datum) for o in orbits)
    n_sym = sum(1 for o in orbits if o.symmetric)
    values = {
        "positives_flipped": (-1) ** flipped,
        "sign_changes": (-1) ** total_changes,
        "orbit_count": (-1) ** len(orbits),
        "symmetric_orbit_count": (-1) ** n_sym,
    }
    if len(set(values.values())) != 1:
        raise ConsistencyError(
            f"sigma routes disagree on {datum.name}", detail=values
        )
    # the first two routes agree as exact counts, not just parities
    assert flipped == total_changes, (flipped, total_changes)
    return values["positives_flipped"]


# ---------------------------------------------------------------------------
# involutions on a datum


@dataclass(frozen=True)
class InvolutionOnDatum:
    """An integral lattice involution permuting roots, commuting with the twist."""

    datum: TwistedRootDatum
    matrix: tuple[Vec, ...]
    name: str = "anonymous"

    def __post_init__(self):
        n = self.datum.rank
        m = [list(r) for r in self.matrix]
        if len(m) != n or any(len(r) != n for r in m):
            raise ConfigError("involution matrix must be rank x rank")
        ident = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        if int_mat_mul(m, m) != ident:
            raise ConfigError("matrix does not square to the identity")
        root_set = set(self.datum.roots)
        for a in self.datum.roots:
            if self.apply(a) not in root_set:
                raise ConfigError(f"involution does not permute the roots (fails at {a})")
        tau = [list(r) for r in self.datum.tau]
        if int_mat_mul(m, tau) != int_mat_mul(tau, m):
            raise ConfigError("involution does not commute with the twist")

    def apply(self, v: Vec) -> Vec:
        return tuple(int_mat_vec([list(r) for r in self.matrix], v))


def phi_theta(datum: TwistedRootDatum, theta: InvolutionOnDatum) -> tuple[Vec, ...]:
    """The roots negated by the involution, sorted; always closed under -1."""
    out = tuple(sorted(a for a in datum.roots if theta.apply(a) == _vneg(a)))
    assert all(_vneg(a) in out for a in out)
    return out


def _orbits_within(datum: TwistedRootDatum, subset) -> list[GaloisOrbit]:
    subset = set(subset)
    picked = []
    for orbit in galois_orbits(datum):
        members = set(orbit.elements)
        if members <= subset:
            picked.append(orbit)
        elif members & subset:
            raise ConsistencyError(
                f"root subset is not stable under the twist of {datum.name}",
                detail=sorted(members & subset),
            )
    return picked


def orbit_product(datum: TwistedRootDatum, subset, evaluate) -> int:
    """Product of a(t) over one representative per twist orbit inside ``subset``.

    ``evaluate`` maps a root vector to a field element; all values must be
    their own inverse (they are, whenever the subset is a phi_theta of a
    fixed point), which makes the product a sign and makes the choice of
    representative irrelevant.  Both facts are asserted, not trusted.
    """
    orbits = _orbits_within(datum, subset)
    if not orbits:
        return 1

    def run(pick):
        acc = None
        for orbit in orbits:
            v = evaluate(pick(orbit))
            acc = v if acc is None else acc * v
        return acc

    first = run(lambda o: o.elements[0])
    alt = run(lambda o: o.elements[-1])
    if first != alt:
        raise ConsistencyError("orbit product depends on the representative")
    one = first.tower.one(first.level)
    if first == one:
        return 1
    if first == -one:
        return -1
    raise ConsistencyError(f"orbit product is not a sign: {first!r}")


def epsilon_product(datum: TwistedRootDatum, theta: InvolutionOnDatum, evaluate) -> int:
    """Lattice-level epsilon value: the orbit product over the negated roots."""
    return orbit_product(datum, phi_theta(datum, theta), evaluate)


def sub_datum_on(datum: TwistedRootDatum, subset) -> TwistedRootDatum:
    """The datum on a twist-stable, reflection-closed subset of the roots."""
    subset = sorted(set(subset))
    roots = tuple(subset)
    coroots = tuple(datum.coroot_of(a) for a in roots)
    pos = set(datum.positive_roots())
    positive = tuple(i for i, a in enumerate(roots) if a in pos)
    return TwistedRootDatum(
        rank=datum.rank,
        roots=roots,
        coroots=coroots,
        positive=positive,
        tau=datum.tau,
        order=datum.order,
        name=f"{datum.name}:sub",
    )


def verify_centralizer_sigma(datum: TwistedRootDatum, theta: InvolutionOnDatum) -> int:
    """When the involution fixes no root, the sub-datum on the negated roots
    has the same group sign as the full datum.  Returns the common sign."""
    for a in datum.roots:
        if theta.apply(a) == a:
            raise ConfigError(
                f"involution {theta.name} fixes the root {a}; the sign identity "
                "is only claimed without fixed roots"
            )
    negated = phi_theta(datum, theta)
    _orbits_within(datum, negated)  # twist stability
    full = sigma_group(datum)
    if not negated:
        _, sub = fq_rank_sigma(datum)
    else:
        sub = sigma_group(sub_datum_on(datum, negated))
    if sub != full:
        raise ConsistencyError(
            f"centralizer sign {sub} differs from group sign {full} on {datum.name}",
            detail={"involution": theta.name, "negated_roots": negated},
        )
    return full


# ---------------------------------------------------------------------------
# involution and twist libraries


def _rank2_pool():
    return {
        "id": ((1, 0), (0, 1)),
        "minus_id": ((-1, 0), (0, -1)),
        "swap": ((0, 1), (1, 0)),
        "minus_swap": ((0, -1), (-1, 0)),
    }


def _rank1_pool():
    return {"id": ((1,),), "minus_id": ((-1,),)}


def _rank4_pool():
    blocks = {
        "1": ((1, 0), (0, 1)),
        "-1": ((-1, 0), (0, -1)),
        "w": ((0, 1), (1, 0)),
        "-w": ((0, -1), (-1, 0)),
    }
    pool = {}
    for swap_factors in (False, True):
        for n1, b1 in blocks.items():
            for n2, b2 in blocks.items():
                rows = []
                for i in range(4):
                    row = [0, 0, 0, 0]
                    block, r = (b1, i) if i < 2 else (b2, i - 2)
                    for j in range(2):
                        row[(0 if i < 2 else 2) + j] = block[r % 2][j]
                    rows.append(row)
                if swap_factors:
                    rows = rows[2:] + rows[:2]
                    name = f"exchange({n1},{n2})"
                else:
                    name = f"keep({n1},{n2})"
                pool[name] = tuple(tuple(r) for r in rows)
    return pool


def _matrix_pool(rank: int):
    if rank == 1:
        return _rank1_pool()
    if rank == 2:
        return _rank2_pool()
    if rank == 4:
        return _rank4_pool()
    raise ConfigError(f"no matrix pool for rank {rank}")


def datum_involutions(datum: TwistedRootDatum) -> dict[str, InvolutionOnDatum]:
    """All named lattice involutions valid for this datum."""
    out = {}
    for name, m in sorted(_matrix_pool(datum.rank).items()):
        try:
            out[name] = InvolutionOnDatum(datum, m, name=name)
        except ConfigError:
            continue
    return out


def random_twists(datum: TwistedRootDatum, count: int, seed: int = 0):
    """Randomized valid retwists of a shipped datum (products of pool matrices)."""
    pool = list(_matrix_pool(datum.rank).values())
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        a = rng.choice(pool)
        b = rng.choice(pool)
        m = int_mat_mul([list(r) for r in a], [list(r) for r in b])
        out.append(with_twist(datum, m))
    return out
