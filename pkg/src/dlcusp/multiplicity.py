"""Both sides of the multiplicity identity for cuspidal representations.

The left side averages a certified cuspidal character over the fixed
subgroup of an involution; the right side sums orbit indices over the
torus orbits of the involution class whose epsilon character matches the
inducing torus character.  Both sides are exact integers and the module
refuses to return unequal sides silently.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .dlchar import CuspidalCharacter, cuspidal_character, general_position_exponents
from .errors import ConfigError, ConsistencyError, MethodDisagreement, TheoremViolation
from .groups import (
    Involution,
    LieFixedSpace,
    MatrixGroup,
    OrbitCensus,
    TorusCharacterOnT,
    TorusEmbedding,
    _gl2_view,
    derived_theta_star,
    elliptic_torus,
    fixed_subgroup,
    involution_orbit,
    lie_fixed_det,
    named_involution,
    stabilizer_data,
)
from .rootdata import epsilon_product

__all__ = [
    "EpsilonCharacter",
    "epsilon_character",
    "character_matches_epsilon",
    "OrbitReport",
    "rhs_orbit_sum",
    "lhs_multiplicity",
    "ProductCuspidal",
    "TheoremResult",
    "verify_theorem",
    "census_for",
    "distinction_grid",
]


# ---------------------------------------------------------------------------
# the epsilon character of an involution on a stable torus


@dataclass(frozen=True, eq=False)
class EpsilonCharacter:
    theta: Involution
    torus: TorusEmbedding
    domain: tuple
    signs: dict

    def sign(self, t) -> int:
        return self.signs[t]


def epsilon_character(theta: Involution, torus: TorusEmbedding) -> EpsilonCharacter:
    """The sign character on the theta-fixed torus points, computed twice.

    Route one takes det(Ad(t)) on the theta-fixed Lie subalgebra; route two
    takes the product of one root per twist orbit of the roots negated by
    the lattice shadow of theta.  The two must agree at every fixed point,
    and the result must be multiplicative; disagreement raises with the
    witnessing torus point attached.
    """
    if not theta.stabilizes(torus):
        raise ConfigError("involution does not stabilize this torus")
    domain = tuple(t for t in torus.elements if theta.apply(t) == t)
    space = LieFixedSpace(theta)
    shadow = derived_theta_star(theta, torus)
    datum = torus.datum
    signs = {}
    for t in domain:
        det_sign = lie_fixed_det(theta, t, space)
        coords = torus.eigen_coords(t)
        prod_sign = epsilon_product(datum, shadow, lambda a: torus.root_value(a, coords))
        if det_sign != prod_sign:
            raise MethodDisagreement(
                "fixed-space determinant and root-orbit product disagree",
                detail={
                    "kind": theta.kind,
                    "witness": theta.witness,
                    "torus_point": t,
                    "det_sign": det_sign,
                    "product_sign": prod_sign,
                },
            )
        signs[t] = det_sign
    for a in domain:
        for b in domain:
            if signs[torus.group.mul(a, b)] != signs[a] * signs[b]:
                raise ConsistencyError(
                    "epsilon is not multiplicative", detail=(a, b)
                )
    return EpsilonCharacter(theta, torus, domain, signs)


def character_matches_epsilon(lam: TorusCharacterOnT, eps: EpsilonCharacter) -> bool:
    """Exact test of lambda restricted to the fixed points against epsilon."""
    half = lam.modulus // 2
    for t in eps.domain:
        target = 0 if eps.sign(t) == 1 else half
        if lam.log_value(t) != target:
            return False
    return True


# ---------------------------------------------------------------------------
# the orbit side


@dataclass(frozen=True)
class OrbitReport:
    representative: Involution
    n_members: int
    stable: bool
    matching: bool
    m: int
    contribution: int


class _OrbitEntry:
    def __init__(self, orbit, torus):
        self.orbit = orbit
        rep = orbit.representative
        members = orbit.members
        picks = [rep]
        if len(members) > 1:
            # deterministic spread: second, middle, last
            for i in (1, len(members) // 2, len(members) - 1):
                if members[i] not in picks:
                    picks.append(members[i])
        self.sampled = picks
        self.data = [stabilizer_data(th, torus) for th in picks]
        ms = {d.m for d in self.data}
        if len(ms) != 1:
            raise ConsistencyError(
                "orbit index m is not constant on a torus orbit", detail=sorted(ms)
            )
        self.m = ms.pop()
        self.eps = (
            [epsilon_character(th, torus) for th in picks] if orbit.stable else None
        )


def _analyze(census: OrbitCensus, torus: TorusEmbedding):
    cache = getattr(torus, "_census_analysis", None)
    if cache is None:
        cache = {}
        torus._census_analysis = cache
    key = census.seed._key
    got = cache.get(key)
    if got is None:
        got = [_OrbitEntry(o, torus) for o in census.t_orbits]
        cache[key] = got
    return got


def rhs_orbit_sum(census: OrbitCensus, lam: TorusCharacterOnT, torus: TorusEmbedding):
    """Sum of orbit indices over matching stable orbits, with full reports."""
    entries = _analyze(census, torus)
    total = 0
    reports = []
    for entry in entries:
        orbit = entry.orbit
        if orbit.stable:
            flags = {character_matches_epsilon(lam, e) for e in entry.eps}
            if len(flags) != 1:
                raise ConsistencyError(
                    "matching flag is not constant on a torus orbit",
                    detail=orbit.representative.witness,
                )
            matching = flags.pop()
        else:
            matching = False
        contribution = entry.m if matching else 0
        total += contribution
        reports.append(
            OrbitReport(
                orbit.representative,
                len(orbit.members),
                orbit.stable,
                matching,
                entry.m,
                contribution,
            )
        )
    return total, tuple(reports)


# ---------------------------------------------------------------------------
# the character side


class ProductCuspidal:
    """Outer product of two certified cuspidal characters of the factors."""

    def __init__(self, first: CuspidalCharacter, second: CuspidalCharacter):
        self.first = first
        self.second = second
        self.exponents = (first.exponent, second.exponent)

    def value(self, g) -> complex:
        return self.first.value(g[0]) * self.second.value(g[1])


def lhs_multiplicity(census: OrbitCensus, chi, tol: float = 1e-6, samples: int = 4):
    """Average of chi over G^theta, checked across sampled orbit members.

    Returns the common nonnegative integer; the average must be within tol
    of it, with vanishing imaginary part, for every sampled representative.
    """
    members = census.all_members
    step = max(1, len(members) // samples)
    picked = list(members[::step][:samples])
    if census.seed not in picked:
        picked[0] = census.seed
    values = []
    for th in picked:
        fixed = fixed_subgroup(th)
        acc = 0j
        for h in fixed:
            acc += chi.value(h)
        avg = acc / len(fixed)
        if abs(avg.imag) > tol:
            raise ConsistencyError(f"multiplicity average {avg} is not real")
        rounded = round(avg.real)
        if abs(avg.real - rounded) > tol:
            raise ConsistencyError(f"multiplicity average {avg.real} is not integral")
        if rounded < 0:
            raise ConsistencyError(f"negative multiplicity {rounded}")
        values.append(rounded)
    if len(set(values)) != 1:
        raise ConsistencyError(
            "multiplicity depends on the chosen involution representative",
            detail=values,
        )
    return values[0]


# ---------------------------------------------------------------------------
# the theorem


@dataclass(frozen=True)
class TheoremResult:
    group_kind: str
    q: int
    seed: str
    exponents: tuple
    lhs: int
    rhs: int
    reports: tuple
    wall_ms: float

    @property
    def n_matching_orbits(self) -> int:
        return sum(1 for r in self.reports if r.matching)

    @property
    def m_values(self) -> tuple:
        return tuple(r.m for r in self.reports if r.matching)


def census_for(group: MatrixGroup, torus: TorusEmbedding, seed: str) -> OrbitCensus:
    cache = getattr(torus, "_census_cache", None)
    if cache is None:
        cache = {}
        torus._census_cache = cache
    got = cache.get(seed)
    if got is None:
        got = involution_orbit(named_involution(group, seed), torus)
        cache[seed] = got
    return got


def _lambda_on(torus: TorusEmbedding, exponents) -> TorusCharacterOnT:
    if torus.coord_count == 2:
        (k,) = exponents
        return torus.character((k, 0))
    k1, k2 = exponents
    return torus.character((k1, 0, k2, 0))


def _chi_for(group: MatrixGroup, exponents):
    if group.kind == "gl2":
        (k,) = exponents
        return cuspidal_character(group, k)
    k1, k2 = exponents
    view = _gl2_view(group)
    return ProductCuspidal(
        cuspidal_character(view, k1), cuspidal_character(view, k2)
    )


def verify_theorem(
    group: MatrixGroup,
    seed: str,
    exponents,
    torus: TorusEmbedding | None = None,
    tol: float = 1e-6,
) -> TheoremResult:
    """Check lhs == rhs for one involution class and one inducing character.

    exponents: (k,) for gl2, (k1, k2) for the product group; each component
    must be in general position.  Raises TheoremViolation with the full
    orbit reports attached when the two sides differ.
    """
    t0 = time.perf_counter()
    exponents = tuple(exponents)
    if torus is None:
        torus = elliptic_torus(group)
    lam = _lambda_on(torus, exponents)
    if not lam.is_general_position():
        raise ConfigError(f"exponents {exponents} are not in general position")
    chi = _chi_for(group, exponents)
    census = census_for(group, torus, seed)
    lhs = lhs_multiplicity(census, chi, tol=tol)
    rhs, reports = rhs_orbit_sum(census, lam, torus)

    # the right side may not depend on the Frobenius representative
    partner = lam.frobenius_partner()
    rhs_partner, reports_partner = rhs_orbit_sum(census, partner, torus)
    if rhs_partner != rhs or [r.matching for r in reports_partner] != [
        r.matching for r in reports
    ]:
        raise ConsistencyError(
            "orbit sum changed under the Frobenius partner exponent",
            detail=(rhs, rhs_partner),
        )

    # central compatibility: a character nontrivial on the fixed center
    # admits no invariant vectors
    seed_theta = census.seed
    fixed_center = [
        z for z in group.center() if seed_theta.apply(z) == z
    ]
    if any(lam.log_value(z) != 0 for z in fixed_center) and lhs != 0:
        raise ConsistencyError(
            "nonzero multiplicity with a nontrivial fixed central character",
            detail=exponents,
        )

    result = TheoremResult(
        group.kind,
        group.q,
        seed,
        exponents,
        lhs,
        rhs,
        reports,
        (time.perf_counter() - t0) * 1000.0,
    )
    if lhs != rhs:
        raise TheoremViolation(
            f"multiplicity {lhs} differs from orbit sum {rhs}",
            detail=result,
        )
    return result


def distinction_grid(group: MatrixGroup, tol: float = 1e-6):
    """The swap-distinction grid of the product group at one q.

    Cell (i, j) pairs the i-th cuspidal character with the inverse of the
    j-th (both indexed by sorted Frobenius pair representatives) against
    the swap involution class.  Returns (pair representatives, matrix of
    TheoremResult).  Each multiplicity is cross-checked against the exact
    character inner product of the two factors.
    """
    if group.kind != "gl2_x_gl2":
        raise ConfigError("the distinction grid needs the product group")
    view = _gl2_view(group)
    pairs = general_position_exponents(view)
    reps = [k for k, _ in pairs]
    torus = elliptic_torus(group)
    n = group.tower.order(2)
    grid = []
    for ki in reps:
        row = []
        for kj in reps:
            res = verify_theorem(group, "swap", (ki, (-kj) % n), torus=torus, tol=tol)
            chi_i = cuspidal_character(view, ki)
            chi_j = cuspidal_character(view, kj)
            ip = chi_i.chi.inner(chi_j.chi)
            if abs(ip - res.lhs) > tol:
                raise ConsistencyError(
                    "grid multiplicity differs from the character inner product",
                    detail=(ki, kj, res.lhs, ip),
                )
            row.append(res)
        grid.append(row)
    return tuple(reps), tuple(tuple(r) for r in grid)
