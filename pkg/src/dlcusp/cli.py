"""Command-line verification harness.

Subcommands
    verify sigma              four-route sign identity over the datum library
    verify epsilon            det-vs-product agreement for torus sign characters
    verify phi-theta          three-way certification of the killed-root set
    verify centralizer-sigma  sign transfer to the centralizer datum
    verify theorem            the multiplicity identity over a (q, seed, lambda) grid
    table                     multiplicity table emission (csv or json)

Exit codes: 0 all checks pass, 1 a verification failed (counterexample JSON
on stdout), 2 invalid configuration, 3 resource bound exceeded.  Reports are
written atomically (write-then-rename) and are byte-stable for a fixed
configuration and package version.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from .dlchar import general_position_exponents
from .errors import ConfigError, ConsistencyError, ResourceBoundError
from .groups import (
    MatrixGroup,
    elliptic_torus,
    phi_theta_certified,
    split_torus,
)
from .multiplicity import census_for, epsilon_character, verify_theorem
from .rootdata import (
    datum_involutions,
    datum_names,
    fq_rank_sigma,
    load_datum,
    sigma_group,
    sigma_product,
    verify_centralizer_sigma,
)

CSV_COLUMNS = (
    "group",
    "q",
    "involution_seed",
    "lambda_exponent",
    "lhs",
    "rhs",
    "n_matching_orbits",
    "m_values",
    "wall_ms",
)

NAMED_SEEDS = {
    "gl2": ("diag", "antidiag", "transpose-inverse"),
    "gl2_x_gl2": ("swap",),
}


@dataclass
class RunConfig:
    command: str
    group: str | None = None
    qs: tuple = ()
    data: tuple = ()
    involutions: tuple = ()
    torus: str = "both"
    exponent: tuple | None = None
    out: str | None = None
    fmt: str = "json"
    jobs: int = 1
    twists: int = 0
    rng_seed: int = 0
    custom_matrix: str | None = None
    custom_kind: str | None = None

    def as_json(self) -> dict:
        return {
            "command": self.command,
            "group": self.group,
            "q": list(self.qs),
            "data": list(self.data),
            "involutions": list(self.involutions),
            "torus": self.torus,
            "exponent": list(self.exponent) if self.exponent else None,
            "format": self.fmt,
            "jobs": self.jobs,
            "twists": self.twists,
            "rng_seed": self.rng_seed,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return str(x)


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dlcusp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(config: RunConfig, results, failures) -> None:
    if config.fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in results:
            lines.append(
                ",".join(str(row.get(col, "")) for col in CSV_COLUMNS)
            )
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(
            {
                "version": __version__,
                "config": config.as_json(),
                "results": _jsonable(results),
                "failures": _jsonable(failures),
            },
            indent=2,
            sort_keys=True,
        ) + "\n"
    if config.out:
        _write_atomic(config.out, text)
    else:
        sys.stdout.write(text)


def _fail_exit(config, failures) -> int:
    # without --out the report (which embeds the failures) is already on stdout
    if config is None or config.out:
        sys.stdout.write(
            json.dumps({"failures": _jsonable(failures)}, indent=2, sort_keys=True)
            + "\n"
        )
    return 1


# ---------------------------------------------------------------------------
# subcommands


def _data_list(config: RunConfig):
    names = config.data or ("all",)
    if "all" in names:
        return tuple(datum_names())
    return tuple(names)


def cmd_verify_sigma(config: RunConfig) -> int:
    from .rootdata import random_twists

    results = []
    failures = []
    for name in _data_list(config):
        datum = load_datum(name)
        try:
            sign = sigma_product(datum)
            rank, s_t = fq_rank_sigma(datum)
            results.append(
                {
                    "datum": name,
                    "fixed_rank": rank,
                    "sigma_torus": s_t,
                    "sigma_group": sigma_group(datum),
                    "sigma_product": sign,
                }
            )
        except ConsistencyError as e:
            failures.append({"datum": name, "message": str(e), "detail": e.detail})
        if config.twists:
            for i, twisted in enumerate(
                random_twists(datum, config.twists, seed=config.rng_seed)
            ):
                try:
                    sigma_product(twisted)
                except ConsistencyError as e:
                    failures.append(
                        {"datum": name, "twist": i, "message": str(e)}
                    )
    _emit(config, results, failures)
    return _fail_exit(config, failures) if failures else 0


def _group_qs(config: RunConfig):
    if not config.group or not config.qs:
        raise ConfigError("this subcommand needs --group and --q")
    return [(config.group, q) for q in config.qs]


def _seeds_for(config: RunConfig, kind: str):
    if config.involutions:
        return config.involutions
    return NAMED_SEEDS[kind]


def _tori(config: RunConfig, group: MatrixGroup):
    kinds = ("split", "elliptic") if config.torus == "both" else (config.torus,)
    out = []
    for k in kinds:
        if group.kind == "gl2_x_gl2" and k == "split":
            continue
        out.append(split_torus(group) if k == "split" else elliptic_torus(group))
    return out


def cmd_verify_epsilon(config: RunConfig) -> int:
    results = []
    failures = []
    for kind, q in _group_qs(config):
        group = MatrixGroup(kind, q)
        for torus in _tori(config, group):
            for seed in _seeds_for(config, kind):
                census = census_for(group, torus, seed)
                for orbit in census.t_orbits:
                    if not orbit.stable:
                        continue
                    cell = {
                        "group": kind,
                        "q": q,
                        "torus": torus.kind,
                        "seed": seed,
                        "witness": _jsonable(orbit.representative.witness),
                    }
                    try:
                        eps = epsilon_character(orbit.representative, torus)
                        cell["domain_size"] = len(eps.domain)
                        cell["signs"] = sorted(set(eps.signs.values()))
                        results.append(cell)
                    except ConsistencyError as e:
                        failures.append(
                            dict(cell, message=str(e), detail=_jsonable(e.detail))
                        )
    _emit(config, results, failures)
    return _fail_exit(config, failures) if failures else 0


def cmd_verify_phi_theta(config: RunConfig) -> int:
    results = []
    failures = []
    for kind, q in _group_qs(config):
        group = MatrixGroup(kind, q)
        for torus in _tori(config, group):
            for seed in _seeds_for(config, kind):
                census = census_for(group, torus, seed)
                for orbit in census.t_orbits:
                    if not orbit.stable:
                        continue
                    cell = {
                        "group": kind,
                        "q": q,
                        "torus": torus.kind,
                        "seed": seed,
                        "witness": _jsonable(orbit.representative.witness),
                    }
                    try:
                        roots = phi_theta_certified(orbit.representative, torus)
                        cell["killed_roots"] = _jsonable(roots)
                        results.append(cell)
                    except ConsistencyError as e:
                        failures.append(
                            dict(cell, message=str(e), detail=_jsonable(e.detail))
                        )
    _emit(config, results, failures)
    return _fail_exit(config, failures) if failures else 0


def cmd_verify_centralizer_sigma(config: RunConfig) -> int:
    results = []
    failures = []
    for name in _data_list(config):
        datum = load_datum(name)
        for theta in datum_involutions(datum).values():
            fixes_a_root = any(
                theta.apply(a) == a for a in datum.roots
            )
            cell = {"datum": name, "involution": theta.name}
            if fixes_a_root:
                cell["skipped"] = "fixes a root"
                results.append(cell)
                continue
            try:
                cell["sign"] = verify_centralizer_sigma(datum, theta)
                results.append(cell)
            except ConsistencyError as e:
                failures.append(dict(cell, message=str(e), detail=_jsonable(e.detail)))
    _emit(config, results, failures)
    return _fail_exit(config, failures) if failures else 0


def _theorem_rows(config: RunConfig):
    """One row per (group, q, seed, lambda pair), deterministic order."""
    cells = []
    for kind, q in _group_qs(config):
        group = MatrixGroup(kind, q)
        factor = group if kind == "gl2" else MatrixGroup("gl2", q)
        pairs = general_position_exponents(factor)
        for seed in _seeds_for(config, kind):
            if kind == "gl2":
                for k, partner in pairs:
                    if config.exponent and (k,) != config.exponent:
                        continue
                    cells.append((group, q, seed, (k,), partner))
            else:
                n = group.tower.order(2)
                for ki, _ in pairs:
                    for kj, _ in pairs:
                        exps = (ki, (-kj) % n)
                        if config.exponent and exps != config.exponent:
                            continue
                        cells.append((group, q, seed, exps, None))
    return cells


def _run_theorem_cell(cell):
    group, q, seed, exps, partner = cell
    res = verify_theorem(group, seed, exps)
    row = {
        "group": group.kind,
        "q": q,
        "involution_seed": seed,
        "lambda_exponent": "|".join(str(k) for k in exps),
        "lhs": res.lhs,
        "rhs": res.rhs,
        "n_matching_orbits": res.n_matching_orbits,
        "m_values": "|".join(str(m) for m in res.m_values),
        "wall_ms": round(res.wall_ms, 3),
        "orbits": [
            {
                "witness": _jsonable(r.representative.witness),
                "kind": r.representative.kind,
                "n_members": r.n_members,
                "stable": r.stable,
                "matching": r.matching,
                "m": r.m,
                "contribution": r.contribution,
            }
            for r in res.reports
        ],
    }
    return row


def cmd_verify_theorem(config: RunConfig) -> int:
    cells = _theorem_rows(config)
    failures = []
    results = []
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_theorem_cell_safe, cells))
    else:
        outcomes = [_theorem_cell_safe(c) for c in cells]
    for ok, payload in outcomes:
        (results if ok else failures).append(payload)
    results.sort(key=_row_key)
    _emit(config, results, failures)
    return _fail_exit(config, failures) if failures else 0


def _theorem_cell_safe(cell):
    try:
        return True, _run_theorem_cell(cell)
    except (ConsistencyError,) as e:
        group, q, seed, exps, _ = cell
        return False, {
            "group": group.kind,
            "q": q,
            "involution_seed": seed,
            "lambda_exponent": "|".join(str(k) for k in exps),
            "message": str(e),
            "detail": _jsonable(getattr(e, "detail", None)),
        }


def _row_key(row):
    return (
        row["group"],
        row["q"],
        row["involution_seed"],
        tuple(int(k) for k in row["lambda_exponent"].split("|")),
    )


def cmd_table(config: RunConfig) -> int:
    return cmd_verify_theorem(config)


# ---------------------------------------------------------------------------
# argument plumbing


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="dlcusp", description="exact verification of cuspidal distinction data"
    )
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run one verification suite")
    vsub = verify.add_subparsers(dest="suite", required=True)

    def common(p, group=True):
        if group:
            p.add_argument("--group", choices=("gl2", "gl2_x_gl2"))
            p.add_argument("--q", type=int, nargs="+", default=[])
            p.add_argument(
                "--involution",
                action="append",
                default=[],
                help="named seed; repeatable (default: all named for the group)",
            )
            p.add_argument("--torus", choices=("split", "elliptic", "both"), default="both")
        p.add_argument("--out", help="report path (stdout when omitted)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--jobs", type=int, default=1)

    sigma = vsub.add_parser("sigma", help="four-route sign identity")
    sigma.add_argument("--data", action="append", default=[], help="datum name or 'all'")
    sigma.add_argument("--twists", type=int, default=0)
    sigma.add_argument("--rng-seed", type=int, default=0)
    common(sigma, group=False)

    eps = vsub.add_parser("epsilon", help="sign character method agreement")
    common(eps)

    pt = vsub.add_parser("phi-theta", help="killed-root set certification")
    common(pt)

    cs = vsub.add_parser("centralizer-sigma", help="sign transfer to the centralizer")
    cs.add_argument("--data", action="append", default=[], help="datum name or 'all'")
    common(cs, group=False)

    th = vsub.add_parser("theorem", help="multiplicity identity grid")
    th.add_argument(
        "--exponent",
        help="restrict to one lambda exponent (k, or k1,k2 for the product group)",
    )
    common(th)

    table = sub.add_parser("table", help="emit the multiplicity table")
    table.add_argument("--exponent")
    table.add_argument("--group", choices=("gl2", "gl2_x_gl2"))
    table.add_argument("--q", type=int, nargs="+", default=[])
    table.add_argument("--involution", action="append", default=[])
    table.add_argument("--torus", choices=("split", "elliptic", "both"), default="both")
    table.add_argument("--out")
    table.add_argument("--format", choices=("json", "csv"), default="csv")
    table.add_argument("--jobs", type=int, default=1)
    return top


def _config_from(ns) -> RunConfig:
    command = ns.command if ns.command == "table" else f"verify {ns.suite}"
    exponent = None
    if getattr(ns, "exponent", None):
        try:
            exponent = tuple(int(x) for x in str(ns.exponent).split(","))
        except ValueError:
            raise ConfigError(f"bad --exponent value {ns.exponent!r}") from None
    jobs = getattr(ns, "jobs", 1)
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    config = RunConfig(
        command=command,
        group=getattr(ns, "group", None),
        qs=tuple(getattr(ns, "q", []) or []),
        data=tuple(getattr(ns, "data", []) or []),
        involutions=tuple(getattr(ns, "involution", []) or []),
        torus=getattr(ns, "torus", "both"),
        exponent=exponent,
        out=getattr(ns, "out", None),
        fmt=getattr(ns, "format", "json"),
        jobs=jobs,
        twists=getattr(ns, "twists", 0),
        rng_seed=getattr(ns, "rng_seed", 0),
    )
    if config.group:
        for seed in config.involutions:
            if seed not in NAMED_SEEDS[config.group]:
                raise ConfigError(
                    f"seed {seed!r} is not a named involution for {config.group}"
                )
    if config.fmt == "csv" and config.command not in ("verify theorem", "table"):
        raise ConfigError("csv output is defined for theorem and table runs only")
    return config


DISPATCH = {
    "verify sigma": cmd_verify_sigma,
    "verify epsilon": cmd_verify_epsilon,
    "verify phi-theta": cmd_verify_phi_theta,
    "verify centralizer-sigma": cmd_verify_centralizer_sigma,
    "verify theorem": cmd_verify_theorem,
    "table": cmd_table,
}


def main(argv=None) -> int:
    try:
        ns = _parser().parse_args(argv)
        config = _config_from(ns)
        return DISPATCH[config.command](config)
    except ConfigError as e:
        sys.stderr.write(f"configuration error: {e}\n")
        return 2
    except ResourceBoundError as e:
        sys.stderr.write(
            f"resource bound: {e}"
            + (f" (required {e.required})" if e.required else "")
            + "\n"
        )
        return 3
    except ConsistencyError as e:
        return _fail_exit(None, [{"message": str(e), "detail": _jsonable(e.detail)}])


if __name__ == "__main__":
    raise SystemExit(main())
