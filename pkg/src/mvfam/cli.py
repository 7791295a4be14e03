"""Command line front end: ``mvfam <command> [options]``.

Exit status: 0 on success, 1 when an invariant or precondition fails,
2 on usage errors.  Reports are JSON (sorted keys) unless ``--format csv``.
Option precedence: command line, then the TOML config file, then defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, bounds, family, ldc, linalg, selftest, spectral
from .zm import CharacterValue


class UsageError(Exception):
    pass


INVARIANT_ERRORS = (
    family.FamilyError,
    spectral.PreconditionError,
    spectral.NoWitnessError,
    AssertionError,
)

# command -> {option: default}; every option is also a TOML key
DEFAULTS: dict[str, dict] = {
    "verify": {"family": None},
    "search": {"m": None, "n": None, "q": None, "value_set": None, "budget": 10**6},
    "refine": {"family": None, "r1": 1, "r2": 1, "q": None},
    "iterate": {"family": None, "strict": False, "limit": 18, "heuristic": False, "extract": False},
    "rank": {"matrix": None, "family": None},
    "colrank": {"matrix": None, "family": None},
    "spectrum": {"vectors": None, "family": None, "side": "V", "eps": None, "j": 1, "budget": 10**5},
    "rectangle": {"matrix": None, "family": None, "s": None, "limit": 18, "heuristic": False},
    "bounds": {"m": None, "n": None, "n_max": None, "q": None, "c": 1.0, "family_size": None},
    "ldc-sim": {"family": None, "delta": 0.05, "trials": 10**5, "seed": 0, "P": None},
    "selftest": {"scale": 1},
}
COMMON = {"seed": 0, "threads": 1, "format": "json", "out": None}


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _need(cfg: dict, *keys: str) -> None:
    for k in keys:
        if cfg.get(k) is None:
            raise UsageError(f"missing required option --{k.replace('_', '-')}")


def _family(cfg: dict) -> family.MvFamily:
    _need(cfg, "family")
    obj = _load_json(cfg["family"])
    try:
        return family.MvFamily.from_json(obj)
    except KeyError as exc:
        raise UsageError(f"family JSON lacks key {exc}") from exc


def _matrix(cfg: dict) -> linalg.ZmMatrix:
    if cfg.get("matrix"):
        obj = _load_json(cfg["matrix"])
        try:
            return linalg.ZmMatrix.from_json(obj)
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad matrix JSON: {exc}") from exc
    if cfg.get("family"):
        return family.inner_product_matrix(_family(cfg))
    raise UsageError("need --matrix or --family")


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: dict) -> dict:
    F = _family(cfg)
    qr = family.q_restriction(F)
    return {
        "valid": True,
        "t": F.t,
        "q": qr.q,
        "value_set": sorted(qr.value_set),
        "collision_free": family.is_collision_free(F),
        "summary": f"valid, t={F.t}, q={qr.q}",
    }


def cmd_search(cfg: dict) -> dict:
    _need(cfg, "m", "n")
    vs = cfg.get("value_set")
    if isinstance(vs, str):
        vs = [int(x) for x in vs.split(",") if x.strip()]
    try:
        res = family.max_family_search(int(cfg["m"]), int(cfg["n"]), cfg.get("q"), vs, int(cfg["budget"]))
    except family.BudgetExceeded as exc:
        raise UsageError(str(exc)) from exc
    return {"t_max": res.t_max, "witness": res.witness.to_json(), "metadata": res.metadata}


def cmd_refine(cfg: dict) -> dict:
    F = _family(cfg)
    r = spectral.refine_family(F, int(cfg["r1"]), int(cfg["r2"]), cfg.get("q"))
    return {
        "s": r.s,
        "j": r.j,
        "side": r.side,
        "r1": r.r1,
        "r2": r.r2,
        "magnitude": r.magnitude,
        "anchor_magnitude": r.anchor_magnitude,
        "size_floor": r.size_floor,
        "t_in": F.t,
        "t_out": r.family.t,
        "indices": r.indices,
        "steps": r.steps,
        "family": r.family.to_json(),
    }


def cmd_iterate(cfg: dict) -> dict:
    F = _family(cfg)
    if cfg.get("extract"):
        F = family.collision_free_extract(F)
    res = spectral.iterate_reduce(F, strict=bool(cfg["strict"]), limit=int(cfg["limit"]), heuristic=bool(cfg["heuristic"]))
    return res.to_json()


def cmd_rank(cfg: dict) -> dict:
    M = _matrix(cfg)
    A, B = linalg.rank_factorization(M)
    out = linalg.rank_report(M).to_json()
    out.update({"A": A.to_json(), "B": B.to_json(), "sandwich_holds": linalg.rank_report(M).sandwich_holds()})
    return out


def cmd_colrank(cfg: dict) -> dict:
    M = _matrix(cfg)
    size = linalg.colspan_size(M)
    return {"m": M.m, "colspan_size": size, "colrank": math.log(size) / math.log(M.m)}


def cmd_spectrum(cfg: dict) -> dict:
    _need(cfg, "eps")
    if cfg.get("vectors"):
        obj = _load_json(cfg["vectors"])
        m, B = int(obj["m"]), [tuple(v) for v in obj["vectors"]]
    else:
        F = _family(cfg)
        m, B = F.m, list(F.V if cfg["side"] == "V" else F.U)
    if not B:
        raise UsageError("empty vector list")
    om = CharacterValue(int(cfg["j"]), m)
    try:
        sp = spectral.spectrum(B, float(cfg["eps"]), om, budget=int(cfg["budget"]))
    except spectral.BudgetExceeded as exc:
        raise UsageError(str(exc)) from exc
    assert sp.recheck(B)
    return {"m": m, "eps": sp.eps, "j": om.j, "size": len(sp.members), "members": [list(x) for x in sp.members]}


def cmd_rectangle(cfg: dict) -> dict:
    _need(cfg, "s")
    M = _matrix(cfg)
    try:
        r = spectral.monochromatic_rectangle_search(M, int(cfg["s"]), int(cfg["limit"]), bool(cfg["heuristic"]))
    except spectral.SearchLimitExceeded as exc:
        raise UsageError(str(exc)) from exc
    return {"rows": list(r.rows), "cols": list(r.cols), "value": r.value, "side": r.side, "engine": r.engine}


def cmd_bounds(cfg: dict) -> dict:
    _need(cfg, "m", "n")
    m, n = int(cfg["m"]), int(cfg["n"])
    n_max = int(cfg["n_max"]) if cfg.get("n_max") else n
    rows = []
    for nn in range(n, n_max + 1):
        rep = bounds.bound_report(m, nn, cfg.get("q"), float(cfg["c"]), cfg.get("family_size"))
        rows.append(rep)
    bad = [r for r in rows if any("violated" in f for f in r.flags)]
    out = {"rows": [r.to_json() for r in rows], "_csv": [r.csv_row() for r in rows]}
    if bad:
        raise AssertionError(f"family size exceeds a proven bound: {bad[0].flags}")
    return out


def cmd_ldc_sim(cfg: dict) -> dict:
    F = _family(cfg)
    params = ldc.code_params(F, cfg.get("P"))
    rep = ldc.rate_experiment(params, float(cfg["delta"]), int(cfg["trials"]), int(cfg["seed"]))
    return rep.to_json()


def cmd_selftest(cfg: dict, groups: list[str]) -> dict:
    res = selftest.run(groups, int(cfg.get("seed", 0)), int(cfg.get("scale", 1)))
    failed = [g for g, v in res.items() if v != "pass"]
    if failed:
        raise AssertionError(f"selftest failures: {failed}")
    return {"groups": res}


COMMANDS = {
    "verify": cmd_verify,
    "search": cmd_search,
    "refine": cmd_refine,
    "iterate": cmd_iterate,
    "rank": cmd_rank,
    "colrank": cmd_colrank,
    "spectrum": cmd_spectrum,
    "rectangle": cmd_rectangle,
    "bounds": cmd_bounds,
    "ldc-sim": cmd_ldc_sim,
}


# ---------------------------------------------------------------------------
# parsing and reporting


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mvfam", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mvfam {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="TOML file mirroring the flags")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--threads", type=int, help="worker cap (all engines are single threaded)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--selftest", action="store_true", help="run this module's reduced property suite")

    def add(name, *opts):
        sp = sub.add_parser(name)
        common(sp)
        for flag, kw in opts:
            sp.add_argument(flag, **kw)
        return sp

    fam = ("--family", {"help": "family JSON file"})
    mat = ("--matrix", {"help": "matrix JSON file"})
    add("verify", fam)
    add("search", ("--m", {"type": int}), ("--n", {"type": int}), ("--q", {"type": int}),
        ("--value-set", {"dest": "value_set", "help": "comma separated residues"}), ("--budget", {"type": int}))
    add("refine", fam, ("--r1", {"type": int}), ("--r2", {"type": int}), ("--q", {"type": int}))
    add("iterate", fam, ("--strict", {"action": "store_true", "default": None}), ("--limit", {"type": int}),
        ("--heuristic", {"action": "store_true", "default": None}),
        ("--extract", {"action": "store_true", "default": None, "help": "extract a collision-free sub-family first"}))
    add("rank", mat, fam)
    add("colrank", mat, fam)
    add("spectrum", ("--vectors", {"help": 'JSON {"m": .., "vectors": [..]}'}), fam,
        ("--side", {"choices": ["U", "V"]}), ("--eps", {"type": float}), ("--j", {"type": int}), ("--budget", {"type": int}))
    add("rectangle", mat, fam, ("--s", {"type": int}), ("--limit", {"type": int}),
        ("--heuristic", {"action": "store_true", "default": None}))
    add("bounds", ("--m", {"type": int}), ("--n", {"type": int}), ("--n-max", {"dest": "n_max", "type": int}),
        ("--q", {"type": int}), ("--c", {"type": float}), ("--family-size", {"dest": "family_size", "type": int}))
    add("ldc-sim", fam, ("--delta", {"type": float}), ("--trials", {"type": int}), ("--P", {"type": int}))
    add("selftest", ("--scale", {"type": int}))
    return p


def effective_config(args: argparse.Namespace) -> dict:
    cmd = args.command
    cfg = dict(COMMON)
    cfg.update(DEFAULTS[cmd])
    if args.config:
        try:
            data = tomllib.loads(Path(args.config).read_text())
        except FileNotFoundError as exc:
            raise UsageError(f"no such config file: {args.config}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"bad config file: {exc}") from exc
        section = data.get(cmd, {})
        flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
        for src in (flat, section):
            for k, v in src.items():
                key = k.replace("-", "_")
                if key not in cfg:
                    raise UsageError(f"unknown config key {k!r} for {cmd}")
                cfg[key] = v
    for k, v in vars(args).items():
        if k in cfg and v is not None:
            cfg[k] = v
    for k in ("budget", "trials", "limit", "threads", "scale"):
        if cfg.get(k) is not None and int(cfg[k]) < 1:
            raise UsageError(f"{k} must be positive")
    if cfg.get("delta") is not None and not 0 <= float(cfg["delta"]) <= 1:
        raise UsageError("delta must lie in [0, 1]")
    return cfg


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    result = report.get("result", {})
    if "_csv" in result:
        w.writerow(bounds.CSV_FIELDS)
        w.writerows(result["_csv"])
    else:
        w.writerow(["key", "value"])
        for k in sorted(report):
            if k != "result":
                w.writerow([k, json.dumps(report[k], sort_keys=True)])
        for k in sorted(result):
            w.writerow([f"result.{k}", json.dumps(result[k], sort_keys=True)])
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    status, result, error = 0, None, None
    try:
        cfg = effective_config(args)
    except UsageError as exc:
        print(f"mvfam: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "selftest" or args.selftest:
            result = cmd_selftest(cfg, selftest.COMMAND_GROUPS[args.command])
        else:
            result = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"mvfam: error: {exc}", file=sys.stderr)
        return 2
    except INVARIANT_ERRORS as exc:
        status, error = 1, {"type": type(exc).__name__, "message": str(exc)}
    except ValueError as exc:
        # parameter-range errors raised by the library
        print(f"mvfam: error: {exc}", file=sys.stderr)
        return 2
    report = {
        "version": __version__,
        "command": args.command,
        "config": {k: v for k, v in sorted(cfg.items())},
        "status": "ok" if status == 0 else "invariant_violation",
        "result": result,
        "error": error,
        "timing": {"wall_seconds": round(time.perf_counter() - t0, 6)},
    }
    fmt = cfg.get("format") or "json"
    if fmt == "json" and result is not None:
        result.pop("_csv", None)  # rows for the csv renderer only
    text = render(report, fmt)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if error:
        print(f"mvfam: {error['type']}: {error['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
