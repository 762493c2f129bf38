"""Command line front end.

    planarindex classify --system "hill q=4 T=2pi"
    planarindex rotation --system path/to/coeffs.json --K 400
    planarindex hunt --system "saturating q0=9,2.7" --k 2 --j 1 --format csv --out orbits.csv
    planarindex sweep --system mathieu --sweep delta=0:1:64 --sweep eps=0:0.5:32

A system is either a catalog name followed by ``key=value`` parameters, or a
JSON file holding a coefficient path ``{"T": ..., "a": {...}, "b": ..., "c": ...}``
or a catalog reference ``{"catalog": name, "params": {...}}``.

Output is json-lines: a header record echoing every option, then one record
per result. ``--format csv`` writes the same records as CSV rows (orbit
samples for ``hunt``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import build
from .coeffs import CoeffPath
from .errors import ConfigError, PlanarIndexError
from .flow import DEFAULT_TOL
from .hill import HillProblem, morse_indices
from .index import K_DEFAULT, analyze, index_report, iterate_index, rotation_number
from .subharmonics import PlanarSystem, candidates, find_orbits, k_star_scan, twist_radii

COMMANDS = ("classify", "index", "rotation", "iterate", "spectrum", "plan", "hunt", "sweep")
CONFIG_KEYS = {"command", "system", "tol", "K", "k", "j", "horizon", "n_max", "sweep", "workers", "out", "format"}

_PI = re.compile(r"^([-+]?[0-9.eE+-]*?)\*?pi(?:/([0-9.eE+-]+))?$")


def parse_value(text: str):
    """Numbers, multiples of pi ("2pi", "pi/2"), comma lists, or plain strings."""
    text = text.strip()
    if "," in text:
        return [parse_value(p) for p in text.split(",")]
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI.match(text)
    if m:
        head = m.group(1)
        coef = 1.0 if head in ("", "+") else -1.0 if head == "-" else float(head)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    return text


def parse_system_spec(spec: str) -> tuple[str, dict]:
    parts = spec.replace(";", " ").split()
    if not parts:
        raise ConfigError("empty system specification")
    params = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        params[key] = parse_value(val)
    return parts[0], params


def load_system(spec: str):
    path = Path(spec)
    if path.suffix == ".json" and path.exists():
        data = json.loads(path.read_text())
        if "catalog" in data:
            unknown = set(data) - {"catalog", "params"}
            if unknown:
                raise ConfigError(f"unknown system fields {sorted(unknown)}")
            return build(data["catalog"], **data.get("params", {})), {"catalog": data["catalog"], **data.get("params", {})}
        return CoeffPath.from_dict(data), data
    name, params = parse_system_spec(spec)
    return build(name, **params), {"catalog": name, **params}


def _linear(obj) -> CoeffPath:
    if isinstance(obj, PlanarSystem):
        raise ConfigError(f"{obj.name} is nonlinear; this command needs a linear system")
    return obj


def _nonlinear(obj) -> PlanarSystem:
    if not isinstance(obj, PlanarSystem):
        raise ConfigError("this command needs a nonlinear catalog system")
    return obj


def _hill_problem(S: CoeffPath) -> HillProblem:
    ts = np.linspace(0.0, S.period, 64, endpoint=False)
    if any(S.b(float(t)) != 0.0 or S.c(float(t)) != 1.0 for t in ts):
        raise ConfigError("spectrum needs a Hill system (b = 0, c = 1)")
    return HillProblem(S.a, S.period)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if hasattr(x, "value") and not isinstance(x, (int, float, str)):
        return x.value
    return x


# -- commands ----------------------------------------------------------------


def cmd_classify(S, opts) -> list[dict]:
    an = analyze(_linear(S), tol=opts["tol"])
    pair = an.pair
    return [
        {
            "label": {"case": an.label.case, "tag": an.label.tag, "ell": an.label.ell},
            "i_T": an.label.cz,
            "eta_minus": an.extrema.eta_minus,
            "eta_plus": an.extrema.eta_plus,
            "multipliers": [pair.mu1, pair.mu2],
            "kind": pair.kind,
            "trace": pair.trace,
            "stratum": an.stratum,
            "monodromy": an.monodromy.tolist(),
        }
    ]


def cmd_index(S, opts):
    return [index_report(_linear(S), opts["K"], opts["tol"]).to_dict()]


def cmd_rotation(S, opts):
    rho = rotation_number(_linear(S), opts["K"], opts["tol"])
    return [{"rho_interval": rho.as_list(), "exact": rho.exact, "width": rho.width, "K": opts["K"]}]


def cmd_iterate(S, opts):
    k = opts["k"] or 1
    return [iterate_index(_linear(S), k, opts["tol"]).to_dict()]


def cmd_spectrum(S, opts):
    rep = morse_indices(_hill_problem(_linear(S)), opts["n_max"], opts["tol"])
    return [rep.to_dict()]


def _rho_pair(sysm: PlanarSystem, K: int):
    return sysm.rho0(K), sysm.rhoinf(K)


def cmd_plan(S, opts):
    sysm = _nonlinear(S)
    r0, ri = _rho_pair(sysm, opts["K"])
    horizon = opts["horizon"] or 10
    scan = k_star_scan(r0, ri, horizon)
    recs = [{"rho0": r0.as_list(), "rhoinf": ri.as_list(), "k_star": scan.k_star, "horizon": horizon}]
    for k in range(1, horizon + 1):
        cands = candidates(r0, ri, k)
        recs.append({"k": k, "count": len(cands), "phi_count": scan.phi_counts[k], "j": [c.j for c in cands]})
    return recs


def cmd_hunt(S, opts):
    sysm = _nonlinear(S)
    k = opts["k"] or 1
    r0, ri = _rho_pair(sysm, opts["K"])
    js = [opts["j"]] if opts["j"] is not None else [c.j for c in candidates(r0, ri, k)]
    recs = []
    for j in js:
        r_hat, r_check = twist_radii(sysm, k, j)
        orbits = find_orbits(sysm, k, j, r_hat, r_check, tol=opts["tol_orbit"])
        for i, o in enumerate(orbits):
            rec = {"k": k, "j": j, "orbit": i, "r_hat": r_hat, "r_check": r_check, **o.summary()}
            rec["_samples"] = o.orbit_samples
            recs.append(rec)
    return recs


def _sweep_axes(specs: list[str]):
    axes = []
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"sweep axis must look like name=lo:hi:n, got {spec!r}")
        name, rng = spec.split("=", 1)
        parts = rng.split(":")
        if len(parts) != 3:
            raise ConfigError(f"sweep axis must look like name=lo:hi:n, got {spec!r}")
        lo, hi = float(parse_value(parts[0])), float(parse_value(parts[1]))
        n = int(parts[2])
        if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
            raise ConfigError(f"bad sweep range {spec!r}")
        axes.append((name, np.linspace(lo, hi, n) if n > 1 else np.array([lo])))
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep takes one or two axes")
    return axes


def _sweep_point(args):
    name, params, K, tol = args
    rec = {k: v for k, v in params.items() if not isinstance(v, (list, dict))}
    try:
        S = _linear(build(name, **params))
        an = analyze(S, tol=tol)
        rho = rotation_number(S, K, tol)
        rec.update(
            label=f"{an.label.case}:{an.label.tag}:{an.label.ell}",
            i_T=an.label.cz,
            rho_lo=rho.lo,
            rho_hi=rho.hi,
            trace=an.pair.trace,
            stability=("strongly_stable" if an.label.elliptic else "stable" if an.label.tag.startswith("p*") else "unstable"),
            error=None,
        )
    except PlanarIndexError as exc:
        rec.update(error=f"{type(exc).__name__}: {exc}")
    return rec


def cmd_sweep(system_meta, opts):
    name = system_meta.get("catalog")
    if name is None:
        raise ConfigError("sweep needs a catalog system")
    base = {k: v for k, v in system_meta.items() if k != "catalog"}
    axes = _sweep_axes(opts["sweep"] or [])
    grid = [dict(base)]
    for axis, values in axes:
        grid = [{**g, axis: float(v)} for g in grid for v in values]
    jobs = [(name, g, opts["K"], opts["tol"]) for g in grid]
    workers = opts.get("workers") or 1
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_point, jobs, chunksize=8))
    return [_sweep_point(j) for j in jobs]


HANDLERS = {
    "classify": cmd_classify,
    "index": cmd_index,
    "rotation": cmd_rotation,
    "iterate": cmd_iterate,
    "spectrum": cmd_spectrum,
    "plan": cmd_plan,
    "hunt": cmd_hunt,
}


# -- output ------------------------------------------------------------------


def _flat(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flat(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def render(header: dict, records: list[dict], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "json":
        buf.write(json.dumps({"header": header}) + "\n")
        for r in records:
            buf.write(json.dumps(_jsonable({k: v for k, v in r.items() if not k.startswith("_")})) + "\n")
        return buf.getvalue()
    buf.write("# " + json.dumps(header) + "\n")
    if records and "_samples" in records[0]:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "j", "orbit", "t", "x", "y"])
        for r in records:
            for t, x, y in r["_samples"]:
                w.writerow([r["k"], r["j"], r["orbit"], repr(float(t)), repr(float(x)), repr(float(y))])
        return buf.getvalue()
    rows = [_flat(_jsonable({k: v for k, v in r.items() if not k.startswith("_")})) for r in records]
    cols: list[str] = []
    for row in rows:
        cols += [c for c in row if c not in cols]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="planarindex", description="Index theory and subharmonics of planar Hamiltonian systems.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--system", help="catalog name with key=value parameters, or a JSON file")
    p.add_argument("--config", help="JSON run configuration; command-line flags override it")
    p.add_argument("--tol", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--sweep", action="append", help="name=lo:hi:n (repeat for a second axis)")
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    return p


def resolve_options(ns: argparse.Namespace) -> dict:
    conf = {}
    if ns.config:
        conf = json.loads(Path(ns.config).read_text())
        unknown = set(conf) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config fields {sorted(unknown)}")
        if "command" in conf and conf["command"] != ns.command:
            raise ConfigError("config command differs from the command line")
    opts = {
        "command": ns.command,
        "system": None,
        "tol": DEFAULT_TOL,
        "K": K_DEFAULT,
        "k": None,
        "j": None,
        "horizon": None,
        "n_max": None,
        "sweep": None,
        "workers": 1,
        "out": None,
        "format": "json",
    }
    opts.update({k: v for k, v in conf.items() if k != "command"})
    for key in CONFIG_KEYS - {"command"}:
        val = getattr(ns, key, None)
        if val is not None:
            opts[key] = val
    if opts["system"] is None:
        raise ConfigError("--system is required")
    if opts["K"] < 1:
        raise ConfigError("K must be positive")
    if opts["tol"] <= 0:
        raise ConfigError("tol must be positive")
    for key in ("k", "horizon", "workers"):
        if opts[key] is not None and opts[key] < 1:
            raise ConfigError(f"{key} must be a positive integer")
    if opts["n_max"] is not None and opts["n_max"] < 0:
        raise ConfigError("n_max must be nonnegative")
    opts["tol_orbit"] = max(opts["tol"], 1e-8) if ns.command == "hunt" else None
    return opts


def run(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    opts = {"command": ns.command, "format": ns.format or "json", "out": ns.out}
    try:
        opts = resolve_options(ns)
        header = {k: v for k, v in opts.items() if v is not None}
        if ns.command == "sweep":
            name, params = parse_system_spec(opts["system"])
            meta = {"catalog": name, **params}
            header["system_resolved"] = _jsonable(meta)
            records = cmd_sweep(meta, opts)
        else:
            system, meta = load_system(opts["system"])
            header["system_resolved"] = _jsonable(meta)
            records = HANDLERS[ns.command](system, opts)
        code = 0
    except (PlanarIndexError, ValueError, OSError) as err:
        exc = err if isinstance(err, PlanarIndexError) else ConfigError(str(err))
        header = {k: v for k, v in opts.items() if v is not None} if isinstance(opts, dict) else {}
        records = [{"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}]
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = exc.exit_code
    text = render(_jsonable(header), records, opts.get("format") or "json")
    if opts.get("out"):
        Path(opts["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
