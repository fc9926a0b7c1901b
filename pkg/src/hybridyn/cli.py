"""Command-line front end.

Exit codes: 0 success, 1 computation error, 2 validation error.  Every
artifact written with ``--out`` embeds the command, its configuration, the
seed and the package version; ``--verify FILE`` recomputes an artifact and
compares it byte for byte.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

from . import __version__, barycenter, berk, cxdyn, hybrid, moduli
from .hyp3 import H3Point
from .puiseux import truncation_terms
from .ratmap import RationalMap


class ValidationError(ValueError):
    pass


COMMANDS = ["resultant", "minres", "equilibrium", "lyapunov", "berk-eval", "berk-preimage",
            "berk-ordres", "berk-lyapunov", "luo-radius", "hybrid-run", "cone-check",
            "measure-conv"]


# ---------------------------------------------------------------------------
# input helpers


def _load_json_arg(value: str, name: str):
    if value.startswith("@"):
        try:
            with open(value[1:]) as fh:
                return json.load(fh)
        except OSError as exc:
            raise ValidationError(f"{name}: cannot read {value[1:]}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{name}: invalid JSON: {exc}") from None
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{name}: invalid JSON: {exc}") from None


def _map(cfg: dict, field_type: str | None = None) -> RationalMap:
    if "map" not in cfg:
        raise ValidationError("map: required (use --map or the config field 'map')")
    data = cfg["map"]
    if isinstance(data, str):
        data = _load_json_arg(data, "map")
    try:
        f = RationalMap.from_json(data)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"map: {exc}") from None
    if field_type is not None and f.field.name != field_type:
        raise ValidationError(f"map: field must be {field_type!r}, got {f.field.name!r}")
    return f


def _point(cfg: dict):
    if "point" not in cfg:
        raise ValidationError("point: required")
    try:
        return berk.parse_point(str(cfg["point"]))
    except Exception as exc:
        raise ValidationError(f"point: {exc}") from None


def _int(cfg, key, default):
    try:
        return int(cfg.get(key, default))
    except (TypeError, ValueError):
        raise ValidationError(f"{key}: must be an integer") from None


def _ns(cfg, default):
    ns = cfg.get("ns", default)
    if isinstance(ns, dict):
        try:
            ns = list(range(int(ns["start"]), int(ns["stop"]) + 1, int(ns.get("step", 1))))
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"ns: {exc}") from None
    if not isinstance(ns, list) or not ns:
        raise ValidationError("ns: must be a nonempty list or {start, stop}")
    return ns


def _eps(cfg, ns):
    scale = float(cfg.get("eps_scale", 1.0))
    if "eps" in cfg:
        eps = cfg["eps"]
        if not isinstance(eps, list) or len(eps) != len(ns):
            raise ValidationError("eps: must be a list matching ns")
        return [float(e) for e in eps]
    return [scale / n for n in ns]


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    return x


# ---------------------------------------------------------------------------
# commands: each returns (text, result dict, extra files)


def cmd_resultant(cfg):
    f = _map(cfg)
    r = f.resultant()
    text = str(r) if not isinstance(r, complex) else repr(r)
    return text, {"resultant": text, "neg_log_norm_resultant": str(f.neg_log_norm_resultant())}, {}


def cmd_minres(cfg):
    f = _map(cfg, "complex")
    r = moduli.minimize_neg_log_res(f, budget=_int(cfg, "budget", 20000), seed=_int(cfg, "seed", 0))
    g = moduli.epsilon_from_neg_log(r.neg_log, f.degree)
    res = r.to_json()
    res["epsilon"] = g.epsilon
    res["C_d"] = g.C_d
    return f"neg_log_res={r.neg_log!r} epsilon={g.epsilon!r}", res, {}


def cmd_equilibrium(cfg):
    f = _map(cfg, "complex")
    s = cxdyn.sample_equilibrium(f, _int(cfg, "N", 10000), _int(cfg, "depth", 25), _int(cfg, "seed", 0))
    return f"{s.n} samples at depth {s.depth}", {"N": s.n, "depth": s.depth}, {"samples.csv": s.to_csv()}


def cmd_lyapunov(cfg):
    f = _map(cfg, "complex")
    est, se = cxdyn.lyapunov_mc(f, _int(cfg, "N", 100000), _int(cfg, "depth", 25), _int(cfg, "seed", 0))
    return f"chi={est!r} stderr={se!r}", {"estimate": est, "stderr": se}, {}


def _with_trunc(cfg, fn):
    n = _int(cfg, "truncation", 24)
    with truncation_terms(n):
        return fn()


def cmd_berk_eval(cfg):
    f = _map(cfg, "puiseux")
    x = _point(cfg)
    y, deg = _with_trunc(cfg, lambda: berk.image_with_degree(f, x))
    text = f"{y}" + ("" if deg is None else f" deg={deg}")
    return text, {"image": str(y), "local_degree": deg}, {}


def cmd_berk_preimage(cfg):
    f = _map(cfg, "puiseux")
    y = _point(cfg)
    if not isinstance(y, berk.Type2):
        raise ValidationError("point: preimages need a Type-2 point zeta(a, q)")
    pre = _with_trunc(cfg, lambda: berk.preimage_point(f, y))
    text = "\n".join(f"{x} deg={m}" for x, m in pre)
    return text, {"preimages": [[str(x), m] for x, m in pre]}, {}


def cmd_berk_ordres(cfg):
    f = _map(cfg, "puiseux")
    conv = cfg.get("convention", "literal")
    if cfg.get("minimize"):
        om = _with_trunc(cfg, lambda: berk.ordres_minimize(f))
        if conv == "rumely":
            pt = om.rumely_point
        else:
            pt = om.point
        text = f"min={om.value} at {pt}"
        return text, {"min": str(om.value), "point": str(pt), "rumely_point": str(om.rumely_point),
                      "certified": om.certified}, {}
    x = _point(cfg)
    if not isinstance(x, berk.Type2):
        raise ValidationError("point: ordres needs a Type-2 point")
    v = _with_trunc(cfg, lambda: berk.ordres(f, x, conv))
    return f"{v}", {"ordres": str(v), "point": str(x), "convention": conv}, {}


def cmd_berk_lyapunov(cfg):
    f = _map(cfg, "puiseux")
    depth = _int(cfg, "depth", 6)
    v = _with_trunc(cfg, lambda: berk.lyapunov_na(f, depth))
    return f"{v}", {"lyapunov": str(v), "depth": depth}, {}


def cmd_luo_radius(cfg):
    f = _map(cfg, "complex")
    L = barycenter.luo_radius(f, N=_int(cfg, "N", 20000), seed=_int(cfg, "seed", 0))
    return f"r_luo={L.value!r}", L.to_json(), {}


def _family(cfg):
    if "family" not in cfg:
        return hybrid.canonical_family()
    try:
        return hybrid.MeromorphicFamily.from_json(cfg["family"])
    except (ValueError, TypeError, KeyError) as exc:
        raise ValidationError(f"family: {exc}") from None


def cmd_hybrid_run(cfg):
    fam = _family(cfg)
    ns = _ns(cfg, list(range(5, 41)))
    keys = ["N", "depth", "seed", "budget", "na_depth", "tolerance", "eps_multiplier", "luo",
            "luo_N", "probes", "compare_n"]
    sub = {k: cfg[k] for k in keys if k in cfg}
    rep = hybrid.run_degeneration(fam, ns, sub)
    out = rep.to_json()
    text = json.dumps(_jsonable(rep.verdicts), sort_keys=True)
    return text, out, {"report.csv": rep.to_csv()}


def cmd_cone_check(cfg):
    if "M" not in cfg:
        raise ValidationError("M: required (2x2 matrix of Laurent polynomials)")
    ns = _ns(cfg, list(range(5, 41)))
    res = hybrid.cone_isometry_check(cfg["M"], ns, _eps(cfg, ns))
    return f"lhs={res['lhs']!r} rhs={res['rhs']} gap={res['gap']!r}", res, {}


def cmd_measure_conv(cfg):
    ns = _ns(cfg, list(range(5, 41)))
    poly = cfg.get("log_h_poly")
    if not isinstance(poly, list):
        raise ValidationError("log_h_poly: required list [c0, c1, c2, ...] for log h_n")
    xs = [H3Point(0j, sum(float(c) * n ** k for k, c in enumerate(poly))) for n in ns]
    probes = cfg.get("probes", [[1, -2], [1, 0], [0, 1]])
    eps = _eps(cfg, ns)
    tol = float(cfg.get("tolerance", 0.05))
    res = hybrid.measure_convergence_check(xs, eps, ns, probes, tol)
    return f"regime={res['regime']} limit={res.get('limit_point')} verdict={res['verdict']}", res, {}


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


# ---------------------------------------------------------------------------
# dispatch


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridyn", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output file (or directory for hybrid-run)")
        s.add_argument("--budget", type=int)
        s.add_argument("--tolerance", type=float)
        s.add_argument("--truncation", type=int)
        s.add_argument("--verify", metavar="FILE", help="recompute an artifact and compare")
        s.add_argument("--map", help="map JSON (or @file)")
        s.add_argument("--point", help="Berkovich point, e.g. 'zeta(0, 1/2)'")
        s.add_argument("--minimize", action="store_true")
        s.add_argument("--convention", choices=["literal", "rumely"])
        s.add_argument("--N", type=int, dest="N")
        s.add_argument("--depth", type=int)
    return p


def _config(args) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"config: cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config: invalid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ValidationError("config: must be a JSON object")
    for key in ("seed", "budget", "tolerance", "truncation", "map", "point", "convention", "N",
                "depth"):
        v = getattr(args, key)
        if v is not None:
            cfg[key] = v
    if args.minimize:
        cfg["minimize"] = True
    cfg.setdefault("seed", 0)
    return cfg


def artifact(command: str, cfg: dict, result: dict) -> dict:
    return {"command": command, "config": _jsonable(cfg), "seed": cfg.get("seed", 0),
            "version": __version__, "result": _jsonable(result)}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv_with_header(text: str, meta: dict) -> str:
    head = "".join(f"# {k}: {json.dumps(meta[k], sort_keys=True)}\n"
                   for k in ("command", "version", "seed", "config"))
    return head + text


def run(command: str, cfg: dict):
    text, result, files = HANDLERS[command](cfg)
    return text, artifact(command, cfg, result), files


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.verify:
            try:
                with open(args.verify) as fh:
                    old = json.load(fh)
                cfg = old["config"]
            except (OSError, json.JSONDecodeError, KeyError) as exc:
                raise ValidationError(f"verify: {exc}") from None
            if old.get("command") != args.command:
                raise ValidationError(f"verify: artifact was produced by {old.get('command')!r}")
            _, art, _ = run(args.command, cfg)
            same = dumps(art) == dumps(old)
            print("verified" if same else "MISMATCH")
            return 0 if same else 1
        cfg = _config(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text, art, files = run(args.command, cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(text)
    if args.out or files:
        if args.command == "hybrid-run" or (files and not args.out):
            outdir = args.out or "."
            os.makedirs(outdir, exist_ok=True)
            main_path = os.path.join(outdir, "report.json" if args.command == "hybrid-run"
                                     else f"{args.command}.json")
        else:
            main_path = args.out
            outdir = os.path.dirname(os.path.abspath(main_path))
        with open(main_path, "w") as fh:
            fh.write(dumps(art))
        for name, content in files.items():
            with open(os.path.join(outdir, name), "w") as fh:
                fh.write(_csv_with_header(content, art))
    return 0


if __name__ == "__main__":
    sys.exit(main())
