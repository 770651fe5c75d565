"""Command line runner: seeded experiments with CSV/JSON output.

Exit codes: 0 success, 2 validation failure, 3 property violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from typing import Any, Sequence

import numpy as np
import pydantic

from . import analysis as an
from . import construct as co
from . import network as nw
from . import spectra as sp

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PROPERTY = 3

CSV_FIELDS = ["N", "L", "s", "seed", "error", "stderr", "width", "bound", "ok", "config_hash"]

DEFAULTS: dict[str, Any] = {
    "spec": None,
    "L": 1,
    "s": [0.5],
    "N": [8, 16, 32, 64, 128, 256],
    "seed": 0,
    "eps": 1.0,
    "out": None,
    "format": "csv",
    "quad_points": 1 << 13,
    "audit_points": 1 << 17,
    "flavor": "l2",
    "replicates": 16,
    "retries": 10,
}


class ValidationFailure(Exception):
    pass


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def _effective(args: argparse.Namespace, keys: Sequence[str]) -> dict:
    """Flags win over the JSON config, which wins over defaults."""
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationFailure(f"cannot read config: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationFailure("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS) - {"family", "net", "self_construct", "random", "points",
                                                   "psi_p", "d"}
        if unknown:
            raise ValidationFailure(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for k in keys:
        flag = getattr(args, k, None)
        if flag is not None:
            out[k] = flag
        elif k in file_cfg:
            out[k] = file_cfg[k]
        else:
            out[k] = DEFAULTS.get(k)
    # normalise list-valued keys coming from JSON
    for k, conv in (("N", int), ("s", float)):
        if k in out and out[k] is not None and not isinstance(out[k], list):
            out[k] = [conv(out[k])]
    return out


def _load_spec(path: str | None) -> sp.Spectrum:
    if not path:
        raise ValidationFailure("--spec is required")
    try:
        return sp.load_spectrum(path)
    except (OSError, json.JSONDecodeError, pydantic.ValidationError, ValueError) as exc:
        raise ValidationFailure(f"bad spectrum file {path}: {exc}") from exc


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_norms(args) -> int:
    cfg = _effective(args, ["spec", "s", "flavor", "out", "format"])
    spec = _load_spec(cfg["spec"])
    flavor = sp.NormFlavor(cfg["flavor"])
    s_list = sorted(float(v) for v in cfg["s"])
    rows = []
    try:
        ups0 = spec.norm(0.0, flavor)
        for s in s_list:
            rows.append({"s": s, "upsilon": spec.norm(s, flavor), "barron": ups0 + spec.norm(s, flavor)})
        audits = []
        for s1, s_mid, s2 in zip(s_list, s_list[1:], s_list[2:]):
            rep = sp.moment_inequality_report(spec, s1, s_mid, s2, flavor)
            audits.append({"s1": s1, "s": s_mid, "s2": s2, "holds": rep.holds(),
                           "holder": [rep.holder_lhs, rep.holder_rhs],
                           "barron": [rep.barron_lhs, rep.barron_rhs],
                           "monotone": [rep.monotone_lhs, rep.monotone_rhs]})
    except sp.DivergenceError as exc:
        sys.stderr.write(f"divergent: {exc}\n")
        return EXIT_VALIDATION
    if cfg["format"] == "json":
        _write(_json({"flavor": flavor.value, "norms": rows, "moment_audit": audits}), cfg["out"])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "upsilon", "barron"])
        for r in rows:
            w.writerow([_fmt(r["s"]), _fmt(r["upsilon"]), _fmt(r["barron"])])
        for a in audits:
            buf.write(f"# moment s1={_fmt(a['s1'])} s={_fmt(a['s'])} s2={_fmt(a['s2'])} holds={_fmt(a['holds'])}\n")
        _write(buf.getvalue(), cfg["out"])
    return EXIT_OK if all(a["holds"] for a in audits) else EXIT_PROPERTY


def _construct_cfg(cfg: dict, seed: int) -> co.ConstructConfig:
    return co.ConstructConfig(retries=int(cfg["retries"]), epsilon=float(cfg["eps"]), seed=int(seed),
                              quad_points=int(cfg["quad_points"]), audit_points=int(cfg["audit_points"]))


def cmd_convergence(args) -> int:
    keys = ["spec", "L", "s", "N", "seed", "eps", "out", "format", "quad_points", "audit_points",
            "replicates", "retries"]
    cfg = _effective(args, keys)
    spec = _load_spec(cfg["spec"])
    L = int(cfg["L"])
    s = float(cfg["s"][0])
    if not (0 < s * L <= 0.5):
        raise ValidationFailure("need 0 < sL <= 1/2")
    Ns = sorted(int(n) for n in cfg["N"])
    h = config_hash({k: cfg[k] for k in keys if k not in ("out", "format")} | {"spec_data": sp.spectrum_to_dict(spec)})
    ccfg = _construct_cfg(cfg, int(cfg["seed"]))
    rows = []
    rms = []
    violated = False
    for N in Ns:
        errs = []
        for k in range(int(cfg["replicates"])):
            sd = co.replicate_seed(int(cfg["seed"]), N, k)
            try:
                rep = co.construct_deep(spec, L, s, N, _construct_cfg(cfg, sd))
                row = {"N": N, "L": L, "s": s, "seed": sd, "error": rep.measured_l2, "stderr": rep.stderr,
                       "width": rep.width, "bound": rep.bound, "ok": rep.accepted}
                errs.append(rep.measured_l2)
                violated |= rep.measured_l2 > rep.bound
            except (ValueError, ArithmeticError, sp.UnsupportedError) as exc:
                row = {"N": N, "L": L, "s": s, "seed": sd, "error": math.nan, "stderr": math.nan,
                       "width": 0, "bound": math.nan, "ok": False, "failure": str(exc)}
            row["config_hash"] = h
            rows.append(row)
        if errs:
            rms.append((N, float(np.sqrt(np.mean(np.square(errs))))))
    fit = an.rate_fit(rms) if len(rms) >= 4 else None
    summary = {"config_hash": h, "L": L, "s": s, "rms": rms,
               "slope": fit.slope if fit else None, "slope_stderr": fit.stderr if fit else None,
               "threshold": -s * L + 0.15}
    if cfg["format"] == "json":
        _write(_json({"rows": rows, "summary": summary}), cfg["out"])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in CSV_FIELDS])
        if fit:
            buf.write(f"# rate_fit slope={_fmt(fit.slope)} stderr={_fmt(fit.stderr)} config_hash={h}\n")
        _write(buf.getvalue(), cfg["out"])
    return EXIT_PROPERTY if violated else EXIT_OK


def cmd_lowerbound(args) -> int:
    cfg = _effective(args, ["L", "N", "s", "eps", "seed", "out", "format"])
    L, s, eps = int(cfg["L"]), float(cfg["s"][0]), float(cfg["eps"])
    if eps > 0.5:
        raise ValidationFailure("lower bound needs 0 < eps <= 1/2")
    Ns = [int(n) for n in cfg["N"]]
    nets_from_files = []
    for path in args.net or []:
        try:
            nets_from_files.append((path, nw.load_network(path)))
        except (OSError, json.JSONDecodeError, pydantic.ValidationError, ValueError) as exc:
            raise ValidationFailure(f"bad network file {path}: {exc}") from exc
    rows = []
    for N in Ns:
        nets = list(nets_from_files)
        if args.self_construct:
            inst = co.hard_instance(L, N, s, eps)
            rep = co.construct_deep(inst.spectrum, L, s, N, co.ConstructConfig(seed=int(cfg["seed"])))
            nets.append(("self-construct", rep.network))
        rng = np.random.default_rng([int(cfg["seed"]), N])
        for i in range(args.random or 0):
            nets.append((f"random-{i}", an.random_heaviside_network(rng, L, N)))
        if not nets:
            nets.append(("zero", nw.zero_network(1, L)))
        try:
            recs = an.lower_bound_check(L, N, s, eps, [n for _, n in nets])
        except ValueError as exc:
            raise ValidationFailure(str(exc)) from exc
        for (name, _), rec in zip(nets, recs):
            rows.append({"N": N, "L": L, "s": s, "net": name, "measured": rec.measured, "bound": rec.bound,
                         "ok": rec.ok, "pieces": rec.pieces})
    if cfg["format"] == "json":
        _write(_json({"rows": rows}), cfg["out"])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["N", "L", "s", "net", "measured", "bound", "ok", "pieces"]
        w.writerow(keys)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in keys])
        _write(buf.getvalue(), cfg["out"])
    return EXIT_OK if all(r["ok"] for r in rows) else EXIT_PROPERTY


_EMBED_FAMILIES = {
    "gauss": lambda d: sp.GaussFamily(1.0, d),
    "bochner_riesz": lambda d: sp.BochnerRiesz(1.0, 2.0, d),
}


def cmd_embedding(args) -> int:
    cfg = _effective(args, ["s", "out"])
    families = [f for f in (args.family or "gauss,bochner_riesz").split(",") if f]
    dims = _ints(args.d) if args.d else [1, 2]
    report: dict[str, Any] = {"sandwich": [], "psi_decay": None, "banach": None}
    ok = True
    for fam in families:
        if fam not in _EMBED_FAMILIES:
            raise ValidationFailure(f"unknown family {fam}")
        for d in dims:
            if d not in (1, 2):
                raise ValidationFailure("d must be 1 or 2")
            for s in cfg["s"]:
                rec = an.sandwich_check(_EMBED_FAMILIES[fam](d), float(s))
                ok &= rec.ok
                report["sandwich"].append({"family": fam, "d": d, "s": float(s), "lhs_ok": rec.lhs_ok,
                                           "rhs_ok": rec.rhs_ok, "lhs_margin": rec.lhs_margin,
                                           "lhs_margin_lower_end": rec.lhs_margin_lower_end,
                                           "rhs_margin": rec.rhs_margin, "barron": rec.barron})
    if args.psi_p:
        fit = an.psi_n_decay(float(args.psi_p), 1.0, 0.5)
        within = abs(fit.slope - fit.predicted) <= 0.05
        ok &= within
        report["psi_decay"] = {"p": float(args.psi_p), "slope": fit.slope, "predicted": fit.predicted,
                               "norms": list(fit.norms), "n": list(fit.n_list), "within_tolerance": within}
    if args.banach:
        rows = [sp.banach_growth_report(n, 1.0, 1.0, 1, True) for n in range(1, args.banach + 1)]
        ratios = [r.ratio for r in rows]
        fit = np.polyfit(np.arange(1, args.banach + 1), ratios, 1)
        report["banach"] = {"ratios": ratios, "linear_slope": float(fit[0])}
    _write(_json(report), cfg["out"])
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_construct(args) -> int:
    cfg = _effective(args, ["spec", "L", "s", "N", "seed", "eps", "out", "quad_points", "audit_points",
                            "retries"])
    spec = _load_spec(cfg["spec"])
    L, s, N = int(cfg["L"]), float(cfg["s"][0]), int(cfg["N"][0])
    try:
        rep = co.construct_deep(spec, L, s, N, _construct_cfg(cfg, int(cfg["seed"])))
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    if cfg["out"]:
        nw.save_network(rep.network, cfg["out"])
    summary = rep.to_dict()
    summary["config_hash"] = config_hash({k: cfg[k] for k in cfg if k != "out"})
    if args.report:
        _write(_json(summary), args.report)
    else:
        _write(_json(summary), None)
    return EXIT_OK if rep.accepted else EXIT_PROPERTY


def _parse_points(text: str, d: int) -> np.ndarray:
    rows = [r for r in text.split(";") if r.strip()]
    pts = np.array([_floats(r) for r in rows], dtype=float)
    if pts.ndim != 2 or pts.shape[1] != d:
        raise ValidationFailure(f"points must have {d} coordinates each")
    return pts


def cmd_eval(args) -> int:
    cfg = _effective(args, ["spec", "out", "format"])
    if bool(args.net) == bool(cfg["spec"]):
        raise ValidationFailure("give exactly one of --net or --spec")
    if args.net:
        try:
            obj = nw.load_network(args.net)
        except (OSError, json.JSONDecodeError, pydantic.ValidationError, ValueError) as exc:
            raise ValidationFailure(f"bad network file: {exc}") from exc
        d = obj.input_dim
    else:
        obj = _load_spec(cfg["spec"])
        d = obj.dim
    if not args.points:
        raise ValidationFailure("--points is required")
    pts = _parse_points(args.points, d)
    vals = np.asarray(obj.eval(pts), dtype=complex).reshape(-1)
    if cfg["format"] == "json":
        _write(_json({"points": pts.tolist(), "values": [[v.real, v.imag] for v in vals]}), cfg["out"])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(d)] + ["re", "im"])
        for p, v in zip(pts, vals):
            w.writerow([_fmt(float(c)) for c in p] + [_fmt(float(v.real)), _fmt(float(v.imag))])
        _write(buf.getvalue(), cfg["out"])
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="specbarron", description="Spectral Barron network experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp_, *names):
        sp_.add_argument("--config", help="JSON config; flags take precedence")
        if "spec" in names:
            sp_.add_argument("--spec", help="spectrum description file")
        if "L" in names:
            sp_.add_argument("--L", type=int)
        if "s" in names:
            sp_.add_argument("--s", type=_floats, help="smoothness (comma list where allowed)")
        if "N" in names:
            sp_.add_argument("--N", type=_ints, help="width budget(s), comma list")
        if "seed" in names:
            sp_.add_argument("--seed", type=int)
        if "eps" in names:
            sp_.add_argument("--eps", type=float)
        sp_.add_argument("--out", help="output path (default stdout)")
        if "format" in names:
            sp_.add_argument("--format", choices=["csv", "json"])
        if "quad" in names:
            sp_.add_argument("--quad-points", dest="quad_points", type=int)
            sp_.add_argument("--audit-points", dest="audit_points", type=int)
            sp_.add_argument("--retries", type=int)

    n = sub.add_parser("norms", help="spectral norms and moment audit")
    common(n, "spec", "s", "format")
    n.add_argument("--flavor", choices=["l1", "l2"])
    n.set_defaults(func=cmd_norms)

    c = sub.add_parser("convergence", help="deep construction rate sweep")
    common(c, "spec", "L", "s", "N", "seed", "eps", "format", "quad")
    c.add_argument("--replicates", type=int)
    c.set_defaults(func=cmd_convergence)

    lb = sub.add_parser("lowerbound", help="check networks against the hard instance")
    common(lb, "L", "N", "s", "seed", "eps", "format")
    lb.add_argument("--net", action="append", help="network file (repeatable)")
    lb.add_argument("--self-construct", dest="self_construct", action="store_true")
    lb.add_argument("--random", type=int, default=0, help="number of random step networks")
    lb.set_defaults(func=cmd_lowerbound)

    e = sub.add_parser("embedding", help="Besov sandwich and psi_n decay")
    common(e, "s")
    e.add_argument("--family", help="comma list: gauss,bochner_riesz")
    e.add_argument("--d", help="comma list of dimensions (1,2)")
    e.add_argument("--psi-p", dest="psi_p", type=float)
    e.add_argument("--banach", type=int, default=0, help="report Banach-sum growth up to n")
    e.set_defaults(func=cmd_embedding)

    k = sub.add_parser("construct", help="build one network and write it")
    common(k, "spec", "L", "s", "N", "seed", "eps", "quad")
    k.add_argument("--report", help="path for the JSON run report")
    k.set_defaults(func=cmd_construct)

    v = sub.add_parser("eval", help="evaluate a network or spectrum")
    common(v, "spec", "format")
    v.add_argument("--net", help="network file")
    v.add_argument("--points", help="points as 'x1,x2;x1,x2;...'")
    v.set_defaults(func=cmd_eval)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VALIDATION if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ValidationFailure as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except (pydantic.ValidationError, sp.UnsupportedError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
