"""Command-line front end: ``adaptive-mt analyze | simulate | compare-pi0``.

Machine-readable outputs are tab-separated. Floats are written with
``repr`` so that ``read_report`` gives back identical values.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .backbone import pi0_backbone
from .ecdf import PValueSample
from .errors import DomainError
from .numeric import RngStream
from .pi0_baselines import bh_pi0_slope, storey_pi0, storey_pi0_bootstrap
from .procedures import adaptive_bh, bh_stepup, qvalue_threshold, qvalues
from .simkit import (
    API,
    BH,
    FDR_LEVELS,
    TABLE3,
    AdaptiveBH,
    AltRule,
    HardThreshold,
    QValue,
    SimModelConfig,
    compare_pi0,
    mc_harness_multi,
    reject_all,
    reject_none,
    scaled_config,
    table3_config,
)
from .thresholds import DEFAULT_ALPHA0, alpha0_from_target, alpha_hat_cal

DEFAULT_REPS = 200
PI0_CHOICES = ("backbone", "storey", "storey-boot", "bh-slope")


class UsageError(Exception):
    """Bad invocation; exits with status 2."""


# ---------------------------------------------------------------- I/O helpers


def parse_pvalues(text: str, source: str = "<input>") -> np.ndarray:
    """One P value per line. '#' starts a comment; a non-numeric first
    data line is taken as a CSV column header."""
    values = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        token = line.rstrip(",").strip()
        try:
            v = float(token)
        except ValueError:
            if not seen_data and not values:
                seen_data = True  # header row
                continue
            raise DomainError(f"{source}:{lineno}: cannot parse {raw.strip()!r} as a number") from None
        seen_data = True
        if not (math.isfinite(v) and 0.0 <= v <= 1.0):
            raise DomainError(f"{source}:{lineno}: P value {v!r} is outside [0, 1]")
        values.append(v)
    if not values:
        raise UsageError(f"{source}: no P values found")
    return np.asarray(values)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return "none"
    return str(v)


def _parse_value(s: str):
    if s == "true":
        return True
    if s == "false":
        return False
    if s == "none":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def write_kv(path: Path, items: Sequence[tuple[str, object]]) -> None:
    with open(path, "w") as fh:
        for k, v in items:
            fh.write(f"{k}\t{_fmt(v)}\n")


def read_report(path) -> dict:
    """Read a key-value report back into a dict with the original types."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            k, _, v = line.partition("\t")
            out[k] = _parse_value(v)
    return out


def write_tsv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def read_tsv(path) -> list[dict]:
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        return [dict(zip(header, map(_parse_value, line.rstrip("\n").split("\t")))) for line in fh if line.strip()]


def _float_list(s: str, what: str) -> list[float]:
    try:
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {s!r}") from None
    if not vals:
        raise UsageError(f"{what}: empty list")
    return vals


# ---------------------------------------------------------------- analyze


def analyze(pvalues, alpha0: float = DEFAULT_ALPHA0, q_levels=FDR_LEVELS, pi0_methods=PI0_CHOICES, seed: int = 0):
    """Build the analysis report as an ordered list of (key, value) pairs plus q-values."""
    sample = PValueSample(pvalues)
    stream = RngStream(seed)
    items: list[tuple[str, object]] = [("m", sample.m), ("alpha0", alpha0)]

    est = pi0_backbone(sample)
    if "backbone" in pi0_methods:
        items.append(("pi0.backbone", est.value))
    if "storey" in pi0_methods:
        items.append(("pi0.storey", storey_pi0(sample).value))
    storey_boot = storey_pi0_bootstrap(sample, stream=stream)
    if "storey-boot" in pi0_methods:
        items.append(("pi0.storey_boot", storey_boot.value))
    slope = bh_pi0_slope(sample)
    if "bh-slope" in pi0_methods:
        items.append(("pi0.bh_slope", slope.value))

    items += [
        ("backbone.tau", float(est.params.get("tau", 0.0))),
        ("backbone.gamma", float(est.params.get("gamma", 1.0))),
        ("backbone.max_gap", float(est.params["max_gap"])),
        ("backbone.guard", bool(est.params["guard"])),
        ("backbone.fallback", bool(est.params["fallback"])),
    ]
    api = alpha_hat_cal(sample, alpha0, est)
    items += [("api.alpha", api.alpha), ("api.rejections", api.rejections)]
    for q in q_levels:
        for name, res in (
            ("bh", bh_stepup(sample, q)),
            ("abh", adaptive_bh(sample, q, slope)),
            ("qvalue", qvalue_threshold(sample, q, storey_boot)),
        ):
            items += [(f"{name}.{q!r}.alpha", res.alpha), (f"{name}.{q!r}.rejections", res.rejections)]
    return items, qvalues(sample, storey_boot)


def _render_analysis(items) -> str:
    width = max(len(k) for k, _ in items)
    return "\n".join(f"{k:<{width}}  {_fmt(v)}" for k, v in items) + "\n"


def cmd_analyze(args) -> int:
    if args.alpha0 is not None and args.target_alpha1 is not None:
        raise UsageError("give at most one of --alpha0 and --target-alpha1")
    alpha0 = DEFAULT_ALPHA0
    if args.target_alpha1 is not None:
        alpha0 = alpha0_from_target(args.target_alpha1)
    elif args.alpha0 is not None:
        alpha0 = args.alpha0
    if not alpha0 > 0:
        raise UsageError("alpha0 must be positive")
    q_levels = FDR_LEVELS if args.q_levels is None else _float_list(args.q_levels, "--q-levels")
    methods = PI0_CHOICES if args.pi0_method == "all" else (args.pi0_method,)

    path = Path(args.input)
    text = sys.stdin.read() if args.input == "-" else path.read_text()
    pvalues = parse_pvalues(text, args.input)
    items, qv = analyze(pvalues, alpha0, q_levels, methods, args.seed)
    if args.target_alpha1 is not None:
        items.insert(1, ("target_alpha1", args.target_alpha1))
    sys.stdout.write(_render_analysis(items))
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "analysis.txt").write_text(_render_analysis(items))
        write_kv(out / "analysis.kv", items)
        write_tsv(out / "qvalues.tsv", ("index", "pvalue", "qvalue"), zip(range(1, len(pvalues) + 1), pvalues, qv))
    return 0


# ---------------------------------------------------------------- simulate


def _levels(spec: str) -> list[float]:
    """'0.05' -> [0.05]; '0.01..0.7' -> the standard levels inside that range."""
    if ".." in spec:
        lo, hi = (float(x) for x in spec.split("..", 1))
        levels = [q for q in FDR_LEVELS if lo - 1e-12 <= q <= hi + 1e-12]
        if not levels:
            raise UsageError(f"no standard level lies in {spec}")
        return levels
    return [float(spec)]


def parse_methods(spec: str) -> dict:
    """Parse e.g. 'api,bh:0.01..0.7,abh:0.05' into named rejection methods."""
    methods = {}
    for token in (t.strip() for t in spec.split(",")):
        if not token:
            continue
        name, _, arg = token.partition(":")
        try:
            if name == "api":
                a0 = float(arg) if arg else DEFAULT_ALPHA0
                methods[f"api:{a0!r}"] = API(a0)
            elif name in ("bh", "abh", "qvalue"):
                cls = {"bh": BH, "abh": AdaptiveBH, "qvalue": QValue}[name]
                for q in _levels(arg) if arg else FDR_LEVELS:
                    methods[f"{name}:{q!r}"] = cls(q)
            elif name == "ht":
                methods[f"ht:{float(arg)!r}"] = HardThreshold(float(arg))
            elif name == "all":
                methods["all"] = reject_all
            elif name == "none":
                methods["none"] = reject_none
            else:
                raise UsageError(f"unknown method {name!r}; use api, bh, abh, qvalue, ht, all or none")
        except ValueError:
            raise UsageError(f"bad method spec {token!r}") from None
    if not methods:
        raise UsageError("no methods given")
    return methods


def load_config(path) -> SimModelConfig:
    """JSON config: either {"base_model": id, "m": .., "m1": ..} to rescale a
    standard model, or a full {"model_id", "m", "m1", "sigma", "rules"} with
    rules as [lo, hi, source, coef, lag] lists (source null for the lag rule)."""
    with open(path) as fh:
        cfg = json.load(fh)
    if "base_model" in cfg:
        base = table3_config(int(cfg["base_model"]))
        if "sigma" in cfg:
            base = SimModelConfig(base.model_id, base.m, base.m1, float(cfg["sigma"]), base.rules)
        if "m" in cfg:
            return scaled_config(base, int(cfg["m"]), cfg.get("m1"))
        return base
    rules = tuple(AltRule(*r) for r in cfg.get("rules", ()))
    return SimModelConfig(int(cfg.get("model_id", 0)), int(cfg["m"]), int(cfg["m1"]), float(cfg["sigma"]), rules)


def _model_source(model: Optional[int], config: Optional[str], m: Optional[int]) -> SimModelConfig:
    if (model is None) == (config is None):
        raise UsageError("give exactly one of --model and --config")
    if config is not None:
        return load_config(config)
    if model not in TABLE3:
        raise UsageError(f"unknown model id {model}; valid ids are {', '.join(map(str, sorted(TABLE3)))}")
    cfg = table3_config(model)
    return scaled_config(cfg, m) if m is not None and m != cfg.m else cfg


def _check_reps(reps: int) -> None:
    if reps < 1:
        raise UsageError("--reps must be at least 1")


CURVE_HEADER = ("method", "level", "fdr_hat", "fndp_hat", "err_hat", "perr_hat", "fdr_se", "reps")


def cmd_simulate(args) -> int:
    _check_reps(args.reps)
    source = _model_source(args.model, args.config, args.m)
    methods = parse_methods(args.methods)
    reports = mc_harness_multi(source, methods, args.reps, args.seed, workers=args.workers)
    rows = []
    for key, rep in reports.items():
        name, _, level = key.partition(":")
        rows.append(
            (
                name,
                float(level) if level else math.nan,
                rep.fdr_hat,
                rep.fndp_hat,
                rep.err_hat,
                rep.perr_hat,
                rep.fdr_se,
                rep.reps,
            )
        )
    sys.stdout.write("\t".join(CURVE_HEADER) + "\n")
    for row in rows:
        sys.stdout.write("\t".join(_fmt(v) for v in row) + "\n")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_tsv(out / "curves.tsv", CURVE_HEADER, rows)
        for key, rep in reports.items():
            items = [
                ("method", key),
                ("model_id", source.model_id),
                ("m", source.m),
                ("m1", source.m1),
                ("sigma", source.sigma),
                ("seed", rep.seed),
                ("reps", rep.reps),
                ("fdr_hat", rep.fdr_hat),
                ("fndp_hat", rep.fndp_hat),
                ("err_hat", rep.err_hat),
                ("perr_hat", rep.perr_hat),
                ("fdr_se", rep.fdr_se),
                ("per_rep", ";".join(f"{v},{s},{r}" for v, s, r in rep.per_rep)),
            ]
            write_kv(out / f"mc_{key.replace(':', '_')}.kv", items)
    return 0


# ---------------------------------------------------------------- compare-pi0

ESTIMATOR_NAMES = {
    "backbone": "backbone",
    "storey": "storey",
    "storey-boot": "storey_bootstrap",
    "bh-slope": "bh_slope",
}
PI0_HEADER = ("model", "m", "m1", "estimator", "true_pi0", "mean", "bias", "rmse", "reps")


def cmd_compare_pi0(args) -> int:
    _check_reps(args.reps)
    if args.config is not None:
        sources = [load_config(args.config)]
    else:
        if not args.model:
            raise UsageError("give --model (comma-separated ids) or --config")
        try:
            ids = [int(x) for x in args.model.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"--model: expected comma-separated ids, got {args.model!r}") from None
        sources = [_model_source(i, None, args.m) for i in ids]
    chosen = PI0_CHOICES if args.pi0_method == "all" else (args.pi0_method,)
    estimators = [ESTIMATOR_NAMES[c] for c in chosen]
    rows = []
    for src in sources:
        for s in compare_pi0(src, estimators, args.reps, args.seed, workers=args.workers):
            rows.append((src.model_id, src.m, src.m1, s.estimator, s.true_pi0, s.mean, s.bias, s.rmse, s.reps))
    sys.stdout.write("\t".join(PI0_HEADER) + "\n")
    for row in rows:
        sys.stdout.write("\t".join(_fmt(v) for v in row) + "\n")
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_tsv(out / "pi0_compare.tsv", PI0_HEADER, rows)
    return 0


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adaptive-mt", description="Adaptive multiple-testing thresholds.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a file of P values")
    a.add_argument("--input", required=True, help="P-value file ('-' for stdin)")
    a.add_argument("--alpha0", type=float, default=None, help=f"calibrator (default {DEFAULT_ALPHA0})")
    a.add_argument("--target-alpha1", type=float, default=None, help="limiting all-null error to convert to alpha0")
    a.add_argument("--q-levels", default=None, help="comma-separated FDR levels")
    a.add_argument("--pi0-method", choices=PI0_CHOICES + ("all",), default="all")
    a.add_argument("--seed", type=int, default=0, help="seed for the bootstrap")
    a.add_argument("--out-dir", default=None)
    a.set_defaults(func=cmd_analyze)

    def sim_common(sp):
        sp.add_argument("--config", default=None, help="JSON model config")
        sp.add_argument("--m", type=int, default=None, help="rescale the model to m variables")
        sp.add_argument("--reps", type=int, default=DEFAULT_REPS)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=None, help="thread count (capped by ADAPTIVE_MT_THREADS)")
        sp.add_argument("--out-dir", default=None)

    s = sub.add_parser("simulate", help="Monte Carlo error rates on a benchmark model")
    s.add_argument("--model", type=int, default=None, help="model id 1-10")
    s.add_argument("--methods", default="api,bh:0.01..0.7", help="e.g. api,bh:0.01..0.7,abh:0.05")
    sim_common(s)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare-pi0", help="root-MSE and bias of the pi0 estimators")
    c.add_argument("--model", default=None, help="comma-separated model ids")
    c.add_argument("--pi0-method", choices=PI0_CHOICES + ("all",), default="all")
    sim_common(c)
    c.set_defaults(func=cmd_compare_pi0)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (DomainError, ValueError, OSError) as exc:
        print(f"adaptive-mt: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
