"""Experiment harness: encode codewords, run Monte Carlo complexity sweeps,
render figures, certify diversity, and evaluate the flop predictor.

Configs are flat key = value text.  Every run embeds its resolved config as
`# key = value` comment lines at the top of the output CSV, and the parser
reads those back, so a previous output file is itself a valid config
(round-trip reproducibility).  Identical config and seed give byte-identical
CSV output.
"""

from __future__ import annotations

import argparse
import csv
import io
import statistics
import sys

import numpy as np

from . import plots
from .channel import (ROLE_CHANNEL, ROLE_DATA, ROLE_NOISE, composite_matrix,
                      composite_structure, sample_channel, snr_to_noise_var,
                      transmit, trial_rng)
from .decoders import (DetectionProblem, babai_decode, fano_decode,
                       ml_exhaustive, sphere_decode)
from .encoder import ORIGINAL, TREE, encode, equivalent_matrix, make_code_params
from .errors import InvalidInput, Refused, TreeTastError
from .qr import givens_qr, predicted_flops
from .verify import min_rank_over_differences

FAMILY_NAMES = {"tree_tast": TREE, "original_tast": ORIGINAL}
DECODERS = ("ml", "sphere", "fano", "babai")
MODES = ("full", "qr_only", "certify")

# key order fixes the embedded-config byte layout
CONFIG_KEYS = ("code_family", "M", "N", "L", "constellation", "snr_db", "trials",
               "decoder", "fano_bias", "fano_delta", "seed", "mode", "theta",
               "phi", "tail_cut", "sample")

DEFAULT_CONFIG = {
    "code_family": ("tree_tast",),
    "M": 2,
    "N": None,           # defaults to M
    "L": (0,),
    "constellation": "bpsk",
    "snr_db": (10.0,),
    "trials": 200,
    "decoder": "fano",
    "fano_bias": "auto",
    "fano_delta": "auto",
    "seed": 0,
    "mode": "full",
    "theta": None,
    "phi": None,
    "tail_cut": False,
    "sample": None,
}


def parse_config_text(text: str) -> dict:
    """Extract raw key = value pairs.  Comment lines are uncommented first,
    so CSV files with an embedded `# key = value` header parse too; lines
    without '=' (CSV data, prose) are ignored."""
    raw = {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("#"):
            line = line.lstrip("#").strip()
        if "=" not in line:
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key and " " not in key:
            raw[key] = val
    return raw


def _parse_int(key, val):
    try:
        return int(val)
    except ValueError:
        raise InvalidInput(f"config key {key} needs an integer, got {val!r}")


def _parse_float(key, val):
    try:
        return float(val)
    except ValueError:
        raise InvalidInput(f"config key {key} needs a number, got {val!r}")


def _parse_list(key, val, parse_one):
    items = [v.strip() for v in str(val).split(",") if v.strip() != ""]
    if not items:
        raise InvalidInput(f"config key {key} needs at least one value")
    return tuple(parse_one(key, v) for v in items)


def _parse_complex(key, val):
    if val in ("", "none", "None"):
        return None
    try:
        return complex(val)
    except ValueError:
        raise InvalidInput(f"config key {key} needs a complex number, got {val!r}")


def resolve_config(raw: dict) -> dict:
    """Validate raw string pairs against the schema and fill defaults."""
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
    cfg = dict(DEFAULT_CONFIG)
    for key, val in raw.items():
        if key == "code_family":
            fams = _parse_list(key, val, lambda k, v: v)
            for f in fams:
                if f not in FAMILY_NAMES:
                    raise InvalidInput(
                        f"code_family must be in {sorted(FAMILY_NAMES)}, got {f!r}")
            cfg[key] = fams
        elif key in ("M", "N", "trials", "seed"):
            cfg[key] = _parse_int(key, val)
        elif key == "L":
            cfg[key] = _parse_list(key, val, _parse_int)
        elif key == "snr_db":
            cfg[key] = _parse_list(key, val, _parse_float)
        elif key == "constellation":
            cfg[key] = val
        elif key == "decoder":
            if val not in DECODERS:
                raise InvalidInput(f"decoder must be in {DECODERS}, got {val!r}")
            cfg[key] = val
        elif key in ("fano_bias", "fano_delta"):
            cfg[key] = "auto" if val == "auto" else _parse_float(key, val)
        elif key == "mode":
            if val not in MODES:
                raise InvalidInput(f"mode must be in {MODES}, got {val!r}")
            cfg[key] = val
        elif key in ("theta", "phi"):
            cfg[key] = _parse_complex(key, val)
        elif key == "tail_cut":
            if val not in ("true", "false"):
                raise InvalidInput(f"tail_cut must be true or false, got {val!r}")
            cfg[key] = val == "true"
        elif key == "sample":
            cfg[key] = None if val in ("", "none", "None") else _parse_int(key, val)
    if cfg["trials"] < 1:
        raise InvalidInput("trials must be >= 1")
    return cfg


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return str(v)
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def config_lines(cfg: dict) -> list:
    lines = []
    for key in CONFIG_KEYS:
        val = cfg[key]
        if val is None:
            continue
        lines.append(f"# {key} = {_fmt(val)}")
    return lines


def _make_params(cfg, family_name, L):
    return make_code_params(
        M=cfg["M"], L=L, N=cfg["N"], family=FAMILY_NAMES[family_name],
        constellation=cfg["constellation"], theta=cfg["theta"], phi=cfg["phi"],
        tail_cut=cfg["tail_cut"])


def _decode(decoder, problem, bias, delta):
    if decoder == "ml":
        return ml_exhaustive(problem)
    if decoder == "sphere":
        return sphere_decode(problem)
    if decoder == "fano":
        return fano_decode(problem, bias, delta)
    return babai_decode(problem)


def run_experiment(cfg: dict):
    """Monte Carlo sweep over (code_family, L, snr_db).  Returns
    (fieldnames, rows); rows are dicts of formatted strings.

    The same trial index reuses the same channel and data draws in every
    grid cell (common random numbers), so cross-family comparisons at a
    given trial count are paired.
    """
    if cfg["mode"] == "certify":
        return _run_certify(cfg)
    qr_only = cfg["mode"] == "qr_only"
    fieldnames = ["code_family", "M", "N", "L", "K", "T", "snr_db", "constellation",
                  "decoder", "trials", "seed", "fano_bias", "fano_delta",
                  "mean_nodes", "median_nodes", "mean_flops", "ser"]
    rows = []
    for family_name in cfg["code_family"]:
        for L in cfg["L"]:
            params = _make_params(cfg, family_name, L)
            eqm = equivalent_matrix(params)
            cstruct = composite_structure(eqm.structure, params.M, params.N)
            pts = params.constellation.points_array()
            for snr in cfg["snr_db"]:
                nv = snr_to_noise_var(params, snr)
                bias = nv if cfg["fano_bias"] == "auto" else cfg["fano_bias"]
                delta = nv if cfg["fano_delta"] == "auto" else cfg["fano_delta"]
                nodes, flops = [], []
                wrong = 0
                for t in range(cfg["trials"]):
                    H = sample_channel(trial_rng(cfg["seed"], t, ROLE_CHANNEL),
                                       params.N, params.M).H
                    comp = composite_matrix(H, eqm.G)
                    if qr_only:
                        res = givens_qr(comp, cstruct)
                        flops.append(res.flops)
                        continue
                    u = pts[trial_rng(cfg["seed"], t, ROLE_DATA)
                            .integers(0, pts.size, params.K)]
                    rb = transmit(params, H, u, nv,
                                  trial_rng(cfg["seed"], t, ROLE_NOISE))
                    res = givens_qr(comp, cstruct, rb.y)
                    flops.append(res.flops)
                    problem = DetectionProblem(res.R, res.Q_applied_y[:params.K],
                                               params.constellation)
                    rep = _decode(cfg["decoder"], problem, bias, delta)
                    nodes.append(rep.nodes_visited)
                    wrong += int(np.sum(rep.u_hat != u))
                row = {
                    "code_family": family_name,
                    "M": _fmt(params.M), "N": _fmt(params.N), "L": _fmt(L),
                    "K": _fmt(params.K), "T": _fmt(params.T),
                    "snr_db": _fmt(float(snr)),
                    "constellation": cfg["constellation"],
                    "decoder": cfg["decoder"],
                    "trials": _fmt(cfg["trials"]), "seed": _fmt(cfg["seed"]),
                    "fano_bias": _fmt(float(bias)) if cfg["decoder"] == "fano" and not qr_only else "",
                    "fano_delta": _fmt(float(delta)) if cfg["decoder"] == "fano" and not qr_only else "",
                    "mean_flops": _fmt(float(np.mean(flops))),
                    "mean_nodes": "" if qr_only else _fmt(float(np.mean(nodes))),
                    "median_nodes": "" if qr_only else _fmt(float(statistics.median(nodes))),
                    "ser": "" if qr_only else _fmt(wrong / (params.K * cfg["trials"])),
                }
                rows.append(row)
    return fieldnames, rows


def _run_certify(cfg: dict):
    fieldnames = ["code_family", "M", "N", "L", "K", "constellation", "min_rank",
                  "full_diversity", "receipts", "exhaustive", "min_det",
                  "rank_1e-6", "rank_1e-9", "rank_1e-12"]
    rows = []
    for family_name in cfg["code_family"]:
        for L in cfg["L"]:
            params = _make_params(cfg, family_name, L)
            cert = min_rank_over_differences(params, sample=cfg["sample"],
                                             seed=cfg["seed"])
            by_thr = dict(cert.rank_by_threshold)
            rows.append({
                "code_family": family_name,
                "M": _fmt(params.M), "N": _fmt(params.N), "L": _fmt(L),
                "K": _fmt(params.K), "constellation": cfg["constellation"],
                "min_rank": _fmt(cert.min_rank),
                "full_diversity": _fmt(cert.min_rank == params.M),
                "receipts": _fmt(cert.receipts),
                "exhaustive": _fmt(cert.exhaustive),
                "min_det": _fmt(cert.min_det),
                "rank_1e-6": _fmt(by_thr[1e-6]),
                "rank_1e-9": _fmt(by_thr[1e-9]),
                "rank_1e-12": _fmt(by_thr[1e-12]),
            })
    return fieldnames, rows


def write_csv(path: str, cfg: dict, fieldnames, rows) -> None:
    buf = io.StringIO()
    for line in config_lines(cfg):
        buf.write(line + "\n")
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str):
    """Parse a dataset written by write_csv: returns (raw config, rows)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    raw = parse_config_text(text)
    data_lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(data_lines))
    return raw, rows


def _render_run_figures(cfg, rows, out_path: str) -> list:
    stem = out_path[:-4] if out_path.endswith(".csv") else out_path
    metric = "mean_flops" if cfg["mode"] == "qr_only" else "mean_nodes"
    written = []
    if len(cfg["L"]) > 1:
        for snr in cfg["snr_db"]:
            subset = [r for r in rows if r["snr_db"] == _fmt(float(snr))]
            base = f"{stem}_{metric}_snr{snr:g}"
            written += plots.line_plot(subset, "K", metric, "code_family", base,
                                       title=f"{metric} at {snr:g} dB")
    else:
        written += plots.line_plot(rows, "snr_db", metric, "code_family",
                                   f"{stem}_{metric}", title=metric)
    return written


def _cmd_run(args) -> int:
    raw = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            raw = parse_config_text(fh.read())
    for item in args.set or []:
        if "=" not in item:
            raise InvalidInput(f"--set needs key=value, got {item!r}")
        key, _, val = item.partition("=")
        raw[key.strip()] = val.strip()
    cfg = resolve_config(raw)
    fieldnames, rows = run_experiment(cfg)
    write_csv(args.out, cfg, fieldnames, rows)
    print(f"wrote {args.out} ({len(rows)} rows)")
    if cfg["mode"] != "certify":
        for path in _render_run_figures(cfg, rows, args.out):
            print(f"wrote {path}")
    else:
        failed = [r for r in rows if r["full_diversity"] != "true"]
        for r in rows:
            print(f"  (M={r['M']}, L={r['L']}, {r['code_family']}): min_rank {r['min_rank']}"
                  f" of {r['M']}, receipts {r['receipts']}, exhaustive {r['exhaustive']}")
        if failed:
            print(f"certification FAILED for {len(failed)} of {len(rows)} cells",
                  file=sys.stderr)
            return 3
    return 0


def _cmd_encode(args) -> int:
    params = make_code_params(M=args.M, L=args.L,
                              family=FAMILY_NAMES[args.family],
                              constellation=args.constellation,
                              theta=_parse_complex("theta", args.theta) if args.theta else None,
                              phi=_parse_complex("phi", args.phi) if args.phi else None,
                              tail_cut=args.tail_cut)
    if args.symbols:
        u = np.array([complex(s) for s in args.symbols.split(",")])
    else:
        pts = params.constellation.points_array()
        rng = trial_rng(args.seed, 0, ROLE_DATA)
        u = pts[rng.integers(0, pts.size, params.K)]
    word = encode(params, u)
    buf = io.StringIO()
    buf.write(f"# family = {args.family}\n# M = {params.M}\n# L = {params.L}\n")
    buf.write(f"# T = {params.T}\n# K = {params.K}\n")
    buf.write(f"# symbols = {','.join(str(x) for x in u)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["antenna", "slot", "re", "im"])
    for row in range(params.M):
        for t in range(params.T):
            z = complex(word.entries[row, t])
            writer.writerow([row + 1, t, repr(z.real), repr(z.imag)])
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _cmd_plot(args) -> int:
    _, rows = read_csv(args.csv)
    written = plots.line_plot(rows, args.x, args.y, args.series, args.out,
                              title=args.title)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_certify(args) -> int:
    params = make_code_params(M=args.M, L=args.L, family=FAMILY_NAMES[args.family],
                              constellation=args.constellation,
                              theta=_parse_complex("theta", args.theta) if args.theta else None,
                              phi=_parse_complex("phi", args.phi) if args.phi else None)
    cert = min_rank_over_differences(params, sample=args.sample, seed=args.seed)
    print(f"difference alphabet size {cert.alphabet_size}, K = {params.K}")
    print(f"receipts: {cert.receipts} matrices checked "
          f"({'exhaustive' if cert.exhaustive else 'sampled, NOT exhaustive'})")
    for thr, r in cert.rank_by_threshold:
        print(f"min rank at threshold {thr:g}: {r}")
    print(f"min det surrogate: {cert.min_det!r}")
    if cert.min_rank == params.M:
        print(f"PASS: full diversity (min_rank = M = {params.M})")
        return 0
    print(f"FAIL: min_rank {cert.min_rank} < M = {params.M}, "
          f"argmin difference {cert.argmin}", file=sys.stderr)
    return 3


def _cmd_predict_flops(args) -> int:
    print(repr(predicted_flops(args.M, args.N, args.K)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treetast",
        description="Tree-structured space-time code experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Monte Carlo complexity sweep")
    p_run.add_argument("--config", help="config file or a previous output CSV")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
    p_run.add_argument("--out", default="experiment.csv", help="output CSV path")
    p_run.set_defaults(func=_cmd_run)

    p_enc = sub.add_parser("encode", help="encode one codeword to CSV")
    p_enc.add_argument("--M", type=int, default=2)
    p_enc.add_argument("--L", type=int, default=0)
    p_enc.add_argument("--family", choices=sorted(FAMILY_NAMES), default="tree_tast")
    p_enc.add_argument("--constellation", default="bpsk")
    p_enc.add_argument("--theta")
    p_enc.add_argument("--phi")
    p_enc.add_argument("--tail-cut", dest="tail_cut", action="store_true")
    p_enc.add_argument("--symbols", help="comma-separated complex symbols")
    p_enc.add_argument("--seed", type=int, default=0, help="for random symbols")
    p_enc.add_argument("--out")
    p_enc.set_defaults(func=_cmd_encode)

    p_plot = sub.add_parser("plot", help="render line plots from a dataset")
    p_plot.add_argument("--csv", required=True)
    p_plot.add_argument("--x", default="K")
    p_plot.add_argument("--y", default="mean_nodes")
    p_plot.add_argument("--series", default="code_family")
    p_plot.add_argument("--out", required=True, help="output base path (no suffix)")
    p_plot.add_argument("--title")
    p_plot.set_defaults(func=_cmd_plot)

    p_cert = sub.add_parser("certify", help="brute-force diversity certification")
    p_cert.add_argument("--M", type=int, default=2)
    p_cert.add_argument("--L", type=int, default=0)
    p_cert.add_argument("--family", choices=sorted(FAMILY_NAMES), default="tree_tast")
    p_cert.add_argument("--constellation", default="bpsk")
    p_cert.add_argument("--theta")
    p_cert.add_argument("--phi")
    p_cert.add_argument("--sample", type=int, help="randomized non-exhaustive check")
    p_cert.add_argument("--seed", type=int, default=0)
    p_cert.set_defaults(func=_cmd_certify)

    p_pf = sub.add_parser("predict-flops", help="closed-form QR flop estimate")
    p_pf.add_argument("--M", type=int, required=True)
    p_pf.add_argument("--N", type=int, required=True)
    p_pf.add_argument("--K", type=int, required=True)
    p_pf.set_defaults(func=_cmd_predict_flops)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Refused as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except TreeTastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
