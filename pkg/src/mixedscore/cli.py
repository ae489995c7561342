"""Command-line interface: ``mixedscore {estimate,simulate,oracle,experiment,replay}``.

Every run that writes files also writes ``manifest.json`` with the fully
resolved options; ``mixedscore replay manifest.json --out DIR`` repeats
the run and reproduces the data files byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dcmm import DCMMParams, ExperimentConfig, omega, pg_eigenvalues, sample_adjacency, validate
from .evaluation import max_aligned_error, run_experiment, run_grid
from .exceptions import MixedScoreError, ParseError, ValidationError
from .graph import adjacency, from_adjacency, giant_component, load_edge_list
from .membership import ideal_mixed_score, mixed_score, parse_threshold, parse_vertex_L
from .seeding import derive_seed
from .spectral import top_k_eigen

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_PIPELINE = 6


def _fmt(x) -> str:
    return f"{x:.9f}"


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: Path, text: str):
    path.write_text(text, encoding="utf-8", newline="\n")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(out: Path, command: str, options: dict, inputs: dict, started):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "options": options,
        "inputs": inputs,
        "version": __version__,
        "started_at": started,
        "finished_at": _now(),
    }
    _write(out / "manifest.json", _dump_json(manifest))


# ---------------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------------

def memberships_csv(labels, res) -> str:
    K = res.pi_hat.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node"] + [f"pi_{k + 1}" for k in range(K)]
               + ["purity", "home_base", "theta_hat"])
    for lab, row, th in zip(labels, res.pi_hat, res.theta_hat):
        k = int(np.argmax(row))
        w.writerow([lab] + [_fmt(v) for v in row] + [_fmt(row[k]), k + 1, _fmt(th)])
    return buf.getvalue()


def scatter_svg(res, size=480, pad=40) -> str:
    """Rows of the ratio matrix with the estimated simplex drawn on top."""
    R = res.rhat.values
    V = res.simplex.vertices
    K = V.shape[0]
    if R.shape[1] == 1:
        R = np.hstack([R, np.zeros_like(R)])
        V = np.hstack([V, np.zeros_like(V)])
    R, V = R[:, :2], V[:, :2]
    allp = np.vstack([R, V])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)

    def xy(p):
        x = pad + (p[0] - lo[0]) / span[0] * (size - 2 * pad)
        y = size - pad - (p[1] - lo[1]) / span[1] * (size - 2 * pad)
        return f"{x:.2f}", f"{y:.2f}"

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             '<rect width="100%" height="100%" fill="white"/>']
    if K > 3:
        lines.append(f'<text x="{pad}" y="{pad // 2}" font-size="11">'
                     'first two ratio coordinates only</text>')
    for p in R:
        x, y = xy(p)
        lines.append(f'<circle cx="{x}" cy="{y}" r="2" fill="#2a9d8f" fill-opacity="0.6"/>')
    pts = " ".join(",".join(xy(v)) for v in V)
    lines.append(f'<polygon points="{pts}" fill="none" stroke="#1d3557" stroke-width="2"/>')
    for v in V:
        x, y = xy(v)
        lines.append(f'<circle cx="{x}" cy="{y}" r="4" fill="#1d3557"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def run_estimate(opts: dict, out: Path, log=print):
    path = Path(opts["edges"])
    g = load_edge_list(path.read_text(encoding="utf-8"))
    gc, _ = giant_component(g)
    if gc.n < g.n:
        log(f"note: using the giant component ({gc.n} of {g.n} nodes)")
    mode, T = parse_threshold(opts["threshold_mode"])
    res = mixed_score(adjacency(gc), opts["k"], T=T,
                      threshold_mode="sqrt-log" if mode == "fixed" else mode,
                      L=parse_vertex_L(opts["vertex_L"]), seed=opts["seed"],
                      restarts=opts["restarts"])
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "memberships.csv", memberships_csv(gc.labels, res))
    result = res.to_dict()
    result["schema_version"] = SCHEMA_VERSION
    result["labels"] = list(gc.labels)
    result["graph"] = {"input": g.summary(), "giant_component": gc.summary()}
    _write(out / "result.json", _dump_json(result))
    if opts["svg"]:
        _write(out / "scatter.svg", scatter_svg(res))
    return {"edges": {"path": str(path), "sha256": _sha256(path)}}


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _config_from_opts(opts) -> ExperimentConfig:
    if opts.get("config"):
        d = json.loads(Path(opts["config"]).read_text(encoding="utf-8"))
        d = d.get("config", d)
        return ExperimentConfig.from_dict(d)
    if opts.get("preset") == "figure1":
        return ExperimentConfig.figure1()
    return ExperimentConfig.simulation(n0=opts["n0"], x=opts["x"], rho=opts["rho"],
                                       z=opts["z"], n=opts["n"])


def run_simulate(opts: dict, out: Path, log=print):
    cfg = _config_from_opts(opts)
    cfg.validate()
    seed = opts["seed"]
    params = cfg.draw_params(derive_seed(seed, 0))
    validate(params)
    A = sample_adjacency(params, derive_seed(seed, 1))
    g = from_adjacency(A)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "edges.txt", g.to_edge_list())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "theta"] + [f"pi_{k + 1}" for k in range(cfg.K)])
    for i in range(cfg.n):
        w.writerow([str(i), _fmt(params.theta[i])] + [_fmt(v) for v in params.pi[i]])
    _write(out / "truth.csv", buf.getvalue())
    d = params.to_dict()
    d["config"] = cfg.to_dict()
    _write(out / "params.json", _dump_json(d))
    log(f"simulated {cfg.n} nodes, {g.n_edges} edges")
    inputs = {}
    if opts.get("config"):
        inputs["config"] = {"path": opts["config"], "sha256": _sha256(opts["config"])}
    return inputs


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

def oracle_report(params: DCMMParams, K=None, log=print) -> dict:
    K = params.K if K is None else K
    info = validate(params)
    if not info["all_communities_have_pure_node"]:
        log("warning: some community has no pure node; exact recovery is not guaranteed")
    om = omega(params)
    t2 = float(params.theta @ params.theta)
    lam = top_k_eigen(om, min(om.shape[0], K + 1)).values
    pg = pg_eigenvalues(params)
    pi_hat = ideal_mixed_score(om, K)
    dev = max_aligned_error(pi_hat, params.pi)
    return {
        "schema_version": SCHEMA_VERSION,
        "K": K,
        "n": params.n,
        "pure_nodes_per_community": info["pure_nodes_per_community"],
        "max_deviation": dev,
        "exact": dev <= 1e-8,
        "eigen_identity_residual": float(np.abs(lam[:K] - pg[:K]).max() / t2),
        "trailing_eigenvalue_ratio": float(abs(lam[K]) / t2) if lam.size > K else 0.0,
    }


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _csv_text(rows, header):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (_fmt(v) if isinstance(v, float) else ("" if v is None else v))
                    for k, v in r.items()})
    return buf.getvalue()


def run_experiment_cmd(opts: dict, out: Path, log=print):
    path = Path(opts["config"])
    spec = json.loads(path.read_text(encoding="utf-8"))
    cfg = ExperimentConfig.from_dict(spec.get("config", spec))
    if opts.get("reps") is not None:
        cfg = cfg.replace(repetitions=opts["reps"])
    if opts.get("seed") is not None:
        cfg = cfg.replace(seed=opts["seed"])
    kw = dict(L_modes=spec.get("vertex_L", ["auto-practical"]),
              threshold=spec.get("threshold_mode", "sqrt-log"),
              restarts=spec.get("restarts", 100), workers=opts.get("workers", 1))
    grid = spec.get("grid")
    if grid:
        report = run_grid(cfg, grid["parameter"], grid["values"], **kw)
    else:
        report = run_experiment(cfg, **kw)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "report.json", _dump_json(report.to_dict()))
    _write(out / "curves.csv", _csv_text(
        report.curves_rows(), ["setting", "L_mode", "mean", "sd", "n_ok", "n_failed"]))
    rows = list(report.rep_rows())
    wall = [r.pop("wall_ms") for r in rows]
    _write(out / "reps.csv", _csv_text(
        rows, ["setting", "L_mode", "rep", "seed", "error", "L_used"]))
    # wall-clock numbers live only here so every other output replays exactly
    _write(out / "timing.json", _dump_json({
        "schema_version": SCHEMA_VERSION,
        "settings": [s.to_dict(timing=True)["wall_ms"] for s in report.settings],
        "rep_wall_ms": wall}))
    for row in report.curves_rows():
        log(f"{row['setting'] or '-'} {row['L_mode']}: mean={row['mean']:.5f} "
            f"sd={row['sd']:.5f} ok={row['n_ok']} failed={row['n_failed']}")
    return {"config": {"path": str(path), "sha256": _sha256(path)}}


RUNNERS = {"estimate": run_estimate, "simulate": run_simulate,
           "experiment": run_experiment_cmd}


def _execute(command, opts, out, log=print):
    started = _now()
    inputs = RUNNERS[command](opts, out, log=log)
    _write_manifest(out, command, opts, inputs, started)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixedscore",
                                description="Mixed-membership estimation for networks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate memberships from an edge list")
    e.add_argument("edges")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--threshold-mode", default="sqrt-log",
                   help="sqrt-log (default), log, or fixed:<value>")
    e.add_argument("--vertex-L", default="auto-practical",
                   help="auto-practical (default), auto-theory, or fixed:<int>")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--restarts", type=int, default=100)
    e.add_argument("--svg", action="store_true")
    e.add_argument("--out", required=True)

    s = sub.add_parser("simulate", help="sample one network from a DCMM setting")
    s.add_argument("--config")
    s.add_argument("--preset", choices=["figure1"])
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--n0", type=int, default=80)
    s.add_argument("--x", type=float, default=0.4)
    s.add_argument("--rho", type=float, default=0.1)
    s.add_argument("--z", type=float, default=5.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)

    o = sub.add_parser("oracle", help="exact recovery check from model parameters")
    o.add_argument("params")
    o.add_argument("--k", type=int)

    x = sub.add_parser("experiment", help="run a repeated simulation experiment")
    x.add_argument("config")
    x.add_argument("--reps", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--out", required=True)

    r = sub.add_parser("replay", help="re-run a manifest.json")
    r.add_argument("manifest")
    r.add_argument("--out", required=True)
    return p


def _opts_from_args(args) -> dict:
    d = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
    if args.command == "estimate":
        d["edges"] = str(Path(d["edges"]).resolve())
        parse_threshold(d["threshold_mode"])
        parse_vertex_L(d["vertex_L"])
    for key in ("config",):
        if d.get(key):
            d[key] = str(Path(d[key]).resolve())
    return d


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    err = lambda msg: print(msg, file=sys.stderr)  # noqa: E731
    try:
        if args.command == "oracle":
            params = DCMMParams.from_json(Path(args.params).read_text(encoding="utf-8"))
            report = oracle_report(params, args.k, log=err)
            sys.stdout.write(_dump_json(report))
            return EXIT_OK if report["exact"] else EXIT_CHECK_FAILED
        if args.command == "replay":
            manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
            _execute(manifest["command"], manifest["options"], Path(args.out), log=err)
            return EXIT_OK
        try:
            opts = _opts_from_args(args)
        except ValueError as exc:
            parser.error(str(exc))
        _execute(args.command, opts, Path(args.out), log=err)
        return EXIT_OK
    except OSError as exc:
        err(f"I/O error: {exc}")
        return EXIT_IO
    except (ParseError, json.JSONDecodeError, KeyError) as exc:
        err(f"parse error: {exc}")
        return EXIT_PARSE
    except ValidationError as exc:
        err(f"invalid input: {exc}")
        return EXIT_VALIDATION
    except (MixedScoreError, ValueError) as exc:
        err(f"pipeline error: {exc}")
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
