"""Command-line interface: ``tnpm generate | fit | select | metrics``.

Settings come from built-in defaults, then an optional ``--config`` file of
``key = value`` lines (``#`` starts a comment), then command-line flags.
Failures print a JSON object ``{"error": ..., "message": ...}`` on stderr
and exit with status 1.
"""
import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import io
from .baselines import METHODS as BASELINES
from .dom import FitConfig, fit_dom, total_loss
from .generator import FAMILIES, GeneratorConfig, generate
from .initialization import KMeansConfig, svd_kmeans_init
from .metrics import chi2_independence, confusion_table, min_perm_error, nmi
from .model import rearrange
from .selection import PenaltyConfig, select_kl
from .tsdc import fit_tsdc, segment_normalize

COMMANDS = ("generate", "fit", "select", "metrics")
FIT_METHODS = ("dom", "tsdc", "svdk", "cossc", "insc")
DEFAULT_GRID = "2:6x2:6"


@dataclass
class RunConfig:
    command: str = None
    input: str = None
    format: str = None
    method: str = "dom"
    k: int = None
    l: int = None
    grid: str = None
    penalty: str = "empirical"
    rho_mode: str = "mean_abs"
    sigma_tilde_sq_max: float = None
    epsilon: float = 1e-6
    max_iter: int = 100
    seed: int = 0
    restarts: int = 10
    truth_rows: str = None
    truth_cols: str = None
    pred_rows: str = None
    pred_cols: str = None
    out: str = "."
    n: int = None
    m: int = None
    family: str = "normal"
    sigma: float = 0.1
    eta: float = 0.0
    general_position: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise ValueError(f"command must be one of {COMMANDS}")
        if self.command in ("fit", "select"):
            if self.input is None:
                raise ValueError("--input is required")
            if not os.access(self.input, os.R_OK):
                raise FileNotFoundError(f"cannot read {self.input}")
        if self.command == "fit":
            if self.grid is not None:
                raise ValueError("fit takes --k/--l, not --grid")
            if self.k is None or self.l is None:
                raise ValueError("fit needs both --k and --l")
            if self.method not in FIT_METHODS:
                raise ValueError(f"method must be one of {FIT_METHODS}")
        if self.command == "select":
            if self.k is not None or self.l is not None:
                raise ValueError("select takes --grid, not --k/--l")
            if self.grid is None:
                self.grid = DEFAULT_GRID
            if self.method not in ("dom", "tsdc"):
                raise ValueError("select supports methods dom and tsdc")
        if self.command == "generate":
            for name in ("n", "m", "k", "l"):
                if getattr(self, name) is None:
                    raise ValueError(f"generate needs --{name}")
        if self.command == "metrics" and not (
            (self.pred_rows and self.truth_rows) or (self.pred_cols and self.truth_cols)
        ):
            raise ValueError("metrics needs --pred-rows/--truth-rows or --pred-cols/--truth-cols")


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, value):
    kind = _TYPES[key]
    if value is None or not isinstance(value, str):
        return value
    if kind is bool:
        v = value.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {value!r}")
    if kind is int:
        return int(value)
    if kind is float:
        return float(value)
    return value


def read_config(path):
    """``key = value`` settings; keys use the flag names with ``-`` or ``_``."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in s.split("=", 1))
            key = key.replace("-", "_")
            if key not in _TYPES or key == "command":
                raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
            out[key] = _coerce(key, value)
    return out


def parse_grid(text):
    """``"2:6x2:6"`` -> ``([2..6], [2..6])``; ranges are inclusive, ``"3"`` is a single value."""

    def rng(part):
        bits = part.split(":")
        if len(bits) == 1:
            lo = hi = int(bits[0])
        elif len(bits) == 2:
            lo, hi = int(bits[0]), int(bits[1])
        else:
            raise ValueError(f"bad range {part!r}")
        if lo < 1 or hi < lo:
            raise ValueError(f"bad range {part!r}")
        return list(range(lo, hi + 1))

    try:
        ks, ls = text.lower().split("x")
        return rng(ks), rng(ls)
    except ValueError as exc:
        raise ValueError(f"grid must look like '2:6x2:6': {exc}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="tnpm", description="Two-way node popularity co-clustering")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of key = value settings")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", help="matrix file")
    data.add_argument("--format", choices=io.FORMATS, help="default: from the file suffix")
    data.add_argument("--method", help=f"one of {', '.join(FIT_METHODS)}")
    data.add_argument("--epsilon", type=float)
    data.add_argument("--max-iter", type=int)
    data.add_argument("--restarts", type=int, help="k-means restarts")
    data.add_argument("--truth-rows", help="1-based ground-truth row labels")
    data.add_argument("--truth-cols", help="1-based ground-truth column labels")

    g = sub.add_parser("generate", parents=[common], help="sample a synthetic network")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--l", type=int)
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--sigma", type=float)
    g.add_argument("--eta", type=float, help="sparsity level of the popularity parameters")
    g.add_argument("--general-position", action="store_const", const=True)
    g.add_argument("--format", choices=io.FORMATS, help="output matrix format")

    f = sub.add_parser("fit", parents=[common, data], help="co-cluster with fixed K, L")
    f.add_argument("--k", type=int)
    f.add_argument("--l", type=int)

    s = sub.add_parser("select", parents=[common, data], help="choose K, L over a grid")
    s.add_argument("--grid", help=f"inclusive ranges KxL (default {DEFAULT_GRID})")
    s.add_argument("--penalty", choices=("empirical", "theoretical"))
    s.add_argument("--rho-mode", choices=("mean_abs", "spectral"))
    s.add_argument("--sigma-tilde-sq-max", type=float)

    m = sub.add_parser("metrics", parents=[common], help="compare label files")
    m.add_argument("--pred-rows")
    m.add_argument("--pred-cols")
    m.add_argument("--truth-rows")
    m.add_argument("--truth-cols")
    return p


def config_from_args(argv):
    ns = vars(build_parser().parse_args(argv))
    settings = read_config(ns.pop("config")) if ns.get("config") else {}
    settings.update({k: v for k, v in ns.items() if v is not None})
    return RunConfig(**settings)


def _dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _write_csv(M, path):
    io.write_matrix(M, path, "dense_csv")


def _one_based(labels):
    return [int(v) + 1 for v in labels]


def _side_metrics(pred, truth, k):
    table = confusion_table(pred, truth)
    stat, dof, p = chi2_independence(table) if min(table.counts.shape) > 1 else (0.0, 0, 1.0)
    return {
        "nmi": nmi(pred, truth),
        "nmi_max": nmi(pred, truth, variant="max"),
        "error": min_perm_error(pred, truth, k=max(k, int(truth.max()) + 1)),
        "chi2": {"statistic": stat, "dof": dof, "p_value": p},
    }


def _truth_metrics(cfg, a):
    out = {}
    if cfg.truth_rows:
        out["rows"] = _side_metrics(a.c, io.read_labels(cfg.truth_rows), a.k_count)
    if cfg.truth_cols:
        out["cols"] = _side_metrics(a.z, io.read_labels(cfg.truth_cols), a.l_count)
    return out


def block_cos_matrix(A, labels, col_labels, count):
    """Pairwise block cosine similarity of the rows of ``A``, ordered by ``labels``."""
    R = segment_normalize(A, col_labels, count)
    order = np.argsort(labels, kind="stable")
    R = R[order]
    return R @ R.T


def _kmeans_cfg(cfg):
    return KMeansConfig(restarts=cfg.restarts, seed=cfg.seed)


def _fit_cfg(cfg):
    return FitConfig(epsilon=cfg.epsilon, max_iter=cfg.max_iter, seed=cfg.seed)


def _fit(A, cfg):
    K, L = cfg.k, cfg.l
    if cfg.method in BASELINES:
        return BASELINES[cfg.method](A, K, L, _kmeans_cfg(cfg)), None
    init = svd_kmeans_init(A, K, L, _kmeans_cfg(cfg))
    fitter = fit_dom if cfg.method == "dom" else fit_tsdc
    return None, fitter(A, K, L, init, _fit_cfg(cfg))


def _export_assignment(A, a, out):
    B, rb, cb = rearrange(A, a)
    _write_csv(B, os.path.join(out, "rearranged.csv"))
    _dump_json(
        {"row_boundaries": [int(v) for v in rb], "col_boundaries": [int(v) for v in cb]},
        os.path.join(out, "rearranged_boundaries.json"),
    )
    _write_csv(block_cos_matrix(A, a.c, a.z, a.l_count), os.path.join(out, "rowsim.csv"))
    _write_csv(block_cos_matrix(A.T, a.z, a.c, a.k_count), os.path.join(out, "colsim.csv"))
    io.write_labels(a.c, os.path.join(out, "rows.txt"))
    io.write_labels(a.z, os.path.join(out, "cols.txt"))


def _cmd_generate(cfg):
    gcfg = GeneratorConfig(
        n=cfg.n, m=cfg.m, k_count=cfg.k, l_count=cfg.l, family=cfg.family,
        sigma=cfg.sigma, sparsity_eta=cfg.eta, seed=cfg.seed,
        general_position=cfg.general_position,
    )
    net = generate(gcfg)
    fmt = cfg.format or "dense_csv"
    name = {"dense_csv": "A.csv", "edge_list_tsv": "A.tsv", "matrix_market": "A.mtx"}[fmt]
    io.write_matrix(net.A, os.path.join(cfg.out, name), fmt)
    _write_csv(net.P, os.path.join(cfg.out, "P.csv"))
    io.write_labels(net.truth.c, os.path.join(cfg.out, "truth_rows.txt"))
    io.write_labels(net.truth.z, os.path.join(cfg.out, "truth_cols.txt"))
    _dump_json(
        {"command": "generate", "matrix": name, "n": cfg.n, "m": cfg.m, "k": cfg.k,
         "l": cfg.l, "family": cfg.family, "sigma": cfg.sigma, "eta": cfg.eta,
         "seed": cfg.seed, "general_position": cfg.general_position},
        os.path.join(cfg.out, "results.json"),
    )


def _cmd_fit(cfg):
    A = io.parse_matrix(cfg.input, cfg.format)
    a, res = _fit(A, cfg)
    if res is not None:
        a = res.assignment
    result = {
        "command": "fit", "method": cfg.method, "input": os.path.basename(cfg.input),
        "n": a.n, "m": a.m, "k": a.k_count, "l": a.l_count, "seed": cfg.seed,
        "c": _one_based(a.c), "z": _one_based(a.z), "loss": total_loss(A, a),
        "loss_trajectory": res.loss_trajectory if res else [],
        "sweeps": res.sweeps if res else 0,
        "converged": res.converged if res else True,
        "metrics": _truth_metrics(cfg, a),
    }
    if cfg.method == "tsdc":
        result["objective"] = "block_cosine_similarity"
    _export_assignment(A, a, cfg.out)
    _dump_json(result, os.path.join(cfg.out, "results.json"))


def _cmd_select(cfg):
    A = io.parse_matrix(cfg.input, cfg.format)
    ks, ls = parse_grid(cfg.grid)
    pen = PenaltyConfig(
        variant=cfg.penalty, rho_mode=cfg.rho_mode, sigma_tilde_sq_max=cfg.sigma_tilde_sq_max
    )
    sel = select_kl(A, ks, ls, cfg.method, pen, _fit_cfg(cfg), _kmeans_cfg(cfg))
    best = sel.cell(sel.K, sel.L)
    a = best.labels
    table = [
        {"k": c.K, "l": c.L, "loss": _finite(c.loss), "penalty": _finite(c.penalty),
         "score": _finite(c.score), "error": c.error}
        for c in sel.table
    ]
    _export_assignment(A, a, cfg.out)
    _dump_json(
        {"command": "select", "method": cfg.method, "input": os.path.basename(cfg.input),
         "penalty": cfg.penalty, "k_hat": sel.K, "l_hat": sel.L, "table": table,
         "c": _one_based(a.c), "z": _one_based(a.z), "seed": cfg.seed,
         "metrics": _truth_metrics(cfg, a)},
        os.path.join(cfg.out, "results.json"),
    )


def _cmd_metrics(cfg):
    out = {"command": "metrics"}
    for side, pred, truth in (("rows", cfg.pred_rows, cfg.truth_rows),
                              ("cols", cfg.pred_cols, cfg.truth_cols)):
        if pred and truth:
            x, y = io.read_labels(pred), io.read_labels(truth)
            out[side] = _side_metrics(x, y, int(x.max()) + 1)
    _dump_json(out, os.path.join(cfg.out, "results.json"))
    json.dump(out, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


_HANDLERS = {"generate": _cmd_generate, "fit": _cmd_fit, "select": _cmd_select,
             "metrics": _cmd_metrics}


def run(cfg):
    """Execute one command; returns the process exit code."""
    try:
        cfg.validate()
        os.makedirs(cfg.out, exist_ok=True)
        t0 = time.perf_counter()
        _HANDLERS[cfg.command](cfg)
        _dump_json({"wall_time_seconds": time.perf_counter() - t0},
                   os.path.join(cfg.out, "timing.json"))
        return 0
    except Exception as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


def main(argv=None):
    try:
        cfg = config_from_args(argv)
    except (OSError, ValueError, TypeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
