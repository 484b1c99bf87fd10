"""Command-line surface: eigen, gap-scan, certify, continue, oracle.

Machine-readable output (JSON lines by default, CSV on request) with
round-trip-exact decimal floats; deterministic ordering independent of the
worker count.  Exit codes: 0 success, 2 hypothesis-unmet, 3 numerical
failure, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import continuation as ct
from . import certification as cert
from . import eigensolver as es
from . import oracle
from .errors import (ConfigError, DegeneratePartitionError,
                     HypothesisError, SpheroidalError)
from .potential import LAMBDA_BIG_DEFAULT, OMEGA0_DEFAULT, ProblemParams
from .riccati import IntegratorOptions

log = logging.getLogger("spheroidal.cli")

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_NUMERICAL = 3
EXIT_CONFIG = 4


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    command: str = ""
    k: int = 0
    parity: str = "both"            # even | odd | both
    nodes: str = "0"                # "0..4" or "0,2,5"
    omega: float = 0.0
    omega_min: float = 0.0
    omega_max: float = 0.0
    omega_step: float = 1.0
    path: str = ""                  # comma list of complex omegas
    lam: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-11
    eig_rel_tol: float = 1e-9
    trunc_size: int = 60
    count: int = 8
    kappa: float | None = None
    lambda_big: float = LAMBDA_BIG_DEFAULT
    omega0: float = OMEGA0_DEFAULT
    delta: float = 1.0
    epsilon: float = 1.0
    c: float = 1.0
    gamma: float = 1.0
    circle_at: str = ""
    circle_radius: float = 0.0
    circle_nodes: int = 16
    projector_size: int = 0
    fmt: str = "json"               # json | csv
    out: str = ""
    jobs: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.parity not in ("even", "odd", "both"):
            raise ConfigError(f"invalid parity {self.parity!r}")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"invalid format {self.fmt!r}")
        for name in ("rtol", "atol", "eig_rel_tol", "epsilon", "delta"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.command in ("continue",) and self.c <= 0:
            raise ConfigError("strip constant c must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def parities(self) -> tuple[str, ...]:
        return ("even", "odd") if self.parity == "both" else (self.parity,)

    def node_list(self) -> list[int]:
        s = self.nodes.strip()
        out: list[int] = []
        for part in s.split(","):
            part = part.strip()
            if ".." in part:
                a, b = part.split("..")
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
        if not out:
            raise ConfigError(f"empty node list {self.nodes!r}")
        return sorted(set(out))

    def omega_grid(self) -> np.ndarray:
        if self.omega_max > self.omega_min:
            n = int(round((self.omega_max - self.omega_min) / self.omega_step))
            return self.omega_min + self.omega_step * np.arange(n + 1)
        return np.array([self.omega])

    def omega_path(self) -> list[complex]:
        if not self.path:
            raise ConfigError("continue requires --path")
        return [complex(tok.strip().replace("i", "j"))
                for tok in self.path.split(",")]

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(rtol=self.rtol, atol=self.atol)


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    file_vals = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        if not isinstance(file_vals, dict):
            raise ConfigError("config file must hold a JSON object")
    valid = {f.name for f in fields(RunConfig)}
    for key, val in file_vals.items():
        key = key.replace("-", "_")
        if key not in valid:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, val)
    for f in fields(RunConfig):
        cli_val = getattr(args, f.name, None)
        if cli_val is not None:       # flags win over file values
            setattr(cfg, f.name, cli_val)
    cfg.command = args.command
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# serialization (round-trip exact decimals)
# ---------------------------------------------------------------------------

def _fmt_value(v) -> str:
    """Round-trip exact decimal rendering (17 significant digits)."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g") if math.isfinite(v) else repr(v)
    if isinstance(v, complex):
        sign = "+" if v.imag >= 0 else "-"
        return (f"{format(v.real, '.17g')}{sign}"
                f"{format(abs(v.imag), '.17g')}j")
    return str(v)


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return format(f, ".17g") if math.isfinite(f) else json.dumps(repr(f))
    if isinstance(v, complex):
        return json.dumps(_fmt_value(v))
    return json.dumps(v)


def _emit(rows: list[dict], cfg: RunConfig) -> None:
    lines = []
    if cfg.fmt == "json":
        for row in rows:
            body = ",".join(f"{json.dumps(k)}:{_json_value(v)}"
                            for k, v in row.items())
            lines.append("{" + body + "}")
    else:
        if rows:
            keys = list(rows[0].keys())
            lines.append(",".join(keys))
            for row in rows:
                lines.append(",".join(_fmt_value(row[k]) for k in keys))
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _solve_one(task):
    k, parity, m, om, rtol, atol, rel = task
    rec = es.find_eigenvalue(m, parity, ProblemParams(k, om, 0.0),
                             opts=IntegratorOptions(rtol=rtol, atol=atol),
                             rel_tol=rel)
    return rec


def cmd_eigen(cfg: RunConfig) -> int:
    tasks = [(cfg.k, parity, m, float(om), cfg.rtol, cfg.atol, cfg.eig_rel_tol)
             for parity in cfg.parities()
             for m in cfg.node_list()
             for om in cfg.omega_grid()]
    if cfg.jobs > 1:
        import concurrent.futures as cf
        with cf.ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            recs = list(ex.map(_solve_one, tasks, chunksize=1))
    else:
        recs = [_solve_one(t) for t in tasks]

    by_key = {}
    for rec in recs:
        by_key[(rec.parity, rec.omega, rec.m)] = rec
    for (parity, om, m), rec in by_key.items():
        nxt = by_key.get((parity, om, m + 1))
        if nxt is not None:
            rec.gapToNext = nxt.lam - rec.lam

    rows = [{"k": rec.k, "parity": rec.parity, "m": rec.m,
             "omega": rec.omega, "lambda": rec.lam,
             "residual": rec.phaseResidual,
             "nodes_verified": rec.nodeCountVerified,
             "gap_to_next": rec.gapToNext}
            for rec in sorted(recs, key=lambda r: (r.parity, r.omega, r.m))]
    _emit(rows, cfg)
    return EXIT_OK


def cmd_gap_scan(cfg: RunConfig) -> int:
    nodes = cfg.node_list()
    m_max = max(nodes)
    res = es.gap_scan([cfg.k], cfg.omega_grid(), m_max,
                      parities=cfg.parities(), gamma=cfg.gamma,
                      opts=cfg.integrator_options(), jobs=cfg.jobs,
                      rel_tol=cfg.eig_rel_tol)
    rows = []
    for row in res.gap_table_rows():
        row["empirical_N"] = res.empirical_N[(row["k"], row["parity"])]
        row["gamma"] = cfg.gamma
        rows.append(row)
    _emit(rows, cfg)
    if res.lipschitz_violations:
        log.error("Lipschitz violations: %s", res.lipschitz_violations)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    nodes = cfg.node_list()
    parity = cfg.parities()[0]
    reports = []
    for m in nodes:
        if cfg.lam is not None:
            lam = cfg.lam
        else:
            lam = es.find_eigenvalue(m, parity,
                                     ProblemParams(cfg.k, cfg.omega, 0.0),
                                     opts=cfg.integrator_options()).lam
        rep = cert.certify_branch(ProblemParams(cfg.k, cfg.omega, lam),
                                  kappa=cfg.kappa, lambda_big=cfg.lambda_big,
                                  omega0=cfg.omega0, delta=cfg.delta,
                                  epsilon=cfg.epsilon,
                                  opts=cfg.integrator_options())
        reports.append((m, rep))

    text = []
    for m, rep in reports:
        text.append(f"# branch m={m} parity={parity}")
        text.extend(rep.lines())
    body = "\n".join(text) + "\n"
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    if any(rep.hypothesis_failures for _, rep in reports):
        return EXIT_HYPOTHESIS
    if not all(rep.passed for _, rep in reports):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_continue(cfg: RunConfig) -> int:
    strip = ct.StripSpec(cfg.c)
    parity = cfg.parities()[0]
    m = cfg.node_list()[0]
    for w in cfg.omega_path():
        if not strip.contains(w):
            raise ConfigError(f"omega={w} rejected by the strip test "
                              f"|Im| < {cfg.c}/(1+|Re|)")
    path = ct.continue_eigenvalue(m, parity, cfg.k, cfg.omega_path(), strip)
    rows = []
    for pt in path.points:
        rows.append({"k": cfg.k, "parity": parity, "m": m,
                     "omega_re": pt.omega.real, "omega_im": pt.omega.imag,
                     "lambda_re": pt.lam.real, "lambda_im": pt.lam.imag,
                     "newton_step": pt.newton_step,
                     "defect_abs": abs(pt.defect),
                     "collision": pt.collision})
    holo_rows = []
    if cfg.circle_at and cfg.circle_radius > 0:
        center = complex(cfg.circle_at.replace("i", "j"))
        samples = ct.trace_circle(m, parity, cfg.k, center, cfg.circle_radius,
                                  cfg.circle_nodes, strip,
                                  lam_center=None)
        rep = ct.verify_holomorphy(samples)
        holo_rows.append({"k": cfg.k, "parity": parity, "m": m,
                          "circle_re": rep.center.real,
                          "circle_im": rep.center.imag,
                          "radius": rep.radius, "n_nodes": rep.n_nodes,
                          "dbar_residual": rep.dbar_residual,
                          "cauchy_abs": abs(rep.cauchy_integral)})
    _emit(rows + holo_rows, cfg)
    if cfg.projector_size > 0:
        rep = ct.projector_diagnostics(cfg.k, cfg.omega_path()[-1],
                                       cfg.projector_size, cfg.c,
                                       parity=parity, seed=cfg.seed or 11)
        ok = (rep.w_norm_ok and rep.rank_ok and rep.pk_bound_ok
              and max(rep.idempotency) <= 1e-8)
        log.info("projector diagnostics: N=%d rank_ok=%s bound_ok=%s",
                 rep.N, rep.rank_ok, rep.pk_bound_ok)
        if not ok:
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    mat = oracle.assemble(cfg.k, cfg.omega, cfg.trunc_size)
    eigs = oracle.oracle_eigenvalues(mat, cfg.count)
    rows = []
    for parity in cfg.parities():
        vals = eigs.even if parity == "even" else eigs.odd
        for m, lam in enumerate(vals):
            rows.append({"k": cfg.k, "parity": parity, "m": m,
                         "omega": cfg.omega, "lambda": float(lam),
                         "size": eigs.size, "confirm_size": eigs.confirm_size,
                         "max_rel_shift": eigs.max_rel_shift})
    _emit(rows, cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="spheroidal",
                description="Certified spectral solver for the angular "
                            "oblate spheroidal wave operator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file mirroring the flags "
                                         "(explicit flags win)")
        sp.add_argument("--k", type=int)
        sp.add_argument("--parity", choices=("even", "odd", "both"))
        sp.add_argument("--nodes", help="node counts, e.g. 0..4 or 0,2,5")
        sp.add_argument("--rtol", type=float)
        sp.add_argument("--atol", type=float)
        sp.add_argument("--eig-rel-tol", dest="eig_rel_tol", type=float)
        sp.add_argument("--format", dest="fmt", choices=("json", "csv"))
        sp.add_argument("--out")
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("eigen", help="eigenvalue solves on an omega grid")
    common(sp)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--omega-min", dest="omega_min", type=float)
    sp.add_argument("--omega-max", dest="omega_max", type=float)
    sp.add_argument("--omega-step", dest="omega_step", type=float)

    sp = sub.add_parser("gap-scan", help="same-parity gap scan over omega")
    common(sp)
    sp.add_argument("--omega-min", dest="omega_min", type=float)
    sp.add_argument("--omega-max", dest="omega_max", type=float)
    sp.add_argument("--omega-step", dest="omega_step", type=float)
    sp.add_argument("--gamma", type=float)

    sp = sub.add_parser("certify", help="per-region enclosure certification")
    common(sp)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--lambda-big", dest="lambda_big", type=float)
    sp.add_argument("--omega0", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--epsilon", type=float)

    sp = sub.add_parser("continue", help="complex-omega continuation")
    common(sp)
    sp.add_argument("--path", help="comma list of complex omegas, "
                                   "e.g. 3,3+0.15j,3+0.3j")
    sp.add_argument("--c", type=float, help="strip constant")
    sp.add_argument("--circle-at", dest="circle_at")
    sp.add_argument("--circle-radius", dest="circle_radius", type=float)
    sp.add_argument("--circle-nodes", dest="circle_nodes", type=int)
    sp.add_argument("--projector-size", dest="projector_size", type=int)

    sp = sub.add_parser("oracle", help="matrix-route eigenvalues")
    common(sp)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--size", dest="trunc_size", type=int)
    sp.add_argument("--count", type=int)
    return p


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SPHEROIDAL_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
        cfg = _merge_config(args)
        handler = {"eigen": cmd_eigen, "gap-scan": cmd_gap_scan,
                   "certify": cmd_certify, "continue": cmd_continue,
                   "oracle": cmd_oracle}[cfg.command]
        return handler(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisError, DegeneratePartitionError) as exc:
        print(f"hypothesis unmet: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except SpheroidalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
