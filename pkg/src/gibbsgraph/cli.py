"""Command-line experiment driver.

Usage::

    gibbsgraph <command> --config <path> [--output <path>] [--seed <u64>]

The config file holds one ``key = value`` per line; ``#`` starts a comment.
Every output ends with a ``# manifest:`` line carrying the tool version and a
hash of the effective configuration.  Exit status is 0 on success, 2 for
configuration errors and 3 for runtime errors.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .branching import explore_cluster, extinction_experiment
from .clusters import percolation_experiment
from .domination import (
    RegionQuery,
    connection_g,
    in_region_F,
    j_tail_integral,
    subcritical_rcm,
    total_g_closed,
)
from .formats import FormatError, config_to_text, fmt_float, points_to_text, read_config, read_points, write_text
from .groundstate import ground_state_bruteforce, ground_state_matching
from .model import ModelParams, PointSet, Star, edge_arrays, energy, n_edges
from .points import BoxRegion, ProcessSpec, t_gamma
from .rng import SEED_MAX, derive_seed
from .sampler import (
    DEFAULT_BURNIN,
    DEFAULT_THIN,
    MAX_EXACT_EDGES,
    HeatBathChain,
    degree_bound,
    estimate_edge_marginals,
    exact_distribution,
    heat_bath_open_probability,
    mcmc_run,
    star_probability_bound,
)

COMMANDS = (
    "sample-points",
    "sample-gibbs",
    "energy",
    "ground-state",
    "region-scan",
    "domination-check",
    "percolation",
    "branching",
    "bounds-check",
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

MODEL_KEYS = {"beta", "temperature", "h0", "h1", "dim"}
PROCESS_KEYS = {"kind", "lambda", "eps0", "side", "low", "high"}
INPUT_KEYS = {"points"} | PROCESS_KEYS
COMMON_KEYS = {"seed", "output"}

ALLOWED_KEYS = {
    "sample-points": PROCESS_KEYS | {"dim"},
    "sample-gibbs": INPUT_KEYS | MODEL_KEYS | {"sweeps", "burnin", "thin", "cutoff"},
    "energy": INPUT_KEYS | MODEL_KEYS | {"configuration"},
    "ground-state": INPUT_KEYS | MODEL_KEYS | {"method"},
    "region-scan": {"lambdas", "temperatures", "h0"},
    "domination-check": INPUT_KEYS | MODEL_KEYS,
    "percolation": PROCESS_KEYS | MODEL_KEYS | {"sides", "replicas", "burnin", "cutoff"},
    "branching": INPUT_KEYS | MODEL_KEYS | {"start", "runs", "burnin", "method", "trace_output"},
    "bounds-check": INPUT_KEYS | MODEL_KEYS,
}

# conditional probabilities may exceed the dominating value only by rounding
DOMINATION_TOL = 1e-12


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None
    base_dir: Path = Path(".")

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        return f"key '{key}'" + (f" (line {line})" if line else "")

    def has(self, key: str) -> bool:
        return key in self.values

    def get(self, key: str, default=None) -> str:
        if key in self.values:
            return self.values[key]
        if default is None:
            raise ConfigError(f"missing required key '{key}'")
        return default

    def get_float(self, key: str, default: float | None = None, positive: bool = False) -> float:
        raw = self.get(key, None if default is None else repr(default))
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{self.where(key)}: expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(f"{self.where(key)}: must be finite")
        if positive and not value > 0:
            raise ConfigError(f"{self.where(key)}: must be > 0, got {value}")
        return value

    def get_int(self, key: str, default: int | None = None, minimum: int | None = None) -> int:
        raw = self.get(key, None if default is None else str(default))
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{self.where(key)}: expected an integer, got {raw!r}") from None
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.where(key)}: must be >= {minimum}, got {value}")
        return value

    def get_floats(self, key: str) -> list[float]:
        raw = self.get(key)
        try:
            values = [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{self.where(key)}: expected comma-separated numbers") from None
        if not values:
            raise ConfigError(f"{self.where(key)}: empty list")
        return values

    def path(self, key: str) -> Path:
        p = Path(self.get(key))
        return p if p.is_absolute() else self.base_dir / p

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError(f"command '{self.command}' is randomized and needs an explicit 'seed'")
        return self.seed

    def digest(self) -> str:
        canon = [f"command={self.command}"]
        canon += [f"{k}={self.values[k]}" for k in sorted(self.values)]
        canon.append(f"seed={'' if self.seed is None else self.seed}")
        return hashlib.sha256("\n".join(canon).encode()).hexdigest()

    def manifest(self) -> str:
        return f"manifest: tool=gibbsgraph version={__version__} command={self.command} config_sha256={self.digest()}"


def _parse_seed(raw: str, where: str) -> int:
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{where}: seed must be an integer, got {raw!r}") from None
    if not 0 <= seed <= SEED_MAX:
        raise ConfigError(f"{where}: seed must lie in [0, 2**64)")
    return seed


def parse_config(text: str, command: str, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Parse ``key = value`` lines; unknown or duplicate keys are errors."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command '{command}'")
    cfg = ExperimentConfig(command=command, base_dir=base_dir)
    allowed = ALLOWED_KEYS[command] | COMMON_KEYS
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key not in allowed:
            raise ConfigError(f"line {lineno}: key '{key}' is not valid for '{command}'")
        if key in cfg.values or (key == "seed" and cfg.seed is not None):
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if key == "seed":
            cfg.seed = _parse_seed(value, f"key 'seed' (line {lineno})")
        elif key == "output":
            cfg.output = value
        else:
            cfg.values[key] = value
            cfg.lines[key] = lineno
    return cfg


def model_params(cfg: ExperimentConfig) -> ModelParams:
    if cfg.has("beta") == cfg.has("temperature"):
        raise ConfigError("exactly one of 'beta' or 'temperature' must be given")
    if cfg.has("beta"):
        beta = cfg.get_float("beta", positive=True)
    else:
        beta = 1.0 / cfg.get_float("temperature", positive=True)
    h0 = cfg.get_float("h0", positive=True)
    h1 = cfg.get_float("h1", positive=True)
    if not h0 < h1:
        raise ConfigError(f"constraint h0 < h1 violated: h0={h0}, h1={h1}")
    dim = cfg.get_int("dim", 2, minimum=1)
    return ModelParams(beta, h0, h1, dim)


def process_spec(cfg: ExperimentConfig) -> ProcessSpec:
    kind = cfg.get("kind", "poisson")
    if kind not in ("poisson", "hardcore"):
        raise ConfigError(f"{cfg.where('kind')}: must be 'poisson' or 'hardcore', got {kind!r}")
    lam = cfg.get_float("lambda", positive=True)
    eps0 = cfg.get_float("eps0", 0.0) if kind == "poisson" else cfg.get_float("eps0", positive=True)
    if eps0 < 0:
        raise ConfigError(f"{cfg.where('eps0')}: must be >= 0")
    return ProcessSpec(kind, lam, eps0, cfg.seed or 0)


def box_region(cfg: ExperimentConfig, dim: int) -> BoxRegion:
    if cfg.has("side"):
        if cfg.has("low") or cfg.has("high"):
            raise ConfigError("give either 'side' or 'low'/'high', not both")
        return BoxRegion.cube(cfg.get_float("side", positive=True), dim)
    low, high = cfg.get_floats("low"), cfg.get_floats("high")
    if len(low) != dim or len(high) != dim:
        raise ConfigError(f"'low' and 'high' need {dim} entries")
    if not all(a < b for a, b in zip(low, high)):
        raise ConfigError("constraint low < high violated on some axis")
    return BoxRegion(tuple(low), tuple(high))


def load_points(cfg: ExperimentConfig, dim: int) -> PointSet:
    """Points from the ``points`` file, or sampled from the process keys."""
    if cfg.has("points"):
        if any(cfg.has(k) for k in PROCESS_KEYS):
            raise ConfigError("give either 'points' or process keys, not both")
        try:
            ps = read_points(cfg.path("points"))
        except FormatError as exc:
            raise ConfigError(f"{cfg.where('points')}: {exc}") from None
        if ps.dim != dim:
            raise ConfigError(f"point file has dimension {ps.dim} but dim = {dim}")
        return ps
    seed = cfg.require_seed()
    return process_spec(cfg).sample(box_region(cfg, dim), seed)


def _cutoff(cfg: ExperimentConfig):
    raw = cfg.get("cutoff", "auto")
    if raw == "auto":
        return "auto"
    if raw == "none":
        return None
    return cfg.get_float("cutoff", positive=True)


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


# -- commands: each returns {path-or-None: text} -----------------------------


def cmd_sample_points(cfg: ExperimentConfig) -> dict:
    dim = cfg.get_int("dim", 2, minimum=1)
    seed = cfg.require_seed()
    ps = process_spec(cfg).sample(box_region(cfg, dim), seed)
    return {None: points_to_text(ps)}


def cmd_sample_gibbs(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    seed = cfg.require_seed()
    ps = load_points(cfg, params.dim)
    sweeps = cfg.get_int("sweeps", 10_000, minimum=1)
    burnin = cfg.get_int("burnin", DEFAULT_BURNIN, minimum=0)
    thin = cfg.get_int("thin", DEFAULT_THIN, minimum=1)
    cutoff = _cutoff(cfg)
    chain_seed = derive_seed(seed, 1)
    marg = estimate_edge_marginals(mcmc_run(ps, params, chain_seed, sweeps, burnin, cutoff=cutoff), thin)
    active = HeatBathChain(ps, params, chain_seed, cutoff=cutoff)
    rows = []
    for e in active.active_edges():
        mean, se = marg.of(e)
        rows.append([e.i, e.j, ps.distance(e.i, e.j), mean, se])
    text = _csv(["i", "j", "length", "mean", "se"], rows)
    text += f"# cutoff={active.cutoff!r},cutoff_bias_bound={active.cutoff_bias_bound()!r},samples={marg.samples}\n"
    return {None: text}


def cmd_energy(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    ps = load_points(cfg, params.dim)
    try:
        conf = read_config(cfg.path("configuration"), len(ps))
    except FormatError as exc:
        raise ConfigError(f"{cfg.where('configuration')}: {exc}") from None
    deg = conf.degrees
    row = [len(ps), len(conf), int(np.sum(deg == 0)), int(deg.max()) if len(deg) else 0, energy(ps, conf, params)]
    return {None: _csv(["n_points", "open_edges", "monomers", "max_degree", "energy"], [row])}


def cmd_ground_state(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    ps = load_points(cfg, params.dim)
    method = cfg.get("method", "matching")
    if method == "matching":
        res = ground_state_matching(ps, params)
    elif method == "bruteforce":
        if n_edges(len(ps)) > MAX_EXACT_EDGES:
            raise ConfigError(f"bruteforce needs C(n,2) <= {MAX_EXACT_EDGES}, got n={len(ps)}")
        res = ground_state_bruteforce(ps, params)
    else:
        raise ConfigError(f"{cfg.where('method')}: must be 'matching' or 'bruteforce'")
    return {None: config_to_text(res.config, [f"summary: {res.summary()}"])}


def cmd_region_scan(cfg: ExperimentConfig) -> dict:
    lambdas = sorted(cfg.get_floats("lambdas"))
    temps = sorted(cfg.get_floats("temperatures"))
    h0 = cfg.get_float("h0", positive=True)
    if min(lambdas) <= 0 or min(temps) <= 0:
        raise ConfigError("grid values must be positive")
    rows = []
    for lam in lambdas:
        for t in temps:
            q = RegionQuery(lam, t, h0)
            J = j_tail_integral(t, h0)
            total = total_g_closed(t, h0)
            rows.append([lam, t, h0, J, total, in_region_F(q), in_region_F(q, strict=True), subcritical_rcm(q)])
    header = ["lambda", "temperature", "h0", "J", "total_g", "in_region_F", "in_region_F_strict", "subcritical_rcm"]
    return {None: _csv(header, rows)}


def cmd_domination_check(cfg: ExperimentConfig) -> dict:
    """Per edge, conditional open probability over every feasible endpoint-degree pair."""
    params = model_params(cfg)
    ps = load_points(cfg, params.dim)
    n = len(ps)
    d = np.arange(max(n - 1, 1))
    d1, d2 = np.meshgrid(d, d, indexing="ij")
    dist = exact_distribution(ps, params) if n_edges(n) <= 10 else None
    rows = []
    for k, (i, j, length) in enumerate(zip(*edge_arrays(n), ps.edge_lengths())):
        nu = connection_g(length, params)
        cond = heat_bath_open_probability(length, d1, d2, params)
        violations = int(np.sum(cond > nu + DOMINATION_TOL))
        exact_max = ""
        if dist is not None:
            _, pc = dist.conditional_open(k)
            exact_max = float(pc.max())
            violations += int(np.sum(pc > nu + DOMINATION_TOL))
        rows.append([int(i), int(j), float(length), float(nu), float(cond.max()), exact_max, violations])
    header = ["i", "j", "length", "nu", "max_conditional", "exact_max_conditional", "violations"]
    return {None: _csv(header, rows)}


def cmd_percolation(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    seed = cfg.require_seed()
    if any(cfg.has(k) for k in ("side", "low", "high")):
        raise ConfigError("percolation uses 'sides', not 'side'/'low'/'high'")
    sides = cfg.get_floats("sides")
    if min(sides) <= 0:
        raise ConfigError(f"{cfg.where('sides')}: sides must be positive")
    replicas = cfg.get_int("replicas", minimum=1)
    burnin = cfg.get_int("burnin", DEFAULT_BURNIN, minimum=0)
    report = percolation_experiment(process_spec(cfg), sides, params, replicas, seed, burnin, cutoff=_cutoff(cfg))
    return {None: report.to_csv()}


def cmd_branching(cfg: ExperimentConfig) -> dict:
    params = model_params(cfg)
    seed = cfg.require_seed()
    ps = load_points(cfg, params.dim)
    if len(ps) == 0:
        raise ConfigError("branching needs at least one point")
    start = cfg.get_int("start", 0, minimum=0)
    if start >= len(ps):
        raise ConfigError(f"{cfg.where('start')}: vertex {start} out of range for {len(ps)} points")
    runs = cfg.get_int("runs", 100, minimum=1)
    burnin = cfg.get_int("burnin", DEFAULT_BURNIN, minimum=0)
    method = cfg.get("method", "auto")
    if method not in ("auto", "exact", "mcmc"):
        raise ConfigError(f"{cfg.where('method')}: must be auto, exact or mcmc")
    seeds = [derive_seed(seed, 2, r) for r in range(runs)]
    report = extinction_experiment(ps, params, seeds, start, method=method, burnin=burnin)
    text = report.to_csv()
    text += (
        f"# finite_cluster_frequency={report.finite_cluster_frequency!r},"
        f"survival_frequency={report.survival_frequency!r}\n"
    )
    out = {None: text}
    if cfg.has("trace_output"):
        from .branching import sample_configurations

        _, first = next(iter(sample_configurations(ps, params, seeds[:1], method=method, burnin=burnin)))
        out[cfg.path("trace_output")] = explore_cluster(first, start).to_text()
    return out


def cmd_bounds_check(cfg: ExperimentConfig) -> dict:
    """Exact star probabilities and mean degrees against their upper bounds."""
    params = model_params(cfg)
    ps = load_points(cfg, params.dim)
    n = len(ps)
    if n_edges(n) > MAX_EXACT_EDGES:
        raise ConfigError(f"bounds-check enumerates all configurations; needs C(n,2) <= {MAX_EXACT_EDGES}")
    dist = exact_distribution(ps, params)
    rows = []
    for v in range(n):
        others = [w for w in range(n) if w != v]
        for mask in range(1 << len(others)):
            nbrs = [w for b, w in enumerate(others) if mask >> b & 1]
            if len(nbrs) < 2:
                continue
            star = Star.from_open(v, n, nbrs)
            exact = dist.star_probability(star)
            bound = star_probability_bound(ps, star, params)
            rows.append(["star", v, "+".join(map(str, nbrs)), exact, bound, exact <= bound])
        exact = dist.expected_degree(v)
        bound = degree_bound(t_gamma(ps, v, params.beta), params)
        rows.append(["mean_degree", v, "", exact, bound, exact <= bound])
    return {None: _csv(["check", "vertex", "open_neighbors", "exact", "bound", "ok"], rows)}


HANDLERS = {
    "sample-points": cmd_sample_points,
    "sample-gibbs": cmd_sample_gibbs,
    "energy": cmd_energy,
    "ground-state": cmd_ground_state,
    "region-scan": cmd_region_scan,
    "domination-check": cmd_domination_check,
    "percolation": cmd_percolation,
    "branching": cmd_branching,
    "bounds-check": cmd_bounds_check,
}


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Execute ``cfg`` and write its outputs; returns the exit status."""
    outputs = HANDLERS[cfg.command](cfg)
    stamp = f"# {cfg.manifest()}\n"
    for path, text in outputs.items():
        target = cfg.output if path is None else path
        write_text(target, text + stamp, stream=stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbsgraph", description="Gibbs random graph experiments")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key = value configuration file")
    parser.add_argument("--output", help="output path (overrides the config 'output' key)")
    parser.add_argument("--seed", help="64-bit seed (overrides the config 'seed' key)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config_path = Path(args.config)
        try:
            text = config_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = parse_config(text, args.command, base_dir=config_path.parent)
        if args.seed is not None:
            cfg.seed = _parse_seed(args.seed, "--seed")
        if args.output is not None:
            cfg.output = args.output
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as runtime failure
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
