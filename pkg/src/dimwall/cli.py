"""Command-line experiment runner.

Usage::

    dimwall <experiment> --config PATH [--d INT] [--k INT] [--n INT]
            [--trials INT] [--seed INT] [--eta FLOAT] [--ridge FLOAT]
            [--kernel NAME] [--out DIR]

Each run writes ``results.csv``, ``figure.svg`` and ``manifest.json`` to the
output directory. Exit status: 0 when every checked inequality holds,
1 on a violation, 2 on an invalid configuration (nothing is written).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .boolean import (
    MAX_DIM,
    CapacityError,
    _check_family,
    all_parities,
    hypercube_space,
    k_sparse_parities,
)
from .bound import SLACK_TOL, theorem1_monte_carlo, theorem1_report, trial_seed
from .hilbert import Subspace
from .kernel import (
    deterministic_design,
    get_kernel,
    iid_design,
    iid_design_sampler,
    kernel_names,
    method_subspace,
    sample_size_lower_bound,
)
from .mq import recovery_rate, success_lower_bound

EXPERIMENTS = ("theorem-check", "kernel-wall", "sparse-wall", "mq-demo", "separation")

COLUMNS = {
    "theorem-check": ["mode", "d", "N", "r", "epsilon", "coherence", "bound_value",
                      "slack", "trials", "r_stderr", "epsilon_stderr", "slack_stderr", "seed"],
    "kernel-wall": ["d", "N", "kernel", "n", "rank", "epsilon", "coherence",
                    "bound_value", "slack", "seed"],
    "sparse-wall": ["d", "k", "N", "kernel", "design", "n", "rank", "epsilon",
                    "coherence", "bound_value", "slack", "seed"],
    "mq-demo": ["d", "eta", "repetitions", "queries", "trials", "recovery_rate",
                "success_lower_bound", "seed"],
    "separation": ["d", "N", "learner", "eta", "repetitions", "queries",
                   "recovery_rate", "epsilon", "kernel_min_samples", "seed"],
}

# largest d for which the full parity family is materialized
_MAX_MEASURED_D = 12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one run. Every field except ``seed`` has a default."""

    experiment: str
    seed: int
    d: int = 6
    k: int = 2
    n: int = 16
    trials: int = 100
    repetitions: int = 25
    eta: float = 0.2
    epsilon: float = 0.1
    ridge: float = 0.0
    rel_tol: float = 1e-10
    kernel: str = "gaussian"
    gamma: float | None = None
    degree: int = 3
    scale: float | None = None
    output_dir: str = "out"

    def kernel_spec(self):
        params = {}
        if self.kernel == "gaussian":
            params["gamma"] = self.gamma
        elif self.kernel == "polynomial":
            params = {"degree": self.degree, "scale": self.scale}
        elif self.kernel == "linear":
            params["scale"] = self.scale
        return get_kernel(self.kernel, **params)


_INT = {"seed", "d", "k", "n", "trials", "repetitions", "degree"}
_REAL = {"eta", "epsilon", "ridge", "rel_tol", "gamma", "scale"}
_ALIASES = {"out": "output_dir"}


def csv_schema(experiment: str | None = None):
    """Column list for one experiment, or the whole mapping."""
    if experiment is None:
        return {k: list(v) for k, v in COLUMNS.items()}
    return list(COLUMNS[experiment])


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        out[key] = value
    return out


def build_config(experiment: str, raw: dict) -> ExperimentConfig:
    """Coerce and validate a raw key/value mapping."""
    known = {f.name for f in fields(ExperimentConfig)}
    values = {"experiment": experiment}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "experiment":
            if value != experiment:
                raise ConfigError(f"config names experiment {value!r}, command line {experiment!r}")
            continue
        if value is None:
            continue
        try:
            if key in _INT:
                values[key] = int(value)
            elif key in _REAL:
                values[key] = None if str(value).lower() == "none" else float(value)
            else:
                values[key] = str(value)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}") from None
    if "seed" not in values:
        raise ConfigError("a master seed is required (set seed = INT)")
    cfg = ExperimentConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; choose from {EXPERIMENTS}")
    if cfg.kernel not in kernel_names():
        raise ConfigError(f"unknown kernel {cfg.kernel!r}; choose from {kernel_names()}")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if not 1 <= cfg.d <= MAX_DIM:
        raise ConfigError(f"d must satisfy 1 <= d <= {MAX_DIM}")
    if cfg.n < 1 or cfg.trials < 1:
        raise ConfigError("n and trials must be >= 1")
    if not 0 <= cfg.k <= cfg.d:
        raise ConfigError("need 0 <= k <= d")
    if not 0.0 <= cfg.eta < 0.5:
        raise ConfigError("eta must lie in [0, 1/2)")
    if not 0.0 <= cfg.epsilon <= 1.0:
        raise ConfigError("epsilon must lie in [0, 1]")
    if cfg.repetitions < 1 or cfg.repetitions % 2 == 0:
        raise ConfigError("repetitions must be a positive odd integer")
    if cfg.ridge < 0 or not 0 < cfg.rel_tol < 1:
        raise ConfigError("need ridge >= 0 and 0 < rel_tol < 1")
    if cfg.gamma is not None and cfg.gamma <= 0:
        raise ConfigError("gamma must be positive")
    try:
        if cfg.experiment in ("theorem-check", "kernel-wall"):
            _check_family(cfg.d, 1 << cfg.d)
        elif cfg.experiment == "sparse-wall":
            _check_family(cfg.d, math.comb(cfg.d, cfg.k))
    except CapacityError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.experiment == "theorem-check" and cfg.n > 1 << cfg.d:
        raise ConfigError("theorem-check needs n <= 2^d")
    if cfg.experiment == "sparse-wall" and cfg.n > 1 << cfg.d:
        raise ConfigError("sparse-wall needs n <= 2^d for the deterministic design")


def _sweep(n: int) -> list[int]:
    return sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), n})


def _exp_theorem(cfg):
    N = 1 << cfg.d
    phis = all_parities(cfg.d)
    space = hypercube_space(cfg.d)
    rows, bad = [], []
    for m in sorted({round(cfg.n * j / 4) for j in range(5)} | {cfg.n}):
        basis = np.stack([p.values for p in phis[:m]]) if m else np.zeros((0, N))
        rep = theorem1_report(phis, Subspace(space, basis))
        rows.append(dict(mode="deterministic", seed=cfg.seed, d=cfg.d, N=N, **_bound_cols(rep)))
        if abs(rep.slack) > SLACK_TOL * N:
            bad.append(f"equality case failed at r={m}: slack {rep.slack!r}")
    sampler = iid_design_sampler(cfg.kernel_spec(), space, cfg.n, cfg.rel_tol)
    rep = theorem1_monte_carlo(phis, sampler, cfg.trials, cfg.seed)
    rows.append(dict(mode="monte_carlo", seed=cfg.seed, d=cfg.d, N=N, **_bound_cols(rep)))
    if rep.slack < -3 * rep.slack_stderr - SLACK_TOL * N:
        bad.append(f"monte carlo slack {rep.slack!r} below -3 stderr")
    det = [r for r in rows if r["mode"] == "deterministic"]
    fig = [("r = rank(W)", [r["r"] for r in det], [r["r"] for r in det], "k-"),
           ("N(1-eps)/(1+coherence)", [r["r"] for r in det], [r["bound_value"] for r in det], "o")]
    return rows, bad, fig, dict(xlabel="rank of W", ylabel="value",
                                title=f"dimension bound, all parities, d={cfg.d}")


def _bound_cols(rep):
    return dict(r=rep.r, epsilon=rep.epsilon, coherence=rep.coherence,
                bound_value=rep.bound_value, slack=rep.slack, trials=rep.trials,
                r_stderr=rep.r_stderr, epsilon_stderr=rep.epsilon_stderr,
                slack_stderr=rep.slack_stderr)


def _wall_row(phis, k, xs, space, n, rel_tol):
    w = method_subspace(k, xs, space, rel_tol)
    rep = theorem1_report(phis, w)
    N = len(phis)
    return dict(N=N, n=n, rank=w.rank, epsilon=rep.epsilon, coherence=rep.coherence,
                bound_value=rep.bound_value, slack=rep.slack), rep


def _wall_checks(row, rep, bad, label):
    N, n = row["N"], row["n"]
    if rep.slack < -SLACK_TOL * N:
        bad.append(f"{label}: slack {rep.slack!r}")
    if rep.epsilon < 1.0 - n / N - SLACK_TOL:
        bad.append(f"{label}: epsilon {rep.epsilon!r} below wall 1 - n/N")
    if sample_size_lower_bound(N, min(max(rep.epsilon, 0.0), 1.0)) > n + SLACK_TOL * N:
        bad.append(f"{label}: (1-eps)N exceeds n")


def _exp_kernel_wall(cfg):
    space = hypercube_space(cfg.d)
    phis = all_parities(cfg.d)
    k = cfg.kernel_spec()
    rows, bad = [], []
    for j, n in enumerate(_sweep(cfg.n)):
        s = trial_seed(cfg.seed, j)
        xs = iid_design(space, n, np.random.default_rng(s))
        row, rep = _wall_row(phis, k, xs, space, n, cfg.rel_tol)
        row.update(d=cfg.d, kernel=cfg.kernel, seed=s)
        _wall_checks(row, rep, bad, f"n={n}")
        rows.append(row)
    ns = [r["n"] for r in rows]
    N = 1 << cfg.d
    fig = [("measured epsilon", ns, [r["epsilon"] for r in rows], "o-"),
           ("wall 1 - n/N", ns, [1 - n / N for n in ns], "k--")]
    return rows, bad, fig, dict(xlabel="n (sample size)", ylabel="epsilon", logx=True,
                                title=f"{cfg.kernel} kernel, all {N} parities, d={cfg.d}")


def _exp_sparse_wall(cfg):
    space = hypercube_space(cfg.d)
    phis = k_sparse_parities(cfg.d, cfg.k)
    k = cfg.kernel_spec()
    rows, bad = [], []
    series = {}
    for j, n in enumerate(_sweep(cfg.n)):
        s = trial_seed(cfg.seed, j)
        designs = [("deterministic", deterministic_design(space, n), cfg.seed),
                   ("iid", iid_design(space, n, np.random.default_rng(s)), s)]
        for name, xs, seed in designs:
            row, rep = _wall_row(phis, k, xs, space, n, cfg.rel_tol)
            row.update(d=cfg.d, k=cfg.k, kernel=cfg.kernel, design=name, seed=seed)
            _wall_checks(row, rep, bad, f"{name} n={n}")
            rows.append(row)
            series.setdefault(name, []).append((n, rep.epsilon))
    N = len(phis)
    ns = _sweep(cfg.n)
    fig = [(f"{name} design", [a for a, _ in pts], [b for _, b in pts], "o-")
           for name, pts in series.items()]
    fig.append(("wall 1 - n/N", ns, [max(0.0, 1 - n / N) for n in ns], "k--"))
    return rows, bad, fig, dict(xlabel="n (sample size)", ylabel="epsilon", logx=True,
                                title=f"{cfg.kernel} kernel, {N} {cfg.k}-sparse parities, d={cfg.d}")


def _rate_check(rate, lb, trials, bad, label):
    tol = 3.0 * math.sqrt(lb * (1.0 - lb) / trials)
    if rate < lb - tol:
        bad.append(f"{label}: recovery {rate!r} below Hoeffding bound {lb!r}")


def _exp_mq(cfg):
    rows, bad = [], []
    settings = [(0.0, 1)] + [(cfg.eta, r) for r in range(1, cfg.repetitions + 1, 2)]
    for j, (eta, reps) in enumerate(settings):
        s = trial_seed(cfg.seed, j)
        rate = recovery_rate(cfg.d, eta, reps, cfg.trials, s)
        lb = success_lower_bound(cfg.d, eta, reps)
        rows.append(dict(d=cfg.d, eta=eta, repetitions=reps, queries=(cfg.d + 1) * reps,
                         trials=cfg.trials, recovery_rate=rate, success_lower_bound=lb, seed=s))
        _rate_check(rate, lb, cfg.trials, bad, f"eta={eta} reps={reps}")
    noisy = rows[1:]
    reps = [r["repetitions"] for r in noisy]
    fig = [("empirical recovery", reps, [r["recovery_rate"] for r in noisy], "o-"),
           ("Hoeffding lower bound", reps, [r["success_lower_bound"] for r in noisy], "k--")]
    return rows, bad, fig, dict(xlabel="repetitions per query point", ylabel="recovery rate",
                                title=f"parity recovery, d={cfg.d}, eta={cfg.eta}")


def _exp_separation(cfg):
    d, N = cfg.d, 1 << cfg.d
    rows, bad = [], []
    kmin = sample_size_lower_bound(N, cfg.epsilon)
    for j, (name, eta, reps) in enumerate([("mq_noiseless", 0.0, 1),
                                           ("mq_noisy", cfg.eta, cfg.repetitions)]):
        s = trial_seed(cfg.seed, j)
        rate = recovery_rate(d, eta, reps, cfg.trials, s)
        q = (d + 1) * reps
        rows.append(dict(d=d, N=N, learner=name, eta=eta, repetitions=reps, queries=q,
                         recovery_rate=rate, epsilon=float("nan"),
                         kernel_min_samples=kmin, seed=s))
        _rate_check(rate, success_lower_bound(d, eta, reps), cfg.trials, bad, name)
    budget = rows[-1]["queries"]
    rows.append(dict(d=d, N=N, learner="kernel_wall", eta=float("nan"), repetitions=0,
                     queries=budget, recovery_rate=float("nan"),
                     epsilon=max(0.0, 1.0 - budget / N), kernel_min_samples=kmin, seed=cfg.seed))
    if d <= _MAX_MEASURED_D:
        s = trial_seed(cfg.seed, 2)
        space = hypercube_space(d)
        n = min(budget, N)
        xs = iid_design(space, n, np.random.default_rng(s))
        w = method_subspace(cfg.kernel_spec(), xs, space, cfg.rel_tol)
        rep = theorem1_report(all_parities(d), w)
        rows.append(dict(d=d, N=N, learner="kernel_measured", eta=0.0, repetitions=0,
                         queries=n, recovery_rate=float("nan"), epsilon=rep.epsilon,
                         kernel_min_samples=kmin, seed=s))
        if rep.epsilon < 1.0 - n / N - SLACK_TOL:
            bad.append(f"measured kernel epsilon {rep.epsilon!r} below wall")
    labels = [r["learner"] for r in rows]
    fig = [("queries / samples used", list(range(len(rows))), [r["queries"] for r in rows], "o"),
           (f"kernel wall (1-eps)N, eps={cfg.epsilon}", list(range(len(rows))),
            [kmin] * len(rows), "k--")]
    return rows, bad, fig, dict(xlabel=" | ".join(labels), ylabel="number of labels",
                                title=f"membership queries vs kernel wall, d={d}")


_RUNNERS = {
    "theorem-check": _exp_theorem,
    "kernel-wall": _exp_kernel_wall,
    "sparse-wall": _exp_sparse_wall,
    "mq-demo": _exp_mq,
    "separation": _exp_separation,
}


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(experiment: str, rows: list[dict]) -> bytes:
    cols = COLUMNS[experiment]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([format_value(row[c]) for c in cols])
    return buf.getvalue().encode("utf-8")


def read_csv(path) -> list[dict]:
    """Parse a results.csv back into typed rows (numbers as int/float)."""
    with open(path, newline="", encoding="utf-8") as fh:
        out = []
        for row in csv.DictReader(fh):
            typed = {}
            for k, v in row.items():
                try:
                    typed[k] = int(v)
                except ValueError:
                    try:
                        typed[k] = float(v)
                    except ValueError:
                        typed[k] = v
            out.append(typed)
    return out


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment and write its outputs; return the exit status."""
    from .figures import line_plot

    rows, violations, series, fig_kw = _RUNNERS[cfg.experiment](cfg)
    outputs = {
        "results.csv": render_csv(cfg.experiment, rows),
        "figure.svg": line_plot(series, **fig_kw),
    }
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, data in outputs.items():
        _atomic_write(out / name, data)
    manifest = {
        "config": asdict(cfg),
        "version": __version__,
        "backend": BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": cfg.seed,
        "checksums": {name: hashlib.sha256(data).hexdigest() for name, data in outputs.items()},
        "passed": not violations,
        "violations": violations,
    }
    _atomic_write(out / "manifest.json", (json.dumps(manifest, indent=2) + "\n").encode())
    return 0 if not violations else 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimwall", description="Dimension-wall experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="flat key = value file")
    for name, typ in [("d", int), ("k", int), ("n", int), ("trials", int), ("seed", int),
                      ("repetitions", int), ("eta", float), ("epsilon", float),
                      ("ridge", float)]:
        p.add_argument(f"--{name}", type=typ)
    p.add_argument("--kernel")
    p.add_argument("--out", dest="output_dir")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        raw = parse_config_text(Path(args.config).read_text(encoding="utf-8"))
        for key, value in vars(args).items():
            if key not in ("experiment", "config") and value is not None:
                raw[key] = value
        cfg = build_config(args.experiment, raw)
    except (OSError, ConfigError) as exc:
        print(f"dimwall: invalid config: {exc}", file=sys.stderr)
        return 2
    status = run(cfg)
    if status:
        print(f"dimwall: inequality violated; see {cfg.output_dir}/manifest.json", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
