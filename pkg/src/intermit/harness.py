"""Experiment orchestration: config files, Monte Carlo sweeps, and output emission.

Config files are INI text (sections of key = value pairs).  Integer keys
accept either a single value ("4") or an inclusive range ("3..5") sampled
uniformly per trial; the team noise key accepts a float range the same way.
Matroid rules are declared as VARIANT:LIMIT tokens where LIMIT is the
symbol R (robot count), the symbol L (the active-time limit), an integer,
a comma vector, or a semicolon-separated matrix.  See DEFAULT_CONFIG for
the full grammar in context.

Per-trial randomness is drawn from ``default_rng(seed + trial)`` in a fixed
order (grid, horizon, team, limit, robots, probes, field simulation), which
makes every record a pure function of (config, trial index).  Wall-clock
timings go to a separate timings.csv so trials.csv reproduces byte-for-byte.
"""

from __future__ import annotations

import configparser
import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constraints import ConstraintSystem, KnapsackSpec, MatroidSpec
from .envsim import GmmConfig, WeightTrajectory, simulate_and_sample
from .groundset import GridSpec, GroundSet, RobotSpec, build_ground_set
from .oracle import EnumerationBudget, OracleBudgetExceeded, enumerate_optimal, optimality_ratio
from .problem import ProblemInstance, mi_evaluator
from .solver import SolverConfig, optimality_bound, threshold_greedy
from .stgp import KernelParams, fit_gp

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialDims",
    "SampledTrial",
    "TrialRecord",
    "sample_instance",
    "run_trial",
    "run_monte_carlo",
    "summarize",
    "emit_outputs",
    "read_trials",
    "small_ground_sets",
    "random_matroid_spec",
    "DEFAULT_CONFIG",
]


class ConfigError(ValueError):
    """Malformed experiment configuration."""


DEFAULT_CONFIG = """\
# intermit experiment configuration (INI grammar)
# integer keys take "4" or an inclusive range "3..5"; team noise_var takes a
# float or "lo..hi"; matroids are VARIANT:LIMIT tokens where LIMIT is R, L,
# an integer, a comma vector, or a ;-separated matrix.

[field]
width = 200
height = 200

[grid]
p = 3..5
q = 3..5

[horizon]
t = 4..8

[team]
r = 2..4
# "random" draws w_r uniformly in (0,1) per robot per trial
cost_weight = random
noise_var = 0.05..0.5
depot = 0, 0

[constraints]
l = 2..4
matroids = I21:R I23:L
knapsacks = X2
# budget 230 makes roughly half of sampled instances hit a budget restart
# under the default field/cost model (empirical calibration over the default
# ranges: 55% at 220, 40% at 250)
budget = 230

[kernel]
spatial_var = 2.0
spatial_scale = 60.0
temporal_var = 1.0
temporal_scale = 2.5
noise_var = 1e-4

[training]
n_probes = 60
noise_var = 0.01

[gmm]
# centers and initial weights follow the standard scenario; widths and
# noise_scale are package defaults, tune per deployment
centers = (100,100) (60,80) (40,30) (160,160) (160,30)
widths = 40
weights = 5, 5, 3, 8, 4
noise_scale = 0.05
dt = 0.1

[solver]
eta = 0.1

[oracle]
max_sets = 200000
# empty max_seconds disables the wall-clock cap (keeps re-runs deterministic)
max_seconds =
max_elements = 1000

[experiment]
trials = 100
seed = 7
out = runs/default
"""


def _parse_int_range(text: str, key: str) -> tuple[int, int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer or a..b range, got {text!r}") from exc
    if lo > hi:
        raise ConfigError(f"{key}: empty range {text!r}")
    return lo, hi


def _parse_float_range(text: str, key: str) -> tuple[float, float]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = float(lo), float(hi)
        else:
            lo = hi = float(text)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected a float or lo..hi range, got {text!r}") from exc
    if lo > hi:
        raise ConfigError(f"{key}: empty range {text!r}")
    return lo, hi


def _parse_centers(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for chunk in text.replace(")", ") ").split():
        chunk = chunk.strip()
        if not chunk:
            continue
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise ConfigError(f"gmm centers must look like (x,y), got {chunk!r}")
        x, y = chunk[1:-1].split(",")
        out.append((float(x), float(y)))
    if not out:
        raise ConfigError("gmm centers list is empty")
    return tuple(out)


def _fmt_range(rng: tuple) -> str:
    lo, hi = rng
    return f"{lo}" if lo == hi else f"{lo}..{hi}"


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description; equality means identical runs."""

    width: float = 200.0
    height: float = 200.0
    p: tuple[int, int] = (3, 5)
    q: tuple[int, int] = (3, 5)
    horizon: tuple[int, int] = (4, 8)
    n_robots: tuple[int, int] = (2, 4)
    cost_weight: float | None = None  # None draws w_r ~ U(0,1) per robot
    noise_var: tuple[float, float] = (0.05, 0.5)
    depot: tuple[float, float] = (0.0, 0.0)
    active_limit: tuple[int, int] = (2, 4)
    matroids: tuple[str, ...] = ("I21:R", "I23:L")
    knapsacks: tuple[str, ...] = ("X2",)
    budget: float = 230.0
    kernel: KernelParams = KernelParams(2.0, 60.0, 1.0, 2.5, 1e-4)
    n_probes: int = 60
    probe_noise: float = 0.01
    gmm_centers: tuple[tuple[float, float], ...] = tuple((float(x), float(y)) for x, y in
                                                         ((100, 100), (60, 80), (40, 30),
                                                          (160, 160), (160, 30)))
    gmm_widths: tuple[float, ...] = (40.0,) * 5
    gmm_weights: tuple[float, ...] = (5.0, 5.0, 3.0, 8.0, 4.0)
    gmm_noise: float = 0.05
    gmm_dt: float = 0.1
    eta: float = 0.1
    oracle_max_sets: int = 200_000
    oracle_max_seconds: float | None = None
    oracle_max_elements: int = 1000
    trials: int = 100
    seed: int = 7
    out_dir: str = "runs/default"

    @classmethod
    def from_string(cls, text: str) -> "ExperimentConfig":
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"could not parse config: {exc}") from exc

        def get(section, key, default=None):
            if parser.has_option(section, key):
                return parser.get(section, key).strip()
            if default is None:
                raise ConfigError(f"missing required key [{section}] {key}")
            return default

        cw_text = get("team", "cost_weight", "random")
        widths_text = get("gmm", "widths", "40")
        centers = _parse_centers(get("gmm", "centers", "(100,100) (60,80) (40,30) (160,160) (160,30)"))
        widths = tuple(float(v) for v in widths_text.split(","))
        if len(widths) == 1:
            widths = widths * len(centers)
        weights = tuple(float(v) for v in get("gmm", "weights", "5,5,3,8,4").split(","))
        depot = tuple(float(v) for v in get("team", "depot", "0, 0").split(","))
        max_seconds_text = get("oracle", "max_seconds", " ").strip()
        return cls(
            width=float(get("field", "width", "200")),
            height=float(get("field", "height", "200")),
            p=_parse_int_range(get("grid", "p", "3..5"), "grid.p"),
            q=_parse_int_range(get("grid", "q", "3..5"), "grid.q"),
            horizon=_parse_int_range(get("horizon", "t", "4..8"), "horizon.t"),
            n_robots=_parse_int_range(get("team", "r", "2..4"), "team.r"),
            cost_weight=None if cw_text == "random" else float(cw_text),
            noise_var=_parse_float_range(get("team", "noise_var", "0.05..0.5"), "team.noise_var"),
            depot=(depot[0], depot[1]),
            active_limit=_parse_int_range(get("constraints", "l", "2..4"), "constraints.l"),
            matroids=tuple(get("constraints", "matroids", "I21:R I23:L").split()),
            knapsacks=tuple(get("constraints", "knapsacks", "X2").split()),
            budget=float(get("constraints", "budget", "110")),
            kernel=KernelParams(
                spatial_var=float(get("kernel", "spatial_var", "2.0")),
                spatial_scale=float(get("kernel", "spatial_scale", "60.0")),
                temporal_var=float(get("kernel", "temporal_var", "1.0")),
                temporal_scale=float(get("kernel", "temporal_scale", "2.5")),
                noise_var=float(get("kernel", "noise_var", "1e-4")),
            ),
            n_probes=int(get("training", "n_probes", "60")),
            probe_noise=float(get("training", "noise_var", "0.01")),
            gmm_centers=centers,
            gmm_widths=widths,
            gmm_weights=weights,
            gmm_noise=float(get("gmm", "noise_scale", "0.05")),
            gmm_dt=float(get("gmm", "dt", "0.1")),
            eta=float(get("solver", "eta", "0.1")),
            oracle_max_sets=int(get("oracle", "max_sets", "200000")),
            oracle_max_seconds=float(max_seconds_text) if max_seconds_text else None,
            oracle_max_elements=int(get("oracle", "max_elements", "1000")),
            trials=int(get("experiment", "trials", "100")),
            seed=int(get("experiment", "seed", "7")),
            out_dir=get("experiment", "out", "runs/default"),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_string(Path(path).read_text())

    def to_string(self) -> str:
        """Canonical echo of the resolved config; reparses to an equal config."""
        k = self.kernel
        centers = " ".join(f"({x:g},{y:g})" for x, y in self.gmm_centers)
        lines = [
            "# resolved intermit configuration (rng: numpy default_rng / PCG64,",
            "# stream seed + trial per trial)",
            "[field]",
            f"width = {self.width!r}",
            f"height = {self.height!r}",
            "",
            "[grid]",
            f"p = {_fmt_range(self.p)}",
            f"q = {_fmt_range(self.q)}",
            "",
            "[horizon]",
            f"t = {_fmt_range(self.horizon)}",
            "",
            "[team]",
            f"r = {_fmt_range(self.n_robots)}",
            f"cost_weight = {'random' if self.cost_weight is None else repr(self.cost_weight)}",
            f"noise_var = {self.noise_var[0]!r}..{self.noise_var[1]!r}",
            f"depot = {self.depot[0]!r}, {self.depot[1]!r}",
            "",
            "[constraints]",
            f"l = {_fmt_range(self.active_limit)}",
            f"matroids = {' '.join(self.matroids)}",
            f"knapsacks = {' '.join(self.knapsacks)}",
            f"budget = {self.budget!r}",
            "",
            "[kernel]",
            f"spatial_var = {k.spatial_var!r}",
            f"spatial_scale = {k.spatial_scale!r}",
            f"temporal_var = {k.temporal_var!r}",
            f"temporal_scale = {k.temporal_scale!r}",
            f"noise_var = {k.noise_var!r}",
            "",
            "[training]",
            f"n_probes = {self.n_probes}",
            f"noise_var = {self.probe_noise!r}",
            "",
            "[gmm]",
            f"centers = {centers}",
            f"widths = {', '.join(repr(w) for w in self.gmm_widths)}",
            f"weights = {', '.join(repr(w) for w in self.gmm_weights)}",
            f"noise_scale = {self.gmm_noise!r}",
            f"dt = {self.gmm_dt!r}",
            "",
            "[solver]",
            f"eta = {self.eta!r}",
            "",
            "[oracle]",
            f"max_sets = {self.oracle_max_sets}",
            f"max_seconds = {'' if self.oracle_max_seconds is None else repr(self.oracle_max_seconds)}",
            f"max_elements = {self.oracle_max_elements}",
            "",
            "[experiment]",
            f"trials = {self.trials}",
            f"seed = {self.seed}",
            f"out = {self.out_dir}",
            "",
        ]
        return "\n".join(lines)

    def gmm(self) -> GmmConfig:
        return GmmConfig(self.gmm_centers, self.gmm_widths, self.gmm_weights,
                         None, self.gmm_noise, self.gmm_dt)

    def oracle_budget(self) -> EnumerationBudget:
        return EnumerationBudget(self.oracle_max_sets, self.oracle_max_seconds,
                                 self.oracle_max_elements)


def _parse_limit(token: str, n_robots: int, active_limit: int):
    if token == "R":
        return n_robots
    if token == "L":
        return active_limit
    if ";" in token:
        return [[int(v) for v in row.split(",")] for row in token.split(";")]
    if "," in token:
        return [int(v) for v in token.split(",")]
    return int(token)


def build_constraint_system(matroid_tokens, knapsack_tokens, budget: float,
                            n_robots: int, active_limit: int) -> ConstraintSystem:
    """Resolve VARIANT:LIMIT tokens against one trial's dimensions."""
    matroids = []
    for token in matroid_tokens:
        if ":" not in token:
            raise ConfigError(f"matroid token {token!r} needs a :LIMIT suffix")
        variant, limit = token.split(":", 1)
        matroids.append(MatroidSpec(variant, _parse_limit(limit, n_robots, active_limit)))
    knapsacks = []
    for token in knapsack_tokens:
        if ":" in token:
            variant, b = token.split(":", 1)
            knapsacks.append(KnapsackSpec(variant, float(b)))
        else:
            knapsacks.append(KnapsackSpec(token, budget))
    return ConstraintSystem(tuple(matroids), tuple(knapsacks))


@dataclass(frozen=True)
class TrialDims:
    p: int
    q: int
    horizon: int
    n_robots: int
    active_limit: int

    @property
    def problem_size(self) -> int:
        return self.active_limit * self.n_robots * self.p * self.q

    @property
    def n_elements(self) -> int:
        return self.p * self.q * self.n_robots * self.horizon


@dataclass(frozen=True)
class SampledTrial:
    instance: ProblemInstance
    dims: TrialDims
    trajectory: WeightTrajectory


def _sample_int(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1] + 1))


def sample_instance(cfg: ExperimentConfig, trial: int) -> SampledTrial:
    """Materialize trial ``trial``; deterministic in (config, trial).

    The draw order below is part of the reproducibility contract.
    """
    rng = np.random.default_rng(cfg.seed + trial)
    p = _sample_int(rng, cfg.p)
    q = _sample_int(rng, cfg.q)
    horizon = _sample_int(rng, cfg.horizon)
    n_robots = _sample_int(rng, cfg.n_robots)
    active_limit = _sample_int(rng, cfg.active_limit)
    robots = []
    for rid in range(1, n_robots + 1):
        w = rng.uniform(1e-6, 1.0) if cfg.cost_weight is None else cfg.cost_weight
        nv = rng.uniform(cfg.noise_var[0], cfg.noise_var[1])
        robots.append(RobotSpec(id=rid, noise_var=nv, cost_weight=float(w), depot=cfg.depot))
    grid = GridSpec(p, q, cfg.width, cfg.height)
    ground = build_ground_set(grid, horizon, robots)
    constraints = build_constraint_system(cfg.matroids, cfg.knapsacks, cfg.budget,
                                          n_robots, active_limit)
    m = cfg.n_probes
    xs = rng.uniform(0.0, cfg.width, m)
    ys = rng.uniform(0.0, cfg.height, m)
    ts = rng.uniform(0.0, horizon, m)
    probes = np.column_stack([xs, ys, ts])
    train, trajectory = simulate_and_sample(cfg.gmm(), probes, rng, cfg.probe_noise,
                                            (cfg.width, cfg.height), horizon)
    model = fit_gp(cfg.kernel, train)
    dims = TrialDims(p, q, horizon, n_robots, active_limit)
    return SampledTrial(ProblemInstance(ground, model, constraints), dims, trajectory)


@dataclass(frozen=True)
class TrialRecord:
    """One Monte Carlo outcome; wall times live in timings.csv, the rest in trials.csv."""

    trial: int
    p: int
    q: int
    horizon: int
    n_robots: int
    active_limit: int
    problem_size: int
    n_elements: int
    greedy_mi: float
    optimal_mi: float | None
    ratio: float | None
    bound: float
    oracle_sets: int
    oracle_complete: bool
    oracle_calls: int
    greedy_seconds: float = 0.0
    oracle_seconds: float = 0.0


TRIAL_COLUMNS = ("trial", "p", "q", "horizon", "n_robots", "active_limit", "problem_size",
                 "n_elements", "greedy_mi", "optimal_mi", "ratio", "bound", "oracle_sets",
                 "oracle_complete", "oracle_calls")
TIMING_COLUMNS = ("trial", "greedy_seconds", "oracle_seconds")
SUMMARY_COLUMNS = ("problem_size", "n_trials", "n_ratios", "mean_greedy_mi",
                   "mean_optimal_mi", "mean_ratio", "min_ratio")


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    """Sample one instance, solve it greedily and exactly, and record the outcome."""
    sampled = sample_instance(cfg, trial)
    instance, dims = sampled.instance, sampled.dims
    ev = mi_evaluator(instance)

    t0 = time.perf_counter()
    greedy = threshold_greedy(instance, SolverConfig(eta=cfg.eta), evaluator=ev)
    greedy_seconds = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        exact = enumerate_optimal(instance, cfg.oracle_budget(), evaluator=ev)
        ratio = optimality_ratio(greedy, exact)
        optimal_mi = exact.value
        complete = True
        sets_visited = exact.sets_visited
    except OracleBudgetExceeded as exc:
        ratio = None
        optimal_mi = None
        complete = False
        sets_visited = exc.partial.sets_visited
    oracle_seconds = time.perf_counter() - t0

    return TrialRecord(
        trial=trial, p=dims.p, q=dims.q, horizon=dims.horizon, n_robots=dims.n_robots,
        active_limit=dims.active_limit, problem_size=dims.problem_size,
        n_elements=dims.n_elements, greedy_mi=float(greedy.value),
        optimal_mi=None if optimal_mi is None else float(optimal_mi), ratio=ratio,
        bound=optimality_bound(instance.constraints.n_matroids,
                               instance.constraints.n_knapsacks, cfg.eta),
        oracle_sets=sets_visited, oracle_complete=complete,
        oracle_calls=greedy.oracle_calls,
        greedy_seconds=greedy_seconds, oracle_seconds=oracle_seconds,
    )


def run_monte_carlo(cfg: ExperimentConfig, jobs: int = 1):
    """Run all trials; returns (records sorted by trial, failure manifest)."""
    records: list[TrialRecord] = []
    failures: list[tuple[int, str]] = []
    trials = list(range(cfg.trials))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {t: pool.submit(run_trial, cfg, t) for t in trials}
            for t in trials:
                try:
                    records.append(futures[t].result())
                except Exception as exc:  # noqa: BLE001 - collected into the manifest
                    failures.append((t, repr(exc)))
    else:
        for t in trials:
            try:
                records.append(run_trial(cfg, t))
            except Exception as exc:  # noqa: BLE001
                failures.append((t, repr(exc)))
    records.sort(key=lambda r: r.trial)
    return records, failures


@dataclass(frozen=True)
class SummaryRow:
    problem_size: int
    n_trials: int
    n_ratios: int
    mean_greedy_mi: float
    mean_optimal_mi: float | None
    mean_ratio: float | None
    min_ratio: float | None


def summarize(records) -> list[SummaryRow]:
    """Aggregate per problem size; duplicate sizes collapse to their mean."""
    by_size: dict[int, list[TrialRecord]] = {}
    for rec in records:
        by_size.setdefault(rec.problem_size, []).append(rec)
    rows = []
    for size in sorted(by_size):
        group = by_size[size]
        ratios = [r.ratio for r in group if r.ratio is not None]
        optima = [r.optimal_mi for r in group if r.optimal_mi is not None]
        rows.append(SummaryRow(
            problem_size=size,
            n_trials=len(group),
            n_ratios=len(ratios),
            mean_greedy_mi=sum(r.greedy_mi for r in group) / len(group),
            mean_optimal_mi=sum(optima) / len(optima) if optima else None,
            mean_ratio=sum(ratios) / len(ratios) if ratios else None,
            min_ratio=min(ratios) if ratios else None,
        ))
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_outputs(records, out_dir, cfg: ExperimentConfig | None = None,
                 failures=()) -> dict[str, Path]:
    """Write trials.csv, timings.csv, summary.csv, both plots, and the config echo."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, Path] = {}

    trials_path = out / "trials.csv"
    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in TRIAL_COLUMNS])
    manifest["trials"] = trials_path

    timings_path = out / "timings.csv"
    with open(timings_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMING_COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in TIMING_COLUMNS])
    manifest["timings"] = timings_path

    summary_path = out / "summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in summarize(records):
            writer.writerow([_cell(getattr(row, col)) for col in SUMMARY_COLUMNS])
    manifest["summary"] = summary_path

    manifest["ratio_plot"] = _plot_ratio(records, out / "ratio.png")
    manifest["util_plot"] = _plot_util(records, out / "util.png")

    if cfg is not None:
        echo_path = out / "config.echo"
        echo_path.write_text(cfg.to_string())
        manifest["config"] = echo_path

    if failures:
        fail_path = out / "failures.csv"
        with open(fail_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "error"])
            for trial, err in failures:
                writer.writerow([trial, err])
        manifest["failures"] = fail_path
    return manifest


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _plot_ratio(records, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    done = [r for r in records if r.ratio is not None]
    if done:
        ax.scatter([r.problem_size for r in done], [r.ratio for r in done],
                   s=18, alpha=0.7, label="greedy / optimal")
        ax.axhline(done[0].bound, color="tab:red", linestyle="--",
                   label=f"guarantee {done[0].bound:.3f}")
        ax.legend()
    ax.set_xlabel("problem size (L*R*P*Q)")
    ax.set_ylabel("optimality ratio")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _plot_util(records, path: Path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    rows = summarize(records)
    if rows:
        ax.plot([r.problem_size for r in rows], [r.mean_greedy_mi for r in rows],
                marker="o", label="mean selection value")
        ax.legend()
    ax.set_xlabel("problem size (L*R*P*Q)")
    ax.set_ylabel("mutual information")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _parse_cell(text: str, kind):
    if text == "":
        return None
    if kind is bool:
        return text == "true"
    return kind(text)


def read_trials(out_dir) -> list[TrialRecord]:
    """Rebuild TrialRecords from trials.csv plus timings.csv (inverse of emit_outputs)."""
    out = Path(out_dir)
    timings: dict[int, tuple[float, float]] = {}
    timing_path = out / "timings.csv"
    if timing_path.exists():
        with open(timing_path, newline="") as fh:
            for row in csv.DictReader(fh):
                timings[int(row["trial"])] = (float(row["greedy_seconds"]),
                                              float(row["oracle_seconds"]))
    kinds = {"trial": int, "p": int, "q": int, "horizon": int, "n_robots": int,
             "active_limit": int, "problem_size": int, "n_elements": int,
             "greedy_mi": float, "optimal_mi": float, "ratio": float, "bound": float,
             "oracle_sets": int, "oracle_complete": bool, "oracle_calls": int}
    records = []
    with open(out / "trials.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            data = {col: _parse_cell(row[col], kinds[col]) for col in TRIAL_COLUMNS}
            g, o = timings.get(data["trial"], (0.0, 0.0))
            records.append(TrialRecord(**data, greedy_seconds=g, oracle_seconds=o))
    return records


# --- small randomized pools for matroid-axiom verification -----------------

_SMALL_SHAPES = ((1, 1, 1, 12), (2, 1, 1, 4), (1, 2, 2, 3), (3, 1, 1, 3), (2, 2, 1, 3),
                 (1, 1, 2, 5), (2, 1, 2, 3), (1, 3, 1, 4), (2, 2, 2, 1), (1, 1, 3, 4))


def small_ground_sets(rng: np.random.Generator, count: int,
                      max_elements: int = 12) -> list[GroundSet]:
    """Random small pools (all shapes with P*Q*R*T <= max_elements) for exhaustive checks."""
    shapes = [s for s in _SMALL_SHAPES if s[0] * s[1] * s[2] * s[3] <= max_elements]
    pools = []
    for _ in range(count):
        p, q, r, t = shapes[int(rng.integers(0, len(shapes)))]
        robots = [RobotSpec(id=i + 1, noise_var=float(rng.uniform(0.05, 0.5)),
                            cost_weight=float(rng.uniform(0.1, 0.9)))
                  for i in range(r)]
        pools.append(build_ground_set(GridSpec(p, q, 200.0, 200.0), t, robots))
    return pools


def random_matroid_spec(variant: str, ground: GroundSet,
                        rng: np.random.Generator) -> MatroidSpec:
    """Random limits of the right shape for ``variant`` on ``ground``."""
    t, r = ground.horizon, ground.n_robots
    if variant == "I21":
        return MatroidSpec(variant, [int(v) for v in rng.integers(0, r + 1, t)])
    if variant == "I22":
        return MatroidSpec(variant, [int(v) for v in rng.integers(0, 2, t)])
    if variant == "I23":
        return MatroidSpec(variant, int(rng.integers(1, t + 1)))
    if variant == "I31":
        return MatroidSpec(variant, [[int(v) for v in row]
                                     for row in rng.integers(0, 3, (r, t))])
    if variant == "I32":
        return MatroidSpec(variant, [[int(v) for v in row]
                                     for row in rng.integers(0, 2, (r, t))])
    if variant == "I33":
        return MatroidSpec(variant, [int(v) for v in rng.integers(1, t + 1, r)])
    raise ValueError(f"unknown matroid variant {variant!r}")
