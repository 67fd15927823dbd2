"""Sweep the Werner parameter and monitoring strength, check bounds, emit datasets.

Each grid cell is evaluated three ways: the entropy variation
``S(M(rho)) - S(rho)``, the mutual-information difference in the measured
basis, and the weak discord minimized over bases. In the simulated mode
every state entering those formulas comes from a tomographic reconstruction
and each value carries a bootstrap error bar.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .channels import (PAULI_OPS, apply_channel, channel_from_schedule, monitoring, monitoring_schedule, quantize,
                       werner_schedule)
from .density import Subsystem, fidelity, mutual_information, von_neumann_entropy
from .minimize import MinimizerOptions
from .quantifiers import irrealism, weak_discord, werner_delta_realism_closed_form
from .states import COMPUTATIONAL, ObservableBasis, bell_state, werner_state
from .tomography import (CountsTable, ReconstructionError, bootstrap_errorbars, expected_counts, reconstruct,
                         simulate_counts)

log = logging.getLogger(__name__)

DEFAULT_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
MODES = ("ideal", "simulated-tomography")
METHODS = ("entropy-variation", "mutual-info-difference", "minimized-discord")
IDEAL_ATOL = 1e-9


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    mu_values: tuple[float, ...] = DEFAULT_GRID
    eps_values: tuple[float, ...] = DEFAULT_GRID
    mode: str = "ideal"
    exposure_s: float = 16.0
    rate_hz: float = 625.0
    seed: int | None = None
    n_bootstrap: int = 50
    total_s: float = 16.0
    granularity: float | None = None
    basis: ObservableBasis = COMPUTATIONAL
    subsystem: Subsystem = Subsystem.A
    method: str = "mle"
    workers: int = 1
    dataset_path: str | None = None
    fidelity_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu_values", tuple(float(m) for m in self.mu_values))
        object.__setattr__(self, "eps_values", tuple(float(e) for e in self.eps_values))
        object.__setattr__(self, "subsystem", Subsystem.parse(self.subsystem))
        if isinstance(self.basis, str):
            object.__setattr__(self, "basis", ObservableBasis.parse(self.basis))
        elif not isinstance(self.basis, ObservableBasis):
            object.__setattr__(self, "basis", ObservableBasis(*self.basis))
        for name in ("mu_values", "eps_values"):
            bad = [v for v in getattr(self, name) if not 0.0 <= v <= 1.0]
            if bad:
                raise ValueError(f"{name} outside [0, 1]: {bad}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "simulated-tomography" and self.seed is None:
            raise ValueError("simulated-tomography mode needs a seed")
        if self.n_bootstrap < 0 or self.n_bootstrap == 1:
            raise ValueError("n_bootstrap must be 0 (no error bars) or at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @classmethod
    def from_file(cls, path: str | Path, **overrides) -> "ExperimentConfig":
        """Load a YAML (or JSON) config; non-``None`` overrides win over file values."""
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text()) or {}
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass(frozen=True)
class SweepRow:
    mu: float
    eps: float
    method: str
    value: float
    err: float
    bound: float
    closed_form: float
    fidelity: float


@dataclass(frozen=True)
class FidelityRow:
    mu: float
    eps: float
    fidelity_vs_ideal: float
    fidelity_vs_bell: float


@dataclass
class Dataset:
    rows: list
    mode: str = "ideal"
    kind: str = "sweep"

    @property
    def row_type(self):
        return SweepRow if self.kind == "sweep" else FidelityRow


def _sort_key(row: SweepRow):
    return (row.mu, row.eps, METHODS.index(row.method))


# State preparation ---------------------------------------------------------

def prepare_state(mu: float, total: float = 16.0, granularity: float | None = None) -> np.ndarray:
    """Werner state obtained by time-slicing Pauli operations on |phi-> (qubit A)."""
    sched = werner_schedule(mu, total)
    if granularity:
        sched, err = quantize(sched, granularity)
        if err > 0:
            log.info("mu=%g: schedule quantization shifts weights by up to %.3g", mu, err)
    return apply_channel(bell_state(), channel_from_schedule(sched, PAULI_OPS, Subsystem.A))


def monitor_state(rho, eps: float, cfg: ExperimentConfig) -> np.ndarray:
    """Apply the monitoring map; computational-basis monitoring goes through its time schedule."""
    if cfg.basis != COMPUTATIONAL:
        return monitoring(rho, cfg.basis, eps, cfg.subsystem)
    sched = monitoring_schedule(eps, cfg.total_s)
    if cfg.granularity:
        sched, _ = quantize(sched, cfg.granularity)
    return apply_channel(rho, channel_from_schedule(sched, PAULI_OPS, cfg.subsystem))


def _opts() -> MinimizerOptions:
    return MinimizerOptions()


def _estimates(rho0, rho_eps, eps: float, cfg: ExperimentConfig) -> dict[str, float]:
    res = weak_discord(rho0, eps, cfg.subsystem, _opts())
    if not res.converged:
        raise ConvergenceError(f"weak discord minimization did not converge at eps={eps}")
    return {
        "entropy-variation": von_neumann_entropy(rho_eps) - von_neumann_entropy(rho0),
        "mutual-info-difference": mutual_information(rho0) - mutual_information(rho_eps),
        "minimized-discord": res.value,
    }


def _ideal_rows(cfg: ExperimentConfig, mu: float) -> list[SweepRow]:
    rho0 = prepare_state(mu, cfg.total_s, cfg.granularity)
    irr = irrealism(werner_state(mu), cfg.basis, cfg.subsystem)
    rows = []
    for eps in cfg.eps_values:
        rho_eps = monitor_state(rho0, eps, cfg)
        fid = fidelity(rho_eps, monitoring(werner_state(mu), cfg.basis, eps, cfg.subsystem))
        closed = werner_delta_realism_closed_form(mu, eps)
        try:
            values = _estimates(rho0, rho_eps, eps, cfg)
        except ConvergenceError as exc:
            raise ConvergenceError(f"mu={mu}: {exc}") from None
        rows += [SweepRow(mu, eps, m, values[m], 0.0, eps * irr, closed, fid) for m in METHODS]
    return rows


def _tables_for_mu(cfg: ExperimentConfig, i: int, mu: float):
    """Simulated count tables for each eps, plus the reference (unmonitored) table index."""
    rho0 = prepare_state(mu, cfg.total_s, cfg.granularity)
    tables, ideal = [], []
    for j, eps in enumerate(cfg.eps_values):
        rho_eps = monitor_state(rho0, eps, cfg)
        ideal.append(monitoring(werner_state(mu), cfg.basis, eps, cfg.subsystem))
        tables.append(simulate_counts(rho_eps, exposure=cfg.exposure_s, rate=cfg.rate_hz,
                                      seed=np.random.SeedSequence([cfg.seed, i, j])))
    if 0.0 in cfg.eps_values:
        ref = cfg.eps_values.index(0.0)
    else:
        tables.append(simulate_counts(rho0, exposure=cfg.exposure_s, rate=cfg.rate_hz,
                                      seed=np.random.SeedSequence([cfg.seed, i, len(cfg.eps_values)])))
        ref = len(tables) - 1
    return tables, ideal, ref


def _reconstruct(table: CountsTable, cfg: ExperimentConfig, context: str) -> np.ndarray:
    res = reconstruct(table, cfg.method)
    if not res.converged:
        raise ReconstructionError(f"{context}: {cfg.method} reconstruction did not converge")
    return res.rho_hat


def _simulated_rows(cfg: ExperimentConfig, i: int) -> list[SweepRow]:
    mu = cfg.mu_values[i]
    tables, ideal, ref = _tables_for_mu(cfg, i, mu)
    rhos = [_reconstruct(t, cfg, f"mu={mu}, eps={cfg.eps_values[j] if j < len(cfg.eps_values) else 0.0}")
            for j, t in enumerate(tables)]
    irr = irrealism(werner_state(mu), cfg.basis, cfg.subsystem)

    def all_estimates(*states):
        out = {}
        for j, eps in enumerate(cfg.eps_values):
            for m, v in _estimates(states[ref], states[j], eps, cfg).items():
                out[f"{j}/{m}"] = v
        return out

    try:
        point = all_estimates(*rhos)
        errs = dict.fromkeys(point, 0.0)
        if cfg.n_bootstrap:
            boot = bootstrap_errorbars(tables, cfg.n_bootstrap, cfg.seed, all_estimates, cfg.method,
                                       stream=(i, 1_000_000))
            errs = boot.std
            if boot.unconverged:
                log.warning("mu=%g: %d bootstrap reconstructions hit the iteration cap", mu, boot.unconverged)
    except ConvergenceError as exc:
        raise ConvergenceError(f"mu={mu}: {exc}") from None
    rows = []
    for j, eps in enumerate(cfg.eps_values):
        fid = fidelity(rhos[j], ideal[j])
        closed = werner_delta_realism_closed_form(mu, eps)
        for m in METHODS:
            key = f"{j}/{m}"
            rows.append(SweepRow(mu, eps, m, point[key], errs[key], eps * irr, closed, fid))
    return rows


def _cell_rows(args) -> list[SweepRow]:
    cfg, i = args
    if cfg.mode == "ideal":
        return _ideal_rows(cfg, cfg.mu_values[i])
    return _simulated_rows(cfg, i)


def run_sweep(cfg: ExperimentConfig) -> Dataset:
    """One row per (mu, eps, method), sorted by mu, eps and then method."""
    work = [(cfg, i) for i in range(len(cfg.mu_values))]
    if cfg.workers > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_cell_rows, work))
    else:
        chunks = [_cell_rows(w) for w in work]
    rows = sorted((r for chunk in chunks for r in chunk), key=_sort_key)
    return Dataset(rows, cfg.mode, "sweep")


def fidelity_table(cfg: ExperimentConfig) -> Dataset:
    """Fidelity of each reconstructed state against the ideal monitored state and against |phi->.

    In ideal mode the reconstruction uses noise-free expected counts.
    """
    bell = bell_state()
    rows = []
    for i, mu in enumerate(cfg.mu_values):
        if cfg.mode == "ideal":
            rho0 = prepare_state(mu, cfg.total_s, cfg.granularity)
            tables = [expected_counts(monitor_state(rho0, eps, cfg), exposure=cfg.exposure_s, rate=cfg.rate_hz)
                      for eps in cfg.eps_values]
            ideal = [monitoring(werner_state(mu), cfg.basis, eps, cfg.subsystem) for eps in cfg.eps_values]
        else:
            tables, ideal, _ = _tables_for_mu(cfg, i, mu)
        for j, eps in enumerate(cfg.eps_values):
            rho = _reconstruct(tables[j], cfg, f"mu={mu}, eps={eps}")
            rows.append(FidelityRow(mu, eps, fidelity(rho, ideal[j]), fidelity(rho, bell)))
    return Dataset(rows, cfg.mode, "fidelity")


@dataclass
class BoundCheck:
    mu: float
    eps: float
    method: str
    slack: float
    err: float


@dataclass
class BoundsReport:
    mode: str
    checks: list[BoundCheck]
    violations: list[BoundCheck] = field(default_factory=list)
    closed_form_mismatches: list[SweepRow] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """False only for ideal-mode failures; simulated violations are warnings."""
        if self.mode != "ideal":
            return True
        return not self.violations and not self.closed_form_mismatches


def verify_bounds(dataset: Dataset, mode: str | None = None) -> BoundsReport:
    """Slack ``value - eps * irrealism`` per row.

    Ideal data fails on slack below ``-1e-9`` or on a value more than
    ``1e-9`` from the closed form; simulated rows below the same tolerance
    are listed together with their error bars but do not fail.
    """
    mode = mode or dataset.mode
    checks, violations, mismatches = [], [], []
    for row in dataset.rows:
        c = BoundCheck(row.mu, row.eps, row.method, row.value - row.bound, row.err)
        checks.append(c)
        if mode == "ideal":
            if c.slack < -IDEAL_ATOL:
                violations.append(c)
            if abs(row.value - row.closed_form) > IDEAL_ATOL:
                mismatches.append(row)
        elif c.slack < -IDEAL_ATOL:
            violations.append(c)
            log.warning("mu=%g eps=%g %s: value below bound by %.3g (error bar %.3g)",
                        c.mu, c.eps, c.method, -c.slack, c.err)
    return BoundsReport(mode, checks, violations, mismatches)


# Serialization ------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def emit(dataset: Dataset, fmt: str, path: str | Path) -> Path:
    """Write ``dataset`` as CSV (12 significant digits) or JSON (exact floats)."""
    path = Path(path)
    names = [f.name for f in fields(dataset.row_type)]
    try:
        if fmt == "csv":
            with path.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(names)
                for row in dataset.rows:
                    w.writerow([_fmt(getattr(row, n)) for n in names])
        elif fmt == "json":
            obj = {"kind": dataset.kind, "mode": dataset.mode, "rows": [asdict(r) for r in dataset.rows]}
            path.write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")
        else:
            raise ValueError(f"unknown format {fmt!r}; use csv or json")
    except OSError as exc:
        raise OSError(f"cannot write dataset {path}: {exc}") from exc
    return path


def load_dataset(path: str | Path, mode: str | None = None) -> Dataset:
    """Read a dataset written by :func:`emit`.

    CSV files carry no mode; unless given, it is inferred as ideal when every
    error bar is zero.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        obj = json.loads(text)
        kind = obj.get("kind", "sweep")
        row_type = SweepRow if kind == "sweep" else FidelityRow
        rows = [row_type(**r) for r in obj["rows"]]
        return Dataset(rows, mode or obj.get("mode", "ideal"), kind)
    reader = csv.DictReader(text.splitlines())
    header = reader.fieldnames or []
    kind = "sweep" if "method" in header else "fidelity"
    row_type = SweepRow if kind == "sweep" else FidelityRow
    rows = []
    for raw in reader:
        try:
            rows.append(row_type(**{f.name: (raw[f.name] if f.type == "str" else float(raw[f.name]))
                                    for f in fields(row_type)}))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: bad dataset row {raw}: {exc}") from None
    if mode is None:
        mode = "ideal" if kind != "sweep" or all(r.err == 0 for r in rows) else "simulated-tomography"
    return Dataset(rows, mode, kind)
