"""Configuration-driven runs of the adiabatic and quench protocols.

All time axes are normalized by the adiabatic total time ``T_ad``; the
quench protocol is run for the same total time, so ``tau = 1`` is where the
adiabatic run ends.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adiabatic import AdiabaticMargin, AdiabaticSpec, check_local_adiabatic, h_adiabatic_batch, s_qab
from .errors import ProtocolInfeasibleError, RejectedInputError
from .invariant import InvariantParams, exchange_hamiltonian, f_modulation, g_dynamic, h_invariant
from .propagator import METHODS, Schedule, Trajectory, invariant_schedule, propagate
from .quantum_core import basis_state, bell_phi_plus, projector, pure_trace_distance
from .work import WorkDistribution, average_power, average_work, dephased_work, tpm_distribution

log = logging.getLogger(__name__)

SWITCH_OFF_CONVENTIONS = ("pre_switch", "post_switch")
FLOAT_FORMAT = "{:.16e}"


@dataclass
class ScenarioConfig:
    epsilon: float = np.pi / 2 * 1e-2
    omega: float = 1.0
    J: float = 1.0
    delta_sq: float = 1e-5
    gamma: float = 1.0
    n_list: list[int] = field(default_factory=lambda: [1, 3, 5, 7])
    steps: int = 20000
    tau_f_threshold: float = 1e-2
    switch_off_convention: str = "pre_switch"
    output_dir: Path = Path("results")
    substeps: int = 16
    method: str = "midpoint"
    jobs: int = 1

    def __post_init__(self):
        self.n_list = [int(n) for n in self.n_list]
        self.output_dir = Path(self.output_dir)
        for name in ("epsilon", "omega", "J", "delta_sq", "gamma"):
            if not getattr(self, name) > 0:
                raise RejectedInputError(f"{name} must be positive")
        if not self.epsilon < 1:
            raise RejectedInputError("epsilon must be below 1")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise RejectedInputError("n_list must be a nonempty list of positive integers")
        if not 0 < self.tau_f_threshold < 0.5:
            raise RejectedInputError("tau_f_threshold must lie in (0, 0.5)")
        if self.steps < 10 or self.substeps < 1 or self.jobs < 1:
            raise RejectedInputError("steps >= 10, substeps >= 1 and jobs >= 1 are required")
        if self.switch_off_convention not in SWITCH_OFF_CONVENTIONS:
            raise RejectedInputError(f"switch_off_convention must be one of {SWITCH_OFF_CONVENTIONS}")
        if self.method not in METHODS:
            raise RejectedInputError(f"method must be one of {METHODS}")

    @property
    def total_time(self) -> float:
        return np.pi / (2.0 * self.epsilon * self.omega)

    def adiabatic_spec(self) -> AdiabaticSpec:
        return AdiabaticSpec(self.omega, self.epsilon, basis_state(0), bell_phi_plus())

    def invariant_params(self, n: int) -> InvariantParams:
        return InvariantParams.from_delta_sq(self.gamma, self.delta_sq, n, self.J, self.total_time)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def echo(self) -> list[tuple[str, str]]:
        """Key/value pairs recorded in output headers (``output_dir`` excluded)."""
        out = []
        for f in dataclasses.fields(self):
            if f.name in ("output_dir", "jobs"):
                continue
            value = getattr(self, f.name)
            if isinstance(value, list):
                value = ", ".join(str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            out.append((f.name, str(value)))
        return out


def _parse_value(name: str, raw: str, current):
    raw = raw.strip()
    if name == "n_list":
        return [int(tok) for tok in raw.replace(",", " ").split()]
    if name == "output_dir":
        return Path(raw)
    if isinstance(current, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def load_config(path) -> ScenarioConfig:
    """Read a flat ``key = value`` file; unknown keys are errors, ``#`` starts a comment."""
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    parser.optionxform = str
    text = Path(path).read_text()
    parser.read_string("[scenario]\n" + text, source=str(path))
    defaults = ScenarioConfig()
    known = {f.name for f in dataclasses.fields(ScenarioConfig)}
    values = {}
    for key, raw in parser["scenario"].items():
        if key not in known:
            raise RejectedInputError(f"unknown config key {key!r} in {path}")
        try:
            values[key] = _parse_value(key, raw, getattr(defaults, key))
        except ValueError as exc:
            raise RejectedInputError(f"bad value for {key!r}: {raw!r}") from exc
    return ScenarioConfig(**values)


# -- runs ----------------------------------------------------------------------------


def find_tau_f(distances, threshold: float, taus=None) -> float | None:
    """First tau with ``distance <= threshold``, linearly interpolated.

    Returns ``None`` if the threshold is never reached.
    """
    d = np.asarray(distances, dtype=float)
    taus = np.linspace(0.0, 1.0, d.size) if taus is None else np.asarray(taus, dtype=float)
    hits = np.flatnonzero(d <= threshold)
    if hits.size == 0:
        return None
    i = int(hits[0])
    if i == 0:
        return float(taus[0])
    d0, d1 = d[i - 1], d[i]
    return float(taus[i - 1] + (taus[i] - taus[i - 1]) * (d0 - threshold) / (d0 - d1))


@dataclass
class WorkRecord:
    distribution: WorkDistribution
    avg_work: float
    identity_work: float
    delta_t: float
    avg_power: float
    end_index: int


@dataclass
class NonadiabaticRun:
    n: int
    params: InvariantParams
    trajectory: Trajectory
    tau_f: float | None
    work: WorkRecord

    @property
    def final_delta(self) -> float:
        return float(self.trajectory.distances[-1])

    @property
    def converged(self) -> bool:
        return self.tau_f is not None


@dataclass
class AdiabaticRun:
    spec: AdiabaticSpec
    trajectory: Trajectory
    tau_f: float | None
    work: WorkRecord
    margin: AdiabaticMargin | None = None

    @property
    def final_delta(self) -> float:
        return float(self.trajectory.distances[-1])


def _work_record(h_initial, h_final, traj: Trajectory, index: int, delta_t: float) -> WorkRecord:
    rho0 = projector(traj.states[0])
    u = traj.unitaries[index]
    dist = tpm_distribution(h_initial, h_final, u, rho0)
    w = average_work(dist)
    return WorkRecord(dist, w, dephased_work(h_initial, h_final, u, rho0), delta_t, average_power(w, delta_t), index)


def check_feasible(p: InvariantParams, samples: int) -> None:
    taus = np.linspace(0.0, 1.0, samples + 1)
    try:
        g_dynamic(taus, p)
        f_modulation(taus, p)
    except ProtocolInfeasibleError as exc:
        raise ProtocolInfeasibleError(
            f"n={p.n}: {exc} (advice: increase T or decrease n)", tau=exc.tau
        ) from exc


def run_nonadiabatic(config: ScenarioConfig, n: int) -> NonadiabaticRun:
    """Quench protocol from ``|00>`` toward the Bell state over ``T = T_ad``.

    The work window ends at the first grid point where the trace distance is
    within the threshold; if it is never reached the whole run is used.
    """
    p = config.invariant_params(n)
    check_feasible(p, config.steps * config.substeps)
    traj = propagate(invariant_schedule(p, config.steps), basis_state(0), config.method, config.substeps)
    traj.field_values = f_modulation(traj.taus, p)
    traj.distances = pure_trace_distance(traj.states, bell_phi_plus())
    tau_f = find_tau_f(traj.distances, config.tau_f_threshold, traj.taus)
    index = traj.index_at(tau_f) if tau_f is not None else len(traj.taus) - 1
    if config.switch_off_convention == "pre_switch":
        h_final = h_invariant(traj.taus[index], p)
    else:
        h_final = exchange_hamiltonian(p)
    window = tau_f if tau_f is not None else float(traj.taus[index])
    work = _work_record(h_invariant(0.0, p), h_final, traj, index, p.T * window)
    log.info("n=%d tau_f=%s <W>=%.6g", n, tau_f, work.avg_work)
    return NonadiabaticRun(n, p, traj, tau_f, work)


def windowed_work(run: NonadiabaticRun, tau_start: float, tau_end: float) -> WorkRecord:
    """TPM work over the grid window ``[tau_start, tau_end]`` of a quench run.

    Both measurements use ``H_I`` at the window ends; the first is applied to
    the propagated state at ``tau_start``.
    """
    traj = run.trajectory
    if not 0.0 <= tau_start < tau_end <= 1.0:
        raise RejectedInputError("window must satisfy 0 <= tau_start < tau_end <= 1")
    i, j = traj.index_at(tau_start), traj.index_at(tau_end)
    if j <= i:
        raise RejectedInputError("window is narrower than one grid step")
    u = traj.unitaries[j] @ traj.unitaries[i].conj().T
    h_i, h_f = h_invariant(traj.taus[i], run.params), h_invariant(traj.taus[j], run.params)
    rho = projector(traj.states[i])
    dist = tpm_distribution(h_i, h_f, u, rho)
    w = average_work(dist)
    delta_t = run.params.T * float(traj.taus[j] - traj.taus[i])
    return WorkRecord(dist, w, dephased_work(h_i, h_f, u, rho), delta_t, average_power(w, delta_t), j)


def adiabatic_schedule(spec: AdiabaticSpec, steps: int) -> Schedule:
    return Schedule(lambda taus: h_adiabatic_batch(s_qab(taus, spec.alpha0_abs), spec), spec.total_time, steps)


def run_adiabatic(config: ScenarioConfig, margin_points: int | None = 1001) -> AdiabaticRun:
    """Brachistochrone run from ``|00>`` over the full ``T_ad``."""
    spec = config.adiabatic_spec()
    traj = propagate(adiabatic_schedule(spec, config.steps), spec.psi0, config.method, config.substeps)
    traj.field_values = s_qab(traj.taus, spec.alpha0_abs)
    traj.distances = pure_trace_distance(traj.states, spec.psif)
    tau_f = find_tau_f(traj.distances, config.tau_f_threshold, traj.taus)
    h0 = h_adiabatic_batch(np.array(0.0), spec)
    hf = h_adiabatic_batch(np.array(1.0), spec)
    work = _work_record(h0, hf, traj, len(traj.taus) - 1, spec.total_time)
    margin = None
    if margin_points:
        margin = check_local_adiabatic(spec, lambda t: s_qab(t, spec.alpha0_abs), margin_points)
    return AdiabaticRun(spec, traj, tau_f, work, margin)


@dataclass
class SweepResult:
    config: ScenarioConfig
    runs: list[NonadiabaticRun]
    adiabatic: AdiabaticRun
    files: dict[str, Path] = field(default_factory=dict)

    def records(self) -> list[dict]:
        rows = [
            {
                "n": run.n,
                "tau_f": run.tau_f,
                "avg_work": run.work.avg_work,
                "avg_power": run.work.avg_power,
                "final_delta": run.final_delta,
            }
            for run in self.runs
        ]
        return rows

    def adiabatic_record(self) -> dict:
        return {
            "T_ad": self.adiabatic.spec.total_time,
            "final_delta": self.adiabatic.final_delta,
            "avg_work": self.adiabatic.work.avg_work,
            "avg_power": self.adiabatic.work.avg_power,
            "tau_f": self.adiabatic.tau_f,
        }


# -- output ----------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FORMAT.format(float(x))


def _header(config: ScenarioConfig, extra: list[str] = ()) -> str:
    lines = [f"# {k} = {v}" for k, v in config.echo()]
    lines += [f"# {line}" for line in extra]
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: str, columns: list[str], rows) -> Path:
    buf = io.StringIO()
    buf.write(header)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def ensure_writable(directory: Path) -> Path:
    """Create ``directory`` and prove it is writable, before any computation."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fd, probe = tempfile.mkstemp(dir=directory, prefix=".probe-")
    os.close(fd)
    os.unlink(probe)
    return directory


def write_quench_profiles(path: Path, config: ScenarioConfig, runs) -> Path:
    def rows():
        for run in runs:
            f = run.trajectory.field_values
            for tau, value in zip(run.trajectory.taus, f):
                yield tau, run.n, value, 2.0 * np.pi * value

    extra = ["f_value in units of J; f_value_times_2pi is the angular-frequency reading"]
    return _write_csv(path, _header(config, extra), ["tau", "n", "f_value", "f_value_times_2pi"], rows())


def write_trace_distance(path: Path, config: ScenarioConfig, runs, adiabatic: AdiabaticRun | None) -> Path:
    def rows():
        if adiabatic is not None:
            for tau, d in zip(adiabatic.trajectory.taus, adiabatic.trajectory.distances):
                yield tau, "adiabatic", None, d
        for run in runs:
            for tau, d in zip(run.trajectory.taus, run.trajectory.distances):
                yield tau, "nonadiabatic", run.n, d

    extra = ["tau normalized by T_ad; delta = trace distance to the Bell target"]
    return _write_csv(path, _header(config, extra), ["tau", "protocol", "n", "delta"], rows())


def write_work_power(path: Path, config: ScenarioConfig, runs, adiabatic: AdiabaticRun | None) -> Path:
    rows = [(run.n, run.tau_f, run.work.avg_work, run.work.avg_power, run.final_delta) for run in runs]
    if adiabatic is not None:
        rows.append((None, 1.0, adiabatic.work.avg_work, adiabatic.work.avg_power, adiabatic.final_delta))
    extra = [
        f"tau_f_threshold = {config.tau_f_threshold!r} (trace distance)",
        "avg_power = avg_work / (T_ad * tau_f); empty tau_f = threshold never reached (whole run used)",
        "adiabatic row: tau_f is the protocol end, work window is the full run",
    ]
    return _write_csv(path, _header(config, extra), ["n", "tau_f", "avg_work", "avg_power", "final_delta"], rows)


def _run_many(config: ScenarioConfig) -> list[NonadiabaticRun]:
    if config.jobs == 1:
        return [run_nonadiabatic(config, n) for n in config.n_list]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(lambda n: run_nonadiabatic(config, n), config.n_list))


def run_full_sweep(config: ScenarioConfig, write: bool = True) -> SweepResult:
    """All quench runs plus the adiabatic baseline; writes the three CSV files."""
    out_dir = ensure_writable(config.output_dir) if write else None
    runs = _run_many(config)
    adiabatic = run_adiabatic(config)
    result = SweepResult(config, runs, adiabatic)
    if write:
        result.files = {
            "quench_profiles": write_quench_profiles(out_dir / "quench_profiles.csv", config, runs),
            "trace_distance": write_trace_distance(out_dir / "trace_distance.csv", config, runs, adiabatic),
            "work_power": write_work_power(out_dir / "work_power.csv", config, runs, adiabatic),
        }
    return result
