"""Monte Carlo runner: configuration, per-trial evaluation, sweeps and CSV output.

Each trial draws its randomness from ``SeedSequence([master_seed, trial])``
only, so trials can run in any order or in parallel and the aggregated
table is byte-identical.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
import csv
import json
import os
import warnings
from typing import List, Optional, Sequence, Union

import numpy as np

from . import hardware as hw
from .channel import generate_channel
from .hardware import HardwareProfile
from .linkrate import achievable_rate
from .precoding import (
    DIGITAL, FULLY_CONNECTED, PARTIALLY_CONNECTED, ConvergenceWarning,
    digital_precoder, hpf_analog, hpp_analog, hybrid_precoder,
)
from .quantization import design_quantizer

ARCHITECTURES = {
    "digital": (DIGITAL, None),
    "hpf_active": (FULLY_CONNECTED, hw.ACTIVE),
    "hpf_passive": (FULLY_CONNECTED, hw.PASSIVE),
    "hpp_active": (PARTIALLY_CONNECTED, hw.ACTIVE),
    "hpp_passive": (PARTIALLY_CONNECTED, hw.PASSIVE),
}
ARCH_LABEL = {DIGITAL: "digital", FULLY_CONNECTED: "hpf", PARTIALLY_CONNECTED: "hpp"}

CSV_COLUMNS = (
    "arch", "ps_type", "n_t", "n_r", "l_t", "n_s", "b_dac", "b_ps", "snr_db",
    "rate_mean", "rate_std", "loss_db", "p_static_w", "p_comp_w", "ee_mean",
)

IntOrList = Union[int, List[int]]


@dataclass
class SimConfig:
    n_t: IntOrList = 64
    n_r: IntOrList = 4
    l_t: Optional[IntOrList] = None  # defaults to n_s
    n_s: IntOrList = 4
    num_paths: int = 5
    p_max: float = 1.0
    snr_grid_db: List[float] = field(default_factory=lambda: [0.0])
    bits_dac: List[int] = field(default_factory=lambda: [3])
    bits_ps: int = 5
    sample_rate: float = 1e9
    architectures: List[str] = field(default_factory=lambda: list(ARCHITECTURES))
    lossless_rf: bool = False
    trials: int = 1000
    master_seed: int = 0
    tol: float = 1e-6
    hardware: HardwareProfile = field(default_factory=HardwareProfile)
    name: str = "sweep"

    def __post_init__(self):
        if isinstance(self.hardware, dict):
            self.hardware = HardwareProfile.from_dict(self.hardware)
        self.snr_grid_db = [float(x) for x in np.atleast_1d(self.snr_grid_db)]
        self.bits_dac = [int(b) for b in np.atleast_1d(self.bits_dac)]
        self.validate()

    def dimension_sets(self):
        """``(n_t, n_r, l_t, n_s)`` tuples, lists broadcast against scalars."""
        cols = [self.n_t, self.n_r, self.n_s if self.l_t is None else self.l_t, self.n_s]
        lengths = {len(c) for c in cols if isinstance(c, (list, tuple))}
        if len(lengths) > 1:
            raise ValueError("dimension lists must have equal length")
        n = lengths.pop() if lengths else 1
        cols = [list(c) if isinstance(c, (list, tuple)) else [c] * n for c in cols]
        return [tuple(int(x) for x in row) for row in zip(*cols)]

    def validate(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")
        if self.p_max <= 0 or self.sample_rate <= 0 or self.tol <= 0:
            raise ValueError("p_max, sample_rate and tol must be positive")
        unknown = [a for a in self.architectures if a not in ARCHITECTURES]
        if unknown:
            raise ValueError(f"unknown architectures: {unknown}")
        if not self.architectures:
            raise ValueError("no architectures selected")
        if any(not 1 <= b <= 16 for b in self.bits_dac):
            raise ValueError("bits_dac entries must lie in [1, 16]")
        if self.bits_ps < 1:
            raise ValueError("bits_ps must be >= 1")
        for n_t, n_r, l_t, n_s in self.dimension_sets():
            if min(n_t, n_r, l_t, n_s) < 1:
                raise ValueError("dimensions must be >= 1")
            if not n_s <= l_t <= n_t:
                raise ValueError(f"need n_s <= l_t <= n_t, got n_s={n_s}, l_t={l_t}, n_t={n_t}")

    def to_dict(self):
        d = asdict(self)
        d["hardware"] = self.hardware.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrialRecord:
    arch: str
    ps_type: str
    n_t: int
    n_r: int
    l_t: int
    n_s: int
    b_dac: int
    snr_db: float
    rate: float
    iterations: int
    loss_db: float
    p_static: float
    p_comp: float
    ee: float
    converged: bool


@dataclass
class TrialResult:
    trial_index: int
    records: List[TrialRecord]


@dataclass
class SweepTable:
    rows: List[dict]
    b_ps: int
    trials: int = 0

    def __len__(self):
        return len(self.rows)


def trial_seed(master_seed, trial_index):
    return np.random.SeedSequence([int(master_seed), int(trial_index)])


def _rf_loss(config, topology, ps_type, n_t, l_t):
    if config.lossless_rf:
        return 1.0
    return hw.loss_factor(topology, ps_type, n_t, l_t, config.hardware)


def run_trial(config, trial_index):
    """Evaluate every architecture, SNR and DAC resolution on one channel draw."""
    records = []
    ss = trial_seed(config.master_seed, trial_index)
    wanted = [ARCHITECTURES[a] for a in config.architectures]
    topologies = {t for t, _ in wanted}
    for dims, child in zip(config.dimension_sets(), ss.spawn(len(config.dimension_sets()))):
        n_t, n_r, l_t, n_s = dims
        ch_seed, pm_seed = child.spawn(2)
        h = generate_channel(n_t, n_r, config.num_paths, np.random.default_rng(ch_seed)).h
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            analog = {}
            if FULLY_CONNECTED in topologies:
                analog[FULLY_CONNECTED] = hpf_analog(h, l_t, config.bits_ps, config.tol)
            if PARTIALLY_CONNECTED in topologies:
                analog[PARTIALLY_CONNECTED] = hpp_analog(
                    h, l_t, config.bits_ps, config.tol, rng=np.random.default_rng(pm_seed))

        for snr_db in config.snr_grid_db:
            noise_var = config.p_max / 10 ** (snr_db / 10)
            designs = {}
            for topo in topologies:
                if topo == DIGITAL:
                    designs[topo] = digital_precoder(h, n_s, config.p_max, noise_var)
                else:
                    designs[topo] = hybrid_precoder(h, topo, l_t, n_s, config.p_max, noise_var,
                                                    analog=analog[topo])
            for b in config.bits_dac:
                rho = design_quantizer(b).rho
                for arch in config.architectures:
                    topo, ps_type = ARCHITECTURES[arch]
                    loss = _rf_loss(config, topo, ps_type, n_t, l_t)
                    prec = replace(designs[topo], loss_linear=loss)
                    rate = achievable_rate(h, prec, rho, noise_var, config.p_max).rate
                    flops = hw.flops_count(topo, n_t, n_r, l_t,
                                           iters_fpsn=prec.iterations, iters_ppsn=prec.iterations)
                    power = hw.p_static(topo, ps_type, n_t, l_t, b, config.sample_rate,
                                        config.p_max / loss, config.hardware, loss_linear=loss,
                                        p_comp=hw.p_comp(flops, config.hardware))
                    records.append(TrialRecord(
                        arch=ARCH_LABEL[topo], ps_type=ps_type or "none",
                        n_t=n_t, n_r=n_r, l_t=l_t, n_s=n_s, b_dac=b, snr_db=snr_db,
                        rate=rate, iterations=prec.iterations, loss_db=hw.linear_to_db(loss),
                        p_static=power.p_static, p_comp=power.p_comp,
                        ee=hw.energy_efficiency(rate, power.p_static), converged=prec.converged,
                    ))
    return TrialResult(trial_index, records)


def _run_chunk(args):
    config, indices = args
    return [run_trial(config, i) for i in indices]


def iter_trials(config, jobs=1):
    indices = list(range(config.trials))
    if jobs <= 1:
        return [run_trial(config, i) for i in indices]
    chunks = [indices[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = [r for part in pool.map(_run_chunk, [(config, c) for c in chunks]) for r in part]
    return sorted(results, key=lambda r: r.trial_index)


def aggregate(trials: Sequence[TrialResult], b_ps):
    """Collapse trial records into one row per grid point (trial-index order)."""
    trials = sorted(trials, key=lambda r: r.trial_index)
    groups = {}
    for tr in trials:
        for rec in tr.records:
            key = (rec.arch, rec.ps_type, rec.n_t, rec.n_r, rec.l_t, rec.n_s, rec.b_dac, rec.snr_db)
            groups.setdefault(key, []).append(rec)
    rows = []
    for key, recs in groups.items():
        rates = np.array([r.rate for r in recs])
        rows.append(dict(
            arch=key[0], ps_type=key[1], n_t=key[2], n_r=key[3], l_t=key[4], n_s=key[5],
            b_dac=key[6], b_ps=b_ps, snr_db=key[7],
            rate_mean=float(np.mean(rates)),
            rate_std=float(np.std(rates, ddof=1)) if rates.size > 1 else 0.0,
            loss_db=float(np.mean([r.loss_db for r in recs])),
            p_static_w=float(np.mean([r.p_static for r in recs])),
            p_comp_w=float(np.mean([r.p_comp for r in recs])),
            ee_mean=float(np.mean([r.ee for r in recs])),
            iterations_mean=float(np.mean([r.iterations for r in recs])),
            nonconverged=int(sum(not r.converged for r in recs)),
        ))
    return SweepTable(rows, b_ps, len(trials))


def run_sweep(config, jobs=1):
    return aggregate(iter_trials(config, jobs), config.bits_ps)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0:
        return "0"
    return f"{value:.6g}"


def emit_csv(table, path):
    """Write the sweep table with the fixed column set, 6 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in table.rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ints = {"n_t", "n_r", "l_t", "n_s", "b_dac", "b_ps"}
    strs = {"arch", "ps_type"}
    return [{k: (v if k in strs else int(v) if k in ints else float(v)) for k, v in r.items()} for r in rows]


# -- presets ----------------------------------------------------------------

SNR_SWEEP_DB = [float(x) for x in range(-40, 41, 5)]
SCALING_DIMS = [(32, 2), (64, 4), (128, 8), (256, 16), (512, 32)]
HYBRIDS = ["hpf_active", "hpf_passive", "hpp_active", "hpp_passive"]


def preset(name, trials=1000, master_seed=0):
    """Parameter grids behind the eight reference figures."""
    base = dict(n_t=64, n_r=4, n_s=4, trials=trials, master_seed=master_seed, name=name)
    scaling = dict(n_t=[d[0] for d in SCALING_DIMS], n_s=[d[1] for d in SCALING_DIMS])
    table = {
        "fig1": dict(base, architectures=["digital"], bits_dac=[1, 8], snr_grid_db=SNR_SWEEP_DB),
        "fig2": dict(base, architectures=["digital"] + HYBRIDS, bits_dac=[1, 8],
                     snr_grid_db=SNR_SWEEP_DB, lossless_rf=True),
        "fig3": dict(base, architectures=HYBRIDS, bits_dac=[1, 8], snr_grid_db=SNR_SWEEP_DB),
        "fig4": dict(base, **scaling, n_r=4, architectures=list(ARCHITECTURES),
                     bits_dac=[1, 3, 5, 7], snr_grid_db=[0.0]),
        "fig5": dict(base, architectures=list(ARCHITECTURES), bits_dac=list(range(1, 9)), snr_grid_db=[0.0]),
        "fig6": dict(base, architectures=list(ARCHITECTURES), bits_dac=list(range(1, 9)), snr_grid_db=[-15.0]),
        "fig7": dict(base, **scaling, architectures=list(ARCHITECTURES), bits_dac=[3], snr_grid_db=[0.0]),
        "fig8": dict(base, **scaling, architectures=list(ARCHITECTURES), bits_dac=[3], snr_grid_db=[-15.0]),
    }
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
    cfg = table[name]
    if name in ("fig7", "fig8"):
        cfg["n_r"] = list(cfg["n_s"])
    return SimConfig(**cfg)


PRESET_NAMES = tuple(f"fig{i}" for i in range(1, 9))


def write_outputs(config, table, out_dir, extra=None):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{config.name}.csv")
    emit_csv(table, csv_path)
    manifest = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "trials": config.trials,
        "csv": os.path.basename(csv_path),
        "rows": len(table),
        "nonconverged_designs": sum(r["nonconverged"] for r in table.rows),
        "mean_iterations": {
            f"{r['arch']}/n_t={r['n_t']}": r["iterations_mean"]
            for r in table.rows if r["arch"] != "digital"
        },
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(out_dir, "run-manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path


def nominal_power_table(config, iters_fpsn=37, iters_ppsn=11):
    """Power breakdown per architecture without Monte Carlo.

    Iteration counts for the computational power default to typical
    averages of the two analog design loops.
    """
    out = []
    for n_t, n_r, l_t, n_s in config.dimension_sets():
        for b in config.bits_dac:
            for arch in config.architectures:
                topo, ps_type = ARCHITECTURES[arch]
                loss = _rf_loss(config, topo, ps_type, n_t, l_t)
                flops = hw.flops_count(topo, n_t, n_r, l_t, iters_fpsn=iters_fpsn, iters_ppsn=iters_ppsn)
                pb = hw.p_static(topo, ps_type, n_t, l_t, b, config.sample_rate, config.p_max / loss,
                                 config.hardware, loss_linear=loss, p_comp=hw.p_comp(flops, config.hardware))
                out.append(dict(arch=arch, n_t=n_t, n_r=n_r, l_t=l_t, b_dac=b, flops=flops, **asdict(pb)))
    return out
