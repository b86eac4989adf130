"""Encode/decode sweeps over sampling rate, hypothesis count and solver."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from mhcvs import __version__
from mhcvs.bench.ingest import ingest
from mhcvs.bench.metrics import format_psnr, psnr
from mhcvs.decoder import DecodeConfig, Solver, decode_non_reference, decode_reference
from mhcvs.encoder import ConfigError, FrameRole, encode_sequence, plan_gops
from mhcvs.solvers import SolverConfig, SplConfig
from mhcvs.synthetic import SEQUENCES
from mhcvs.tensor import Frame, dct_basis

log = logging.getLogger(__name__)

METRIC_FIELDS = ["sequence", "solver", "rate", "p", "frame", "role", "psnr"]
TIMING_FIELDS = ["sequence", "solver", "rate", "p", "frame", "decode_time"]
AGGREGATE_FIELDS = ["sequence", "solver", "rate", "p", "mean_psnr", "frames"]


@dataclass
class RunSpec:
    input: str
    format: str = "y4m"
    rates: tuple[float, ...] = (0.1, 0.3, 0.5, 0.7, 0.9)
    p_values: tuple[int, ...] = (20, 400)
    solvers: tuple[Solver, ...] = (Solver.MH_ST, Solver.MH_TIKHONOV)
    frames: int | None = None
    seed: int = 1
    out_dir: str = "results"
    group_size: int = 9
    ref_rate: float = 0.7
    block_size: int = 16
    width: int | None = None
    height: int | None = None
    solver_config: SolverConfig = field(default_factory=SolverConfig)
    spl: SplConfig = field(default_factory=SplConfig)
    residual_refinement: bool = True
    only_frames: tuple[int, ...] | None = None
    name: str | None = None

    def __post_init__(self):
        if not self.rates or not self.p_values or not self.solvers:
            raise ConfigError("rates, p values and solvers must be non-empty")
        for r in (*self.rates, self.ref_rate):
            if not 0 < r <= 1:
                raise ConfigError(f"sampling rate {r} outside (0, 1]")
        if any(p < 1 for p in self.p_values):
            raise ConfigError("p values must be positive")
        self.solvers = tuple(Solver(s) for s in self.solvers)

    @property
    def sequence_name(self) -> str:
        return self.name or Path(self.input).stem


@dataclass
class MetricRow:
    sequence: str
    solver: str
    rate: float
    p: int
    frame: int
    psnr: float
    decode_time: float
    role: str = "non-reference"


def load_frames(spec: RunSpec) -> list[Frame]:
    if spec.format == "synthetic":
        if spec.input not in SEQUENCES:
            raise ConfigError(f"unknown synthetic sequence {spec.input!r}; choose from {sorted(SEQUENCES)}")
        count = spec.frames or spec.group_size
        return SEQUENCES[spec.input](frames=count, seed=spec.seed)
    return ingest(spec.input, spec.format, spec.block_size, spec.width, spec.height, spec.frames)


def _fmt_rate(rate: float) -> str:
    return repr(float(rate))


def run_sweep(spec: RunSpec, frames: list[Frame] | None = None) -> list[MetricRow]:
    """Run every (solver, rate, p) cell and write the CSV/plot files to ``spec.out_dir``.

    Files: ``metrics.csv`` (per-frame PSNR), ``timings.csv`` (per-frame decode
    seconds), ``aggregate.csv`` (mean non-reference PSNR per cell),
    ``plot_<solver>_p<p>.dat`` (rate, mean PSNR) and ``manifest.json``.
    """
    if frames is None:
        frames = load_frames(spec)
    usable = len(frames) - len(frames) % spec.group_size
    if usable == 0:
        raise ConfigError(f"{len(frames)} frames is fewer than one group of {spec.group_size}")
    if usable != len(frames):
        log.warning("dropping %d trailing frames outside a full group", len(frames) - usable)
        frames = frames[:usable]
    layout = plan_gops(len(frames), spec.group_size)
    L = spec.block_size
    dct = dct_basis(L)
    seq = spec.sequence_name

    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(spec, out / "manifest.json", len(frames))

    wanted = set(spec.only_frames) if spec.only_frames is not None else None
    rows: list[MetricRow] = []
    aggregates: dict[tuple[str, int], list[tuple[float, float]]] = {}
    with open(out / "metrics.csv", "w", newline="", encoding="utf-8") as mf, \
            open(out / "timings.csv", "w", newline="", encoding="utf-8") as tf, \
            open(out / "aggregate.csv", "w", newline="", encoding="utf-8") as af:
        mw, tw, aw = csv.writer(mf), csv.writer(tf), csv.writer(af)
        mw.writerow(METRIC_FIELDS)
        tw.writerow(TIMING_FIELDS)
        aw.writerow(AGGREGATE_FIELDS)
        for rate in spec.rates:
            stream = encode_sequence(frames, layout, spec.ref_rate, rate, L, spec.seed)
            # references do not depend on the solver, rate or p of the interior frames
            refs = {}
            for group in layout.groups():
                for i in (group[0], group[-1]):
                    enc = stream[i]
                    t0 = time.perf_counter()
                    refs[i] = decode_reference(enc, enc.phi(), dct, spec.spl)
                    refs[i, "t"] = time.perf_counter() - t0
            nonref_phi = next((e.phi() for e in stream if e.role is FrameRole.NON_REFERENCE), None)
            for solver in spec.solvers:
                for p in spec.p_values:
                    cfg = DecodeConfig(
                        solver=solver,
                        solver_config=spec.solver_config,
                        p=p,
                        residual_refinement=spec.residual_refinement,
                        spl=spec.spl,
                    )
                    cell = []
                    for group in layout.groups():
                        pair = [refs[group[0]], refs[group[-1]]]
                        for i in group:
                            if wanted is not None and i not in wanted:
                                continue
                            enc = stream[i]
                            if enc.role is FrameRole.REFERENCE:
                                decoded, dt = refs[i], refs[i, "t"]
                            else:
                                t0 = time.perf_counter()
                                decoded = decode_non_reference(enc, pair, cfg, nonref_phi, dct)
                                dt = time.perf_counter() - t0
                            row = MetricRow(seq, solver.value, rate, p, i, psnr(frames[i], decoded), dt,
                                            "reference" if enc.role is FrameRole.REFERENCE else "non-reference")
                            rows.append(row)
                            mw.writerow([seq, row.solver, _fmt_rate(rate), p, i, row.role, format_psnr(row.psnr)])
                            tw.writerow([seq, row.solver, _fmt_rate(rate), p, i, f"{dt:.6f}"])
                            if enc.role is FrameRole.NON_REFERENCE:
                                cell.append(row.psnr)
                    mean = float(np.mean(cell)) if cell else math.nan
                    aggregates.setdefault((solver.value, p), []).append((rate, mean))
                    aw.writerow([seq, solver.value, _fmt_rate(rate), p, format_psnr(mean), len(cell)])
                    for fh in (mf, tf, af):
                        fh.flush()
                    log.info("%s %s rate=%s p=%d mean PSNR %.2f dB", seq, solver.value, rate, p, mean)

    for (solver, p), pts in sorted(aggregates.items()):
        with open(out / f"plot_{solver}_p{p}.dat", "w", encoding="utf-8") as fh:
            fh.write(f"# {seq} {solver} p={p}: rate mean_psnr\n")
            for rate, mean in sorted(pts):
                fh.write(f"{_fmt_rate(rate)} {format_psnr(mean)}\n")
    return rows


def aggregate(rows: list[MetricRow]) -> dict[tuple[str, float, int], float]:
    """Mean non-reference PSNR per (solver, rate, p)."""
    cells: dict = {}
    for r in rows:
        if r.role == "non-reference":
            cells.setdefault((r.solver, r.rate, r.p), []).append(r.psnr)
    return {k: float(np.mean(v)) for k, v in cells.items()}


def write_manifest(spec: RunSpec, path: Path, frame_count: int) -> None:
    d = asdict(spec)
    d["solvers"] = [s.value for s in spec.solvers]
    d["frame_count"] = frame_count
    d["version"] = __version__
    d["rng"] = "numpy Philox4x64 keyed by SeedSequence([seed, m]); entries N(0, 1)"
    path.write_text(json.dumps(d, indent=2, sort_keys=True, default=list) + "\n", encoding="utf-8")
