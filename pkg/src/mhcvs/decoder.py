"""Sequence decoding: SPL-lite reference frames, multi-hypothesis non-reference
frames, optional residual refinement."""

from __future__ import annotations

import enum
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mhcvs.encoder import EncodedFrame, FrameRole, GopLayout
from mhcvs.hypotheses import DisplacementSet, build_hypotheses, displacement_set
from mhcvs.solvers import (
    SolverConfig,
    SplConfig,
    mh_st_solve,
    mh_tikhonov_solve,
    spl_lite_recover,
)
from mhcvs.tensor import DctBasis, Frame, MeasurementMatrix, blocks_to_frame, dct_basis


class Solver(str, enum.Enum):
    MH_ST = "mh-st"
    MH_TIKHONOV = "mh-tikhonov"


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class DecodeConfig:
    """Decoder settings.

    ``residual_refinement`` belongs to MH-ST. The MH-Tikhonov baseline is run
    as a plain prediction unless ``refine_baseline`` is also set.
    ``tikhonov_lambda`` defaults to ``solver_config.lambda1``.
    """

    solver: Solver = Solver.MH_ST
    solver_config: SolverConfig = SolverConfig()
    p: int = 20
    residual_refinement: bool = True
    refine_baseline: bool = False
    tikhonov_lambda: float | None = None
    spl: SplConfig = SplConfig()
    displacements: DisplacementSet | None = None
    threads: int | None = None

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        object.__setattr__(self, "solver", Solver(self.solver))

    def displacement_set(self) -> DisplacementSet:
        if self.displacements is not None:
            if self.displacements.p != self.p:
                raise ValueError(f"displacement set has {self.displacements.p} offsets, p={self.p}")
            return self.displacements
        return displacement_set(self.p)

    def refines(self) -> bool:
        if self.solver is Solver.MH_ST:
            return self.residual_refinement
        return self.residual_refinement and self.refine_baseline

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("CVS_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1


@dataclass
class FrameMetrics:
    index: int
    role: FrameRole
    decode_time: float
    psnr: float | None = None
    cost_traces: list = field(default_factory=list, repr=False)


@dataclass
class DecodedSequence:
    frames: list[Frame]
    per_frame_metrics: list[FrameMetrics]


def decode_reference(enc: EncodedFrame, phi: MeasurementMatrix, dct: DctBasis, spl: SplConfig = SplConfig(),
                     tau_schedule=None) -> Frame:
    if enc.role is not FrameRole.REFERENCE:
        raise LayoutError("decode_reference needs a reference frame")
    cols = spl_lite_recover(enc.block_measurements.T, phi, dct, spl, tau_schedule=tau_schedule)
    return Frame(blocks_to_frame(cols, enc.height, enc.width, enc.block_size))


def residual_refine(y, phi: MeasurementMatrix, x_tilde, dct: DctBasis, spl: SplConfig = SplConfig(),
                    tau_schedule=None) -> np.ndarray:
    """x_tilde plus the SPL-lite recovery of the measurement residual y - Phi x_tilde."""
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    y_r = np.asarray(y, dtype=np.float64) - phi.entries @ x_tilde
    if not np.any(y_r):
        return x_tilde.copy()
    return x_tilde + spl_lite_recover(y_r, phi, dct, spl, tau_schedule=tau_schedule, clamp=False)


def _solve_block(origin, y, references, disp, phi, dct, cfg: DecodeConfig):
    hyp = build_hypotheses(origin, references, disp, phi, dct, y)
    if cfg.solver is Solver.MH_ST:
        res = mh_st_solve(y, hyp, cfg.solver_config)
        return res.x_block, res.cost_trace
    lam = cfg.solver_config.lambda1 if cfg.tikhonov_lambda is None else cfg.tikhonov_lambda
    return mh_tikhonov_solve(y, hyp, lam), None


def decode_non_reference(
    enc: EncodedFrame,
    references: list[Frame],
    cfg: DecodeConfig,
    phi: MeasurementMatrix,
    dct: DctBasis,
    traces: list | None = None,
) -> Frame:
    if enc.role is not FrameRole.NON_REFERENCE:
        raise LayoutError("decode_non_reference needs a non-reference frame")
    L = enc.block_size
    refs = [Frame(np.clip(r.luma, 0.0, 255.0)) for r in references]
    disp = cfg.displacement_set()
    origins = [(r, c) for r in range(0, enc.height, L) for c in range(0, enc.width, L)]
    Y = enc.block_measurements

    def work(i):
        return _solve_block(origins[i], Y[i], refs, disp, phi, dct, cfg)

    workers = min(cfg.worker_count(), len(origins))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(work, range(len(origins))))
    else:
        results = [work(i) for i in range(len(origins))]

    first = np.column_stack([r[0] for r in results])
    if traces is not None:
        traces.extend(r[1] for r in results if r[1] is not None)
    if cfg.refines():
        y_r = Y.T - phi.entries @ first
        first = first + spl_lite_recover(y_r, phi, dct, cfg.spl, clamp=False)
    return Frame(np.clip(blocks_to_frame(first, enc.height, enc.width, L), 0.0, 255.0))


def decode_sequence(stream: list[EncodedFrame], layout: GopLayout, cfg: DecodeConfig = DecodeConfig(),
                    originals: list[Frame] | None = None) -> DecodedSequence:
    """Decode every group: both endpoint references first, then the interior frames.

    With ``originals`` supplied, each frame's PSNR is recorded in the metrics.
    """
    from mhcvs.bench.metrics import psnr

    if len(stream) != layout.frame_count:
        raise LayoutError(f"stream has {len(stream)} frames, layout expects {layout.frame_count}")
    for i, (enc, role) in enumerate(zip(stream, layout.frame_roles)):
        if enc.role is not role:
            raise LayoutError(f"frame {i} is {enc.role.name} in the stream but {role.name} in the layout")
    if originals is not None and len(originals) != len(stream):
        raise LayoutError("originals and stream differ in length")

    frames: list[Frame | None] = [None] * len(stream)
    metrics: list[FrameMetrics | None] = [None] * len(stream)
    phis: dict = {}

    def phi_of(enc):
        key = (enc.seed, enc.m, enc.n)
        if key not in phis:
            phis[key] = enc.phi()
        return phis[key]

    for group in layout.groups():
        for i in (group[0], group[-1]):
            enc = stream[i]
            t0 = time.perf_counter()
            frames[i] = decode_reference(enc, phi_of(enc), dct_basis(enc.block_size), cfg.spl)
            metrics[i] = FrameMetrics(i, enc.role, time.perf_counter() - t0)
        refs = [frames[group[0]], frames[group[-1]]]
        for i in group[1:-1]:
            enc = stream[i]
            traces: list = []
            t0 = time.perf_counter()
            frames[i] = decode_non_reference(enc, refs, cfg, phi_of(enc), dct_basis(enc.block_size), traces)
            metrics[i] = FrameMetrics(i, enc.role, time.perf_counter() - t0, cost_traces=traces)
    if originals is not None:
        for i, m in enumerate(metrics):
            m.psnr = psnr(originals[i], frames[i])
    return DecodedSequence(frames, metrics)
