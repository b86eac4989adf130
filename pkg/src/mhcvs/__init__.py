"""Multi-hypothesis compressed video sensing: block CS encoder, MH-ST / MH-Tikhonov
decoders and a PSNR benchmark harness."""

from mhcvs.tensor import (
    DctBasis,
    Frame,
    MeasurementMatrix,
    assemble_block,
    dct2_forward,
    dct2_inverse,
    gaussian_matrix,
    solve_spd,
    vectorize_block,
)
from mhcvs.encoder import (
    EncodedFrame,
    FrameRole,
    GopLayout,
    encode_sequence,
    plan_gops,
    sample_block,
)
from mhcvs.hypotheses import (
    DisplacementSet,
    HypothesisSet,
    build_hypotheses,
    displacement_set,
    tikhonov_weights,
)
from mhcvs.solvers import (
    SolverConfig,
    SplConfig,
    mh_st_solve,
    mh_tikhonov_solve,
    soft_threshold,
    spl_lite_recover,
)
from mhcvs.decoder import DecodeConfig, DecodedSequence, Solver, decode_sequence

__version__ = "0.1.0"
