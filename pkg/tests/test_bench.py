import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mhcvs.bench.ingest import ParseError, center_crop, ingest, parse_pgm, read_y4m, write_pgm
from mhcvs.bench.metrics import format_psnr, psnr, to_8bit
from mhcvs.bench.sweep import METRIC_FIELDS, RunSpec, aggregate, run_sweep
from mhcvs.cli import main
from mhcvs.decoder import Solver
from mhcvs.encoder import ConfigError, deserialize, encode_sequence, plan_gops, serialize
from mhcvs.synthetic import translating_sequence
from mhcvs.tensor import Frame


def naive_psnr(a, b):
    total = 0.0
    a8, b8 = to_8bit(a).tolist(), to_8bit(b).tolist()
    for ra, rb in zip(a8, b8):
        for pa, pb in zip(ra, rb):
            total += (pa - pb) ** 2
    mse = total / (len(a8) * len(a8[0]))
    return math.inf if mse == 0 else 10 * math.log10(255 ** 2 / mse)


# ---------------------------------------------------------------- metrics

def test_psnr_identical_is_inf():
    f = Frame(np.full((16, 16), 77.0))
    assert psnr(f, f) == math.inf
    assert format_psnr(psnr(f, f)) == "inf"


def test_psnr_constant_offset():
    a = Frame(np.full((32, 32), 100.0))
    b = Frame(np.full((32, 32), 116.0))
    assert psnr(a, b) == pytest.approx(20 * math.log10(255 / 16), abs=1e-9)
    assert psnr(a, b) == pytest.approx(24.048404, abs=1e-6)


def test_psnr_clamps_and_rounds():
    a = Frame(np.full((4, 4), 300.0))
    b = Frame(np.full((4, 4), 254.6))
    assert psnr(a, b) == math.inf


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (8, 8), elements=st.floats(-20, 280)), arrays(np.float64, (8, 8), elements=st.floats(-20, 280)))
def test_psnr_matches_naive_and_is_symmetric(a, b):
    assert psnr(a, b) == pytest.approx(naive_psnr(a, b), rel=1e-12)
    assert psnr(a, b) == psnr(b, a)


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((16, 16)), np.zeros((16, 32)))


# ---------------------------------------------------------------- ingest

def pgm_bytes(img, comment=False):
    head = b"P5\n# a comment\n" if comment else b"P5\n"
    return head + b"%d %d\n255\n" % (img.shape[1], img.shape[0]) + img.astype(np.uint8).tobytes()


def test_pgm_round_trip(tmp_path, rng):
    img = rng.integers(0, 256, (32, 48)).astype(np.float64)
    write_pgm(tmp_path / "a.pgm", img)
    back, end = parse_pgm((tmp_path / "a.pgm").read_bytes())
    assert np.array_equal(back, img)


def test_pgm_directory_and_comments(tmp_path, rng):
    imgs = [rng.integers(0, 256, (16, 32)) for _ in range(3)]
    for i, img in enumerate(imgs):
        (tmp_path / f"f{i:02d}.pgm").write_bytes(pgm_bytes(img, comment=True))
    frames = ingest(tmp_path, "pgm-sequence")
    assert len(frames) == 3
    assert all(np.array_equal(f.luma, i) for f, i in zip(frames, imgs))


def test_pgm_concatenated_file(tmp_path, rng):
    imgs = [rng.integers(0, 256, (16, 16)) for _ in range(2)]
    (tmp_path / "cat.pgm").write_bytes(b"".join(pgm_bytes(i) for i in imgs))
    assert len(ingest(tmp_path / "cat.pgm", "pgm-sequence")) == 2


def test_pgm_truncated(tmp_path):
    (tmp_path / "t.pgm").write_bytes(b"P5\n16 16\n255\n" + bytes(100))
    with pytest.raises(ParseError) as e:
        ingest(tmp_path / "t.pgm", "pgm-sequence")
    assert e.value.offset is not None


def test_pgm_bad_magic(tmp_path):
    (tmp_path / "t.pgm").write_bytes(b"P2\n16 16\n255\n")
    with pytest.raises(ParseError):
        ingest(tmp_path / "t.pgm", "pgm-sequence")


def y4m_bytes(planes, colour="420jpeg"):
    h, w = planes[0].shape
    out = b"YUV4MPEG2 W%d H%d F30:1 Ip A1:1 C%s\n" % (w, h, colour.encode())
    chroma = 2 * ((w + 1) // 2) * ((h + 1) // 2)
    for p in planes:
        out += b"FRAME\n" + p.astype(np.uint8).tobytes() + bytes([128]) * chroma
    return out


def test_y4m_luma(tmp_path, rng):
    planes = [rng.integers(0, 256, (32, 32)) for _ in range(4)]
    (tmp_path / "v.y4m").write_bytes(y4m_bytes(planes))
    frames = ingest(tmp_path / "v.y4m", "y4m", frames=3)
    assert len(frames) == 3
    assert np.array_equal(frames[2].luma, planes[2])


def test_y4m_rejects_high_bit_depth(tmp_path):
    (tmp_path / "v.y4m").write_bytes(b"YUV4MPEG2 W16 H16 C420p10\n")
    with pytest.raises(ParseError, match="8-bit"):
        read_y4m(tmp_path / "v.y4m")


def test_y4m_truncated(tmp_path, rng):
    data = y4m_bytes([rng.integers(0, 256, (16, 16))])
    (tmp_path / "v.y4m").write_bytes(data[:-10])
    with pytest.raises(ParseError, match="truncated"):
        read_y4m(tmp_path / "v.y4m")


def test_yuv420(tmp_path, rng):
    planes = [rng.integers(0, 256, (32, 48)) for _ in range(2)]
    raw = b"".join(p.astype(np.uint8).tobytes() + bytes(2 * 16 * 24) for p in planes)
    (tmp_path / "v.yuv").write_bytes(raw)
    frames = ingest(tmp_path / "v.yuv", "yuv420-planar", width=48, height=32)
    assert [f.luma.shape for f in frames] == [(32, 48)] * 2
    assert np.array_equal(frames[1].luma, planes[1])


def test_yuv420_size_error_names_expected_size(tmp_path):
    (tmp_path / "v.yuv").write_bytes(bytes(1000))
    with pytest.raises(ParseError, match="2304"):
        ingest(tmp_path / "v.yuv", "yuv420-planar", width=32, height=48)


def test_center_crop_warns(tmp_path, rng, caplog):
    img = rng.integers(0, 256, (40, 50))
    (tmp_path / "a.pgm").write_bytes(pgm_bytes(img))
    frames = ingest(tmp_path / "a.pgm", "pgm-sequence")
    assert frames[0].luma.shape == (32, 48)
    assert np.array_equal(frames[0].luma, img[4:36, 1:49])
    assert "cropping" in caplog.text


def test_center_crop_too_small():
    with pytest.raises(ValueError):
        center_crop(np.zeros((8, 40)), 16)


# ---------------------------------------------------------------- sweep

@pytest.fixture(scope="module")
def sweep_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    spec = RunSpec(input="translate", format="synthetic", rates=(0.3, 0.5), p_values=(20,),
                   frames=9, out_dir=str(out))
    return spec, run_sweep(spec), out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_row_counts(sweep_run):
    spec, rows, out = sweep_run
    assert len(rows) == 2 * 2 * 1 * 9
    metrics = read_csv(out / "metrics.csv")
    assert list(metrics[0]) == METRIC_FIELDS
    assert len(metrics) == len(rows)
    assert len(read_csv(out / "timings.csv")) == len(rows)
    assert len(read_csv(out / "aggregate.csv")) == 4
    for solver in Solver:
        lines = (out / f"plot_{solver.value}_p20.dat").read_text().splitlines()
        assert len(lines) == 3 and lines[0].startswith("#")
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == spec.seed and manifest["frame_count"] == 9


def test_sweep_mh_st_beats_baseline(sweep_run):
    agg = aggregate(sweep_run[1])
    for rate in (0.3, 0.5):
        assert agg["mh-st", rate, 20] >= agg["mh-tikhonov", rate, 20]


def test_sweep_aggregate_is_mean_of_rows(sweep_run):
    _, rows, out = sweep_run
    for r in read_csv(out / "aggregate.csv"):
        vals = [m.psnr for m in rows if m.solver == r["solver"] and m.rate == float(r["rate"])
                and m.role == "non-reference"]
        assert len(vals) == int(r["frames"]) == 7
        assert float(r["mean_psnr"]) == pytest.approx(np.mean(vals), abs=1e-6)


def test_sweep_timings_positive(sweep_run):
    assert all(float(r["decode_time"]) > 0 for r in read_csv(sweep_run[2] / "timings.csv"))


def test_sweep_metrics_deterministic(sweep_run, tmp_path):
    spec, _, out = sweep_run
    again = RunSpec(input="translate", format="synthetic", rates=(0.3, 0.5), p_values=(20,),
                    frames=9, out_dir=str(tmp_path))
    run_sweep(again)
    for name in ("metrics.csv", "aggregate.csv"):
        assert (out / name).read_bytes() == (tmp_path / name).read_bytes()


@pytest.mark.parametrize("kw", [dict(rates=()), dict(rates=(1.5,)), dict(p_values=()), dict(solvers=())])
def test_runspec_validation(kw):
    with pytest.raises(ConfigError):
        RunSpec(input="x", **kw)


def test_sweep_too_few_frames(tmp_path):
    spec = RunSpec(input="translate", format="synthetic", rates=(0.5,), p_values=(20,), out_dir=str(tmp_path))
    with pytest.raises(ConfigError):
        run_sweep(spec, frames=translating_sequence(5, 32, 32))


# ---------------------------------------------------------------- stream + CLI

def test_stream_round_trip_nine_frames():
    frames = translating_sequence(9, 32, 48)
    enc = encode_sequence(frames, plan_gops(9, 9), 0.7, 0.3, 16, seed=5)
    buf = io.BytesIO()
    serialize(enc, buf)
    assert deserialize(buf.getvalue()) == enc


def test_cli_encode_decode(tmp_path, capsys):
    stream = tmp_path / "s.cvs"
    assert main(["encode", "--input", "translate", "--format", "synthetic", "--rate", "0.5",
                 "--output", str(stream)]) == 0
    assert main(["decode", str(stream), "--out-dir", str(tmp_path / "out")]) == 0
    pgms = sorted((tmp_path / "out").glob("*.pgm"))
    assert len(pgms) == 9
    ref = translating_sequence(9, seed=1)  # the CLI default --seed also seeds the texture
    img, _ = parse_pgm(pgms[4].read_bytes())
    assert psnr(ref[4], img) > 30


def test_cli_sweep(tmp_path, capsys):
    assert main(["sweep", "--input", "static", "--format", "synthetic", "--rates", "0.5",
                 "--p", "20", "--solver", "mh-st", "--out-dir", str(tmp_path)]) == 0
    assert "mh-st" in capsys.readouterr().out
    assert (tmp_path / "metrics.csv").exists()


def test_cli_rejects_bad_solver(capsys):
    with pytest.raises(SystemExit):
        main(["sweep", "--input", "x", "--solver", "nope"])
