import numpy as np
import pytest

from ternpack.cli import main


def _write_raw(tmp_path, rows=8, cols=12, seed=0):
    rng = np.random.default_rng(seed)
    raw = tmp_path / "w.f32"
    raw.write_bytes(rng.standard_normal(rows * cols).astype("<f4").tobytes())
    return raw


class TestPack:
    def test_pack_info_verify_flow(self, tmp_path, capsys):
        raw = _write_raw(tmp_path)
        model = tmp_path / "m.tpk"
        assert main(["pack", str(raw), str(model), "--rows", "8", "--cols", "12",
                     "--format", "tl1"]) == 0
        out = capsys.readouterr().out
        assert "packed 8x12 as TL1" in out
        assert "payload bytes: 24" in out
        assert "bits/weight: 2.00" in out

        assert main(["info", str(model)]) == 0
        out = capsys.readouterr().out
        assert "format: TL1" in out
        assert "weights: 8x12" in out

        assert main(["verify", str(model), "--decoder-trials", "2",
                     "--steps", "5"]) == 0
        out = capsys.readouterr().out
        assert "TL1 100% exact" in out
        assert "100.0%" in out

    def test_pack_tl2_bits_per_weight(self, tmp_path, capsys):
        raw = _write_raw(tmp_path, rows=4, cols=24)
        model = tmp_path / "m.tpk"
        assert main(["pack", str(raw), str(model), "--rows", "4", "--cols", "24",
                     "--format", "tl2"]) == 0
        out = capsys.readouterr().out
        assert "bits/weight: 1.67" in out

    def test_size_mismatch_is_io_error(self, tmp_path, capsys):
        raw = _write_raw(tmp_path, rows=8, cols=12)
        assert main(["pack", str(raw), str(tmp_path / "m.tpk"), "--rows", "9",
                     "--cols", "12", "--format", "i2s"]) == 3
        assert "expected" in capsys.readouterr().err

    def test_missing_input_is_io_error(self, tmp_path, capsys):
        assert main(["pack", str(tmp_path / "nope.f32"), str(tmp_path / "m.tpk"),
                     "--rows", "1", "--cols", "4", "--format", "i2s"]) == 3

    def test_all_zero_weights_rejected(self, tmp_path, capsys):
        raw = tmp_path / "z.f32"
        raw.write_bytes(np.zeros(16, dtype="<f4").tobytes())
        assert main(["pack", str(raw), str(tmp_path / "m.tpk"), "--rows", "4",
                     "--cols", "4", "--format", "i2s"]) == 3
        assert "degenerate" in capsys.readouterr().err


class TestVerify:
    def test_random_suite(self, tmp_path, capsys):
        assert main(["verify", "--random", "20", "--decoder-trials", "2",
                     "--steps", "5"]) == 0
        out = capsys.readouterr().out
        assert "cross-kernel exactness (20 instances)" in out
        assert "I2S 100%" in out or "I2_S 100%" in out

    def test_no_args_is_usage_error(self, capsys):
        assert main(["verify"]) == 2

    def test_fault_inject_fails(self, capsys):
        assert main(["verify", "--random", "5", "--decoder-trials", "5",
                     "--steps", "10", "--fault-inject"]) == 1

    def test_corrupted_model_exit_1(self, tmp_path, capsys):
        raw = _write_raw(tmp_path)
        model = tmp_path / "m.tpk"
        main(["pack", str(raw), str(model), "--rows", "8", "--cols", "12",
              "--format", "tl1"])
        capsys.readouterr()
        blob = bytearray(model.read_bytes())
        blob[-1] = 0x9F  # out-of-range TL1 nibble
        model.write_bytes(bytes(blob))
        assert main(["verify", str(model), "--decoder-trials", "1",
                     "--steps", "1"]) == 1
        assert "invalid TL1 index at matrix 0 row" in capsys.readouterr().err

    def test_truncated_model_exit_3(self, tmp_path, capsys):
        raw = _write_raw(tmp_path)
        model = tmp_path / "m.tpk"
        main(["pack", str(raw), str(model), "--rows", "8", "--cols", "12",
              "--format", "i2s"])
        capsys.readouterr()
        model.write_bytes(model.read_bytes()[:-3])
        assert main(["verify", str(model)]) == 3
        assert "truncated" in capsys.readouterr().err


class TestBench:
    def test_tiny_bench_with_jsonl(self, tmp_path, capsys):
        out_path = tmp_path / "bench.jsonl"
        assert main(["bench", "--config", "125M", "--format", "tl1",
                     "--baseline", "none", "--tokens", "1", "--warmup", "0",
                     "--reps", "1", "--out", str(out_path)]) == 0
        out = capsys.readouterr().out
        assert "tok/s" in out
        assert "125M" in out
        assert out_path.read_text().count("\n") == 1

    def test_unknown_config_usage_error(self, capsys):
        assert main(["bench", "--config", "9000B"]) == 2

    def test_bad_subcommand_exit_2(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["frobnicate"])
        assert e.value.code == 2


class TestInfo:
    def test_missing_file(self, tmp_path, capsys):
        assert main(["info", str(tmp_path / "nope.tpk")]) == 3
