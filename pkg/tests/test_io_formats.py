import json
import math

import numpy as np
import pytest

from placepart.core import FeatureMatrix, Partition, Trajectory
from placepart.evaluation import EvaluationReport
from placepart import io_formats
from placepart.io_formats import (
    BadMagicError,
    FormatError,
    NonFiniteValueError,
    TruncatedFileError,
    load_features,
    load_partition_csv,
    load_trajectory_csv,
    render_partition_svg,
    write_features,
    write_partition_csv,
    write_report_json,
    write_trajectory_csv,
)


class TestTrajectoryCsv:
    def test_minimal_file(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "sample_id,timestamp_s,x_m,y_m,heading_rad\n0,0.0,0,0,0\n1,1.0,3,4,0\n"
        )
        traj = load_trajectory_csv(p)
        assert len(traj) == 2
        from placepart.core import cumulative_travel_distance

        assert cumulative_travel_distance(traj)[-1] == 5.0

    def test_out_of_order_rows_sorted(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text(
            "sample_id,timestamp_s,x_m,y_m,heading_rad\n5,2.0,0,0,0\n3,1.0,1,1,0\n"
        )
        traj = load_trajectory_csv(p)
        assert traj.sample_ids == (3, 5)

    def test_heading_normalized(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("sample_id,timestamp_s,x_m,y_m,heading_rad\n0,0.0,0,0,7.0\n")
        traj = load_trajectory_csv(p)
        assert traj.samples[0].pose.heading == pytest.approx(7.0 - 2 * math.pi)

    def test_malformed_row_names_line(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("sample_id,timestamp_s,x_m,y_m,heading_rad\n0,0.0,0,0,0\n1,oops,0,0,0\n")
        with pytest.raises(FormatError, match="line 3"):
            load_trajectory_csv(p)

    def test_duplicate_id_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("sample_id,timestamp_s,x_m,y_m,heading_rad\n0,0.0,0,0,0\n0,1.0,0,0,0\n")
        with pytest.raises(FormatError, match="duplicate"):
            load_trajectory_csv(p)

    def test_empty_file_rejected(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("")
        with pytest.raises(FormatError):
            load_trajectory_csv(p)
        p.write_text("sample_id,timestamp_s,x_m,y_m,heading_rad\n")
        with pytest.raises(FormatError, match="no data"):
            load_trajectory_csv(p)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(10)
        traj = Trajectory.from_arrays(
            range(20),
            np.sort(rng.uniform(0, 100, 20)),
            rng.uniform(-50, 50, 20),
            rng.uniform(-50, 50, 20),
            rng.uniform(-math.pi, math.pi, 20),
        )
        p = tmp_path / "t.csv"
        write_trajectory_csv(traj, p)
        again = load_trajectory_csv(p)
        assert again.sample_ids == traj.sample_ids
        np.testing.assert_array_equal(again.positions(), traj.positions())
        np.testing.assert_array_equal(again.headings(), traj.headings())
        np.testing.assert_array_equal(again.timestamps(), traj.timestamps())


class TestFeatureFiles:
    def test_vpcf_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.normal(size=(2, 3)).astype(np.float32)
        # include signed zero and a subnormal
        values[0, 0] = np.float32(-0.0)
        values[0, 1] = np.float32(1e-42)
        p = tmp_path / "f.vpcf"
        write_features(FeatureMatrix(values), p)
        again = load_features(p)
        assert again.values.dtype == np.float32
        assert np.array_equal(
            again.values.view(np.uint32), values.view(np.uint32)
        )  # bitwise, signed zeros included

    def test_header_layout(self, tmp_path):
        p = tmp_path / "f.vpcf"
        write_features(FeatureMatrix(np.ones((3, 2), dtype=np.float32)), p)
        raw = p.read_bytes()
        assert raw[:4] == b"VPCF"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 3
        assert int.from_bytes(raw[12:16], "little") == 2
        assert len(raw) == 16 + 3 * 2 * 4

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "f.vpcf"
        write_features(FeatureMatrix(np.ones((10, 1), dtype=np.float32)), p)
        data = p.read_bytes()
        p.write_bytes(data[:-4])  # header says 10 rows, payload has 9
        with pytest.raises(TruncatedFileError):
            load_features(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "f.vpcf"
        p.write_bytes(b"VPCF")
        with pytest.raises(TruncatedFileError):
            load_features(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "f.vpcf"
        p.write_bytes(b"NOPE" + bytes(12))
        with pytest.raises(BadMagicError):
            load_features(p)

    def test_non_finite_rejected(self, tmp_path):
        p = tmp_path / "f.vpcf"
        payload = np.array([[np.inf]], dtype="<f4")
        p.write_bytes(b"VPCF" + (1).to_bytes(4, "little") * 3 + payload.tobytes())
        with pytest.raises(NonFiniteValueError):
            load_features(p)

    def test_csv_fallback_round_trip(self, tmp_path):
        values = np.array([[1.5, -2.25], [0.125, 3.0]], dtype=np.float32)
        p = tmp_path / "f.csv"
        write_features(FeatureMatrix(values), p)
        again = load_features(p)
        np.testing.assert_array_equal(again.values, values.astype(np.float64))


class TestPartitionCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "p.csv"
        part = Partition((0, 1), np.array([0, 1]))
        write_partition_csv(part, p)
        again = load_partition_csv(p)
        assert again.class_of == part.class_of

    def test_density_error(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text("sample_id,class_id\n0,0\n1,2\n")
        with pytest.raises(FormatError, match="dense"):
            load_partition_csv(p)

    def test_large_random_round_trip(self, tmp_path):
        rng = np.random.default_rng(17)
        labels = rng.integers(0, 40, 1000)
        labels[:40] = np.arange(40)
        part = Partition(tuple(range(1000)), labels)
        p = tmp_path / "p.csv"
        write_partition_csv(part, p)
        again = load_partition_csv(p)
        assert again.sample_ids == part.sample_ids
        assert again.labels.tolist() == part.labels.tolist()


def square_traj():
    return Trajectory.from_arrays(
        [0, 1, 2, 3], [0, 1, 2, 3], [0, 1, 1, 0], [0, 0, 1, 1], [0, 0, 0, 0]
    )


class TestPartitionSvg:
    def test_circle_count_and_distinct_fills(self, tmp_path):
        p = tmp_path / "m.svg"
        traj = Trajectory.from_arrays([0, 1], [0, 1], [0, 1], [0, 1], [0, 0])
        render_partition_svg(traj, Partition((0, 1), np.array([0, 1])), p)
        text = p.read_text()
        assert text.count("<circle") == 2
        fills = [seg.split('"')[0] for seg in text.split('fill="')[2:]]
        assert len(set(fills)) == 2

    def test_byte_identical(self, tmp_path):
        part = Partition((0, 1, 2, 3), np.array([0, 1, 0, 1]))
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_partition_svg(square_traj(), part, a)
        render_partition_svg(square_traj(), part, b)
        assert a.read_bytes() == b.read_bytes()

    def test_single_class_single_fill(self, tmp_path):
        p = tmp_path / "m.svg"
        render_partition_svg(square_traj(), Partition((0, 1, 2, 3), np.zeros(4, dtype=int)), p)
        fills = [seg.split('"')[0] for seg in p.read_text().split('fill="')[2:]]
        assert len(set(fills)) == 1

    def test_palette_seed_env(self, tmp_path, monkeypatch):
        part = Partition((0, 1, 2, 3), np.array([0, 1, 0, 1]))
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        render_partition_svg(square_traj(), part, a)
        monkeypatch.setenv("VPC_PALETTE_SEED", "5")
        render_partition_svg(square_traj(), part, b)
        assert a.read_bytes() != b.read_bytes()

    def test_mismatched_partition_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            render_partition_svg(
                square_traj(), Partition((7, 8), np.array([0, 1])), tmp_path / "m.svg"
            )


class TestReportJson:
    def report(self):
        return EvaluationReport(
            n_valid_tests=10,
            n_invalid_tests=2,
            sr_top1=0.25,
            sr_topx=0.5,
            nsr_top1=0.0123456789,
            top_x=5,
            n_classes=4,
            class_size_histogram=((3, 2), (5, 2)),
            mean_class_size=4.0,
        )

    def test_contains_fields(self, tmp_path):
        p = tmp_path / "r.json"
        write_report_json(self.report(), p, "time", {"classes": 4})
        text = p.read_text()
        assert '"sr_top5": 0.5' in text
        loaded = json.loads(text)
        assert loaded["strategy"] == "time"
        assert loaded["config"] == {"classes": 4}
        assert loaded["nsr_top1"] == pytest.approx(0.0123457)  # 6 significant digits
        assert loaded["class_size_histogram"] == [[3, 2], [5, 2]]

    def test_round_trip_numeric_fields(self, tmp_path):
        p = tmp_path / "r.json"
        write_report_json(self.report(), p, "time", {})
        loaded = io_formats.load_report_json(p)
        rep = self.report()
        assert loaded["sr_top1"] == float(f"{rep.sr_top1:.6g}")
        assert loaded["n_valid_tests"] == rep.n_valid_tests
        assert loaded["n_invalid_tests"] == rep.n_invalid_tests
        assert loaded["mean_class_size"] == rep.mean_class_size

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_report_json(self.report(), a, "time", {"k": 1})
        write_report_json(self.report(), b, "time", {"k": 1})
        assert a.read_bytes() == b.read_bytes()

    def test_matches_golden_synthworld_report(self, tmp_path):
        import pathlib

        import placepart as pp

        spec = pp.WorldSpec(4, 200, 8, pp.VariableSpeed(0.2, 5.0), 0.1, seed=7)
        w = pp.generate_world(spec)
        cfg = pp.PartitionConfig(pp.Strategy.LOCATION_APPEARANCE, 8, k_appearance=4, seed=7)
        part = pp.run_strategy(w.train, cfg, w.train_features)
        rep = pp.evaluate(w.train, w.train_features, part, w.test, w.test_features)
        out = tmp_path / "r.json"
        write_report_json(rep, out, "location-appearance", {"classes": 8, "seed": 7})
        golden = pathlib.Path(__file__).parent / "data" / "golden_report.json"
        assert out.read_bytes() == golden.read_bytes()
