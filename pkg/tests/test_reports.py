import numpy as np
import pytest

from srampuf.analysis import reports


def test_csv_round_trip(tmp_path):
    p = reports.write_csv(tmp_path / "sub" / "x.csv", "demo/1", ("a", "b"), [(1, 0.5), (np.int64(2), np.float32(0.25))])
    assert p.read_text().splitlines()[0] == "# schema: demo/1"
    schema, rows = reports.read_csv(p)
    assert schema == "demo/1" and rows == [{"a": "1", "b": "0.5"}, {"a": "2", "b": "0.25"}]


def test_missing_schema(tmp_path):
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        reports.read_csv(tmp_path / "x.csv")


def test_histogram_covers_unit_interval():
    h = reports.alias_histogram(np.array([0.0, 0.5, 1.0, 0.42]), bins=10)
    assert len(h) == 10 and h[0][0] == 0.0 and h[-1][1] == 1.0
    assert sum(c for _, _, c in h) == 4
