"""FeatureMatrix container behavior and feature CSV round-trips."""

import numpy as np
import pytest

from gafds.errors import DataFormatError
from gafds.features import FeatureMatrix, export_features_csv, import_features_csv


def _fm():
    return FeatureMatrix(
        values=np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]),
        names=("f_1", "f_2"),
        labels=("a", "a", "b"),
        record_ids=("r1", "r2", "r3"),
    )


class TestFeatureMatrix:
    def test_column_lookup(self):
        fm = _fm()
        assert np.array_equal(fm.column("f_2"), [2.0, 4.0, 6.0])
        with pytest.raises(KeyError):
            fm.column("missing")

    def test_select_by_name(self):
        fm = _fm()
        sub = fm.select(["f_2"])
        assert sub.names == ("f_2",)
        assert sub.values.shape == (3, 1)
        assert sub.labels == fm.labels

    def test_select_mask(self):
        fm = _fm()
        sub = fm.select_mask(np.array([True, False]))
        assert sub.names == ("f_1",)

    def test_hstack(self):
        fm = _fm()
        other = FeatureMatrix(
            values=np.array([[9.0], [8.0], [7.0]]),
            names=("g_1",),
            labels=fm.labels,
            record_ids=fm.record_ids,
        )
        joined = fm.hstack(other)
        assert joined.names == ("f_1", "f_2", "g_1")
        assert joined.values.shape == (3, 3)

    def test_hstack_mismatched_rows_rejected(self):
        fm = _fm()
        other = FeatureMatrix(
            values=np.array([[9.0], [8.0], [7.0]]),
            names=("g_1",),
            labels=("a", "a", "b"),
            record_ids=("x1", "x2", "x3"),
        )
        with pytest.raises(ValueError):
            fm.hstack(other)

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            FeatureMatrix(
                values=np.zeros((2, 2)),
                names=("f", "f"),
                labels=("a", "b"),
                record_ids=("r1", "r2"),
            )

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            FeatureMatrix(
                values=np.array([[np.inf, 0.0]]),
                names=("f_1", "f_2"),
                labels=("a",),
                record_ids=("r1",),
            )

    def test_values_read_only(self):
        fm = _fm()
        with pytest.raises(ValueError):
            fm.values[0, 0] = 0.0


class TestFeatureCsv:
    def test_round_trip_exact(self, tmp_path):
        fm = _fm()
        path = tmp_path / "features.csv"
        export_features_csv(fm, path)
        loaded = import_features_csv(path)
        assert loaded.names == fm.names
        assert loaded.labels == fm.labels
        assert loaded.record_ids == fm.record_ids
        # repr-formatted floats reparse bit for bit
        assert np.array_equal(loaded.values, fm.values)

    def test_round_trip_awkward_floats(self, tmp_path):
        vals = np.array([[0.1 + 0.2, 1e-17], [np.pi, 2.0 ** -52]])
        fm = FeatureMatrix(
            values=vals,
            names=("f_1", "f_2"),
            labels=("a", "b"),
            record_ids=("r1", "r2"),
        )
        path = tmp_path / "features.csv"
        export_features_csv(fm, path)
        loaded = import_features_csv(path)
        assert np.array_equal(loaded.values, vals)

    def test_header_names_preserved(self, tmp_path):
        fm = _fm()
        path = tmp_path / "features.csv"
        export_features_csv(fm, path)
        assert path.read_text().splitlines()[0] == "record_id,label,f_1,f_2"

    def test_wrong_arity_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("record_id,label,f_1\nr1,a,1.0,2.0\n")
        with pytest.raises(DataFormatError):
            import_features_csv(path)

    def test_non_numeric_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("record_id,label,f_1\nr1,a,oops\n")
        with pytest.raises(DataFormatError) as err:
            import_features_csv(path)
        assert "line 2" in str(err.value)
