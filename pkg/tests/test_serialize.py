import numpy as np
import pytest

from gatefid import KrausMap, depolarizing_kraus, mc_histogram, normal_pdf, QubitSpectrum
from gatefid.serialize import (
    density_csv_lines,
    histogram_csv_lines,
    kraus_from_obj,
    kraus_to_obj,
    load_matrix,
    matrix_from_obj,
    matrix_to_obj,
    save_matrix,
)
from conftest import random_matrix


class TestMatrixJson:
    def test_round_trip(self, rng, tmp_path):
        m = random_matrix(rng, 3)
        path = tmp_path / "m.json"
        save_matrix(m, path)
        back = load_matrix(path)
        assert np.array_equal(back, m)

    def test_obj_shape(self):
        obj = matrix_to_obj(np.eye(2))
        assert obj["dim"] == 2
        assert obj["entries"] == [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]

    def test_rejects_wrong_entry_count(self):
        with pytest.raises(ValueError, match="entries"):
            matrix_from_obj({"dim": 2, "entries": [[1, 0]]})

    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError):
            matrix_from_obj({"dim": 0, "entries": []})

    def test_rejects_scalar_entries(self):
        with pytest.raises(ValueError, match="pair"):
            matrix_from_obj({"dim": 1, "entries": [1.0]})

    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            matrix_from_obj({"dim": 1, "entries": [[float("nan"), 0.0]]})


class TestKrausJson:
    def test_round_trip(self):
        k = depolarizing_kraus(0.25)
        back = kraus_from_obj(kraus_to_obj(k))
        assert isinstance(back, KrausMap)
        assert back.completeness_defect <= 1e-12
        for a, b in zip(back.operators, k.operators):
            assert np.array_equal(a, b)

    def test_rejects_missing_field(self):
        with pytest.raises(ValueError, match="operators"):
            kraus_from_obj({"ops": []})


class TestCsv:
    def test_histogram_lines(self):
        h = mc_histogram(np.eye(2), 4, 100, seed=0, value_range=(0.0, 1.0))
        lines = histogram_csv_lines(h)
        assert lines[0] == "bin_lo,bin_hi,count,density"
        assert len(lines) == 5
        cells = lines[-1].split(",")
        assert float(cells[1]) == 1.0
        assert int(cells[2]) == 100
        # density = count / (samples * width)
        assert float(cells[3]) == pytest.approx(100 / (100 * 0.25))

    def test_density_lines_avoid_singular_endpoint(self):
        d = normal_pdf(QubitSpectrum.ordered(0.5, 1.0))
        lines = density_csv_lines(d, 16)
        assert lines[0] == "f,density"
        first_f, first_p = map(float, lines[1].split(","))
        assert first_f > d.support()[0]
        assert np.isfinite(first_p)
