import numpy as np
import pytest

from sgboost import ValidationError
from sgboost.design import design_from_groups, load_design, read_csv_design, thin_svd
from sgboost.simulation import get_scenario

from conftest import write_csv


def test_load_design_two_groups():
    gd = load_design([[1, 2, 3], [4, 5, 6]], ["a", "a", "b"])
    assert gd.G == 2
    assert gd.group_sizes.tolist() == [2, 1]
    assert gd.group_labels == ("a", "b")


def test_load_design_nan_names_cell():
    with pytest.raises(ValidationError, match=r"row 2.*column 3|column 3.*row 2"):
        load_design([[1, 2, 3], [4, 5, float("nan")]], [1, 1, 2])


def test_load_design_ragged_rows():
    with pytest.raises(ValidationError, match="dimension mismatch"):
        load_design([[1, 2], [3]], [1, 1])


def test_load_design_group_map_length():
    with pytest.raises(ValidationError):
        load_design([[1, 2]], [1])


def test_scenario_two_grouping():
    s = get_scenario(2)
    groups, start = [], 0
    for size in s.group_sizes:
        groups.append(range(start, start + size))
        start += size
    gd = design_from_groups(np.ones((50, s.p)), groups)
    assert gd.G == 15
    assert gd.p == 5 * 5 + 5 * 5 + 5 * 15


def test_design_is_read_only():
    gd = load_design([[1.0, 2.0]], [1, 1])
    with pytest.raises(ValueError):
        gd.X[0, 0] = 3.0


def test_group_relabel_first_appearance():
    gd = load_design([[1, 2, 3, 4]], ["z", "y", "z", "x"])
    assert gd.group_of.tolist() == [1, 2, 1, 3]
    assert [c.tolist() for c in gd.group_cols] == [[0, 2], [1], [3]]


def test_thin_svd_identity():
    s = thin_svd(np.eye(3))
    np.testing.assert_allclose(s.d, [1, 1, 1])


def test_thin_svd_single_column():
    x = np.array([[3.0], [4.0]])
    s = thin_svd(x)
    assert s.r == 1
    np.testing.assert_allclose(s.d, [5.0])
    np.testing.assert_allclose(s.U[:, 0], [0.6, 0.8])


def test_thin_svd_reconstruction(rng):
    M = rng.standard_normal((5, 3))
    s = thin_svd(M)
    assert np.abs(s.U @ np.diag(s.d) @ s.V.T - M).max() <= 1e-8


def test_thin_svd_drops_null_directions():
    M = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    s = thin_svd(M)
    assert s.r == 1
    np.testing.assert_allclose(s.U @ np.diag(s.d) @ s.V.T, M, atol=1e-12)


def test_thin_svd_sign_convention(rng):
    s = thin_svd(rng.standard_normal((6, 3)))
    for col in s.V.T:
        first = col[np.flatnonzero(np.abs(col) > 0)[0]]
        assert first >= 0


def test_thin_svd_rank_zero():
    with pytest.raises(ValidationError, match="rank zero"):
        thin_svd(np.zeros((3, 2)))


def test_subset_rows():
    gd = load_design([[1, 2], [3, 4], [5, 6]], [1, 2])
    sub = gd.subset_rows(np.array([True, False, True]))
    assert sub.X.tolist() == [[1, 2], [5, 6]]
    assert sub.group_of.tolist() == gd.group_of.tolist()


def test_read_csv_design(tmp_path):
    data = write_csv(tmp_path / "d.csv", ["y", "a", "b", "c"], [[1, 0.5, 1, 2], [0, 1.5, 3, 4]])
    groups = write_csv(tmp_path / "g.csv", ["variable", "group"], [["a", "g1"], ["b", "g1"], ["c", "g2"]])
    gd, y = read_csv_design(data, groups, outcome="y")
    assert gd.names == ("a", "b", "c")
    assert gd.G == 2
    assert y.tolist() == [1, 0]


def test_read_csv_missing_group(tmp_path):
    data = write_csv(tmp_path / "d.csv", ["a", "b"], [[1, 2]])
    groups = write_csv(tmp_path / "g.csv", ["variable", "group"], [["a", "g1"]])
    with pytest.raises(ValidationError, match="b"):
        read_csv_design(data, groups)


def test_read_csv_unknown_variable(tmp_path):
    data = write_csv(tmp_path / "d.csv", ["a"], [[1]])
    groups = write_csv(tmp_path / "g.csv", ["variable", "group"], [["a", "g"], ["zz", "g"]])
    with pytest.raises(ValidationError, match="zz"):
        read_csv_design(data, groups)


def test_read_csv_bad_cell_reports_line(tmp_path):
    data = write_csv(tmp_path / "d.csv", ["a", "b"], [[1, 2], [3, "x"]])
    groups = write_csv(tmp_path / "g.csv", ["variable", "group"], [["a", 1], ["b", 1]])
    with pytest.raises(ValidationError, match=":3"):
        read_csv_design(data, groups)
