import csv
import json

import numpy as np
import pytest

from sfemdmp.fileio import (
    mesh_from_off,
    read_off,
    read_solution_csv,
    write_angles_csv,
    write_json,
    write_off,
    write_solution_csv,
    write_table_csv,
)
from sfemdmp.mesh import UnitHemisphere, angle_stats


class TestOff:
    def test_round_trip(self, tmp_path, hemispheres, semitorus_base):
        for mesh in (hemispheres[3], semitorus_base):
            write_off(tmp_path / "m.off", mesh)
            v, t = read_off(tmp_path / "m.off")
            assert np.abs(v - mesh.vertices).max() <= 1e-15
            assert np.array_equal(t, mesh.triangles)

    def test_mesh_from_off_keeps_node_order(self, tmp_path, hemispheres):
        mesh = hemispheres[2]
        write_off(tmp_path / "m.off", mesh)
        back = mesh_from_off(tmp_path / "m.off", UnitHemisphere())
        assert np.array_equal(back.vertices, mesh.vertices)
        assert back.n_interior == mesh.n_interior

    def test_comments_and_bad_files(self, tmp_path):
        (tmp_path / "a.off").write_text("OFF\n# tri\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
        v, t = read_off(tmp_path / "a.off")
        assert v.shape == (3, 3) and t.tolist() == [[0, 1, 2]]
        (tmp_path / "b.off").write_text("PLY\n")
        with pytest.raises(ValueError):
            read_off(tmp_path / "b.off")
        (tmp_path / "c.off").write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(ValueError):
            read_off(tmp_path / "c.off")


class TestCsv:
    def test_solution_round_trip(self, tmp_path, hemispheres):
        mesh = hemispheres[1]
        u = np.random.default_rng(0).normal(size=mesh.n_vertices)
        write_solution_csv(tmp_path / "s.csv", mesh, u)
        np.testing.assert_array_equal(read_solution_csv(tmp_path / "s.csv"), u)
        with open(tmp_path / "s.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["node", "x", "y", "z", "u", "is_boundary"]
        assert sum(int(r["is_boundary"]) for r in rows) == mesh.n_vertices - mesh.n_interior

    def test_angles(self, tmp_path, hemispheres):
        mesh = hemispheres[1]
        write_angles_csv(tmp_path / "a.csv", mesh)
        data = np.loadtxt(tmp_path / "a.csv", delimiter=",", skiprows=1)
        np.testing.assert_array_equal(data[:, 1:], angle_stats(mesh).per_element_angles)

    def test_table_formats_numpy_floats(self, tmp_path):
        write_table_csv(tmp_path / "t.csv", ["a", "b"], [[1, np.float64(0.1)], [2, 0.25]])
        assert (tmp_path / "t.csv").read_text() == "a,b\n1,0.1\n2,0.25\n"

    def test_json_is_sorted(self, tmp_path):
        write_json(tmp_path / "j.json", {"b": 1, "a": [1.5]})
        text = (tmp_path / "j.json").read_text()
        assert text.index('"a"') < text.index('"b"') and json.loads(text) == {"a": [1.5], "b": 1}
