"""Command-line driver: artifacts, determinism, exit codes."""

import csv

from billiardlab.cli import main

DISK = "kind = ball\ndim = 2\nradius = 1.0\n"
ELLIPSE = "kind = ellipsoid\ndim = 2\nmatrix = 0.25 0 0 1\n"
SUPERELLIPSE = "kind = superellipse\ndim = 2\nexponent = 4\n"


def write(tmp, name, text):
    path = tmp / name
    path.write_text(text, encoding="utf-8")
    return path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_reflect_command(tmp_path, capsys):
    write(tmp_path, "disk.body", DISK)
    cfg = write(tmp_path, "r.cfg", (
        "experiment = reflect\nbody_k = disk.body\nbody_t = disk.body\n"
        "line_point = 0 0\nline_direction = 1 0\n"))
    rc = main(["reflect", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "reflect.csv")
    assert rows[0][0] == "role"
    out_row = rows[2]
    assert out_row[0] == "outgoing"
    assert abs(float(out_row[1]) - 1.0) < 1e-10
    assert abs(float(out_row[3]) + 1.0) < 1e-10


def test_trace_zero_steps_echoes_line(tmp_path, capsys):
    write(tmp_path, "disk.body", DISK)
    cfg = write(tmp_path, "t.cfg", (
        "experiment = trace\nbody_k = disk.body\nbody_t = disk.body\n"
        "line_point = 0.1 0.2\nline_direction = 0 1\nsteps = 0\n"))
    rc = main(["trace", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    captured = capsys.readouterr().out
    assert captured.startswith("line 0.1 0.2 0 1")
    rows = read_rows(tmp_path / "out" / "orbit.csv")
    assert len(rows) == 1  # header only: empty orbit
    assert (tmp_path / "out" / "orbit.svg").exists()


def test_trace_orbit_svg_and_csv(tmp_path):
    write(tmp_path, "disk.body", DISK)
    cfg = write(tmp_path, "t.cfg", (
        "experiment = trace\nbody_k = disk.body\nbody_t = disk.body\n"
        "line_point = 0 0\nline_direction = 1 0\nsteps = 4\n"))
    rc = main(["trace", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "orbit.csv")
    assert len(rows) == 5
    assert rows[0][-1] == "length_convention"
    assert rows[1][-1] == "directed-chord"
    svg = (tmp_path / "out" / "orbit.svg").read_text()
    assert svg.startswith("<svg") and "path" in svg


def test_projtest_ellipse_all_below_tolerance(tmp_path, capsys):
    write(tmp_path, "e.body", ELLIPSE)
    cfg = write(tmp_path, "p.cfg", (
        "experiment = projtest\nbody = e.body\nclasses = 5\n"
        "patch_scale = 0.3\nquadruples = 20\n"))
    rc = main(["projtest", "--config", str(cfg), "--seed", "5",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "projtest.csv")
    assert rows[0] == ["body_id", "direction_class", "patch_scale",
                       "residual", "fitted_exponent", "fitted_coefficient"]
    for row in rows[1:]:
        assert float(row[3]) <= 1e-7


def test_projtest_superellipse_detects_nonquadric(tmp_path):
    write(tmp_path, "s.body", SUPERELLIPSE)
    cfg = write(tmp_path, "p.cfg", (
        "experiment = projtest\nbody = s.body\nclasses = 8\n"
        "patch_scale = 0.3\nquadruples = 20\n"))
    rc = main(["projtest", "--config", str(cfg), "--seed", "5",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "projtest.csv")
    residuals = [float(r[3]) for r in rows[1:]]
    assert max(residuals) >= 1e-3
    # asymptotic columns: deviation from the osculating-conic involution
    # carries the fourth-order law for non-quadric bodies
    fitted = [float(r[4]) for r in rows[1:] if r[4]]
    assert fitted
    assert sum(1 for k in fitted if 3.5 <= k <= 4.5) >= len(fitted) * 2 // 3


def test_capacity_command_prints_value(tmp_path, capsys):
    write(tmp_path, "disk.body", DISK)
    cfg = write(tmp_path, "c.cfg", (
        "experiment = capacity\nbody_k = disk.body\nbody_t = disk.body\n"
        "m_max = 3\nmultistarts = 8\n"))
    rc = main(["capacity", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "capacity 4.0000" in out
    rows = read_rows(tmp_path / "out" / "capacity.csv")
    assert rows[0] == ["m", "best_action", "stationarity_residual"]
    assert abs(float(rows[1][1]) - 4.0) <= 1e-4


def test_osculate_command_planar_and_surface(tmp_path):
    planar = write(tmp_path, "g2.body",
                   "kind = graph_germ\ndim = 2\nc[2] = 0.5\nc[5] = 0.01\n")
    cfg = write(tmp_path, "o2.cfg", "experiment = osculate\ngerm = g2.body\n")
    rc = main(["osculate", "--config", str(cfg), "--out", str(tmp_path / "o2")])
    assert rc == 0
    fits = read_rows(tmp_path / "o2" / "fits.csv")
    assert fits[1][0] == "quintic_gap"
    assert abs(float(fits[1][1]) - 0.01) < 1e-6

    surface = write(tmp_path, "g3.body", (
        "kind = graph_germ\ndim = 3\nc[2,0] = 1.0\nc[1,1] = 0.4\n"
        "c[0,2] = 0.7\nc[2,1] = 0.3\nc[3,1] = 0.05\nc[5,0] = 0.01\n"))
    cfg3 = write(tmp_path, "o3.cfg", "experiment = osculate\ngerm = g3.body\n")
    rc = main(["osculate", "--config", str(cfg3), "--out", str(tmp_path / "o3")])
    assert rc == 0
    fits3 = {r[0]: r for r in read_rows(tmp_path / "o3" / "fits.csv")[1:]}
    assert 2.8 <= float(fits3["normal_gap"][1]) <= 3.5
    assert 3.8 <= float(fits3["angle_gap"][1]) <= 4.2
    coeffs = read_rows(tmp_path / "o3" / "osculate.csv")
    assert coeffs[0] == ["object", "i", "j", "value"]
    assert len(coeffs) > 6


def test_sweep_command(tmp_path):
    cfg = write(tmp_path, "s.cfg", (
        "experiment = sweep\nexponents = 2.0 3.0 4.0\nclasses = 4\n"
        "patch_scale = 0.3\n"))
    rc = main(["sweep", "--config", str(cfg), "--seed", "3",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    rows = read_rows(tmp_path / "out" / "sweep.csv")
    assert [r[0] for r in rows[1:]] == ["2", "3", "4"]
    res = [float(r[1]) for r in rows[1:]]
    assert res[0] <= 1e-10          # the circle is a quadric
    assert res[2] >= 1e-3           # the quartic superellipse is not
    assert res[1] >= res[0]
    assert (tmp_path / "out" / "sweep.svg").exists()


def test_rerun_is_byte_identical(tmp_path):
    write(tmp_path, "s.body", SUPERELLIPSE)
    write(tmp_path, "disk.body", DISK)
    configs = {
        "projtest": ("experiment = projtest\nbody = s.body\nclasses = 4\n"
                     "patch_scale = 0.3\nquadruples = 15\nseed = 11\n",
                     "projtest.csv"),
        "capacity": ("experiment = capacity\nbody_k = disk.body\n"
                     "body_t = disk.body\nm_max = 3\nmultistarts = 6\n",
                     "capacity.csv"),
        "sweep": ("experiment = sweep\nexponents = 2.0 4.0\nclasses = 3\n"
                  "patch_scale = 0.3\nseed = 2\n", "sweep.csv"),
    }
    for command, (text, artifact) in configs.items():
        cfg = write(tmp_path, f"{command}.cfg", text)
        rc1 = main([command, "--config", str(cfg),
                    "--out", str(tmp_path / command / "a")])
        rc2 = main([command, "--config", str(cfg),
                    "--out", str(tmp_path / command / "b")])
        assert rc1 == rc2 == 0
        a = (tmp_path / command / "a" / artifact).read_bytes()
        b = (tmp_path / command / "b" / artifact).read_bytes()
        assert a == b, command


def test_config_errors_exit_one(tmp_path, capsys):
    missing = main(["capacity", "--config", str(tmp_path / "nope.cfg")])
    assert missing == 1
    bad = write(tmp_path, "bad.cfg", "experiment = capacity\nm_max = 3\n")
    assert main(["capacity", "--config", str(bad)]) == 1
    mismatched = write(tmp_path, "m.cfg", "experiment = trace\n")
    assert main(["capacity", "--config", str(mismatched)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err


def test_numeric_failures_exit_two(tmp_path, capsys):
    write(tmp_path, "disk.body", DISK)
    cfg = write(tmp_path, "r.cfg", (
        "experiment = reflect\nbody_k = disk.body\nbody_t = disk.body\n"
        "line_point = 0 5\nline_direction = 1 0\n"))  # line misses the disk
    rc = main(["reflect", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert rc == 2
    assert "numeric failure" in capsys.readouterr().err
