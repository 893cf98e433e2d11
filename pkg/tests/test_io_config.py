import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mwgi.config import ExperimentConfig, parse_config, parse_config_string
from mwgi.errors import ConfigError
from mwgi.geometry import Scene, TargetSpec, default_targets
from mwgi.io import (
    read_complex_matrix_csv,
    read_csv,
    read_matrix_csv,
    read_metadata,
    read_pgm,
    save_measurements,
    save_scene,
    write_complex_matrix_csv,
    write_csv,
    write_matrix_csv,
    write_metadata,
    write_pgm,
)
from mwgi.forward import MeasurementSet

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=30)
@given(m=arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=finite))
def test_matrix_csv_round_trip_is_exact(tmp_path_factory, m):
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    write_matrix_csv(path, m)
    np.testing.assert_array_equal(read_matrix_csv(path), m)


def test_complex_csv_round_trip(tmp_path, rng):
    m = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
    write_complex_matrix_csv(tmp_path / "e.csv", m)
    np.testing.assert_array_equal(read_complex_matrix_csv(tmp_path / "e.csv"), m)
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "re_0,im_0,re_1,im_1,re_2,im_2"


def test_csv_format(tmp_path):
    write_csv(tmp_path / "t.csv", [[1, 0.1], [2, 1e-20]], ["a", "b"])
    raw = (tmp_path / "t.csv").read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["a,b", "1,0.10000000000000001", "2,9.9999999999999995e-21"]
    header, data = read_csv(tmp_path / "t.csv")
    assert header == ["a", "b"] and data.shape == (2, 2)


def test_pgm(tmp_path):
    m = np.array([[0.0, 0.5], [1.0, 2.0]])
    write_pgm(tmp_path / "a.pgm", m, vmax=1.0)
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n2 2\n255\n")
    np.testing.assert_array_equal(read_pgm(tmp_path / "a.pgm"), [[0, 128], [255, 255]])
    write_pgm(tmp_path / "b.pgm", m)
    np.testing.assert_array_equal(read_pgm(tmp_path / "b.pgm"), [[0, 64], [128, 255]])
    write_pgm(tmp_path / "z.pgm", np.zeros((2, 3)))
    assert np.all(read_pgm(tmp_path / "z.pgm") == 0)


def test_metadata_round_trip(tmp_path):
    write_metadata(tmp_path / "m.txt", {"a": 1, "b": 0.1, "c": "x"})
    assert read_metadata(tmp_path / "m.txt") == {"a": "1", "b": "0.10000000000000001", "c": "x"}


def test_save_measurements(tmp_path, rng):
    E = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    ms = MeasurementSet(E, E @ [1.0, 0.5], 1.0, 10e-9 + np.arange(3) * 2e-9, (1, 2), seed=4)
    paths = save_measurements(ms, tmp_path)
    assert [p.name for p in paths] == ["measurement_E.csv", "measurement_R.csv", "measurement_meta.txt"]
    np.testing.assert_array_equal(read_complex_matrix_csv(paths[0]), E)
    meta = read_metadata(paths[2])
    assert meta["N"] == "3" and meta["snr_db"] == "none" and meta["seed"] == "4"
    assert float(meta["detection_interval_s"]) == pytest.approx(2e-9)


def test_empty_config_is_all_defaults():
    cfg = parse_config_string("")
    assert cfg == ExperimentConfig()
    assert cfg.signal.bandwidth_hz == 2e9
    assert cfg.signal.center_frequency_hz == 1e9
    assert cfg.signal.pulse_width_s == 3e-6
    assert cfg.sampling.sampling_frequency_hz == 500e6
    assert cfg.signal.carrier().chirp_rate == pytest.approx(2e9 / 3e-6)
    assert cfg.scene.build().shape == (32, 32)
    assert cfg.scene.target_list == default_targets()
    assert default_targets() == [TargetSpec(13, 19, 7, 13), TargetSpec(13, 19, 19, 25)]


def test_full_config(tmp_path):
    text = """
    [signal]
    bandwidth_hz = 1e9   # comment
    mode = constant_frequency
    [geometry]
    n_tx = 8
    spreading_loss = yes
    [scene]
    rows = 10
    cols = 12
    targets = 1:3:2:4; 5:7:5:9:0.5
    [noise]
    snr_db = 0, 5
    seeds = 1;2;3
    [solver]
    method = least_squares
    """
    cfg = parse_config_string("\n".join(l.strip() for l in text.splitlines()))
    assert cfg.signal.bandwidth_hz == 1e9
    assert cfg.signal.carrier().chirp_rate == 0.0
    assert cfg.geometry.n_tx == 8 and cfg.geometry.spreading_loss is True
    assert cfg.scene.targets == (TargetSpec(1, 3, 2, 4), TargetSpec(5, 7, 5, 9, 0.5))
    assert cfg.noise.snr_db == (0.0, 5.0) and cfg.noise.seeds == (1, 2, 3)
    assert cfg.solver.method == "least_squares"


@pytest.mark.parametrize(
    "text,key",
    [
        ("[signal]\nbandwidth_hz = -1\n", "bandwidth_hz"),
        ("[signal]\nbandwidth_hz = lots\n", "bandwidth_hz"),
        ("[signal]\nchirp_rate_hz_per_s = 1e10\n", "chirp_rate_hz_per_s"),
        ("[geometry]\nn_tx = 0\n", "n_tx"),
        ("[geometry]\nbogus = 1\n", "bogus"),
        ("[nonsense]\n", "nonsense"),
        ("[scene]\ntargets = 30:40:0:2\n", "targets"),
        ("[scene]\nscene_file = missing.csv\n", "scene_file"),
        ("[solver]\nmethod = magic\n", "method"),
        ("[noise]\nseeds =\n", "seeds"),
        ("[sampling]\nsampling_frequency_hz = 4e9\n", "sampling_frequency_hz"),
    ],
)
def test_validation_errors_name_the_key(text, key, tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config_string(text, base_dir=tmp_path)
    assert info.value.key == key
    assert key in str(info.value)


def test_parse_error_has_line_number():
    with pytest.raises(ConfigError) as info:
        parse_config_string("[signal]\nbandwidth_hz = 1e9\nthis line is junk\n")
    assert info.value.lineno == 3
    assert "line 3" in str(info.value)
    with pytest.raises(ConfigError) as info:
        parse_config_string("[signal]\nmode = linear_chirp\nmode = linear_chirp\n")
    assert info.value.lineno == 3


def test_scene_file_with_sidecar(tmp_path):
    coef = np.zeros((4, 5))
    coef[1, 2] = 0.7
    save_scene(Scene(coef, 0.02), tmp_path / "s.csv")
    (tmp_path / "exp.ini").write_text("[scene]\nscene_file = s.csv\n")
    cfg = parse_config(tmp_path / "exp.ini")
    scene = cfg.scene.build()
    assert scene.shape == (4, 5) and scene.pixel_size == 0.02
    np.testing.assert_array_equal(scene.coefficients, coef)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.ini")


def test_n_detections_defaults_to_pixel_count():
    cfg = parse_config_string("[scene]\nrows = 4\ncols = 5\n")
    assert cfg.n_detections(cfg.scene.build()) == 20
    cfg = parse_config_string("[sampling]\nn_detections = 7\n")
    assert cfg.n_detections(cfg.scene.build()) == 7
