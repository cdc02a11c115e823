import pytest

from memsl_imaging.config import ConfigError, build_config, config_keys, load_config, parse_config_text
from memsl_imaging.io import csv_text, write_csv


def test_defaults_are_the_worked_example():
    cfg = build_config()
    assert (cfg.f_m, cfg.lambda_m, cfg.d_m, cfg.Y_m) == (10e-3, 780e-9, 50.8e-3, 300e-9)
    assert (cfg.protocol, cfg.M, cfg.N, cfg.tau) == ("MEMSL", 8, 6.0, 1.0)
    assert cfg.seed is None


def test_parsing_and_types():
    text = """
    # comment
    source.protocol = coherent
    source.M = 4          # trailing comment
    reconstruction.exact_sum = yes
    optimize.tau_list = 0.2, 0.5,1
    optimize.protocols = MEMSL, coherent
    """
    vals = parse_config_text(text)
    assert vals["source.M"] == 4 and vals["reconstruction.exact_sum"] is True
    cfg = build_config(vals)
    assert cfg.protocol == "Coherent"
    assert cfg.tau_list == [0.2, 0.5, 1.0]
    assert cfg.protocols == ["MEMSL", "Coherent"]


@pytest.mark.parametrize("text", ["source.M = 2.5", "source.M = x", "nonsense", "imaging.f_m = 0",
                                  "source.tau = 0", "simulation.mode = exact", "simulation.object = cat"])
def test_rejections(text):
    with pytest.raises(ConfigError):
        build_config(parse_config_text(text))


def test_explicit_source_excludes_budget():
    cfg = build_config({}, {"source.r": 1.0, "source.alpha": 3.0})
    assert cfg.N is None and cfg.explicit_source
    with pytest.raises(ConfigError, match="mutually exclusive"):
        build_config({"source.N": 6.0, "source.alpha": 3.0})
    with pytest.raises(ConfigError):
        build_config({}, {"source.protocol": "coherent", "source.r": 0.5, "source.alpha": 1.0})


def test_overrides_win(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("source.M = 4\nsimulation.seed = 3\n")
    cfg = load_config(path, {"source.M": 16})
    assert cfg.M == 16 and cfg.seed == 3


def test_echo_round_trip():
    cfg = build_config({}, {"source.tau": 0.7, "simulation.seed": 5, "optimize.tau_list": "0.3, 0.9"})
    again = build_config(parse_config_text(cfg.to_text()))
    assert again == cfg
    assert set(k.split(" =")[0] for k in cfg.to_text().splitlines()) <= set(config_keys())
    assert "output." not in cfg.to_text(include_output=False)


def test_csv_format(tmp_path):
    text = csv_text(("a", "b", "c"), [(0.1, True, "x"), (1e-300, False, 3)])
    assert text == "a,b,c\n0.1,true,x\n1e-300,false,3\n"
    path = write_csv(tmp_path / "t.csv", ("a",), [(1.5,)])
    assert path.read_bytes() == b"a\n1.5\n"
    assert not (tmp_path / "t.csv.tmp").exists()
