import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relmbe.config import FIGURES, PRESETS, auto_n_tau, load_config, parse_config, preset_config
from relmbe.errors import ConfigError

MINIMAL = """
name = "mini"
[sample]
length_rest = 4.2e13
inversion_density_rest = 2e4
[timescales]
t1_rest = 0.1
t2_rest = 1.2e-3
[grid]
n_z = 50
tau_max_rest = 0.01
"""


def _error(text):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    return exc.value


def test_fig1_preset_values():
    cfg = preset_config("fig1-beta0")
    assert cfg.transition_preset == "oh1612"
    assert cfg.transition.lambda_rest == 0.186
    assert cfg.length_rest == 4.2e13
    assert cfg.total_density_rest == 2e4
    assert (cfg.t1_rest, cfg.t2_rest, cfg.beta) == (0.1, 1.2e-3, 0.0)


def test_five_figures():
    assert list(FIGURES) == ["fig1", "fig2", "fig3", "fig4", "fig5"]
    assert all(name in PRESETS for members in FIGURES.values() for name in members)


def test_split_channels_forty_steps():
    cfg = preset_config("fig3-split")
    dv = [ch.dv_rest for ch in cfg.velocity_channels()]
    assert dv[1] - dv[0] == pytest.approx(40 * cfg.dv_fundamental_rest, rel=1e-14)
    assert cfg.dv_fundamental_rest == pytest.approx(0.186 / 0.1)


def test_dv_follows_tau_max():
    a = preset_config("fig3-split")
    b = preset_config("fig3-split", tau_max_rest=0.2)
    assert b.dv_fundamental_rest == pytest.approx(a.dv_fundamental_rest / 2)


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.beta == 0.0 and cfg.transition_preset == "oh1612"
    assert cfg.grid.n_tau == auto_n_tau(0.01, cfg.system().sample.tr_rest, 1.2e-3)
    cfg.system().check_step_size()
    assert cfg.outputs.stem == "mini"


def test_beta_out_of_range():
    err = _error(MINIMAL + "[frame]\nbeta = 1.0\n")
    assert err.kind == "constraint" and err.key == "frame.beta"
    assert "|beta| < 1" in str(err)


def test_unknown_keys():
    err = _error(MINIMAL.replace("t1_rest = 0.1", "t1_rest = 0.1\nt3_rest = 1.0"))
    assert err.kind == "unknown-key" and err.key == "timescales.t3_rest"
    err = _error("bogus = 1\n" + MINIMAL)
    assert err.kind == "unknown-key" and err.key == "bogus"
    err = _error(MINIMAL + "[[channels]]\nk = 1\ndensity = 3\n")
    assert err.kind == "unknown-key"


def test_syntax_error():
    err = _error("name = \n")
    assert err.kind == "syntax"


@pytest.mark.parametrize("edit, key", [
    (("t1_rest = 0.1", "t1_rest = 1e-4"), "timescales.t1_rest"),
    (("n_z = 50", "n_z = 1"), "grid.n_z"),
    (("n_z = 50", "n_z = 5.5"), "grid.n_z"),
    (("length_rest = 4.2e13", "length_rest = -1.0"), "sample.length_rest"),
    (("length_rest = 4.2e13", "length_rest = \"far\""), "sample.length_rest"),
    (("t2_rest = 1.2e-3\n", ""), "timescales.t2_rest"),
])
def test_constraints(edit, key):
    err = _error(MINIMAL.replace(*edit))
    assert err.key == key


def test_channels_and_density_conflict():
    err = _error(MINIMAL + "[[channels]]\nk = 0\ninversion_density_rest = 1e4\n")
    assert err.key == "sample.inversion_density_rest"


def test_channel_offset_beyond_linear_transform():
    text = MINIMAL.replace("inversion_density_rest = 2e4\n", "") + (
        "[[channels]]\nk = 2000000\ninversion_density_rest = 1e4\n")
    assert _error(text).key == "channels"


def test_snapshot_beyond_window():
    err = _error(MINIMAL + "[outputs]\nsnapshot_times = [0.5]\n")
    assert err.key == "outputs.snapshot_times"


def test_preset_override():
    cfg = parse_config('preset = "fig1-beta0"\n[frame]\nbeta = 0.5\n[grid]\nn_z = 100\n')
    assert cfg.beta == 0.5 and cfg.grid.n_z == 100 and cfg.name == "fig1-beta0"
    cfg = parse_config('preset = "fig3-single"\n[sample]\ninversion_density_rest = 1.2e4\n')
    assert cfg.total_density_rest == 1.2e4
    assert _error('preset = "fig9"\n').key == "preset"


def test_explicit_transition():
    text = MINIMAL + "[transition]\nlambda_rest = 0.18\ngamma_sp_rest = 1e-11\n"
    cfg = parse_config(text)
    assert cfg.transition_preset is None and cfg.transition.lambda_rest == 0.18
    assert _error(MINIMAL + "[transition]\nlambda_rest = 0.18\n").key == "transition.gamma_sp_rest"


def test_output_dir_env(monkeypatch):
    monkeypatch.setenv("RELMBE_OUTPUT_DIR", "/tmp/elsewhere")
    assert parse_config(MINIMAL).outputs.directory == "/tmp/elsewhere"
    assert parse_config(MINIMAL + '[outputs]\ndirectory = "here"\n').outputs.directory == "here"


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_preset_round_trip(name):
    cfg = preset_config(name)
    again = parse_config(cfg.to_toml())
    assert again == cfg
    assert again.to_toml() == cfg.to_toml()


def test_auto_steps_frame_invariant():
    counts = {preset_config(f"fig1-{tag}").grid.n_tau for tag in ("beta0", "beta05", "betam05")}
    assert len(counts) == 1
    for tag in ("beta0", "beta05", "betam05"):
        preset_config(f"fig4-{tag}").system().check_step_size()


def test_load_config(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(MINIMAL)
    assert load_config(path).name == "mini"
    assert load_config("fig1-beta05.toml").beta == 0.5
    assert load_config("fig2-betam05").beta == -0.5
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")


@given(
    beta=st.floats(-0.9, 0.9),
    length=st.floats(1e10, 1e15),
    t2=st.floats(1e-5, 1e-2),
    t1_factor=st.floats(1.0, 1e3),
    ks=st.lists(st.integers(-50, 50), min_size=1, max_size=4),
    density=st.floats(1e2, 1e5),
    n_z=st.integers(2, 1000),
    tau_max=st.floats(1e-3, 1.0),
    boundary=st.floats(0.0, 1e-10),
    style=st.sampled_from(["linear", "log"]),
)
def test_random_config_round_trip(beta, length, t2, t1_factor, ks, density, n_z, tau_max, boundary, style):
    chans = "".join(f"[[channels]]\nk = {k}\ninversion_density_rest = {density!r}\n" for k in ks)
    text = (f"name = \"rnd\"\nboundary_intensity = {boundary!r}\n"
            f"[sample]\nlength_rest = {length!r}\n"
            f"[timescales]\nt1_rest = {t2 * t1_factor!r}\nt2_rest = {t2!r}\n"
            f"[frame]\nbeta = {beta!r}\n"
            f"[grid]\nn_z = {n_z}\ntau_max_rest = {tau_max!r}\n"
            f"[outputs]\nplot_style = \"{style}\"\n" + chans)
    cfg = parse_config(text)
    assert parse_config(cfg.to_toml()) == cfg
    assert cfg.system().n_tau == cfg.grid.n_tau
    assert math.isclose(cfg.total_density_rest, density * len(ks), rel_tol=1e-12)
