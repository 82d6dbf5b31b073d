import numpy as np
import pytest

from superbunch import ConfigError, load_config
from superbunch.config import apply_override, build_config
from superbunch.signal import BandNoise, EomDrive, Sinusoid

FULL = """
[run]
seed = 42
duration_s = 2.0
dt_s = 1e-6

[modulation]
kind = sinusoid
intensity = 1.5
depth = 0.8
frequency_hz = 50e3
phase_rad = 0.1

[speckle]
bandwidth_rad_s = 62831.853
gain = 2.0

[detection]
rate_hz = 3e4
resolution_ns = 2
dark_rate_hz = 10

[correlator]
bin_s = 1e-6
window_s = 5e-4

[analysis]
model = sinusoid_speckle
init_contrast = 0.6

[output]
directory = results
format = binary
write_trace = yes
"""


def _write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_full_config_parses(tmp_path):
    cfg, raw = load_config(_write(tmp_path, FULL))
    assert cfg.seed == 42
    assert cfg.duration_s == 2.0
    assert cfg.dt_s == 1e-6
    assert isinstance(cfg.modulation, Sinusoid)
    assert cfg.modulation.depth == 0.8
    assert cfg.modulation.omega == pytest.approx(2 * np.pi * 50e3)
    assert cfg.speckle.bandwidth == pytest.approx(62831.853)
    assert cfg.speckle.gain == 2.0
    assert cfg.detection.rate_hz == 3e4
    assert cfg.detection.resolution_ns == 2
    assert cfg.detection.dark_rate_hz == 10
    assert cfg.bin_s == 1e-6
    assert cfg.window_s == 5e-4
    assert cfg.analysis_model == "sinusoid_speckle"
    assert cfg.analysis_init == {"init_contrast": 0.6}
    assert cfg.output_format == "binary"
    assert cfg.out_dir == "results"
    assert cfg.write_trace is True
    assert raw["modulation"]["kind"] == "sinusoid"


def test_defaults(tmp_path):
    cfg, _ = load_config(
        _write(tmp_path, "[modulation]\nkind = constant\n"), require=("modulation",)
    )
    assert cfg.seed == 0
    assert cfg.duration_s == 100.0
    assert cfg.dt_s == 1e-5
    assert cfg.window_s == 5e-4
    assert cfg.bin_s == pytest.approx(5e-4 / 500)
    assert cfg.analysis_model is None
    assert cfg.output_format == "text"
    assert cfg.detection.rate_hz == 50e3


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match="wibble"):
        load_config(_write(tmp_path, FULL + "\n[wibble]\nx = 1\n"))


def test_unknown_key_rejected(tmp_path):
    with pytest.raises(ConfigError, match="typo_key"):
        load_config(_write(tmp_path, FULL + "\ntypo_key = 3\n"))


def test_key_wrong_for_modulation_kind(tmp_path):
    text = FULL.replace("kind = sinusoid", "kind = constant")
    with pytest.raises(ConfigError, match="depth"):
        load_config(_write(tmp_path, text))


def test_bad_number_names_key(tmp_path):
    with pytest.raises(ConfigError, match="duration_s"):
        load_config(_write(tmp_path, FULL.replace("duration_s = 2.0", "duration_s = soon")))


def test_missing_required_section(tmp_path):
    with pytest.raises(ConfigError, match="modulation"):
        load_config(_write(tmp_path, "[run]\nseed = 1\n"))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/path.ini")


def test_band_noise_clip_levels(tmp_path):
    base = """
[modulation]
kind = band_noise
intensity = 2.0
cutoff_hz = 200
clip_level = {clip}
quantization_bits = {bits}
"""
    cfg, _ = load_config(
        _write(tmp_path, base.format(clip="realistic", bits="8")), require=("modulation",)
    )
    assert isinstance(cfg.modulation, BandNoise)
    assert cfg.modulation.clip_level == 4.0  # twice the mean
    assert cfg.modulation.quantization_bits == 8
    cfg, _ = load_config(
        _write(tmp_path, base.format(clip="none", bits="none"), "b.ini"),
        require=("modulation",),
    )
    assert cfg.modulation.clip_level is None
    assert cfg.modulation.quantization_bits is None
    cfg, _ = load_config(
        _write(tmp_path, base.format(clip="3.5", bits="none"), "c.ini"),
        require=("modulation",),
    )
    assert cfg.modulation.clip_level == 3.5
    with pytest.raises(ConfigError, match="clip_level"):
        load_config(
            _write(tmp_path, base.format(clip="sometimes", bits="none"), "d.ini"),
            require=("modulation",),
        )


def test_eom_modulation(tmp_path):
    text = """
[modulation]
kind = eom
waveform = noise
vpp = 7.5
frequency_hz = 50e3
"""
    cfg, _ = load_config(_write(tmp_path, text), require=("modulation",))
    assert isinstance(cfg.modulation, EomDrive)
    assert cfg.modulation.vpp == 7.5
    assert cfg.modulation.waveform == "noise"


def test_model_value_errors_become_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, FULL.replace("depth = 0.8", "depth = 1.4")))
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, FULL.replace("rate_hz = 3e4", "rate_hz = -1")))


def test_sweep_section(tmp_path):
    text = FULL + "\n[sweep]\nparameter = modulation.depth\nvalues = 0.2, 0.5, 1.0\n"
    cfg, raw = load_config(_write(tmp_path, text))
    assert cfg.sweep.parameter == "modulation.depth"
    assert cfg.sweep.values == ("0.2", "0.5", "1.0")
    out = apply_override(raw, "modulation.depth", "0.5")
    assert out["modulation"]["depth"] == "0.5"
    assert raw["modulation"]["depth"] == "0.8"  # original untouched


def test_sweep_validation(tmp_path):
    with pytest.raises(ConfigError, match="parameter"):
        load_config(_write(tmp_path, FULL + "\n[sweep]\nparameter = nodots\nvalues = 1\n"))
    with pytest.raises(ConfigError, match="values"):
        load_config(_write(tmp_path, FULL + "\n[sweep]\nparameter = run.seed\nvalues = ,\n"))


def test_analysis_model_choices(tmp_path):
    with pytest.raises(ConfigError, match="model"):
        load_config(_write(tmp_path, FULL.replace("model = sinusoid_speckle", "model = parabola")))


def test_bool_parsing(tmp_path):
    with pytest.raises(ConfigError, match="write_trace"):
        load_config(_write(tmp_path, FULL.replace("write_trace = yes", "write_trace = maybe")))


def test_empty_config_defaults():
    cfg = build_config({}, require=())
    assert cfg.seed == 0
    assert cfg.window_s == 5e-4
