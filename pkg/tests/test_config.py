import pytest

from thzcwt.config import (
    PipelineConfig, check_keys, parse_kv, parse_methods, parse_scales, parse_window, phantom_spec_from_kv,
    pipeline_config, sweep_from_kv,
)
from thzcwt.cwt import Boundary, default_scales
from thzcwt.errors import FormatError, SpecError
from thzcwt.phantom import PhantomSpec


def test_parse_kv():
    kv = parse_kv("# header\n a = 1 \n\nb=x, y # trailing\n")
    assert kv == {"a": "1", "b": "x, y"}


@pytest.mark.parametrize("text", ["a 1", "= 3", "a = 1\na = 2"])
def test_parse_kv_errors(text):
    with pytest.raises(FormatError):
        parse_kv(text)


def test_phantom_from_kv_units():
    spec = phantom_spec_from_kv({
        "layers_mm": "3:0.3, 0.2:0.2, 2:0.15", "hole_diameters_mm": "3,5",
        "hole_centers_mm": "5:5, 15:5", "grid_nx": "25", "grid_ny": "12", "clutter_count": "0",
        "spot_waist_mm": "1",
    })
    assert spec.layer_stack[1] == pytest.approx((0.2e-3, 0.2))
    assert spec.hole_diameters_m == pytest.approx((3e-3, 5e-3))
    assert spec.hole_centers_xy_m[1] == pytest.approx((15e-3, 5e-3))
    assert spec.grid_nx == 25 and spec.clutter_count == 0 and spec.spot_waist_m == pytest.approx(1e-3)


def test_phantom_defaults():
    assert phantom_spec_from_kv({}) == PhantomSpec()


@pytest.mark.parametrize("kv", [
    {"hole_diameters_mm": "3"},
    {"grid_nx": "many"},
    {"layers_mm": "3"},
    {"hole_diameters_mm": "3", "hole_centers_mm": "1:1"},
])
def test_phantom_kv_errors(kv):
    with pytest.raises(SpecError):
        phantom_spec_from_kv(kv)


def test_sweep_from_kv():
    sw = sweep_from_kv({"propagation_speed_mps": "3e8"})
    assert sw.freq_span_hz == pytest.approx(90e9)
    assert sw.sweep_period_s == pytest.approx(240e-6)
    assert sweep_from_kv({"n_time_samples": "64"}).n_time_samples == 64


def test_methods():
    assert parse_methods("all") == ("raw", "morlet", "gaussian", "mexican-hat")
    assert parse_methods("Raw, mexican_hat, raw") == ("raw", "mexican-hat")
    with pytest.raises(SpecError):
        parse_methods("haar")
    with pytest.raises(SpecError):
        parse_methods(" , ")


def test_scales():
    assert parse_scales("1, 2,4") == (1.0, 2.0, 4.0)
    assert parse_scales("geom:1:32:16") == pytest.approx(default_scales())
    assert parse_scales("geom:3:3:1") == (3.0,)
    for bad in ("geom:1:2", "geom:0:2:3", "a,b"):
        with pytest.raises(SpecError):
            parse_scales(bad)


def test_window():
    assert parse_window("80:92") == (80, 92)
    for bad in ("80", "a:b"):
        with pytest.raises(SpecError):
            parse_window(bad)


def test_pipeline_config():
    pc = pipeline_config({"input": "v.tvol", "wavelet": "raw,morlet", "boundary": "reflect",
                          "scale_policy": "max", "threshold": "0.4", "z_window": "3:9", "format": "csv"})
    pc.validate()
    assert pc.methods == ("raw", "morlet") and pc.cwt.boundary is Boundary.REFLECT
    assert pc.policy.mode == "max" and pc.threshold.value == 0.4
    assert pc.z_window == (3, 9) and pc.formats == ("csv",)


@pytest.mark.parametrize("kw", [
    {}, {"spec_path": "a", "input_path": "b"}, {"spec_path": "a", "noise_sigma": -1.0},
    {"spec_path": "a", "workers": 0}, {"spec_path": "a", "formats": ("png",)}, {"spec_path": "a", "seed": -2},
])
def test_pipeline_validate(kw):
    with pytest.raises(SpecError):
        PipelineConfig(**kw).validate()


def test_scale_policy_value():
    with pytest.raises(SpecError):
        pipeline_config({"scale_policy": "median"})


def test_check_keys():
    check_keys({"a": 1}, {"a", "b"})
    with pytest.raises(SpecError, match="zz"):
        check_keys({"zz": 1}, {"a"})
