import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratasa.config import ConfigError, deep_merge, preset, resolve, validate


def small(**over):
    base = {
        "environment": "custom",
        "profile": {"kind": "gaussian_perturbation", "c_mean": 1540.0, "fraction": 0.1,
                    "variance": 30e-6, "z_center": 0.02},
        "array": {"aperture": 0.02, "pitch": 0.25e-3},
        "sources": {"x_range": [-0.005, 0.005], "nx": 3, "z_range": [0.02, 0.03], "nz": 2},
        "f_center": 1e6, "fs": 10e6, "z_max": 0.04, "synth": "marching",
    }
    return deep_merge(base, over)


class TestPresets:
    @pytest.mark.parametrize("env,n,aperture", [("biomedical", 99, 0.100), ("underwater", 70, 190.0),
                                                ("atmospheric", 209, 6000.0)])
    def test_counts(self, env, n, aperture):
        cfg = resolve({"environment": env})
        assert len(cfg.sources.positions) == n
        assert cfg.array.aperture == aperture

    def test_full_biomedical(self):
        cfg = resolve({"environment": "biomedical", "scale": "full"})
        assert len(cfg.sources.positions) == 99 and cfg.fdtd.dx == 0.2e-3

    def test_paper_defaults(self):
        cfg = resolve({"environment": "underwater"})
        assert cfg.window.cosine_fraction == 0.25 and cfg.window.pad_factor == 4
        assert cfg.n_bins == 3 and cfg.dz is None
        assert cfg.fdtd.pml_thickness == 2.0 and cfg.bandwidth_fraction == 0.05

    def test_unknown(self):
        with pytest.raises(ConfigError):
            preset("space")
        with pytest.raises(ConfigError, match="scale"):
            resolve({"environment": "biomedical", "scale": "huge"})


class TestMerge:
    def test_nested(self):
        out = deep_merge({"a": {"b": 1, "c": 2}}, {"a": {"c": 3}})
        assert out == {"a": {"b": 1, "c": 3}}

    def test_profile_kind_replaces(self):
        cfg = resolve({"environment": "biomedical", "profile": {"kind": "constant", "c": 1540.0}})
        assert cfg.profile["kind"] == "constant" and "fraction" not in cfg.profile

    def test_profile_same_kind_merges(self):
        cfg = resolve({"environment": "biomedical", "profile": {"fraction": 0.1}})
        assert cfg.profile["fraction"] == 0.1 and cfg.profile["z_center"] == 0.035

    def test_inputs_untouched(self):
        a, b = {"x": {"y": [1]}}, {"x": {"z": 2}}
        out = deep_merge(a, b)
        out["x"]["y"].append(5)
        assert a == {"x": {"y": [1]}}


class TestValidation:
    @pytest.mark.parametrize("over,path", [
        ({"f_center": -1.0}, "f_center"),
        ({"f_center": 6e6}, "f_center"),
        ({"n_bins": 2}, "n_bins"),
        ({"n_bins": 1.5}, "n_bins"),
        ({"array": {"pitch": 0.0}}, "array.pitch"),
        ({"array": {"pitch": 1.0}}, "array.pitch"),
        ({"window": {"cosine_fraction": 1.5}}, "window.cosine_fraction"),
        ({"correction": "maybe"}, "correction"),
        ({"synth": "kwave"}, "synth"),
        ({"profile": {"kind": "ocean"}}, "profile.kind"),
        ({"profile": {"bogus": 1}}, "profile.bogus"),
        ({"sources": {"x_range": [0, 1], "nx": 0, "z_range": [0.01, 0.02], "nz": 1}}, "sources.nx"),
        ({"fdtd": {"cfl": 1.2}}, "fdtd.cfl"),
        ({"fdtd": {"pml_thickness": 1.0}}, "fdtd.pml_thickness"),
        ({"fdtd": {"order": 8}}, "fdtd.order"),
        ({"seed": -1}, "seed"),
        ({"noise_level": "loud"}, "noise_level"),
        ({"sweep": {"parameter": "colour", "values": [1]}}, "sweep.parameter"),
        ({"sweep": {"parameter": "noise", "values": []}}, "sweep.values"),
        ({"extra": 1}, "extra"),
    ])
    def test_field_errors(self, over, path):
        with pytest.raises(ConfigError) as exc:
            resolve(small(**over))
        assert exc.value.path == path
        assert str(exc.value).startswith(path)

    def test_source_above_array(self):
        with pytest.raises(ConfigError, match=r"sources\[0\]"):
            resolve(small(sources=[[0.0, -0.01]]))

    def test_boolean_is_not_a_number(self):
        with pytest.raises(ConfigError):
            resolve(small(f_center=True))

    def test_explicit_sources(self):
        cfg = resolve(small(sources=[[0.0, 0.02], [0.001, 0.03]]))
        assert cfg.sources.positions == ((0.0, 0.02), (0.001, 0.03))
        cfg = resolve(small(sources={"x": [0.0, 1e-3], "z": [0.02, 0.03, 0.04]}))
        assert len(cfg.sources.positions) == 6 and cfg.sources.positions[1] == (1e-3, 0.02)

    def test_grid_order_x_fastest(self):
        cfg = resolve(small())
        assert cfg.sources.positions[:3] == ((-0.005, 0.02), (0.0, 0.02), (0.005, 0.02))

    def test_tabulated_needs_data(self):
        with pytest.raises(ConfigError, match="tabulated"):
            resolve(small(profile={"kind": "tabulated"}))

    def test_atmosphere_ceiling(self):
        with pytest.raises(ConfigError, match="profile.z_max"):
            resolve({"environment": "atmospheric", "profile": {"z_max": 12000.0}})

    def test_modes(self):
        assert resolve(small()).modes == ("none", "stratified")
        assert resolve(small(correction="none")).modes == ("none",)


class TestRoundTrip:
    @pytest.mark.parametrize("user", [{"environment": "biomedical"}, {"environment": "underwater"},
                                      {"environment": "atmospheric"}, small(),
                                      small(sources=[[0.0, 0.02]], sweep={"parameter": "noise", "values": [0, 1]})])
    def test_resolved_dict_resolves_to_itself(self, user):
        cfg = resolve(user)
        d = json.loads(json.dumps(cfg.to_dict()))
        again = validate(d)
        assert again == cfg
        assert resolve(d) == cfg

    @given(st.floats(0.05e6, 4.9e6), st.integers(0, 2 ** 31), st.sampled_from([1, 3, 5, 7]))
    def test_round_trip_property(self, f, seed, nb):
        cfg = resolve(small(f_center=f, seed=seed, n_bins=nb))
        assert validate(json.loads(json.dumps(cfg.to_dict()))) == cfg
