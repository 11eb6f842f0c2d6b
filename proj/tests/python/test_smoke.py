import json
import math

import numpy as np
import pytest

import imethod_lab as lab


def test_gaussian_mass_matches_closed_form():
    u = lab.gaussian(3, 128, 16 * math.pi, amplitude=1.0, width=1.0)
    assert u.shape == (128, 128, 128)
    assert lab.mass(u, 16 * math.pi) == pytest.approx((math.pi / 2) ** 1.5, rel=1e-10)


def test_mass_is_the_trapezoid_sum():
    rng = np.random.default_rng(3)
    u = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    L = 5.0
    assert lab.mass(u, L) == pytest.approx(np.sum(np.abs(u) ** 2) * (L / 16) ** 2, rel=1e-13)


def test_plane_wave_evolution_is_exact():
    G, L = 16, 2 * math.pi
    x = np.arange(G) * L / G
    k, c = 2, 0.7
    u0 = c * np.exp(1j * k * x).astype(complex)
    times, states = lab.evolve(u0, L, dt=1e-3, t_final=0.5, stride=100)
    assert times[0] == 0.0 and times[-1] == pytest.approx(0.5)
    omega = k * k + abs(c) ** 4
    for t, u in zip(times, states):
        assert np.max(np.abs(u - u0 * np.exp(-1j * omega * t))) < 1e-10


def test_mass_conserved_and_identity_operator():
    u0 = lab.rough_field(2, 32, 2 * math.pi, s=0.6, seed=4)
    _, states = lab.evolve(u0, 2 * math.pi, dt=1e-3, t_final=0.1, stride=50)
    m0 = lab.mass(u0, 2 * math.pi)
    assert all(abs(lab.mass(u, 2 * math.pi) / m0 - 1) < 1e-12 for u in states)
    top = 2 * 32 / 2 * math.sqrt(2)
    assert np.array_equal(lab.rough_field(2, 32, 2 * math.pi, s=0.6, seed=4), u0)
    assert np.allclose(lab.apply_i_operator(u0, 2 * math.pi, N=top, s=0.6), u0, atol=1e-13)
    e = lab.energy(u0, 2 * math.pi)
    me = lab.modified_energy(u0, 2 * math.pi, N=top, s=0.6)
    assert me["total"] == pytest.approx(e["total"], rel=1e-12)


def test_checkpoint_round_trip(tmp_path):
    u = lab.rough_field(3, 8, 3.0, s=0.6, seed=9)
    path = tmp_path / "state.nlsf"
    lab.save_checkpoint(u, 3.0, 0.25, path)
    raw = path.read_bytes()
    assert raw[:4] == b"NLSF"
    assert len(raw) == 4 + 4 + 4 + 3 * 4 + 8 + 8 + 16 * 8**3
    back, L, t = lab.load_checkpoint(path)
    assert L == 3.0 and t == 0.25
    assert back.tobytes() == u.tobytes()
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(lab.CheckpointError):
        lab.load_checkpoint(path)


def test_run_check_config(tmp_path):
    cfg = {
        "dimension": 2,
        "grid_points": 16,
        "box_length": 2 * math.pi,
        "dt": 1e-3,
        "t_final": 0.1,
        "snapshot_stride": 10,
        "s": 0.6,
        "N": 4,
        "initial_data": {"kind": "plane_wave", "amplitude": 1.0, "wavevector": [1, 0]},
        "checks": ["exact_plane_wave", "mass_conservation"],
        "output_dir": str(tmp_path / "runs"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    code, out, err = lab.run("check", path)
    assert code == 0, err
    assert "artifacts:" in out

    del cfg["output_dir"]
    path.write_text(json.dumps(cfg))
    code, _, err = lab.run("check", path)
    assert code == 2 and "output_dir" in err
