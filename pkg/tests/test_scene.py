import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from starcr.scene import (ConfigError, SystemConfig, _cn, _link, draw_scene,
                          equivalent_noise_power, generate_channels, load_config,
                          make_geometry, parse_quantity, path_loss)


# -- path loss ---------------------------------------------------------------

def test_path_loss_reference_distance():
    assert path_loss(1.0, 3.9, 1e-3) == pytest.approx(1e-3, rel=1e-15)


def test_path_loss_power_law():
    assert path_loss(10.0, 2.0, 1e-3) == pytest.approx(1e-5, rel=1e-15)


def test_path_loss_independent_evaluation():
    expected = 1e-3 * math.exp(-2.1 * math.log(30.0))
    assert path_loss(30.0, 2.1, 1e-3) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_path_loss_rejects_nonpositive_distance(d):
    with pytest.raises(ValueError):
        path_loss(d, 2.0)


# -- configuration -------------------------------------------------------------

def test_quantity_parsing():
    assert parse_quantity("20dBm") == pytest.approx(0.1)
    assert parse_quantity("-30dB") == pytest.approx(1e-3)
    assert parse_quantity("-90 dBm") == pytest.approx(1e-12)
    assert parse_quantity("0.5W") == 0.5
    assert parse_quantity(3) == 3.0
    with pytest.raises(ConfigError):
        parse_quantity("ten watts")


def test_default_config_matches_simulation_table():
    c = SystemConfig()
    assert (c.M_s, c.M_p, c.U_s, c.U_p) == (4, 4, 2, 2)
    assert c.P_s == pytest.approx(0.1)          # 20 dBm
    assert c.P_p == pytest.approx(1.0)          # 30 dBm
    assert c.sigma_s_sq == pytest.approx(1e-13)  # -100 dBm
    assert c.C_0 == pytest.approx(1e-3)
    assert (c.alpha_SR, c.alpha_PR, c.alpha_RU, c.alpha_SU, c.alpha_PU) == (2.1, 3.6, 2.3, 3.9, 3.9)
    assert c.kappa_r == 5 and c.kappa_d == 0
    assert c.pos_pbs == (0.0, -50.0) and c.pos_sbs == (0.0, 0.0) and c.pos_ris == (0.0, 30.0)


@pytest.mark.parametrize("bad", [dict(M_s=0), dict(N=-1), dict(L=0), dict(P_s=-1.0),
                                 dict(sigma_s_sq=0.0), dict(Gamma=0.0), dict(kappa_r=-1),
                                 dict(Gamma=(1e-12, 1e-12, 1e-12)), dict(noise_model="x")])
def test_invalid_config_rejected(bad):
    with pytest.raises(ConfigError):
        SystemConfig(**bad)


def test_load_config_from_yaml(tmp_path):
    p = tmp_path / "scene.yaml"
    p.write_text("P_s: 10dBm\nGamma: -80dBm\nN: 12\nC_0: -30dB\n", encoding="utf-8")
    c = load_config(p)
    assert c.P_s == pytest.approx(0.01) and c.N == 12
    assert c.Gamma == pytest.approx(1e-11) and c.C_0 == pytest.approx(1e-3)
    p.write_text("bogus_key: 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(p)


def test_config_round_trip_through_mapping():
    c = SystemConfig(N=6, Gamma=(1e-12, 2e-12))
    assert SystemConfig.from_mapping(c.to_mapping()) == c


# -- geometry ------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(L=st.integers(1, 6), K=st.integers(0, 6), seed=st.integers(0, 2**31 - 1))
def test_geometry_sides_and_radius(L, K, seed):
    cfg = SystemConfig(L=L, K=K, Gamma=1e-12)
    g = make_geometry(cfg, seed)
    ris = np.array(cfg.pos_ris)
    assert sorted(g.L_t + g.L_r) == list(range(L)) and not set(g.L_t) & set(g.L_r)
    assert sorted(g.K_t + g.K_r) == list(range(K)) and not set(g.K_t) & set(g.K_r)
    if L % 2 == 0:
        assert len(g.L_t) == len(g.L_r) == L // 2
    if K % 2 == 0:
        assert len(g.K_t) == len(g.K_r) == K // 2
    for pos in np.vstack([g.su_pos, g.pu_pos.reshape(-1, 2)]):
        assert np.hypot(*(pos - ris)) == pytest.approx(cfg.user_radius, rel=1e-12)
    # reflection side faces the SBS, transmission side faces away
    normal = np.array(cfg.pos_sbs) - ris
    for pos, side in zip(np.vstack([g.su_pos, g.pu_pos.reshape(-1, 2)]), g.su_side + g.pu_side):
        proj = float(np.dot(pos - ris, normal))
        assert proj > 0 if side == "r" else proj < 0


# -- channels ------------------------------------------------------------------

def test_channels_reproducible_and_shaped():
    cfg = SystemConfig(N=6, L=2, K=2)
    g1, c1 = draw_scene(cfg, 11)
    g2, c2 = draw_scene(cfg, 11)
    for a, b in [(c1.G_s, c2.G_s)] + list(zip(c1.D_l + c1.G_l + c1.Dhat_k + c1.G_k,
                                                 c2.D_l + c2.G_l + c2.Dhat_k + c2.G_k)):
        assert np.array_equal(a, b)
    assert c1.G_s.shape == (6, cfg.M_s)
    assert all(D.shape == (cfg.U_s, cfg.M_s) for D in c1.D_l)
    assert all(G.shape == (cfg.U_s, 6) for G in c1.G_l)
    assert all(D.shape == (cfg.U_p, cfg.M_s) for D in c1.Dhat_k)
    assert all(G.shape == (cfg.U_p, 6) for G in c1.G_k)
    assert np.all(c1.sigma_l_sq >= cfg.sigma_s_sq)
    _, c3 = draw_scene(cfg, 12)
    assert not np.array_equal(c1.G_s, c3.G_s)


def test_surface_draws_are_nested_in_N():
    small, large = SystemConfig(N=4), SystemConfig(N=7)
    _, a = draw_scene(small, 9)
    _, b = draw_scene(large, 9)
    assert np.array_equal(a.G_s, b.G_s[:4])
    for x, y in zip(a.G_l + a.G_k, b.G_l + b.G_k):
        assert np.array_equal(x, y[:, :4])
    for x, y in zip(a.D_l + a.Dhat_k, b.D_l + b.Dhat_k):
        assert np.array_equal(x, y)


def test_zero_rician_factor_has_no_los_term():
    rng = np.random.default_rng(5)
    nlos = (rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))) / math.sqrt(2)
    H = _link(nlos, (0, 0), (3, 4), 2.0, 0.0, 1e-3)
    assert np.allclose(H, math.sqrt(1e-3 * 5.0 ** -2.0) * nlos, rtol=0, atol=1e-18)


def test_large_rician_factor_gives_unit_modulus_los():
    H = _link(_cn(0, (4, 4)), (0, 0), (6, 8), 2.0, 1e9, 1e-3)
    pl = 1e-3 * 10.0 ** -2.0
    assert np.allclose(np.abs(H), math.sqrt(pl), rtol=1e-3)


def test_second_moment_equals_path_loss():
    pl = path_loss(12.0, 2.3, 1e-3)
    H = _link(_cn(1, (100, 1000)), (0, 0), (12, 0), 2.3, 5.0, 1e-3)  # 1e5 entries
    assert np.mean(np.abs(H) ** 2) == pytest.approx(pl, rel=0.02)


# -- equivalent noise ------------------------------------------------------------

def test_noise_without_primary_power_is_thermal():
    cfg = SystemConfig(P_p=0.0)
    geo = make_geometry(cfg, 0)
    assert equivalent_noise_power(cfg, geo, "t") == cfg.sigma_s_sq


def test_noise_default_matches_direct_formula():
    cfg = SystemConfig()
    geo = make_geometry(cfg, 0)
    expected = 1e-13 + 1.0 * (1e-3 * 30.0 ** -2.1 + 1e-3 * 10.0 ** -2.3)
    for side in "tr":
        assert equivalent_noise_power(cfg, geo, side) == pytest.approx(expected, rel=1e-13)


def test_noise_affine_in_primary_power():
    cfg = SystemConfig()
    geo = make_geometry(cfg, 0)
    base = cfg.sigma_s_sq
    i1 = equivalent_noise_power(cfg, geo, "r") - base
    i2 = equivalent_noise_power(cfg.replace(P_p=2.0), geo, "r") - base
    assert i2 == pytest.approx(2 * i1, rel=1e-12)


def test_noise_model_variants():
    cfg = SystemConfig()
    geo = make_geometry(cfg, 0)
    pl_pr = 1e-3 * 80.0 ** -3.6
    pl_ri = 1e-3 * 10.0 ** -2.3
    pbs = equivalent_noise_power(cfg.replace(noise_model="pbs"), geo, "t")
    casc = equivalent_noise_power(cfg.replace(noise_model="cascaded"), geo, "t")
    none = equivalent_noise_power(cfg.replace(noise_model="none"), geo, "t")
    assert pbs == pytest.approx(1e-13 + pl_pr + pl_ri, rel=1e-12)
    assert casc == pytest.approx(1e-13 + pl_pr * pl_ri, rel=1e-12)
    assert none == 1e-13
    with pytest.raises(ValueError):
        equivalent_noise_power(cfg, geo, "x")


def test_channels_honour_config_budgets():
    cfg = SystemConfig(P_s=0.5, Gamma=(1e-12, 3e-12))
    _, ch = draw_scene(cfg, 0)
    assert ch.P_s == 0.5
    assert np.allclose(ch.Gamma, [1e-12, 3e-12])
    assert generate_channels(cfg, make_geometry(cfg, 0), 0).N == cfg.N
