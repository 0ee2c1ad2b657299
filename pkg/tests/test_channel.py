import numpy as np
import pytest

from pjdetect.channel import (
    ChannelConfig,
    ElaaGeometry,
    compute_weights,
    condition_number,
    dump_realization,
    generate,
    generate_iid,
    generate_ind,
    load_realization,
)
from pjdetect.errors import ConfigError
from pjdetect.numerics import SeededRng


def _ind_cfg(M=64, N=8, S=8, **kw):
    return ChannelConfig(M, N, model="ind", subarrays=S, **kw)


def test_iid_second_moment():
    cfg = ChannelConfig(M=100, N=10, sigma_h_sq=2.0)
    H = np.concatenate([generate_iid(cfg, SeededRng(1, t)).H.ravel() for t in range(100)])
    assert H.size == 100_000
    assert np.mean(np.abs(H) ** 2) * cfg.M / cfg.sigma_h_sq == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(H)) * np.sqrt(cfg.M / cfg.sigma_h_sq) < 0.01
    assert abs(np.mean(H**2)) * cfg.M / cfg.sigma_h_sq < 0.02


def test_ind_second_moment_per_entry():
    cfg = _ind_cfg(M=16, N=4, S=4)
    w = compute_weights(cfg.geometry, 16, 4, 4)
    P = np.zeros((16, 4))
    for t in range(2000):
        P += np.abs(generate_ind(cfg, SeededRng(2, t), w).H) ** 2
    ratio = (P / 2000) * cfg.M / (w * cfg.sigma_h_sq)
    # 128 000 samples pooled; each entry individually has 2000
    assert np.mean(ratio) == pytest.approx(1.0, abs=0.01)
    assert np.max(np.abs(ratio - 1)) < 0.12


@pytest.mark.parametrize("S", [1, 4, 16])
def test_weights_columns_sum_to_M(S):
    w = compute_weights(ElaaGeometry(), 64, 8, S)
    assert np.allclose(w.sum(axis=0), 64, rtol=1e-12, atol=0)
    assert np.all(w > 0)


def test_weights_blockwise_constant_and_near_users_stronger():
    g = ElaaGeometry(user_positions=(0.0, 214.0))
    w = compute_weights(g, 32, 2, 4)
    assert np.all(w[:8] == w[0])
    assert w[0, 0] > w[-1, 0] and w[-1, 1] > w[0, 1]


def test_weights_single_subarray_is_flat():
    assert np.allclose(compute_weights(ElaaGeometry(), 16, 3, 1), 1.0)


def test_weights_bad_geometry():
    with pytest.raises(ConfigError):
        compute_weights(ElaaGeometry(), 10, 2, 3)
    with pytest.raises(ConfigError):
        compute_weights(ElaaGeometry(user_perp_distance=0.0), 8, 2, 2)
    with pytest.raises(ConfigError):
        ElaaGeometry(user_positions=(1.0,)).positions(2)


@pytest.mark.parametrize("kw", [dict(M=2, N=3), dict(M=4, N=0), dict(M=4, N=2, sigma_h_sq=0.0),
                                dict(M=4, N=2, model="los"), dict(M=6, N=2, subarrays=4)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        ChannelConfig(**kw).validate()


def test_hardening_across_M():
    spread = []
    for M in (64, 256, 1024):
        norms = np.concatenate([
            np.sum(np.abs(generate(ChannelConfig(M, 8), SeededRng(3, (M, t))).H) ** 2, axis=0)
            for t in range(200)
        ])
        assert np.mean(norms) == pytest.approx(1.0, abs=0.02)
        spread.append(np.var(norms))
    assert spread[0] > spread[1] > spread[2]
    # Gamma(M, 1/M): variance exactly 1/M
    assert spread[2] == pytest.approx(1 / 1024, rel=0.15)


def _power_iteration_cond(H, iters=3000):
    A = H.conj().T @ H
    v = np.ones(A.shape[0], complex)
    for _ in range(iters):
        v = A @ v
        v /= np.linalg.norm(v)
    lam_max = np.vdot(v, A @ v).real
    Ainv = np.linalg.inv(A)
    v = np.ones(A.shape[0], complex)
    for _ in range(iters):
        v = Ainv @ v
        v /= np.linalg.norm(v)
    lam_min = 1 / np.vdot(v, Ainv @ v).real
    return np.sqrt(lam_max / lam_min)


def test_condition_number_against_power_iteration():
    H = generate(ChannelConfig(32, 8), SeededRng(4, 0)).H
    assert condition_number(H) == pytest.approx(_power_iteration_cond(H), rel=1e-6)
    assert condition_number(np.eye(3)) == pytest.approx(1.0)
    assert condition_number(np.ones((3, 2))) == float("inf")


def test_generation_is_deterministic():
    cfg = _ind_cfg()
    a = generate(cfg, SeededRng(7, 1)).H
    b = generate(cfg, SeededRng(7, 1)).H
    assert np.array_equal(a, b)


def test_dump_roundtrip(tmp_path):
    real = generate(_ind_cfg(M=8, N=3, S=2), SeededRng(5, 0))
    path = tmp_path / "h.csv"
    dump_realization(path, real)
    back = load_realization(path)
    assert np.array_equal(back.H, real.H)
    assert np.array_equal(back.weights, real.weights)
    assert back.config.model == "ind" and back.config.subarrays == 2
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# model=ind")
    assert lines[2].startswith("0,0,") and lines[3].startswith("1,0,")  # column-major


def test_with_users_drops_stale_positions():
    cfg = _ind_cfg(N=2, geometry=ElaaGeometry(user_positions=(1.0, 2.0)))
    assert cfg.with_users(3).geometry.user_positions is None
    assert cfg.with_users(2).geometry.user_positions == (1.0, 2.0)
