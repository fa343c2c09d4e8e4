import math
import os
import subprocess
import tempfile

import numpy as np
import pytest

import pytvsar


def test_stability_round_trip():
    theta = np.array([0.4, -0.7, 0.2])
    phi = pytvsar.theta_to_phi(theta)
    back = pytvsar.phi_to_theta(phi)
    assert np.max(np.abs(back - theta)) < 1e-10


def test_pacf_range():
    r = pytvsar.theta_to_pacf(np.array([1.0]))
    assert abs(r[0] - 1.0 / math.sqrt(2.0)) < 1e-12


def test_structure_lags():
    st = pytvsar.SarStructure([1, 12], [2, 2])
    assert st.p_max == 26
    assert st.lags == [1, 2, 12, 13, 14, 24, 25, 26]
    assert st.total_order == 4


def test_white_noise_spectrum():
    st = pytvsar.SarStructure([1], [1])
    om = pytvsar.default_omegas(10)
    f = pytvsar.spectral_density(st, np.zeros(1), 1.0, om)
    assert np.allclose(f, 1.0 / math.pi)


def test_simulate_and_fit():
    y, theta_true = pytvsar.simulate_experiment("exp1-one-lag", T=80, seed=5)
    assert y.shape == (80,)
    assert theta_true.shape == (81, 2)

    draws = pytvsar.fit(y, [1, 12], [1, 1], draws=20, burnin=10, thin=2, seed=9)
    assert len(draws.theta) == 10
    assert draws.theta[0].shape == (81, 2)
    assert len(draws.sigma[0]) == 1
    assert draws.sigma[0][0] > 0
    assert np.all(draws.update_rates > 0)

    again = pytvsar.fit(y, [1, 12], [1, 1], draws=20, burnin=10, thin=2, seed=9)
    assert np.array_equal(draws.theta[0], again.theta[0])


def test_chain_diagnostics():
    rng = np.random.default_rng(3)
    ess, zero = pytvsar.chain_ess(rng.standard_normal(500))
    assert not zero
    assert 300 < ess < 700
    _, zero = pytvsar.chain_ess(np.ones(50))
    assert zero
    assert pytvsar.update_rate(np.array([1.0, 1.0, 2.0])) == 0.5


def test_cli_round_trip():
    cli = os.environ.get("TVSAR_CLI")
    if not cli:
        pytest.skip("TVSAR_CLI not set")
    with tempfile.TemporaryDirectory() as d:
        subprocess.run(
            [cli, "simulate", "--experiment", "exp1-one-lag", "--out", d,
             "-T", "60", "--seed", "2"],
            check=True,
        )
        conf = os.path.join(d, "run.conf")
        with open(conf, "w") as f:
            f.write("model.seasons = 1\nmodel.orders = 1\n"
                    "sampler.draws = 10\nsampler.burnin = 5\n"
                    "sampler.thin = 2\nsampler.seed = 4\n")
        subprocess.run(
            [cli, "fit", "--data", os.path.join(d, "y.csv"),
             "--config", conf, "--out", os.path.join(d, "arch")],
            check=True,
        )
        assert os.path.exists(os.path.join(d, "arch", "manifest.json"))
        out = subprocess.run(
            [cli, "diag", "--archive", os.path.join(d, "arch")],
            check=True, capture_output=True, text=True,
        ).stdout
        assert "update_rate" in out
