import json
import math

import pytest

import kspacings as ks


def test_gamma_kernel():
    assert ks.gamma_quantile(1, 0.5) == pytest.approx(math.log(2.0), rel=1e-13)
    assert ks.gamma_cdf(2, 2.0) + ks.gamma_survival(2, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert ks.gamma_log_survival(4, 800.0) == pytest.approx(-781.73417194833910288, rel=1e-13)
    with pytest.raises(ks.DomainError):
        ks.gamma_cdf(0, 1.0)


def test_sampling_is_deterministic():
    first = ks.sample_spacings(2, 100, 7)
    second = ks.sample_spacings(2, 100, 7)
    assert first["w"] == second["w"]
    assert first["n"] == 199
    assert len(first["d"]) == 100
    assert sum(first["d"]) == pytest.approx(1.0, rel=1e-12)


def test_modulus_two_points():
    report = ks.oscillation_modulus([0.75, 0.25], 0.1)
    assert report["lambda"] == pytest.approx(math.sqrt(2.0) * 0.5, rel=1e-15)
    assert ks.brute_force_modulus([0.25, 0.75], 0.1) == pytest.approx(report["lambda"], rel=1e-15)
    with pytest.raises(ks.DomainError):
        ks.oscillation_modulus([0.5], 1.5)


def test_regimes():
    assert ks.erdos_renyi_beta(1.0) == pytest.approx(math.e, rel=1e-12)
    assert ks.h_function(1.0) == pytest.approx(1.215008732893010888, rel=1e-12)
    assert ks.bandwidth("II", 1.0, 10000) == pytest.approx(9.2103403719761827361e-4, rel=1e-13)
    ids = [r["id"] for r in ks.check_conditions("II", 1.0, [1000, 10000], k=2)]
    assert ids[:3] == ["S1", "S2", "S3"]


def test_increment_maps():
    assert ks.psi_increment_sup(2, 1.0, 1e-3)["ratio"] == 1.0
    assert ks.phi_increment_sup(2, 1e-3)["ratio"] == pytest.approx(1.2060549692911996826, rel=1e-11)


def test_run_experiment():
    config = {"regime": "II", "c": 1, "k": 1, "n_grid": [500, 1000], "replicates": 4, "base_seed": 3}
    records, summary = ks.run_experiment(json.dumps(config), threads=2)
    assert records.splitlines()[0].startswith("regime,N,k,n,a_N")
    assert len(records.splitlines()) == 9
    assert summary.splitlines()[0].startswith("regime,N,count")
    assert ks.run_experiment(json.dumps(config))[0] == records
    with pytest.raises(ks.ConfigError):
        ks.run_experiment("{}")
