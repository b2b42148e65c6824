import json
import math

import numpy as np
import pytest

import gradmatch


def test_generate_defaults():
    data = gradmatch.generate(seed=3)
    assert data.model == "oscillator"
    assert len(data.times) == 41
    assert data.times[0] == 0.0 and data.times[-1] == 50.0
    assert data.values.shape == (41, 1)
    again = gradmatch.generate(seed=3)
    assert np.array_equal(data.values, again.values)
    assert data.to_csv() == again.to_csv()


def test_noiseless_data_matches_closed_form():
    data = gradmatch.generate(sigma=0.0)
    exact = gradmatch.oscillator_analytic(data.times, k=1.0, c=0.2, m=1.0)
    assert np.max(np.abs(data.values[:, 0] - exact)) < 1e-6


def test_oscillator_fit():
    result = gradmatch.fit(gradmatch.generate(seed=1))
    assert result.param_names == ["k", "c", "m"]
    assert result.theta0 == [2.0, 0.5, 2.0]
    assert np.allclose(result.theta_hat, [1.0, 0.2, 1.0], atol=0.2)
    trace = result.trace
    assert len(trace) == result.iterations + 1
    assert trace[0]["w"] == 0.0 and trace[1]["w"] == 0.01
    assert len(result.fine_grid) == 206
    assert result.spline_values.shape == (206, 1)
    doc = json.loads(result.to_json())
    assert doc["theta_hat"] == result.theta_hat
    assert result.trace_csv().startswith("n,w,k,c,m,")


def test_slice_peaks_at_the_estimate():
    result = gradmatch.fit(gradmatch.generate(seed=2))
    s = result.slice("k")
    assert len(s["axes"][0]) == 51
    assert max(s["values"]) == 0.0
    assert s["local_maxima"] == 1
    assert s["threshold"] == pytest.approx(-1.920729, abs=1e-5)


def test_lotka_volterra_grid():
    cfg = gradmatch.config(model="lotka-volterra", seed=4)
    result = gradmatch.fit(gradmatch.generate(cfg), cfg)
    assert result.converged
    assert np.allclose(result.theta_hat, [1.0, 1.0], atol=0.15)
    g = result.grid("alpha", "delta", points=11)
    assert len(g["values"]) == 121
    assert g["threshold"] == pytest.approx(-2.995732, abs=1e-5)
    assert result.loglik(result.theta_hat) == pytest.approx(g["loglik_at_mle"])


def test_user_dataset_and_files(tmp_path):
    t = np.linspace(0.0, 15.0, 41)
    values = np.column_stack([1.0 + 0.1 * np.sin(t), 1.0 + 0.1 * np.cos(t)])
    data = gradmatch.Dataset(list(t), values)
    path = tmp_path / "data.csv"
    data.save(str(path))
    loaded = gradmatch.load_dataset(str(path))
    assert np.array_equal(loaded.values, values)


def test_errors():
    with pytest.raises(KeyError):
        gradmatch.config(n_pints=3)
    with pytest.raises(ValueError):
        gradmatch.generate(model="sir")
    with pytest.raises(ValueError):
        gradmatch.fit(gradmatch.generate(), w_initial=0.0)
    with pytest.raises(ValueError):
        gradmatch.Dataset([0.0, 1.0], np.zeros((3, 1)))
    result = gradmatch.fit(gradmatch.generate(seed=5))
    with pytest.raises(gradmatch.ParameterBoundsError):
        result.loglik([100.0, 0.2, 1.0])
    with pytest.raises(ValueError):
        result.slice("q")
    assert gradmatch.chi2_threshold(2) == pytest.approx(-math.log(20.0))
