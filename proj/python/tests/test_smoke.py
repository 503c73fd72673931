import math

import numpy as np
import pytest

import fuzzytomo as ft


def test_quartz_plate_thicknesses():
    assert ft.plate_thickness("half", 5, 0.65) == pytest.approx(396.097, abs=1e-3)
    assert ft.plate_thickness("quarter", 5, 0.65) == pytest.approx(378.092, abs=1e-3)
    n_o, n_e = ft.refractive_indices(0.65)
    assert n_e - n_o == pytest.approx(ft.birefringence(0.65), rel=1e-14)


def test_idler_and_range_error():
    assert ft.idler_wavelength(0.66, 0.325) == pytest.approx(0.6402985074626866, rel=1e-14)
    with pytest.raises(Exception):
        ft.birefringence(5.0)


def test_waveplate_unitary_is_unitary():
    u = ft.waveplate_unitary(0.7, 0.3)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_haar_state_and_fidelity():
    psi = ft.haar_random_state(4, 11)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert ft.fidelity(psi, psi) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(psi, ft.haar_random_state(4, 11))


def test_protocol_counts_and_completeness():
    cfg = ft.ExperimentConfig()
    cfg.symmetry = ft.Symmetry.cube
    cfg.width_nm = 20.0
    proto = ft.protocol_for(cfg)
    assert proto.num_settings == 9
    assert proto.informationally_complete()
    assert proto.completeness_error() < 1e-10
    cfg.symmetry = ft.Symmetry.octahedron
    assert ft.protocol_for(cfg).num_settings == 16


def test_mle_recovers_state_from_exact_counts():
    cfg = ft.ExperimentConfig()
    cfg.width_nm = 0.0
    ops = ft.protocol_for(cfg).ideal
    psi = ft.haar_random_state(4, 5)
    counts = [[int(round(1e7 * np.real(psi.conj() @ op @ psi))) for op in setting] for setting in ops]
    res = ft.mle_reconstruct(counts, ops)
    assert ft.fidelity(res["state"], psi) > 1 - 1e-6


def test_universal_coefficients_sum_to_predicted_infidelity():
    cfg = ft.ExperimentConfig()
    ops = ft.protocol_for(cfg).fuzzy
    exposures = [1e6 / len(ops)] * len(ops)
    d = ft.universal_coefficients(ft.haar_random_state(4, 3), ops, exposures)
    assert len(d) == 6
    assert all(x > 0 for x in d)


def test_small_campaign_roundtrip():
    cfg = ft.ExperimentConfig.from_dict({"symmetry": "octahedron", "width_nm": 20.0, "n_exp": 6, "seed": 9})
    res = ft.run_campaign(cfg, jobs=2)
    assert len(res.infidelities) == 6
    assert res.efficiency * res.loss == pytest.approx(3.0, rel=1e-12)
    again = ft.run_campaign(cfg, jobs=1)
    assert again.infidelities == res.infidelities
    assert res.summary()["config"]["seed"] == 9
    with pytest.raises(Exception):
        ft.ExperimentConfig.from_dict({"no_such_field": 1})


def test_compare_models_is_paired():
    cfg = ft.ExperimentConfig.from_dict({"width_nm": 20.0, "n_exp": 4})
    cmp = ft.compare_models(cfg)
    assert cmp.paired
    assert cmp.loss_ratio > 10


def test_presets_exposed():
    names = [p["name"] for p in ft.presets()]
    assert "fig6-oct-20nm" in names
    assert all(math.isfinite(p["full_n_exp"]) for p in ft.presets())
