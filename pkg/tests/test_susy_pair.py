import numpy as np
import pytest

from susyband import numerics as nm
from susyband.bloch import BlochField, MomentumGrid
from susyband.errors import GapClosed
from susyband.models import chiral_sc, random_supercharge
from susyband.supercharge import Supercharge, from_hf_general
from susyband.susy_pair import (boson_covariance, build_pair, identification_maps, spectral_duality_report,
                                validate_pair, zhb_spectrum)


def test_flat_band_pair():
    g = MomentumGrid((8,))
    q = Supercharge(BlochField.constant(g, np.eye(2), "supercharge"))
    pair = build_pair(q)
    np.testing.assert_allclose(pair.h_f.values[0], nm.SZ)
    np.testing.assert_allclose(pair.h_b.values[0], np.eye(2))
    np.testing.assert_allclose(pair.epsilon, 1.0)
    maps = identification_maps(pair)
    np.testing.assert_allclose(maps.J_f().values[0], -1j * nm.SZ, atol=1e-15)
    np.testing.assert_allclose(boson_covariance(pair).values[0], np.eye(2), atol=1e-15)


def test_kitaev_pair(kitaev60):
    km, pair, _ = kitaev60
    np.testing.assert_allclose(pair.epsilon[:, 0], km.epsilon, atol=1e-12)
    rep = validate_pair(pair)
    assert rep.duality <= 1e-12
    assert rep.phs_f <= 1e-12 and rep.phs_b <= 1e-12
    assert rep.complex_structure <= 1e-12
    assert rep.boson_frame <= 1e-12


def test_complex_structures_match_closed_forms(kitaev60):
    _, pair, _ = kitaev60
    maps = identification_maps(pair)
    sign_h = nm.mat_func(pair.h_f.values, "sign")
    assert nm.max_abs(maps.J_f().values + 1j * sign_h) <= 1e-12
    G = boson_covariance(pair).values
    assert nm.max_abs(1j * maps.J_b().values @ nm.Z(1) - G) <= 1e-12
    assert np.min(np.linalg.eigvalsh(G)) > 0


@pytest.mark.parametrize("seed", range(3))
def test_random_pairs_duality(seed):
    q = random_supercharge("none", 2, 2, seed, (16,))
    pair = build_pair(q)
    assert spectral_duality_report(pair) <= 1e-10
    zs = zhb_spectrum(pair)
    np.testing.assert_allclose(zs[..., 2:], pair.epsilon, atol=1e-10)
    rep = validate_pair(pair)
    assert rep.complex_structure <= 1e-10 and rep.boson_frame <= 1e-10


def test_chiral_pair_2d():
    pair = build_pair(from_hf_general(chiral_sc(1.0, 16, 16).h_f))
    assert validate_pair(pair).duality <= 1e-12


def test_gapless_pair_rejected():
    g = MomentumGrid((8,))
    vals = np.zeros((8, 2, 2), dtype=complex)
    vals[:] = np.eye(2)
    vals[3] = np.diag([1.0, 0.0])
    with pytest.raises(GapClosed):
        build_pair(Supercharge(BlochField(g, vals, "supercharge")))


def test_spectrum_csv(kitaev60):
    _, pair, _ = kitaev60
    lines = pair.spectrum_csv().splitlines()
    assert lines[0] == "k_index_1,alpha,epsilon"
    assert len(lines) == 61
    idx, alpha, eps = lines[1].split(",")
    assert (idx, alpha) == ("0", "0") and float(eps) == pytest.approx(2.4)
