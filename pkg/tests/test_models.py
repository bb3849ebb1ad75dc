import numpy as np
import pytest

from susyband import numerics as nm
from susyband.bloch import MomentumGrid, check_phs_supercharge, support_radius, symmetry_check
from susyband.models import (ModelSpec, chiral_sc, kitaev_blocks, kitaev_chain, kitaev_epsilon, kitaev_path,
                             random_class_model, random_supercharge, trivial_two_band_supercharge)
from susyband.supercharge import bdi_hamiltonian, reconstruction_error


def test_kitaev_chain_closed_form():
    km = kitaev_chain(1.0, 0.7, 60)
    assert reconstruction_error(km.q_closed, km.h_f) <= 1e-12
    hb = km.q_closed.h_b().values
    assert nm.max_abs(hb - km.epsilon[:, None, None] * np.eye(2)) <= 1e-12
    assert km.epsilon.min() == pytest.approx(0.4)
    assert km.q_closed.phs_violation() <= 1e-12


def test_kitaev_epsilon_formula():
    k = np.array([0.0, np.pi / 2, np.pi])
    np.testing.assert_allclose(kitaev_epsilon(1.0, 0.7, k), [2.4, np.sqrt(1 + 1.96), 0.4])


def test_kitaev_blocks_reassemble():
    km = kitaev_chain(1.3, 0.4, 32)
    h = bdi_hamiltonian(*kitaev_blocks(1.3, 0.4, 32))
    assert nm.max_abs(h.values - km.h_f.values) <= 1e-14


def test_kitaev_path_endpoints():
    p = kitaev_path(0.7, 1.0, 1.3, 16)
    assert nm.max_abs(p(0.0) - kitaev_chain(1.0, 0.7, 16).h_f.values) == 0
    assert nm.max_abs(p(1.0) - kitaev_chain(1.3, 0.7, 16).h_f.values) <= 1e-15


def test_chiral_sc():
    cm = chiral_sc(1.0, 16, 16)
    assert cm.q_nonlocal.locality == "nonlocal"
    assert cm.q_local is None
    assert symmetry_check("D", cm.h_f)["PHS"] <= 1e-12
    with pytest.raises(ValueError):
        chiral_sc(2.0, 16, 16)


@pytest.mark.parametrize("m", [3.0, -3.0])
def test_trivial_chiral_local_supercharge(m):
    cm = chiral_sc(m, 32, 32)
    assert reconstruction_error(cm.q_local, cm.h_f) <= 1e-12
    assert check_phs_supercharge(cm.q_local.field) <= 1e-12


def test_trivial_two_band_matches_dz_axis():
    g = MomentumGrid((4,))
    z = np.zeros(4)
    q = trivial_two_band_supercharge(g, z, z, 4 * np.ones(4))
    np.testing.assert_allclose(q.h_f().values[0], 4 * nm.SZ, atol=1e-14)


@pytest.mark.parametrize("label", ["none", "A", "BDI", "AIII", "DIII", "CII", "AI", "AII"])
def test_random_supercharge_symmetries(label):
    n = 4 if label == "CII" else 2
    q = random_supercharge(label, n, 1, 3, (16,))
    assert support_radius(q.field) <= 1
    assert q.phs_violation() <= 1e-12


def test_random_supercharge_deterministic():
    a = random_supercharge("none", 2, 2, 11, (16,)).values
    b = random_supercharge("none", 2, 2, 11, (16,)).values
    assert np.array_equal(a, b)
    c = random_supercharge("none", 2, 2, 12, (16,)).values
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("label", ["BDI", "AIII", "CII", "AI", "AII"])
def test_random_class_models(label):
    model = random_class_model(label, 1, 1, 0)
    rep = symmetry_check(label, model.h_f)
    for key, val in rep.items():
        assert val <= 1e-12, key


def test_random_class_model_unknown():
    with pytest.raises(ValueError):
        random_class_model("D", 1, 1, 0)


def test_model_spec_rejects_nan():
    with pytest.raises(ValueError):
        ModelSpec("kitaev", {"mu": float("nan")})
