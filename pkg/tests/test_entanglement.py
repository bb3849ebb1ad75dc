import json

import numpy as np
import pytest

from susyband import numerics as nm
from susyband.bloch import MomentumGrid, realspace_matrix
from susyband.entanglement import (SubsystemSpec, dual_subsystem, duality_check, edge_mode_profile,
                                   entropy_scaling_curve, mirror_asymmetry, mirror_ratio, mode_entropy,
                                   pair_structures, report_json, restrict, site_weights, squeezing_commutator)
from susyband.models import kitaev_chain, random_supercharge
from susyband.susy_pair import build_pair


def _sign_oracle(M):
    """Matrix sign of a diagonalizable matrix with real spectrum, by plain eig."""
    w, V = np.linalg.eig(M)
    return V @ np.diag(np.sign(w.real)) @ np.linalg.inv(V)


def _halves(mu):
    mu = np.sort(mu)
    m = len(mu) // 2
    return np.sort(0.5 * (mu[::-1][:m] - mu[:m]))


def test_mode_entropy_values():
    assert mode_entropy(1.0, "fermion") == 0.0
    assert mode_entropy(0.0, "fermion") == pytest.approx(np.log(2))
    assert mode_entropy(1.0, "boson") == 0.0
    assert mode_entropy(3.0, "boson") == pytest.approx(2 * np.log(2))
    assert mode_entropy(np.inf, "boson") == np.inf
    with pytest.raises(ValueError):
        mode_entropy(1.5, "fermion")
    with pytest.raises(ValueError):
        mode_entropy(0.5, "boson")


def test_fermion_restriction_against_projector_oracle(kitaev60):
    _, pair, st = kitaev60
    S = _sign_oracle(realspace_matrix(pair.h_f))
    sub = SubsystemSpec.contiguous(pair.grid, 1, 12, 5)
    A = sub.indices()
    expect = _halves(np.linalg.eigvalsh(0.5 * (S[np.ix_(A, A)] + S[np.ix_(A, A)].conj().T)))
    np.testing.assert_allclose(restrict(st.J_f, sub).lambdas, expect, atol=1e-12)


def test_boson_restriction_against_covariance_oracle(kitaev60):
    _, pair, st = kitaev60
    hb = realspace_matrix(pair.h_b)
    Zf = np.diag(np.r_[np.ones(60), -np.ones(60)])
    G = _sign_oracle(hb @ Zf) @ Zf
    sub = SubsystemSpec.contiguous(pair.grid, 1, 10, 0)
    A = sub.indices()
    ev = np.linalg.eigvals(Zf[np.ix_(A, A)] @ G[np.ix_(A, A)]).real
    expect = np.sort(np.abs(ev))[::2]
    rep = restrict(st.J_b, sub)
    np.testing.assert_allclose(rep.lambdas, expect, rtol=1e-9)
    assert np.all(rep.lambdas >= 1 - 1e-12)


def test_product_state_has_no_entanglement():
    pair = build_pair(kitaev_chain(3.0, 0.0, 16).q_closed)
    st = pair_structures(pair)
    sub = SubsystemSpec.contiguous(pair.grid, 1, 5)
    for J in (st.J_f, st.J_b):
        rep = restrict(J, sub)
        np.testing.assert_allclose(rep.lambdas, 1.0, atol=1e-12)
        assert rep.total == pytest.approx(0.0, abs=1e-10)


def test_basis_and_site_subsystems_agree(kitaev60):
    _, pair, st = kitaev60
    sub = SubsystemSpec.contiguous(pair.grid, 1, 6, 3)
    as_basis = SubsystemSpec(pair.grid, 1, basis=sub.rows())
    np.testing.assert_allclose(restrict(st.J_f, sub).lambdas, restrict(st.J_f, as_basis).lambdas, atol=1e-12)


@pytest.mark.parametrize("l", [4, 8, 12])
def test_duality_kitaev(kitaev60, l):
    _, pair, st = kitaev60
    res = duality_check(st.J_f, st.J_b, st.maps, SubsystemSpec.contiguous(pair.grid, 1, l))
    assert res.max_deviation <= 1e-10
    assert res.diverged_count == 0


def test_duality_random_two_orbitals():
    pair = build_pair(random_supercharge("none", 2, 1, 5, (24,)))
    st = pair_structures(pair)
    res = duality_check(st.J_f, st.J_b, st.maps, SubsystemSpec.contiguous(pair.grid, 2, 5, 7))
    assert res.max_deviation <= 1e-9


def test_dual_subsystem_round_trip(kitaev60):
    _, pair, st = kitaev60
    sub = SubsystemSpec.contiguous(pair.grid, 1, 4)
    back = dual_subsystem(st.maps, dual_subsystem(st.maps, sub, "f->b"), "b->f")
    # L1 L2 = J_f, so the round trip is the subsystem rotated by J_f
    np.testing.assert_allclose(back.rows(), sub.rows() @ st.J_f.J, atol=1e-12)
    assert sub.conjugation_defect() < 1e-14


def test_edge_mode_and_squeezing(kitaev60):
    _, pair, st = kitaev60
    sub = SubsystemSpec.contiguous(pair.grid, 1, 20)
    mode = edge_mode_profile(st.J_f, sub)
    norm = np.sum(np.abs(mode.alpha) ** 2 + np.abs(mode.beta) ** 2)
    assert norm == pytest.approx(1.0)
    com = squeezing_commutator(st.maps, mode)
    assert com == pytest.approx(mode.lam, rel=1e-8)
    assert 5e-5 <= com <= 5e-4
    wf = site_weights(mode.w, pair.grid, 1)
    assert mirror_ratio(wf, mode.sites, 60) == pytest.approx(1.0, abs=1e-8)
    assert mirror_asymmetry(wf, mode.sites, 60) < 1e-8


def test_trivial_edge_mode_not_squeezed():
    pair = build_pair(kitaev_chain(3.0, 0.7, 60).q_closed)
    st = pair_structures(pair)
    mode = edge_mode_profile(st.J_f, SubsystemSpec.contiguous(pair.grid, 1, 20))
    assert mode.lam > 0.5


def test_scaling_curve(kitaev60):
    _, pair, st = kitaev60
    curve = entropy_scaling_curve(pair, [20, 24, 28], structures=st)
    assert np.ptp(curve.S_f) < 1e-3
    assert np.all(np.diff(curve.S_b) > 0)
    lines = curve.to_csv().splitlines()
    assert lines[0] == "l,S_f,S_b" and len(lines) == 4


def test_report_json(kitaev60):
    _, pair, st = kitaev60
    rep = restrict(st.J_b, SubsystemSpec.contiguous(pair.grid, 1, 3))
    d = report_json(rep)
    assert d["species"] == "boson" and d["diverged_count"] == 0
    assert len(d["lambdas"]) == 3
    assert json.loads(rep.to_json()) == d


def test_subsystem_validation():
    g = MomentumGrid((8,))
    with pytest.raises(ValueError):
        SubsystemSpec(g, 1)
    with pytest.raises(ValueError):
        SubsystemSpec(g, 1, basis=np.ones((3, 16)))
