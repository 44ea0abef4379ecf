import math

import numpy as np
import pytest

import spheredyn as sd
from spheredyn import certificates, products, reports
from spheredyn.errors import SearchExhausted


def test_classify_dim2_identity_offset():
    rep = reports.classify_system(sd.build(np.eye(2), np.array([0.0, 0.5])))
    assert rep["homeo_certified"]
    assert len(rep["fixed_points"]) == 2
    assert rep["distality"]["verdict"] == "nondistal"
    assert rep["expansivity"]["verdict"] == "nonexpansive"
    stabilities = sorted(r["stability"] for r in rep["fixed_points"])
    assert stabilities == ["attracting", "repelling"]


def test_classify_involution_is_distal():
    sys = sd.build(np.diag([1.0, -2.0]), np.array([0.0, math.sqrt(3.0)]))
    rep = reports.classify_system(sys)
    assert rep["involution"]["is_involution"]
    assert rep["distality"]["verdict"] == "distal"
    assert rep.get("all_points_period_le_2")


def test_classify_uncertified_reports_nothing():
    rep = reports.classify_system(sd.build(np.eye(2), np.array([0.0, 1.5])))
    assert not rep["homeo_certified"]
    assert rep["distality"]["verdict"] == "unknown"
    assert rep["fixed_points"] == []


def test_classify_higher_dim_eigen_offset():
    sys = sd.build(np.diag([2.0, 0.5, 0.7]), np.array([0.4, 0.0, 0.0]))
    rep = reports.classify_system(sys)
    assert rep["distality"]["verdict"] == "nondistal"
    assert rep["expansivity"]["verdict"] == "nonexpansive"
    assert "invariant_circle_plane" in rep
    assert len(rep["fixed_points"]) == 4
    witness = certificates.witness_from_dict(rep["distality"]["witness"])
    assert "plane" in witness.data
    assert sd.verify(witness).passed
    # reported points are genuine fixed points of the full map
    for record in rep["fixed_points"]:
        point = np.asarray(record["point"])
        assert np.linalg.norm(sd.apply(sys, point) - point) < 1e-8


def test_classify_higher_dim_rotation_plane_unknown():
    T = np.zeros((4, 4))
    T[:2, :2] = sd.rotation_matrix(math.pi / 3)
    T[2:, 2:] = np.diag([2.0, 0.5])
    sys = sd.build(T, np.array([0.0, 0.5, 0.0, 0.0]))
    rep = reports.classify_system(sys)
    assert rep["fixed_points"] == [] and rep["period2_points"] == []
    assert rep["distality"]["verdict"] == "unknown"
    assert rep["expansivity"]["verdict"] == "nonexpansive"


def test_classify_offset_outside_invariant_planes():
    sys = sd.build(np.diag([2.0, 0.5, -0.7]), np.array([0.2, 0.2, 0.2]))
    rep = reports.classify_system(sys)
    assert rep["distality"]["verdict"] == "unknown"
    assert rep["expansivity"]["verdict"] == "unknown"


def test_certify_nondistal_lifts_restricted_pairs():
    sys = sd.build(np.diag([2.0, 0.5, 0.7]), np.array([0.4, 0.0, 0.0]))
    w = reports.certify_nondistal(sys)
    assert w is not None and w.kind == certificates.NONDISTAL_PAIR
    x = np.asarray(w.data["x"])
    assert x.shape == (3,)
    assert sd.verify(w).passed


def test_certify_nonexpansive_none_when_unaligned():
    sys = sd.build(np.diag([2.0, 0.5, -0.7]), np.array([0.2, 0.2, 0.2]))
    assert reports.certify_nonexpansive(sys) is None


def test_conjugate_only_mode_exhausts_when_uncovered():
    # every conjugate keeps cos(theta) < 0, so the rotation recipe never fires
    with pytest.raises(SearchExhausted):
        sd.conjugate_or_power_search(
            sd.rotation_matrix(2 * math.pi / 3), mode="conjugate"
        )


def test_product_verdict_with_non_pair_witness():
    s1 = sd.build(np.diag([2.0, 0.5]), np.array([0.5, 0.0]))
    s2 = sd.build(np.eye(2), np.array([0.0, 0.5]))
    P = products.assemble([s1, s2])
    _, fp_witness = sd.construct_nondistal_instance(np.diag([2.0, 0.5]))
    verdict = products.product_distality_verdict(
        P,
        [
            products.Verdict(kind=products.NONDISTAL, witness=fp_witness),
            products.Verdict(kind=products.UNKNOWN),
        ],
    )
    # still nondistal by composition, but a fixed-point witness cannot lift
    assert verdict.kind == products.NONDISTAL
    assert verdict.witness is None
    assert "factor 0" in verdict.reason
