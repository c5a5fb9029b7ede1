import json

import numpy as np
import pytest

from starcc.certify import (
    FORMAT_VERSION,
    BudgetExhausted,
    Certificate,
    CertificationRefuted,
    ContractionFailure,
    CoverageGap,
    LeafBoundViolation,
    LocalUniquenessCertificate,
    MalformedCertificate,
    RunConfig,
    build_fingerprint,
    certify_all,
    certify_inequality,
    certify_local_uniqueness,
    verify_certificate,
    verify_local_certificate,
)
from starcc.regions import region_plan
from starcc.regions import PairCheck, RegionPlan


@pytest.fixture(scope="module")
def j4_cert():
    return certify_inequality("J4", max_box_width=0.05)


@pytest.fixture(scope="module")
def j9_cert():
    return certify_inequality("J9", max_box_width=0.1, truncation=10.0)


@pytest.fixture(scope="module")
def local_cert():
    return certify_local_uniqueness()


def test_j4_certificate_shape(j4_cert):
    assert j4_cert.region == "J4"
    assert j4_cert.n_leaves() == 46
    assert j4_cert.min_bound == pytest.approx(1.0454212771322322, rel=1e-12)
    assert np.all(j4_cert.bounds > 0.0)
    assert j4_cert.min_bound == j4_cert.bounds.min()
    assert j4_cert.truncation is None
    assert j4_cert.excluded is None  # J4 does not touch B0


def test_truncation_recorded(j9_cert):
    assert j9_cert.truncation == 10.0
    assert j9_cert.excluded == (0.98, 1.02, 0.98, 1.02)
    assert np.all(j9_cert.bounds > 0.0)


def test_certificates_verify(j4_cert, j9_cert):
    assert verify_certificate(j4_cert)
    assert verify_certificate(j9_cert)


def test_certification_is_deterministic(j4_cert):
    again = certify_inequality("J4", max_box_width=0.05)
    a, b = json.loads(again.to_json()), json.loads(j4_cert.to_json())
    a["stats"].pop("wall_seconds")
    b["stats"].pop("wall_seconds")
    assert a == b


def test_payload_round_trip(j4_cert):
    payload = json.loads(j4_cert.to_json())
    assert payload["format"] == FORMAT_VERSION
    back = Certificate.from_payload(payload)
    assert back.to_json() == j4_cert.to_json()
    assert verify_certificate(back)


def test_leaves_are_sorted_canonically(j4_cert):
    order = np.lexsort((j4_cert.hi5, j4_cert.lo5, j4_cert.hi3, j4_cert.lo3))
    assert np.array_equal(order, np.arange(j4_cert.n_leaves()))


def test_tampered_bound_is_rejected(j4_cert):
    payload = json.loads(j4_cert.to_json())
    row = payload["leaves"][3]
    row[5] = (float.fromhex(row[5]) * 1.5).hex()
    bad = Certificate.from_payload(payload)
    with pytest.raises((LeafBoundViolation, ValueError)):
        verify_certificate(bad)


def test_dropped_leaf_breaks_coverage(j9_cert):
    payload = json.loads(j9_cert.to_json())
    del payload["leaves"][10]
    # min_bound might still match, so recompute it honestly
    payload["min_bound"] = min(float.fromhex(r[5]) for r in payload["leaves"]).hex()
    bad = Certificate.from_payload(payload)
    with pytest.raises((CoverageGap, LeafBoundViolation, ValueError)):
        verify_certificate(bad, coverage_samples=16384)


def test_wrong_fingerprint_is_rejected(j4_cert):
    payload = json.loads(j4_cert.to_json())
    payload["fingerprint"] = "0" * 64
    bad = Certificate.from_payload(payload)
    with pytest.raises(ValueError):
        verify_certificate(bad)


def test_truncated_payload_is_malformed(j4_cert):
    payload = json.loads(j4_cert.to_json())
    del payload["leaves"]
    with pytest.raises(MalformedCertificate):
        Certificate.from_payload(payload)


def test_reversed_orientation_refutes():
    plan = region_plan("J3")
    flipped = RegionPlan(
        region=plan.region,
        main=PairCheck(low=plan.main.high, high=plan.main.low),
        bands=None,
        zones=(),
    )
    with pytest.raises(CertificationRefuted):
        certify_inequality("J3", max_box_width=0.1, plan=flipped)


def test_tiny_budget_exhausts():
    with pytest.raises(BudgetExhausted):
        certify_inequality("J7", max_box_width=0.05, max_depth=2)


def test_no_excision_fails_next_to_the_solution():
    with pytest.raises(BudgetExhausted) as err:
        certify_inequality("J16", max_box_width=0.05, delta=0.0, max_depth=8)
    assert "unresolved" in str(err.value)


def test_cleared_denominator_form_used_on_collision_edge():
    # J1 touches r3 = 0 where q_31 straddles zero: some leaves must carry
    # the cleared-denominator form, and they verify bit-exactly too.
    cert = certify_inequality("J1", max_box_width=0.05)
    forms = set(cert.forms.tolist())
    assert "c" in forms and "q" in forms
    assert verify_certificate(cert)


def test_fingerprint_is_stable():
    assert build_fingerprint() == (
        "39793cfd75be4a1ad644798222f1c872de63b04cd6e7a160104eb0640d22bdd9"
    )


# ---------------------------------------------------------------------------
# local uniqueness


def test_local_certificate_contracts(local_cert):
    lc = local_cert
    assert lc.delta == 0.02
    assert lc.containment_margin > 0.0
    assert lc.containment_margin == pytest.approx(0.0016354039811699028, rel=1e-9)
    lo, hi = lc.det_jacobian
    assert lo > 0.0  # interval Jacobian certainly nonsingular
    assert lc.posteriori_residual < 1e-10
    assert lc.ann_lo3.size == 4276
    assert np.all(lc.ann_bound > 0.0)


def test_local_certificate_verifies(local_cert):
    assert verify_local_certificate(local_cert)


def test_local_certificate_round_trip(local_cert):
    payload = json.loads(local_cert.to_json())
    back = LocalUniquenessCertificate.from_payload(payload)
    assert back.to_json() == local_cert.to_json()
    assert verify_local_certificate(back)


def test_local_tampered_annulus_is_rejected(local_cert):
    payload = json.loads(local_cert.to_json())
    row = payload["annulus"][100]
    row[4] = "2+" if row[4] != "2+" else "1-"
    bad = LocalUniquenessCertificate.from_payload(payload)
    with pytest.raises((LeafBoundViolation, ValueError)):
        verify_local_certificate(bad)


def test_local_tampered_margin_is_rejected(local_cert):
    payload = json.loads(local_cert.to_json())
    payload["containment_margin"] = (local_cert.containment_margin * 2.0).hex()
    bad = LocalUniquenessCertificate.from_payload(payload)
    with pytest.raises((LeafBoundViolation, ValueError)):
        verify_local_certificate(bad)


def test_local_rejects_out_of_range_delta():
    with pytest.raises(Exception):
        certify_local_uniqueness(delta=0.9)


# ---------------------------------------------------------------------------
# the full bundle


def test_certify_all_summary():
    cfg = RunConfig(max_box_width=0.1, threads=2)
    manifest = certify_all(cfg)
    assert manifest.verdict == "UNIQUE-IN-WINDOW"
    assert set(manifest.certificates) == {f"J{i}" for i in range(1, 17)}
    for cert in manifest.certificates.values():
        assert cert.min_bound > 0.0
    assert manifest.solution_witness["is_solution"]
    assert manifest.solution_witness["gap_enclosures_contain_zero"]
    summary = manifest.summary_payload()
    assert summary["kind"] == "manifest"
    assert summary["regions"]["J4"]["min_bound"] > 0.0


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(delta_b0=0.7).validate()
    with pytest.raises(ValueError):
        RunConfig(max_box_width=0.0).validate()
    with pytest.raises(ValueError):
        RunConfig(threads=0).validate()
    with pytest.raises(ValueError):
        RunConfig(truncation=1.0).validate()
    assert RunConfig(delta_b0=0.0).validate()  # explicit no-excision mode
