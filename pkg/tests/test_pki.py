"""Canonical encodings, certificate validation, revocation list handling."""

import struct

import pytest

from eidkit.crypto import EntropyStream, generate_keypair, sign
from eidkit.pki import (
    CertificateBody,
    CertificateRequest,
    CertValidity,
    EncodingRejected,
    IdentityCertificate,
    RevocationEntry,
    RevocationList,
    RevocationReason,
    canonical_encode_body,
    canonical_encode_crl,
    canonical_encode_request,
    certificate_from_json,
    certificate_to_json,
    crl_from_json,
    crl_to_json,
    decode_certificate_body,
    decode_crl,
    validate_certificate,
    verify_crl_signature,
    verify_request_proof,
)

CA_SEED = bytes(range(32))


def sample_body(**overrides) -> CertificateBody:
    fields = dict(
        version=1,
        serial=7,
        issuer_id="AUTH-SIM",
        subject_name="Avery Holder",
        national_id="NID-0001",
        birthdate="1988-04-12",
        facial_image_digest=bytes(range(32)),
        digest_algorithm=1,
        subject_public_key=bytes(range(64)),
        valid_from=1735689600,
        valid_to=1893369600,
        biometric_exempt=False,
    )
    fields.update(overrides)
    return CertificateBody(**fields)


def sample_crl(signature=None) -> RevocationList:
    return RevocationList(
        issuer_id="AUTH-SIM",
        sequence=3,
        issued_at=1735776000,
        entries=(
            RevocationEntry(2, RevocationReason.ILLICIT_USE, 1735700000),
            RevocationEntry(5, RevocationReason.KEY_COMPROMISE, 1735770000),
        ),
        signature=signature,
    )


def signed_cert(body=None) -> tuple[IdentityCertificate, bytes]:
    ca = generate_keypair(CA_SEED)
    body = body if body is not None else sample_body()
    cert = IdentityCertificate(body, sign(ca.private_part, canonical_encode_body(body)))
    return cert, ca.public_part


# ---------------------------------------------------------------------------
# Golden encodings (pinned byte-for-byte; any change is a format break)

GOLDEN_CERT_BODY_HEX = (
    "45494443010000000000000001000000000000000700000008415554482d53494d"
    "0000000c417665727920486f6c646572000000084e49442d303030310000000a31"
    "3938382d30342d313200000020000102030405060708090a0b0c0d0e0f10111213"
    "1415161718191a1b1c1d1e1f0100000040000102030405060708090a0b0c0d0e0f"
    "101112131415161718191a1b1c1d1e1f202122232425262728292a2b2c2d2e2f30"
    "3132333435363738393a3b3c3d3e3f000000006774858000000000"
    "70da870000"
)

GOLDEN_CRL_HEX = (
    "454944520100000008415554482d53494d0000000000000003000000006775d700"
    "00000002000000000000000204000000006774ae2000000000000000050500000000"
    "6775bf90"
)


def test_golden_certificate_body_encoding():
    assert canonical_encode_body(sample_body()).hex() == GOLDEN_CERT_BODY_HEX


def test_golden_crl_encoding():
    assert canonical_encode_crl(sample_crl()).hex() == GOLDEN_CRL_HEX


def test_golden_layout_matches_independent_packing():
    # Layout re-spelled by hand: magic, format version byte, then fields;
    # strings/bytes get a 4-byte big-endian length prefix, integers are
    # 8-byte big-endian, booleans one byte.
    def lp(raw: bytes) -> bytes:
        return struct.pack(">I", len(raw)) + raw

    manual = (
        b"EIDC"
        + bytes([1])
        + struct.pack(">Q", 1)
        + struct.pack(">Q", 7)
        + lp(b"AUTH-SIM")
        + lp(b"Avery Holder")
        + lp(b"NID-0001")
        + lp(b"1988-04-12")
        + lp(bytes(range(32)))
        + bytes([1])
        + lp(bytes(range(64)))
        + struct.pack(">Q", 1735689600)
        + struct.pack(">Q", 1893369600)
        + b"\x00"
    )
    assert canonical_encode_body(sample_body()) == manual

    manual_crl = (
        b"EIDR"
        + bytes([1])
        + lp(b"AUTH-SIM")
        + struct.pack(">Q", 3)
        + struct.pack(">Q", 1735776000)
        + struct.pack(">I", 2)
        + struct.pack(">Q", 2)
        + bytes([4])
        + struct.pack(">Q", 1735700000)
        + struct.pack(">Q", 5)
        + bytes([5])
        + struct.pack(">Q", 1735770000)
    )
    assert canonical_encode_crl(sample_crl()) == manual_crl


# ---------------------------------------------------------------------------
# Encoding contract


def test_encode_deterministic():
    assert canonical_encode_body(sample_body()) == canonical_encode_body(sample_body())


def test_encode_differs_on_serial():
    assert canonical_encode_body(sample_body(serial=7)) != canonical_encode_body(
        sample_body(serial=8)
    )


def test_encode_rejects_empty_validity_window():
    with pytest.raises(EncodingRejected):
        canonical_encode_body(sample_body(valid_to=1735689600))


def test_encode_rejects_bad_serial_and_digest():
    with pytest.raises(EncodingRejected):
        canonical_encode_body(sample_body(serial=0))
    with pytest.raises(EncodingRejected):
        canonical_encode_body(sample_body(facial_image_digest=b"\x00" * 31))


def test_encode_injective_over_random_bodies():
    entropy = EntropyStream(5, "pki-inject")
    seen = {}
    for n in range(1000):
        body = sample_body(
            serial=1 + (n % 500),
            subject_name=f"Subject {entropy.take(4).hex()}",
            national_id=f"NID-{entropy.take(3).hex()}",
            facial_image_digest=entropy.take(32),
            valid_from=1735689600 + n,
            valid_to=1893369600 + (n % 7),
            biometric_exempt=bool(n % 2),
        )
        encoded = canonical_encode_body(body)
        assert seen.setdefault(encoded, body) == body
    assert len(seen) == 1000


def test_decode_round_trip():
    body = sample_body()
    encoded = canonical_encode_body(body)
    decoded = decode_certificate_body(encoded)
    assert decoded == body
    assert canonical_encode_body(decoded) == encoded


def test_decode_rejects_truncation_and_trailing():
    encoded = canonical_encode_body(sample_body())
    with pytest.raises(EncodingRejected):
        decode_certificate_body(encoded[:-1])
    with pytest.raises(EncodingRejected):
        decode_certificate_body(encoded + b"\x00")
    with pytest.raises(EncodingRejected):
        decode_certificate_body(b"NOPE" + encoded[4:])


def test_crl_decode_round_trip():
    encoded = canonical_encode_crl(sample_crl())
    decoded = decode_crl(encoded)
    assert canonical_encode_crl(decoded) == encoded


def test_crl_rejects_unsorted_and_duplicate_serials():
    unsorted_entries = (
        RevocationEntry(5, RevocationReason.ILLICIT_USE, 1),
        RevocationEntry(2, RevocationReason.ILLICIT_USE, 2),
    )
    with pytest.raises(EncodingRejected):
        canonical_encode_crl(RevocationList("AUTH-SIM", 1, 10, unsorted_entries))
    duplicate_entries = (
        RevocationEntry(2, RevocationReason.ILLICIT_USE, 1),
        RevocationEntry(2, RevocationReason.KEY_COMPROMISE, 2),
    )
    with pytest.raises(EncodingRejected):
        canonical_encode_crl(RevocationList("AUTH-SIM", 1, 10, duplicate_entries))


def test_revocation_reason_wire_codes():
    assert [r.value for r in RevocationReason] == [0x01, 0x02, 0x03, 0x04, 0x05]
    assert RevocationReason.NO_LONGER_REQUIRED.value == 0x01
    assert RevocationReason.SUBJECT_REMOVED.value == 0x02
    assert RevocationReason.TRUST_BREACH.value == 0x03
    assert RevocationReason.ILLICIT_USE.value == 0x04
    assert RevocationReason.KEY_COMPROMISE.value == 0x05


# ---------------------------------------------------------------------------
# Validation


def test_validate_fresh_cert_valid():
    cert, ca_pub = signed_cert()
    assert validate_certificate(cert, ca_pub, 1800000000) == CertValidity.VALID


def test_validate_window_boundaries():
    cert, ca_pub = signed_cert()
    body = cert.body
    assert validate_certificate(cert, ca_pub, body.valid_from) == CertValidity.VALID
    assert validate_certificate(cert, ca_pub, body.valid_from - 1) == CertValidity.NOT_YET_VALID
    assert validate_certificate(cert, ca_pub, body.valid_to) == CertValidity.VALID
    assert validate_certificate(cert, ca_pub, body.valid_to + 1) == CertValidity.EXPIRED


def test_validate_sweep_flips_exactly_at_expiry():
    cert, ca_pub = signed_cert()
    valid_to = cert.body.valid_to
    outcomes = [
        validate_certificate(cert, ca_pub, t)
        for t in range(valid_to - 5, valid_to + 6)
    ]
    expected = [CertValidity.VALID] * 6 + [CertValidity.EXPIRED] * 5
    assert outcomes == expected


def test_validate_tampered_body_bad_signature_regardless_of_clock():
    cert, ca_pub = signed_cert()
    tampered = IdentityCertificate(
        body=sample_body(subject_name="Avery Holdes"), signature=cert.signature
    )
    for now in (0, cert.body.valid_from, cert.body.valid_to + 10**9):
        assert validate_certificate(tampered, ca_pub, now) == CertValidity.BAD_SIGNATURE


def test_validate_bad_signature_dominates_expiry():
    cert, ca_pub = signed_cert()
    tampered = IdentityCertificate(cert.body, bytes(64))
    assert validate_certificate(tampered, ca_pub, cert.body.valid_to + 10) == (
        CertValidity.BAD_SIGNATURE
    )


# ---------------------------------------------------------------------------
# Requests, CRL signatures, JSON forms


def test_request_proof_round_trip():
    subject = generate_keypair(bytes([9]) * 32)
    request = CertificateRequest(
        subject_name="A",
        national_id="N-1",
        birthdate="1990-01-01",
        subject_public_key=subject.public_part,
        proof_of_possession=b"",
    )
    proof = sign(subject.private_part, canonical_encode_request(request))
    request = CertificateRequest(
        "A", "N-1", "1990-01-01", subject.public_part, proof
    )
    assert verify_request_proof(request)
    forged = CertificateRequest(
        "B", "N-1", "1990-01-01", subject.public_part, proof
    )
    assert not verify_request_proof(forged)


def test_crl_signature_verifies_and_breaks_on_tamper():
    ca = generate_keypair(CA_SEED)
    crl = sample_crl()
    signed = RevocationList(
        crl.issuer_id,
        crl.sequence,
        crl.issued_at,
        crl.entries,
        signature=sign(ca.private_part, canonical_encode_crl(crl)),
    )
    assert verify_crl_signature(signed, ca.public_part)
    tampered = RevocationList(
        signed.issuer_id,
        signed.sequence,
        signed.issued_at,
        (signed.entries[0], RevocationEntry(6, RevocationReason.ILLICIT_USE, 1)),
        signature=signed.signature,
    )
    assert not verify_crl_signature(tampered, ca.public_part)


def test_certificate_json_round_trip():
    cert, _ = signed_cert()
    assert certificate_from_json(certificate_to_json(cert)) == cert


def test_crl_json_round_trip():
    ca = generate_keypair(CA_SEED)
    crl = sample_crl(signature=sign(ca.private_part, canonical_encode_crl(sample_crl())))
    assert crl_from_json(crl_to_json(crl)) == crl
