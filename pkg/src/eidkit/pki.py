"""Identity certificates, revocation lists, and their canonical encodings.

The canonical binary form is the signing input and must be bit-exact
across implementations: magic bytes, a format version byte, then fields
in declaration order. Strings are UTF-8 with a 4-byte big-endian length
prefix, byte arrays likewise, integers are 8-byte big-endian, booleans a
single 0x00/0x01 byte. A JSON form exists for human inspection only and
is never the signing input.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, replace
from enum import Enum

from .crypto import SignatureScheme, DEFAULT_SCHEME, verify_signature

CERT_MAGIC = b"EIDC"
CRL_MAGIC = b"EIDR"
REQUEST_MAGIC = b"EIDQ"
ENCODING_VERSION = 0x01

DIGEST_SHA256 = 0x01
DIGEST_LENGTH = 32

_U64_MAX = 2**64 - 1
_U32_MAX = 2**32 - 1


class EncodingRejected(Exception):
    """Value violates its invariants or bytes are not a canonical encoding."""


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class CertificateBody:
    version: int
    serial: int
    issuer_id: str
    subject_name: str
    national_id: str
    birthdate: str
    facial_image_digest: bytes
    digest_algorithm: int
    subject_public_key: bytes
    valid_from: int
    valid_to: int
    biometric_exempt: bool


@dataclass(frozen=True)
class IdentityCertificate:
    body: CertificateBody
    signature: bytes


@dataclass(frozen=True)
class CertificateRequest:
    subject_name: str
    national_id: str
    birthdate: str
    subject_public_key: bytes
    proof_of_possession: bytes


class RevocationReason(Enum):
    NO_LONGER_REQUIRED = 0x01
    SUBJECT_REMOVED = 0x02
    TRUST_BREACH = 0x03
    ILLICIT_USE = 0x04
    KEY_COMPROMISE = 0x05


@dataclass(frozen=True)
class RevocationEntry:
    serial: int
    reason: RevocationReason
    revoked_at: int


@dataclass(frozen=True)
class RevocationList:
    issuer_id: str
    sequence: int
    issued_at: int
    entries: tuple[RevocationEntry, ...]
    signature: bytes | None = None


class CertValidity(Enum):
    VALID = "valid"
    BAD_SIGNATURE = "bad_signature"
    EXPIRED = "expired"
    NOT_YET_VALID = "not_yet_valid"


# ---------------------------------------------------------------------------
# Primitive packing helpers


def _pack_u64(value: int, what: str) -> bytes:
    if not isinstance(value, int) or not (0 <= value <= _U64_MAX):
        raise EncodingRejected(f"{what} out of unsigned 64-bit range: {value!r}")
    return struct.pack(">Q", value)


def _pack_bytes(value: bytes, what: str) -> bytes:
    if len(value) > _U32_MAX:
        raise EncodingRejected(f"{what} too long")
    return struct.pack(">I", len(value)) + bytes(value)


def _pack_str(value: str, what: str) -> bytes:
    return _pack_bytes(value.encode("utf-8"), what)


def _pack_bool(value: bool) -> bytes:
    return b"\x01" if value else b"\x00"


class _Reader:
    """Strict cursor over canonical bytes; any shortfall rejects."""

    def __init__(self, data: bytes) -> None:
        self._data = bytes(data)
        self._pos = 0

    def raw(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise EncodingRejected("truncated encoding")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u64(self) -> int:
        return struct.unpack(">Q", self.raw(8))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.raw(4))[0]

    def lp_bytes(self) -> bytes:
        return self.raw(self.u32())

    def lp_str(self) -> str:
        try:
            return self.lp_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingRejected("invalid UTF-8 in string field") from exc

    def boolean(self) -> bool:
        b = self.raw(1)
        if b == b"\x00":
            return False
        if b == b"\x01":
            return True
        raise EncodingRejected(f"invalid boolean byte {b!r}")

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise EncodingRejected("trailing bytes after encoding")


# ---------------------------------------------------------------------------
# Certificate body


def _check_body(body: CertificateBody) -> None:
    if body.serial < 1:
        raise EncodingRejected(f"serial must be >= 1, got {body.serial}")
    if len(body.facial_image_digest) != DIGEST_LENGTH:
        raise EncodingRejected(
            f"facial image digest must be {DIGEST_LENGTH} bytes,"
            f" got {len(body.facial_image_digest)}"
        )
    if not (0 <= body.digest_algorithm <= 0xFF):
        raise EncodingRejected("digest algorithm id must fit one byte")
    if body.valid_from >= body.valid_to:
        raise EncodingRejected("validity window is empty: valid_from >= valid_to")


def canonical_encode_body(body: CertificateBody) -> bytes:
    """Bit-exact signing input for a certificate body."""
    _check_body(body)
    return b"".join(
        [
            CERT_MAGIC,
            bytes([ENCODING_VERSION]),
            _pack_u64(body.version, "version"),
            _pack_u64(body.serial, "serial"),
            _pack_str(body.issuer_id, "issuer_id"),
            _pack_str(body.subject_name, "subject_name"),
            _pack_str(body.national_id, "national_id"),
            _pack_str(body.birthdate, "birthdate"),
            _pack_bytes(body.facial_image_digest, "facial_image_digest"),
            bytes([body.digest_algorithm]),
            _pack_bytes(body.subject_public_key, "subject_public_key"),
            _pack_u64(body.valid_from, "valid_from"),
            _pack_u64(body.valid_to, "valid_to"),
            _pack_bool(body.biometric_exempt),
        ]
    )


def decode_certificate_body(data: bytes) -> CertificateBody:
    r = _Reader(data)
    if r.raw(4) != CERT_MAGIC:
        raise EncodingRejected("bad certificate magic")
    if r.raw(1) != bytes([ENCODING_VERSION]):
        raise EncodingRejected("unsupported encoding version")
    body = CertificateBody(
        version=r.u64(),
        serial=r.u64(),
        issuer_id=r.lp_str(),
        subject_name=r.lp_str(),
        national_id=r.lp_str(),
        birthdate=r.lp_str(),
        facial_image_digest=r.lp_bytes(),
        digest_algorithm=r.raw(1)[0],
        subject_public_key=r.lp_bytes(),
        valid_from=r.u64(),
        valid_to=r.u64(),
        biometric_exempt=r.boolean(),
    )
    r.expect_end()
    _check_body(body)
    return body


# ---------------------------------------------------------------------------
# Certificate request


def canonical_encode_request(request: CertificateRequest) -> bytes:
    """Signing input for proof-of-possession (domain-separated by magic)."""
    return b"".join(
        [
            REQUEST_MAGIC,
            bytes([ENCODING_VERSION]),
            _pack_str(request.subject_name, "subject_name"),
            _pack_str(request.national_id, "national_id"),
            _pack_str(request.birthdate, "birthdate"),
            _pack_bytes(request.subject_public_key, "subject_public_key"),
        ]
    )


def verify_request_proof(
    request: CertificateRequest, scheme: SignatureScheme = DEFAULT_SCHEME
) -> bool:
    return verify_signature(
        request.subject_public_key,
        canonical_encode_request(request),
        request.proof_of_possession,
        scheme=scheme,
    )


# ---------------------------------------------------------------------------
# Revocation list


def _check_crl(crl: RevocationList) -> None:
    if crl.sequence < 1:
        raise EncodingRejected(f"sequence must be >= 1, got {crl.sequence}")
    serials = [e.serial for e in crl.entries]
    if any(s2 <= s1 for s1, s2 in zip(serials, serials[1:])):
        raise EncodingRejected("entries must be strictly sorted by serial")
    if len(crl.entries) > _U32_MAX:
        raise EncodingRejected("too many entries")


def canonical_encode_crl(crl: RevocationList) -> bytes:
    """Bit-exact signing input for a revocation list (signature excluded)."""
    _check_crl(crl)
    parts = [
        CRL_MAGIC,
        bytes([ENCODING_VERSION]),
        _pack_str(crl.issuer_id, "issuer_id"),
        _pack_u64(crl.sequence, "sequence"),
        _pack_u64(crl.issued_at, "issued_at"),
        struct.pack(">I", len(crl.entries)),
    ]
    for entry in crl.entries:
        parts.append(_pack_u64(entry.serial, "entry serial"))
        parts.append(bytes([entry.reason.value]))
        parts.append(_pack_u64(entry.revoked_at, "entry revoked_at"))
    return b"".join(parts)


def decode_crl(data: bytes) -> RevocationList:
    """Decode canonical CRL bytes; the result carries no signature."""
    r = _Reader(data)
    if r.raw(4) != CRL_MAGIC:
        raise EncodingRejected("bad revocation list magic")
    if r.raw(1) != bytes([ENCODING_VERSION]):
        raise EncodingRejected("unsupported encoding version")
    issuer_id = r.lp_str()
    sequence = r.u64()
    issued_at = r.u64()
    count = r.u32()
    entries = []
    for _ in range(count):
        serial = r.u64()
        code = r.raw(1)[0]
        try:
            reason = RevocationReason(code)
        except ValueError as exc:
            raise EncodingRejected(f"unknown revocation reason code {code:#04x}") from exc
        entries.append(RevocationEntry(serial, reason, r.u64()))
    r.expect_end()
    crl = RevocationList(issuer_id, sequence, issued_at, tuple(entries))
    _check_crl(crl)
    return crl


def verify_crl_signature(
    crl: RevocationList, issuer_public: bytes, scheme: SignatureScheme = DEFAULT_SCHEME
) -> bool:
    if crl.signature is None:
        return False
    try:
        payload = canonical_encode_crl(crl)
    except EncodingRejected:
        return False
    return verify_signature(issuer_public, payload, crl.signature, scheme=scheme)


# ---------------------------------------------------------------------------
# Validation


def validate_certificate(
    cert: IdentityCertificate,
    issuer_public: bytes,
    now: int,
    scheme: SignatureScheme = DEFAULT_SCHEME,
) -> CertValidity:
    """Classify a certificate at time ``now``.

    Check order is fixed: signature first (tampering must not be
    maskable by clock choice), then the validity window. Total: any
    malformed input classifies as BAD_SIGNATURE.
    """
    try:
        payload = canonical_encode_body(cert.body)
    except EncodingRejected:
        return CertValidity.BAD_SIGNATURE
    if not verify_signature(issuer_public, payload, cert.signature, scheme=scheme):
        return CertValidity.BAD_SIGNATURE
    if now < cert.body.valid_from:
        return CertValidity.NOT_YET_VALID
    if now > cert.body.valid_to:
        return CertValidity.EXPIRED
    return CertValidity.VALID


# ---------------------------------------------------------------------------
# JSON forms (inspection only, never the signing input)


def certificate_to_json_dict(cert: IdentityCertificate) -> dict:
    body = cert.body
    return {
        "body": {
            "version": body.version,
            "serial": body.serial,
            "issuer_id": body.issuer_id,
            "subject_name": body.subject_name,
            "national_id": body.national_id,
            "birthdate": body.birthdate,
            "facial_image_digest": body.facial_image_digest.hex(),
            "digest_algorithm": body.digest_algorithm,
            "subject_public_key": body.subject_public_key.hex(),
            "valid_from": body.valid_from,
            "valid_to": body.valid_to,
            "biometric_exempt": body.biometric_exempt,
        },
        "signature": cert.signature.hex(),
    }


def certificate_from_json_dict(doc: dict) -> IdentityCertificate:
    b = doc["body"]
    body = CertificateBody(
        version=int(b["version"]),
        serial=int(b["serial"]),
        issuer_id=b["issuer_id"],
        subject_name=b["subject_name"],
        national_id=b["national_id"],
        birthdate=b["birthdate"],
        facial_image_digest=bytes.fromhex(b["facial_image_digest"]),
        digest_algorithm=int(b["digest_algorithm"]),
        subject_public_key=bytes.fromhex(b["subject_public_key"]),
        valid_from=int(b["valid_from"]),
        valid_to=int(b["valid_to"]),
        biometric_exempt=bool(b["biometric_exempt"]),
    )
    return IdentityCertificate(body=body, signature=bytes.fromhex(doc["signature"]))


def certificate_to_json(cert: IdentityCertificate) -> str:
    return json.dumps(certificate_to_json_dict(cert), sort_keys=True)


def certificate_from_json(text: str) -> IdentityCertificate:
    return certificate_from_json_dict(json.loads(text))


def crl_to_json_dict(crl: RevocationList) -> dict:
    return {
        "issuer_id": crl.issuer_id,
        "sequence": crl.sequence,
        "issued_at": crl.issued_at,
        "entries": [
            {"serial": e.serial, "reason": e.reason.value, "revoked_at": e.revoked_at}
            for e in crl.entries
        ],
        "signature": crl.signature.hex() if crl.signature is not None else None,
    }


def crl_from_json_dict(doc: dict) -> RevocationList:
    entries = tuple(
        RevocationEntry(
            serial=int(e["serial"]),
            reason=RevocationReason(int(e["reason"])),
            revoked_at=int(e["revoked_at"]),
        )
        for e in doc["entries"]
    )
    signature = bytes.fromhex(doc["signature"]) if doc.get("signature") else None
    return RevocationList(
        issuer_id=doc["issuer_id"],
        sequence=int(doc["sequence"]),
        issued_at=int(doc["issued_at"]),
        entries=entries,
        signature=signature,
    )


def crl_to_json(crl: RevocationList) -> str:
    return json.dumps(crl_to_json_dict(crl), sort_keys=True)


def crl_from_json(text: str) -> RevocationList:
    return crl_from_json_dict(json.loads(text))


def strip_signature(crl: RevocationList) -> RevocationList:
    return replace(crl, signature=None)
