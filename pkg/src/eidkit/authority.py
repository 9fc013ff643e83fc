"""National issuing agency: vetting, issuance, revocation, registry ledger.

The registry is event-sourced: every issuance and revocation appends a
JSON line, and replaying the ledger reconstructs the registry exactly.
The agency never stores biometric data; it only ever sees the public
key, the identity fields, and the facial image it digests into the
certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone, date
from enum import Enum
from pathlib import Path

from .crypto import (
    DEFAULT_SCHEME,
    KeyPair,
    SignatureScheme,
    digest_sha256,
    generate_keypair,
)
from .pki import (
    DIGEST_SHA256,
    CertificateBody,
    CertificateRequest,
    IdentityCertificate,
    RevocationEntry,
    RevocationList,
    RevocationReason,
    canonical_encode_body,
    canonical_encode_crl,
    certificate_from_json_dict,
    certificate_to_json_dict,
    verify_request_proof,
)

SECONDS_PER_YEAR = 365 * 86400


class DocumentKind(Enum):
    BIRTH_CERTIFICATE = "birth_certificate"
    CITIZENSHIP_CERTIFICATE = "citizenship_certificate"
    FAMILY_BOOK = "family_book"
    PARENTAL_AUTHORIZATION = "parental_authorization"
    DRIVING_LICENSE = "driving_license"
    UTILITY_BILL = "utility_bill"


@dataclass(frozen=True)
class BreederDocument:
    kind: DocumentKind
    verified: bool


@dataclass(frozen=True)
class VettingDossier:
    subject_name: str
    national_id: str
    birthdate: str
    documents: tuple[BreederDocument, ...]
    facial_image: bytes

    def __post_init__(self) -> None:
        if not self.national_id:
            raise ValueError("national_id must be nonempty")


@dataclass
class AuthorityPolicy:
    validity_years: int = 5
    min_fingerprint_age_years: int = 12
    max_reliable_age_years: int = 80
    required_breeder_documents: int = 2

    def __post_init__(self) -> None:
        if self.validity_years < 1:
            raise ValueError("validity_years must be >= 1")
        if self.min_fingerprint_age_years >= self.max_reliable_age_years:
            raise ValueError("age exemption bounds are inverted")


class VettingStatus(Enum):
    APPROVED = "approved"
    APPROVED_EXEMPT = "approved_exempt"
    REJECTED = "rejected"


@dataclass(frozen=True)
class VettingDecision:
    status: VettingStatus
    reason: str | None = None


class RegistryStatus(Enum):
    ACTIVE = "active"
    REVOKED = "revoked"


@dataclass
class RegistryRecord:
    serial: int
    certificate: IdentityCertificate
    issued_at: int
    status: RegistryStatus = RegistryStatus.ACTIVE
    revocation_reason: RevocationReason | None = None
    revoked_at: int | None = None


class RequestRejected(Exception):
    """Issuance refused: failed vetting or bad proof of possession."""


class UnknownOrAlreadyRevoked(Exception):
    """Serial is not in the registry, or is already revoked."""


class LedgerCorrupt(Exception):
    def __init__(self, line_number: int, message: str = "") -> None:
        super().__init__(f"ledger line {line_number}: {message or 'corrupt'}")
        self.line_number = line_number


def _age_in_years(birthdate: date, now: int) -> int:
    today = datetime.fromtimestamp(now, tz=timezone.utc).date()
    return today.year - birthdate.year - (
        (today.month, today.day) < (birthdate.month, birthdate.day)
    )


def vet_identity(
    dossier: VettingDossier, policy: AuthorityPolicy, now: int
) -> VettingDecision:
    """Breeder-document check, then the age-based fingerprint exemption."""
    verified = sum(1 for doc in dossier.documents if doc.verified)
    if verified < policy.required_breeder_documents:
        return VettingDecision(
            VettingStatus.REJECTED,
            f"{verified} verified breeder documents,"
            f" {policy.required_breeder_documents} required",
        )
    try:
        birthdate = date.fromisoformat(dossier.birthdate)
    except ValueError:
        return VettingDecision(VettingStatus.REJECTED, "invalid birthdate")
    age = _age_in_years(birthdate, now)
    if age < policy.min_fingerprint_age_years or age > policy.max_reliable_age_years:
        return VettingDecision(VettingStatus.APPROVED_EXEMPT)
    return VettingDecision(VettingStatus.APPROVED)


class IssuingAuthority:
    """Certificate authority for one country; mutations must be serialized."""

    def __init__(
        self,
        authority_id: str,
        ca_seed: bytes,
        policy: AuthorityPolicy | None = None,
        scheme: SignatureScheme = DEFAULT_SCHEME,
    ) -> None:
        self.authority_id = authority_id
        self.policy = policy if policy is not None else AuthorityPolicy()
        self._scheme = scheme
        self._ca_keys: KeyPair = generate_keypair(ca_seed, scheme=scheme)
        self.registry: dict[int, RegistryRecord] = {}
        self.next_serial = 1
        self.crl_sequence = 0
        self._events: list[dict] = []

    @property
    def public_key(self) -> bytes:
        return self._ca_keys.public_part

    def vet(self, dossier: VettingDossier, now: int) -> VettingDecision:
        return vet_identity(dossier, self.policy, now)

    def issue_certificate(
        self,
        request: CertificateRequest,
        decision: VettingDecision,
        facial_image: bytes,
        now: int,
    ) -> IdentityCertificate:
        if decision.status == VettingStatus.REJECTED:
            raise RequestRejected(decision.reason or "vetting rejected")
        if not verify_request_proof(request, scheme=self._scheme):
            raise RequestRejected("proof of possession does not verify")
        body = CertificateBody(
            version=1,
            serial=self.next_serial,
            issuer_id=self.authority_id,
            subject_name=request.subject_name,
            national_id=request.national_id,
            birthdate=request.birthdate,
            facial_image_digest=digest_sha256(facial_image),
            digest_algorithm=DIGEST_SHA256,
            subject_public_key=request.subject_public_key,
            valid_from=now,
            valid_to=now + self.policy.validity_years * SECONDS_PER_YEAR,
            biometric_exempt=decision.status == VettingStatus.APPROVED_EXEMPT,
        )
        signature = self._scheme.sign(
            self._ca_keys.private_part, canonical_encode_body(body)
        )
        cert = IdentityCertificate(body=body, signature=signature)
        self.registry[body.serial] = RegistryRecord(
            serial=body.serial, certificate=cert, issued_at=now
        )
        self._events.append(
            {
                "ev": "issue",
                "serial": body.serial,
                "issued_at": now,
                "certificate": certificate_to_json_dict(cert),
            }
        )
        self.next_serial += 1
        return cert

    def revoke_certificate(
        self, serial: int, reason: RevocationReason, now: int
    ) -> None:
        record = self.registry.get(serial)
        if record is None or record.status != RegistryStatus.ACTIVE:
            raise UnknownOrAlreadyRevoked(f"serial {serial}")
        record.status = RegistryStatus.REVOKED
        record.revocation_reason = reason
        record.revoked_at = now
        self._events.append(
            {
                "ev": "revoke",
                "serial": serial,
                "reason": reason.value,
                "revoked_at": now,
            }
        )

    def publish_crl(self, now: int) -> RevocationList:
        """Sign the current set of revoked serials with the next sequence."""
        self.crl_sequence += 1
        entries = tuple(
            RevocationEntry(
                serial=r.serial, reason=r.revocation_reason, revoked_at=r.revoked_at
            )
            for r in sorted(self.registry.values(), key=lambda r: r.serial)
            if r.status == RegistryStatus.REVOKED
        )
        unsigned = RevocationList(
            issuer_id=self.authority_id,
            sequence=self.crl_sequence,
            issued_at=now,
            entries=entries,
        )
        signature = self._scheme.sign(
            self._ca_keys.private_part, canonical_encode_crl(unsigned)
        )
        return replace(unsigned, signature=signature)

    # -- ledger persistence ---------------------------------------------------

    def save(self, path: str | Path) -> None:
        """One canonical JSON object per line; the file ends with a newline."""
        lines = [
            json.dumps(event, sort_keys=True, separators=(",", ":"))
            for event in self._events
        ]
        Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")

    @classmethod
    def load(
        cls,
        path: str | Path,
        authority_id: str,
        ca_seed: bytes,
        policy: AuthorityPolicy | None = None,
        scheme: SignatureScheme = DEFAULT_SCHEME,
    ) -> "IssuingAuthority":
        """Replay the ledger strictly in order; any inconsistency is corrupt.

        Key material is never written to the ledger, so the CA seed is
        supplied by the caller, as at construction time.
        """
        authority = cls(authority_id, ca_seed, policy=policy, scheme=scheme)
        text = Path(path).read_text(encoding="utf-8")
        if text == "":
            return authority
        if not text.endswith("\n"):
            raise LedgerCorrupt(text.count("\n") + 1, "truncated last line")
        for line_number, line in enumerate(text.splitlines(), start=1):
            try:
                event = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LedgerCorrupt(line_number, f"bad JSON: {exc.msg}") from exc
            try:
                authority._replay(event)
            except LedgerCorrupt:
                raise
            except Exception as exc:
                raise LedgerCorrupt(line_number, str(exc)) from exc
        return authority

    def _replay(self, event: dict) -> None:
        kind = event.get("ev")
        if kind == "issue":
            serial = int(event["serial"])
            if serial != self.next_serial:
                raise ValueError(
                    f"issue out of order: serial {serial}, expected {self.next_serial}"
                )
            cert = certificate_from_json_dict(event["certificate"])
            if cert.body.serial != serial:
                raise ValueError("serial disagrees with embedded certificate")
            self.registry[serial] = RegistryRecord(
                serial=serial, certificate=cert, issued_at=int(event["issued_at"])
            )
            self._events.append(event)
            self.next_serial += 1
        elif kind == "revoke":
            serial = int(event["serial"])
            record = self.registry.get(serial)
            if record is None or record.status != RegistryStatus.ACTIVE:
                raise ValueError(f"revoke of unknown or revoked serial {serial}")
            record.status = RegistryStatus.REVOKED
            record.revocation_reason = RevocationReason(int(event["reason"]))
            record.revoked_at = int(event["revoked_at"])
            self._events.append(event)
        else:
            raise ValueError(f"unknown event kind {kind!r}")
