"""Border-control validation: the full passport inspection protocol.

Steps run in a fixed order — biometric unlock, certificate read,
issuer signature, validity window, revocation, challenge-response —
and stop at the first failure; later steps are reported as not
executed. The challenge is verified under the public key embedded in
the certificate, never under anything the card reports about itself,
which is what defeats cloned cards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .card import CHALLENGE_TAG, Card, CardError, LockedOut, Rejected, Unlocked
from .crypto import EntropyStream, verify_signature
from .pki import (
    CertValidity,
    IdentityCertificate,
    RevocationList,
    crl_from_json_dict,
    crl_to_json_dict,
    validate_certificate,
    verify_crl_signature,
)

DEFAULT_MAX_CRL_AGE_SECONDS = 7 * 86400

STEP_NAMES = (
    "biometric_unlock",
    "certificate_read",
    "signature_check",
    "validity_window",
    "revocation_check",
    "challenge_response",
)

NOT_EXECUTED = "not_executed"

_PASSING = {"passed", "exempt", "ok", "valid", "clear"}


class ExemptMarker:
    """Operator attestation that the holder is fingerprint-exempt."""

    def __repr__(self) -> str:  # pragma: no cover
        return "EXEMPT"


EXEMPT = ExemptMarker()


class TrustStoreError(Exception):
    """Rejected insertion: unknown issuer or bad CRL signature."""


class TrustStore:
    """Known CA keys plus the most recent CRL per authority."""

    def __init__(self, max_crl_age_seconds: int = DEFAULT_MAX_CRL_AGE_SECONDS) -> None:
        self.max_crl_age_seconds = max_crl_age_seconds
        self._authorities: dict[str, bytes] = {}
        self._crls: dict[str, RevocationList] = {}

    def add_authority(self, authority_id: str, public_key: bytes) -> None:
        self._authorities[authority_id] = bytes(public_key)

    def add_crl(self, crl: RevocationList) -> None:
        key = self._authorities.get(crl.issuer_id)
        if key is None:
            raise TrustStoreError(f"unknown issuer {crl.issuer_id!r}")
        if not verify_crl_signature(crl, key):
            raise TrustStoreError("revocation list signature does not verify")
        self._crls[crl.issuer_id] = crl

    def authority_key(self, authority_id: str) -> bytes | None:
        return self._authorities.get(authority_id)

    def crl_for(self, authority_id: str) -> RevocationList | None:
        return self._crls.get(authority_id)

    def to_json_dict(self) -> dict:
        return {
            "max_crl_age_seconds": self.max_crl_age_seconds,
            "authorities": {
                aid: key.hex() for aid, key in sorted(self._authorities.items())
            },
            "crls": {
                aid: crl_to_json_dict(crl) for aid, crl in sorted(self._crls.items())
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TrustStore":
        store = cls(max_crl_age_seconds=int(doc.get("max_crl_age_seconds",
                                                    DEFAULT_MAX_CRL_AGE_SECONDS)))
        for aid, key_hex in doc.get("authorities", {}).items():
            store.add_authority(aid, bytes.fromhex(key_hex))
        for _, crl_doc in doc.get("crls", {}).items():
            store.add_crl(crl_from_json_dict(crl_doc))  # re-checks signatures
        return store

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_dict(), sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "TrustStore":
        return cls.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Report


@dataclass
class StepRecord:
    name: str
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status in _PASSING


@dataclass
class VerificationReport:
    steps: list[StepRecord]
    verdict: str
    failed_step: str | None
    started_at: int
    nonce: bytes | None

    def step(self, name: str) -> StepRecord:
        for record in self.steps:
            if record.name == name:
                return record
        raise KeyError(name)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accept"

    def to_json_dict(self) -> dict:
        return {
            "steps": [
                {"name": s.name, "status": s.status, "detail": s.detail}
                for s in self.steps
            ],
            "verdict": self.verdict,
            "failed_step": self.failed_step,
            "started_at": self.started_at,
            "nonce": self.nonce.hex() if self.nonce is not None else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


@dataclass(frozen=True)
class ChallengeOutcome:
    passed: bool
    nonce: bytes
    cause: str | None = None


def run_challenge(
    card: Card, cert: IdentityCertificate, entropy: EntropyStream
) -> ChallengeOutcome:
    """Fresh-nonce proof that the card holds the certificate's private key."""
    nonce = entropy.take(32)
    try:
        signature = card.sign_challenge(nonce)
    except CardError as exc:
        return ChallengeOutcome(passed=False, nonce=nonce, cause=exc.code.value)
    ok = verify_signature(
        cert.body.subject_public_key, CHALLENGE_TAG + nonce, signature
    )
    cause = None if ok else "signature does not verify under certificate key"
    return ChallengeOutcome(passed=ok, nonce=nonce, cause=cause)


def verify_passport(
    card: Card,
    live_probe,
    trust: TrustStore,
    now: int,
    entropy: EntropyStream,
) -> VerificationReport:
    """Run the inspection protocol; the card session always ends afterward.

    ``live_probe`` is a FingerprintTemplate, or the EXEMPT marker for a
    holder whose certificate waives the fingerprint check. A missing or
    over-age revocation list rejects (fail-closed).
    """
    steps: list[StepRecord] = []
    failed: str | None = None
    nonce: bytes | None = None

    def record(name: str, status: str, **detail) -> bool:
        nonlocal failed
        rec = StepRecord(name=name, status=status, detail=dict(detail))
        steps.append(rec)
        if not rec.passed and failed is None:
            failed = name
        return rec.passed

    try:
        # 1. biometric unlock (match-on-card, or operator-attested exemption)
        if isinstance(live_probe, ExemptMarker):
            try:
                card.unlock_exempt()
                record("biometric_unlock", "exempt")
            except CardError as exc:
                record("biometric_unlock", "failed", cause=exc.code.value)
        else:
            try:
                outcome = card.verify_holder(live_probe)
                if isinstance(outcome, Unlocked):
                    record("biometric_unlock", "passed", score=outcome.score)
                elif isinstance(outcome, Rejected):
                    record(
                        "biometric_unlock",
                        "failed",
                        cause="biometric_mismatch",
                        attempts_left=outcome.attempts_left,
                    )
                else:
                    record("biometric_unlock", "failed", cause="CardLockedOut")
            except CardError as exc:
                record("biometric_unlock", "failed", cause=exc.code.value)

        # 2. certificate read
        cert = None
        if failed is None:
            try:
                cert, _facial_image = card.read_certificate()
                record("certificate_read", "ok", serial=cert.body.serial)
            except CardError as exc:
                record("certificate_read", "error", cause=exc.code.value)

        # 3 + 4. issuer signature, then validity window
        if failed is None:
            issuer_id = cert.body.issuer_id
            ca_key = trust.authority_key(issuer_id)
            if ca_key is None:
                record(
                    "signature_check",
                    "bad_signature",
                    note=f"issuer {issuer_id!r} not in trust store",
                )
            else:
                validity = validate_certificate(cert, ca_key, now)
                if validity == CertValidity.BAD_SIGNATURE:
                    record("signature_check", "bad_signature")
                else:
                    record("signature_check", "valid")
                    if validity == CertValidity.NOT_YET_VALID:
                        record("validity_window", "not_yet_valid")
                    elif validity == CertValidity.EXPIRED:
                        record("validity_window", "expired")
                    else:
                        record("validity_window", "ok")

        # 5. revocation
        if failed is None:
            crl = trust.crl_for(cert.body.issuer_id)
            if crl is None:
                record("revocation_check", "crl_stale", note="no revocation list")
            elif now - crl.issued_at > trust.max_crl_age_seconds:
                record(
                    "revocation_check",
                    "crl_stale",
                    age_seconds=now - crl.issued_at,
                    max_age_seconds=trust.max_crl_age_seconds,
                )
            else:
                entry = next(
                    (e for e in crl.entries if e.serial == cert.body.serial), None
                )
                if entry is not None:
                    record(
                        "revocation_check",
                        "revoked",
                        reason=entry.reason.name.lower(),
                        reason_code=entry.reason.value,
                    )
                else:
                    record("revocation_check", "clear")

        # 6. challenge-response under the certificate's embedded key
        if failed is None:
            outcome = run_challenge(card, cert, entropy)
            nonce = outcome.nonce
            if outcome.passed:
                record("challenge_response", "passed")
            else:
                record("challenge_response", "failed", cause=outcome.cause)
    finally:
        card.end_session()

    executed = {s.name for s in steps}
    for name in STEP_NAMES:
        if name not in executed:
            steps.append(StepRecord(name=name, status=NOT_EXECUTED))
    steps.sort(key=lambda s: STEP_NAMES.index(s.name))

    return VerificationReport(
        steps=steps,
        verdict="accept" if failed is None else "reject",
        failed_step=failed,
        started_at=now,
        nonce=nonce,
    )
