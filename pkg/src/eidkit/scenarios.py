"""Scripted end-to-end runs: the happy path and the attack catalogue.

Each scenario drives a full issuance, applies its manipulation, runs
the border check, and asserts the documented expected outcome. The
attack constructions bypass card-enforced checks on purpose — they
model counterfeit hardware and wire capture, capabilities a real
attacker has — while the verifier must still catch them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .authority import (
    BreederDocument,
    DocumentKind,
    IssuingAuthority,
    VettingDossier,
    vet_identity,
)
from .biometrics import FingerprintTemplate, scan_to_template, synthesize_finger
from .card import Card, CardLifecycle, Unlocked
from .config import ScenarioConfig
from .crypto import EntropyStream, derive_seed_bytes, derive_seed_int
from .pki import IdentityCertificate
from .verifier import TrustStore, VerificationReport, verify_passport

SCENARIO_NAMES = (
    "genuine",
    "impostor",
    "clone",
    "replay",
    "tamper-cert",
    "expired",
    "lockout",
)

DEFAULT_SUBJECT = {
    "subject_name": "Avery Holder",
    "national_id": "NID-0001",
    "birthdate": "1988-04-12",
}


class UnknownScenario(Exception):
    pass


class IssuanceFailed(Exception):
    """The scripted issuance flow did not complete."""


def default_documents() -> tuple[BreederDocument, ...]:
    return (
        BreederDocument(DocumentKind.BIRTH_CERTIFICATE, verified=True),
        BreederDocument(DocumentKind.UTILITY_BILL, verified=True),
    )


@dataclass
class IssuedPassport:
    authority: IssuingAuthority
    trust_store: TrustStore
    card: Card
    certificate: IdentityCertificate
    truth: FingerprintTemplate
    facial_image: bytes
    serial: int


def issue_passport(
    config: ScenarioConfig,
    *,
    subject_name: str = DEFAULT_SUBJECT["subject_name"],
    national_id: str = DEFAULT_SUBJECT["national_id"],
    birthdate: str = DEFAULT_SUBJECT["birthdate"],
    documents: tuple[BreederDocument, ...] | None = None,
    finger_label: str = "citizen",
    finger_seed: int | None = None,
    authority: IssuingAuthority | None = None,
    trust_store: TrustStore | None = None,
) -> IssuedPassport:
    """Full issuance flow: card creation, biometric unlock, request,
    vetting, issuance, personalization; then trust-store distribution."""
    if authority is None:
        authority = IssuingAuthority(
            config.authority_id, config.ca_seed(), policy=config.policy
        )
    if finger_seed is None:
        finger_seed = derive_seed_int(config.seed, f"finger/{finger_label}")
    truth = synthesize_finger(finger_seed, config.finger_minutiae, label=finger_label)
    facial_image = EntropyStream(config.seed, f"face/{finger_label}").take(64)

    enrollment = scan_to_template(
        truth,
        config.sensor,
        config.match,
        derive_seed_int(config.seed, f"scan/enroll/{finger_label}"),
        label="enrollment",
    )
    card = Card(match_config=config.match)
    card.initialize(
        enrollment,
        facial_image,
        derive_seed_bytes(config.seed, f"card-entropy/{finger_label}"),
    )

    unlock_probe = scan_to_template(
        truth,
        config.sensor,
        config.match,
        derive_seed_int(config.seed, f"scan/unlock/{finger_label}"),
        label="issuance-probe",
    )
    if not isinstance(card.verify_holder(unlock_probe), Unlocked):
        raise IssuanceFailed("holder check failed during issuance")

    request = card.create_request(subject_name, national_id, birthdate)
    dossier = VettingDossier(
        subject_name=subject_name,
        national_id=national_id,
        birthdate=birthdate,
        documents=documents if documents is not None else default_documents(),
        facial_image=facial_image,
    )
    decision = vet_identity(dossier, config.policy, config.now)
    certificate = authority.issue_certificate(
        request, decision, facial_image, config.now
    )
    card.store_certificate(certificate)
    card.end_session()

    if trust_store is None:
        trust_store = TrustStore(max_crl_age_seconds=config.max_crl_age_seconds)
    trust_store.add_authority(config.authority_id, authority.public_key)
    trust_store.add_crl(authority.publish_crl(config.now))

    return IssuedPassport(
        authority=authority,
        trust_store=trust_store,
        card=card,
        certificate=certificate,
        truth=truth,
        facial_image=facial_image,
        serial=certificate.body.serial,
    )


def border_probe(
    config: ScenarioConfig, truth: FingerprintTemplate, label: str
) -> FingerprintTemplate:
    return scan_to_template(
        truth,
        config.sensor,
        config.match,
        derive_seed_int(config.seed, f"scan/border/{label}"),
        label=f"border-{label}",
    )


def verifier_entropy(config: ScenarioConfig) -> EntropyStream:
    return EntropyStream(config.seed, "verifier-nonce")


# ---------------------------------------------------------------------------
# Attack constructions


def counterfeit_store(card: Card, certificate: IdentityCertificate) -> None:
    """Plant a certificate on a card without the key-binding check.

    Models a counterfeit card; a compliant card refuses this with
    CertKeyMismatch, which is exactly why the verifier must not trust
    the card's own claims.
    """
    card._Card__certificate = certificate
    card.lifecycle = CardLifecycle.PERSONALIZED


class ReplayDevice:
    """Hostile card double that replays one captured challenge signature."""

    def __init__(
        self,
        certificate: IdentityCertificate,
        facial_image: bytes,
        captured_signature: bytes,
    ) -> None:
        self._certificate = certificate
        self._facial_image = facial_image
        self._captured_signature = captured_signature

    def verify_holder(self, probe):
        return Unlocked(score=1.0)  # the device lies about the match

    def read_certificate(self):
        return self._certificate, self._facial_image

    def sign_challenge(self, challenge: bytes) -> bytes:
        return self._captured_signature

    def end_session(self) -> None:
        pass


# ---------------------------------------------------------------------------
# Scenario runners


@dataclass
class ScenarioOutcome:
    name: str
    report: VerificationReport
    expected_verdict: str
    expected_failed_step: str | None
    events: list[str]
    passed: bool

    def transcript_dict(self) -> dict:
        return {
            "scenario": self.name,
            "expectation": {
                "verdict": self.expected_verdict,
                "failed_step": self.expected_failed_step,
            },
            "events": self.events,
            "report": self.report.to_json_dict(),
            "outcome": "pass" if self.passed else "fail",
        }

    def transcript_json(self, config: ScenarioConfig) -> str:
        doc = {"seed": config.seed, "now": config.now}
        doc.update(self.transcript_dict())
        return json.dumps(doc, sort_keys=True) + "\n"


def _finish(
    name: str,
    config: ScenarioConfig,
    report: VerificationReport,
    events: list[str],
    expected_verdict: str,
    expected_failed_step: str | None,
    extra_ok: bool = True,
) -> ScenarioOutcome:
    passed = (
        report.verdict == expected_verdict
        and report.failed_step == expected_failed_step
        and extra_ok
    )
    return ScenarioOutcome(
        name=name,
        report=report,
        expected_verdict=expected_verdict,
        expected_failed_step=expected_failed_step,
        events=events,
        passed=passed,
    )


def _run_genuine(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")
    probe = border_probe(config, passport.truth, "citizen")
    report = verify_passport(
        passport.card, probe, passport.trust_store, config.now, verifier_entropy(config)
    )
    events.append("holder presented passport with own finger")
    all_passed = all(s.passed for s in report.steps)
    return _finish(
        "genuine", config, report, events, "accept", None, extra_ok=all_passed
    )


def _run_impostor(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")
    intruder = synthesize_finger(
        derive_seed_int(config.seed, "finger/intruder"),
        config.finger_minutiae,
        label="intruder",
    )
    probe = border_probe(config, intruder, "intruder")
    events.append("impostor presented stolen passport with own finger")
    report = verify_passport(
        passport.card, probe, passport.trust_store, config.now, verifier_entropy(config)
    )
    return _finish("impostor", config, report, events, "reject", "biometric_unlock")


def _run_clone(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")

    # Counterfeit card: correct holder biometrics, victim's certificate,
    # but its own key pair (the real private key cannot be extracted).
    clone = Card(match_config=config.match)
    clone_enrollment = scan_to_template(
        passport.truth,
        config.sensor,
        config.match,
        derive_seed_int(config.seed, "scan/clone-enroll"),
        label="clone-enrollment",
    )
    clone.initialize(
        clone_enrollment,
        passport.facial_image,
        derive_seed_bytes(config.seed, "card-entropy/attacker"),
    )
    counterfeit_store(clone, passport.certificate)
    events.append("certificate copied onto counterfeit card with different keys")

    probe = border_probe(config, passport.truth, "citizen")
    report = verify_passport(
        clone, probe, passport.trust_store, config.now, verifier_entropy(config)
    )
    return _finish("clone", config, report, events, "reject", "challenge_response")


def _run_replay(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")

    # Wire capture of one legitimate challenge exchange.
    unlock = passport.card.verify_holder(border_probe(config, passport.truth, "citizen"))
    if not isinstance(unlock, Unlocked):
        raise IssuanceFailed("capture session failed to unlock")
    captured_nonce = EntropyStream(config.seed, "captured-session").take(32)
    captured_signature = passport.card.sign_challenge(captured_nonce)
    passport.card.end_session()
    events.append(f"captured challenge exchange, nonce {captured_nonce.hex()[:16]}...")

    device = ReplayDevice(
        passport.certificate, passport.facial_image, captured_signature
    )
    report = verify_passport(
        device, None, passport.trust_store, config.now, verifier_entropy(config)
    )
    fresh_nonce_differs = report.nonce is not None and report.nonce != captured_nonce
    events.append("replay device answered the fresh challenge with the captured signature")
    return _finish(
        "replay",
        config,
        report,
        events,
        "reject",
        "challenge_response",
        extra_ok=fresh_nonce_differs,
    )


def _run_tamper_cert(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")

    tampered_body = replace(passport.certificate.body, national_id="NID-9999")
    forged = IdentityCertificate(
        body=tampered_body, signature=passport.certificate.signature
    )
    counterfeit_store(passport.card, forged)
    events.append("certificate identity fields altered, original signature kept")

    probe = border_probe(config, passport.truth, "citizen")
    report = verify_passport(
        passport.card, probe, passport.trust_store, config.now, verifier_entropy(config)
    )
    return _finish("tamper-cert", config, report, events, "reject", "signature_check")


def _run_expired(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")
    check_at = passport.certificate.body.valid_to + 1
    events.append(f"clock advanced to {check_at} (one second past expiry)")
    probe = border_probe(config, passport.truth, "citizen")
    report = verify_passport(
        passport.card, probe, passport.trust_store, check_at, verifier_entropy(config)
    )
    return _finish("expired", config, report, events, "reject", "validity_window")


def _run_lockout(config: ScenarioConfig) -> ScenarioOutcome:
    events = []
    passport = issue_passport(config)
    events.append(f"issued serial {passport.serial}")
    intruder = synthesize_finger(
        derive_seed_int(config.seed, "finger/intruder"),
        config.finger_minutiae,
        label="intruder",
    )
    for attempt in range(passport.card.max_attempts):
        probe = scan_to_template(
            intruder,
            config.sensor,
            config.match,
            derive_seed_int(config.seed, f"scan/lockout/{attempt}"),
            label=f"lockout-{attempt}",
        )
        outcome = passport.card.verify_holder(probe)
        events.append(f"impostor attempt {attempt + 1}: {type(outcome).__name__}")
    events.append("genuine holder tries the now locked-out card")
    probe = border_probe(config, passport.truth, "citizen")
    report = verify_passport(
        passport.card, probe, passport.trust_store, config.now, verifier_entropy(config)
    )
    return _finish("lockout", config, report, events, "reject", "biometric_unlock")


_RUNNERS = {
    "genuine": _run_genuine,
    "impostor": _run_impostor,
    "clone": _run_clone,
    "replay": _run_replay,
    "tamper-cert": _run_tamper_cert,
    "expired": _run_expired,
    "lockout": _run_lockout,
}


def run_scenario(name: str, config: ScenarioConfig) -> ScenarioOutcome:
    runner = _RUNNERS.get(name)
    if runner is None:
        raise UnknownScenario(name)
    return runner(config)
