"""Smart-card emulator: a command-driven state machine.

The private key and the enrolled template never leave the card; every
command returns either its documented payload or raises a single
:class:`CardError`. Functions that use the private key, and certificate
reads, require a biometric unlock first. Enrollment happens exactly
once, atomically with key generation, and five failed holder checks
lock the card permanently.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path

from .biometrics import (
    FingerprintTemplate,
    MatchConfig,
    Minutia,
    MinutiaKind,
    enroll_quality,
    match_templates,
)
from .crypto import DEFAULT_SCHEME, KeyPair, SignatureScheme, generate_keypair
from .pki import (
    IdentityCertificate,
    CertificateRequest,
    canonical_encode_body,
    canonical_encode_request,
    decode_certificate_body,
)

CHALLENGE_TAG = b"EIDCHAL"
MIN_CHALLENGE_LENGTH = 16
DEFAULT_MAX_ATTEMPTS = 5

CARD_FILE_MAGIC = b"EIDF"
CARD_FILE_VERSION = 0x01


class CardLifecycle(IntEnum):
    BLANK = 0
    ACTIVE = 1
    PERSONALIZED = 2


class CardErrorCode(Enum):
    ALREADY_INITIALIZED = "AlreadyInitialized"
    NOT_INITIALIZED = "NotInitialized"
    NO_CERTIFICATE = "NoCertificate"
    CERT_KEY_MISMATCH = "CertKeyMismatch"
    SESSION_LOCKED = "SessionLocked"
    CARD_LOCKED_OUT = "CardLockedOut"
    ENROLL_REJECTED = "EnrollRejected"
    COMMAND_REFUSED = "CommandRefused"


class CardError(Exception):
    def __init__(self, code: CardErrorCode, message: str = "") -> None:
        super().__init__(message or code.value)
        self.code = code


class CardFileError(Exception):
    """Card persistence blob is corrupt or has an unknown version."""


@dataclass(frozen=True)
class Unlocked:
    score: float


@dataclass(frozen=True)
class Rejected:
    attempts_left: int


@dataclass(frozen=True)
class LockedOut:
    pass


class Card:
    """Single-owner mutable state machine; serialize commands per card."""

    def __init__(
        self,
        match_config: MatchConfig | None = None,
        max_attempts: int = DEFAULT_MAX_ATTEMPTS,
        scheme: SignatureScheme = DEFAULT_SCHEME,
    ) -> None:
        if max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.lifecycle = CardLifecycle.BLANK
        self.session_unlocked = False
        self.failed_attempts = 0
        self.max_attempts = max_attempts
        self.match_config = match_config if match_config is not None else MatchConfig()
        self._scheme = scheme
        self.__keys: KeyPair | None = None
        self.__template: FingerprintTemplate | None = None
        self.__facial_image: bytes = b""
        self.__certificate: IdentityCertificate | None = None

    @property
    def locked_out(self) -> bool:
        return self.failed_attempts >= self.max_attempts

    def _require_initialized(self) -> None:
        if self.lifecycle == CardLifecycle.BLANK:
            raise CardError(CardErrorCode.NOT_INITIALIZED)

    def _require_unlocked(self) -> None:
        if not self.session_unlocked:
            raise CardError(CardErrorCode.SESSION_LOCKED)

    # -- commands -----------------------------------------------------------

    def initialize(
        self, template: FingerprintTemplate, facial_image: bytes, entropy: bytes
    ) -> bytes:
        """One-time atomic key generation + biometric enrollment.

        Returns the public key; allowed only on a blank card.
        """
        if self.lifecycle != CardLifecycle.BLANK:
            raise CardError(CardErrorCode.ALREADY_INITIALIZED)
        if enroll_quality(template, self.match_config) is None:
            raise CardError(
                CardErrorCode.ENROLL_REJECTED,
                f"template has {len(template)} minutiae,"
                f" need {self.match_config.min_enroll_minutiae}",
            )
        keys = generate_keypair(entropy, scheme=self._scheme)
        self.__keys = keys
        self.__template = template
        self.__facial_image = bytes(facial_image)
        self.lifecycle = CardLifecycle.ACTIVE
        return keys.public_part

    def public_key(self) -> bytes:
        """Readable in any initialized state; publication is by design."""
        self._require_initialized()
        return self.__keys.public_part

    def create_request(
        self, subject_name: str, national_id: str, birthdate: str
    ) -> CertificateRequest:
        self._require_initialized()
        self._require_unlocked()
        if self.lifecycle == CardLifecycle.PERSONALIZED:
            raise CardError(
                CardErrorCode.COMMAND_REFUSED, "card is already personalized"
            )
        request = CertificateRequest(
            subject_name=subject_name,
            national_id=national_id,
            birthdate=birthdate,
            subject_public_key=self.__keys.public_part,
            proof_of_possession=b"",
        )
        proof = self._scheme.sign(
            self.__keys.private_part, canonical_encode_request(request)
        )
        return CertificateRequest(
            subject_name=subject_name,
            national_id=national_id,
            birthdate=birthdate,
            subject_public_key=self.__keys.public_part,
            proof_of_possession=proof,
        )

    def store_certificate(self, cert: IdentityCertificate) -> None:
        self._require_initialized()
        if self.locked_out:
            raise CardError(CardErrorCode.CARD_LOCKED_OUT)
        if self.lifecycle == CardLifecycle.PERSONALIZED:
            raise CardError(CardErrorCode.COMMAND_REFUSED, "certificate already stored")
        if cert.body.subject_public_key != self.__keys.public_part:
            raise CardError(
                CardErrorCode.CERT_KEY_MISMATCH,
                "certificate public key does not match card key",
            )
        self.__certificate = cert
        self.lifecycle = CardLifecycle.PERSONALIZED

    def verify_holder(
        self, probe: FingerprintTemplate
    ) -> Unlocked | Rejected | LockedOut:
        """Match-on-card: the decision is computed here; the template is not.

        Returns the match score, never the stored template.
        """
        self._require_initialized()
        if self.locked_out:
            raise CardError(CardErrorCode.CARD_LOCKED_OUT)
        result = match_templates(self.__template, probe, self.match_config)
        if result.decision:
            self.session_unlocked = True
            self.failed_attempts = 0
            return Unlocked(score=result.score)
        self.failed_attempts += 1
        if self.locked_out:
            self.session_unlocked = False
            return LockedOut()
        return Rejected(attempts_left=self.max_attempts - self.failed_attempts)

    def unlock_exempt(self) -> None:
        """Operator-attested unlock, honored only if the stored certificate
        carries the biometric exemption flag."""
        self._require_initialized()
        if self.locked_out:
            raise CardError(CardErrorCode.CARD_LOCKED_OUT)
        if self.__certificate is None:
            raise CardError(CardErrorCode.NO_CERTIFICATE)
        if not self.__certificate.body.biometric_exempt:
            raise CardError(
                CardErrorCode.COMMAND_REFUSED, "certificate is not biometric-exempt"
            )
        self.session_unlocked = True
        self.failed_attempts = 0

    def read_certificate(self) -> tuple[IdentityCertificate, bytes]:
        self._require_initialized()
        self._require_unlocked()
        if self.__certificate is None:
            raise CardError(CardErrorCode.NO_CERTIFICATE)
        return self.__certificate, self.__facial_image

    def sign_challenge(self, challenge: bytes) -> bytes:
        """Sign a verifier nonce under the domain-separated challenge tag."""
        self._require_initialized()
        self._require_unlocked()
        if len(challenge) < MIN_CHALLENGE_LENGTH:
            raise CardError(
                CardErrorCode.COMMAND_REFUSED,
                f"challenge must be >= {MIN_CHALLENGE_LENGTH} bytes",
            )
        return self._scheme.sign(
            self.__keys.private_part, CHALLENGE_TAG + bytes(challenge)
        )

    def end_session(self) -> None:
        self.session_unlocked = False

    # -- persistence (opaque, versioned blob) --------------------------------

    def to_blob(self) -> bytes:
        parts = [
            CARD_FILE_MAGIC,
            bytes([CARD_FILE_VERSION, int(self.lifecycle)]),
            struct.pack(
                ">QQ", self.failed_attempts, self.max_attempts
            ),
            struct.pack(
                ">ddQdQ",
                self.match_config.distance_tol,
                self.match_config.angle_tol,
                self.match_config.rotation_candidates,
                self.match_config.decision_threshold,
                self.match_config.min_enroll_minutiae,
            ),
        ]
        flags = (
            (1 if self.__keys is not None else 0)
            | (2 if self.__template is not None else 0)
            | (4 if self.__certificate is not None else 0)
        )
        parts.append(bytes([flags]))
        if self.__keys is not None:
            parts.append(self.__keys.private_part)
        if self.__template is not None:
            parts.append(_pack_template(self.__template))
        parts.append(struct.pack(">I", len(self.__facial_image)))
        parts.append(self.__facial_image)
        if self.__certificate is not None:
            body = canonical_encode_body(self.__certificate.body)
            parts.append(struct.pack(">I", len(body)) + body)
            sig = self.__certificate.signature
            parts.append(struct.pack(">I", len(sig)) + sig)
        return b"".join(parts)

    @classmethod
    def from_blob(cls, blob: bytes, scheme: SignatureScheme = DEFAULT_SCHEME) -> "Card":
        try:
            return cls._parse_blob(blob, scheme)
        except CardFileError:
            raise
        except Exception as exc:
            raise CardFileError(f"corrupt card file: {exc}") from exc

    @classmethod
    def _parse_blob(cls, blob: bytes, scheme: SignatureScheme) -> "Card":
        cursor = _Cursor(blob)
        if cursor.raw(4) != CARD_FILE_MAGIC:
            raise CardFileError("not a card file")
        if cursor.raw(1)[0] != CARD_FILE_VERSION:
            raise CardFileError("unsupported card file version")
        lifecycle = CardLifecycle(cursor.raw(1)[0])
        failed, max_attempts = struct.unpack(">QQ", cursor.raw(16))
        dtol, atol, rot, thr, min_enroll = struct.unpack(">ddQdQ", cursor.raw(40))
        card = cls(
            match_config=MatchConfig(
                distance_tol=dtol,
                angle_tol=atol,
                rotation_candidates=int(rot),
                decision_threshold=thr,
                min_enroll_minutiae=int(min_enroll),
            ),
            max_attempts=int(max_attempts),
            scheme=scheme,
        )
        flags = cursor.raw(1)[0]
        if flags & 1:
            card._Card__keys = generate_keypair(cursor.raw(32), scheme=scheme)
        if flags & 2:
            card._Card__template = _unpack_template(cursor)
        card._Card__facial_image = cursor.lp_bytes()
        if flags & 4:
            body = decode_certificate_body(cursor.lp_bytes())
            card._Card__certificate = IdentityCertificate(body, cursor.lp_bytes())
        cursor.expect_end()
        card.lifecycle = lifecycle
        card.failed_attempts = int(failed)
        return card

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_blob())

    @classmethod
    def load(cls, path: str | Path, scheme: SignatureScheme = DEFAULT_SCHEME) -> "Card":
        return cls.from_blob(Path(path).read_bytes(), scheme=scheme)


class _Cursor:
    def __init__(self, data: bytes) -> None:
        self._data = bytes(data)
        self._pos = 0

    def raw(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise CardFileError("truncated card file")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def lp_bytes(self) -> bytes:
        (n,) = struct.unpack(">I", self.raw(4))
        return self.raw(n)

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise CardFileError("trailing bytes in card file")


def _pack_template(template: FingerprintTemplate) -> bytes:
    label = template.finger_label.encode("utf-8")
    parts = [
        struct.pack(">I", len(label)),
        label,
        struct.pack(">d", template.quality),
        struct.pack(">I", len(template.minutiae)),
    ]
    for m in template.minutiae:
        parts.append(struct.pack(">ddd", m.x, m.y, m.angle))
        parts.append(bytes([0 if m.kind is MinutiaKind.RIDGE_ENDING else 1]))
    return b"".join(parts)


def _unpack_template(cursor: _Cursor) -> FingerprintTemplate:
    label = cursor.lp_bytes().decode("utf-8")
    (quality,) = struct.unpack(">d", cursor.raw(8))
    (count,) = struct.unpack(">I", cursor.raw(4))
    minutiae = []
    for _ in range(count):
        x, y, angle = struct.unpack(">ddd", cursor.raw(24))
        kind = (
            MinutiaKind.RIDGE_ENDING
            if cursor.raw(1)[0] == 0
            else MinutiaKind.BIFURCATION
        )
        minutiae.append(Minutia(x, y, angle, kind))
    return FingerprintTemplate(
        minutiae=tuple(minutiae), finger_label=label, quality=quality
    )
