"""Asymmetric primitives behind a pluggable scheme contract.

The concrete scheme shipped here signs with Ed25519 and seals with
X25519 key agreement plus ChaCha20-Poly1305 (both ~128-bit security).
Nothing outside this module depends on the choice: any object
implementing :class:`SignatureScheme` can be swapped in, as long as it
derives key pairs deterministically from a 32-byte seed.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from typing import Protocol

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

SEED_LENGTH = 32
MAX_SEAL_PLAINTEXT = 64 * 1024


class InvalidSeed(Exception):
    """Key-pair seed is not exactly 32 bytes."""


class MessageTooLarge(Exception):
    """Plaintext exceeds the sealing size limit."""


class DecryptionFailed(Exception):
    """Ciphertext does not open under this private key."""


@dataclass(frozen=True)
class KeyPair:
    """Seed-derived key pair; ``private_part`` is opaque secret bytes."""

    private_part: bytes
    public_part: bytes


class SignatureScheme(Protocol):
    """Contract every pluggable scheme must satisfy."""

    name: str

    def keypair_from_seed(self, seed: bytes) -> KeyPair: ...

    def sign(self, private_part: bytes, message: bytes) -> bytes: ...

    def verify(self, public_part: bytes, message: bytes, signature: bytes) -> bool: ...

    def seal(self, public_part: bytes, plaintext: bytes) -> bytes: ...

    def open(self, private_part: bytes, ciphertext: bytes) -> bytes: ...


def _raw_public(key) -> bytes:
    return key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


class Curve25519Scheme:
    """Ed25519 signatures + X25519/ChaCha20-Poly1305 sealing.

    A single 32-byte seed deterministically yields two subkeys via
    domain-separated SHA-256; the public part is the concatenation
    ``ed25519_pub || x25519_pub`` (64 bytes).
    """

    name = "ed25519+x25519"

    _SIGN_DOMAIN = b"eidkit/subkey/sign"
    _SEAL_DOMAIN = b"eidkit/subkey/seal"
    _HKDF_INFO = b"eidkit/seal/v1"

    def _sign_key(self, seed: bytes) -> Ed25519PrivateKey:
        raw = hashlib.sha256(self._SIGN_DOMAIN + seed).digest()
        return Ed25519PrivateKey.from_private_bytes(raw)

    def _seal_key(self, seed: bytes) -> X25519PrivateKey:
        raw = hashlib.sha256(self._SEAL_DOMAIN + seed).digest()
        return X25519PrivateKey.from_private_bytes(raw)

    def keypair_from_seed(self, seed: bytes) -> KeyPair:
        if not isinstance(seed, (bytes, bytearray)) or len(seed) != SEED_LENGTH:
            raise InvalidSeed(f"seed must be exactly {SEED_LENGTH} bytes")
        seed = bytes(seed)
        public = _raw_public(self._sign_key(seed)) + _raw_public(self._seal_key(seed))
        return KeyPair(private_part=seed, public_part=public)

    def sign(self, private_part: bytes, message: bytes) -> bytes:
        return self._sign_key(private_part).sign(bytes(message))

    def verify(self, public_part: bytes, message: bytes, signature: bytes) -> bool:
        try:
            pub = Ed25519PublicKey.from_public_bytes(bytes(public_part[:32]))
            pub.verify(bytes(signature), bytes(message))
            return True
        except (InvalidSignature, ValueError, TypeError):
            return False

    def _aead_key(self, shared: bytes, ephemeral_pub: bytes, recipient_pub: bytes) -> bytes:
        kdf = HKDF(
            algorithm=hashes.SHA256(),
            length=32,
            salt=ephemeral_pub + recipient_pub,
            info=self._HKDF_INFO,
        )
        return kdf.derive(shared)

    def seal(self, public_part: bytes, plaintext: bytes) -> bytes:
        if len(plaintext) > MAX_SEAL_PLAINTEXT:
            raise MessageTooLarge(
                f"plaintext of {len(plaintext)} bytes exceeds {MAX_SEAL_PLAINTEXT}"
            )
        recipient_pub = bytes(public_part[32:64])
        recipient = X25519PublicKey.from_public_bytes(recipient_pub)
        ephemeral = X25519PrivateKey.from_private_bytes(os.urandom(32))
        ephemeral_pub = _raw_public(ephemeral)
        key = self._aead_key(ephemeral.exchange(recipient), ephemeral_pub, recipient_pub)
        # Nonce is fixed: the key is unique per message (fresh ephemeral).
        box = ChaCha20Poly1305(key).encrypt(b"\x00" * 12, bytes(plaintext), None)
        return ephemeral_pub + box

    def open(self, private_part: bytes, ciphertext: bytes) -> bytes:
        if len(ciphertext) < 32 + 16:
            raise DecryptionFailed("ciphertext too short")
        try:
            recipient = self._seal_key(private_part)
            recipient_pub = _raw_public(recipient)
            ephemeral_pub = bytes(ciphertext[:32])
            peer = X25519PublicKey.from_public_bytes(ephemeral_pub)
            key = self._aead_key(recipient.exchange(peer), ephemeral_pub, recipient_pub)
            return ChaCha20Poly1305(key).decrypt(b"\x00" * 12, bytes(ciphertext[32:]), None)
        except DecryptionFailed:
            raise
        except Exception as exc:
            raise DecryptionFailed(str(exc)) from exc


DEFAULT_SCHEME = Curve25519Scheme()


# ---------------------------------------------------------------------------
# Module-level convenience wrappers around the default scheme


def generate_keypair(seed: bytes, scheme: SignatureScheme = DEFAULT_SCHEME) -> KeyPair:
    """Deterministically derive a key pair from a 32-byte seed."""
    return scheme.keypair_from_seed(seed)


def sign(private_part: bytes, message: bytes, scheme: SignatureScheme = DEFAULT_SCHEME) -> bytes:
    return scheme.sign(private_part, message)


def verify_signature(
    public_part: bytes,
    message: bytes,
    signature: bytes,
    scheme: SignatureScheme = DEFAULT_SCHEME,
) -> bool:
    """Total check: malformed inputs return False, never raise."""
    try:
        return scheme.verify(public_part, message, signature)
    except Exception:
        return False


def seal_to_public(
    public_part: bytes, plaintext: bytes, scheme: SignatureScheme = DEFAULT_SCHEME
) -> bytes:
    return scheme.seal(public_part, plaintext)


def open_with_private(
    private_part: bytes, ciphertext: bytes, scheme: SignatureScheme = DEFAULT_SCHEME
) -> bytes:
    return scheme.open(private_part, ciphertext)


def digest_sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


# ---------------------------------------------------------------------------
# Deterministic entropy for scripted runs


class EntropyStream:
    """Deterministic byte stream from (seed, label) via SHA-256 counter mode.

    All scripted randomness (card entropy, nonces, sub-seeds) flows through
    named streams so that runs are reproducible and independent of call
    interleaving across labels.
    """

    def __init__(self, seed: int | bytes, label: str = "") -> None:
        if isinstance(seed, int):
            seed_bytes = str(seed).encode("ascii")
        else:
            seed_bytes = bytes(seed)
        self._key = hashlib.sha256(
            b"eidkit/stream\x00" + label.encode("utf-8") + b"\x00" + seed_bytes
        ).digest()
        self._counter = 0
        self._pending = b""

    def take(self, n: int) -> bytes:
        while len(self._pending) < n:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._pending += block
        out, self._pending = self._pending[:n], self._pending[n:]
        return out


def derive_seed_bytes(seed: int | bytes, label: str) -> bytes:
    """32 bytes of label-scoped sub-seed material."""
    return EntropyStream(seed, label).take(32)


def derive_seed_int(seed: int | bytes, label: str) -> int:
    """Label-scoped 64-bit sub-seed for RNG construction."""
    return int.from_bytes(EntropyStream(seed, label).take(8), "big")
