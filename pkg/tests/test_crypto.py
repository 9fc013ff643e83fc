"""Primitives: deterministic keygen, sign/verify, seal/open, entropy streams."""

import pytest

from eidkit.crypto import (
    DecryptionFailed,
    EntropyStream,
    InvalidSeed,
    MAX_SEAL_PLAINTEXT,
    MessageTooLarge,
    derive_seed_bytes,
    derive_seed_int,
    generate_keypair,
    open_with_private,
    seal_to_public,
    sign,
    verify_signature,
)

S1 = bytes(range(32))
S2 = bytes([1]) + bytes(range(1, 32))  # differs from S1 in one byte


def test_keygen_deterministic():
    assert generate_keypair(S1) == generate_keypair(S1)


def test_keygen_distinct_seeds_distinct_keys():
    assert generate_keypair(S1).public_part != generate_keypair(S2).public_part


@pytest.mark.parametrize("length", [0, 16, 31, 33, 64])
def test_keygen_rejects_wrong_seed_length(length):
    with pytest.raises(InvalidSeed):
        generate_keypair(b"\x00" * length)


def test_sign_verify_round_trip():
    kp = generate_keypair(S1)
    sig = sign(kp.private_part, b"message")
    assert verify_signature(kp.public_part, b"message", sig)


def test_verify_rejects_tampered_message():
    kp = generate_keypair(S1)
    sig = sign(kp.private_part, b"message")
    assert not verify_signature(kp.public_part, b"messagf", sig)


def test_verify_rejects_wrong_key():
    kp_a, kp_b = generate_keypair(S1), generate_keypair(S2)
    sig = sign(kp_a.private_part, b"message")
    assert not verify_signature(kp_b.public_part, b"message", sig)


def test_verify_total_on_malformed_inputs():
    kp = generate_keypair(S1)
    assert not verify_signature(b"", b"m", b"")
    assert not verify_signature(b"short", b"m", b"\x00" * 64)
    assert not verify_signature(kp.public_part, b"m", b"\x00" * 3)
    assert not verify_signature(None, b"m", b"x")


def test_sign_verify_round_trip_many_seeds():
    # Round-trip property over >= 1000 random (seed, message) cases.
    entropy = EntropyStream(2024, "crypto-roundtrip")
    for _ in range(1000):
        kp = generate_keypair(entropy.take(32))
        message = entropy.take(40)
        assert verify_signature(kp.public_part, message, sign(kp.private_part, message))


def test_unforgeability_single_bit_flips():
    # Exhaustive over the first 256 bit positions of message and signature.
    kp = generate_keypair(S1)
    message = bytearray(EntropyStream(7, "flip-msg").take(64))
    sig = sign(kp.private_part, bytes(message))
    for bit in range(256):
        mutated = bytearray(message)
        mutated[bit // 8] ^= 1 << (bit % 8)
        assert not verify_signature(kp.public_part, bytes(mutated), sig)
    for bit in range(256):
        mutated_sig = bytearray(sig)
        mutated_sig[bit // 8] ^= 1 << (bit % 8)
        assert not verify_signature(kp.public_part, bytes(message), bytes(mutated_sig))


def test_seal_open_round_trip():
    kp = generate_keypair(S1)
    assert open_with_private(kp.private_part, seal_to_public(kp.public_part, b"secret")) == b"secret"


def test_seal_open_empty_plaintext():
    kp = generate_keypair(S1)
    assert open_with_private(kp.private_part, seal_to_public(kp.public_part, b"")) == b""


def test_open_with_wrong_key_fails():
    kp_a, kp_b = generate_keypair(S1), generate_keypair(S2)
    ciphertext = seal_to_public(kp_a.public_part, b"secret")
    with pytest.raises(DecryptionFailed):
        open_with_private(kp_b.private_part, ciphertext)


def test_open_corrupted_ciphertext_fails():
    kp = generate_keypair(S1)
    ciphertext = bytearray(seal_to_public(kp.public_part, b"secret"))
    ciphertext[-1] ^= 0x01
    with pytest.raises(DecryptionFailed):
        open_with_private(kp.private_part, bytes(ciphertext))
    with pytest.raises(DecryptionFailed):
        open_with_private(kp.private_part, b"too-short")


def test_seal_rejects_oversize():
    kp = generate_keypair(S1)
    with pytest.raises(MessageTooLarge):
        seal_to_public(kp.public_part, b"\x00" * (MAX_SEAL_PLAINTEXT + 1))
    # the boundary itself is accepted
    seal_to_public(kp.public_part, b"\x00" * MAX_SEAL_PLAINTEXT)


def test_entropy_stream_deterministic_and_label_scoped():
    a = EntropyStream(42, "nonce")
    b = EntropyStream(42, "nonce")
    c = EntropyStream(42, "other")
    chunk_a = a.take(48)
    assert chunk_a == b.take(48)
    assert chunk_a != c.take(48)
    # consecutive takes never repeat
    assert a.take(16) != a.take(16)


def test_derive_seed_helpers():
    assert derive_seed_bytes(9, "card") == derive_seed_bytes(9, "card")
    assert derive_seed_bytes(9, "card") != derive_seed_bytes(9, "sensor")
    assert len(derive_seed_bytes(9, "card")) == 32
    assert derive_seed_int(9, "a") != derive_seed_int(10, "a")
