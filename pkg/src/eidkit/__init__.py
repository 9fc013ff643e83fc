"""Privacy-preserving electronic identity card toolkit.

Biometric templates live only on the card; the card computes the match
decision itself and gates every private-key operation on it. A national
authority issues and revokes identity certificates, and border control
validates the passport end to end with a challenge-response proof of
key possession.
"""

from .crypto import (
    DEFAULT_SCHEME,
    EntropyStream,
    KeyPair,
    DecryptionFailed,
    InvalidSeed,
    MessageTooLarge,
    derive_seed_bytes,
    derive_seed_int,
    generate_keypair,
    open_with_private,
    seal_to_public,
    sign,
    verify_signature,
)
from .pki import (
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
    decode_certificate_body,
    decode_crl,
    validate_certificate,
)
from .biometrics import (
    EmptyTemplate,
    FingerprintTemplate,
    InvalidPopulation,
    MatchConfig,
    MatchResult,
    Minutia,
    MinutiaKind,
    PointCloud,
    RatesReport,
    RawScan,
    SensorModel,
    acquire_scan,
    enhance_scan,
    enroll_quality,
    evaluate_rates,
    extract_features,
    match_templates,
    scan_to_template,
    synthesize_finger,
)
from .card import (
    Card,
    CardError,
    CardErrorCode,
    CardLifecycle,
    LockedOut,
    Rejected,
    Unlocked,
)
from .authority import (
    AuthorityPolicy,
    BreederDocument,
    DocumentKind,
    IssuingAuthority,
    LedgerCorrupt,
    RegistryRecord,
    RegistryStatus,
    RequestRejected,
    UnknownOrAlreadyRevoked,
    VettingDecision,
    VettingDossier,
    VettingStatus,
    vet_identity,
)
from .verifier import (
    EXEMPT,
    TrustStore,
    TrustStoreError,
    VerificationReport,
    run_challenge,
    verify_passport,
)
from .config import ScenarioConfig
from .scenarios import SCENARIO_NAMES, issue_passport, run_scenario

__version__ = "0.1.0"
