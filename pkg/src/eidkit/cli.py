"""Operator command line: issue, verify, revoke, rates, scenario.

Exit codes: 0 accept/success, 2 usage error, 3 protocol reject,
4 infrastructure or state error. Errors print a machine-readable JSON
object. The run seed resolves as --seed, then the config file, then the
EID_SEED environment variable, then 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .authority import (
    BreederDocument,
    DocumentKind,
    IssuingAuthority,
    LedgerCorrupt,
    RequestRejected,
    UnknownOrAlreadyRevoked,
    VettingStatus,
    vet_identity,
)
from .biometrics import FingerprintTemplate, evaluate_rates, synthesize_finger, scan_to_template
from .card import Card, CardError, CardErrorCode, CardFileError
from .config import ScenarioConfig
from .crypto import derive_seed_int
from .pki import RevocationReason
from .scenarios import (
    DEFAULT_SUBJECT,
    SCENARIO_NAMES,
    issue_passport,
    run_scenario,
    verifier_entropy,
)
from .verifier import EXEMPT, TrustStore, TrustStoreError, verify_passport

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_REJECT = 3
EXIT_STATE = 4

_REASON_BY_NAME = {r.name.lower(): r for r in RevocationReason}


class CliError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = EXIT_STATE) -> None:
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eidkit",
        description="Electronic identity card toolkit: issuance, border "
        "verification, revocation, biometric error rates, attack scenarios.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--now", type=int, help="override the simulated clock")
    parser.add_argument("--out", help="write the JSON result here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p_issue = sub.add_parser("issue", help="run the full passport request flow")
    p_issue.add_argument("--card", required=True, help="card file to create")
    p_issue.add_argument("--name", default=DEFAULT_SUBJECT["subject_name"])
    p_issue.add_argument("--national-id", default=DEFAULT_SUBJECT["national_id"])
    p_issue.add_argument("--birthdate", default=DEFAULT_SUBJECT["birthdate"])
    p_issue.add_argument(
        "--doc",
        action="append",
        default=[],
        metavar="KIND[:verified|unverified]",
        help="breeder document, repeatable (e.g. birth_certificate:verified)",
    )
    p_issue.add_argument(
        "--finger-seed",
        type=int,
        default=None,
        help="identifies the citizen's physical finger (default: from run seed)",
    )

    p_verify = sub.add_parser("verify", help="run the border validation protocol")
    p_verify.add_argument("--card", required=True, help="card file to present")
    probe = p_verify.add_mutually_exclusive_group(required=True)
    probe.add_argument("--probe", help="probe template JSON file")
    probe.add_argument(
        "--finger-seed",
        type=int,
        help="scan this physical finger at the border",
    )
    probe.add_argument(
        "--exempt",
        action="store_true",
        help="operator attests a fingerprint exemption",
    )
    p_verify.add_argument(
        "--scan-seed", type=int, default=None, help="sensor noise seed for the scan"
    )

    p_revoke = sub.add_parser("revoke", help="revoke a serial and republish the CRL")
    p_revoke.add_argument("--serial", type=int, required=True)
    p_revoke.add_argument(
        "--reason", required=True, choices=sorted(_REASON_BY_NAME)
    )

    p_rates = sub.add_parser("rates", help="FER/FRR/FAR evaluation, CSV on stdout")
    p_rates.add_argument("--population", type=int, required=True)
    p_rates.add_argument(
        "--thresholds", required=True, help="comma-separated ascending thresholds"
    )
    p_rates.add_argument("--trials", type=int, default=3, help="genuine trials per subject")
    p_rates.add_argument(
        "--minutiae-range", default="8,40", metavar="LO,HI", help="per-finger minutiae count range"
    )

    p_scenario = sub.add_parser("scenario", help="run a scripted end-to-end scenario")
    p_scenario.add_argument("name", choices=SCENARIO_NAMES)
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    doc = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise CliError("ConfigMissing", f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError("ConfigInvalid", f"bad config JSON: {exc}", EXIT_USAGE)
    if args.seed is not None:
        doc["seed"] = args.seed
    elif "seed" not in doc and os.environ.get("EID_SEED"):
        try:
            doc["seed"] = int(os.environ["EID_SEED"])
        except ValueError:
            raise CliError("ConfigInvalid", "EID_SEED must be an integer", EXIT_USAGE)
    if args.now is not None:
        doc["now"] = args.now
    try:
        return ScenarioConfig.from_dict(doc)
    except (ValueError, TypeError) as exc:
        raise CliError("ConfigInvalid", str(exc), EXIT_USAGE)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(doc: dict, out: str | None) -> None:
    _emit(json.dumps(doc, sort_keys=True) + "\n", out)


def _parse_documents(specs: list[str]) -> tuple[BreederDocument, ...]:
    kinds = {k.value: k for k in DocumentKind}
    documents = []
    for spec in specs:
        kind_name, _, flag = spec.partition(":")
        if kind_name not in kinds:
            raise CliError(
                "UsageError",
                f"unknown document kind {kind_name!r};"
                f" expected one of {sorted(kinds)}",
                EXIT_USAGE,
            )
        if flag not in ("", "verified", "unverified"):
            raise CliError(
                "UsageError", f"bad document flag {flag!r}", EXIT_USAGE
            )
        documents.append(
            BreederDocument(kinds[kind_name], verified=flag != "unverified")
        )
    return tuple(documents)


def _load_trust_store(config: ScenarioConfig) -> TrustStore:
    path = config.trust_store_path
    if not path or not Path(path).exists():
        raise CliError("TrustStoreMissing", f"trust store not found: {path}")
    store = TrustStore.load(path)
    store.max_crl_age_seconds = config.max_crl_age_seconds
    return store


def _refresh_trust_store(config: ScenarioConfig, authority: IssuingAuthority) -> None:
    path = config.trust_store_path
    if not path:
        raise CliError("ConfigInvalid", "paths.trust_store is not configured")
    if Path(path).exists():
        store = TrustStore.load(path)
    else:
        store = TrustStore(max_crl_age_seconds=config.max_crl_age_seconds)
    store.add_authority(authority.authority_id, authority.public_key)
    store.add_crl(authority.publish_crl(config.now))
    store.save(path)


def _load_authority(config: ScenarioConfig, *, must_exist: bool) -> IssuingAuthority:
    path = config.ledger_path
    if not path:
        raise CliError("ConfigInvalid", "paths.ledger is not configured")
    if Path(path).exists():
        return IssuingAuthority.load(
            path, config.authority_id, config.ca_seed(), policy=config.policy
        )
    if must_exist:
        raise CliError("LedgerMissing", f"ledger not found: {path}")
    return IssuingAuthority(config.authority_id, config.ca_seed(), policy=config.policy)


# ---------------------------------------------------------------------------
# Commands


def cmd_issue(args: argparse.Namespace) -> int:
    config = load_config(args)
    card_path = Path(args.card)
    if card_path.exists():
        raise CliError(
            CardErrorCode.ALREADY_INITIALIZED.value,
            f"card file already exists: {card_path}",
        )
    authority = _load_authority(config, must_exist=False)
    documents = _parse_documents(args.doc)
    passport = issue_passport(
        config,
        subject_name=args.name,
        national_id=args.national_id,
        birthdate=args.birthdate,
        documents=documents,
        finger_seed=args.finger_seed,
        authority=authority,
    )
    passport.card.save(card_path)
    authority.save(config.ledger_path)
    _refresh_trust_store(config, authority)
    _emit_json(
        {
            "serial": passport.serial,
            "national_id": passport.certificate.body.national_id,
            "biometric_exempt": passport.certificate.body.biometric_exempt,
            "valid_to": passport.certificate.body.valid_to,
        },
        args.out,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = load_config(args)
    card_path = Path(args.card)
    if not card_path.exists():
        raise CliError("CardMissing", f"card file not found: {card_path}")
    card = Card.load(card_path)
    trust = _load_trust_store(config)

    if args.exempt:
        probe = EXEMPT
    elif args.probe:
        probe_path = Path(args.probe)
        if not probe_path.exists():
            raise CliError("ProbeMissing", f"probe file not found: {probe_path}")
        probe = FingerprintTemplate.from_json(probe_path.read_text(encoding="utf-8"))
    else:
        truth = synthesize_finger(
            args.finger_seed, config.finger_minutiae, label=f"finger-{args.finger_seed}"
        )
        scan_seed = (
            args.scan_seed
            if args.scan_seed is not None
            else derive_seed_int(config.seed, "scan/border")
        )
        probe = scan_to_template(
            truth, config.sensor, config.match, scan_seed, label="border-probe"
        )

    report = verify_passport(card, probe, trust, config.now, verifier_entropy(config))
    card.save(card_path)  # retry counters and lockout persist
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK if report.accepted else EXIT_REJECT


def cmd_revoke(args: argparse.Namespace) -> int:
    config = load_config(args)
    authority = _load_authority(config, must_exist=True)
    reason = _REASON_BY_NAME[args.reason]
    authority.revoke_certificate(args.serial, reason, config.now)
    authority.save(config.ledger_path)
    _refresh_trust_store(config, authority)
    _emit_json(
        {"revoked": args.serial, "reason": args.reason, "reason_code": reason.value},
        args.out,
    )
    return EXIT_OK


def cmd_rates(args: argparse.Namespace) -> int:
    config = load_config(args)
    try:
        thresholds = [float(t) for t in args.thresholds.split(",") if t]
        lo, hi = (int(v) for v in args.minutiae_range.split(","))
    except ValueError as exc:
        raise CliError("UsageError", f"bad numeric argument: {exc}", EXIT_USAGE)
    report = evaluate_rates(
        args.population,
        config.sensor,
        thresholds,
        args.trials,
        config.seed,
        match_config=config.match,
        minutiae_range=(lo, hi),
    )
    _emit(report.to_csv(), args.out)
    return EXIT_OK


def cmd_scenario(args: argparse.Namespace) -> int:
    config = load_config(args)
    outcome = run_scenario(args.name, config)
    _emit(outcome.transcript_json(config), args.out)
    return EXIT_OK if outcome.passed else EXIT_REJECT


_COMMANDS = {
    "issue": cmd_issue,
    "verify": cmd_verify,
    "revoke": cmd_revoke,
    "rates": cmd_rates,
    "scenario": cmd_scenario,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except CliError as exc:
        _error(exc.code, str(exc))
        return exc.exit_code
    except CardError as exc:
        _error(exc.code.value, str(exc))
        return EXIT_STATE
    except (
        CardFileError,
        LedgerCorrupt,
        TrustStoreError,
        UnknownOrAlreadyRevoked,
        RequestRejected,
        FileNotFoundError,
    ) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_STATE
    except ValueError as exc:
        _error("UsageError", str(exc))
        return EXIT_USAGE


def _error(code: str, message: str) -> None:
    sys.stdout.write(
        json.dumps({"error": {"code": code, "message": message}}, sort_keys=True) + "\n"
    )


def entrypoint() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
