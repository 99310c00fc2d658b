"""Password digests and session tokens.

Digests are salted PBKDF2-HMAC-SHA256, self-describing so parameters can
be raised later without invalidating stored credentials. Verification is
constant time and runs against a dummy digest for unknown users so login
timing does not reveal which usernames exist.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets

PBKDF2_ITERATIONS = 60_000
_SALT_BYTES = 16
_TOKEN_BYTES = 16  # 128-bit session tokens

_DUMMY_DIGEST = None


def hash_password(password: str, *, salt: bytes | None = None,
                  iterations: int | None = None) -> str:
    iterations = iterations if iterations is not None else PBKDF2_ITERATIONS
    salt = salt if salt is not None else secrets.token_bytes(_SALT_BYTES)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2-sha256${iterations}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = stored.split("$")
        if scheme != "pbkdf2-sha256":
            return False
        candidate = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(candidate.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


def dummy_digest() -> str:
    """A throwaway digest to burn comparable time on unknown usernames."""
    global _DUMMY_DIGEST
    if _DUMMY_DIGEST is None:
        _DUMMY_DIGEST = hash_password(secrets.token_hex(8))
    return _DUMMY_DIGEST


def new_session_token() -> str:
    return secrets.token_urlsafe(_TOKEN_BYTES)
