"""Error types shared across the service.

Every failure surfaced to callers derives from :class:`UuisError` and
carries a stable ``code`` string; the HTTP layer maps families of these
onto status codes and renders them uniformly as ``{"error", "detail"}``.
"""

from __future__ import annotations


class UuisError(Exception):
    """Base class for all service errors."""

    code = "error"

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail or self.code


# --- authentication (401) ---

class AuthenticationFailed(UuisError):
    code = "authentication_failed"


# --- authorization (403) ---

class PermissionDenied(UuisError):
    code = "permission_denied"


class ExceedsGrantorAuthority(PermissionDenied):
    code = "exceeds_grantor_authority"


class AccountInactive(PermissionDenied):
    code = "account_inactive"


class InactiveUser(PermissionDenied):
    code = "inactive_user"


class AdminNetworkRequired(PermissionDenied):
    code = "admin_network_required"


# --- missing entities (404) ---

class NotFound(UuisError):
    code = "not_found"


# --- state conflicts (409) ---

class Conflict(UuisError):
    code = "conflict"


class InvalidState(Conflict):
    code = "invalid_state"


class ConstraintViolation(Conflict):
    code = "constraint_violation"


class DuplicateSerial(ConstraintViolation):
    code = "duplicate_serial"


class DuplicateName(ConstraintViolation):
    code = "duplicate_name"


class DuplicateRoom(ConstraintViolation):
    code = "duplicate_room"


class UnitNotEmpty(Conflict):
    code = "unit_not_empty"


class LocationOccupied(Conflict):
    code = "location_occupied"


class AssetUnavailable(Conflict):
    code = "asset_unavailable"


class NonEmptyStore(Conflict):
    code = "non_empty_store"


# --- input validation (422) ---

class ValidationFailed(UuisError):
    """Invalid input. For bulk imports, ``rows`` holds per-row diagnostics
    as ``{"row": int, "column": str, "reason": str}`` (row 0 = file level)."""

    code = "validation_failed"

    def __init__(self, detail: str = "", rows: list[dict] | None = None):
        super().__init__(detail)
        self.rows = rows or []


class InvalidHierarchy(ValidationFailed):
    code = "invalid_hierarchy"


class EmptyDelegation(ValidationFailed):
    code = "empty_delegation"


class EmptyRequest(ValidationFailed):
    code = "empty_request"


class ImmutableField(ValidationFailed):
    code = "immutable_field"


class CrossUnitTransfer(ValidationFailed):
    code = "cross_unit_transfer"


class MixedOwnership(ValidationFailed):
    code = "mixed_ownership"


class UnknownType(ValidationFailed):
    code = "unknown_type"


class UnknownSerial(ValidationFailed):
    code = "unknown_serial"


class SourceIsExternal(ValidationFailed):
    code = "source_is_external"


class VersionMismatch(ValidationFailed):
    code = "version_mismatch"


# --- timeouts (408) ---

class QueryTimeout(UuisError):
    code = "query_timeout"


# --- infrastructure ---

class IoFailure(UuisError):
    code = "io_failure"


class TransportFailure(UuisError):
    code = "transport_failure"
