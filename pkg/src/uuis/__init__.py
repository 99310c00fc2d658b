"""Unified University Inventory System (UUIS).

A multi-tenant inventory service for a university hierarchy: scoped
role-based permissions with delegation, a request/approval workflow for
borrowing, reserving, and transferring assets, search and reports, an
append-only audit trail, and snapshot backup/restore. Exposed over HTTP
(:mod:`uuis.server`) and a local operator CLI (:mod:`uuis.cli`).
"""

__version__ = "0.1.0"
