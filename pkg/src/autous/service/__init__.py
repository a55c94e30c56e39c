"""HTTP service and embedded persistent case store."""

from .api import create_app
from .store import CaseStore, new_case_id

__all__ = ["CaseStore", "create_app", "new_case_id"]
