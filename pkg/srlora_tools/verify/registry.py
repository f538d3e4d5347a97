# srlora_tools/verify/registry.py
"""
Registry of verification properties grouped into named suites.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class PropertyCheck:
    """A named property; ``run(seed)`` returns its result."""
    name: str
    suite: str
    run: Callable[[int], PropertyResult]
    description: str = ""


class SuiteRegistry:
    """Singleton registry for all verification properties"""

    _instance = None
    _checks: Dict[str, PropertyCheck] = {}

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def register(self, check: PropertyCheck):
        """Register a property (replaces one with the same name)"""
        self._checks[check.name] = check

    def get(self, name: str) -> Optional[PropertyCheck]:
        return self._checks.get(name)

    def get_all_ids(self) -> List[str]:
        return list(self._checks.keys())

    def get_suite_names(self) -> List[str]:
        """Suites in registration order, plus ``all``"""
        names: List[str] = []
        for check in self._checks.values():
            if check.suite not in names:
                names.append(check.suite)
        return names + ["all"]

    def get_by_suite(self, suite: str) -> List[PropertyCheck]:
        if suite == "all":
            return list(self._checks.values())
        return [check for check in self._checks.values() if check.suite == suite]

    def clear(self):
        """Clear registry (mainly for testing)"""
        self._checks.clear()


# Global registry instance
registry = SuiteRegistry()


def verification_property(suite: str, name: Optional[str] = None, description: str = ""):
    """Decorator registering ``fn(seed) -> PropertyResult`` under ``suite``."""
    def wrap(fn: Callable[[int], PropertyResult]) -> Callable[[int], PropertyResult]:
        registry.register(PropertyCheck(name or fn.__name__, suite, fn, description or (fn.__doc__ or "").strip()))
        return fn
    return wrap
