"""Exception taxonomy shared across the package.

Parse-stage errors all carry ``file`` and ``line`` context so that callers
(and the CLI) can point at the offending input. ``line`` is 1-based; 0 means
the error concerns the file as a whole (e.g. a missing meta record).
"""

from __future__ import annotations


class CommtraceError(Exception):
    """Base class for everything this package raises on purpose."""


class InvariantViolation(CommtraceError):
    """A record or record set violates a schema invariant at write time."""


# ---------------------------------------------------------------------------
# log / document format errors

class TraceFormatError(CommtraceError):
    def __init__(self, message: str, *, file: str = "<stream>", line: int = 0):
        super().__init__(f"{file}:{line}: {message}")
        self.file = file
        self.line = line


class MalformedRecord(TraceFormatError):
    pass


class DanglingReference(TraceFormatError):
    def __init__(self, kind: str, ref_id: object, *, file: str = "<stream>", line: int = 0):
        super().__init__(f"dangling {kind} reference: {ref_id!r}", file=file, line=line)
        self.kind = kind
        self.ref_id = ref_id


class MissingMeta(TraceFormatError):
    def __init__(self, *, file: str = "<stream>"):
        super().__init__("no meta record in log", file=file, line=0)


class DuplicateMeta(TraceFormatError):
    def __init__(self, *, file: str = "<stream>", line: int = 0):
        super().__init__("more than one meta record", file=file, line=line)


class FreeWithoutAlloc(TraceFormatError):
    def __init__(self, base: int, *, file: str = "<stream>", line: int = 0):
        super().__init__(f"free of never-allocated base 0x{base:x}", file=file, line=line)
        self.base = base


class VersionMismatch(TraceFormatError):
    def __init__(self, found: object, expected: int, *, file: str = "<stream>"):
        super().__init__(f"schema_version {found!r}, expected {expected}", file=file, line=0)
        self.found = found
        self.expected = expected


# ---------------------------------------------------------------------------
# simulator errors

class ScenarioError(CommtraceError):
    pass


class UnsupportedSize(ScenarioError):
    pass


class NoRoute(ScenarioError):
    pass


# ---------------------------------------------------------------------------
# completion registry errors

class RegistryError(CommtraceError):
    pass


class PoolExhausted(RegistryError):
    pass


class SlotNotArmed(RegistryError):
    pass


class DoubleComplete(RegistryError):
    pass


# ---------------------------------------------------------------------------
# correlation errors (raised by the strict single-op entry points; the full
# pipeline downgrades them to MatchReport entries)

class CorrelationError(CommtraceError):
    pass


class NoConnection(CorrelationError):
    pass


class AmbiguousRemote(CorrelationError):
    def __init__(self, message: str, candidates: list[str]):
        super().__init__(f"{message} (candidates: {', '.join(candidates)})")
        self.candidates = candidates


class AmbiguousAssociation(CorrelationError):
    def __init__(self, message: str, candidates: list[tuple]):
        super().__init__(f"{message} ({len(candidates)} candidates)")
        self.candidates = candidates


class OrphanUct(CorrelationError):
    pass


# ---------------------------------------------------------------------------
# filter errors

class FilterError(CommtraceError):
    pass


class UnknownProc(FilterError):
    pass


class UnknownNode(FilterError):
    pass


class UnknownFilterValue(FilterError):
    pass
