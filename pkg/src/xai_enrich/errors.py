"""Exception types raised across the enrichment toolchain."""

from __future__ import annotations


class EnrichError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(EnrichError, ValueError):
    """An input violated a documented precondition."""


class DuplicateCandidateError(ValidationError):
    def __init__(self, candidate_id: str):
        super().__init__(f"duplicate candidate_id {candidate_id!r}")
        self.candidate_id = candidate_id


class UnmappedKeywordError(ValidationError):
    def __init__(self, keyword: str, explanation_id: str | None = None):
        where = f" (explanation {explanation_id!r})" if explanation_id else ""
        super().__init__(f"feature keyword {keyword!r} has no concept mapping{where}")
        self.keyword = keyword
        self.explanation_id = explanation_id


class ConfigurationError(EnrichError):
    """Missing endpoint, credential or malformed config file."""


class SourceError(EnrichError):
    """A remote source could not be reached or answered with an error."""


class RetryableSourceError(SourceError):
    def __init__(self, message: str, *, status_code: int | None = None, cause: Exception | None = None):
        super().__init__(message)
        self.status_code = status_code
        self.cause = cause


class PayloadDecodeError(SourceError):
    def __init__(self, source: str, field: str, detail: str = ""):
        msg = f"{source}: malformed payload at field {field!r}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.field = field


class OfflineCacheMiss(SourceError):
    def __init__(self, source_kind: str, query_hash: str, query: object):
        super().__init__(f"offline cache miss for {source_kind} query {query_hash[:12]}: {query}")
        self.source_kind = source_kind
        self.query_hash = query_hash


class CacheIOError(EnrichError, OSError):
    """Reading or writing a cache file failed."""


class JudgmentGapError(EnrichError):
    """Strict evaluation found ranked entries with no relevance judgment."""

    def __init__(self, missing: list[tuple[str, str, str]]):
        lines = ", ".join(f"{e}/{s}/{c}" for e, s, c in missing[:20])
        more = f" (+{len(missing) - 20} more)" if len(missing) > 20 else ""
        super().__init__(f"{len(missing)} unjudged entries: {lines}{more}")
        self.missing = missing
