"""Exception types shared across the pipeline."""


class ScreenIntelError(Exception):
    """Base class for all pipeline errors."""


class MalformedManifestLine(ScreenIntelError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"manifest line {line_no}: {reason}")


class MissingImage(ScreenIntelError):
    pass


class DuplicateId(ScreenIntelError):
    pass


class InconsistentCounts(ScreenIntelError):
    pass


class UnsupportedImageFormat(ScreenIntelError):
    pass


class IoFailure(ScreenIntelError):
    pass


class UnknownPromptVersion(ScreenIntelError):
    pass


class BackendUnavailable(ScreenIntelError):
    pass


class RateLimited(ScreenIntelError):
    pass


class EmptyReply(ScreenIntelError):
    pass


class ImageTooSmall(ScreenIntelError):
    pass


class NoSectionsFound(ScreenIntelError):
    pass


class IllegalScoreValue(ScreenIntelError):
    pass


class NoOverlap(ScreenIntelError):
    pass


class CorpusTooSmall(ScreenIntelError):
    pass


class ConfigError(ScreenIntelError):
    pass


class StageError(ScreenIntelError):
    def __init__(self, stage: str, detail: str, screenshot_id: str | None = None):
        self.stage = stage
        self.screenshot_id = screenshot_id
        where = f"{stage}" + (f" [{screenshot_id}]" if screenshot_id else "")
        super().__init__(f"{where}: {detail}")
