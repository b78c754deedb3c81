class StyleDivError(Exception):
    """Base class for errors raised by this package."""

    code = "error"

    def to_record(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ProviderUnavailableError(StyleDivError):
    code = "provider_unavailable"

    def __init__(self, message: str, document_id: str | None = None):
        super().__init__(message if document_id is None else f"{message} (document {document_id})")
        self.document_id = document_id


class DimensionMismatchError(StyleDivError, ValueError):
    code = "dimension_mismatch"


class PartialRewriteError(StyleDivError):
    code = "partial_rewrite"

    def __init__(self, document_id, failed: list[str], completed: dict[str, str], causes=None):
        super().__init__(f"rewrite failed for document {document_id}: prompts {failed}")
        self.document_id = document_id
        self.failed = list(failed)
        self.completed = dict(completed)
        self.causes = dict(causes or {})


class DatasetError(StyleDivError, ValueError):
    code = "dataset"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ModelFormatError(StyleDivError, ValueError):
    code = "model_format"


class ConfigMismatchError(StyleDivError):
    code = "config_mismatch"


class MissingArtifactError(StyleDivError, FileNotFoundError):
    code = "missing_artifact"
