"""Exception hierarchy shared across the package."""


class SeqaugError(Exception):
    """Base class for all package errors."""


class ManifestError(SeqaugError):
    """Malformed or inconsistent dataset manifest."""


class SplitError(SeqaugError):
    """Invalid train/test split request or file."""


class StoreError(SeqaugError):
    """Sequence-store access or layout violation."""


class IngestError(SeqaugError):
    """Precomputed dump cannot be mapped into a sequence store."""


class ProviderError(SeqaugError):
    """A generation provider failed; carries provider id and seed."""

    def __init__(self, message: str, provider_id: str = "", seed: int | None = None):
        super().__init__(message)
        self.provider_id = provider_id
        self.seed = seed


class ConfigError(SeqaugError):
    """Invalid configuration value or experiment config file."""


class TrainingDiverged(SeqaugError):
    """Non-finite loss encountered; carries stage diagnostics."""

    def __init__(self, message: str, epoch: int, step: int, last_lr: float):
        super().__init__(message)
        self.epoch = epoch
        self.step = step
        self.last_lr = last_lr


class ResultsError(SeqaugError):
    """Run-record store violation (duplicate key, missing baseline, ...)."""
