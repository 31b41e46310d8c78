# Exceptions raised by the bprnn package. They all derive from ValueError
# so that callers which only know about built-in errors keep working.


class BprnnError(ValueError):
    pass


class AlistFormatError(BprnnError):

    # line_number is 1-based, as shown by any text editor
    def __init__(self, message: str, line_number: int = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GraphMismatchError(BprnnError):
    pass


class WeightFileError(BprnnError):
    pass


class ConfigError(BprnnError):
    pass


class TrainingError(BprnnError):

    def __init__(self, message: str, batch_index: int = None):
        self.batch_index = batch_index
        if batch_index is not None:
            message = f"batch {batch_index}: {message}"
        super().__init__(message)
