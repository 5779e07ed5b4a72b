"""Exception types shared across the package."""


class QCNNError(Exception):
    pass


class DimensionError(QCNNError, ValueError):
    pass


class ZeroProbabilityError(QCNNError, ArithmeticError):
    """A postselected outcome has zero probability (e.g. the filter annihilates the image)."""


class ImageFormatError(QCNNError, ValueError):
    pass


class DataError(QCNNError, ValueError):
    pass


class ConfigError(QCNNError, ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
