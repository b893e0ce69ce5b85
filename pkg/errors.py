# חריגות משותפות לכל המודולים
class ZipmapError(Exception):
    """Base class for every error raised by zipmap."""


class InvalidTransformError(ZipmapError):
    pass


class DegenerateInputError(ZipmapError):
    pass


class DomainError(ZipmapError):
    pass


class PreconditionError(ZipmapError):
    pass


class TangentArcError(ZipmapError):
    pass


class BasePointError(ZipmapError):
    """w = 0 has the two slit-map preimages p and p - 1; callers pick one."""


class AmbiguousBranchError(ZipmapError):
    pass


class InfeasibleChainError(ZipmapError):
    pass


class NewtonConvergenceError(ZipmapError):
    def __init__(self, message, region=None, residual=None, iterations=None, step=None):
        super().__init__(message)
        self.region = region
        self.residual = residual
        self.iterations = iterations
        self.step = step

    def __str__(self):
        text = super().__str__()
        details = []
        if self.step is not None:
            details.append(f"step {self.step}")
        if self.region is not None:
            details.append(f"region {self.region}")
        if self.residual is not None:
            details.append(f"residual {self.residual:.3e}")
        if self.iterations is not None:
            details.append(f"{self.iterations} iterations")
        if details:
            text = f"{text} ({', '.join(details)})"
        return text


class OutOfOrderError(ZipmapError):
    def __init__(self, index, value=None):
        message = f"data point {index} is out of order: its image is not in the upper half-plane"
        if value is not None:
            message += f" (image {value})"
        super().__init__(message)
        self.index = index
        self.value = value


class FileFormatError(ZipmapError):
    def __init__(self, message, line=None, path=None):
        if line is not None:
            message = f"line {line}: {message}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.line = line
        self.path = path
