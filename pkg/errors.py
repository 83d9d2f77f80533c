from typing import Any, Optional


class GasStorageError(Exception):
    """Base class of every error the library raises on purpose.

    `kind` is the stable identifier written to machine-readable error records.
    """
    kind = 'error'

    def __init__(self, msg: str, details: Optional[dict[str, Any]] = None):
        super().__init__(msg)
        self.details = details or {}

    def record(self) -> dict[str, Any]:
        return {'kind': self.kind, 'message': str(self), 'details': self.details}


class ParseError(GasStorageError):
    kind = 'parse'

    def __init__(self, msg: str, line: int, path: str = ''):
        super().__init__(f'{path}:{line}: {msg}' if path else f'line {line}: {msg}', {'line': line, 'path': path})
        self.line = line


class OrderingError(GasStorageError):
    kind = 'ordering'


class EmptyInputError(GasStorageError):
    kind = 'empty_input'


class InsufficientDataError(GasStorageError):
    kind = 'insufficient_data'


class InsufficientCurveError(GasStorageError):
    kind = 'insufficient_curve'


class DomainError(GasStorageError):
    kind = 'domain'


class SingularMatrixError(GasStorageError):
    kind = 'singular_matrix'


class ConvergenceError(GasStorageError):
    kind = 'convergence'

    def __init__(self, msg: str, best: Any = None, details: Optional[dict[str, Any]] = None):
        super().__init__(msg, details)
        self.best = best


class GridError(GasStorageError):
    kind = 'grid'


class GapError(GasStorageError):
    kind = 'gap'


class InfeasibleError(GasStorageError):
    kind = 'infeasible'

    def __init__(self, msg: str, prefix: Optional[int] = None):
        super().__init__(msg, {'prefix': prefix})
        self.prefix = prefix


class UnboundedError(GasStorageError):
    kind = 'unbounded'


class FamilyConstructionError(GasStorageError):
    kind = 'family_construction'

    def __init__(self, msg: str, rejected: dict[str, int]):
        super().__init__(f'{msg} (rejections: {", ".join(f"{k}={v}" for k, v in sorted(rejected.items()))})', {'rejected': dict(rejected)})
        self.rejected = dict(rejected)


class MemberValuationError(GasStorageError):
    kind = 'member_valuation'


class ContainerError(GasStorageError):
    kind = 'container'


class ConfigError(GasStorageError):
    kind = 'config'


def error_record(ex: BaseException) -> dict[str, Any]:
    if isinstance(ex, GasStorageError):
        return ex.record()
    return {'kind': type(ex).__name__, 'message': str(ex), 'details': {}}
