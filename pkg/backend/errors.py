"""
Errores del dominio.

Todas las excepciones heredan de UrllcError para que la API y el CLI puedan
distinguir fallos del dominio de bugs. Las de validación también heredan de
ValueError, que es lo que el resto del código ya atrapa.
"""


class UrllcError(Exception):
    """Raíz de los errores del toolkit."""


class ConfigurationError(UrllcError, ValueError):
    pass


class DomainError(UrllcError, ValueError):
    pass


class DegenerateChannelError(UrllcError):
    pass


class RankDeficientError(UrllcError):
    pass


class InsufficientSamplesError(UrllcError):
    pass


class DegenerateTailError(UrllcError):
    pass


class FitConvergenceError(UrllcError):
    pass


class InfeasibleError(UrllcError):
    pass


class InvariantError(UrllcError):
    """Una fila o resultado emitido viola una garantía (p.ej. O_UB > ζ en una fila factible)."""
