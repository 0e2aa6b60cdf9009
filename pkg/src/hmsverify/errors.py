"""Exception hierarchy. Every error carries a short machine-readable code."""


class HMSError(Exception):
    code = "error"

    def record(self):
        return {"error": self.code, "message": str(self)}


class DomainError(HMSError, ValueError):
    code = "domain"


class ConvergenceError(HMSError, ArithmeticError):
    code = "convergence"


class RankError(HMSError, ArithmeticError):
    code = "rank"


class IllConditionedError(HMSError, ArithmeticError):
    code = "ill_conditioned"


class TransversalityError(HMSError, ValueError):
    code = "transversality"


class ConfigError(HMSError, ValueError):
    code = "config"


class DegeneracyError(HMSError, ValueError):
    code = "degeneracy"


class RangeError(HMSError, ValueError):
    code = "range"


class ShapeError(HMSError, ValueError):
    code = "shape"


class ZeroPatternMismatch(HMSError, ArithmeticError):
    code = "zero_pattern"
