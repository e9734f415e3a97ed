"""Exception hierarchy shared across the package."""


class HetdataError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(HetdataError, ValueError):
    """An argument is outside its documented domain (NaN, wrong range, ...)."""


class NumericalRangeError(HetdataError, ArithmeticError):
    """A computation would overflow/underflow beyond recoverable asymptotics."""


class EvaluationError(HetdataError):
    """A user-supplied callable returned a non-finite value."""


class BracketingError(HetdataError):
    """Root bracket does not straddle a sign change."""

    def __init__(self, lo, hi, f_lo, f_hi):
        self.lo, self.hi, self.f_lo, self.f_hi = lo, hi, f_lo, f_hi
        super().__init__(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}"
        )


class SolverError(HetdataError):
    """A solver failed to locate a root."""


class NoSolutionError(SolverError):
    """The matching equation has no root on the admissible branch."""

    def __init__(self, target, branch_minimum):
        self.target = target
        self.branch_minimum = branch_minimum
        super().__init__(
            f"target {target} lies below the branch minimum {branch_minimum}; "
            "no root exists on the increasing branch"
        )


class DegenerateInputError(HetdataError, ValueError):
    """An input makes the requested quantity degenerate (m=0, tau_L=tau_H, ...)."""


class ParamError(HetdataError, ValueError):
    """Parameter validation failed; carries the full list of violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConfigError(HetdataError):
    """Bad CLI configuration (unknown flag, missing file, malformed JSON)."""
