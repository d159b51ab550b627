"""Exception hierarchy shared by all sbmlab modules."""


class SbmlabError(Exception):
    """Base class for all package errors."""


class ConfigError(SbmlabError):
    """Bad experiment configuration (unknown key, out-of-range value)."""


class ModuleError(SbmlabError):
    """A computation module failed; carries the module name."""

    def __init__(self, module, message):
        self.module = module
        super().__init__(f"[{module}] {message}")


# profile_ode
class InvalidStep(SbmlabError):
    pass


class NonFinite(SbmlabError):
    pass


class BracketInvalid(SbmlabError):
    pass


# ou_spectral
class NegativeKilling(SbmlabError):
    pass


class ConvergenceFailure(SbmlabError):
    pass


class BoxTooSmall(SbmlabError):
    pass


class DivisionNearZero(SbmlabError):
    pass


# semilinear_pde
class StabilityViolation(SbmlabError):
    pass


class DomainTooSmall(SbmlabError):
    pass


class NoConvergence(SbmlabError):
    pass


class LadderTooShort(SbmlabError):
    pass


# sbm_particles
class PopulationOverflow(SbmlabError):
    pass


class TooFewHits(SbmlabError):
    pass


class InsufficientPoints(SbmlabError):
    pass


# dimension_tools
class DegenerateSet(SbmlabError):
    pass


class CoincidentPoints(SbmlabError):
    pass


class InversionFailure(SbmlabError):
    pass


# tauberian
class InvalidConstants(SbmlabError):
    pass


class BoundViolated(SbmlabError):
    pass


# cli_orchestrator
class SchemaMismatch(SbmlabError):
    pass
