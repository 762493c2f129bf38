"""Exception hierarchy shared by all modules.

Each exception carries an ``exit_code`` used by the command line front end.
"""


class PlanarIndexError(Exception):
    exit_code = 1


class NotSymplectic(PlanarIndexError):
    exit_code = 10


class DegenerateKrein(PlanarIndexError):
    exit_code = 11


class ToleranceNotMet(PlanarIndexError):
    exit_code = 12


class NearDegenerate(PlanarIndexError):
    exit_code = 13


class InconsistentClassification(PlanarIndexError):
    exit_code = 14


class ResonantInput(PlanarIndexError):
    exit_code = 15


class LiftStepTooLarge(PlanarIndexError):
    exit_code = 16


class Undecidable(PlanarIndexError):
    exit_code = 17


class BracketNotFound(PlanarIndexError):
    exit_code = 18


class InsufficientSpectrum(PlanarIndexError):
    exit_code = 19


class GapUncertified(PlanarIndexError):
    exit_code = 20


class NoneWithinHorizon(PlanarIndexError):
    exit_code = 21


class BlowUp(PlanarIndexError):
    exit_code = 22


class TwistNotFound(PlanarIndexError):
    exit_code = 23


class NoOrbitFound(PlanarIndexError):
    exit_code = 24


class CertificateFailed(PlanarIndexError):
    exit_code = 25


class NotASolution(PlanarIndexError):
    exit_code = 26


class ConfigError(PlanarIndexError):
    exit_code = 2
