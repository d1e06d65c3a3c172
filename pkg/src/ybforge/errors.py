"""Exception hierarchy shared by all ybforge modules."""


class YbforgeError(Exception):
    """Base class for every error raised by this package."""


# -- scalar arithmetic ------------------------------------------------------

class DivisionByZero(YbforgeError):
    pass


class PoleAtPoint(YbforgeError):
    pass


class MissingAssignment(YbforgeError):
    pass


class EssentialSingularity(YbforgeError):
    pass


# -- Cartan data ------------------------------------------------------------

class NonIntegerRatio(YbforgeError):
    pass


class MalformedGCM(YbforgeError):
    pass


class NoIntegerK(YbforgeError):
    pass


class NotAffine(YbforgeError):
    pass


# -- free algebra -----------------------------------------------------------

class SpecMismatch(YbforgeError):
    pass


class UnsupportedElement(YbforgeError):
    pass


# -- R-matrix solvers -------------------------------------------------------

class InconsistentSystem(YbforgeError):
    pass


class UnderdeterminedSystem(YbforgeError):
    pass


class IncompatiblePair(YbforgeError):
    pass


class InvalidTau(YbforgeError):
    pass


class NotInvertible(YbforgeError):
    pass


# -- representations --------------------------------------------------------

class NoHighestRoot(YbforgeError):
    pass


class DimensionMismatch(YbforgeError):
    pass


class MissingImage(YbforgeError):
    pass


class IntertwinerNotUnique(YbforgeError):
    pass


class NoSolution(YbforgeError):
    pass


# -- classical r-matrices ---------------------------------------------------

class PoleAtOne(YbforgeError):
    pass


class PoleAtRootOfUnity(YbforgeError):
    pass


class ExceptionalCase(YbforgeError):
    pass


class InvalidTriple(YbforgeError):
    pass


class SpectralClash(YbforgeError):
    pass


class EpsilonOutOfDisc(YbforgeError):
    pass


class NonConvergent(YbforgeError):
    pass


class ConvergenceFailure(YbforgeError):
    pass


# -- CLI --------------------------------------------------------------------

class UsageError(YbforgeError):
    pass


class InputError(YbforgeError):
    pass
