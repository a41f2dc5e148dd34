"""Exception hierarchy shared by every module."""


class LolightError(Exception):
    """Base class for library errors."""


class SpecError(LolightError, ValueError):
    """Malformed or structurally invalid input."""


class ResonantFrequency(LolightError):
    """A divisor vanishes on an active Fourier mode."""


class NonDiophantineSlope(LolightError):
    """Slope lacks the arithmetic certificate a small-divisor solver needs."""


class SmallDivisor(NonDiophantineSlope):
    """A divisor fell below the declared lower bound."""


class NonzeroMean(LolightError):
    """Input expected to integrate to zero does not."""


class DegreeOverflow(LolightError):
    """Polynomial degree in z exceeded the cap."""


class NotInNormalForm(LolightError):
    """Operation needs a normal-form input."""


class NonConstantL(NotInNormalForm):
    """L² has the wrong dependence for this reduction."""


class NonUnimodular(LolightError):
    """Integer matrix with determinant other than ±1."""


class NotLatticeNormalizing(LolightError):
    """Map fails to normalize the deck group."""


class CertificateMissing(LolightError):
    """A rationality branch was reached without a certificate."""


class IncompatibleNormalForm(LolightError):
    """Generator requested on a metric of the wrong shape."""


class SearchBoundExceeded(LolightError):
    """Isometry search exhausted its bounds."""


class VerificationFailed(LolightError):
    """A numerical identity failed its tolerance."""


class PositivityLoss(LolightError):
    """A quantity that must stay positive did not."""


class SingularMetric(LolightError):
    """Degenerate metric matrix."""
