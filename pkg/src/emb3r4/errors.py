"""Exception types shared across modules."""


class Emb3r4Error(Exception):
    pass


class BianchiViolation(Emb3r4Error):
    def __init__(self, pair, residual):
        super().__init__(f"second Bianchi identity fails for pair {pair}: residual {residual}")
        self.pair = pair
        self.residual = residual


# symbolic restoration

class RestorationError(Emb3r4Error):
    def __init__(self, monomial, detail=""):
        msg = f"{type(self).__name__}: {monomial}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.monomial = monomial


class UnpairedSymbols(RestorationError):
    pass


class ExcessSymbols(RestorationError):
    pass


class ResidualRadical(RestorationError):
    pass


class IdentityFailed(Emb3r4Error):
    def __init__(self, which, witness=None):
        super().__init__(f"identity {which} failed; witness {witness}")
        self.which = which
        self.witness = witness


# embedding decisions

class NonPositiveDet(Emb3r4Error):
    pass


class GaussResidual(Emb3r4Error):
    def __init__(self, value):
        super().__init__(f"Gauss equation residual {value} exceeds tolerance")
        self.value = value


class SingularAlpha(Emb3r4Error):
    pass


class InternalInconsistency(Emb3r4Error):
    pass


# geometry

class ParseError(Emb3r4Error):
    def __init__(self, position, expected, src=""):
        where = f" near {src[position:position + 10]!r}" if src else ""
        super().__init__(f"parse error at position {position}{where}; expected one of {sorted(expected)}")
        self.position = position
        self.expected = set(expected)


class DomainError(Emb3r4Error):
    pass


class SingularMetric(Emb3r4Error):
    pass


class ConfigError(Emb3r4Error):
    pass


# warped products and Lie groups

class SpeedExceeded(Emb3r4Error):
    pass


class NegativeRadicand(Emb3r4Error):
    pass


class ZeroBaseCurvature(Emb3r4Error):
    pass


class PullbackMismatch(Emb3r4Error):
    pass
