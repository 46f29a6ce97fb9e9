"""Exception types raised by blbounds."""


class InvalidInput(ValueError):
    """Malformed or out-of-domain argument."""


class NotSurjective(InvalidInput):
    """A map does not cover its target space."""


class RankDeficient(InvalidInput):
    """The essential rank of a map is smaller than the dimension of its target."""


class UnsupportedDimension(InvalidInput):
    """An exact method was asked to run beyond the dimension it supports."""
