"""Exception hierarchy shared by all subhex modules."""

from __future__ import annotations


class SubhexError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(SubhexError, ValueError):
    pass


class OutOfRangeIndex(GeometryError):
    pass


class DuplicateLine(GeometryError):
    pass


class RepeatedCollinearPair(GeometryError):
    pass


class LineTooShort(GeometryError):
    pass


class ThinPoint(GeometryError):
    pass


class NotNearPolygon(GeometryError):
    pass


class NonUniformLineSize(GeometryError):
    pass


class NonUniformPointDegree(GeometryError):
    pass


class Disconnected(GeometryError):
    pass


class EmptySelection(GeometryError):
    pass


class ShortInducedLine(GeometryError):
    pass


class IsolatedPoint(GeometryError):
    pass


class UnsupportedOrder(SubhexError, ValueError):
    pass


class ConstructionSelfCheckFailed(SubhexError, RuntimeError):
    pass


class TooLarge(SubhexError, ValueError):
    pass


class NotValuationType(SubhexError, ValueError):
    """A PV axiom fails; ``axiom`` names it and ``witness`` locates the failure."""

    def __init__(self, axiom: str, witness: object, message: str = "") -> None:
        self.axiom = axiom
        self.witness = witness
        super().__init__(message or f"{axiom} fails at {witness!r}")


class NotAHexagon(SubhexError, ValueError):
    pass


class IncompleteGroup(SubhexError, RuntimeError):
    pass


class NoOvoidThroughPoint(SubhexError, RuntimeError):
    pass


class NoDistance3Pair(SubhexError, ValueError):
    pass


class UnsupportedPremiseCombination(SubhexError, ValueError):
    pass
