"""Table-driven arithmetic for GF(2), GF(3) and GF(4)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cache

import numpy as np

from .errors import UnsupportedOrder

SUPPORTED_ORDERS = (2, 3, 4)


def _gf4_mul(a: int, b: int) -> int:
    # bit 0 = 1, bit 1 = w, reduced modulo w^2 + w + 1
    r = 0
    for i in range(2):
        if (b >> i) & 1:
            r ^= a << i
    if r & 0b100:
        r ^= 0b111
    return r


@dataclass(frozen=True, eq=False)
class FiniteField:
    """GF(q) with elements labelled ``0..q-1``.

    For q = 4 the labels are 0, 1, w, w + 1 where w^2 = w + 1.
    """

    q: int
    add: np.ndarray
    mul: np.ndarray

    @property
    def characteristic(self) -> int:
        return 2 if self.q in (2, 4) else self.q

    @property
    def degree(self) -> int:
        """``r`` in ``q = p^r``."""
        return 2 if self.q == 4 else 1

    @property
    def elements(self) -> range:
        return range(self.q)

    @property
    def neg(self) -> np.ndarray:
        return np.argmin(self.add, axis=1)

    @property
    def inv(self) -> np.ndarray:
        out = np.zeros(self.q, dtype=np.int64)
        out[1:] = np.argmax(self.mul[1:] == 1, axis=1)
        return out

    def sub(self, a, b):
        return self.add[a, self.neg[b]]

    def check_axioms(self) -> None:
        """Exhaustively verify the field axioms on the tables."""
        q, add, mul = self.q, self.add, self.mul
        e = np.arange(q)
        assert (add[0] == e).all() and (mul[1] == e).all()
        assert (add == add.T).all() and (mul == mul.T).all()
        for a, b, c in itertools.product(e, repeat=3):
            assert add[add[a, b], c] == add[a, add[b, c]]
            assert mul[mul[a, b], c] == mul[a, mul[b, c]]
            assert mul[a, add[b, c]] == add[mul[a, b], mul[a, c]]
        assert all((add[a] == 0).sum() == 1 for a in e)
        assert all((mul[a] == 1).sum() == 1 for a in e[1:])
        assert (mul[0] == 0).all()


@cache
def finite_field(q: int) -> FiniteField:
    if q not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"GF({q}) is not supported; choose from {SUPPORTED_ORDERS}")
    if q == 4:
        add = np.array([[a ^ b for b in range(4)] for a in range(4)])
        mul = np.array([[_gf4_mul(a, b) for b in range(4)] for a in range(4)])
    else:
        e = np.arange(q)
        add = (e[:, None] + e[None, :]) % q
        mul = (e[:, None] * e[None, :]) % q
    add.flags.writeable = False
    mul.flags.writeable = False
    field = FiniteField(q, add, mul)
    field.check_axioms()
    return field


def projective_points(field: FiniteField, dim: int) -> np.ndarray:
    """Normalized representatives (first nonzero coordinate 1) of PG(dim-1, q)."""
    rows = [
        v for v in itertools.product(range(field.q), repeat=dim)
        if any(v) and next(c for c in v if c) == 1
    ]
    return np.array(rows, dtype=np.int64)


def normalize(field: FiniteField, vectors: np.ndarray) -> np.ndarray:
    """Scale each row so its first nonzero coordinate is 1."""
    vectors = np.atleast_2d(vectors)
    nonzero = vectors != 0
    if not nonzero.any(axis=1).all():
        raise ValueError("zero vector has no projective point")
    lead = vectors[np.arange(len(vectors)), np.argmax(nonzero, axis=1)]
    return field.mul[field.inv[lead][:, None], vectors]


def encode(field: FiniteField, vectors: np.ndarray) -> np.ndarray:
    """Integer key of each coordinate row (base-q digits)."""
    weights = field.q ** np.arange(vectors.shape[-1] - 1, -1, -1)
    return vectors @ weights
