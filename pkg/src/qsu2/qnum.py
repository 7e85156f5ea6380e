"""Scalar q-arithmetic underlying every representation builder.

q-integers, the spin-half coupling coefficients, and the basis-change
scalars are small closed-form expressions. They are evaluated here in a
numerically stable way for 0 < q < 1, and internally also for inverted
bases, which the opposite representations need.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import mpmath

__all__ = [
    "DeformationParameter",
    "HalfInteger",
    "cg_half",
    "half_range",
    "q_int",
    "spinor_cs",
]


@functools.total_ordering
class HalfInteger:
    """Exact half-integer stored as a doubled integer.

    The constructor coerces ints, exactly-representable floats like 1.5,
    and other HalfInteger values. Anything off the half-integer grid is
    rejected rather than rounded.
    """

    __slots__ = ("twice",)

    def __init__(self, value):
        if isinstance(value, HalfInteger):
            t = value.twice
        elif isinstance(value, int):
            t = 2 * value
        elif isinstance(value, float):
            d = 2.0 * value
            if d != round(d):
                raise ValueError(f"not a half-integer: {value!r}")
            t = int(round(d))
        else:
            raise TypeError(f"cannot interpret {value!r} as a half-integer")
        object.__setattr__(self, "twice", t)

    @classmethod
    def from_twice(cls, twice):
        self = cls.__new__(cls)
        object.__setattr__(self, "twice", int(twice))
        return self

    def __setattr__(self, name, value):
        raise AttributeError("HalfInteger is immutable")

    @property
    def is_integer(self):
        return self.twice % 2 == 0

    def __float__(self):
        return self.twice / 2.0

    def __int__(self):
        if self.twice % 2:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __eq__(self, other):
        try:
            return self.twice == HalfInteger(other).twice
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        try:
            return self.twice < HalfInteger(other).twice
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.twice / 2.0)

    def __add__(self, other):
        return HalfInteger.from_twice(self.twice + HalfInteger(other).twice)

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInteger.from_twice(self.twice - HalfInteger(other).twice)

    def __rsub__(self, other):
        return HalfInteger.from_twice(HalfInteger(other).twice - self.twice)

    def __neg__(self):
        return HalfInteger.from_twice(-self.twice)

    def __abs__(self):
        return HalfInteger.from_twice(abs(self.twice))

    def __mul__(self, other):
        if isinstance(other, int):
            return HalfInteger.from_twice(self.twice * other)
        return NotImplemented

    __rmul__ = __mul__

    def __str__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __repr__(self):
        return f"HalfInteger({self})"


def half_range(lo, hi, step=1):
    """Inclusive run of half-integers from lo to hi.

    The default step of 1 matches magnetic-index ranges like -l..l; pass
    step=1/2 to sweep a full half-integer grid.
    """
    lo = HalfInteger(lo)
    hi = HalfInteger(hi)
    dt = HalfInteger(step).twice
    if dt <= 0:
        raise ValueError("step must be positive")
    out = []
    t = lo.twice
    while t <= hi.twice:
        out.append(HalfInteger.from_twice(t))
        t += dt
    return out


@dataclass(frozen=True)
class DeformationParameter:
    """Deformation parameter, restricted to the open interval (0, 1).

    ``extended`` switches scalar evaluation from 64-bit floats to mpmath
    at the ambient ``mpmath.mp`` precision. ``text`` optionally holds the
    verbatim string the value was parsed from, so reports can echo the
    user's input unchanged and extended mode can reconstruct the decimal
    without a float round trip.
    """

    q: float
    extended: bool = False
    text: str | None = None

    def __post_init__(self):
        qf = float(self.q)
        if not (0.0 < qf < 1.0):
            raise ValueError(f"q must satisfy 0 < q < 1, got {self.q!r}")
        object.__setattr__(self, "q", qf)

    def scalar(self):
        """The working scalar: a float by default, an mpf in extended mode."""
        if self.extended:
            return mpmath.mpf(self.text if self.text is not None else repr(self.q))
        return self.q


def _scalar_of(q):
    """Coerce a DeformationParameter or bare number to a validated scalar."""
    if isinstance(q, DeformationParameter):
        return q.scalar()
    qf = float(q)
    if not (0.0 < qf < 1.0):
        raise ValueError(f"q must satisfy 0 < q < 1, got {q!r}")
    return qf


def _index_value(n):
    if isinstance(n, HalfInteger):
        return n.twice // 2 if n.twice % 2 == 0 else n.twice / 2.0
    return n


def scalar_sqrt(x):
    if isinstance(x, mpmath.mpf):
        return mpmath.sqrt(x)
    return math.sqrt(x)


def q_half_power(qv, twice_exponent):
    """qv**(e/2) from the doubled exponent e; even cases stay integer powers."""
    if twice_exponent % 2 == 0:
        return qv ** (twice_exponent // 2)
    return qv ** (twice_exponent / 2.0)


def cache_scalars(fn):
    """Memoize on value arguments, except when any is an mpf.

    mpf(0.5) and 0.5 are equal with equal hashes, so extended-precision
    calls would silently reuse float-precision cache entries; they take
    the uncached path instead.
    """
    cached = functools.lru_cache(maxsize=None)(fn)

    @functools.wraps(fn)
    def wrapper(*args):
        if any(isinstance(a, mpmath.mpf) for a in args):
            return fn(*args)
        return cached(*args)

    wrapper.cache_clear = cached.cache_clear
    return wrapper


def _qint_eval(n, qv):
    # [n] at base 1/q equals [n] at base q, so reduce to a base below one,
    # then use q^{1-n}(1-q^{2n})/(1-q^2): no catastrophic cancellation and
    # no q^{-n} overflow for large n.
    if n < 0:
        return -_qint_eval(-n, qv)
    if n == 0:
        return 0 * qv
    if qv > 1:
        qv = 1 / qv
    q2 = qv * qv
    return qv ** (1 - n) * (1 - q2 ** n) / (1 - q2)


_qint = cache_scalars(_qint_eval)


def q_int(n, q):
    """The q-integer [n] = (q^n - q^{-n}) / (q - q^{-1})."""
    return _qint(_index_value(n), _scalar_of(q))


def cg_half(l, m, row, col, q):
    """Coupling coefficient of V_l with the spin-half irrep.

    ``row`` is +1 for the l+1/2 target and -1 for l-1/2; ``col`` is +1
    when the magnetic index is raised by 1/2 and -1 when lowered. Edge
    cases where the shifted index leaves the target range come out as
    exact zeros through vanishing q-integer factors.
    """
    l2 = HalfInteger(l).twice
    m2 = HalfInteger(m).twice
    if row not in (+1, -1) or col not in (+1, -1):
        raise ValueError("row and col must be +1 or -1")
    if l2 < 0 or abs(m2) > l2 or (l2 - m2) % 2:
        raise ValueError(f"invalid coupling indices l={l}, m={m}")
    if row == -1 and l2 == 0:
        raise ValueError("no lower coupling target below l = 0")
    qv = _scalar_of(q)
    return _cg_half_raw(l2, m2, row, col, qv)


def _cg_half_raw(l2, m2, row, col, qv):
    # Doubled-index forms of the four closed expressions; each returns
    # prefactor * sqrt([.]/[2l+1]) with the q-exponent tracked doubled.
    lpm = (l2 + m2) // 2
    lmm = (l2 - m2) // 2
    den = _qint(l2 + 1, qv)
    if row == +1 and col == +1:
        return q_half_power(qv, -lmm) * scalar_sqrt(_qint(lpm + 1, qv) / den)
    if row == +1 and col == -1:
        return q_half_power(qv, lpm) * scalar_sqrt(_qint(lmm + 1, qv) / den)
    if row == -1 and col == +1:
        return q_half_power(qv, lpm + 1) * scalar_sqrt(_qint(lmm, qv) / den)
    return -q_half_power(qv, -(lmm + 1)) * scalar_sqrt(_qint(lpm, qv) / den)


def spinor_cs(j, mu, q):
    """Basis-change pair (C, S) mixing the two product towers at level j.

    Satisfies C**2 + S**2 = 1 for every valid (j, mu); j = 0 carries no
    mixing and is rejected.
    """
    j2 = HalfInteger(j).twice
    mu2 = HalfInteger(mu).twice
    if j2 <= 0:
        raise ValueError("basis-change coefficients need j >= 1/2")
    if abs(mu2) > j2 or (j2 - mu2) % 2:
        raise ValueError(f"invalid indices j={j}, mu={mu}")
    qv = _scalar_of(q)
    return _spinor_cs_raw(j2, mu2, qv)


def _spinor_cs_raw(j2, mu2, qv):
    den = _qint(j2, qv)
    c = q_half_power(qv, -(j2 + mu2) // 2) * scalar_sqrt(_qint((j2 - mu2) // 2, qv) / den)
    s = q_half_power(qv, (j2 - mu2) // 2) * scalar_sqrt(_qint((j2 + mu2) // 2, qv) / den)
    return c, s
