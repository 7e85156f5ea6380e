"""Quantized enveloping-algebra symmetries and their Hopf actions.

Three commuting module-algebra actions on the coordinate algebra (left,
right, and the second left action used by the left symmetry), the
irreducible ladder matrices, the four symmetry representations on the
regular and spinor bases, the Casimir, and the equivariance residual
checker that ties a representation to its symmetry pair.
"""

from __future__ import annotations

import functools

from .hilbert import (
    HalfInteger,
    TruncatedBasis,
    TruncatedOperator,
    WeightIndex,
    frobenius_norm,
    interior_projector,
)
from .qnum import _qint, _scalar_of, cache_scalars, q_half_power, scalar_sqrt

__all__ = [
    "AlgebraElement",
    "act",
    "build_symmetry",
    "casimir",
    "check_equivariance",
    "represent_element",
    "sigma_l",
]

GENERATOR_NAMES = ("a", "b", "b*", "a*")

# Generator coproducts, as lists of (left slot, right slot).
_COPRODUCT = {
    "k": [("k", "k")],
    "k_inv": [("k_inv", "k_inv")],
    "f": [("f", "k"), ("k_inv", "f")],
    "e": [("e", "k"), ("k_inv", "e")],
}

# One entry per (action, Hopf generator, algebra generator): either None
# or (sign, doubled q-exponent, output letter). The k rows double as the
# per-letter scalars used when extending e and f to longer words.
_TABLES = {
    "left": {
        "k": {"a": (1, 1, "a"), "a*": (1, -1, "a*"), "b": (1, -1, "b"), "b*": (1, 1, "b*")},
        "f": {"a": None, "a*": (-1, 2, "b*"), "b": (1, 0, "a"), "b*": None},
        "e": {"a": (1, 0, "b"), "a*": None, "b": None, "b*": (-1, -2, "a*")},
    },
    "right": {
        "k": {"a": (1, 1, "a"), "a*": (1, -1, "a*"), "b": (1, 1, "b"), "b*": (1, -1, "b*")},
        "f": {"a": (-1, 2, "b*"), "a*": None, "b": (1, 0, "a*"), "b*": None},
        "e": {"a": None, "a*": (1, 0, "b"), "b": None, "b*": (-1, -2, "a")},
    },
    "second_left": {
        "k": {"a": (1, 1, "a"), "a*": (1, -1, "a*"), "b": (1, 1, "b"), "b*": (1, -1, "b*")},
        "f": {"a": None, "a*": (1, 2, "b"), "b": None, "b*": (-1, 0, "a")},
        "e": {"a": (-1, 0, "b*"), "a*": None, "b": (1, -2, "a*"), "b*": None},
    },
}

ACTIONS = tuple(_TABLES)


class AlgebraElement:
    """Normal-ordered coordinate-algebra element at a fixed q.

    Terms map monomial keys (k, l, m, n), meaning a^k b^l b*^m a*^n with
    k*n = 0, to complex coefficients. Multiplying by one letter at a
    time re-normal-orders through the defining relations, so products of
    elements stay canonical.
    """

    __slots__ = ("qv", "terms")

    def __init__(self, q, terms=None):
        self.qv = _scalar_of(q)
        clean = {}
        for key, c in (terms or {}).items():
            if c != 0:
                clean[key] = clean.get(key, 0) + c
        self.terms = clean

    @classmethod
    def unit(cls, q):
        return cls(q, {(0, 0, 0, 0): 1.0})

    @classmethod
    def gen(cls, name, q):
        key = {
            "a": (1, 0, 0, 0),
            "b": (0, 1, 0, 0),
            "b*": (0, 0, 1, 0),
            "a*": (0, 0, 0, 1),
        }.get(name)
        if key is None:
            raise ValueError(f"unknown generator {name!r}")
        return cls(q, {key: 1.0})

    @classmethod
    def zero(cls, q):
        return cls(q, {})

    @staticmethod
    def letters(key):
        ka, lb, mbs, nas = key
        return ["a"] * ka + ["b"] * lb + ["b*"] * mbs + ["a*"] * nas

    def _times_letter(self, terms, letter):
        qv = self.qv
        out = {}

        def put(key, c):
            if c != 0:
                out[key] = out.get(key, 0) + c

        for (ka, lb, mbs, nas), c in terms.items():
            if letter == "a":
                if nas == 0:
                    put((ka + 1, lb, mbs, 0), c * qv ** (lb + mbs))
                else:
                    put((0, lb, mbs, nas - 1), c)
                    put((0, lb + 1, mbs + 1, nas - 1), -c * qv ** (2 * nas))
            elif letter == "b":
                put((ka, lb + 1, mbs, nas), c * qv ** nas)
            elif letter == "b*":
                put((ka, lb, mbs + 1, nas), c * qv ** nas)
            elif letter == "a*":
                if ka == 0:
                    put((0, lb, mbs, nas + 1), c)
                else:
                    scale = c * qv ** (-(lb + mbs))
                    put((ka - 1, lb, mbs, 0), scale)
                    put((ka - 1, lb + 1, mbs + 1, 0), -scale)
            else:
                raise ValueError(f"unknown letter {letter!r}")
        return out

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            if other.qv != self.qv:
                raise ValueError("cannot multiply elements at different q")
            total = {}
            for key, c in other.terms.items():
                terms = {k: v * c for k, v in self.terms.items()}
                for letter in self.letters(key):
                    terms = self._times_letter(terms, letter)
                for k, v in terms.items():
                    total[k] = total.get(k, 0) + v
            return AlgebraElement(self.qv, total)
        if isinstance(other, (int, float, complex)):
            return AlgebraElement(self.qv, {k: v * other for k, v in self.terms.items()})
        return NotImplemented

    def __rmul__(self, scalar):
        if isinstance(scalar, (int, float, complex)):
            return self * scalar
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, AlgebraElement) or other.qv != self.qv:
            return NotImplemented
        total = dict(self.terms)
        for k, v in other.terms.items():
            total[k] = total.get(k, 0) + v
        return AlgebraElement(self.qv, total)

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def star(self):
        return AlgebraElement(
            self.qv,
            {(n, m, l, k): complex(c).conjugate() for (k, l, m, n), c in self.terms.items()},
        )

    @property
    def word_length(self):
        return max((sum(key) for key in self.terms), default=0)

    def is_zero(self, tol=0.0):
        return all(abs(c) <= tol for c in self.terms.values())

    def coefficient(self, key):
        return self.terms.get(tuple(key), 0)

    def __repr__(self):
        if not self.terms:
            return "AlgebraElement(0)"
        bits = []
        for (ka, lb, mbs, nas), c in sorted(self.terms.items()):
            word = "".join(
                sym * cnt
                for sym, cnt in (("a", ka), ("b", lb), ("B", mbs), ("A", nas))
            ) or "1"
            bits.append(f"({c:+.6g}){word}")
        return "AlgebraElement(" + " ".join(bits) + ")"


def act(action, h, x):
    """Apply a Hopf generator to an algebra element through one action.

    Extension beyond single letters follows the module-algebra rule: the
    slot carrying e or f is dressed with k-inverse scalars on one side
    and k scalars on the other, identically for all three actions.
    """
    if action not in _TABLES:
        raise ValueError(f"unknown action {action!r}")
    table = _TABLES[action]
    qv = x.qv

    def kexp(letter):
        return table["k"][letter][1]

    if h in ("k", "k_inv"):
        sign = 1 if h == "k" else -1
        out = {}
        for key, c in x.terms.items():
            e2 = sum(kexp(letter) for letter in AlgebraElement.letters(key))
            out[key] = out.get(key, 0) + c * q_half_power(qv, sign * e2)
        return AlgebraElement(qv, out)

    if h not in ("e", "f"):
        raise ValueError(f"unknown Hopf generator {h!r}")

    result = AlgebraElement.zero(qv)
    for key, c in x.terms.items():
        letters = AlgebraElement.letters(key)
        for i, letter in enumerate(letters):
            entry = table[h][letter]
            if entry is None:
                continue
            sign, e2h, new_letter = entry
            e2 = e2h
            e2 -= sum(kexp(letters[p]) for p in range(i))
            e2 += sum(kexp(letters[p]) for p in range(i + 1, len(letters)))
            coeff = c * sign * q_half_power(qv, e2)
            word = AlgebraElement.unit(qv)
            for w in letters[:i] + [new_letter] + letters[i + 1 :]:
                word = word * AlgebraElement.gen(w, qv)
            result = result + coeff * word
    return result


@functools.lru_cache(maxsize=None)
def _irrep_basis(l2):
    indices = [
        WeightIndex(HalfInteger.from_twice(l2), HalfInteger.from_twice(m2))
        for m2 in range(l2, -l2 - 1, -2)
    ]
    return TruncatedBasis("irrep", HalfInteger.from_twice(l2), indices)


def sigma_l(h, l, q):
    """Irreducible (2l+1)-dimensional matrix of one symmetry generator.

    Basis ordered by descending weight, so sigma_{1/2}(k) is
    diag(q^{1/2}, q^{-1/2}).
    """
    l2 = HalfInteger(l).twice
    if l2 < 0:
        raise ValueError("l must be nonnegative")
    qv = _scalar_of(q)
    basis = _irrep_basis(l2)
    rows, cols, vals = [], [], []
    for col, ix in enumerate(basis.indices):
        m2 = ix.m.twice
        if h in ("k", "k_inv"):
            sgn = 1 if h == "k" else -1
            rows.append(col)
            cols.append(col)
            vals.append(float(q_half_power(qv, sgn * m2)))
        elif h == "f":
            if m2 + 2 <= l2:
                c = scalar_sqrt(_qint((l2 - m2) // 2, qv) * _qint((l2 + m2) // 2 + 1, qv))
                rows.append(col - 1)
                cols.append(col)
                vals.append(float(c))
        elif h == "e":
            if m2 - 2 >= -l2:
                c = scalar_sqrt(_qint((l2 - m2) // 2 + 1, qv) * _qint((l2 + m2) // 2, qv))
                rows.append(col + 1)
                cols.append(col)
                vals.append(float(c))
        else:
            raise ValueError(f"unknown Hopf generator {h!r}")
    return TruncatedOperator.from_triplets(basis, basis, rows, cols, vals)


_SYMMETRY_KINDS = {
    "lambda": "regular",
    "rho": "regular",
    "lambda_prime": "spinor",
    "rho_prime": "spinor",
}


def build_symmetry(which, h, basis, q):
    """One symmetry generator on a truncated basis.

    The unprimed pair acts on the left and right weights of the regular
    basis; the primed pair acts on the spinor labels, where the right
    ladder couples to a level offset by half, differently per tower.
    """
    kind = _SYMMETRY_KINDS.get(which)
    if kind is None:
        raise ValueError(f"unknown symmetry {which!r}")
    if basis.kind != kind:
        raise ValueError(f"{which} lives on the {kind} basis, got {basis.kind}")
    if h not in ("k", "k_inv", "e", "f"):
        raise ValueError(f"unknown Hopf generator {h!r}")
    return _build_symmetry_cached(which, h, basis, _scalar_of(q))


@cache_scalars
def _build_symmetry_cached(which, h, basis, qv):
    rows, cols, vals = [], [], []

    def qi(t):
        return _qint(t, qv)

    for col, key in enumerate(_iter_keys(basis)):
        if basis.kind == "regular":
            l2, m2, n2 = key
            s = None
        else:
            l2, m2, n2, s = key
        # the weight this symmetry reads and shifts
        w2 = m2 if which in ("lambda", "lambda_prime") else n2
        if h in ("k", "k_inv"):
            sgn = 1 if h == "k" else -1
            rows.append(col)
            cols.append(col)
            vals.append(float(q_half_power(qv, sgn * w2)))
            continue
        if which in ("lambda", "rho") or which == "lambda_prime":
            # plain ladder at level l2 (or j2) on the chosen weight
            if h == "f":
                val = qi((l2 - w2) // 2) * qi((l2 + w2) // 2 + 1)
                nw2 = w2 + 2
            else:
                val = qi((l2 - w2) // 2 + 1) * qi((l2 + w2) // 2)
                nw2 = w2 - 2
        else:
            # right spinor ladder: level offset +1 on the up tower, -1 down
            off = 1 if s == 0 else -1
            if h == "f":
                val = qi((l2 - w2 + off) // 2) * qi((l2 + w2 + off) // 2 + 1)
                nw2 = w2 + 2
            else:
                val = qi((l2 - w2 + off) // 2 + 1) * qi((l2 + w2 + off) // 2)
                nw2 = w2 - 2
        if val <= 0:
            continue
        if which in ("lambda", "lambda_prime"):
            target = (l2, nw2, n2) if s is None else (l2, nw2, n2, s)
        else:
            target = (l2, m2, nw2) if s is None else (l2, m2, nw2, s)
        row = basis.pos2.get(target)
        if row is None:
            continue
        rows.append(row)
        cols.append(col)
        vals.append(float(scalar_sqrt(val)))
    return TruncatedOperator.from_triplets(basis, basis, rows, cols, vals)


def _iter_keys(basis):
    if basis.kind == "regular":
        return ((ix.l.twice, ix.m.twice, ix.n.twice) for ix in basis.indices)
    if basis.kind == "spinor":
        return (
            (ix.j.twice, ix.mu.twice, ix.n.twice, 0 if ix.spin == "up" else 1)
            for ix in basis.indices
        )
    raise ValueError(f"no symmetry on basis kind {basis.kind!r}")


def casimir(which, basis, q):
    """Diagonal Casimir of one spinor symmetry.

    The left symmetry sees level j on both towers; the right symmetry
    sees j plus a half on the up tower and j minus a half on the down
    tower, which is what makes the towers distinguishable.
    """
    if which not in ("lambda_prime", "rho_prime"):
        raise ValueError("the Casimir is exposed for the spinor symmetries only")
    if basis.kind != "spinor":
        raise ValueError("spinor basis required")
    qv = _scalar_of(q)
    diag = []
    for ix in basis.indices:
        j2 = ix.j.twice
        if which == "lambda_prime":
            p = j2 + 1
        else:
            p = j2 + 2 if ix.spin == "up" else j2
        diag.append(float(qv ** p + qv ** (-p)))
    return TruncatedOperator.from_diagonal(basis, diag)


_TWIST_SCALE = {"k": 0, "k_inv": 0, "f": -2, "e": 2}


def represent_element(rep, element, basis, q, antirep=False):
    """Push an algebra element through a representation builder.

    Monomials map to ordered products of generator operators; an
    antirepresentation reverses each word before composing.
    """
    total = TruncatedOperator.zeros(basis)
    for key, c in element.terms.items():
        letters = AlgebraElement.letters(key)
        if antirep:
            letters = letters[::-1]
        op = TruncatedOperator.identity(basis)
        for letter in letters:
            op = op @ rep(letter, basis, q)
        total = total + complex(c) * op
    return total


def check_equivariance(rep, which_pair, h, x, basis, q):
    """Residual of the coproduct-expanded equivariance identity.

    Checks both the left-symmetry equation (paired with the second left
    action) and the right-symmetry equation (paired with the left
    action) for one Hopf generator h and one algebra generator x, and
    returns the larger relative interior residual in Frobenius norm.
    """
    variants = {
        "regular": ("lambda", "rho", False),
        "spinor": ("lambda_prime", "rho_prime", False),
        "regular_opposite": ("lambda", "rho", True),
        "spinor_opposite": ("lambda_prime", "rho_prime", True),
    }
    if which_pair not in variants:
        raise ValueError(f"unknown equivariance variant {which_pair!r}")
    left_sym, right_sym, opposite = variants[which_pair]
    qv = _scalar_of(q)
    xel = AlgebraElement.gen(x, qv)
    proj = interior_projector(basis, 1)
    worst = 0.0
    for sym, action in ((left_sym, "second_left"), (right_sym, "left")):
        lhs = build_symmetry(sym, h, basis, q) @ represent_element(
            rep, xel, basis, q, antirep=opposite
        )
        rhs = TruncatedOperator.zeros(basis)
        for h1, h2 in _COPRODUCT[h]:
            if opposite:
                acted = act(action, h2, xel) * float(q_half_power(qv, _TWIST_SCALE[h2]))
                sym_factor = build_symmetry(sym, h1, basis, q)
            else:
                acted = act(action, h1, xel)
                sym_factor = build_symmetry(sym, h2, basis, q)
            rhs = rhs + represent_element(rep, acted, basis, q, antirep=opposite) @ sym_factor
        num = frobenius_norm((lhs - rhs) @ proj)
        den = max(1.0, frobenius_norm(lhs @ proj), frobenius_norm(rhs @ proj))
        worst = max(worst, num / den)
    return worst
