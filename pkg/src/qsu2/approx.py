"""Diagonal approximants and the calculus of rapidly decaying corrections.

Every generator of the spin representation differs from a strictly
diagonal operator by corrections whose level-block norms decay like a
power of q. This module builds those diagonal approximants, certifies
decay rates from measured block norms, and analyzes eigenvalue
sequences for linearity modulo the same kind of correction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import (
    SPIN_UP,
    TruncatedOperator,
    block_norms,
    commutator,
    frobenius_norm,
    _format_q,
)
from .qnum import HalfInteger, _qint, _scalar_of, cache_scalars, q_half_power, scalar_sqrt
from .regrep import star_name
from .spingeom import (
    DiracSpec,
    _conjugation_cached,
    _require_spinor,
    build_dirac,
    build_pi_prime,
    build_piiop,
    spin_coefficients,
)

__all__ = [
    "DecayCertificate",
    "EigenvalueSequence",
    "HatCoefficients",
    "analyze_eigenvalue_sequence",
    "build_Lq",
    "build_T",
    "build_pi_hat",
    "build_piiop_hat",
    "certify_Kq",
    "coefficient_difference_check",
    "first_order_check",
    "hat_coefficients",
]


# --------------------------------------------------------------------------
# Diagonal coefficient pairs

def _root_gap(e, qv):
    # sqrt(1 - q^e); e is a plain integer exponent and hits zero exactly
    # at the edge of each index range, closing the same channels the
    # exact coefficients close.
    if e <= 0:
        return 0 * qv
    return scalar_sqrt(1 - qv**e)


def _alpha_hat(sign, j2, mu2, n2, qv):
    if sign > 0:
        outer = _root_gap(j2 + mu2 + 2, qv)
        return [
            outer * _root_gap(j2 + n2 + 3, qv),
            outer * _root_gap(j2 + n2 + 1, qv),
        ]
    if j2 == 0:
        return [0 * qv, 0 * qv]
    outer = q_half_power(qv, 2 * j2 + mu2 + n2 + 1) * _root_gap(j2 - mu2, qv)
    return [
        outer * qv * _root_gap(j2 - n2 + 1, qv),
        outer * _root_gap(j2 - n2 - 1, qv),
    ]


def _beta_hat(sign, j2, mu2, n2, qv):
    if sign > 0:
        outer = q_half_power(qv, j2 + n2 - 1) * _root_gap(j2 + mu2 + 2, qv)
        return [
            outer * qv * _root_gap(j2 - n2 + 3, qv),
            outer * _root_gap(j2 - n2 + 1, qv),
        ]
    if j2 == 0:
        return [0 * qv, 0 * qv]
    outer = -q_half_power(qv, j2 + mu2) * _root_gap(j2 - mu2, qv)
    return [
        outer * _root_gap(j2 + n2 + 1, qv),
        outer * _root_gap(j2 + n2 - 1, qv),
    ]


def _hat_family(qv, opposite):
    """The four diagonal channels, tilded by index reflection.

    The starred channels reuse the plain ones at shifted indices; the
    opposite family reuses the tilded ones at reflected indices with a
    sign on the b-type channels.
    """

    def alpha(sign, j2, mu2, n2):
        return _alpha_hat(sign, j2, mu2, n2, qv)

    def beta(sign, j2, mu2, n2):
        return _beta_hat(sign, j2, mu2, n2, qv)

    def alpha_tilde(sign, j2, mu2, n2):
        return alpha(-sign, j2 + sign, mu2 - 1, n2 - 1)

    def beta_tilde(sign, j2, mu2, n2):
        return beta(-sign, j2 + sign, mu2 - 1, n2 + 1)

    if not opposite:
        return alpha, beta, alpha_tilde, beta_tilde

    def alpha_op(sign, j2, mu2, n2):
        return alpha_tilde(sign, j2, -mu2, -n2)

    def beta_op(sign, j2, mu2, n2):
        return [-v for v in beta_tilde(sign, j2, -mu2, -n2)]

    def alpha_tilde_op(sign, j2, mu2, n2):
        return alpha(sign, j2, -mu2, -n2)

    def beta_tilde_op(sign, j2, mu2, n2):
        return [-v for v in beta(sign, j2, -mu2, -n2)]

    return alpha_op, beta_op, alpha_tilde_op, beta_tilde_op


@dataclass(frozen=True)
class HatCoefficients:
    """Diagonal coefficient pairs (up, down) at one spinor index."""

    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    alpha_tilde_plus: np.ndarray
    alpha_tilde_minus: np.ndarray
    beta_tilde_plus: np.ndarray
    beta_tilde_minus: np.ndarray


def hat_coefficients(j, mu, n, q):
    """Diagonal approximants of the spin coefficients at one index."""
    j2 = HalfInteger(j).twice
    mu2 = HalfInteger(mu).twice
    n2 = HalfInteger(n).twice
    if (j2 + mu2) % 2 or (j2 + n2 + 1) % 2:
        raise ValueError("mu must have the parity of j and n the opposite parity")
    if abs(mu2) > j2:
        raise ValueError("mu out of range for j")
    qv = _scalar_of(q)
    alpha, beta, alpha_tilde, beta_tilde = _hat_family(qv, False)

    def pair(channel, sign):
        return np.array([float(v) for v in channel(sign, j2, mu2, n2)])

    return HatCoefficients(
        alpha_plus=pair(alpha, +1),
        alpha_minus=pair(alpha, -1),
        beta_plus=pair(beta, +1),
        beta_minus=pair(beta, -1),
        alpha_tilde_plus=pair(alpha_tilde, +1),
        alpha_tilde_minus=pair(alpha_tilde, -1),
        beta_tilde_plus=pair(beta_tilde, +1),
        beta_tilde_minus=pair(beta_tilde, -1),
    )


# --------------------------------------------------------------------------
# Operator builders

_UP = 0
_SHIFTS = {"a": (1, 1), "b": (1, -1), "a*": (-1, -1), "b*": (-1, 1)}


@cache_scalars
def _assemble_hat(x, basis, qv, opposite):
    alpha, beta, alpha_tilde, beta_tilde = _hat_family(qv, opposite)
    channel = {
        "a": alpha,
        "b": beta,
        "a*": alpha_tilde,
        "b*": beta_tilde,
    }.get(x)
    if channel is None:
        raise ValueError(f"unknown generator {x!r}")
    dmu, dn = _SHIFTS[x]
    rows, cols, vals = [], [], []
    for col, ix in enumerate(basis.indices):
        j2, mu2, n2 = ix.j.twice, ix.mu.twice, ix.n.twice
        tau = _UP if ix.spin == SPIN_UP else 1
        for sign in (+1, -1):
            if sign < 0 and j2 == 0:
                continue
            value = channel(sign, j2, mu2, n2)[tau]
            if value == 0:
                continue
            row = basis.pos2.get((j2 + sign, mu2 + dmu, n2 + dn, tau))
            if row is None:
                continue
            rows.append(row)
            cols.append(col)
            vals.append(float(value))
    return TruncatedOperator.from_triplets(basis, basis, rows, cols, vals)


def build_pi_hat(x, basis, q):
    """One generator of the diagonal approximant to the spin representation.

    Each channel keeps the spinor component unchanged, so the operator
    never mixes the two towers.
    """
    _require_spinor(basis)
    return _assemble_hat(x, basis, _scalar_of(q), False)


@cache_scalars
def _piiop_hat_cached(x, basis, qv):
    explicit = _assemble_hat(x, basis, qv, True)
    J = _conjugation_cached(basis)
    conjugated = J @ _assemble_hat(star_name(x), basis, qv, False) @ J.inverse_antiunitary()
    defect = frobenius_norm(explicit - conjugated)
    if defect > 1e-12:
        raise RuntimeError(
            f"right approximant mismatch for {x}: reflected coefficients and "
            f"the conjugated left approximant differ by {defect:.3e}"
        )
    return explicit


def build_piiop_hat(x, basis, q):
    """Right-acting counterpart of the diagonal approximant.

    Both constructions, reflected coefficients and conjugation of the
    starred left approximant, drop the same truncated entries, so they
    are compared exactly rather than on an interior range.
    """
    _require_spinor(basis)
    return _piiop_hat_cached(x, basis, _scalar_of(q))


@cache_scalars
def _lq_cached(basis, qv):
    diag = [float(q_half_power(qv, ix.j.twice)) for ix in basis.indices]
    return TruncatedOperator.from_diagonal(basis, diag)


def build_Lq(basis, q):
    """Diagonal operator with value q^j on the level-j block."""
    _require_spinor(basis)
    return _lq_cached(basis, _scalar_of(q))


@cache_scalars
def _t_cached(basis, qv):
    diag = []
    for ix in basis.indices:
        e2 = 2 * ix.j.twice + (3 if ix.spin == SPIN_UP else 1)
        diag.append(float(q_half_power(qv, e2)))
    return TruncatedOperator.from_diagonal(basis, diag)


def build_T(basis, q):
    """Trace-class weight q^{2j+3/2} on the up tower, q^{2j+1/2} on the down."""
    _require_spinor(basis)
    return _t_cached(basis, _scalar_of(q))


# --------------------------------------------------------------------------
# Coefficient comparison

def coefficient_difference_check(x, j, mu, n, q):
    """Relative residuals of the closed forms for coefficient differences.

    For the first generator the gap between the exact diagonal entries
    and their approximants is the entry itself scaled by an explicit
    power of q. Returns the residual of each of the four identities.
    """
    if x != "a":
        raise ValueError("closed difference forms are tabulated for the generator 'a'")
    qv = float(_scalar_of(q))
    j2 = HalfInteger(j).twice
    exact = spin_coefficients(j, mu, n, q)
    hat = hat_coefficients(j, mu, n, q)
    cases = {
        "alpha-plus-up": (exact.alpha_plus[0, 0], hat.alpha_plus[0], 2 * j2 + 4),
        "alpha-plus-down": (exact.alpha_plus[1, 1], hat.alpha_plus[1], 2 * j2 + 2),
        "alpha-minus-up": (exact.alpha_minus[0, 0], hat.alpha_minus[0], 2 * j2 + 2),
        "alpha-minus-down": (exact.alpha_minus[1, 1], hat.alpha_minus[1], 2 * j2),
    }
    out = {}
    for name, (full, approx, e) in cases.items():
        lhs = full - approx
        rhs = qv**e * full
        scale = max(abs(full), 1e-300)
        out[name] = abs(lhs - rhs) / scale
    return out


# --------------------------------------------------------------------------
# Decay certificates

_DEFAULT_TOLS = {"rate_tol": 0.15, "fit_tol": 0.25}


@dataclass(frozen=True)
class DecayCertificate:
    """Outcome of fitting level-block norms against a decay exponent.

    The rate is the fitted slope of log block norms per level, in units
    of log(1/q), so a clean q^{alpha j} envelope certifies at alpha
    independently of q.
    """

    label: str
    q: str
    jmax: float
    alpha: float
    rate: float
    constant: float
    residual: float
    verdict: str
    block_norms: tuple
    window: tuple
    excluded: tuple

    @property
    def certified(self):
        return self.verdict.startswith("certified")

    def to_json_dict(self):
        def finite(v):
            return v if v is not None and math.isfinite(v) else None

        return {
            "label": self.label,
            "q": self.q,
            "jmax": self.jmax,
            "rate": finite(self.rate),
            "constant": finite(self.constant),
            "residual": finite(self.residual),
            "verdict": self.verdict,
            "block_norms": [[jv, bv] for jv, bv in self.block_norms],
        }

    def json(self):
        return json.dumps(self.to_json_dict(), indent=2, allow_nan=False)


def certify_Kq(X, alpha, q, fit_window=None, tols=None, label="operator"):
    """Fit the block norms of X and compare the decay rate against alpha.

    The default window keeps a word-length margin away from both the
    lowest levels, where polynomial prefactors distort the slope, and
    the cutoff, where truncation does. Levels with exactly zero norm
    carry no slope information and are excluded but recorded.
    """
    qv = float(_scalar_of(q))
    tolerances = dict(_DEFAULT_TOLS)
    if tols:
        tolerances.update(tols)
    norms = [(float(j), float(b)) for j, b in block_norms(X)]
    jmax = float(X.domain.cutoff.twice) / 2.0
    if fit_window is None:
        fit_window = (2.0, jmax - 2.0)
    lo, hi = float(fit_window[0]), float(fit_window[1])

    if all(b == 0.0 for _, b in norms):
        return DecayCertificate(
            label=label,
            q=_format_q(q),
            jmax=jmax,
            alpha=float(alpha),
            rate=math.inf,
            constant=0.0,
            residual=0.0,
            verdict=f"certified at rate {alpha:g} (identically zero)",
            block_norms=tuple(norms),
            window=(lo, hi),
            excluded=(),
        )

    in_window = [(jv, bv) for jv, bv in norms if lo <= jv <= hi]
    excluded = tuple(jv for jv, bv in in_window if bv == 0.0)
    points = [(jv, bv) for jv, bv in in_window if bv > 0.0]
    if len(points) < 4:
        return DecayCertificate(
            label=label,
            q=_format_q(q),
            jmax=jmax,
            alpha=float(alpha),
            rate=math.nan,
            constant=math.nan,
            residual=math.nan,
            verdict="insufficient data",
            block_norms=tuple(norms),
            window=(lo, hi),
            excluded=excluded,
        )

    xs = np.array([jv for jv, _ in points])
    ys = np.log(np.array([bv for _, bv in points]))
    slope, intercept = np.polyfit(xs, ys, 1)
    rate = float(slope / math.log(qv))
    constant = float(math.exp(intercept))
    residual = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    ok = rate >= float(alpha) - tolerances["rate_tol"] and residual <= tolerances["fit_tol"]
    verdict = f"certified at rate {alpha:g}" if ok else f"not certified at rate {alpha:g}"
    return DecayCertificate(
        label=label,
        q=_format_q(q),
        jmax=jmax,
        alpha=float(alpha),
        rate=rate,
        constant=constant,
        residual=residual,
        verdict=verdict,
        block_norms=tuple(norms),
        window=(lo, hi),
        excluded=excluded,
    )


def first_order_check(spec, x, y, basis, q, fit_window=None, tols=None):
    """Certify double commutators with a linear Dirac operator.

    Returns certificates for the approximant variant and for the exact
    representation variant, both at target rate 2. Only linear
    eigenvalue branches keep the inner commutator bounded; anything
    else has no certificate to issue.
    """
    if not isinstance(spec, DiracSpec):
        raise TypeError(
            "first-order certification needs linear eigenvalue branches; "
            "for other candidates measure growth with commutator_growth"
        )
    _require_spinor(basis)
    D = build_dirac(spec, basis)
    hat = commutator(
        build_piiop_hat(x, basis, q), commutator(D, build_pi_hat(y, basis, q))
    )
    exact = commutator(
        build_piiop(x, basis, q), commutator(D, build_pi_prime(y, basis, q))
    )
    return {
        "approximate": certify_Kq(
            hat, 2.0, q, fit_window, tols,
            label=f"[piiop_hat({x}),[D,pi_hat({y})]]",
        ),
        "exact": certify_Kq(
            exact, 2.0, q, fit_window, tols,
            label=f"[piiop({x}),[D,pi_prime({y})]]",
        ),
    }


# --------------------------------------------------------------------------
# Eigenvalue sequences

@dataclass(frozen=True)
class EigenvalueSequence:
    """Eigenvalues of both towers on a consecutive half-integer grid."""

    js: tuple
    d_up: tuple
    d_dn: tuple

    def __post_init__(self):
        js = tuple(HalfInteger(j) for j in self.js)
        object.__setattr__(self, "js", js)
        object.__setattr__(self, "d_up", tuple(float(v) for v in self.d_up))
        object.__setattr__(self, "d_dn", tuple(float(v) for v in self.d_dn))
        if len(js) < 5:
            raise ValueError("need at least five grid points")
        if len(self.d_up) != len(js) or len(self.d_dn) != len(js):
            raise ValueError("eigenvalue lists must match the grid length")
        for a, b in zip(js, js[1:]):
            if b.twice - a.twice != 1:
                raise ValueError("grid must step by one half")

    @classmethod
    def from_spec(cls, spec, J_max, start=0):
        lo = HalfInteger(start).twice
        hi = HalfInteger(J_max).twice
        js = [HalfInteger.from_twice(t) for t in range(lo, hi + 1)]
        up = [spec.c1_up * (j.twice / 2.0) + spec.c2_up for j in js]
        dn = [spec.c1_dn * (j.twice / 2.0) + spec.c2_dn for j in js]
        return cls(tuple(js), tuple(up), tuple(dn))

    @classmethod
    def from_q_dirac(cls, q, J_max, start=0):
        qv = _scalar_of(q)
        denom = qv + 1 / qv
        lo = HalfInteger(start).twice
        hi = HalfInteger(J_max).twice
        js = [HalfInteger.from_twice(t) for t in range(lo, hi + 1)]
        up = [float(2 * _qint(j.twice + 1, qv) / denom) for j in js]
        dn = [-v for v in up]
        return cls(tuple(js), tuple(up), tuple(dn))

    def second_differences(self, branch):
        """w_j = d_{j+1} + d_j - 2 d_{j+1/2} along one tower."""
        d = self.d_up if branch == "up" else self.d_dn
        out = []
        for i in range(len(d) - 2):
            out.append((self.js[i], d[i + 2] + d[i] - 2 * d[i + 1]))
        return out


def analyze_eigenvalue_sequence(seq, q, rate_tol=0.15):
    """Decide whether both towers are linear up to a q^j correction.

    A tower with vanishing second differences is exactly linear and its
    slope and intercept are read off the first step. Otherwise the
    second differences must decay at least like q^j for the verdict to
    hold; growth rejects the sequence.
    """
    qv = float(_scalar_of(q))
    scale = max(
        1.0, max(abs(v) for v in seq.d_up), max(abs(v) for v in seq.d_dn)
    )
    verdicts = {}
    recovered = {}
    rates = {}
    for branch in ("up", "down"):
        d = seq.d_up if branch == "up" else seq.d_dn
        w = seq.second_differences(branch)
        if max(abs(wv) for _, wv in w) <= 1e-12 * scale:
            c1 = 2.0 * (d[1] - d[0])
            c2 = d[0] - c1 * (seq.js[0].twice / 2.0)
            recovered[branch] = (c1, c2)
            rates[branch] = math.inf
            verdicts[branch] = True
            continue
        recovered[branch] = None
        points = [(j.twice / 2.0, math.log(abs(wv))) for j, wv in w if wv != 0.0]
        if len(points) < 3:
            verdicts[branch] = False
            rates[branch] = math.nan
            continue
        xs = np.array([p[0] for p in points])
        ys = np.array([p[1] for p in points])
        slope = np.polyfit(xs, ys, 1)[0]
        rates[branch] = float(slope / math.log(qv))
        verdicts[branch] = rates[branch] >= 1.0 - rate_tol
    return {
        "linear_mod_Kq": verdicts["up"] and verdicts["down"],
        "recovered": recovered,
        "rates": rates,
    }
