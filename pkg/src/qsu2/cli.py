"""Command-line front end: verification, tables, certificates, exports.

Subcommands:

* ``verify``    run the certification suite and write the JSON report
* ``spectrum``  eigenvalue/multiplicity table of the chosen Dirac operator
* ``decay``     decay certificate for an operator expression
* ``growth``    commutator norm across truncations
* ``export``    sparse matrix file for an operator expression

``spectrum``, ``decay``, and ``growth`` also render a figure next to the
delimited output unless ``--no-figure`` is given. Operator expressions
use a small fixed grammar: representation atoms applied to a generator,
a few standalone operators, and commutator brackets, e.g.
``[piiop_hat(a), pi_hat(a)]``.
"""

import argparse
import csv
import os
import sys

from .approx import build_Lq, build_T, build_pi_hat, build_piiop_hat, certify_Kq
from .hilbert import commutator, enumerate_basis, save_operator
from .qnum import DeformationParameter, HalfInteger, _qint
from .regrep import build_pi, build_piop
from .spingeom import (
    DiracSpec,
    build_dirac,
    build_J,
    build_pi_prime,
    build_piiop,
    build_q_dirac,
    commutator_growth,
    isospectral_spec,
)
from .verify import SuiteConfig, run_suite

_GENERATORS = ("a", "b", "a*", "b*")
_REP_ATOMS = {
    "pi": ("regular", build_pi),
    "piop": ("regular", build_piop),
    "pi_prime": ("spinor", build_pi_prime),
    "piiop": ("spinor", build_piiop),
    "pi_hat": ("spinor", build_pi_hat),
    "piiop_hat": ("spinor", build_piiop_hat),
}
_BARE_ATOMS = ("D", "J", "Lq", "T")
_TOL_KEYS = ("interior", "cross", "rate_tol", "fit_tol")
_MAX_BRACKET_DEPTH = 2


class ExpressionError(ValueError):
    """Raised when an operator expression does not parse."""


def _expr_usage():
    atoms = ", ".join(f"{name}(g)" for name in _REP_ATOMS)
    return (
        f"valid operator expressions: {atoms} with g in "
        f"{', '.join(_GENERATORS)}; {', '.join(_BARE_ATOMS)}; "
        'commutators "[A,B]" up to two bracket levels'
    )


def parse_expression(text, _depth=0):
    """Parse an operator expression into a small tree.

    Nodes are ("rep", name, generator), ("bare", name), or
    ("comm", left, right).
    """
    s = text.strip()
    if not s:
        raise ExpressionError(f"empty operator expression; {_expr_usage()}")
    if s.startswith("["):
        if _depth >= _MAX_BRACKET_DEPTH:
            raise ExpressionError(
                f"bracket nesting deeper than {_MAX_BRACKET_DEPTH} levels in {text!r}"
            )
        if not s.endswith("]"):
            raise ExpressionError(f"unbalanced brackets in {text!r}")
        inner = s[1:-1]
        level = 0
        split_at = None
        for i, ch in enumerate(inner):
            if ch == "[":
                level += 1
            elif ch == "]":
                level -= 1
                if level < 0:
                    raise ExpressionError(f"unbalanced brackets in {text!r}")
            elif ch == "," and level == 0:
                if split_at is not None:
                    raise ExpressionError(
                        f"a commutator takes exactly two operands: {text!r}"
                    )
                split_at = i
        if split_at is None or level != 0:
            raise ExpressionError(
                f"a commutator takes exactly two operands: {text!r}"
            )
        return (
            "comm",
            parse_expression(inner[:split_at], _depth + 1),
            parse_expression(inner[split_at + 1 :], _depth + 1),
        )
    if s in _BARE_ATOMS:
        return ("bare", s)
    if s.endswith(")") and "(" in s:
        name, _, arg = s[:-1].partition("(")
        name = name.strip()
        arg = arg.strip()
        if name in _REP_ATOMS and arg in _GENERATORS:
            return ("rep", name, arg)
        if name in _REP_ATOMS:
            raise ExpressionError(
                f"unknown generator {arg!r} in {s!r}; generators are "
                + ", ".join(_GENERATORS)
            )
    raise ExpressionError(f"unknown operator expression {s!r}; {_expr_usage()}")


def _expression_spaces(node, out):
    kind = node[0]
    if kind == "comm":
        _expression_spaces(node[1], out)
        _expression_spaces(node[2], out)
    elif kind == "rep":
        out.add(_REP_ATOMS[node[1]][0])
    else:
        out.add("spinor")
    return out


class _Workspace:
    """Lazily built bases and operators shared by one command invocation."""

    def __init__(self, q, J_max, dirac):
        self.q = q
        self.J_max = J_max
        self.dirac = dirac
        self._bases = {}

    def basis(self, kind):
        if kind not in self._bases:
            self._bases[kind] = enumerate_basis(kind, self.J_max)
        return self._bases[kind]

    def dirac_operator(self):
        if self.dirac == "qdirac":
            return build_q_dirac(self.basis("spinor"), self.q)
        return build_dirac(self.dirac, self.basis("spinor"))

    def build(self, node):
        kind = node[0]
        if kind == "comm":
            return commutator(self.build(node[1]), self.build(node[2]))
        if kind == "rep":
            space, builder = _REP_ATOMS[node[1]]
            return builder(node[2], self.basis(space), self.q)
        name = node[1]
        if name == "D":
            return self.dirac_operator()
        if name == "J":
            return build_J(self.basis("spinor"))
        if name == "Lq":
            return build_Lq(self.basis("spinor"), self.q)
        return build_T(self.basis("spinor"), self.q)


def build_expression(text, q, J_max, dirac):
    """Build the operator named by an expression on a fresh truncation."""
    node = parse_expression(text)
    spaces = _expression_spaces(node, set())
    if len(spaces) > 1:
        raise ExpressionError(
            f"{text!r} mixes regular-space and spinor-space operators"
        )
    return _Workspace(q, J_max, dirac).build(node)


# --------------------------------------------------------------------------
# argument parsing


def _q_text(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"q must be a decimal number, got {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(
            f"q must lie strictly between 0 and 1, got {text}"
        )
    return text


def _jmax_twice(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--jmax takes an integer (2J), got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"--jmax must be nonnegative, got {value}")
    return value


def _dirac_choice(text):
    if text == "isospectral":
        return isospectral_spec()
    if text == "qdirac":
        return "qdirac"
    parts = text.split(",")
    if len(parts) == 4:
        try:
            return DiracSpec(*(float(p) for p in parts))
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        f"--dirac takes isospectral, qdirac, or four comma-separated constants, got {text!r}"
    )


def _tol_pair(text):
    key, sep, value = text.partition("=")
    if not sep or key not in _TOL_KEYS:
        raise argparse.ArgumentTypeError(
            f"--tol takes KEY=VALUE with KEY in {', '.join(_TOL_KEYS)}, got {text!r}"
        )
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--tol value must be a number, got {value!r}")


def _window_pair(text):
    parts = text.split(",")
    if len(parts) == 2:
        try:
            return float(parts[0]), float(parts[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(
        f"--window takes two comma-separated levels lo,hi, got {text!r}"
    )


def _grid_list(text):
    try:
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        values = []
    if len(values) < 3:
        raise argparse.ArgumentTypeError(
            f"--grid takes at least three comma-separated truncation levels, got {text!r}"
        )
    return tuple(values)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--q", type=_q_text, default="0.5", metavar="Q",
        help="deformation parameter as a decimal string, 0 < q < 1 (default 0.5)",
    )
    common.add_argument(
        "--jmax", type=_jmax_twice, default=16, metavar="2J",
        help="truncation level as the integer 2J (default 16, i.e. J = 8)",
    )
    common.add_argument(
        "--dirac", type=_dirac_choice, default="isospectral", metavar="SPEC",
        help="isospectral, qdirac, or four comma-separated eigenvalue constants",
    )
    common.add_argument(
        "--tol", type=_tol_pair, action="append", default=[], metavar="KEY=VALUE",
        help=f"override a tolerance; keys: {', '.join(_TOL_KEYS)}",
    )
    common.add_argument(
        "--precision", choices=("double", "extended"), default="double",
        help="scalar mode for coefficient evaluation (default double)",
    )
    common.add_argument("--out", metavar="PATH", help="output file path")

    figured = argparse.ArgumentParser(add_help=False)
    figured.add_argument(
        "--no-figure", action="store_true",
        help="skip rendering the figure next to the delimited output",
    )

    parser = argparse.ArgumentParser(
        prog="qsu2",
        description="Truncated spectral triples for the quantum SU(2): "
        "verification suite, spectra, decay certificates, and exports.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser(
        "verify", parents=[common],
        help="run the certification suite and write a JSON report",
    )
    p.add_argument(
        "--grid", type=_grid_list, default=(5.0, 10.0, 15.0, 20.0), metavar="J1,J2,...",
        help="truncation levels for the boundedness dichotomy (default 5,10,15,20)",
    )
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser(
        "spectrum", parents=[common, figured],
        help="tabulate Dirac eigenvalues and multiplicities as CSV",
    )
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser(
        "decay", parents=[common, figured],
        help="certify the block-norm decay of an operator expression",
    )
    p.add_argument("expression", help='operator expression, e.g. "[piiop_hat(a),pi_hat(a)]"')
    p.add_argument(
        "--alpha", type=float, default=2.0, metavar="RATE",
        help="decay rate to certify against (default 2)",
    )
    p.add_argument(
        "--window", type=_window_pair, default=None, metavar="LO,HI",
        help="fit window as two levels lo,hi (default: interior of the truncation)",
    )
    p.set_defaults(handler=_cmd_decay)

    p = sub.add_parser(
        "growth", parents=[common, figured],
        help="track a Dirac commutator norm across truncations",
    )
    p.add_argument(
        "--generator", choices=_GENERATORS, default="a",
        help="algebra generator for the commutator (default a)",
    )
    p.add_argument(
        "--grid", type=_grid_list, default=(5.0, 10.0, 15.0, 20.0), metavar="J1,J2,...",
        help="increasing truncation levels J (default 5,10,15,20)",
    )
    p.set_defaults(handler=_cmd_growth)

    p = sub.add_parser(
        "export", parents=[common],
        help="write an operator expression as a sparse matrix file",
    )
    p.add_argument("expression", help='operator expression, e.g. "pi_prime(b*)"')
    p.set_defaults(handler=_cmd_export)

    return parser


def _deformation(args):
    return DeformationParameter(
        float(args.q), extended=(args.precision == "extended"), text=args.q
    )


def _figure_path(out_path):
    stem, _ = os.path.splitext(out_path)
    return stem + ".png"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value):
    return f"{value:.12g}"


# --------------------------------------------------------------------------
# subcommands


def _cmd_verify(args):
    config = SuiteConfig(
        q=_deformation(args),
        J_max=HalfInteger.from_twice(args.jmax),
        regular_cutoff=HalfInteger.from_twice(args.jmax),
        dirac=args.dirac,
        growth_grid=args.grid,
        tolerances=dict(args.tol),
    )
    report = run_suite(config)
    out = args.out or "qsu2-verify.json"
    with open(out, "w") as fh:
        fh.write(report.json())
        fh.write("\n")
    for record in report.records:
        line = f"{record.name}: {record.status}"
        if record.notes:
            line += f"  ({'; '.join(record.notes)})"
        print(line)
    print(f"overall: {report.overall}")
    print(f"report written to {out}")
    return report.exit_code


def _spectrum_rows(dirac, q, J_max):
    """Level-major eigenvalue table: per level, the up row then the down row."""
    rows = []
    if dirac == "qdirac":
        qv = q.scalar()
        denom = qv + 1 / qv

        def up_value(j):
            return float(2 * _qint(j.twice + 1, qv) / denom)

        def down_value(j):
            return -up_value(j)

    else:

        def up_value(j):
            return dirac.eigenvalue(j, "up")

        def down_value(j):
            return dirac.eigenvalue(j, "down")

    for j2 in range(0, J_max.twice + 1):
        j = HalfInteger.from_twice(j2)
        rows.append((up_value(j), (j2 + 1) * (j2 + 2), "up", float(j)))
        if j2 >= 1:
            rows.append((down_value(j), j2 * (j2 + 1), "down", float(j)))
    return rows


def _cmd_spectrum(args):
    q = _deformation(args)
    J = HalfInteger.from_twice(args.jmax)
    rows = _spectrum_rows(args.dirac, q, J)
    out = args.out or "qsu2-spectrum.csv"
    _write_csv(
        out,
        ("eigenvalue", "multiplicity", "branch", "j"),
        [(_fmt(v), m, b, _fmt(j)) for v, m, b, j in rows],
    )
    print(f"{len(rows)} spectral lines written to {out}")
    if not args.no_figure:
        from .plots import save_spectrum_figure

        figure = _figure_path(out)
        save_spectrum_figure(rows, figure)
        print(f"figure written to {figure}")
    return 0


def _cmd_decay(args):
    q = _deformation(args)
    J = HalfInteger.from_twice(args.jmax)
    X = build_expression(args.expression, q, J, args.dirac)
    tols = {k: v for k, v in dict(args.tol).items() if k in ("rate_tol", "fit_tol")}
    certificate = certify_Kq(
        X, args.alpha, q,
        fit_window=args.window,
        tols=tols or None,
        label=args.expression,
    )
    out = args.out or "qsu2-decay.json"
    with open(out, "w") as fh:
        fh.write(certificate.json())
        fh.write("\n")
    stem, _ = os.path.splitext(out)
    blocks = stem + "-blocks.csv"
    _write_csv(
        blocks,
        ("j", "norm"),
        [(_fmt(float(j)), _fmt(n)) for j, n in certificate.block_norms],
    )
    print(certificate.json())
    print(f"certificate written to {out}; block norms to {blocks}")
    if not args.no_figure:
        from .plots import save_decay_figure

        figure = _figure_path(out)
        save_decay_figure(certificate.to_json_dict(), figure)
        print(f"figure written to {figure}")
    return 0


def _cmd_growth(args):
    q = _deformation(args)
    result = commutator_growth(args.dirac, args.generator, q, args.grid)
    out = args.out or "qsu2-growth.csv"
    jmaxes = [float(j) for j in result.jmaxes]
    _write_csv(
        out,
        ("jmax", "norm"),
        [(_fmt(j), _fmt(n)) for j, n in zip(jmaxes, result.norms)],
    )
    print(f"classification: {result.classification}")
    print(f"norm table written to {out}")
    if not args.no_figure:
        from .plots import save_growth_figure

        figure = _figure_path(out)
        save_growth_figure(jmaxes, list(result.norms), result.classification, figure)
        print(f"figure written to {figure}")
    return 0


def _cmd_export(args):
    q = _deformation(args)
    J = HalfInteger.from_twice(args.jmax)
    X = build_expression(args.expression, q, J, args.dirac)
    out = args.out or "qsu2-export.txt"
    save_operator(X, out, q)
    print(f"{args.expression} on a 2J={args.jmax} truncation written to {out}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ExpressionError as exc:
        parser.error(str(exc))
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
