"""
Rendering service for the linear loop ANT analyzer.
Turns semi-linear sets, analysis reports and simulation traces into text, JSON and SMT-LIB 2 output.
"""

import logging
import re
from typing import Any, Dict, List, Optional, Sequence

from sympy import Rational

from src.models.report_models import AnalysisReport, ConditionDetail, DomainVerdict
from src.models.semilinear_models import Atom, Cell, Relation, SemiLinearSet
from src.models.simulation_models import HorizonResult, Trace
from src.services.semilinear_service import default_names, make_atom, make_cell, make_set
from src.util.errors import LoopSyntaxError
from src.util.exact_arith import to_rational
from src.util.helpers import format_rational, format_vector

logger = logging.getLogger(__name__)

SIMPLE_SYMBOL = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _term(coeff: Rational, name: str, first: bool) -> str:
    magnitude = abs(coeff)
    body = name if magnitude == 1 else f"{magnitude}*{name}"
    if coeff < 0:
        return f"-{body}"
    return body if first else f"+{body}"


def format_linear(coeffs: Sequence[Rational], constant: Rational, names: Sequence[str]) -> str:
    """Render c1*x1 + ... + constant compactly, e.g. -u2+3*u3 or 3/2*x-1."""
    parts: List[str] = []
    for coeff, name in zip(coeffs, names):
        if coeff != 0:
            parts.append(_term(Rational(coeff), name, not parts))
    if constant != 0 or not parts:
        value = Rational(constant)
        parts.append(str(value) if value < 0 or not parts else f"+{value}")
    return "".join(parts)


def format_atom(atom: Atom, names: Sequence[str]) -> str:
    """
    Render an atom with its first variable isolated: u1<-u2+3*u3, u1==4*u3, u3>0.

    Dividing by the absolute value of the leading coefficient keeps the relation direction meaningful.
    """
    lead = next(i for i, c in enumerate(atom.coeffs) if c != 0)
    a = atom.coeffs[lead]
    rest = [Rational(0) if i == lead else -c / abs(a) for i, c in enumerate(atom.coeffs)]
    constant = -atom.offset / abs(a)
    right = format_linear(rest, constant, names)
    if atom.relation == Relation.EQ:
        left = names[lead] if a > 0 else f"-{names[lead]}"
        return f"{left}=={right}"
    if a > 0:
        return f"{names[lead]}>{right}"
    # -x + r > 0 is x < r
    return f"{names[lead]}<{format_linear([-v for v in rest], -constant, names)}"


def format_cell(cell: Cell, names: Sequence[str]) -> str:
    if not cell.atoms:
        return "[[true]]"
    return "[[" + ",".join(format_atom(atom, names) for atom in cell.atoms) + "]]"


def format_set(s: SemiLinearSet, names: Optional[Sequence[str]] = None) -> str:
    """Bracket style rendering `[[...]]OR[[...]]`; the empty set prints as `empty`."""
    labels = list(names) if names is not None else list(s.variable_names)
    if not s.cells:
        return "empty"
    return "OR".join(format_cell(cell, labels) for cell in s.cells)


def set_to_json(s: SemiLinearSet) -> Dict[str, Any]:
    return {
        "dimension": s.dimension,
        "variables": list(s.variable_names),
        "cells": [
            {
                "label": cell.label,
                "atoms": [
                    {"coeffs": [str(c) for c in atom.coeffs], "offset": str(atom.offset), "rel": atom.relation.value}
                    for atom in cell.atoms
                ],
            }
            for cell in s.cells
        ],
    }


def set_from_json(data: Dict[str, Any]) -> SemiLinearSet:
    """
    Rebuild a set written by set_to_json.

    Raises:
        LoopSyntaxError: If the data does not describe a set
    """
    try:
        dimension = int(data["dimension"])
        cells = []
        for cell in data.get("cells", []):
            atoms = [
                make_atom(
                    [to_rational(c) for c in atom["coeffs"]],
                    to_rational(atom.get("offset", 0)),
                    Relation(atom["rel"]),
                )
                for atom in cell.get("atoms", [])
            ]
            cells.append(make_cell(atoms, cell.get("label")))
        return make_set(cells, dimension, data.get("variables") or default_names(dimension))
    except (KeyError, TypeError, ValueError) as e:
        raise LoopSyntaxError(f"Invalid set description: {e}") from e


def _smt_symbol(name: str) -> str:
    return name if SIMPLE_SYMBOL.match(name) else f"|{name}|"


def _smt_number(value: Rational) -> str:
    value = Rational(value)
    magnitude = str(abs(value.p)) if value.q == 1 else f"(/ {abs(value.p)} {value.q})"
    return f"(- {magnitude})" if value < 0 else magnitude


def _smt_atom(atom: Atom, names: Sequence[str]) -> str:
    terms = [f"(* {_smt_number(c)} {_smt_symbol(name)})" for c, name in zip(atom.coeffs, names) if c != 0]
    if atom.offset != 0:
        terms.append(_smt_number(atom.offset))
    form = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
    operator = "=" if atom.relation == Relation.EQ else ">"
    return f"({operator} {form} 0)"


def set_to_smt2(s: SemiLinearSet, names: Optional[Sequence[str]] = None, name: str = "ant") -> str:
    """
    QF_LRA script declaring one Real per coordinate, defining the set as a Bool and asserting it.

    Args:
        s: Set to export
        names: Coordinate names, defaults to the set's own labels
        name: Name of the defined predicate

    Returns:
        SMT-LIB 2 text
    """
    labels = list(names) if names is not None else list(s.variable_names)
    lines = ["(set-logic QF_LRA)"]
    lines += [f"(declare-fun {_smt_symbol(label)} () Real)" for label in labels]
    disjuncts = []
    for cell in s.cells:
        atoms = [_smt_atom(atom, labels) for atom in cell.atoms]
        if not atoms:
            disjuncts.append("true")
        else:
            disjuncts.append(atoms[0] if len(atoms) == 1 else f"(and {' '.join(atoms)})")
    if not disjuncts:
        body = "false"
    else:
        body = disjuncts[0] if len(disjuncts) == 1 else f"(or {' '.join(disjuncts)})"
    lines.append(f"(define-fun {name} () Bool {body})")
    lines.append(f"(assert {name})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _parameter_names(report: AnalysisReport) -> List[str]:
    return [parameter for parameter, _ in report.parameters]


def _verdict_line(verdict: DomainVerdict) -> str:
    line = f"Verdict ({verdict.domain.value}): {verdict.verdict.value}"
    if verdict.witness is not None:
        line += f", witness {format_vector(verdict.witness)}"
    if verdict.note:
        line += f" [{verdict.note}]"
    return line


def _eigen_summary(detail: ConditionDetail) -> str:
    if detail.spectral is None:
        return "none"
    layout = detail.spectral.block_layout
    return ", ".join(f"{value} (block {'+'.join(str(s) for s in sizes)})" for value, sizes in sorted(layout.items()))


def _condition_lines(detail: ConditionDetail) -> List[str]:
    lines = [f"Condition {detail.row + 1}: {detail.method}"]
    if detail.trace is not None:
        trace = detail.trace
        lines.append(
            f"  dim K={trace.dim_K}, dim E0={trace.dim_E0}, n_a={trace.n_a}, dim E^nr={trace.dim_Enr}, "
            f"normal={trace.normal}"
        )
        lines.append(f"  eigenvalues: {_eigen_summary(detail)}")
    if detail.cell_counts:
        lines.append("  cells: " + ", ".join(f"{key}={value}" for key, value in detail.cell_counts.items()))
    if detail.jordan_set is not None:
        lines.append(f"  Jordan locus: {format_set(detail.jordan_set)}")
    return lines


def report_to_text(report: AnalysisReport, trace: bool = False) -> str:
    """
    Human readable report: parameters, locus of ANT, terminating set, verdicts and optional traces.

    Args:
        report: Analysis result
        trace: Append the reduction trace of every guard row

    Returns:
        Report text ending with a newline
    """
    names = _parameter_names(report)
    header = f"Program: {report.program_name}" if report.program_name else "Program"
    lines = [
        f"{header} ({report.class_tag.value}, n={len(report.var_names)})",
        "Parameters: " + ", ".join(f"{u}={name}" for u, name in report.parameters),
        f"Locus of ANT:{format_set(report.ant_set, names)}",
        f"Terminating set:{format_set(report.terminating_set, names)}",
    ]
    if report.dim_Enr > 0:
        lines.append(
            f"Convention: ANT^r locus (projection convention), dim E^r={report.dim_Er}, dim E^nr={report.dim_Enr}"
        )
    lines += [_verdict_line(verdict) for verdict in report.verdicts]
    if trace:
        if report.embedding.homogenized:
            lines.append(f"Homogenized with constant coordinate {report.embedding.constant_name}")
        for detail in report.conditions:
            lines += _condition_lines(detail)
    return "\n".join(lines) + "\n"


def _matrix_rows(M) -> List[List[str]]:
    return [[str(v) for v in M.row(i)] for i in range(M.rows)]


def _condition_json(detail: ConditionDetail) -> Dict[str, Any]:
    data: Dict[str, Any] = {"row": detail.row, "method": detail.method, "cells": dict(detail.cell_counts)}
    if detail.trace is not None:
        trace = detail.trace
        data["trace"] = {
            "n": trace.n,
            "dim_K": trace.dim_K,
            "dim_E0": trace.dim_E0,
            "n_a": trace.n_a,
            "dim_Enr": trace.dim_Enr,
            "normal": trace.normal,
            "eigenvalues": [[str(value), multiplicity] for value, multiplicity in trace.eigenvalues],
            "R": _matrix_rows(trace.R),
        }
    if detail.jordan_set is not None:
        data["jordan_set"] = set_to_json(detail.jordan_set)
    return data


def report_to_json(report: AnalysisReport, trace: bool = False) -> Dict[str, Any]:
    """JSON-ready dictionary of a report; key order is fixed so equal reports serialize identically."""
    names = _parameter_names(report)
    data: Dict[str, Any] = {
        "program": report.program_name,
        "class": report.class_tag.value,
        "variables": list(report.var_names),
        "parameters": {u: name for u, name in report.parameters},
        "ant": set_to_json(report.ant_set),
        "ant_text": format_set(report.ant_set, names),
        "terminating": set_to_json(report.terminating_set),
        "terminating_text": format_set(report.terminating_set, names),
        "verdicts": [
            {
                "domain": verdict.domain.value,
                "verdict": verdict.verdict.value,
                "witness": [str(v) for v in verdict.witness] if verdict.witness is not None else None,
                "note": verdict.note,
                "nodes": verdict.nodes,
            }
            for verdict in report.verdicts
        ],
        "dim_Er": report.dim_Er,
        "dim_Enr": report.dim_Enr,
        "eigenvalues": [[str(value), multiplicity] for value, multiplicity in report.eigenvalues],
    }
    if trace:
        data["conditions"] = [_condition_json(detail) for detail in report.conditions]
    return data


def report_to_smt2(report: AnalysisReport) -> str:
    """SMT-LIB 2 export of the ANT locus over the parameters u1..un."""
    comment = "; " + ", ".join(f"{u}={name}" for u, name in report.parameters)
    return comment + "\n" + set_to_smt2(report.ant_set, _parameter_names(report))


def trace_to_text(trace: Trace, names: Sequence[str], exact: bool = False, show_states: bool = False) -> str:
    """
    One line per step with the guard values, and the states when requested.

    Non-integer values are approximated and marked with "~" unless exact is set.
    """
    lines = []
    for k, (point, guards) in enumerate(zip(trace.points, trace.guard_values)):
        line = f"k={k} guard={format_vector(guards, exact)}"
        if show_states:
            line += " " + ", ".join(f"{name}={format_rational(v, exact)}" for name, v in zip(names, point))
        lines.append(line)
    if trace.first_violation is not None:
        violation = trace.first_violation
        lines.append(f"Guard row {violation.row + 1} violated at k={violation.step}")
    else:
        lines.append(f"No violation within {trace.steps} steps")
    return "\n".join(lines) + "\n"


def horizon_to_text(result: HorizonResult) -> str:
    return f"Horizon check (K={result.horizon}): {result.describe()}\n"

