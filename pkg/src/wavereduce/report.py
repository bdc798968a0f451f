"""Deterministic report documents: a short summary plus a key/value tree."""
from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .compat import CompatResult, SingleAnsatzResult
from .exprcore import Expr, to_text
from .reduction import CaseKind, ReducedPDE, ReductionSystem
from .solutions import NullFamily, SobolevFamily
from .verify import QAudit, ResidualReport


def fmt_scalar(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, Expr):
        return to_text(x)
    if isinstance(x, CaseKind):
        return x.label
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (float, np.floating)):
        return "%.12e" % float(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def normalize(doc):
    """Every leaf rendered to its final string form."""
    if isinstance(doc, dict):
        return {str(k): normalize(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [normalize(v) for v in doc]
    return fmt_scalar(doc)


def render_tree(doc, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, val in doc.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(render_tree(val, indent + 1))
        elif isinstance(val, list) and not val:
            lines.append(f"{pad}{key}: []")
        elif isinstance(val, list):
            lines.append(f"{pad}{key}:")
            for item in val:
                if isinstance(item, dict):
                    lines.append(f"{pad}  -")
                    lines.extend(render_tree(item, indent + 2))
                else:
                    lines.append(f"{pad}  - {item}")
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def render(summary: list[str], doc: dict, as_json: bool = False) -> str:
    norm = normalize(doc)
    if as_json:
        return json.dumps({"summary": summary, "report": norm}, indent=2) + "\n"
    return "\n".join(summary + ["---"] + render_tree(norm)) + "\n"


# ---------------------------------------------------------------- documents


def reduction_doc(rs: ReductionSystem, pde: ReducedPDE | None):
    summary = [f"case: {rs.case.label}", f"closed: {fmt_scalar(rs.all_closed)}"]
    conds = {}
    for name, c in rs.conditions.items():
        conds[name] = {
            "x_form": c.x_form,
            "closed": c.closed,
            "closed_fraction": c.rank.closed_fraction,
            "yz_form": c.closed_form,
            "sampled": c.rank.accepted,
            "excluded": c.rank.excluded,
        }
    doc = {"y": rs.ansatz.y, "z": rs.ansatz.z, "n": rs.ansatz.space.n, "case": rs.case,
           "conditions": conds}
    if pde is not None:
        doc["reduced"] = {"equation": pde.text(), "coefficients": dict(pde.coefficients),
                          "numeric_only": list(pde.numeric_only)}
        summary.append(f"reduced: {pde.text()}")
    return summary, doc


def compat_doc(res: CompatResult):
    verdict = "COMPATIBLE" if res.compatible else "INCOMPATIBLE"
    summary = [f"{verdict} case={res.spec.kind.value} n={res.spec.n}",
               f"V = {to_text(res.V)}", f"W = {to_text(res.W)}"]
    checks = {}
    for name, c in res.checks.items():
        checks[name] = {"value": c.value, "symbolic_zero": c.symbolic, "numeric_max": c.numeric_max,
                        "ok": c.ok}
    doc = {"case": res.spec.kind, "n": res.spec.n, "h": res.h, "Phi": res.Phi, "Psi": res.Psi,
           "V": res.V, "W": res.W, "annihilation_ok": res.annihilation_ok, "annihilation": checks,
           "reduced": res.reduced.text(), "degenerate": res.degenerate}
    if res.spec.kind is not CaseKind.PARABOLIC:
        doc["real_form"] = res.reduced.real_form().text()
    wit = res.witness()
    if wit:
        doc["witness"] = wit
        summary.extend(f"witness {k} = {v}" for k, v in wit.items())
    if res.degenerate:
        summary.append("degenerate: the second variable enters only as a parameter")
    return summary, doc


def single_ansatz_doc(res: SingleAnsatzResult):
    m = res.match
    head = "COMPATIBLE" if m else "INCOMPATIBLE"
    summary = [f"{head} reading={res.query.reading}" + (f" N={m.N} C={fmt_scalar(m.C)}" if m else ""),
               f"note: {res.note}"]
    def one(match):
        if match is None:
            return {"member": False}
        return {"member": True, "N": match.N, "C": match.C, "residual": match.residual,
                "structural": match.structural}
    doc = {"lambda": res.query.lam, "F": res.query.F, "reading": res.query.reading,
           "match": one(m), "other_reading": {"name": res.other_reading, **one(res.other_match)},
           "note": res.note}
    return summary, doc


def family_doc(fam: NullFamily, rep: ResidualReport | None):
    ok = rep is None or rep.passed
    summary = [f"{'PASS' if ok else 'FAIL'} family rank={fam.rank} tag={fam.tag}"]
    if fam.degenerate:
        summary.append("degenerate: A_mu C_mu = 0, the reduction collapses")
    doc = {"rank": fam.rank, "shared_parameters": fam.shared_parameters, "tag": fam.tag,
           "A": list(fam.A), "B": fam.B, "C": list(fam.C), "D": fam.D,
           "h": fam.h_expr, "h_constant": fam.h, "degenerate": fam.degenerate}
    if rep is not None:
        s, d = residual_doc(rep, "resolution")
        summary.extend(s)
        doc.update(d)
    return summary, doc


def sobolev_doc(fam: SobolevFamily):
    summary = ["PASS sobolev family: all constraints certified"]
    doc = {"A": list(fam.A), "B": fam.B, "u": fam.u_expr,
           "constraints": {k: ("symbolic" if v else "numeric") for k, v in fam.checks.items()}}
    return summary, doc


def residual_doc(rep: ResidualReport, title: str = "residual"):
    head = "PASS" if rep.passed else "FAIL"
    summary = [f"{head} max={fmt_scalar(rep.max_residual)}"]
    for name, c in rep.conditions.items():
        summary.append(f"  {'pass' if c.passed else 'FAIL'} {name}: max={fmt_scalar(c.max_abs)} "
                       f"points={c.count} excluded={c.excluded}")
    return summary, {title: rep.as_dict()}


def q_audit_doc(audit: QAudit):
    head = "PASS" if audit.passing else "FAIL"
    summary = [f"{head} {audit.statement()}"]
    doc = {"statement": audit.statement(), "printed_passes": audit.printed_passes,
           "audit_flag": audit.flag, "passing_variants": list(audit.passing),
           "variants": {k: r.as_dict() for k, r in audit.reports.items()}}
    return summary, doc


def report_render(obj, as_json: bool = False) -> str:
    """Render any module result to summary text plus document."""
    if isinstance(obj, ResidualReport):
        return render(*residual_doc(obj), as_json=as_json)
    if isinstance(obj, CompatResult):
        return render(*compat_doc(obj), as_json=as_json)
    if isinstance(obj, SingleAnsatzResult):
        return render(*single_ansatz_doc(obj), as_json=as_json)
    if isinstance(obj, QAudit):
        return render(*q_audit_doc(obj), as_json=as_json)
    if isinstance(obj, SobolevFamily):
        return render(*sobolev_doc(obj), as_json=as_json)
    if isinstance(obj, ReductionSystem):
        return render(*reduction_doc(obj, None), as_json=as_json)
    if isinstance(obj, CaseKind):
        return render([f"case: {obj.label}"], {"case": obj}, as_json=as_json)
    raise TypeError(f"no report for {type(obj).__name__}")
