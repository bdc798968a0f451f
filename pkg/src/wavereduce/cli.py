"""wavereduce command line.

Each subcommand reads a job, either a ``key: value`` file (``--job``) or
inline flags, runs one pipeline and prints a report.  Exit status: 0 pass,
1 mathematical failure, 2 usage or parse error.

Job files: one ``key: value`` per line, ``#`` starts a comment, list values
are separated by ``;`` (a bracketed, quoted list such as ``["0", "1"]`` is
accepted too).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import compat, report, solutions, verify
from .exprcore import ExprError, ParseError, VarSpace, parse
from .exprcore.sampling import DEFAULT_SEED, SamplingError
from .reduction import AnsatzPair, CaseKind, assemble_reduced, compute_conditions

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
# raised while checking valid input: the mathematics failed, not the job
MATH_FAILURES = (verify.VerifyError, SamplingError, solutions.NoConvergenceError,
                 solutions.SingularJacobianError)
KINDS = ("reduce", "classify", "compat", "single-ansatz", "family", "verify", "q-check")


class JobError(ValueError):
    pass


# ---------------------------------------------------------------- job files


def parse_job_text(text: str) -> dict:
    job = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise JobError(f"line {lineno}: expected 'key: value'")
        key, val = line.split(":", 1)
        key = key.strip()
        if not key:
            raise JobError(f"line {lineno}: empty key")
        if key in job:
            raise JobError(f"line {lineno}: duplicate key {key!r}")
        job[key] = val.strip()
    return job


def as_list(val: str) -> list[str]:
    val = val.strip()
    if val.startswith("[") and val.endswith("]"):
        items = val[1:-1].split(",")
    else:
        items = val.split(";")
    out = [i.strip().strip("\"'").strip() for i in items]
    return [i for i in out if i]


class Job:
    """Typed access to job fields with usage errors on missing keys."""

    def __init__(self, fields: dict):
        self.fields = fields
        self.used: set = set()

    def has(self, key) -> bool:
        return key in self.fields

    def raw(self, key, default=None):
        self.used.add(key)
        if key not in self.fields:
            if default is None:
                raise JobError(f"missing required field {key!r}")
            return default
        return self.fields[key]

    def int(self, key, default=None) -> int:
        v = self.raw(key, None if default is None else str(default))
        try:
            return int(v)
        except ValueError:
            raise JobError(f"field {key!r} must be an integer, got {v!r}") from None

    def float(self, key, default=None) -> float | None:
        if default is None and key not in self.fields:
            self.used.add(key)
            return None
        v = self.raw(key, str(default))
        try:
            return float(v)
        except ValueError:
            raise JobError(f"field {key!r} must be a number, got {v!r}") from None

    def bool(self, key, default=False) -> bool:
        v = self.raw(key, "true" if default else "false").lower()
        if v in ("true", "yes", "1"):
            return True
        if v in ("false", "no", "0"):
            return False
        raise JobError(f"field {key!r} must be true or false")

    def expr(self, key, space=None, default=None):
        return parse(self.raw(key, default), space)

    def exprs(self, key, space=None, default=None):
        return [parse(t, space) for t in as_list(self.raw(key, default))]

    def branch(self, key):
        v = self.raw(key, "max")
        return int(v) if v.lstrip("-").isdigit() else v


def _box(job: Job):
    if not job.has("box"):
        return (-2.0, 2.0)
    lo, hi = (float(x) for x in as_list(job.raw("box")))
    return (lo, hi)


# ---------------------------------------------------------------- runners

def run_reduce(job: Job, classify_only: bool = False):
    n = job.int("n")
    a = AnsatzPair.from_text(job.raw("y"), job.raw("z"), n)
    rs = compute_conditions(a, job.int("points", 64), job.int("seed", DEFAULT_SEED))
    if classify_only:
        summary, doc = report.reduction_doc(rs, None)
        ok = rs.case is not CaseKind.NOT_CLOSED
        return ok, summary, doc
    pde = None
    if rs.all_closed:
        pde = assemble_reduced(rs, job.expr("F", VarSpace(n), "0"))
    summary, doc = report.reduction_doc(rs, pde)
    return rs.all_closed, summary, doc


def run_compat(job: Job):
    n = job.int("n")
    kind = job.raw("kind").lower()
    if kind in ("first-order", "first_order"):
        V, W = job.expr("V", None, "0"), job.expr("W", None, "0")
        ok = compat.first_order_check(V, W)
        head = "COMPATIBLE" if ok else "INCOMPATIBLE"
        return ok, [f"{head} case=first-order n={n}"], {"case": CaseKind.FIRST_ORDER, "V": V, "W": W,
                                                          "compatible": ok}
    try:
        case = CaseKind[kind.upper()]
    except KeyError:
        raise JobError(f"unknown compat kind {kind!r}") from None
    if case is CaseKind.PARABOLIC:
        pot = job.int("lambda")
    else:
        pot = job.expr("R")
    f = job.exprs("f")
    g = job.exprs("g", None, "1") if case is CaseKind.HYPERBOLIC else []
    spec = compat.CompatSpec(n, case, pot, tuple(f), tuple(g), job.int("seed", DEFAULT_SEED))
    res = compat.build(spec)
    summary, doc = report.compat_doc(res)
    return res.compatible, summary, doc


def run_single(job: Job):
    q = compat.SingleAnsatzQuery(job.int("lambda"), job.expr("F"), reading=job.raw("reading", "implemented"))
    res = compat.check_single_ansatz(q, job.int("seed", DEFAULT_SEED))
    summary, doc = report.single_ansatz_doc(res)
    return res.compatible, summary, doc


def _family(job: Job):
    rank = job.int("rank")
    lst = lambda k: [t for t in as_list(job.raw(k))]  # noqa: E731
    return solutions.make_family(rank, lst("A"), job.raw("B", "0"), lst("C"), job.raw("D", "0"),
                                 job.bool("shared"))


def run_family(job: Job):
    if job.bool("sobolev"):
        fam = solutions.make_sobolev(as_list(job.raw("A")), job.raw("B", "0"))
        summary, doc = report.sobolev_doc(fam)
        return True, summary, doc
    fam = _family(job)
    rep = verify.check_family(fam, job.int("points", 100), job.float("tol", 1e-9),
                              job.int("seed", DEFAULT_SEED), _box(job)) if fam.rank else None
    summary, doc = report.family_doc(fam, rep)
    return rep is None or rep.passed, summary, doc


def _sources(job: Job, n: int):
    space = VarSpace(n)
    if job.has("rank"):
        fam = _family(job)
        return {"v": verify.FamilySource(fam, "v", job.branch("v_branch")),
                "w": verify.FamilySource(fam, "w", job.branch("w_branch"))}
    out = {}
    for name in ("v", "w", "y", "z"):
        if job.has(name):
            out[name] = job.expr(name, space)
    if not out:
        raise JobError("verify needs source fields (v, w) or a family (rank, A, C)")
    return out


def run_verify(job: Job):
    mode = job.raw("mode", "composed")
    n = job.int("n", 2)
    points = job.int("points", 64)
    tol = job.float("tol")
    seed = job.int("seed", DEFAULT_SEED)
    src = _sources(job, n)
    if mode == "composed":
        cand = None
        if job.bool("timelike"):
            cand = verify.timelike_points(n, points, seed)
        cs = verify.ComposedSolution(n, src, job.expr("phi"), job.expr("F", None, "0"))
        rep = verify.check_composed(cs, points if cand is None else cand, tol, seed, _box(job))
    elif mode == "conditions":
        case = job.raw("case", "hyperbolic").lower()
        V, W = job.expr("V", None, "0"), job.expr("W", None, "0")
        v, w = src.get("v"), src.get("w")
        if v is None or w is None:
            raise JobError("conditions mode needs both v and w")
        if case == "hyperbolic":
            sysc = verify.CandidateSystem.hyperbolic(n, v, w, job.expr("h"), V, W)
        elif case == "parabolic":
            sysc = verify.CandidateSystem.parabolic(n, v, w, job.expr("lambda"), V, W)
        elif case in ("first-order", "first_order"):
            sysc = verify.CandidateSystem.first_order(n, v, w, V, W)
        else:
            raise JobError(f"unknown case {case!r} for conditions mode")
        rep = verify.check_conditions(sysc, points, tol, seed, _box(job))
    else:
        raise JobError(f"mode must be composed or conditions, got {mode!r}")
    summary, doc = report.residual_doc(rep)
    return rep.passed, summary, doc


def run_q_check(job: Job):
    if job.has("rank"):
        fam = _family(job)
    else:
        fam = solutions.make_rank0(as_list(job.raw("A")), job.raw("B", "0"),
                                   as_list(job.raw("C")), job.raw("D", "0"))
    audit = verify.audit_q_signs(fam, job.int("points", 64), job.float("tol", 1e-10),
                                 job.int("seed", DEFAULT_SEED), _box(job))
    summary, doc = report.q_audit_doc(audit)
    return bool(audit.passing), summary, doc


RUNNERS = {
    "reduce": run_reduce,
    "classify": lambda job: run_reduce(job, classify_only=True),
    "compat": run_compat,
    "single-ansatz": run_single,
    "family": run_family,
    "verify": run_verify,
    "q-check": run_q_check,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavereduce", description="Reductions of box u = F(u).")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--job", help="job file with key: value lines")
        p.add_argument("--y")
        p.add_argument("--z")
        p.add_argument("--n", type=int)
        p.add_argument("--F")
        p.add_argument("--points", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="any other job field")
        p.add_argument("--json", action="store_true", help="emit the document as JSON")
    return ap


def _collect(args) -> dict:
    fields = {}
    if args.job:
        try:
            fields = parse_job_text(Path(args.job).read_text())
        except OSError as e:
            raise JobError(f"cannot read job file: {e}") from None
    for key in ("y", "z", "n", "F", "points", "tol", "seed"):
        val = getattr(args, key)
        if val is not None:
            fields[key] = str(val)
    for item in args.set:
        if "=" not in item:
            raise JobError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        fields[k.strip()] = v.strip()
    return fields


def run(kind: str, fields: dict, as_json: bool = False) -> tuple[int, str]:
    """Run one job; returns (exit status, report text)."""
    try:
        job = Job(fields)
        declared = fields.get("job")
        job.used.add("job")
        if declared is not None and declared != kind:
            raise JobError(f"job file is for {declared!r}, not {kind!r}")
        ok, summary, doc = RUNNERS[kind](job)
        unknown = sorted(set(fields) - job.used)
        if unknown:
            raise JobError(f"unknown field(s) for {kind}: {', '.join(unknown)}")
    except ParseError as e:
        return EXIT_USAGE, f"error: parse error: {e}\n"
    except MATH_FAILURES as e:
        return EXIT_FAIL, f"error: {e}\n"
    except (JobError, ExprError, ValueError) as e:
        return EXIT_USAGE, f"error: {e}\n"
    return (EXIT_PASS if ok else EXIT_FAIL), report.render(summary, {"job": kind, **doc}, as_json)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    try:
        fields = _collect(args)
    except JobError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    status, text = run(args.command, fields, args.json)
    if text.startswith("error:"):
        sys.stderr.write(text)
        return status
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
