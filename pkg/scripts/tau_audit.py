"""Which sign convention for tau makes Q annihilate v and w on a rank-0 pair."""
import argparse

from wavereduce.report import report_render
from wavereduce.solutions import make_rank0
from wavereduce.verify import audit_q_signs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--A", default="1;1;0")
    ap.add_argument("--C", default="1;0;1")
    ap.add_argument("--points", type=int, default=64)
    args = ap.parse_args()
    fam = make_rank0(args.A.split(";"), "0", args.C.split(";"), "0")
    audit = audit_q_signs(fam, args.points, 1e-10)
    print(report_render(audit), end="")


if __name__ == "__main__":
    main()
