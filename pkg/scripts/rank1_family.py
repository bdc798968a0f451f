"""Resolve the circle family v = x0 + cos(p) x1 + sin(p) x2 and check the null conditions."""
import argparse

from wavereduce.report import family_doc, render
from wavereduce.solutions import make_rank1
from wavereduce.verify import check_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    fam = make_rank1(("1", "cos(p)", "sin(p)"), "0", ("1", "-cos(s)", "-sin(s)"), "0")
    rep = check_family(fam, args.points, 1e-9, args.seed)
    print(render(*family_doc(fam, rep)), end="")


if __name__ == "__main__":
    main()
