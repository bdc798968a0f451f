"""Annihilation verdicts for Phi = v^k in the parabolic construction, k = 0..n+2."""
import sys

from wavereduce.compat import CompatSpec, build


def main(n=3):
    for k in range(n + 3):
        r = build(CompatSpec.from_text(n, "parabolic", 1, ["0"] * k + ["1"]))
        wit = r.witness()
        extra = "" if not wit else "  " + ", ".join(f"{a} = {b}" for a, b in wit.items())
        print(f"n={n} k={k}  {'compatible' if r.compatible else 'incompatible'}{extra}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
