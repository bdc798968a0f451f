"""Reduce box u = F(u) under the radial ansatz (y, z) = (t, |x|) and check a solution."""
from wavereduce.exprcore import ZERO, parse, simplify
from wavereduce.reduction import AnsatzPair, assemble_reduced, compute_conditions
from wavereduce.report import render, reduction_doc
from wavereduce.verify import ComposedSolution, check_composed


def main():
    pair = AnsatzPair.from_text("x0", "sqrt(x1^2 + x2^2)", 2)
    rs = compute_conditions(pair)
    pde = assemble_reduced(rs, parse("0"))
    print(render(*reduction_doc(rs, pde)))

    # phi = y solves the homogeneous reduced equation
    cs = ComposedSolution(2, {"y": pair.y, "z": pair.z}, simplify(parse("y")), ZERO)
    rep = check_composed(cs, 64, tol=1e-10)
    print(f"phi = y: {'PASS' if rep.passed else 'FAIL'} max={rep.max_residual:.3e}")


if __name__ == "__main__":
    main()
