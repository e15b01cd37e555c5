"""Run a manufactured-solution refinement study and print the error table.

Example:
    python3 scripts/convergence_study.py --case separable-decay --n 4 --k 0.1 --levels 4
"""

import argparse
import math
import sys

from coupledwave import mesh, mms, scheme
from coupledwave.sparse_linalg import SolverConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", default="separable-decay",
                    choices=sorted(mms.case_names()))
    ap.add_argument("--n", type=int, default=4, help="base cells per side")
    ap.add_argument("--k", type=float, default=0.1, help="base time step")
    ap.add_argument("--T", type=float, default=0.5, help="final time")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--c", type=float, default=1.0)
    ap.add_argument("--eps-u", type=float, default=0.3)
    ap.add_argument("--eps-v", type=float, default=0.2)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--rel-tol", type=float, default=1e-12)
    args = ap.parse_args(argv)

    dim = mms.case_dimension(args.case)
    base = (mesh.generate_unit_square(args.n) if dim == 2
            else mesh.generate_unit_interval(args.n))
    params = scheme.SchemeParams.from_final_time(
        c=args.c, eps_u=args.eps_u, eps_v=args.eps_v,
        alpha=args.alpha, k=args.k, T=args.T,
    )
    report = mms.convergence_study(
        args.case, base, args.k, args.levels, params,
        config=SolverConfig(rel_tol=args.rel_tol),
    )

    print(f"{'level':>5} {'h':>12} {'k':>12} {'error':>14} {'order':>8}")
    for rec, order in zip(report.levels, report.local_orders()):
        order_s = "     -" if math.isnan(order) else f"{order:8.3f}"
        print(f"{rec.level:5d} {rec.h:12.6g} {rec.k:12.6g} {rec.error:14.6e} {order_s}")
    print(f"fitted order: {report.fitted_order:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
