"""Compare the series, reduction and contour solutions on S^3."""
import numpy as np

from hkwave import (CauchyProblem, build_space, solve_contour, solve_reduction,
                    solve_series)

pr = CauchyProblem.standard(build_space("s3"), 0.2, t_max=0.6, t_steps=6)
for t in pr.time_grid[1:]:
    a = solve_series(pr, t).values
    b = solve_reduction(pr, t).values
    c = solve_contour(pr, t, gamma=2.0).values
    peak = np.max(np.abs(a))
    print(f"t={t:.2f}  |series-reduction|={np.max(np.abs(a - b)) / peak:.1e}  "
          f"|series-contour|={np.max(np.abs(a - c)) / peak:.1e}")
