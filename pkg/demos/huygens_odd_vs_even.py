"""Leakage inside the backward cone on S^5 (odd) and SU(3) (even).

Run with ``python demos/huygens_odd_vs_even.py``; the SU(3) part takes about a minute.
"""
from hkwave import CauchyProblem, build_space, huygens_report, trajectory


def report(name, steps, t_max=None):
    pr = CauchyProblem.standard(build_space(name), 0.2, t_max=t_max, t_steps=steps)
    rep = huygens_report(trajectory(pr, "series"))
    print(f"{name}: dim {rep['dim']}, max L_cone {max(rep['L_cone']):.2e}, "
          f"max L_shell {max(rep['L_shell']):.2e}")
    for t, ls in zip(rep["t"], rep["L_shell"]):
        print(f"  t={t:.3f}  L_shell={ls:.2e}")


if __name__ == "__main__":
    report("s5", 12, 0.6)
    report("su3", 4)
