"""Measure how the Fock-space oracle disagrees with the closed-form energies.

Prints the Re<H1>/E1 ratio range, the best-fit a2 for the norm and cross
terms, and the residual of the assembled energy against B(t).

    python3 scripts/audit_tensions.py --dim 64
"""

import argparse
from dataclasses import dataclass

import numpy as np

from infobounds.nonlocal_model import fit_a2, oracle_energy_audit


@dataclass(frozen=True)
class AuditRun:
    alphas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5)
    t_points: int = 33
    eta: float = 0.01
    dim: int = 64


def run(cfg: AuditRun):
    ts = np.linspace(0, np.pi, cfg.t_points)
    return [oracle_energy_audit(float(t), a, cfg.eta, 1.0, cfg.dim) for a in cfg.alphas for t in ts]


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=AuditRun.dim)
    p.add_argument("--eta", type=float, default=AuditRun.eta)
    p.add_argument("--t-points", type=int, default=AuditRun.t_points)
    a = p.parse_args()
    cfg = AuditRun(eta=a.eta, dim=a.dim, t_points=a.t_points)
    records = run(cfg)
    good = [r for r in records if not r.flag]
    print(f"{len(records)} grid points, {len(records) - len(good)} flagged for truncation")
    ratios = np.array([r.ratio_ReH1_E1 for r in good])
    print(f"Re<H1>/E1: min {ratios.min():.12f}  max {ratios.max():.12f}")
    for target in ("norm", "cross"):
        fit = fit_a2(good, target)
        print(f"best-fit a2 [{target:5}] = {fit.a2:+.4f}  rms {fit.rms:.4g}  (rms at a2 = 1: {fit.rms_at_unit_a2:.4g})")
    print("per-alpha max |B residual| at a2 = 1:")
    for alpha in cfg.alphas:
        res = [abs(r.B_residual) for r in good if r.alpha == alpha]
        print(f"  alpha {alpha:4.2f}: {max(res):.4g}")


if __name__ == "__main__":
    main()
