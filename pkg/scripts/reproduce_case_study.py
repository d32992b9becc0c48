"""Run the bundled case study end to end and print the headline numbers."""

from __future__ import annotations

import argparse

from artifact import case_study_path, load_case_study, run_pipeline, verify_report
from artifact.config import load_config


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(case_study_path("case_study.conf")))
    args = parser.parse_args()

    cfg = load_config(args.config).pipeline_config()
    report = run_pipeline(load_case_study(), cfg)
    stats, sel = report.stats, report.selection
    print("per-sensor means :", " ".join(f"{v:.3f}" for v in stats.per_sensor_mean))
    print("per-sensor stds  :", " ".join(f"{v:.4f}" for v in stats.per_sensor_std))
    print(f"true value       : {stats.true_value:.4f}   system std: {stats.system_std:.5f}")
    print("degree errors    :", ", ".join(f"{d}: {e:.4f}" for d, e in sorted(sel.total_error_by_degree.items())))
    print("model            :", " + ".join(f"{c:.6g}*x^{p}" for p, c in enumerate(sel.model.coefficients)))
    if report.calibration is not None:
        for step in report.calibration.steps:
            print(f"  h={step.h:<8g} n={step.n:<4d} K={step.amplification:.5f}  S={step.std:.7f}")
    print(f"status           : {report.status}")
    if report.ok:
        plan = report.transmission
        print(f"chosen h         : {report.chosen_h}")
        print(f"passes           : {plan.m}   per-pass k: {plan.k:.5f}   K_total: {plan.total_gain:.5f}")
        print("final values     :", " ".join(f"{v:.3f}" for v in plan.final_values))
        print(f"post deviation   : {report.post_std:.7f}")
        summary = verify_report(report, cfg)
        print("verification     :", "pass" if summary.passed else "FAIL")
    else:
        print(f"failed at {report.failed_stage}: {report.message}")


if __name__ == "__main__":
    main()
