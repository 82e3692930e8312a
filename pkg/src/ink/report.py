"""Report rendering: delimited tables plus P@k curve figures.

The CSV mirrors the score report (one row per family x mask kind, one column
per k); figures plot P@k against k with one line per mask kind, one figure
per family, written next to the CSV.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from ink.probe import ScoreReport


def write_csv(report: ScoreReport, path: str | Path, predictor_id: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["predictor", "family", "mask_kind", "aggregation", "n"]
                        + [f"P@{k}" for k in report.ks])
        for row in report.rows:
            writer.writerow([predictor_id, row["family"], row["mask_kind"],
                             report.aggregation, row["n"]]
                            + [f"{row['p_at'][str(k)]:.2f}" for k in report.ks])
    return path


def write_json(report: ScoreReport, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def write_figures(report: ScoreReport, out_dir: str | Path,
                  predictor_id: str = "") -> list[Path]:
    """One P@k curve figure per family; returns the written paths."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    families = sorted({row["family"] for row in report.rows if row["family"] != "all"})
    written: list[Path] = []
    for family in families:
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        for row in report.rows:
            if row["family"] != family:
                continue
            ys = [row["p_at"][str(k)] for k in report.ks]
            ax.plot(report.ks, ys, marker="o", markersize=3,
                    label=f"{row['mask_kind']} (n={row['n']})")
        ax.set_xlabel("k")
        ax.set_ylabel("P@k (%)")
        ax.set_ylim(0, 100)
        title = f"{family} quizzes"
        if predictor_id:
            title += f" ({predictor_id})"
        ax.set_title(title)
        ax.legend(fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        target = out_dir / f"pk_{family}.png"
        fig.savefig(target, dpi=120)
        plt.close(fig)
        written.append(target)
    return written
