"""
Batch export of every figure preset.
Writes <preset>.csv (time series or sweep) and <preset>.json (report) into one directory.
"""

import logging
import sys
from pathlib import Path
from typing import Any

from app.core.config import settings
from app.core.errors import RelaxometerError
from app.core.logging import configure_logging
from app.services.scenarios import (
    FIGURE_PRESETS,
    build_config,
    report_document,
    run_scenario,
    run_sweep,
)

logger = logging.getLogger(__name__)


def export_preset(name: str, out_dir: Path, jobs: int) -> bool:
    """Write one preset's CSV and JSON; returns whether its relaxation converged."""
    preset = FIGURE_PRESETS[name]
    config = build_config(name)

    if preset.sweep is not None:
        axis, values = preset.sweep
        csv_text = run_sweep(config, axis, list(values), jobs=jobs)
        json_text, converged = report_document(config, (axis, list(values)), jobs=jobs)
    else:
        csv_text = run_scenario(config)
        json_text, converged = report_document(config)

    for suffix, text in ((".csv", csv_text), (".json", json_text)):
        with open(out_dir / f"{name}{suffix}", "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return converged


def run_figure_export(out_dir: str | Path = "out", jobs: int | None = None) -> dict[str, Any]:
    """Export all presets; a failing preset is logged and skipped."""
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    workers = jobs if jobs is not None else settings.jobs
    logger.info("📈 Exporting %d figure presets to %s", len(FIGURE_PRESETS), target)

    exported: list[str] = []
    failed: list[str] = []
    not_converged: list[str] = []
    for name in FIGURE_PRESETS:
        try:
            if not export_preset(name, target, workers):
                not_converged.append(name)
            exported.append(name)
            logger.info("   ✅ %s", name)
        except RelaxometerError as e:
            logger.error("   ❌ %s: %s", name, e)
            failed.append(name)

    logger.info("Export complete: %d/%d", len(exported), len(FIGURE_PRESETS))
    if not_converged:
        logger.warning("   Not relaxed within the grid: %s", ", ".join(not_converged))
    if failed:
        logger.warning("   Failed presets: %s", ", ".join(failed))

    return {
        "exported": exported,
        "failed": failed,
        "not_converged": not_converged,
        "total": len(FIGURE_PRESETS),
    }


if __name__ == "__main__":
    configure_logging(settings.log_level)
    summary = run_figure_export(sys.argv[1] if len(sys.argv) > 1 else "out")
    sys.exit(1 if summary["failed"] else 0)
