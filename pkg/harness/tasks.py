import logging
from dataclasses import asdict

from celery import shared_task

from .runner import SweepConfig, trial_rows

logger = logging.getLogger('beamforming')


@shared_task(name='harness.run_trial')
def run_trial(config: dict, trial: int) -> list[dict]:
    """All rows of one sweep trial, as plain dicts."""
    cfg = SweepConfig.from_payload(config)
    rows = trial_rows(cfg, trial)
    logger.debug(f"Trial {trial} produced {len(rows)} rows")
    return [asdict(row) for row in rows]
