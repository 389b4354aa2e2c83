"""
Base node class for AGLAB check nodes.
Provides seeded trial streams, trial fan-out and report assembly for all nodes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from engine.core import Box
from engine.report import Report
from utils.family_io import load_json
from utils.run_config import RunConfig

logger = logging.getLogger(__name__)


def trial_rng(seed, trial):
    """The stream of one trial: independent of how trials are scheduled."""
    return np.random.default_rng([seed, trial])


def _call_trial(job):
    fn, seed, trial, params = job
    return fn(trial_rng(seed, trial), params)


class AgLabNodeBase:
    """Base class for all AGLAB check nodes."""

    @classmethod
    def INPUT_TYPES(cls):
        """
        Define input types. Should be overridden by subclasses.
        """
        return {
            "required": {
                "m": ("INT", {"default": 3, "min": 2, "max": 64}),
                "n": ("INT", {"default": 2, "min": 1, "max": 16}),
            }
        }

    RETURN_TYPES = ("REPORT",)
    FUNCTION = "process"
    CATEGORY = "AGLAB/Core"
    CHECK = "check"

    def __init__(self, config=None):
        self.config = config if config is not None else RunConfig(subcommand=self.CHECK)

    @property
    def seed(self):
        return self.config.seed

    def box(self, m, n):
        return Box(m, n).require_public()

    def load_input(self, path):
        return load_json(path) if path else None

    def run_trials(self, trial_fn, trials, params=None):
        """
        Run `trial_fn(rng, params)` for each trial and return the results in trial order.

        trial_fn must be a module-level function so that it can be shipped to worker processes.
        """
        jobs = [(trial_fn, self.seed, k, params or {}) for k in range(trials)]
        workers = self.config.workers
        logger.debug("%s: %d trials on %d worker(s)", self.CHECK, trials, workers)
        if workers > 1 and trials > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_call_trial, jobs, chunksize=max(1, trials // (4 * workers))))
        return [_call_trial(job) for job in jobs]

    def summarize(self, check, params, reports, details=None):
        """
        Fold per-trial reports into one report.

        Args:
            reports: per-trial Reports (hypotheses-unmet ones are counted, not asserted)

        Returns:
            Report: passes iff no trial was violated; the first violation supplies the witness
        """
        violated = [r for r in reports if not r.passed]
        unmet = sum(1 for r in reports if r.status == "hypotheses-unmet")
        summary = dict(details or {})
        summary.update({"trials": len(reports), "violations": len(violated), "hypotheses_unmet": unmet})
        first = violated[0] if violated else None
        if first is not None:
            summary["first_violation"] = first.details
        status = None
        if reports and unmet == len(reports):
            status = "hypotheses-unmet"
        return Report.verdict(check, params, not violated, margin=len(violated),
                              witness=first.witness if first else None, details=summary, status=status)

    def process(self, **kwargs):
        """
        Main check function. Should be overridden by subclasses.

        Returns:
            tuple: (list of Reports,)
        """
        raise NotImplementedError("Subclasses must implement the process method")
