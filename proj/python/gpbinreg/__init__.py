"""Gaussian process binary regression with a verification laboratory.

The compiled core exposes the sampler, the posterior chain (`fit`), dataset
simulation, and the verification campaigns. Campaign configs and reports cross
the boundary as JSON; the helpers below translate to plain dicts.
"""

import json as _json

from ._core import (  # noqa: F401
    bernstein,
    fit,
    gp_sample,
    kernel_value,
    known_campaigns,
    link_forward,
    link_inverse,
    rkhs_evaluate,
    rkhs_norm_sq,
    simulate,
    version,
)
from ._core import campaign_defaults as _campaign_defaults_json
from ._core import run_acceptance as _run_acceptance
from ._core import run_campaign as _run_campaign_json

__all__ = [
    "bernstein",
    "campaign",
    "campaign_defaults",
    "fit",
    "gp_sample",
    "kernel_value",
    "known_campaigns",
    "link_forward",
    "link_inverse",
    "rkhs_evaluate",
    "rkhs_norm_sq",
    "run_acceptance",
    "simulate",
    "version",
]


def campaign_defaults(campaign_id):
    """Default configuration of a verification campaign, as a dict."""
    return _json.loads(_campaign_defaults_json(campaign_id))


def campaign(campaign_id, **overrides):
    """Run one verification campaign and return its report as a dict.

    Keyword overrides are merged over the campaign defaults, e.g.
    ``campaign("spacing", replicates=20, params={"n": 500})``.
    """
    config = {"campaign": campaign_id}
    config.update(overrides)
    return _json.loads(_run_campaign_json(_json.dumps(config)))


def run_acceptance(seed=20260816, out_dir="acceptance-out", jobs=1):
    """Run every campaign and evaluate the acceptance criteria.

    Returns (criteria, log): a list of per-criterion dicts and the campaign log.
    """
    return _run_acceptance(seed, out_dir, jobs)
