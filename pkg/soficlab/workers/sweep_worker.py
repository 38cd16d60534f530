import logging

from soficlab.models.automaton import LocalRule
from soficlab.models.shift import Subshift

logger = logging.getLogger(__name__)


def decide_rule_job(subshift_dict: dict, rule_dict: dict) -> dict:
    """
    Process-pool entry point for one rule of a surjunctivity sweep.
    Arguments and result are plain dicts so they pickle cheaply.
    """
    from soficlab.services.cellular_automaton import decide_rule

    subshift = Subshift(**subshift_dict)
    rule = LocalRule(**rule_dict)
    try:
        verdict = decide_rule(rule, subshift)
    except Exception as e:
        logger.error(f"Error deciding rule {rule.rule_index} on {subshift.label()}: {str(e)}")
        raise
    return verdict.model_dump()
