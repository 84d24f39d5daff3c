import logging

from io_utils import read_table

logger = logging.getLogger(__name__)


def review_accounts():
    high = 0
    for a in read_table("data/accounts.csv"):
        logger.info("account %s tier %s limit %s", a["account_id"], a["risk_tier"], a["daily_limit"])
        if a["risk_tier"] == "high":
            high += 1
            logger.warning("manual review: %s (ssn %s)", a["holder_name"], a["ssn"])
        elif a["risk_tier"] == "medium":
            logger.info(f"holder {a['holder_name']} stays on automatic review")
    return high
