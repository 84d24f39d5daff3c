import logging

logger = logging.getLogger(__name__)

SPEND_BANDS = ((80.0, "high"), (40.0, "mid"))


def tenure_score(row):
    months = int(row["tenure_months"])
    score = min(months / 48.0, 1.0)
    logger.debug("tenure %d -> %.3f", months, score)
    return round(score, 3)


def spend_band(spend):
    for floor, label in SPEND_BANDS:
        if spend >= floor:
            return label
    return "low"


def churn_risk(score, band, open_tickets):
    # short tenure and cheap plans churn first
    risk = 1.0 - score
    if band == "low":
        risk += 0.15
    risk += 0.1 * open_tickets
    return min(round(risk, 2), 1.0)
