"""Monthly churn review: score customers, queue callbacks, audit tickets."""
import logging

from features import churn_risk, spend_band, tenure_score
from io_utils import read_table
from retention import RetentionQueue, contact_hint
from tickets import open_tickets_for, review_tickets

logger = logging.getLogger(__name__)

RISK_THRESHOLD = 0.6


def load_customers():
    return read_table("data/customers.csv")


def main():
    customers = load_customers()
    tickets = read_table("data/tickets.csv")
    queue = RetentionQueue("north")
    seen = 0
    flagged = 0
    logger.info("churn review started")
    for row in customers:
        seen += 1
        score = tenure_score(row)
        band = spend_band(float(row["monthly_spend"]))
        logger.info("customer %s on plan %s score=%.3f band=%s", row["customer_id"], row["plan"], score, band)
        if band == "high":
            logger.info("high spender %s in %s paying %s", row["name"], row["city"], row["monthly_spend"])
        if int(row["tenure_months"]) < 6:
            logger.warning("identity check pending for %s", row["national_id"])
        pending = open_tickets_for(row["customer_id"], tickets)
        risk = churn_risk(score, band, pending)
        if risk >= RISK_THRESHOLD:
            flagged += 1
            queue.enqueue(row["name"])
            logger.info("risk %.2f, %s before renewal", risk, contact_hint(row["phone"]))
            logger.info(f"reach {row['email']} within {2 + pending} days")
            if risk >= 0.95:
                logger.error("urgent: " + row["name"] + " may cancel today")
    logger.info("scored %d customers, %d at risk", seen, flagged)
    logger.info("retention queue has %d entries:\n%s", flagged, queue.summary())
    still_open = review_tickets()
    logger.info("review finished with {} open tickets".format(still_open))


if __name__ == "__main__":
    main()
