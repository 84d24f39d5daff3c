import logging

from io_utils import read_table

logger = logging.getLogger(__name__)


def category_totals():
    purchases = read_table("data/purchases.csv")
    totals = {}
    declined = 0
    for p in purchases:
        if p["status"] == "declined":
            declined += 1
            logger.warning("declined card %s on order %s", p["card_number"], p["order_id"])
            continue
        amount = float(p["amount"])
        cat = p["category"]
        totals[cat] = totals.get(cat, 0.0) + amount
        logger.info("order {} by member {} spent {} on {}".format(p["order_id"], p["member_id"], p["amount"], cat))
    for cat in sorted(totals):
        logger.info("category %-12s total %10.2f", cat, totals[cat])
    logger.info("%d purchases declined", declined)
    return totals
