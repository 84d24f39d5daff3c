"""Batch fraud screening over one day of card transactions."""
import logging

from accounts import review_accounts
from alerts import AlertBook, fingerprint
from io_utils import read_table
from rules import default_rules
from watch import on_watchlist, watch_digest, watch_reasons

logger = logging.getLogger(__name__)

ALERT_SCORE = 0.5


def main():
    currency = "EUR"

    def money(value):
        return f"{value:.2f} {currency}"

    rules = default_rules()
    book = AlertBook()
    largest = 0.0
    bad_rows = 0
    screened = 0
    for t in read_table("data/transactions.csv"):
        try:
            amount = float(t["amount"])
        except ValueError:
            bad_rows += 1
            logger.error("unparseable amount %r in %s", t["amount"], t["txn_id"])
            continue
        screened += 1
        score = 0.0
        for rule in rules:
            score += rule.score(t)
        logger.info("txn %s merchant=%s country=%s score=%.2f", t["txn_id"], t["merchant"], t["country"], score)
        if amount > largest:
            largest = amount
        if score >= ALERT_SCORE:
            book.raise_alert(t["account_id"])
            logger.warning("card %s used from ip %s", t["card_number"], t["ip_address"])
            logger.info("device fingerprint {}".format(fingerprint(t["device_id"], t["ip_address"])))
            if on_watchlist(t["account_id"]):
                logger.warning("watchlisted account %s moved %.2f", t["account_id"], amount)
    logger.info("screened %d transactions, skipped %d", screened, bad_rows)
    logger.info("largest transfer " + money(largest))
    logger.info("alerts:\n%s", book.report())
    logger.info("watchlist: %s", watch_digest())
    watch_reasons()
    flagged = review_accounts()
    logger.info("{} accounts need manual review".format(flagged))


if __name__ == "__main__":
    main()
