import logging

from io_utils import read_table

logger = logging.getLogger(__name__)

WATCHED = [row["account_id"] for row in read_table("data/watchlist.csv")]


def on_watchlist(account_id):
    return account_id in WATCHED


def watch_reasons():
    for row in read_table("data/watchlist.csv"):
        logger.info("watch entry reason: %s", row["reason"])


def watch_digest():
    return ", ".join(WATCHED)
