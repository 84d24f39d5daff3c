import logging

from io_utils import read_table

logger = logging.getLogger(__name__)


def review_tickets():
    tickets = read_table("data/tickets.csv")
    open_count = 0
    by_channel = {}
    for t in tickets:
        channel = t["channel"]
        by_channel[channel] = by_channel.get(channel, 0) + 1
        logger.info("ticket %s via %s handled by %s", t["ticket_id"], channel, t["agent"])
        if t["status"] == "open":
            open_count += 1
            logger.warning(f"open ticket {t['ticket_id']} note: {t['note']}")
        else:
            logger.info("closed ticket for customer {}".format(t["customer_id"]))
    for channel in sorted(by_channel):
        logger.info("channel %s carried %d tickets", channel, by_channel[channel])
    return open_count


def open_tickets_for(customer_id, tickets):
    n = 0
    for t in tickets:
        if t["customer_id"] == customer_id and t["status"] == "open":
            n += 1
    return n
