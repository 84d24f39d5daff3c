import logging

logger = logging.getLogger(__name__)


class RetentionQueue:
    """Customers to call back, in the order they were flagged."""

    def __init__(self, team):
        self.team = team
        self.names = []

    def enqueue(self, name):
        self.names.append(name)
        logger.info("queued %s for a callback", name)

    def summary(self):
        lines = ["retention calls for " + self.team]
        for name in self.names:
            lines.append("  - " + name)
        return "\n".join(lines)


def contact_hint(phone):
    digits = phone.replace("-", "")
    return "call " + digits
