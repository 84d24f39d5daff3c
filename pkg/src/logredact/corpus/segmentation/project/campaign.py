import logging

logger = logging.getLogger(__name__)

CAMPAIGN = "spring-offer"


class CampaignMailer:
    def __init__(self):
        self.recipients = []

    def add(self, address):
        self.recipients.append(address)

    def preview(self):
        return "; ".join(self.recipients[:3])

    def send_all(self):
        sent = 0
        for address in self.recipients:
            logger.info("sending %s to %s", CAMPAIGN, address)
            sent += 1
        return sent


def greeting(name):
    first = name.split(" ")[0]
    return "Dear " + first
