import hashlib
import logging


class AlertBook:
    def __init__(self):
        self.log = logging.getLogger("alerts")
        self.accounts = []

    def raise_alert(self, account_id):
        self.accounts.append(account_id)
        self.log.info("alert raised for account %s", account_id)

    def report(self):
        lines = ["alert " + a for a in self.accounts]
        return "\n".join(lines)


def fingerprint(device_id, ip_address):
    raw = (device_id + "@" + ip_address).encode("utf-8")
    return hashlib.sha1(raw).hexdigest()[:10]
