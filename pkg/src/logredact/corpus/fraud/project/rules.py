HIGH_RISK_COUNTRIES = ("XK", "NG", "KP")


class Rule:
    weight = 0.0

    def score(self, txn):
        return 0.0


class AmountRule(Rule):
    def __init__(self, limit):
        self.limit = limit

    def score(self, txn):
        if float(txn["amount"]) > self.limit:
            return 0.5
        return 0.0


class CountryRule(Rule):
    def score(self, txn):
        if txn["country"] in HIGH_RISK_COUNTRIES:
            return 0.4
        return 0.0


class NightMerchantRule(Rule):
    """Merchants that mostly see card-testing traffic."""

    def __init__(self, merchants):
        self.merchants = merchants

    def score(self, txn):
        for m in self.merchants:
            if txn["merchant"] == m:
                return 0.3
        return 0.0


def default_rules():
    return [AmountRule(900.0), CountryRule(), NightMerchantRule(["QuickGift", "CoinBarn"])]
