"""Regenerate corpus data, logs and gold labels.

The data tables come from a seeded generator. The log is produced by running
the project with the real interpreter, and the gold labels by running it under
the taint-tracking oracle; the two runs must print the same lines.
"""
from __future__ import annotations

import csv
import logging
import random

from ..annotations import RuleKind, load_annotations
from ..evaluation import GoldLabel, save_gold
from ..oracle import OracleError, run_native, run_oracle
from ..redactor import rule_for
from ..tracer import EXACT, Finding
from . import CorpusApp, corpus_apps

logger = logging.getLogger(__name__)

FIRST = ["Maria", "Ken", "Aisha", "Lars", "Priya", "Tomas", "Wen", "Olga", "Diego", "Fatima", "Jonas", "Mei",
         "Samir", "Ingrid", "Kofi", "Lucia", "Arjun", "Nadia", "Pavel", "Yuki"]
LAST = ["Lopez", "Sato", "Okafor", "Berg", "Nair", "Novak", "Zhang", "Petrova", "Ramos", "Haddad", "Keller",
        "Lin", "Aziz", "Dahl", "Mensah", "Ferri", "Rao", "Karimi", "Ivanov", "Mori"]
CITIES = ["Oslo", "Lagos", "Porto", "Osaka", "Quito", "Tartu", "Perth", "Leeds", "Turin", "Hanoi"]
NOTES = ["billing mismatch on last invoice", "asked to downgrade", "router keeps dropping",
         "wants a loyalty discount", "threatened to cancel", "address change requested"]


def _person(rng):
    return f"{rng.choice(FIRST)} {rng.choice(LAST)}"


def _email(rng, name):
    first, last = name.lower().split()
    return f"{first}.{last}{rng.randint(1, 99)}@{rng.choice(['mail.com', 'post.net', 'inbox.org'])}"


def _phone(rng):
    return f"555-{rng.randint(100, 999)}-{rng.randint(1000, 9999)}"


def churn_tables(rng) -> dict[str, list[dict]]:
    customers = []
    for i in range(70):
        name = _person(rng)
        customers.append({
            "customer_id": f"C{1000 + i}",
            "name": name,
            "email": _email(rng, name),
            "phone": _phone(rng),
            "national_id": f"{rng.randint(100, 999)}-{rng.randint(10, 99)}-{rng.randint(1000, 9999)}",
            "plan": rng.choice(["basic", "plus", "family", "pro"]),
            "tenure_months": str(rng.randint(1, 60)),
            "monthly_spend": f"{rng.uniform(15, 120):.2f}",
            "city": rng.choice(CITIES),
        })
    tickets = []
    for i in range(45):
        note = rng.choice(NOTES)
        if i % 9 == 4:
            note += "\nfollow-up: " + rng.choice(NOTES)
        tickets.append({
            "ticket_id": f"T{500 + i}",
            "customer_id": rng.choice(customers)["customer_id"],
            "agent": _person(rng),
            "channel": rng.choice(["phone", "chat", "email"]),
            "status": rng.choice(["open", "closed", "closed"]),
            "note": note,
        })
    return {"customers": customers, "tickets": tickets}


def segmentation_tables(rng) -> dict[str, list[dict]]:
    members = []
    for i in range(80):
        name = _person(rng)
        members.append({
            "member_id": f"M{20000 + i * 7}",
            "full_name": name,
            "email": _email(rng, name),
            "birth_year": str(rng.randint(1950, 2004)),
            "zip_code": f"{rng.randint(10000, 99999)}",
            "income": str(rng.choice([rng.randint(22000, 54000), rng.randint(55000, 119000),
                                      rng.randint(120000, 260000)])),
            "loyalty_points": str(rng.randint(0, 9000)),
            "opted_in": rng.choice(["yes", "no"]),
        })
    purchases = []
    for i in range(60):
        purchases.append({
            "order_id": f"O{7000 + i}",
            "member_id": rng.choice(members)["member_id"],
            "category": rng.choice(["garden", "kitchen", "books", "outdoor", "toys"]),
            "amount": f"{rng.uniform(5, 400):.2f}",
            "status": rng.choice(["paid"] * 5 + ["declined"]),
            "card_number": " ".join(f"{rng.randint(1000, 9999)}" for _ in range(4)),
        })
    return {"members": members, "purchases": purchases}


def fraud_tables(rng) -> dict[str, list[dict]]:
    accounts = []
    for i in range(40):
        accounts.append({
            "account_id": f"AC-{rng.randint(100000, 999999)}",
            "holder_name": _person(rng),
            "ssn": f"{rng.randint(100, 899)}-{rng.randint(10, 99)}-{rng.randint(1000, 9999)}",
            "risk_tier": rng.choice(["low", "low", "medium", "high"]),
            "daily_limit": str(rng.choice([500, 1000, 2500, 5000])),
        })
    txns = []
    for i in range(150):
        acct = rng.choice(accounts)
        amount = f"{rng.choice([rng.uniform(3, 200), rng.uniform(200, 2500)]):.2f}"
        if i % 37 == 11:
            amount = amount.replace(".", ",")
        txns.append({
            "txn_id": f"TX{90000 + i}",
            "account_id": acct["account_id"],
            "card_number": "".join(str(rng.randint(0, 9)) for _ in range(16)),
            "merchant": rng.choice(["QuickGift", "CoinBarn", "GreenGrocer", "RailPass", "BookNook", "FuelStop"]),
            "amount": amount,
            "ip_address": f"{rng.randint(11, 223)}.{rng.randint(0, 255)}.{rng.randint(0, 255)}.{rng.randint(1, 254)}",
            "device_id": f"dev-{rng.getrandbits(32):08x}",
            "country": rng.choice(["DE", "FR", "NL", "XK", "NG", "ES", "PL"]),
        })
    reasons = ["chargeback ring", "synthetic identity", "mule activity", "court order"]
    watchlist = [{"account_id": a["account_id"], "reason": rng.choice(reasons)} for a in rng.sample(accounts, 6)]
    return {"accounts": accounts, "transactions": txns, "watchlist": watchlist}


GENERATORS = {"churn": (churn_tables, 11), "segmentation": (segmentation_tables, 23), "fraud": (fraud_tables, 37)}


def write_tables(app: CorpusApp) -> None:
    make, seed = GENERATORS[app.name]
    tables = make(random.Random(seed))
    (app.directory / "data").mkdir(exist_ok=True)
    for name, rows in tables.items():
        with open(app.directory / "data" / f"{name}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, list(rows[0]))
            w.writeheader()
            w.writerows(rows)


def gold_labels(app: CorpusApp, run) -> list[GoldLabel]:
    specs = load_annotations(app.annotations_path)
    labels = []
    for line_no, flows in sorted(run.flows_by_line().items()):
        slots = sorted((slot, sid, attr) for slot, sid, attr in flows
                       if rule_for(Finding(sid, attr, EXACT), specs).kind != RuleKind.KEEP)
        if slots:
            labels.append(GoldLabel(line_no, tuple(slots)))
    return labels


def build_app(app: CorpusApp) -> int:
    write_tables(app)
    specs = load_annotations(app.annotations_path)
    native = run_native(app.project, app.entry, data_root=app.directory)
    run = run_oracle(app.project, app.entry, specs, data_root=app.directory)
    if native != run.lines:
        for i, (a, b) in enumerate(zip(native, run.lines), start=1):
            if a != b:
                raise OracleError(f"{app.name}: native and oracle logs differ at line {i}: {a!r} vs {b!r}")
        raise OracleError(f"{app.name}: native log has {len(native)} lines, oracle {len(run.lines)}")
    app.log_path.write_text("".join(line + "\n" for line in native), encoding="utf-8")
    save_gold(app.gold_path, gold_labels(app, run))
    return len(native)


def main(names=None) -> None:
    for app in corpus_apps():
        if names and app.name not in names:
            continue
        if app.name not in GENERATORS:
            continue
        n = build_app(app)
        print(f"{app.name}: {n} log lines")
