"""Quarterly member segmentation and campaign targeting."""
import logging

from brackets import age_bracket, income_tier, points_bonus
from campaign import CampaignMailer, greeting
from io_utils import read_table
from report import segment_table, vip_entry
from spend import category_totals

logger = logging.getLogger(__name__)


def main():
    members = read_table("data/members.csv")
    counts = {}
    vips = []
    vip_count = 0
    mailer = CampaignMailer()
    logger.info("segmenting members")
    for m in members:
        bracket = age_bracket(int(m["birth_year"]))
        tier = income_tier(float(m["income"]))
        segment = bracket + "/" + tier
        counts[segment] = counts.get(segment, 0) + 1
        bonus = points_bonus(int(m["loyalty_points"]))
        logger.info("member %s -> %s (bonus %.2f)", m["member_id"], segment, bonus)
        if tier == "premium":
            vips.append(vip_entry(m["full_name"], m["zip_code"]))
            vip_count += 1
            logger.info(f"premium income {m['income']} for member born {m['birth_year']}")
        if m["opted_in"] == "yes":
            mailer.add(m["email"])
            logger.info(greeting(m["full_name"]) + ", your segment is " + segment)
        else:
            logger.log(logging.INFO, "member %s opted out", m["member_id"])
    logger.info("segment sizes:\n%s", segment_table(counts))
    logger.info("vip digest (%d):\n%s", vip_count, "\n".join(vips))
    logger.info("campaign preview: %s", mailer.preview())
    sent = mailer.send_all()
    category_totals()
    logger.info("sent {} campaign mails".format(sent))


if __name__ == "__main__":
    main()
