import csv


def read_table(path):
    """All rows of a CSV file as dicts keyed by header."""
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
