AGE_BRACKETS = [(25, "young"), (40, "adult"), (60, "midlife")]
REFERENCE_YEAR = 2024


def age_bracket(birth_year):
    age = REFERENCE_YEAR - birth_year
    for limit, label in AGE_BRACKETS:
        if age < limit:
            return label
    return "senior"


def income_tier(income):
    if income >= 120000:
        return "premium"
    if income >= 55000:
        return "standard"
    return "value"


def points_bonus(points):
    """Loyalty multiplier; capped so old accounts don't dominate."""
    return min(1.0 + points / 10000.0, 1.5)
