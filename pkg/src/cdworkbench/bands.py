"""Mastery interpretation bands shared by explanations and analytics."""

WEAK_BELOW = 0.4
STRONG_AT = 0.7

WEAK = "weak"
PARTIAL = "partial"
STRONG = "strong"


def mastery_band(value: float) -> str:
    if value < WEAK_BELOW:
        return WEAK
    if value < STRONG_AT:
        return PARTIAL
    return STRONG
