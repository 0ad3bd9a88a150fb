"""Fixed tables that make code construction reproducible bit-for-bit."""

# Minimal-weight primitive polynomials over GF(2), bit i = coefficient of x^i.
PRIMITIVE_POLYS = {
    3: 0b1011,        # x^3 + x + 1
    4: 0b10011,       # x^4 + x + 1
    5: 0b100101,      # x^5 + x^2 + 1
    6: 0b1000011,     # x^6 + x + 1
    7: 0b10001001,    # x^7 + x^3 + 1
}

# Registry: name -> (family, n, k, t, dmin used for skipping thresholds).
# bch-63-45 carries the label distance 14; its designed distance is 7.
CODE_REGISTRY = {
    "bch-31-16": ("bch", 31, 16, 3, 7),
    "bch-63-45": ("bch", 63, 45, 3, 14),
    "ebch-64-57": ("extended-bch", 64, 57, 1, 4),
    "ebch-128-64": ("extended-bch", 128, 64, 10, 22),
}

SEGMENT_FRACTION = 0.35
