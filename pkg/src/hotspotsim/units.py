"""Exact unit handling.

All internal computation is integer fixed point:

    time    microseconds (us)
    power   microwatts (uW)
    energy  picojoules (pJ); 1 uW held for 1 us is exactly 1 pJ

Reports convert to milliwatts and millijoules at the edges, so every
energy identity in the simulator can be checked with zero tolerance.
"""
from __future__ import annotations

from decimal import Decimal, InvalidOperation
from fractions import Fraction

US_PER_MS = 1_000
US_PER_S = 1_000_000
UW_PER_MW = 1_000
PJ_PER_MJ = 1_000_000_000

TIME_SCALES = {"us": 1, "ms": US_PER_MS, "s": US_PER_S}


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def parse_scaled(value, scale: int, what: str) -> int:
    """Parse a config number into an integer count of 1/scale units.

    Accepts int, float, str or Decimal. Rejects values that do not land
    exactly on the unit grid (e.g. 0.0001 mW when the grid is 1 uW).
    """
    try:
        dec = Decimal(str(value))
    except (InvalidOperation, ValueError) as exc:
        raise ValueError(f"{what}: not a number: {value!r}") from exc
    scaled = dec * scale
    if scaled != scaled.to_integral_value():
        raise ValueError(f"{what}: {value!r} is finer than the 1/{scale} unit grid")
    return int(scaled)


def parse_mw_to_uw(value, what: str = "power_mw") -> int:
    return parse_scaled(value, UW_PER_MW, what)


def parse_mj_to_pj(value, what: str = "energy_mj") -> int:
    return parse_scaled(value, PJ_PER_MJ, what)


def parse_time_us(value, unit: str, what: str) -> int:
    return parse_scaled(value, TIME_SCALES[unit], what)


def format_mj(pj: int) -> str:
    """Exact decimal millijoules for an integer picojoule count."""
    sign = "-" if pj < 0 else ""
    whole, frac = divmod(abs(pj), PJ_PER_MJ)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}." + f"{frac:09d}".rstrip("0")


def format_mw(uw: int) -> str:
    """Exact decimal milliwatts for an integer microwatt count."""
    sign = "-" if uw < 0 else ""
    whole, frac = divmod(abs(uw), UW_PER_MW)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}." + f"{frac:03d}".rstrip("0")


def format_fraction(value: Fraction, places: int = 6) -> str:
    """Fixed-point rendering of a Fraction, round half to even."""
    q = 10**places
    sign = "-" if value < 0 else ""
    n = abs(value.numerator) * q
    d = value.denominator
    quo, rem = divmod(n, d)
    twice = 2 * rem
    if twice > d or (twice == d and quo % 2 == 1):
        quo += 1
    whole, frac = divmod(quo, q)
    return f"{sign}{whole}.{frac:0{places}d}"
