"""
Reward arithmetic.

Rewards are either exact rationals (``fractions.Fraction``) or binary floats
compared with a relative tolerance. A ``RewardField`` bundles conversion,
comparison and formatting for one of the two instantiations so the solvers can
stay agnostic of the mode they run in.
"""

from fractions import Fraction
from typing import Optional, Union

from app.core.exceptions import DmdpError
from app.core.settings import settings

Reward = Union[Fraction, float]

EXACT_MODE = "exact"
FLOAT_MODE = "float"


class RewardField:
    """Conversion and comparison rules for reward scalars."""

    def __init__(self, exact: bool = True, epsilon: Optional[float] = None):
        self.exact = exact
        self.epsilon = settings.FLOAT_EPSILON if epsilon is None else epsilon

    @property
    def name(self) -> str:
        return EXACT_MODE if self.exact else FLOAT_MODE

    def __repr__(self) -> str:
        if self.exact:
            return "RewardField(exact)"
        return f"RewardField(float, epsilon={self.epsilon})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RewardField):
            return NotImplemented
        return self.exact == other.exact and (self.exact or self.epsilon == other.epsilon)

    def __hash__(self) -> int:
        return hash((self.exact, None if self.exact else self.epsilon))

    def convert(self, value: Union[str, int, float, Fraction]) -> Reward:
        """Convert an int, Fraction, float or a decimal / ``a/b`` string."""
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise DmdpError(f"Invalid reward literal '{value}': {e}") from e
        if self.exact:
            return Fraction(value)
        return float(value)

    def ratio(self, numerator: int, denominator: int) -> Reward:
        if self.exact:
            return Fraction(numerator, denominator)
        return numerator / denominator

    @property
    def zero(self) -> Reward:
        return Fraction(0) if self.exact else 0.0

    def mean(self, total: Reward, length: int) -> Reward:
        if self.exact:
            return Fraction(total) / length
        return total / length

    def eq(self, a: Reward, b: Reward) -> bool:
        if self.exact:
            return a == b
        return abs(a - b) <= self.epsilon * max(1.0, abs(a), abs(b))

    def gt(self, a: Reward, b: Reward) -> bool:
        """Strictly greater; in float mode only beyond the tolerance."""
        if self.exact:
            return a > b
        return a > b and not self.eq(a, b)

    def lt(self, a: Reward, b: Reward) -> bool:
        return self.gt(b, a)

    def ge(self, a: Reward, b: Reward) -> bool:
        return not self.lt(a, b)

    def format(self, value: Reward) -> str:
        """Text form used by the edge-list format: ``a/b`` in exact mode."""
        if self.exact:
            return str(Fraction(value))
        return repr(float(value))


EXACT = RewardField(exact=True)


def field_for_mode(mode: Optional[str] = None, epsilon: Optional[float] = None) -> RewardField:
    """
    Resolve a mode name into a reward field.

    Args:
        mode: "exact" or "float"; None uses settings.DEFAULT_MODE
        epsilon: Relative tolerance for float mode (default: settings.FLOAT_EPSILON)

    Returns:
        The matching RewardField
    """
    mode = (mode or settings.DEFAULT_MODE).strip().lower()
    if mode == EXACT_MODE:
        return EXACT
    if mode == FLOAT_MODE:
        return RewardField(exact=False, epsilon=epsilon)
    raise DmdpError(f"Unknown arithmetic mode '{mode}' (expected 'exact' or 'float')")


def as_decimal(value: Reward, digits: int = 12) -> str:
    """Decimal rendering of a reward for human-readable output."""
    return f"{float(value):.{digits}g}"
