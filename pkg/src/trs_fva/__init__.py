"""Total return swap pricing with funding, repo and tax effects."""
from .curves import CurveSet, YieldCurve
from .market import DividendSchedule, HedgeSpec, MarketSnapshot, Strategy, TaxRegime
from .trs import Direction, NotionalMode, TRSContract, par_spread, trs_legs, trs_value

__all__ = [
    "CurveSet",
    "Direction",
    "DividendSchedule",
    "HedgeSpec",
    "MarketSnapshot",
    "NotionalMode",
    "Strategy",
    "TRSContract",
    "TaxRegime",
    "YieldCurve",
    "par_spread",
    "trs_legs",
    "trs_value",
]

__version__ = "0.1.0"
