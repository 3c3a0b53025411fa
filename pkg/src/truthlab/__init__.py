"""Verification laboratory for truthful auctions with online supply."""
from .core import (BOTH, EMPTY, ITEM1, ITEM2, Allocation, Bundle, ConfigurationError, Grid,
                   InfeasibleOutcome, Outcome, Scenario, Valuation, offline_opt, rational, run,
                   utility, welfare)
from .mechanisms import (BrRule, Coin, Kind, MechanismSpec, Threshold, ThresholdTables,
                         TiePolicy, catalog)

__version__ = "0.1.0"
