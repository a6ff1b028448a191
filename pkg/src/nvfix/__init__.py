"""Nielsen fixed point theory for n-valued maps of surfaces."""

__version__ = "0.1.0"
