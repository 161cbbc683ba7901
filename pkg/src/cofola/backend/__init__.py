from .core import naive_wfomc, wfomc

__all__ = ["wfomc", "naive_wfomc"]
