"""spinlab: phase-portrait analytics and desk-scale Langevin experiments for
spherical pure p-spin landscapes.

Submodules are imported lazily so the CLI can configure threading before any
numerics load:

    spinlab.landscape   closed-form / root-finding analytics
    spinlab.simulate    coupling fields, Langevin dynamics, Monte Carlo
    spinlab.cli         batch command-line surface
"""
import importlib

__version__ = "0.1.0"

_SUBMODULES = ("landscape", "simulate", "cli", "errors")


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    for sub in ("landscape", "simulate"):
        mod = importlib.import_module(f".{sub}", __name__)
        if name in getattr(mod, "__all__", ()):
            return getattr(mod, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    names = set(_SUBMODULES) | {"__version__"}
    for sub in ("landscape", "simulate"):
        mod = importlib.import_module(f".{sub}", __name__)
        names |= set(getattr(mod, "__all__", ()))
    return sorted(names)
