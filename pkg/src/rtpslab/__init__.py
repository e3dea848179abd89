"""rtpslab: a desk-scale lab for reliable publish/subscribe over lossy links.

Three pillars: closed-form retransmission-traffic formulas (`model`), a
deterministic event simulator of the heartbeat/acknack repair loop (`sim`),
and a QoS tuner (`optimizer`) with XML/JSON/CSV serialization (`profile_io`).
"""

from . import model, optimizer, profile_io, sim, validate

__version__ = "0.1.0"

__all__ = ["model", "optimizer", "profile_io", "sim", "validate", "__version__"]
