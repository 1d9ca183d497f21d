"""Abstract domains selectable by name."""

from .base import Domain, DomainError
from .concrete import CardinalityLimit, ConcreteDomain
from .depthk import DepthKDomain
from .modes import ModesDomain
from .sharing import SharingDomain

NAMES = ("modes", "sharing", "shfr", "share_clique", "depthk", "concrete")


def get_domain(name, **options):
    """Build the domain called ``name``; ``k`` applies to depthk, ``cap`` to concrete."""
    if name == "modes":
        return ModesDomain()
    if name in ("sharing", "shfr", "share_clique"):
        return SharingDomain(name)
    if name == "depthk":
        return DepthKDomain(options.get("k", 2))
    if name == "concrete":
        return ConcreteDomain(options.get("cap", 5000))
    raise ValueError(f"unknown domain {name!r}; expected one of {', '.join(NAMES)}")


__all__ = ["CardinalityLimit", "ConcreteDomain", "DepthKDomain", "Domain", "DomainError",
           "ModesDomain", "NAMES", "SharingDomain", "get_domain"]
