"""Identity types with strict elimination in truncated cubical sets."""
from .site import AFFINE, CARTESIAN, CONNECTIONS, Site, SiteMode, get_site
from .presheaf import CubicalSet, PresheafMap, Subpresheaf

__all__ = ["AFFINE", "CARTESIAN", "CONNECTIONS", "Site", "SiteMode", "get_site",
           "CubicalSet", "PresheafMap", "Subpresheaf"]
