"""Decomposition of the (H, C)-level plane into its seven strata.

The joint image of the two conserved quantities is the whole plane, but
it decomposes into three closed regions whose boundaries are images of
the equilibrium lines:

  * region I:   below the parabola h = (k/2) c^2 (i.e. h - (k/2) c^2 <= 0);
  * region II:  above the parabola, h <= 0, c >= 0;
  * region III: the complement of the interiors of I and II.

The boundary strata are the two parabola branches Sigma2s (c > 0, images
of the stable z-axis equilibria) and Sigma2u (c < 0, unstable z-axis
equilibria), the half-line Sigma1u {h = 0, c > 0} (images of the unstable
x-axis equilibria), and the origin.  Classification is tolerance-based:
the boundary strata have measure zero, so exact float comparison would
make them unreachable.
"""

from __future__ import annotations

import enum
import math

from .core import ECValue, SystemParams
from .equilibria import Family
from .errors import InvalidParameterError

__all__ = [
    "Stratum",
    "classify_ec_point",
    "equilibrium_image",
    "stratum_of_equilibrium",
    "recover_equilibrium_parameter",
]


class Stratum(enum.Enum):
    PRINCIPAL_I = "PrincipalI"
    PRINCIPAL_II = "PrincipalII"
    PRINCIPAL_III = "PrincipalIII"
    SIGMA_2S = "Sigma2s"
    SIGMA_2U = "Sigma2u"
    SIGMA_1U = "Sigma1u"
    ORIGIN = "Origin"

    @property
    def is_boundary(self) -> bool:
        return self in (
            Stratum.SIGMA_2S,
            Stratum.SIGMA_2U,
            Stratum.SIGMA_1U,
            Stratum.ORIGIN,
        )


def classify_ec_point(params: SystemParams, v: ECValue, tol: float = 1e-9) -> Stratum:
    """Stratum containing the level pair (h, c), at boundary tolerance tol.

    With r = h - (k/2) c^2 (negative inside region I since k < 0):
    points with |r| <= tol sit on the parabola (Sigma2s / Sigma2u /
    Origin by the sign of c); r < -tol is the open region I; otherwise
    the point is above the parabola and splits into Sigma1u, Origin, the
    open region II (h < 0, c > 0) or the open region III.
    """
    if tol < 0 or not math.isfinite(tol):
        raise InvalidParameterError(f"tol must be finite and >= 0, got {tol!r}")
    h, c = v.h, v.c
    r = h - 0.5 * params.k * c * c
    if abs(r) <= tol:
        if c > tol:
            return Stratum.SIGMA_2S
        if c < -tol:
            return Stratum.SIGMA_2U
        return Stratum.ORIGIN
    if r < -tol:
        return Stratum.PRINCIPAL_I
    if abs(h) <= tol and c > tol:
        return Stratum.SIGMA_1U
    if abs(h) <= tol and abs(c) <= tol:
        return Stratum.ORIGIN
    if h < -tol and c > tol:
        return Stratum.PRINCIPAL_II
    return Stratum.PRINCIPAL_III


def equilibrium_image(params: SystemParams, family: Family, M: float) -> ECValue:
    """Level pair of an equilibrium: (0, M^2/2) on the x-axis family,
    ((k/2) M^2, M) on the z-axis family."""
    if family is Family.E1:
        return ECValue(0.0, 0.5 * M * M)
    return ECValue(0.5 * params.k * M * M, M)


def stratum_of_equilibrium(params: SystemParams, family: Family, M: float) -> Stratum:
    """Named stratum carrying the image of an equilibrium."""
    if M == 0.0:
        return Stratum.ORIGIN
    if family is Family.E1:
        return Stratum.SIGMA_1U
    return Stratum.SIGMA_2S if M > 0.0 else Stratum.SIGMA_2U


def recover_equilibrium_parameter(v: ECValue, stratum: Stratum) -> float:
    """Inverse of ``equilibrium_image`` on the boundary strata: M = c on
    the parabola branches, M = sqrt(2c) on the half-line, 0 at the
    origin."""
    if stratum in (Stratum.SIGMA_2S, Stratum.SIGMA_2U):
        return v.c
    if stratum is Stratum.SIGMA_1U:
        return math.sqrt(2.0 * v.c)
    if stratum is Stratum.ORIGIN:
        return 0.0
    raise InvalidParameterError(
        f"{stratum.value} is not the image of an equilibrium family"
    )
