"""Physical constants (CODATA 2018, SI) and Planck-regime arithmetic."""
import math
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class PhysConstants:
    G: float = 6.67430e-11          # m^3 kg^-1 s^-2
    # exact since the 2019 SI redefinition; the CODATA table rounds it to 1.054571817e-34
    hbar: float = 6.62607015e-34 / (2 * math.pi)   # J s
    h: float = 6.62607015e-34       # J s (exact)
    c: float = 299792458.0          # m s^-1 (exact)
    k_B: float = 1.380649e-23       # J K^-1 (exact)
    l_planck: float = field(init=False)

    def __post_init__(self):
        for name in ("G", "hbar", "h", "c", "k_B"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if abs(self.h - 2 * math.pi * self.hbar) > 1e-12 * self.h:
            raise DomainError("h and hbar are inconsistent")
        object.__setattr__(self, "l_planck", math.sqrt(self.hbar * self.G / self.c**3))


CODATA2018 = PhysConstants()

G = CODATA2018.G
HBAR = CODATA2018.hbar
H_PLANCK = CODATA2018.h
C = CODATA2018.c
K_B = CODATA2018.k_B
L_PLANCK = CODATA2018.l_planck


def bekenstein_entropy(area, const=CODATA2018):
    """Black-hole entropy ``k_B * area / (4 l_P^2)`` in J/K."""
    if area < 0:
        raise DomainError(f"area must be non-negative, got {area!r}")
    return const.k_B * area / (4.0 * const.l_planck**2)


def _check_mass_speed(mass, speed):
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass!r}")
    if not speed > 0:
        raise DomainError(f"speed must be positive, got {speed!r}")


def de_broglie_wavelength(mass, speed, const=CODATA2018):
    _check_mass_speed(mass, speed)
    return 2 * math.pi * const.hbar / (mass * speed)


@dataclass(frozen=True)
class PlanckRegimeReport:
    lambda_m: float
    lambda_paper_reading_m: float
    l_planck_m: float
    ratio: float
    sub_planckian: bool

    def to_dict(self):
        return {
            "lambda_m": self.lambda_m,
            "lambda_paper_reading_m": self.lambda_paper_reading_m,
            "l_planck_m": self.l_planck_m,
            "ratio": self.ratio,
            "sub_planckian": self.sub_planckian,
        }


def planck_regime_report(mass, speed, const=CODATA2018):
    """Compare a body's de Broglie wavelength with the Planck length.

    ``lambda_paper_reading_m`` is ``2*pi`` times the formula value, which is
    the magnitude quoted in the literature for (1 kg, 1 km/s). Both readings
    are reported; ``sub_planckian`` refers to the formula value.
    """
    lam = de_broglie_wavelength(mass, speed, const)
    ratio = lam / const.l_planck
    return PlanckRegimeReport(
        lambda_m=lam,
        lambda_paper_reading_m=2 * math.pi * lam,
        l_planck_m=const.l_planck,
        ratio=ratio,
        sub_planckian=bool(ratio < 1),
    )
