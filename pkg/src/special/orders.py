"""
次数パラメータ

Riesz指数 z と Bessel次数 ν の値型
"""

import math
from dataclasses import dataclass

from ..errors import ConfigError, DomainError


@dataclass(frozen=True)
class ComplexOrder:
    """
    Riesz指数 z = re + i·im（re ≥ 0）
    """

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ConfigError(f"z must be finite, got ({self.re}, {self.im})")
        if self.re < 0:
            raise ConfigError(f"Re z must be >= 0, got {self.re}")

    @classmethod
    def of(cls, z) -> "ComplexOrder":
        """実数・複素数・ComplexOrder のいずれからでも作る"""
        if isinstance(z, ComplexOrder):
            return z
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0.0

    def __str__(self) -> str:
        return f"{self.re:g}{self.im:+g}i" if self.im else f"{self.re:g}"


@dataclass(frozen=True)
class BesselOrder:
    """
    Bessel関数の次数 ν ≥ -1/2（実数のみ）
    """

    nu: float

    def __post_init__(self):
        if not math.isfinite(self.nu) or self.nu < -0.5:
            raise DomainError(f"Bessel order must be finite and >= -1/2, got {self.nu}")

    @classmethod
    def for_riesz(cls, z: ComplexOrder, rank: int = 1) -> "BesselOrder":
        """Riesz核のBessel表示に現れる次数 ν = Re z + l/2"""
        if not z.is_real:
            raise DomainError("Bessel pipeline supports real z only")
        return cls(z.re + rank / 2.0)
