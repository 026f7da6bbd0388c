"""Zero-coupon bond prices for the short-rate models used by the pricer.

Only models with closed-form prices are supported, because the endowment
price factors into (bond price) x (survival factor) and all mortality
content lives in the survival factor:

* ``ConstantRate`` -- the short rate never moves; F = exp(-r (T - t)).
* ``Vasicek`` -- dr = k (m - r) dt + sigma0 dW under the pricing measure,
  giving the affine form F = exp(A(tau) - B(tau) r).

``bond_pde_residual`` evaluates the pricing equation
F_t + mu F_r + sigma^2 F_rr / 2 - r F on the closed form and certifies it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError
from .validation import check_scalar


class ShortRateKind(enum.Enum):
    CONSTANT = "constant"
    VASICEK = "vasicek"


@dataclass(frozen=True)
class ConstantRateParams:
    r: float


@dataclass(frozen=True)
class VasicekParams:
    """Reversion speed k, long-run mean m (under the pricing measure), vol sigma0."""

    k: float
    m: float
    sigma0: float


@dataclass(frozen=True)
class ShortRateModel:
    kind: ShortRateKind
    params: ConstantRateParams | VasicekParams

    def __post_init__(self):
        if self.kind is ShortRateKind.CONSTANT:
            if not isinstance(self.params, ConstantRateParams):
                raise ConfigError("constant rate requires ConstantRateParams")
            check_scalar(self.params.r, "r", minimum=0.0)
        elif self.kind is ShortRateKind.VASICEK:
            if not isinstance(self.params, VasicekParams):
                raise ConfigError("vasicek requires VasicekParams")
            check_scalar(self.params.k, "k", minimum=0.0, strict_min=True)
            check_scalar(self.params.m, "m")
            check_scalar(self.params.sigma0, "sigma0", minimum=0.0)
        else:  # pragma: no cover
            raise ConfigError(f"unknown short-rate kind {self.kind!r}")

    @classmethod
    def constant(cls, r: float) -> "ShortRateModel":
        return cls(ShortRateKind.CONSTANT, ConstantRateParams(r))

    @classmethod
    def vasicek(cls, k: float, m: float, sigma0: float) -> "ShortRateModel":
        return cls(ShortRateKind.VASICEK, VasicekParams(k, m, sigma0))

    @property
    def reference_rate(self) -> float:
        """A natural rate at which to evaluate prices (the model's own level)."""
        if self.kind is ShortRateKind.CONSTANT:
            return self.params.r
        return self.params.m

    def drift_q(self, r: float, t: float = 0.0) -> float:
        """Short-rate drift under the pricing measure."""
        if self.kind is ShortRateKind.CONSTANT:
            return 0.0
        return self.params.k * (self.params.m - r)

    def sigma(self, r: float, t: float = 0.0) -> float:
        if self.kind is ShortRateKind.CONSTANT:
            return 0.0
        return self.params.sigma0


@dataclass(frozen=True)
class BondPrice:
    """Bond value and its sensitivity to the short rate (negative)."""

    value: float
    delta: float


def _vasicek_ab(params: VasicekParams, tau: float) -> tuple[float, float]:
    k, m, s = params.k, params.m, params.sigma0
    b = (1.0 - math.exp(-k * tau)) / k
    a = (b - tau) * (m - s * s / (2.0 * k * k)) - s * s * b * b / (4.0 * k)
    return a, b


def bond_partials(model: ShortRateModel, r: float, t: float, horizon: float
                  ) -> tuple[float, float, float, float]:
    """Return (F, F_r, F_rr, F_t) of the closed-form bond price."""
    if t > horizon:
        raise ValueError(f"t={t} exceeds the horizon {horizon}")
    tau = horizon - t
    if model.kind is ShortRateKind.CONSTANT:
        f = math.exp(-r * tau)
        return f, -tau * f, tau * tau * f, r * f
    p = model.params
    a, b = _vasicek_ab(p, tau)
    f = math.exp(a - b * r)
    # d/dt = -d/dtau; B'(tau) = e^{-k tau}, A'(tau) = -k m B + sigma0^2 B^2 / 2
    db = math.exp(-p.k * tau)
    da = -p.k * p.m * b + 0.5 * p.sigma0 ** 2 * b * b
    f_t = -(da - db * r) * f
    return f, -b * f, b * b * f, f_t


def bond_price(model: ShortRateModel, r: float, t: float, horizon: float) -> BondPrice:
    """Price of the bond paying 1 at the horizon, with its rate sensitivity."""
    f, f_r, _, _ = bond_partials(model, r, t, horizon)
    return BondPrice(f, f_r)


def bond_pde_residual(model: ShortRateModel, r: float, t: float, horizon: float) -> float:
    """Residual of the bond pricing equation at (r, t); near zero certifies
    the closed form."""
    f, f_r, f_rr, f_t = bond_partials(model, r, t, horizon)
    return (f_t + model.drift_q(r, t) * f_r
            + 0.5 * model.sigma(r, t) ** 2 * f_rr - r * f)
