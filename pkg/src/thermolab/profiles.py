"""Diffusion-coefficient profiles degenerating at x = 0 and their integrals.

A profile is the coefficient a(x) of the heat part, positive on (0, 1] and
possibly vanishing at x = 0.  The degeneracy class is decided by endpoint
integrability:

* ``NON_DEGENERATE``  a(0) > 0;
* ``WDP``  (weak)     a(0) = 0 and 1/a integrable near 0;
* ``SDP``  (strong)   1/a not integrable but 1/sqrt(a) integrable;
* ``UNSUPPORTED``     1/sqrt(a) not integrable either (power law alpha >= 2).

The class controls the boundary condition carried by the heat component at
x = 0 (Dirichlet for WDP, zero-flux for SDP) and the orientation of the
resistance integral

    R(x) = integral of 1/a  from 0 to x   (WDP, finite everywhere)
    R(x) = integral of 1/a  from x to 1   (SDP, finite for x > 0)

which is the building block of the closed-form inverse in
:mod:`thermolab.greens`.  Power-law profiles a(x) = x**alpha evaluate every
integral analytically; tabulated profiles fall back on the adaptive
quadratures of :mod:`thermolab.quadrature`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedQuadrature, NonPositiveCoefficient, UnsupportedClass
from .quadrature import (
    PiecewiseChebyshev,
    dyadic_integrability_probe,
    integrate_singular_left,
)

__all__ = [
    "DegeneracyClass",
    "DegeneracyProfile",
    "classify",
    "resistance",
    "resistance_moment",
    "resistance_l1_norm",
    "temperature_kernel_hs_norm",
]

# Relative agreement required between the two evaluation routes of the
# resistance L1 norm (definition vs first-moment identity).
_L1_AGREEMENT_RTOL = 1e-8


class DegeneracyClass(enum.Enum):
    NON_DEGENERATE = "non_degenerate"
    WDP = "wdp"
    SDP = "sdp"
    UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class DegeneracyProfile:
    """Coefficient a(x), its degeneracy class and integrability flags.

    Build instances through :meth:`power_law` or :meth:`tabulated`.
    Tabulated samples are interpolated linearly in log-log coordinates
    (piecewise power law), and extrapolated below the first sample with the
    leading segment's exponent.  Plain linear interpolation would force
    1/a ~ 1/x near a degenerate endpoint and thereby misclassify every
    sampled weakly degenerate coefficient; the log-log rule reproduces a
    sampled power law exactly.

    ``c1_verified`` is False for tabulated strongly degenerate profiles: the
    strong class formally requires a continuously differentiable
    coefficient, which a finite table cannot certify.  Such profiles are
    accepted with this warning flag rather than rejected.
    """

    kind: str  # "power_law" | "tabulated"
    alpha: float | None = None
    sample_x: np.ndarray | None = None
    sample_a: np.ndarray | None = None
    klass: DegeneracyClass = DegeneracyClass.NON_DEGENERATE
    inv_a_integrable: bool = True
    inv_sqrt_a_integrable: bool = True
    c1_verified: bool = True
    _segment_exponents: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def power_law(cls, alpha: float) -> "DegeneracyProfile":
        """Profile a(x) = x**alpha, alpha >= 0."""
        alpha = float(alpha)
        if not math.isfinite(alpha) or alpha < 0.0:
            raise ValueError("power-law exponent must be finite and >= 0")
        if alpha == 0.0:
            klass = DegeneracyClass.NON_DEGENERATE
        elif alpha < 1.0:
            klass = DegeneracyClass.WDP
        elif alpha < 2.0:
            klass = DegeneracyClass.SDP
        else:
            klass = DegeneracyClass.UNSUPPORTED
        return cls(
            kind="power_law",
            alpha=alpha,
            klass=klass,
            inv_a_integrable=alpha < 1.0,
            inv_sqrt_a_integrable=alpha < 2.0,
            c1_verified=(alpha == 0.0) or (alpha >= 1.0) or klass is DegeneracyClass.WDP,
        )

    @classmethod
    def tabulated(cls, x: np.ndarray, values: np.ndarray) -> "DegeneracyProfile":
        """Profile from samples (x_i, a_i) with 0 < x_i <= 1, a_i > 0.

        The table must be strictly increasing in x and reach x = 1.
        """
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != values.shape or x.size < 2:
            raise ValueError("need matching 1-d sample arrays with at least 2 points")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if x[0] <= 0.0 or abs(x[-1] - 1.0) > 1e-12:
            raise ValueError("samples must live in (0, 1] and include x = 1")
        if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
            raise NonPositiveCoefficient("tabulated coefficient must be positive on (0, 1]")
        exps = np.log(values[1:] / values[:-1]) / np.log(x[1:] / x[:-1])
        prof = cls(
            kind="tabulated",
            sample_x=x,
            sample_a=values,
            _segment_exponents=exps,
        )
        klass, ia, isa = prof._classify_tabulated()
        return cls(
            kind="tabulated",
            sample_x=x,
            sample_a=values,
            klass=klass,
            inv_a_integrable=ia,
            inv_sqrt_a_integrable=isa,
            c1_verified=klass is not DegeneracyClass.SDP,
            _segment_exponents=exps,
        )

    # -- coefficient evaluation -------------------------------------------

    def a(self, x) -> np.ndarray:
        """Coefficient value(s) at x in [0, 1]."""
        x = np.asarray(x, dtype=float)
        if self.kind == "power_law":
            with np.errstate(divide="ignore"):
                return np.power(x, self.alpha)
        xs, av, exps = self.sample_x, self.sample_a, self._segment_exponents
        xq = np.atleast_1d(x)
        idx = np.clip(np.searchsorted(xs, xq, side="right") - 1, 0, xs.size - 2)
        with np.errstate(divide="ignore", over="ignore"):
            out = av[idx] * np.power(xq / xs[idx], exps[idx])
        out = np.where(xq >= xs[-1], av[-1], out)
        if x.ndim == 0:
            return out[0]
        return out

    def leading_exponent(self) -> float:
        """Local power-law exponent of a(x) as x -> 0."""
        if self.kind == "power_law":
            return float(self.alpha)
        return float(self._segment_exponents[0])

    def _classify_tabulated(self):
        inv_a = dyadic_integrability_probe(lambda s: 1.0 / self.a(s))
        inv_sqrt = dyadic_integrability_probe(lambda s: 1.0 / np.sqrt(self.a(s)))
        if inv_a:
            if self.leading_exponent() <= 1e-12:
                return DegeneracyClass.NON_DEGENERATE, inv_a, inv_sqrt
            return DegeneracyClass.WDP, inv_a, inv_sqrt
        if inv_sqrt:
            return DegeneracyClass.SDP, inv_a, inv_sqrt
        return DegeneracyClass.UNSUPPORTED, inv_a, inv_sqrt

    # -- cached cellwise integrals for tabulated profiles -------------------

    def _tabulated_integrals(self) -> dict:
        """Cellwise Chebyshev representations of 1/a and s/a integrals.

        Cell boundaries are aligned with the sample abscissae so every cell
        carries a pure power segment of the interpolant, plus a dyadic
        refinement toward 0 below the first sample.  Built once per profile.
        """
        if self._cache:
            return self._cache
        levels = 140
        geo = self.sample_x[0] * 0.5 ** np.arange(levels, 0, -1)
        bnd = np.unique(np.concatenate(([0.0], geo, self.sample_x)))
        inv_a = PiecewiseChebyshev.from_callable(lambda s: 1.0 / self.a(s), bnd)
        mom = PiecewiseChebyshev.from_callable(lambda s: s / self.a(s), bnd)
        if self.is_weak:
            res, moment = inv_a.antiderivative(), mom.antiderivative()
        else:
            res = inv_a.antiderivative_from_right()
            moment = mom.antiderivative_from_right()
        self._cache.update(boundaries=bnd, resistance=res, moment=moment)
        return self._cache

    # -- guards -------------------------------------------------------------

    def require_degenerate(self) -> None:
        if self.klass not in (DegeneracyClass.WDP, DegeneracyClass.SDP):
            raise UnsupportedClass(
                f"operation requires a weakly or strongly degenerate profile, got {self.klass.value}"
            )

    @property
    def is_weak(self) -> bool:
        return self.klass is DegeneracyClass.WDP

    def describe(self) -> str:
        if self.kind == "power_law":
            return f"power_law(alpha={self.alpha:g})"
        return f"tabulated({self.sample_x.size} samples)"


def classify(profile: DegeneracyProfile) -> DegeneracyClass:
    """Degeneracy class of the profile (decided at construction)."""
    return profile.klass


# -- resistance integrals ---------------------------------------------------


def resistance(profile: DegeneracyProfile, x) -> np.ndarray | float:
    """Cumulative reciprocal-coefficient integral R(x).

    Weak class: integral of 1/a over (0, x], nondecreasing, finite on [0, 1].
    Strong class: integral over [x, 1), nonincreasing, infinite at x = 0.
    """
    profile.require_degenerate()
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0) | (x > 1)):
        raise ValueError("resistance is defined on [0, 1]")
    if profile.kind == "power_law":
        al = profile.alpha
        with np.errstate(divide="ignore"):
            if profile.is_weak:
                out = np.power(x, 1.0 - al) / (1.0 - al)
            elif al == 1.0:
                out = np.where(x > 0, -np.log(np.where(x > 0, x, 1.0)), np.inf)
            else:
                out = np.where(
                    x > 0,
                    (np.power(np.where(x > 0, x, 1.0), 1.0 - al) - 1.0) / (al - 1.0),
                    np.inf,
                )
    else:
        res = profile._tabulated_integrals()["resistance"]
        out = res(x)
        if not profile.is_weak:
            out = np.where(x > 0.0, out, np.inf)
        else:
            out = np.where(x > 0.0, out, 0.0)
    return float(out[0]) if scalar else out


def resistance_moment(profile: DegeneracyProfile, x) -> np.ndarray | float:
    """Integrated resistance.

    Weak class: running integral of R over (0, x].  Strong class: first
    moment of 1/a over [x, 1], i.e. integral of s/a(s).  Finite on [0, 1]
    for both classes.
    """
    profile.require_degenerate()
    scalar = np.isscalar(x) or np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((x < 0) | (x > 1)):
        raise ValueError("resistance moment is defined on [0, 1]")
    if profile.kind == "power_law":
        al = profile.alpha
        if profile.is_weak:
            out = np.power(x, 2.0 - al) / ((1.0 - al) * (2.0 - al))
        else:
            out = (1.0 - np.power(x, 2.0 - al)) / (2.0 - al)
    else:
        cache = profile._tabulated_integrals()
        if profile.is_weak:
            # running integral of R = x*R(x) - integral_0^x s/a(s) (by parts)
            out = np.where(x > 0.0, x * cache["resistance"](x) - cache["moment"](x), 0.0)
        else:
            out = cache["moment"](x)
    return float(out[0]) if scalar else out


def resistance_l1_norm(profile: DegeneracyProfile) -> float:
    """Integral of the resistance over [0, 1], dual-evaluated.

    The definition-side value is always obtained by quadrature of R itself;
    for strongly degenerate profiles it must agree with the first-moment
    identity  integral of R = integral of x/a(x)  to 1e-8 relative, and the
    (more accurate) identity-side value is returned.  Disagreement raises
    :class:`DivergedQuadrature`.
    """
    profile.require_degenerate()
    if profile.kind == "power_law":
        by_quadrature = integrate_singular_left(lambda s: resistance(profile, s), 1.0, tol=1e-10)
        reference = (
            resistance_moment(profile, 1.0) if profile.is_weak else 1.0 / (2.0 - profile.alpha)
        )
    else:
        cache = profile._tabulated_integrals()
        by_quadrature = PiecewiseChebyshev.from_callable(
            cache["resistance"], cache["boundaries"]
        ).integral()
        # first-moment route: integral of R = 1*R(1) - M(1) (weak, by parts)
        # or the x/a first moment evaluated from the right (strong)
        if profile.is_weak:
            reference = float(cache["resistance"](1.0)[0]) - float(cache["moment"](1.0)[0])
        else:
            reference = float(cache["moment"](0.0)[0])
    if abs(by_quadrature - reference) > _L1_AGREEMENT_RTOL * max(1.0, abs(reference)):
        raise DivergedQuadrature(
            "resistance L1 norm: definition and first-moment routes disagree "
            f"({by_quadrature!r} vs {reference!r})"
        )
    return float(reference)


# -- Hilbert-Schmidt norm of the temperature kernel -------------------------


def _hs_power_law(alpha: float, weak: bool) -> float:
    if weak:
        beta = 1.0 - alpha
        c = 1.0 / (1.0 - alpha)
        bracket = 1.0 / (4 * beta + 2) - 2.0 / (3 * beta + 2) + 1.0 / (2 * beta + 2)
        return math.sqrt(2.0 * c * c / (2 * beta + 1) * bracket)
    if alpha == 1.0:
        return math.sqrt(0.5)  # 2 * integral of x*log(x)**2 = 2/4
    m = (1.0 / (4.0 - 2 * alpha) - 2.0 / (3.0 - alpha) + 0.5) / (alpha - 1.0) ** 2
    return math.sqrt(2.0 * m)


def _hs_tabulated(profile: DegeneracyProfile) -> float:
    cache = profile._tabulated_integrals()
    bnd, r = cache["boundaries"], cache["resistance"]
    if profile.is_weak:
        r1 = float(r(1.0)[0])
        # kernel is R(min)*(R(max)-R(1))/R(1); the squared double integral
        # reduces to 2 * integral over x of ((R(x)-R(1))/R(1))**2 * integral_0^x R**2
        inner = PiecewiseChebyshev.from_callable(lambda s: r(s) ** 2, bnd).antiderivative()
        outer = PiecewiseChebyshev.from_callable(
            lambda s: ((r(s) - r1) / r1) ** 2 * inner(s), bnd
        )
        return math.sqrt(2.0 * outer.integral())
    integrand = PiecewiseChebyshev.from_callable(lambda s: s * r(s) ** 2, bnd)
    return math.sqrt(2.0 * integrand.integral())


def temperature_kernel_hs_norm(profile: DegeneracyProfile) -> float:
    """Hilbert-Schmidt norm of the temperature kernel of the inverse.

    Finiteness of this norm is what makes the inverse compact; for the
    strong class it equals sqrt(2 * integral of x * R(x)**2).
    """
    profile.require_degenerate()
    if profile.kind == "power_law":
        return _hs_power_law(profile.alpha, profile.is_weak)
    return _hs_tabulated(profile)
