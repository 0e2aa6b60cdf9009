"""Combinatorial model of the base C* of the Landau-Ginzburg map.

Curves are recorded by their end angles at infinity (in turns, cut at -1/2),
their clockwise winding around the puncture and the anchor radius of the arc
through -S. Intersections and tangent-angle lifts are read off from this data.
Angles are Fractions so degrees come out exact.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction

from .errors import ConfigError, DegeneracyError

HALF = Fraction(1, 2)

# degree offset between the standard bigon convention and the one used for
# morphisms inside the U-shaped family
REGRADE_F1 = -1


class CurveKind(Enum):
    U_SHAPE = "U_SHAPE"
    RAY = "RAY"


@dataclass(frozen=True)
class BaseConfig:
    u_ends: tuple = (Fraction(-1, 4), Fraction(1, 8))
    ray_angle: Fraction = Fraction(1, 4)
    critical_radius: float = 0.1  # |critical value| = T^eps
    anchor_radius: float = 0.5  # S
    outer_radius: float = 1.0  # T^eps'
    radii: tuple = (2.0, 3.0, 4.0, 5.0)
    wraps_per_step: int = 1
    # each wrapping step keeps this fraction of the gap between an end and 1/2
    wrap_rate: Fraction = Fraction(1, 2)
    nudge: Fraction = Fraction(1, 10**6)


DEFAULT_CONFIG = BaseConfig()


@dataclass(frozen=True)
class BaseCurve:
    kind: CurveKind
    end_angles: tuple
    winding: int = 0
    anchor_radius: float = DEFAULT_CONFIG.anchor_radius
    radii: tuple = DEFAULT_CONFIG.radii
    label: int = 0
    config: BaseConfig = field(default=DEFAULT_CONFIG, compare=False)

    def geometry(self):
        return (self.kind, self.end_angles, self.winding, self.anchor_radius)


@dataclass(frozen=True)
class BasePoint:
    location: str
    alpha: tuple  # tangent-angle lifts (curve 1, curve 2) in turns
    loop_class: int = 0


def _check_radii(cfg):
    if not cfg.critical_radius < cfg.anchor_radius < cfg.outer_radius:
        raise ConfigError("anchor radius S must satisfy T^eps < S < T^eps'")
    if list(cfg.radii) != sorted(cfg.radii) or cfg.radii[0] <= cfg.outer_radius:
        raise ConfigError("radii schedule must increase and start beyond T^eps'")


def u_shape(j, config=DEFAULT_CONFIG):
    h1, h2 = (Fraction(h) for h in config.u_ends)
    if not (-HALF < h1 < h2 < HALF):
        raise ConfigError(f"U-shape ends {h1}, {h2} must satisfy -1/2 < h1 < h2 < 1/2")
    _check_radii(config)
    return BaseCurve(CurveKind.U_SHAPE, (h1, h2), 0, config.anchor_radius,
                     tuple(config.radii), j, config)


def ray(j, config=DEFAULT_CONFIG):
    h = Fraction(config.ray_angle)
    if not (-HALF < h < HALF):
        raise ConfigError(f"ray angle {h} outside (-1/2, 1/2)")
    if h <= max(Fraction(e) for e in config.u_ends):
        raise ConfigError("ray angle must lie above every U-shape end")
    _check_radii(config)
    return BaseCurve(CurveKind.RAY, (h,), 0, config.anchor_radius,
                     tuple(config.radii), j, config)


def wrap(c, k):
    """k steps of positive wrapping: ends move toward 1/2, rays also wind."""
    if k < 0:
        raise ValueError("wrapping steps must be nonnegative")
    if k == 0:
        return c
    keep = c.config.wrap_rate ** k
    ends = tuple(HALF - (HALF - e) * keep for e in c.end_angles)
    winding = c.winding + k * c.config.wraps_per_step if c.kind is CurveKind.RAY else 0
    return replace(c, end_angles=ends, winding=winding)


def wrap_until_separated(c, target, max_steps=64):
    """Smallest k >= 1 with every end of wrap(c, k) above every end of target.

    Past this level U-U and U-RAY intersections no longer change.
    """
    top = max(target.end_angles)
    for k in range(1, max_steps + 1):
        w = wrap(c, k)
        if min(w.end_angles) > top:
            return k, w
    raise ConfigError(f"ends not separated after {max_steps} wrapping steps")


# tangent lifts at the two corners of a lens between a wrapped and an
# unwrapped curve; they give the standard bigon degrees 1 and 0
_LENS = {
    "left": (Fraction(-1, 8), Fraction(1, 8)),
    "right": (Fraction(1, 8), Fraction(-1, 8)),
}


def _above(a, b, nudge):
    """Is input end a above output end b, after the tie-break nudge."""
    return a + nudge > b if a == b else a > b


def base_intersections(c1, c2):
    """Intersection points of the input curve c1 with the output curve c2."""
    if c1.geometry() == c2.geometry():
        raise DegeneracyError("curves coincide; wrap the input first")
    nudge = c1.config.nudge
    kinds = (c1.kind, c2.kind)
    if kinds == (CurveKind.RAY, CurveKind.RAY):
        pts = []
        if _above(c1.end_angles[0], c2.end_angles[0], nudge):
            pts.append(BasePoint("end", (Fraction(0), Fraction(0)), 0))
        # one crossing per relative turn around the puncture; angles are
        # measured against the radial direction, so every turn is degree 0
        for w in range(1, c1.winding - c2.winding + 1):
            pts.append(BasePoint("cylinder", (Fraction(0), Fraction(0)), w))
        return pts
    if CurveKind.RAY in kinds:
        u, r = (c1, c2) if c1.kind is CurveKind.U_SHAPE else (c2, c1)
        nu = nudge if u is c1 else -nudge
        h = r.end_angles[0]
        crossed = [e for e in u.end_angles if (e + nu > h if e == h else e > h)]
    else:
        crossed = [a for a, b in zip(c1.end_angles, c2.end_angles) if _above(a, b, nudge)]
    sides = ["left", "right"][:len(crossed)]
    return [BasePoint(s, _LENS[s], i) for i, s in enumerate(sides)]


def ccw_alignment(a1, a2):
    """Counterclockwise rotation in [0, 1/2) turns taking line 2 onto line 1."""
    return (a1 - a2) % HALF


def short_path_degree(a1, a2):
    """2 ((a2 - a1) + alignment), an integer for any pair of lifts."""
    deg = 2 * ((a2 - a1) + ccw_alignment(a1, a2))
    if isinstance(deg, Fraction):
        assert deg.denominator == 1
        return int(deg)
    return int(round(deg))


def base_degree(pt):
    return short_path_degree(*pt.alpha)


def monodromy_slope(i, times=1):
    """Monodromy around the critical value raises the fiber slope by one."""
    return i + times
