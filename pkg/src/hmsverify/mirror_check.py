"""Mirror functor on objects and the A-side vs B-side comparison reports."""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import a_side, b_side
from .config import AUTO, Config
from .errors import RangeError, ZeroPatternMismatch
from .fiber_floer import calibrate
from .lattice_theta import make_modular_param

# entries below this fraction of the largest entry count as structural zeros
ZERO_REL = 1e-8
# and so does anything below this absolute size (the bases are O(1) normalized)
ZERO_ABS = 1e-10

_FACTOR = {a_side.Family.F1: b_side.Factor.EXC, a_side.Family.F2: b_side.Factor.PULL}


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    OUT_OF_RANGE = "OUT_OF_RANGE"


@dataclass
class ComparisonReport:
    kind: str
    ident: str
    mirror: str
    dims_a: dict = field(default_factory=dict)
    dims_b: dict = field(default_factory=dict)
    residual: float = 0.0
    rescaling: dict = field(default_factory=dict)
    verdict: Verdict = Verdict.FAIL
    tolerances: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self):
        return {
            "kind": self.kind, "id": self.ident, "mirror": self.mirror,
            "dims_a": _dim_table(self.dims_a), "dims_b": _dim_table(self.dims_b),
            "residual": self.residual, "rescaling": self.rescaling,
            "verdict": self.verdict.value, "tolerances": self.tolerances, "note": self.note,
        }


def _dim_table(d):
    return {str(k): v for k, v in d.items()}


def mirror_object(A):
    return b_side.BObject(_FACTOR[A.family], A.index, A.shift)


def _nonzero(d):
    return {k: v for k, v in sorted(d.items()) if v}


def _frames(dims, target_is_ray):
    """Unshifted table, plus the frame used for compositions (target ray
    shifted so that its morphisms sit in degree 0)."""
    out = {"unshifted": _nonzero(dims)}
    if target_is_ray:
        out["composition"] = {k - 1: v for k, v in _nonzero(dims).items()}
    return out


def compare_homs(A1, A2, N=2, tol=1e-6, p=None, R=12, rank_tol=1e-9, C=1.0):
    p = p or make_modular_param(0.2)
    B1, B2 = mirror_object(A1), mirror_object(A2)
    ident, mirror = f"{A1},{A2}", f"{B1},{B2}"
    tols = {"tol": tol, "rank_tol": rank_tol}
    try:
        ha = a_side.hom_complex(A1, A2, N, p, R, rank_tol, C)
        hb = b_side.hom_b(B1, B2, N, p, R, rank_tol)
    except RangeError as exc:
        return ComparisonReport("hom", ident, mirror, verdict=Verdict.OUT_OF_RANGE,
                                tolerances=tols, note=str(exc))
    da, db = _nonzero(ha.cohomology_dims), _nonzero(hb.dims)
    ok = da == db and 0.0 < tol
    ray = A1.family is a_side.Family.F1 and A2.family is a_side.Family.F2
    return ComparisonReport(
        "hom", ident, mirror, da, db, 0.0,
        {"frames_a": _frames(da, ray), "frames_b": _frames(db, ray)},
        Verdict.PASS if ok else Verdict.FAIL, tols)


def _support(T):
    m = np.max(np.abs(T)) if T.size else 0.0
    return np.abs(T) > max(ZERO_REL * m, ZERO_ABS)


def support_mismatch(TA, TB):
    return int(np.sum(_support(TA) != _support(TB)))


def fit_rescaling(TA, TB, strict=True):
    """Best diagonal gauge taking TA to TB.

    Solves log |TB| - log |TA| = g + a_p + b_q + c_r over the common support
    by least squares, with the first scalar of each space fixed to 1, and the
    same system for the phases. Returns (scalars, residual) where residual is
    max |scaled TA - TB| / max |TB| over all entries.

    With strict=True a support mismatch raises ZeroPatternMismatch; otherwise
    the gauge is fitted on the common support and the mismatched entries show
    up in the residual.
    """
    if TA.shape != TB.shape:
        raise ZeroPatternMismatch(f"tensor shapes differ: {TA.shape} vs {TB.shape}")
    sa, sb = _support(TA), _support(TB)
    if strict and not np.array_equal(sa, sb):
        raise ZeroPatternMismatch(
            f"supports differ in {int(np.sum(sa != sb))} of {sa.size} entries")
    common = sa & sb
    n1, n2, n3 = TA.shape
    idx = np.argwhere(common)
    if idx.size == 0:
        scale = max(np.max(np.abs(TA), initial=0.0), np.max(np.abs(TB), initial=0.0))
        resid = 0.0 if not (sa.any() or sb.any()) else float(np.max(np.abs(TA - TB)) / scale)
        return {"global": [1.0, 0.0], "first": [], "second": [], "output": []}, resid
    ncol = 1 + (n1 - 1) + (n2 - 1) + (n3 - 1)
    X = np.zeros((len(idx), ncol))
    X[:, 0] = 1.0
    for row, (p, q, r) in enumerate(idx):
        if p:
            X[row, p] = 1.0
        if q:
            X[row, n1 - 1 + q] = 1.0
        if r:
            X[row, n1 + n2 - 2 + r] = 1.0
    ratio = TB[common] / TA[common]
    mag, *_ = np.linalg.lstsq(X, np.log(np.abs(ratio)), rcond=None)
    ph, *_ = np.linalg.lstsq(X, np.angle(ratio), rcond=None)
    coef = mag + 1j * ph

    def space(off, n):
        return np.concatenate([[0.0], coef[off:off + n - 1]])

    la, lb, lc = space(1, n1), space(n1, n2), space(n1 + n2 - 1, n3)
    scale = np.exp(coef[0] + la[:, None, None] + lb[None, :, None] + lc[None, None, :])
    resid = float(np.max(np.abs(TA * scale - TB)) / np.max(np.abs(TB)))
    expo = [np.exp(coef[0]), np.exp(la), np.exp(lb), np.exp(lc)]
    pack = lambda z: [[float(v.real), float(v.imag)] for v in np.atleast_1d(z)]
    return {"global": pack(expo[0])[0], "first": pack(expo[1]),
            "second": pack(expo[2]), "output": pack(expo[3])}, resid


def _kappa(cfg_cal, p, R, rank_tol):
    return calibrate(p.t, R, rank_tol) if cfg_cal in (None, AUTO) else float(cfg_cal)


def compare_products(triple, N=2, tol=1e-6, p=None, R=12, rank_tol=1e-9,
                     calibration=AUTO, C=1.0):
    p = p or make_modular_param(0.2)
    A, B, Cobj = triple
    mirrored = tuple(mirror_object(x) for x in triple)
    ident = ",".join(map(str, triple))
    mirror = ",".join(map(str, mirrored))
    kappa = _kappa(calibration, p, R, rank_tol)
    tols = {"tol": tol, "rank_tol": rank_tol}
    try:
        TA = a_side.product(A, B, Cobj, N, p, R, rank_tol, kappa, C).data
        TB = b_side.compose_b(mirrored, N, p, R, rank_tol).data
    except RangeError as exc:
        return ComparisonReport("product", ident, mirror, verdict=Verdict.OUT_OF_RANGE,
                                tolerances=tols, note=str(exc))
    dims_a, dims_b = {0: list(TA.shape)}, {0: list(TB.shape)}
    if TA.shape != TB.shape:
        return ComparisonReport("product", ident, mirror, dims_a, dims_b, float("inf"),
                                verdict=Verdict.FAIL, tolerances=tols, note="shape mismatch")
    bad = support_mismatch(TA, TB)
    scalars, resid = fit_rescaling(TA, TB, strict=False)
    scalars["calibration"] = kappa
    ok = bad == 0 and resid < tol
    note = f"supports differ in {bad} of {TA.size} entries" if bad else ""
    return ComparisonReport("product", ident, mirror, dims_a, dims_b, resid,
                            scalars, Verdict.PASS if ok else Verdict.FAIL, tols, note)


def verification_pairs(G):
    L, K = a_side.L, a_side.K
    out = []
    for g in range(2, G + 1):
        out += [(L(0), L(g)), (L(0), K(g)), (K(0), L(g)), (K(0), K(g))]
    return out


def verification_triples(G):
    L, K = a_side.L, a_side.K
    out = []
    for c in range(1, G + 1):
        for b in range(1, c):
            if b >= 2 and c - b >= 2:
                out.append((L(0), L(b), K(c)))
            if b >= 2:
                out.append((L(0), K(b), K(c)))
            out.append((K(0), K(b), K(c)))
    order = {"LLK": 0, "LKK": 1, "KKK": 2}
    return sorted(out, key=lambda tr: (order[a_side._shape(*tr)], [x.index for x in tr]))


def full_verification(config=None):
    """Run every hom and product comparison with index gaps up to G.

    Returns (reports, summary). The calibration is fixed before any triple
    is compared.
    """
    cfg = (config or Config()).validate()
    p = make_modular_param(cfg.t)
    reports = []
    pairs, triples = verification_pairs(cfg.G), verification_triples(cfg.G)
    kappa = _kappa(cfg.fiber_calibration, p, cfg.R, cfg.rank_tol) if triples else None
    for A1, A2 in pairs:
        reports.append(compare_homs(A1, A2, cfg.N, cfg.tol, p, cfg.R, cfg.rank_tol, cfg.C))
    for tr in triples:
        try:
            rep = compare_products(tr, cfg.N, cfg.tol, p, cfg.R, cfg.rank_tol, kappa, cfg.C)
        except ZeroPatternMismatch as exc:
            rep = ComparisonReport("product", ",".join(map(str, tr)),
                                   ",".join(str(mirror_object(x)) for x in tr),
                                   verdict=Verdict.FAIL, note=str(exc))
        reports.append(rep)
    return reports, summarize(reports, kappa)


def summarize(reports, kappa=None):
    counts = {v.value: 0 for v in Verdict}
    for r in reports:
        counts[r.verdict.value] += 1
    prods = [r.residual for r in reports if r.kind == "product" and r.verdict is not Verdict.OUT_OF_RANGE]
    return {
        "total": len(reports), "counts": counts,
        "worst_product_residual": max(prods) if prods else 0.0,
        "fiber_calibration": kappa, "ok": counts["FAIL"] == 0,
    }
