"""Ext groups between the two families of sheaves on the blow-up.

EXC k is the pushforward from the exceptional divisor of the restriction of
L^k to the genus 2 curve H; PULL j is the pullback of L^j boxed with O_C.
Every Ext reduces to one of two theta-function models:

* Ext_H(L^a, L^b) = coker(theta * : H^0(L^{d-1}) -> H^0(L^d)), d = b - a;
* Ext_V(L^j, L^k) (x) C[y]_{<= N}, with basis level-(k-j) thetas times y^n.
"""

from dataclasses import dataclass, field
from enum import Enum
import re

import numpy as np
import scipy.linalg

from ._linalg import GAP_RATIO, lex_cokernel_basis
from .errors import IllConditionedError, RangeError, ShapeError
from .lattice_theta import (DEFAULT_R, DEFAULT_TOL, StructureTensor, characteristics,
                            make_modular_param, mult_by_theta_matrix, mult_structure_constants)


class Factor(Enum):
    EXC = "EXC"
    PULL = "PULL"


@dataclass(frozen=True)
class BObject:
    factor: Factor
    index: int
    shift: int = 0

    def __str__(self):
        s = f"{self.factor.value} {self.index}"
        return s + (f"[{self.shift}]" if self.shift else "")


def EXC(k, shift=0):
    return BObject(Factor.EXC, k, shift)


def PULL(j, shift=0):
    return BObject(Factor.PULL, j, shift)


_OBJ = re.compile(r"^\s*(EXC|PULL)\s*(-?\d+)\s*(?:\[\s*(-?\d+)\s*\])?\s*$")


def parse_object(text):
    m = _OBJ.match(text)
    if not m:
        raise ValueError(f"cannot parse object {text!r}; expected EXC<k> or PULL<j>[shift]")
    return BObject(Factor(m.group(1)), int(m.group(2)), int(m.group(3) or 0))


@dataclass
class ExtSpace:
    dims: dict
    basis_labels: list = field(default_factory=list)
    level: int = 0
    image: np.ndarray = None  # theta-image inside the level-d sections, if any
    truncation: int = None


def qr_rank(M, tol=DEFAULT_TOL):
    """Rank from column-pivoted QR, cut at tol * |R_00|."""
    M = np.asarray(M)
    if M.size == 0:
        return 0
    r = np.abs(np.diag(scipy.linalg.qr(M, mode="r", pivoting=True)[0]))
    if r[0] == 0:
        return 0
    cut = tol * r[0]
    if cut > 0 and np.any((r > cut / GAP_RATIO) & (r < cut * GAP_RATIO)):
        raise IllConditionedError("pivots cluster at the rank cutoff")
    return int(np.sum(r > cut))


def ext_on_H(a, b, p=None, R=DEFAULT_R, tol=DEFAULT_TOL):
    """Ext^0_H(L^a|_H, L^b|_H) as the cokernel of multiplication by theta."""
    d = b - a
    if d < 2:
        raise RangeError(f"Ext on H needs b - a >= 2, got {d}")
    p = p or make_modular_param(0.2)
    M = mult_by_theta_matrix(p, d - 1, R, tol)
    dim = d * d - qr_rank(M, tol)
    chars = characteristics(d)
    picked = lex_cokernel_basis(M, d * d)
    assert len(picked) == dim
    return ExtSpace({0: dim}, [f"c{chars[i]}" for i in picked], d, M)


def _shifted(space, move):
    if move:
        space.dims = {k - move: v for k, v in space.dims.items()}
    return space


def hom_b(A, B, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL):
    p = p or make_modular_param(0.2)
    fa, fb = A.factor, B.factor
    move = B.shift - A.shift
    if (fa, fb) == (Factor.PULL, Factor.EXC):
        return ExtSpace({})
    if fa is Factor.EXC:
        ext = ext_on_H(A.index, B.index, p, R, tol)
        if fb is Factor.PULL:
            # adjunction across the divisor costs one degree
            ext.dims = {k + 1: v for k, v in ext.dims.items()}
        return _shifted(ext, move)
    d = B.index - A.index
    if d < 1:
        raise RangeError(f"Ext_V(L^{A.index}, L^{B.index}) is outside the supported range")
    labels = [f"y^{n}:c{c}" for n in range(N + 1) for c in characteristics(d)]
    return _shifted(ExtSpace({0: d * d * (N + 1)}, labels, d, None, N), move)


def _projector(M, tol):
    return np.eye(M.shape[0]) - M @ np.linalg.pinv(M, rcond=tol)


def _coker_coords(M, tol, vectors):
    """Coordinates of classes of vectors (rows) in the lex cokernel basis."""
    n = M.shape[0]
    S = lex_cokernel_basis(M, n)
    P = _projector(M, tol)
    sol, *_ = np.linalg.lstsq(P[:, S], P @ np.atleast_2d(vectors).T, rcond=None)
    return S, sol.T


_SHAPES = {
    (Factor.EXC, Factor.EXC, Factor.PULL): "EEP",
    (Factor.EXC, Factor.PULL, Factor.PULL): "EPP",
    (Factor.PULL, Factor.PULL, Factor.PULL): "PPP",
}


def compose_b(triple, N=2, p=None, R=DEFAULT_R, tol=DEFAULT_TOL):
    """Composition Ext(B, C) x Ext(A, B) -> Ext(A, C) as a structure tensor
    indexed [first input, second input, output]."""
    A, B, C = triple
    shape = _SHAPES.get((A.factor, B.factor, C.factor))
    if shape is None:
        raise ShapeError(f"unsupported composition shape ({A}, {B}, {C})")
    p = p or make_modular_param(0.2)
    k1, k2 = B.index - A.index, C.index - B.index
    need = {"EEP": (2, 2), "EPP": (2, 1), "PPP": (1, 1)}[shape]
    if k1 < need[0] or k2 < need[1]:
        raise RangeError(f"index gaps of ({A}, {B}, {C}) are outside the supported range")
    T = mult_structure_constants(p, k1, k2, R, tol).data
    n1, n2, n3 = T.shape
    overflow = 0
    if shape == "PPP":
        out = np.zeros((n1 * (N + 1), n2 * (N + 1), n3 * (N + 1)), dtype=complex)
        for a in range(N + 1):
            for b in range(N + 1):
                if a + b > N:
                    overflow += 1
                    continue
                out[a * n1:(a + 1) * n1, b * n2:(b + 1) * n2, (a + b) * n3:(a + b + 1) * n3] = T
        return StructureTensor(out, 0.0, 0.0, {"shape": shape, "overflow": overflow})

    M1 = mult_by_theta_matrix(p, k1 - 1, R, tol)
    M3 = mult_by_theta_matrix(p, k1 + k2 - 1, R, tol)
    S1 = lex_cokernel_basis(M1, n1)
    if shape == "EEP":
        M2 = mult_by_theta_matrix(p, k2 - 1, R, tol)
        S2 = lex_cokernel_basis(M2, n2)
        sub = T[np.ix_(S1, S2, range(n3))]
    else:
        # y^n on the pullback side restricts to H x {0}, so only y^0 survives
        S2 = list(range(n2 * (N + 1)))
        sub = np.zeros((len(S1), len(S2), n3), dtype=complex)
        sub[:, :n2, :] = T[S1]
    S3, coords = _coker_coords(M3, tol, sub.reshape(-1, n3))
    data = coords.reshape(len(S1), len(S2), len(S3))
    return StructureTensor(data, 0.0, 0.0, {"shape": shape, "overflow": overflow})
