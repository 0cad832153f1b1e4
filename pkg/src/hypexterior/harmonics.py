"""Sphere-Laplacian spectra restricted to finite symmetry groups.

Supported groups: dihedral families on the circle, the (full or rotation)
tetrahedral / octahedral / icosahedral groups on the 2-sphere, the rotation
group of the 600-cell on the 3-sphere, and the trivial group ("full"
spectrum) in any of those dimensions.

Multiplicities of invariant spherical harmonics are computed two independent
ways: character averaging over an explicit element table, and the numerical
rank of the group-averaged action on an explicit harmonic basis.  The two
must agree exactly; tests assert this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

__all__ = [
    "SymmetryGroup",
    "SpectrumEntry",
    "GroupSpectrum",
    "G1Report",
    "sphere_eigenvalue",
    "full_harmonic_dim",
    "group_restricted_spectrum",
    "g1_threshold",
    "g1_mu_bound",
    "check_g1",
    "invariant_projection_rank",
    "invariant_basis",
    "group_matrices",
    "sphere_quadrature",
]

_PHI = (1.0 + math.sqrt(5.0)) / 2.0

_POLYHEDRAL = ("tetrahedral", "octahedral", "icosahedral")
_KINDS = ("dihedral",) + _POLYHEDRAL + ("hyper-icosahedral", "full")


@dataclass(frozen=True)
class SymmetryGroup:
    """A finite symmetry group acting on the unit sphere S^(ambient_N - 1).

    kind "full" is the trivial group (no symmetry restriction).  For the
    polyhedral kinds, include_reflections=True (default) selects the full
    isometry group; False selects the rotation subgroup.
    """

    kind: str
    ambient_N: int
    m: int | None = None
    include_reflections: bool = True

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown group kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "dihedral":
            if self.ambient_N != 2:
                raise ValidationError("dihedral groups act on the circle (ambient_N = 2)")
            if self.m is None or self.m < 2:
                raise ValidationError("dihedral groups need an order m >= 2")
        elif self.kind in _POLYHEDRAL:
            if self.ambient_N != 3:
                raise ValidationError(f"{self.kind} acts on the 2-sphere (ambient_N = 3)")
        elif self.kind == "hyper-icosahedral":
            if self.ambient_N != 4:
                raise ValidationError("hyper-icosahedral acts on the 3-sphere (ambient_N = 4)")
        else:  # full / trivial
            if self.ambient_N < 2:
                raise ValidationError("ambient_N must be >= 2")

    @property
    def label(self) -> str:
        if self.kind == "dihedral":
            return f"dihedral({self.m})"
        if self.kind in _POLYHEDRAL and not self.include_reflections:
            return f"{self.kind}(rotations)"
        return self.kind


@dataclass(frozen=True)
class SpectrumEntry:
    degree: int
    multiplicity: int
    eigenvalue: float


@dataclass(frozen=True)
class GroupSpectrum:
    """Ordered list of invariant degrees (i_k, m_k, mu_{i_k}), degree 0 excluded."""

    group: SymmetryGroup
    entries: tuple[SpectrumEntry, ...]

    def __post_init__(self) -> None:
        degs = [e.degree for e in self.entries]
        if any(d < 1 for d in degs):
            raise ValidationError("spectrum entries must have degree >= 1")
        if any(b <= a for a, b in zip(degs, degs[1:])):
            raise ValidationError("spectrum degrees must be strictly increasing")
        for e in self.entries:
            expected = sphere_eigenvalue(e.degree, self.group.ambient_N)
            if e.eigenvalue != expected:
                raise ValidationError(
                    f"entry degree {e.degree}: eigenvalue {e.eigenvalue} != k(k+N-2) = {expected}"
                )

    @property
    def degrees(self) -> list[int]:
        return [e.degree for e in self.entries]

    def entry_for(self, degree: int) -> SpectrumEntry:
        for e in self.entries:
            if e.degree == degree:
                return e
        raise ValidationError(f"degree {degree} not in the {self.group.label} spectrum")

    def to_json(self) -> dict:
        return {
            "group": self.group.label,
            "N": self.group.ambient_N,
            "entries": [
                {"i": e.degree, "m": e.multiplicity, "mu": e.eigenvalue} for e in self.entries
            ],
        }


def sphere_eigenvalue(k: int, N: int) -> float:
    """Eigenvalue k(k+N-2) of -Delta on S^(N-1) for degree-k harmonics."""
    if k < 0:
        raise ValidationError("degree must be >= 0")
    return float(k * (k + N - 2))


def full_harmonic_dim(k: int, N: int) -> int:
    """Dimension (2k+N-2)(k+N-3)!/(k!(N-2)!) of degree-k harmonics on S^(N-1)."""
    if k == 0:
        return 1
    return (2 * k + N - 2) * math.factorial(k + N - 3) // (math.factorial(k) * math.factorial(N - 2))


# ----------------------------------------------------------------------------
# element tables
# ----------------------------------------------------------------------------

def _quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _sign_combos(values: tuple[float, ...]) -> list[tuple[float, ...]]:
    out = [()]
    for v in values:
        if v == 0.0:
            out = [t + (0.0,) for t in out]
        else:
            out = [t + (s * v,) for t in out for s in (1.0, -1.0)]
    return out


@lru_cache(maxsize=None)
def binary_tetrahedral() -> np.ndarray:
    """The 24 unit Hurwitz quaternions."""
    quats = []
    for i in range(4):
        for s in (1.0, -1.0):
            q = [0.0] * 4
            q[i] = s
            quats.append(tuple(q))
    quats += _sign_combos((0.5, 0.5, 0.5, 0.5))
    return np.array(sorted(set(quats)))


@lru_cache(maxsize=None)
def binary_octahedral() -> np.ndarray:
    s = 1.0 / math.sqrt(2.0)
    quats = set(map(tuple, binary_tetrahedral()))
    for i in range(4):
        for j in range(i + 1, 4):
            for si in (s, -s):
                for sj in (s, -s):
                    q = [0.0] * 4
                    q[i], q[j] = si, sj
                    quats.add(tuple(q))
    return np.array(sorted(quats))


def _even_permutations4() -> list[tuple[int, int, int, int]]:
    from itertools import permutations

    def parity(p):
        inv = sum(1 for a in range(4) for b in range(a + 1, 4) if p[a] > p[b])
        return inv % 2

    return [p for p in permutations(range(4)) if parity(p) == 0]


@lru_cache(maxsize=None)
def binary_icosahedral() -> np.ndarray:
    """The 120 unit icosians (vertices of the 600-cell)."""
    quats = set(map(tuple, binary_tetrahedral()))
    base = (0.0, 0.5, 1.0 / (2.0 * _PHI), _PHI / 2.0)
    for perm in _even_permutations4():
        permuted = tuple(base[perm.index(i)] for i in range(4))
        for q in _sign_combos(permuted):
            quats.add(q)
    arr = np.array(sorted(quats))
    if arr.shape[0] != 120:
        raise AssertionError(f"binary icosahedral construction produced {arr.shape[0]} != 120")
    return arr


@lru_cache(maxsize=None)
def _rotation_matrices(kind: str) -> np.ndarray:
    quats = {
        "tetrahedral": binary_tetrahedral,
        "octahedral": binary_octahedral,
        "icosahedral": binary_icosahedral,
    }[kind]()
    mats = {tuple(np.round(_quat_to_matrix(q), 12).ravel()) for q in quats}
    out = np.array([np.array(m).reshape(3, 3) for m in sorted(mats)])
    return out


@lru_cache(maxsize=None)
def _dihedral_matrices(m: int, include_reflections: bool) -> np.ndarray:
    mats = []
    for k in range(m):
        a = 2.0 * math.pi * k / m
        mats.append([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    if include_reflections:
        for k in range(m):
            # reflection through the axis at angle k*pi/m
            a = 2.0 * math.pi * k / m
            mats.append([[math.cos(a), math.sin(a)], [math.sin(a), -math.cos(a)]])
    return np.array(mats)


def group_matrices(group: SymmetryGroup) -> np.ndarray:
    """Orthogonal matrices of every group element (N = 2, 3) or the 4x4
    rotation matrices of every element for the 600-cell group (N = 4)."""
    if group.kind == "full":
        return np.eye(group.ambient_N)[None, :, :]
    if group.kind == "dihedral":
        return _dihedral_matrices(group.m, group.include_reflections)
    if group.kind in _POLYHEDRAL:
        rot = _rotation_matrices(group.kind)
        if not group.include_reflections:
            return rot
        if group.kind in ("octahedral", "icosahedral"):
            # full group = rotations x {+-1}
            return np.concatenate([rot, -rot], axis=0)
        # T_d = T together with -(O \ T)
        oct_rot = _rotation_matrices("octahedral")
        tet_keys = {tuple(np.round(g, 10).ravel()) for g in rot}
        extra = np.array([g for g in oct_rot if tuple(np.round(g, 10).ravel()) not in tet_keys])
        return np.concatenate([rot, -extra], axis=0)
    # hyper-icosahedral: x -> l x conj(r) as 4x4 matrices, one per +- pair
    pairs = hyper_icosahedral_pairs()
    return np.einsum("nij,njk->nik", _quat_left_matrix(pairs[:, 0]),
                     _quat_right_conj_matrix(pairs[:, 1]))


@lru_cache(maxsize=None)
def hyper_icosahedral_pairs() -> np.ndarray:
    """Quaternion pairs (l, r) representing the 7200 rotations of the 600-cell,
    one representative per identification (l, r) ~ (-l, -r)."""
    icos = binary_icosahedral()
    pairs = []
    for l in icos:
        if (l[0], l[1], l[2], l[3]) < (0.0, 0.0, 0.0, 0.0):
            continue  # take l from one half; (l, r) and (-l, -r) coincide
        # l = 0-quaternion impossible; exact halving needs care for l ~ -l pairs
    # robust dedup: canonical sign on the pair
    seen = set()
    out = []
    for l in icos:
        for r in icos:
            key1 = tuple(np.round(np.concatenate([l, r]), 9))
            key2 = tuple(np.round(np.concatenate([-l, -r]), 9))
            key = min(key1, key2)
            if key in seen:
                continue
            seen.add(key)
            out.append((l, r))
    arr = np.array(out)
    if arr.shape[0] != 7200:
        raise AssertionError(f"600-cell rotation group has {arr.shape[0]} != 7200 elements")
    return arr


def _quat_left_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix of x -> q*x on R^4 (quaternion product), batched."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    o = np.zeros_like(w)
    return np.stack(
        [
            np.stack([w, -x, -y, -z], -1),
            np.stack([x, w, -z, y], -1),
            np.stack([y, z, w, -x], -1),
            np.stack([z, -y, x, w], -1),
        ],
        -2,
    ) + 0.0 * o[..., None, None]

def _quat_right_conj_matrix(q: np.ndarray) -> np.ndarray:
    """Matrix of x -> x*conj(q) on R^4, batched."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    o = np.zeros_like(w)
    return np.stack(
        [
            np.stack([w, x, y, z], -1),
            np.stack([-x, w, -z, y], -1),
            np.stack([-y, z, w, -x], -1),
            np.stack([-z, -y, x, w], -1),
        ],
        -2,
    ).transpose(0, 2, 1) + 0.0 * o[..., None, None]


# ----------------------------------------------------------------------------
# character averaging
# ----------------------------------------------------------------------------

def _rot_char_s2(k: int, cos_angle: np.ndarray) -> np.ndarray:
    """Character of a rotation by angle a on degree-k harmonics of S^2:
    1 + 2*sum_{m=1..k} cos(m a)  (stable form of sin((k+1/2)a)/sin(a/2))."""
    a = np.arccos(np.clip(cos_angle, -1.0, 1.0))
    out = np.ones_like(a)
    for m_ in range(1, k + 1):
        out += 2.0 * np.cos(m_ * a)
    return out


def _su2_char(k: int, cos_half: np.ndarray) -> np.ndarray:
    """Character of the (k+1)-dimensional SU(2) irrep at the quaternion with
    scalar part cos_half: sum_{j=0..k} cos((k-2j) a)."""
    a = np.arccos(np.clip(cos_half, -1.0, 1.0))
    out = np.zeros_like(a)
    for j in range(k + 1):
        out += np.cos((k - 2 * j) * a)
    return out


def _multiplicity(group: SymmetryGroup, k: int) -> int:
    N = group.ambient_N
    if group.kind == "full":
        return full_harmonic_dim(k, N)
    if N == 2:
        mats = group_matrices(group)
        # rotations contribute 2cos(k a), reflections have trace 0 on each
        # 2-dimensional Fourier pair
        total = 0.0
        for g in mats:
            if np.linalg.det(g) > 0:
                angle = math.atan2(g[1, 0], g[0, 0])
                total += 2.0 * math.cos(k * angle)
        avg = total / mats.shape[0]
    elif N == 3:
        mats = group_matrices(group)
        dets = np.linalg.det(mats)
        proper = dets > 0
        total = 0.0
        cos_prop = (np.trace(mats[proper], axis1=1, axis2=2) - 1.0) / 2.0
        total += _rot_char_s2(k, cos_prop).sum()
        if (~proper).any():
            # improper g acts like inversion o rotation(-g): parity (-1)^k
            cos_imp = (np.trace(-mats[~proper], axis1=1, axis2=2) - 1.0) / 2.0
            total += (-1.0) ** k * _rot_char_s2(k, cos_imp).sum()
        avg = total / mats.shape[0]
    elif N == 4:
        # H_k(S^3) = V_k (x) V_k under SU(2)xSU(2); the sum factorizes over 2I
        icos = binary_icosahedral()
        t = _su2_char(k, icos[:, 0]).sum()
        avg = (t * t) / (120.0 * 120.0)
    else:
        raise ValidationError(f"no multiplicity machinery for ambient_N = {N}")
    m_int = int(round(avg))
    if abs(avg - m_int) > 1e-8:
        raise AssertionError(f"character average {avg} for degree {k} is not near an integer")
    return m_int


def group_restricted_spectrum(group: SymmetryGroup, k_max: int) -> GroupSpectrum:
    """Invariant-degree spectrum of the group up to degree k_max.

    Parameters
    ----------
    group : SymmetryGroup
    k_max : int
        Largest harmonic degree scanned (>= 1).

    Returns
    -------
    GroupSpectrum
        Entries (i_k, m_k, mu) for every degree in [1, k_max] whose space of
        invariant harmonics is nonzero; multiplicities by character averaging.
    """
    if k_max < 1:
        raise ValidationError("k_max must be >= 1")
    entries = []
    for k in range(1, k_max + 1):
        m_k = _multiplicity(group, k)
        if m_k > 0:
            entries.append(SpectrumEntry(k, m_k, sphere_eigenvalue(k, group.ambient_N)))
    return GroupSpectrum(group, tuple(entries))


# ----------------------------------------------------------------------------
# hypothesis (G1)
# ----------------------------------------------------------------------------

def g1_threshold(N: int) -> float:
    """The first-invariant-degree threshold (2-N+sqrt((N-2)^2+(16/9)(N+2)(N-1)))/2."""
    if N < 2:
        raise ValidationError("N must be >= 2")
    return 0.5 * (2.0 - N + math.sqrt((N - 2.0) ** 2 + (16.0 / 9.0) * (N + 2.0) * (N - 1.0)))


def g1_mu_bound(N: int) -> float:
    """The implied eigenvalue bound mu_{i_1} >= (4/9)(N+2)(N-1)."""
    return (4.0 / 9.0) * (N + 2.0) * (N - 1.0)


@dataclass(frozen=True)
class G1Report:
    satisfied: bool
    i1: int
    m1: int
    m1_odd: bool
    threshold: float
    degree_ok_strict: bool
    degree_ok_nonstrict: bool
    mu_i1: float
    mu_bound: float

    def to_json(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "i1": self.i1,
            "m1": self.m1,
            "m1_odd": self.m1_odd,
            "threshold": self.threshold,
            "degree_ok_strict": self.degree_ok_strict,
            "degree_ok_nonstrict": self.degree_ok_nonstrict,
            "mu_i1": self.mu_i1,
            "mu_bound": self.mu_bound,
        }


def check_g1(spectrum: GroupSpectrum) -> G1Report:
    """Evaluate hypothesis (G1): m_1 odd and i_1 above the dimension threshold.

    Both the strict (i_1 > threshold) and non-strict verdicts are reported;
    `satisfied` uses the strict version, tied to mu_{i_1} >= (4/9)(N+2)(N-1).
    """
    if not spectrum.entries:
        raise ValidationError("spectrum is empty")
    first = spectrum.entries[0]
    N = spectrum.group.ambient_N
    thr = g1_threshold(N)
    strict = first.degree > thr
    nonstrict = first.degree >= thr
    odd = first.multiplicity % 2 == 1
    return G1Report(
        satisfied=odd and strict,
        i1=first.degree,
        m1=first.multiplicity,
        m1_odd=odd,
        threshold=thr,
        degree_ok_strict=strict,
        degree_ok_nonstrict=nonstrict,
        mu_i1=first.eigenvalue,
        mu_bound=g1_mu_bound(N),
    )


# ----------------------------------------------------------------------------
# projection oracle and invariant bases
# ----------------------------------------------------------------------------

_RANK_TOL = 1e-8


def _real_sph_basis(l: int, points: np.ndarray) -> np.ndarray:
    """Real orthonormal degree-l spherical harmonics at unit points (M, 3)."""
    from scipy import special

    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    cols = []
    if hasattr(special, "sph_harm_y"):
        def Y(m_, l_):
            return special.sph_harm_y(l_, m_, theta, phi)
    else:  # pragma: no cover - older scipy
        def Y(m_, l_):
            return special.sph_harm(m_, l_, phi, theta)
    for m_ in range(-l, l + 1):
        if m_ == 0:
            cols.append(np.real(Y(0, l)))
        elif m_ > 0:
            cols.append(math.sqrt(2.0) * (-1.0) ** m_ * np.real(Y(m_, l)))
        else:
            cols.append(math.sqrt(2.0) * (-1.0) ** m_ * np.imag(Y(-m_, l)))
    return np.stack(cols, axis=1)


def _fibonacci_sphere(n: int) -> np.ndarray:
    """Quasi-uniform points on S^2 (Fibonacci lattice)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = 2.0 * math.pi * i * (1.0 - 1.0 / _PHI)
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@lru_cache(maxsize=None)
def _s2_projector(kind: str, include_reflections: bool, degree: int) -> np.ndarray:
    """Group-averaged action on the real degree-l harmonic basis (symmetric)."""
    group = SymmetryGroup(kind, 3, include_reflections=include_reflections) \
        if kind != "full" else SymmetryGroup("full", 3)
    mats = group_matrices(group)
    pts = _fibonacci_sphere(max(400, 12 * (2 * degree + 1)))
    B = _real_sph_basis(degree, pts)
    A = np.zeros_like(B)
    for g in mats:
        A += _real_sph_basis(degree, pts @ g)
    A /= mats.shape[0]
    P, *_ = np.linalg.lstsq(B, A, rcond=None)
    return 0.5 * (P + P.T)


def _su2_rep_matrix(q: np.ndarray, k: int) -> np.ndarray:
    """Matrix of the (k+1)-dim SU(2) irrep on binary forms z1^a z2^(k-a)."""
    w, x, y, z = q
    U = np.array([[w + 1j * x, y + 1j * z], [-y + 1j * z, w - 1j * x]])
    V = U.conj().T  # action f(V z)
    cols = []
    for a in range(k + 1):
        f1 = np.array([math.comb(a, j) * V[0, 0] ** j * V[0, 1] ** (a - j) for j in range(a + 1)])
        b = k - a
        f2 = np.array([math.comb(b, j) * V[1, 0] ** j * V[1, 1] ** (b - j) for j in range(b + 1)])
        cols.append(np.convolve(f1, f2))
    return np.stack(cols, axis=1)


def invariant_projection_rank(group: SymmetryGroup, degree: int) -> int:
    """Numerical rank of the group-averaged span of an explicit degree basis.

    Independent of character averaging: explicit basis functions (Fourier
    pairs, real spherical harmonics, binary forms) are averaged over the
    element table and the rank is the count of singular values > 1e-8.
    """
    if degree < 0:
        raise ValidationError("degree must be >= 0")
    if degree == 0:
        return 1
    N = group.ambient_N
    if group.kind == "full":
        return full_harmonic_dim(degree, N)
    if N == 2:
        mats = group_matrices(group)
        P = np.zeros((2, 2))
        for g in mats:
            det = np.linalg.det(g)
            a = math.atan2(g[1, 0], g[0, 0])
            c, s = math.cos(degree * a), math.sin(degree * a)
            if det > 0:
                P += np.array([[c, s], [-s, c]])
            else:
                # reflection through axis at angle a/2: theta -> a - theta
                P += np.array([[c, s], [s, -c]])
        P /= mats.shape[0]
        sv = np.linalg.svd(P, compute_uv=False)
        return int((sv > _RANK_TOL).sum())
    if N == 3:
        P = _s2_projector(group.kind, group.include_reflections, degree)
        sv = np.linalg.svd(P, compute_uv=False)
        return int((sv > _RANK_TOL).sum())
    if N == 4:
        icos = binary_icosahedral()
        P = np.zeros((degree + 1, degree + 1), dtype=complex)
        for q in icos:
            P += _su2_rep_matrix(q, degree)
        P /= icos.shape[0]
        sv = np.linalg.svd(P, compute_uv=False)
        t = int((sv > _RANK_TOL).sum())
        return t * t
    raise ValidationError(f"no projection machinery for ambient_N = {N}")


class InvariantBasis:
    """Orthonormal (L^2 of the sphere) basis of invariant degree-k harmonics,
    evaluable at embedded unit points of shape (M, ambient_N)."""

    def __init__(self, group: SymmetryGroup, degree: int, dim: int, evaluate):
        self.group = group
        self.degree = degree
        self.dim = dim
        self._evaluate = evaluate

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at unit points, shape (M, dim)."""
        return self._evaluate(np.asarray(points, dtype=float))


def invariant_basis(group: SymmetryGroup, degree: int) -> InvariantBasis:
    """Construct the invariant harmonic basis at a degree with nonzero multiplicity."""
    N = group.ambient_N
    if N == 2:
        if group.kind == "full":
            def ev_full(pts):
                th = np.arctan2(pts[:, 1], pts[:, 0])
                return np.stack(
                    [np.cos(degree * th), np.sin(degree * th)], axis=1
                ) / math.sqrt(math.pi)
            return InvariantBasis(group, degree, 2, ev_full)
        if degree % group.m != 0:
            raise ValidationError(f"degree {degree} is not {group.label}-invariant")

        def ev(pts):
            th = np.arctan2(pts[:, 1], pts[:, 0])
            return (np.cos(degree * th) / math.sqrt(math.pi))[:, None]

        return InvariantBasis(group, degree, 1, ev)
    if N == 3:
        if group.kind == "full":
            def ev3_full(pts):
                return _real_sph_basis(degree, pts)
            return InvariantBasis(group, degree, 2 * degree + 1, ev3_full)
        P = _s2_projector(group.kind, group.include_reflections, degree)
        vals, vecs = np.linalg.eigh(P)
        keep = vals > 0.5
        if not keep.any():
            raise ValidationError(f"degree {degree} is not {group.label}-invariant")
        C = vecs[:, keep]  # orthonormal coefficient vectors

        def ev3(pts):
            return _real_sph_basis(degree, pts) @ C

        return InvariantBasis(group, degree, int(keep.sum()), ev3)
    if N == 4:
        if group.kind != "hyper-icosahedral":
            raise ValidationError("only the 600-cell group is supported on S^3")
        return _hyper_invariant_basis(degree)
    raise ValidationError(f"no invariant basis machinery for ambient_N = {N}")


def _chebyshev_u(k: int, t: np.ndarray) -> np.ndarray:
    """Chebyshev U_k (the degree-k zonal harmonic kernel on S^3)."""
    u_prev = np.ones_like(t)
    if k == 0:
        return u_prev
    u = 2.0 * t
    for _ in range(k - 1):
        u, u_prev = 2.0 * t * u - u_prev, u
    return u


@lru_cache(maxsize=None)
def _hyper_orbit(degree: int, n_poles: int, seed: int = 20240) -> tuple[np.ndarray, np.ndarray]:
    pairs = hyper_icosahedral_pairs()
    L = _quat_left_matrix(pairs[:, 0])
    R = _quat_right_conj_matrix(pairs[:, 1])
    mats = np.einsum("nij,njk->nik", L, R)
    rng = np.random.default_rng(seed)
    poles = rng.normal(size=(n_poles, 4))
    poles /= np.linalg.norm(poles, axis=1, keepdims=True)
    orbits = np.einsum("nij,pj->pni", mats, poles)  # (n_poles, 7200, 4)
    return poles, orbits


def _hyper_invariant_basis(degree: int) -> InvariantBasis:
    group = SymmetryGroup("hyper-icosahedral", 4)
    m = _multiplicity(group, degree)
    if m == 0:
        raise ValidationError(f"degree {degree} is not invariant under the 600-cell group")
    poles, orbits = _hyper_orbit(degree, max(2 * m, 2))
    vol = 2.0 * math.pi ** 2
    n_g = orbits.shape[1]

    def raw_gram() -> np.ndarray:
        # <P z_a, P z_b> = (vol/(k+1)) * avg_g U_k(<y_a, g y_b>)
        G = np.empty((poles.shape[0], poles.shape[0]))
        for b in range(poles.shape[0]):
            t = orbits[b] @ poles.T  # (7200, n_poles)
            G[:, b] = (vol / (degree + 1)) * _chebyshev_u(degree, t).mean(axis=0)
        return 0.5 * (G + G.T)

    G = raw_gram()
    vals, vecs = np.linalg.eigh(G)
    keep = vals > 1e-8 * vals.max()
    if keep.sum() < m:
        raise AssertionError("hyper-icosahedral pole set failed to span the invariant space")
    C = vecs[:, keep][:, -m:] / np.sqrt(vals[keep][-m:])  # orthonormalizing combo

    def ev(pts):
        # averaged zonals at pts, combined by C
        base = np.empty((pts.shape[0], poles.shape[0]))
        for a in range(poles.shape[0]):
            t = pts @ orbits[a].reshape(-1, 4).T  # (M, 7200)
            base[:, a] = _chebyshev_u(degree, t).mean(axis=1)
        return base @ C

    return InvariantBasis(group, degree, m, ev)


# ----------------------------------------------------------------------------
# sphere quadrature (exact product rules for N = 2, 3)
# ----------------------------------------------------------------------------

def sphere_quadrature(N: int, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature (points, weights) on S^(N-1) exact for polynomial integrands
    up to total degree 2*max_degree (products of two degree-max_degree harmonics).

    N = 2: equal-weight trapezoid on the circle; N = 3: Gauss-Legendre in
    cos(theta) x uniform azimuth.
    """
    if N == 2:
        M = 4 * max_degree + 8
        th = 2.0 * math.pi * np.arange(M) / M
        pts = np.stack([np.cos(th), np.sin(th)], axis=1)
        wts = np.full(M, 2.0 * math.pi / M)
        return pts, wts
    if N == 3:
        n_t = 2 * max_degree + 4
        t, wt = np.polynomial.legendre.leggauss(n_t)
        n_p = 4 * max_degree + 8
        ph = 2.0 * math.pi * np.arange(n_p) / n_p
        T, PH = np.meshgrid(t, ph, indexing="ij")
        rho = np.sqrt(1.0 - T ** 2)
        pts = np.stack([rho * np.cos(PH), rho * np.sin(PH), T], axis=-1).reshape(-1, 3)
        wts = (np.repeat(wt, n_p) * (2.0 * math.pi / n_p))
        return pts, wts
    raise ValidationError("exact sphere quadrature implemented for N in {2, 3}")
